"""Adaptive Fisher statistics: -log p transform, weighting, sorted partial sums."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .stat_math import neg_log_two_sided_p

__all__ = [
    "WeightScheme",
    "WeightVector",
    "PartialSumPath",
    "r_values",
    "partial_sums",
    "af_statistic",
    "read_weight_file",
]


class WeightScheme(str, enum.Enum):
    FLAT = "flat"
    MAF_SD = "maf"
    FILE = "file"


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    scheme: WeightScheme = WeightScheme.FILE

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).ravel()
        if w.size == 0:
            raise ValidationError("empty weight vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and non-negative")
        if not np.any(w > 0):
            raise ValidationError("at least one weight must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))

    def __len__(self):
        return self.w.shape[0]

    @classmethod
    def flat(cls, K: int) -> "WeightVector":
        return cls(np.ones(K), WeightScheme.FLAT)

    @classmethod
    def from_maf(cls, maf) -> "WeightVector":
        maf = np.asarray(maf, dtype=np.float64)
        return cls(np.sqrt(maf * (1.0 - maf)), WeightScheme.MAF_SD)

    def subset(self, idx) -> "WeightVector":
        return WeightVector(self.w[np.asarray(idx, dtype=np.intp)], self.scheme)

    def normalized(self) -> "WeightVector":
        """Rescaled so the largest weight is exactly 1.

        The statistic's permutation p-value is scale free; normalising makes
        ``w`` and ``2 w`` produce bit-identical arithmetic.
        """
        return WeightVector(self.w / self.w.max(), self.scheme)


def read_weight_file(path, K: int | None = None) -> WeightVector:
    """One real number per line; blank lines and ``#`` comments are ignored."""
    from .errors import ParseError

    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split("#", 1)[0].strip()
            if not tok:
                continue
            try:
                vals.append(float(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", path, lineno) from None
    if K is not None and len(vals) != K:
        raise ParseError(f"expected {K} weights, found {len(vals)}", path)
    try:
        return WeightVector(np.array(vals), WeightScheme.FILE)
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


@dataclass(frozen=True)
class PartialSumPath:
    S_star: np.ndarray
    sort_order: np.ndarray  # 0-based column indices, largest X first

    @property
    def K(self) -> int:
        return self.S_star.shape[0]


def r_values(U_std) -> np.ndarray:
    """``R_k = -log p_k`` for two-sided normal p-values of the standardised scores."""
    return neg_log_two_sided_p(np.asarray(U_std, dtype=np.float64))


def partial_sums(R, w) -> PartialSumPath:
    """Cumulative sums of ``X = w * R`` sorted in descending order.

    Ties are broken by original column index so ``sort_order`` is
    reproducible; the sums themselves do not depend on the tie rule.
    """
    R = np.asarray(R, dtype=np.float64)
    wv = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    if R.shape != wv.shape:
        raise ValidationError(f"R has length {R.shape[0]}, weights {wv.shape[0]}")
    X = R * wv
    order = np.argsort(-X, kind="stable")
    return PartialSumPath(np.cumsum(X[order]), order)


def af_statistic(path_pvalues) -> float:
    """Minimum p-value along the partial-sum path (smaller is more significant)."""
    p = np.asarray(path_pvalues, dtype=np.float64)
    if p.size == 0:
        raise DomainError("empty partial-sum path")
    if np.any(p <= 0) or np.any(p > 1):
        raise DomainError("path p-values must lie in (0, 1]")
    return float(p.min())
