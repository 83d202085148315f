"""Permutation comparators: Min-P, SSU, SPU(c) and adaptive SPU.

All statistics here are evaluated row-wise on the same matrix of
standardised scores that drives wAF, so every method sees the same
permutations.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError

__all__ = [
    "METHOD_TOKENS",
    "SPU_POWERS",
    "parse_method",
    "spu_power",
    "minp_statistic",
    "ssu_statistic",
    "spu_statistic",
    "spu_all",
    "spu_significance",
    "aspu_combine",
]

SPU_POWERS = (1, 2, 3, 4, 5, 6, 7, 8, math.inf)
METHOD_TOKENS = ("waf", "af", "minp", "ssu") + tuple(f"spu{c}" for c in range(1, 9)) + ("spuInf", "aspu")
_CANONICAL = {t.lower(): t for t in METHOD_TOKENS}


def parse_method(token: str) -> str:
    """Normalise a method token (case-insensitive); raise on unknown names."""
    key = str(token).strip().lower()
    if key not in _CANONICAL:
        raise ValidationError(f"unknown method {token!r}; choose from {', '.join(METHOD_TOKENS)}")
    return _CANONICAL[key]


def spu_power(token: str) -> float:
    tail = parse_method(token)[3:]
    return math.inf if tail == "Inf" else int(tail)


def _rows(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a[None, :] if a.ndim == 1 else a


def _scalar_or_rows(out: np.ndarray, ndim: int):
    return float(out[0]) if ndim == 1 else out


def minp_statistic(U_std):
    """``max_k |U_std_k|``; larger is more significant.  Accepts a vector or rows."""
    a = np.asarray(U_std, dtype=np.float64)
    return _scalar_or_rows(np.abs(_rows(a)).max(axis=1), a.ndim)


def ssu_statistic(U):
    """Sum of squared scores with flat weights."""
    a = np.asarray(U, dtype=np.float64)
    r = _rows(a)
    return _scalar_or_rows(np.einsum("ij,ij->i", r, r), a.ndim)


def spu_all(U_std, sd, powers=SPU_POWERS) -> dict:
    """``{c: SPU(c) per row}`` for several powers, sharing the running products."""
    Y = _rows(U_std) * np.asarray(sd, dtype=np.float64)
    out = {}
    finite = sorted(int(c) for c in powers if not math.isinf(c))
    if finite and not (1 <= finite[0] and finite[-1] <= 8):
        raise ValidationError(f"SPU powers must be 1..8 or inf, got {powers}")
    Yc = None
    for c in range(1, finite[-1] + 1 if finite else 1):
        # repeated multiplication: exact same rounding whichever powers are asked for
        Yc = Y.copy() if Yc is None else Yc * Y
        if c in finite:
            out[c] = Yc.sum(axis=1)
    if any(math.isinf(c) for c in powers):
        out[math.inf] = np.abs(Y).max(axis=1)
    return out


def spu_statistic(U_std, sd, c):
    """``sum_k (sd_k U_std_k)**c``, or ``max_k |sd_k U_std_k|`` for ``c = inf``."""
    a = np.asarray(U_std, dtype=np.float64)
    key = math.inf if math.isinf(c) else int(c)
    return _scalar_or_rows(spu_all(a, sd, (key,))[key], a.ndim)


def spu_significance(stat, c):
    """Orient an SPU statistic so that larger is more extreme (two-sided for odd c)."""
    if not math.isinf(c) and int(c) % 2 == 1:
        return np.abs(stat)
    return stat


def aspu_combine(power_pvalues):
    """Adaptive SPU from per-power rank p-values.

    ``power_pvalues`` is ``(B+1, P)``: row 0 observed, rows ``1..B``
    permuted, one column of step-4 rank p-values per SPU power.  Each row is
    reduced to its minimum over powers and the observed minimum is ranked
    against the permuted ones.  Returns ``(T, p_value)``.
    """
    from .perm import min_over_k, step6_pvalue

    P = np.asarray(power_pvalues, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] < 1:
        raise ValidationError("need a (B+1) x P matrix of p-values")
    T = min_over_k(P)
    return T, step6_pvalue(T, smaller_is_extreme=True)
