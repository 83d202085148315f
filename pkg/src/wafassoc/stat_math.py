"""Scalar and vectorised numerical kernels.

Normal tail probabilities are evaluated in log space so that the
``-log p`` transform stays finite for arbitrarily extreme scores.  The
random number plumbing is built on Philox, a counter-based generator:
a stream is identified by ``(seed, stream_id)`` and any two streams can be
created independently, in any order, on any thread.  Permutations use
a lighter SplitMix64 counter sequence keyed by the stream
(:meth:`RngStream.counter_key`) so compiled and numpy kernels agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.signal import lfilter

from .errors import DomainError

__all__ = [
    "RngStream",
    "as_generator",
    "normal_sf_log",
    "neg_log_two_sided_p",
    "sample_ar1_vector",
    "sample_ar1_matrix",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)
_ASYMPTOTIC_CUTOFF = 8.0
_SMALL_Z = 1.0
_MASK64 = (1 << 64) - 1


def _check_finite(z: np.ndarray) -> None:
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite argument")


def _log_mills_tail(z: np.ndarray) -> np.ndarray:
    """log of the asymptotic series 1 - 1/z^2 + 3/z^4 - 15/z^6 + ... for z > 8.

    Terms shrink by (2j-1)/z^2 until j ~ z^2/2, so for z > 8 summing until
    the term falls under 1e-17 never reaches the divergent part.
    """
    inv_z2 = 1.0 / (z * z)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for j in range(1, 40):
        term = -term * (2 * j - 1) * inv_z2
        total = total + term
        if np.all(np.abs(term) < 1e-17):
            break
    return np.log(total)


def _log_sf(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    mid = z <= _ASYMPTOTIC_CUTOFF
    if np.any(mid):
        out[mid] = np.log(0.5 * special.erfc(z[mid] / _SQRT2))
    big = ~mid
    if np.any(big):
        zb = z[big]
        out[big] = -0.5 * zb * zb - _LOG_SQRT_2PI - np.log(zb) + _log_mills_tail(zb)
    return out


def normal_sf_log(z):
    """Log of the standard normal upper tail, ``log(1 - Phi(z))`` for ``z >= 0``.

    Accepts a scalar or an array; returns the same shape.  Arguments above 8
    use the asymptotic Mills-ratio expansion.
    """
    arr = np.asarray(z, dtype=np.float64)
    _check_finite(arr)
    if np.any(arr < 0):
        raise DomainError("normal_sf_log requires z >= 0")
    out = _log_sf(np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def neg_log_two_sided_p(z):
    """``-log p`` with ``p = 2 (1 - Phi(|z|))``; zero at ``z = 0``, finite everywhere.

    Near zero ``p`` is close to one, so ``-log1p(-erf)`` is used there to keep
    relative precision; this matters because permutation ranks compare
    nearby values.
    """
    arr = np.asarray(z, dtype=np.float64)
    _check_finite(arr)
    a = np.abs(np.atleast_1d(arr))
    out = np.empty_like(a)
    small = a < _SMALL_Z
    out[small] = -np.log1p(-special.erf(a[small] / _SQRT2))
    mid = (~small) & (a <= _ASYMPTOTIC_CUTOFF)
    out[mid] = -np.log(special.erfc(a[mid] / _SQRT2))
    big = a > _ASYMPTOTIC_CUTOFF
    if np.any(big):
        out[big] = -(_LOG2 + _log_sf(a[big]))
    # -0.0 would otherwise leak into sorted partial sums
    out += 0.0
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _splitmix64_vec(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream addressed by ``(seed, stream_id)``.

    ``spawn`` derives child streams by hashing indices into the stream id, so
    permutation ``b`` of replicate ``r`` is ``root.spawn(r).spawn(b)`` no
    matter which thread asks for it or when.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def spawn(self, *indices: int) -> "RngStream":
        sid = self.stream_id
        for i in indices:
            sid = _splitmix64(_splitmix64(sid) ^ (int(i) & _MASK64))
        return RngStream(self.seed, sid)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=(self.seed << 64) | self.stream_id))

    @property
    def counter_key(self) -> int:
        """64-bit key for the SplitMix64 counter sequence used by permutations."""
        return _splitmix64(_splitmix64(self.seed) ^ self.stream_id)

    def child_counter_keys(self, indices) -> np.ndarray:
        """``[self.spawn(i).counter_key for i in indices]``, vectorised."""
        idx = np.asarray(indices, dtype=np.uint64)
        with np.errstate(over="ignore"):
            sids = _splitmix64_vec(np.uint64(_splitmix64(self.stream_id)) ^ idx)
            return _splitmix64_vec(np.uint64(_splitmix64(self.seed)) ^ sids)


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngStream`, a ``Generator`` or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def _check_ar1(K: int, c: float) -> None:
    if K < 1:
        raise DomainError("K must be at least 1")
    if not (0.0 <= c < 1.0):
        raise DomainError(f"AR(1) coefficient must lie in [0, 1), got {c}")


def sample_ar1_vector(K: int, c: float, rng) -> np.ndarray:
    """One draw from N(0, A) with ``A[k, k'] = c**|k - k'|``, by the AR(1) recursion."""
    return sample_ar1_matrix(1, K, c, rng)[0]


def sample_ar1_matrix(n: int, K: int, c: float, rng) -> np.ndarray:
    """``n`` independent AR(1) rows of length ``K`` (shape ``(n, K)``)."""
    _check_ar1(K, c)
    gen = as_generator(rng)
    eps = gen.standard_normal((n, K))
    if c == 0.0:
        return eps
    s = math.sqrt(1.0 - c * c)
    # filter computes z_k = c z_{k-1} + s eps_k; pre-dividing eps_1 makes z_1 = eps_1
    eps[:, 0] /= s
    return lfilter([s], [1.0, -c], eps, axis=1)
