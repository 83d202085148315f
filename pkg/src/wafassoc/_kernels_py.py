"""Pure-numpy implementations of the permutation hot loops.

These are the reference versions; ``_ckernels`` must agree bit for bit.
"""

import numpy as np


def weighted_partial_sums(R, w):
    """Row-wise partial sums of ``w * R`` sorted in descending order."""
    X = np.asarray(R, dtype=np.float64) * np.asarray(w, dtype=np.float64)
    X.sort(axis=1)
    return np.cumsum(X[:, ::-1], axis=1)


def column_rank_pvalues(S):
    """For each entry, the fraction of its column that is ``>=`` it."""
    S = np.asarray(S, dtype=np.float64)
    m, K = S.shape
    srt = np.sort(S, axis=0)
    counts = np.empty((m, K), dtype=np.float64)
    for k in range(K):
        counts[:, k] = m - np.searchsorted(srt[:, k], S[:, k], side="left")
    return counts / m


_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S32 = (np.uint64(s) for s in (30, 27, 31, 32))


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def fisher_yates_permutations(keys, n):
    """One Fisher-Yates permutation of ``range(n)`` per 64-bit key.

    Row ``b`` is driven by the SplitMix64 sequence started at ``keys[b]``;
    step ``t`` (swapping position ``i = n-1-t``) draws ``j`` by the 32-bit
    multiply-shift ``((x >> 32) * (i + 1)) >> 32``.  All rows advance in
    lockstep so the loop is over ``n``, not over permutations.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    m = keys.shape[0]
    perms = np.tile(np.arange(n, dtype=np.intp), (m, 1))
    rows = np.arange(m)
    state = keys.copy()
    with np.errstate(over="ignore"):
        for i in range(n - 1, 0, -1):
            state += _GAMMA
            x = _mix(state)
            j = (((x >> _S32) * np.uint64(i + 1)) >> _S32).astype(np.intp)
            tmp = perms[rows, j]
            perms[rows, j] = perms[:, i]
            perms[:, i] = tmp
    return perms
