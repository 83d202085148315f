"""Backend selection for the permutation hot loops.

The compiled extension is used when it imports; set ``WAFASSOC_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("WAFASSOC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

# numpy's vectorised row sort beats a per-row std::sort at typical K, and the
# two agree bit for bit, so this kernel always uses the numpy version
weighted_partial_sums = _kernels_py.weighted_partial_sums
column_rank_pvalues = _impl.column_rank_pvalues
fisher_yates_permutations = _impl.fisher_yates_permutations


def get_backend(name=None):
    """Return the kernel module for ``name`` ('cython' or 'python'), default current."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
