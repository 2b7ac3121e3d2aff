"""Kernel dispatch: the compiled extension when available, else the pure-Python fallback.

Set ``QSTREE_PURE_PYTHON=1`` to force the fallback.  ``ratio_argext``
multiplies matrix entries pairwise in 64-bit integers, so callers must keep
entries below ``2**31``; :func:`safe_ratio_argext` checks this and routes
oversized inputs to the arbitrary-precision fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("QSTREE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

tree_distances = _impl.tree_distances
tree_distance_matrix = _impl.tree_distance_matrix
path_max_sweep = _impl.path_max_sweep
branch_diameters = _impl.branch_diameters
cut_components = _impl.cut_components

_LIMIT = 1 << 31


def safe_ratio_argext(num, den, maximize):
    num = np.asarray(num)
    den = np.asarray(den)
    if num.size and (num.dtype == object or den.dtype == object
                     or int(np.abs(num).max()) >= _LIMIT or int(np.abs(den).max()) >= _LIMIT):
        return _pykernels.ratio_argext(num, den, maximize)
    return _impl.ratio_argext(num.astype(np.int64), den.astype(np.int64), maximize)


def backends():
    """Available kernel modules keyed by name (used by tests and the benchmark)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
