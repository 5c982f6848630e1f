"""Shrinkage kernel backend selection.

The three row/entry shrinkage kernels run once per ADMM iteration, so a
compiled extension (``_fast``, built from Cython) is preferred when present.
Importing this package falls back to the NumPy implementations when the
extension is missing or when ``GGMLAB_PURE_PYTHON`` is set in the
environment.  Both backends compute identical results (see
``tests/test_kernels.py``); ``benchmarks/bench_kernels.py`` compares speed.
"""
import os

from . import _numpy as _numpy_impl

if os.environ.get("GGMLAB_PURE_PYTHON"):
    _impl = _numpy_impl
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy_impl

soft_threshold = _impl.soft_threshold
group_row_shrink = _impl.group_row_shrink
weighted_row_shrink = _impl.weighted_row_shrink


def backend() -> str:
    """Name of the active kernel backend, ``"compiled"`` or ``"numpy"``."""
    return "numpy" if _impl is _numpy_impl else "compiled"
