"""Backend equivalence: compiled shrinkage kernels vs the NumPy fallback."""
import numpy as np
import pytest

from ggmlab._kernels import _numpy as pure
from ggmlab._kernels import backend

try:
    from ggmlab._kernels import _fast as fast
except ImportError:
    fast = None

needs_ext = pytest.mark.skipif(fast is None, reason="extension not built")


def _cases(rng, rows, cols):
    yield rng.standard_normal((rows, cols))
    yield np.zeros((rows, cols))
    z = rng.standard_normal((rows, cols))
    z[0] = 0.0
    yield z


@needs_ext
def test_soft_threshold_matches():
    rng = np.random.default_rng(0)
    for z in _cases(rng, 7, 5):
        for t in (0.0, 0.3, 10.0):
            np.testing.assert_array_equal(fast.soft_threshold(z, t),
                                          pure.soft_threshold(z, t))


@needs_ext
def test_group_row_shrink_matches():
    rng = np.random.default_rng(1)
    for z in _cases(rng, 6, 4):
        for t in (0.0, 0.5, 3.0):
            np.testing.assert_allclose(fast.group_row_shrink(z, t),
                                       pure.group_row_shrink(z, t),
                                       rtol=0, atol=1e-15)


@needs_ext
def test_weighted_row_shrink_matches():
    rng = np.random.default_rng(2)
    w = rng.uniform(0.2, 2.0, 6)
    for z in _cases(rng, 6, 4):
        for t in (0.0, 0.4, 2.5):
            np.testing.assert_allclose(fast.weighted_row_shrink(z, t, w),
                                       pure.weighted_row_shrink(z, t, w),
                                       rtol=0, atol=1e-15)


@needs_ext
def test_exact_kink_zeroes_row():
    z = np.array([[3.0, 4.0]])
    np.testing.assert_array_equal(fast.group_row_shrink(z, 5.0), [[0.0, 0.0]])
    np.testing.assert_array_equal(pure.group_row_shrink(z, 5.0), [[0.0, 0.0]])


def test_backend_reports_a_name():
    assert backend() in ("compiled", "numpy")
