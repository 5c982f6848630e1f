"""Proximal kernels against independent brute-force minimizers.

Every operator is checked three ways: the worked examples, an independent
numerical minimizer on random instances, and structural properties
(non-expansiveness, positive definiteness, limits).
"""
import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from ggmlab.prox import (CachedEigh, group_row_shrink, prox_logdet,
                         prox_p21_coupled, psd_eig_shrink, soft_threshold,
                         weighted_row_shrink)


def rand_sym(rng, n, scale=1.0):
    a = scale * rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def rand_pd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T / n + np.eye(n))


class TestSoftThreshold:
    def test_worked_example(self):
        z = np.array([[2.0, -0.3], [0.5, 1.0]])
        expected = np.array([[1.5, 0.0], [0.0, 0.5]])
        np.testing.assert_allclose(soft_threshold(z, 0.5), expected)

    def test_zero_threshold_is_identity(self):
        rng = np.random.default_rng(0)
        z = rng.standard_normal((4, 4))
        np.testing.assert_allclose(soft_threshold(z, 0.0), z)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(np.zeros((2, 2)), -0.1)

    def test_against_per_entry_oracle(self):
        # prox of t*|.| entrywise: minimize (1/(2t))(p - z)^2 + |p|
        rng = np.random.default_rng(1)
        for _ in range(20):
            z = 3 * rng.standard_normal((5, 5))
            t = float(rng.uniform(0.05, 2.0))
            got = soft_threshold(z, t)
            for idx in np.ndindex(z.shape):
                zij = z[idx]
                f = lambda p: 0.5 * (p - zij) ** 2 / t + abs(p)
                res = minimize_scalar(f, bounds=(-abs(zij) - 1, abs(zij) + 1),
                                      method="bounded",
                                      options={"xatol": 1e-12})
                assert f(got[idx]) <= res.fun + 1e-9

    def test_nonexpansive(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b = rng.standard_normal((2, 6, 6))
            t = float(rng.uniform(0, 1.5))
            lhs = np.linalg.norm(soft_threshold(a, t) - soft_threshold(b, t))
            assert lhs <= np.linalg.norm(a - b) + 1e-12


class TestGroupRowShrink:
    def test_worked_examples(self):
        np.testing.assert_allclose(
            group_row_shrink(np.array([[3.0, 4.0]]), 2.5), [[1.5, 2.0]])
        np.testing.assert_allclose(
            group_row_shrink(np.array([[3.0, 4.0]]), 5.0), [[0.0, 0.0]])

    def test_zero_rows_stay_zero(self):
        z = np.zeros((3, 4))
        np.testing.assert_allclose(group_row_shrink(z, 1.0), z)

    def test_against_radial_oracle(self):
        # rows shrink along themselves; optimize the radial scale only
        rng = np.random.default_rng(3)
        for _ in range(20):
            z = 2 * rng.standard_normal((6, 3))
            t = 0.7
            got = group_row_shrink(z, t)
            for i in range(z.shape[0]):
                norm = np.linalg.norm(z[i])
                f = lambda s: 0.5 * (s - norm) ** 2 + t * abs(s)
                res = minimize_scalar(f, bounds=(0, norm + 1),
                                      method="bounded",
                                      options={"xatol": 1e-12})
                got_scale = np.linalg.norm(got[i])
                assert abs(got_scale - res.x) < 1e-9 or res.fun >= f(got_scale) - 1e-12

    def test_nonexpansive(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = rng.standard_normal((2, 5, 3))
            t = float(rng.uniform(0, 2))
            lhs = np.linalg.norm(group_row_shrink(a, t) - group_row_shrink(b, t))
            assert lhs <= np.linalg.norm(a - b) + 1e-12


class TestWeightedRowShrink:
    def test_worked_example(self):
        # weight 2, beta*xi = 1, row (3,4): factor (1 - 2/5) = 0.6
        got = weighted_row_shrink(np.array([[3.0, 4.0]]), 1.0, np.array([2.0]))
        np.testing.assert_allclose(got, [[1.8, 2.4]])

    def test_zero_threshold_is_identity(self):
        rng = np.random.default_rng(5)
        z = rng.standard_normal((4, 3))
        w = rng.uniform(0.5, 2, 4)
        np.testing.assert_allclose(weighted_row_shrink(z, 0.0, w), z)

    def test_unit_weights_match_group_shrink(self):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((5, 4))
        np.testing.assert_allclose(weighted_row_shrink(z, 0.8, np.ones(5)),
                                   group_row_shrink(z, 0.8))

    def test_against_radial_oracle(self):
        # row prox of (1/(2 xi))||p - z||^2 + beta*theta_ii*||p||
        rng = np.random.default_rng(7)
        for _ in range(20):
            z = 2 * rng.standard_normal((4, 3))
            beta, xi = float(rng.uniform(0.1, 1)), float(rng.uniform(0.2, 2))
            th = rng.uniform(0.3, 3, 4)
            got = weighted_row_shrink(z, beta * xi, th)
            for i in range(4):
                norm = np.linalg.norm(z[i])
                f = lambda s: 0.5 * (s - norm) ** 2 / xi + beta * th[i] * abs(s)
                res = minimize_scalar(f, bounds=(0, norm + 1),
                                      method="bounded",
                                      options={"xatol": 1e-12})
                assert f(np.linalg.norm(got[i])) <= res.fun + 1e-9


def logdet_objective(r, z, s, xi):
    sign, logdet = np.linalg.slogdet(r)
    if sign <= 0:
        return np.inf
    return 0.5 * np.sum((r - z) ** 2) / xi - logdet + np.sum(s * r)


def logdet_oracle(z, s, xi):
    """L-BFGS on the Cholesky factor; independent of the eigenvalue formula."""
    n = z.shape[0]
    tril = np.tril_indices(n)

    def unpack(x):
        ell = np.zeros((n, n))
        ell[tril] = x
        return ell

    def fun(x):
        ell = unpack(x)
        r = ell @ ell.T
        val = logdet_objective(r, z, s, xi)
        grad_r = (r - z) / xi - np.linalg.inv(r) + s
        grad_l = 2 * (grad_r @ ell)
        return val, grad_l[tril]

    x0 = np.eye(n)[tril]
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12})
    ell = unpack(res.x)
    return ell @ ell.T


class TestProxLogdet:
    def test_worked_examples(self):
        np.testing.assert_allclose(
            prox_logdet(np.zeros((2, 2)), np.zeros((2, 2)), 1.0), np.eye(2),
            atol=1e-12)
        golden = (1 + np.sqrt(5)) / 2
        np.testing.assert_allclose(
            prox_logdet(np.eye(2), np.zeros((2, 2)), 1.0), golden * np.eye(2),
            atol=1e-12)

    def test_stationarity_and_positivity(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            z = rand_sym(rng, n, 2.0)
            s = rand_sym(rng, n)
            xi = float(rng.uniform(0.2, 3))
            r = prox_logdet(z, s, xi)
            assert np.linalg.eigvalsh(r)[0] > 0
            resid = (r - z) / xi - np.linalg.inv(r) + s
            assert np.linalg.norm(resid) < 1e-8

    def test_against_numerical_minimizer(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = 4
            z = rand_sym(rng, n, 1.5)
            s = rand_sym(rng, n, 0.8)
            xi = float(rng.uniform(0.3, 2))
            r = prox_logdet(z, s, xi)
            r_oracle = logdet_oracle(z, s, xi)
            ours = logdet_objective(r, z, s, xi)
            theirs = logdet_objective(r_oracle, z, s, xi)
            assert ours <= theirs + 1e-7

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            prox_logdet(np.eye(2), np.eye(2), 0.0)


class TestProxP21Coupled:
    def test_identity_summary_averages(self):
        rng = np.random.default_rng(10)
        z, z2 = rng.standard_normal((2, 3, 4))
        got = prox_p21_coupled(z, z2, 1.0, 1.0, np.eye(3))
        np.testing.assert_allclose(got, 0.5 * (z + z2), atol=1e-12)

    def test_scalar_example(self):
        got = prox_p21_coupled(np.array([[5.0]]), np.array([[5.0]]), 1.0, 1.0,
                               np.array([[2.0]]))
        np.testing.assert_allclose(got, [[3.0]])

    def test_against_dense_solve(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n2, n1 = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            th = rand_pd(rng, n2)
            z = rng.standard_normal((n2, n1))
            z2 = rng.standard_normal((n2, n1))
            xi, xi_w = float(rng.uniform(0.1, 2)), float(rng.uniform(0.1, 2))
            got = prox_p21_coupled(z, z2, xi, xi_w, th)
            lhs = xi_w * np.eye(n2) + xi * th @ th
            rhs = xi_w * z + xi * th @ z2
            np.testing.assert_allclose(got, np.linalg.solve(lhs, rhs),
                                       atol=1e-10)

    def test_limits(self):
        rng = np.random.default_rng(12)
        th = rand_pd(rng, 3)
        z = rng.standard_normal((3, 2))
        z2 = rng.standard_normal((3, 2))
        # dominant proximity term reproduces z
        np.testing.assert_allclose(prox_p21_coupled(z, z2, 1.0, 1e12, th), z,
                                   atol=1e-9)
        # dominant coupling term solves th @ p = z2
        got = prox_p21_coupled(z, z2, 1e12, 1.0, th)
        np.testing.assert_allclose(th @ got, z2, atol=1e-9)

    def test_cached_eigendecomposition_matches(self):
        rng = np.random.default_rng(13)
        th = rand_pd(rng, 4)
        z = rng.standard_normal((4, 3))
        z2 = rng.standard_normal((4, 3))
        cache = CachedEigh(th)
        np.testing.assert_allclose(
            prox_p21_coupled(z, z2, 0.7, 1.3, cache),
            prox_p21_coupled(z, z2, 0.7, 1.3, th))


class TestPsdEigShrink:
    def test_worked_examples(self):
        got = psd_eig_shrink(np.diag([3.0, -1.0]), 1.0)
        np.testing.assert_allclose(got, np.diag([2.0, 0.0]), atol=1e-12)
        rng = np.random.default_rng(14)
        z = rand_pd(rng, 4)
        np.testing.assert_allclose(psd_eig_shrink(z, 0.0), z, atol=1e-12)

    def test_against_eigenvalue_grid_oracle(self):
        # the eigenbasis diagonalizes the problem; scan each eigenvalue
        rng = np.random.default_rng(15)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            z = rand_sym(rng, n, 2.0)
            t = float(rng.uniform(0.1, 1.5))
            got = psd_eig_shrink(z, t)
            assert np.linalg.eigvalsh(got)[0] >= -1e-12
            lam = np.linalg.eigvalsh(z)
            for lam_i in lam:
                grid = np.linspace(0, abs(lam_i) + 1, 20001)
                vals = 0.5 * (grid - lam_i) ** 2 + t * grid
                best = grid[vals.argmin()]
                assert abs(max(lam_i - t, 0.0) - best) < 1e-3

    def test_local_minimum_probe(self):
        rng = np.random.default_rng(16)
        z = rand_sym(rng, 5, 1.5)
        t = 0.4
        got = psd_eig_shrink(z, t)
        obj = lambda m: 0.5 * np.sum((m - z) ** 2) + t * np.trace(m)
        base = obj(got)
        for _ in range(100):
            # random PSD perturbation keeps the probe inside the cone
            d = rng.standard_normal((5, 5))
            probe = got + 0.01 * (d @ d.T)
            assert obj(probe) >= base - 1e-9
