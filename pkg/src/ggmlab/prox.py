"""Closed-form proximal operators shared by all ADMM solvers.

Every operator solves ``argmin_P (1/(2*xi)) ||P - Z||_F^2 + h(P)`` for its
own penalty ``h``.  Symmetric inputs are symmetrized before any
eigendecomposition to kill round-off asymmetry; the single dense kernel is
the symmetric eigensolver.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

__all__ = [
    "CachedEigh",
    "soft_threshold",
    "prox_logdet",
    "group_row_shrink",
    "weighted_row_shrink",
    "prox_p21_coupled",
    "psd_eig_shrink",
]


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _as_c64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


class CachedEigh:
    """Eigendecomposition of a symmetric matrix, computed once and reused.

    ``prox_p21_coupled`` is called every ADMM iteration with the same
    external summary; the solver caches one of these per problem.
    """

    def __init__(self, mat):
        self.mat = _as_c64(mat)
        self.eigvals, self.eigvecs = np.linalg.eigh(_sym(self.mat))


def soft_threshold(z, t: float) -> np.ndarray:
    """Entrywise shrinkage sign(z) * max(|z| - t, 0).

    Prox of ``t * ||.||_1`` (all entries, diagonal included).
    """
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    return _kernels.soft_threshold(_as_c64(z), float(t))


def group_row_shrink(z, t: float) -> np.ndarray:
    """Row-wise shrinkage (1 - t/||z_i||_2)_+ * z_i.

    Prox of ``t * ||.||_{2,1}``; zeroes whole rows, and a row exactly at the
    kink maps to zero (the subgradient-optimal choice).
    """
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    return _kernels.group_row_shrink(_as_c64(z), float(t))


def weighted_row_shrink(z, beta_xi: float, diag_theta) -> np.ndarray:
    """Row-wise shrinkage with per-row weights: (1 - beta_xi*th_i/||z_i||)_+ z_i.

    Prox of ``beta * sum_i th_i ||P_i||_2`` with step ``xi`` where
    ``beta_xi = beta * xi``; this is the diagonal-summary shortcut of the
    inner solver (row i of diag(th) @ P is th_i times row i of P).
    """
    if beta_xi < 0:
        raise ValueError(f"threshold must be nonnegative, got {beta_xi}")
    diag_theta = np.ascontiguousarray(diag_theta, dtype=np.float64)
    if np.any(diag_theta <= 0):
        raise ValueError("diagonal weights must be strictly positive")
    return _kernels.weighted_row_shrink(_as_c64(z), float(beta_xi), diag_theta)


def prox_logdet(z, s, xi: float) -> np.ndarray:
    """Minimize ``(1/(2*xi))||R - Z||_F^2 - logdet(R) + tr(S R)`` over R > 0.

    With the eigendecomposition ``xi*S - Z = U diag(sigma) U^T`` the minimizer
    is ``U diag(gamma) U^T`` where ``gamma_i = (-sigma_i + sqrt(sigma_i^2 +
    4*xi)) / 2 > 0``, so the output is always positive definite and satisfies
    the stationarity condition ``(R - Z)/xi - R^{-1} + S = 0``.
    """
    if xi <= 0:
        raise ValueError(f"step must be positive, got {xi}")
    sigma, u = np.linalg.eigh(_sym(xi * np.asarray(s) - np.asarray(z)))
    gamma = 0.5 * (-sigma + np.sqrt(sigma * sigma + 4.0 * xi))
    return (u * gamma) @ u.T


def prox_p21_coupled(z, z2, xi: float, xi_w: float, theta2) -> np.ndarray:
    """Minimize ``(1/(2*xi))||P - Z||^2 + (1/(2*xi_w))||Th @ P - Z2||^2``.

    Linear solve ``(xi_w I + xi Th^2)^{-1} (xi_w Z + xi Th Z2)`` carried out
    in the eigenbasis of the summary ``Th`` with the scalar filters
    ``xi_w / (xi_w + xi lam_i^2)`` and ``xi lam_i / (xi_w + xi lam_i^2)``.

    ``theta2`` may be the matrix itself or a :class:`CachedEigh` of it.
    """
    if xi <= 0 or xi_w <= 0:
        raise ValueError("steps must be positive")
    cache = theta2 if isinstance(theta2, CachedEigh) else CachedEigh(theta2)
    lam, u = cache.eigvals, cache.eigvecs
    denom = xi_w + xi * lam * lam
    zt = u.T @ np.asarray(z)
    z2t = u.T @ np.asarray(z2)
    return u @ ((xi_w / denom)[:, None] * zt + ((xi * lam) / denom)[:, None] * z2t)


def psd_eig_shrink(z, t: float) -> np.ndarray:
    """Minimize ``(1/2)||M - Z||_F^2 + t*tr(M)`` over ``M >= 0``.

    Eigenvalues shift down by ``t`` and clip at zero; eigenvectors are kept.
    For PSD-constrained M the trace equals the nuclear norm, so this is the
    low-rank update of the latent-variable baseline.
    """
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    lam, u = np.linalg.eigh(_sym(np.asarray(z)))
    lam = np.maximum(lam - t, 0.0)
    return (u * lam) @ u.T
