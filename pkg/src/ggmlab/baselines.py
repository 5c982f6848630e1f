"""Blind reference estimators: graphical lasso and latent-variable GGM.

Both are solved by ADMM built from the proximal kernels in
:mod:`ggmlab.prox`.  The latent-variable model uses a cyclic three-block
splitting; that splitting has no general convergence guarantee but is
standard practice for sparse-plus-low-rank likelihoods and is validated
against interior-point oracles in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prox import prox_logdet, psd_eig_shrink, soft_threshold

__all__ = [
    "SolverOptions",
    "SolverDiagnostics",
    "GlassoEstimate",
    "LvggmEstimate",
    "glasso_fit",
    "lvggm_fit",
    "glasso_objective",
    "lvggm_objective",
]


@dataclass
class SolverOptions:
    """Knobs shared by every ADMM solver in the package.

    ``penalty`` is the augmented-Lagrangian rho; the proximal step is its
    reciprocal mu = 1/rho.  ``penalty_w`` plays the same role for the
    row-sparsity splitting of the semiblind solver.  The ccp_* fields only
    matter for the outer convex-concave loop and are ignored by the
    baselines.
    """

    max_iter: int = 5000
    eps_abs: float = 1e-6
    eps_rel: float = 1e-4
    penalty: float = 1.0
    penalty_w: float = 1.0
    penalize_diagonal: bool = True
    ccp_tol: float = 1e-4
    ccp_max_iter: int = 20

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.penalty <= 0 or self.penalty_w <= 0:
            raise ValueError("penalties must be positive")


@dataclass
class SolverDiagnostics:
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    objective_trace: list = field(default_factory=list)
    kkt_residual: float | None = None

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "kkt_residual": self.kkt_residual,
            "objective_trace": [float(v) for v in self.objective_trace],
        }


@dataclass
class GlassoEstimate:
    precision: np.ndarray
    diagnostics: SolverDiagnostics


@dataclass
class LvggmEstimate:
    c_hat: np.ndarray
    m_hat: np.ndarray
    diagnostics: SolverDiagnostics


def _l1(a: np.ndarray, penalize_diagonal: bool) -> float:
    tot = float(np.abs(a).sum())
    if not penalize_diagonal:
        tot -= float(np.abs(np.diag(a)).sum())
    return tot


def _logdet_pd(a: np.ndarray) -> float:
    chol = np.linalg.cholesky(a)
    return 2.0 * float(np.log(np.diag(chol)).sum())


def glasso_objective(theta: np.ndarray, sigma_hat: np.ndarray, alpha: float,
                     penalize_diagonal: bool = True) -> float:
    """-logdet(Theta) + tr(Sigma_hat Theta) + alpha * ||Theta||_1."""
    return (-_logdet_pd(theta) + float(np.sum(sigma_hat * theta))
            + alpha * _l1(theta, penalize_diagonal))


def lvggm_objective(c: np.ndarray, m: np.ndarray, sigma_hat: np.ndarray,
                    alpha: float, beta: float,
                    penalize_diagonal: bool = True) -> float:
    """Sparse-plus-low-rank likelihood; for M >= 0 the nuclear norm is tr(M)."""
    r = c - m
    return (-_logdet_pd(r) + float(np.sum(sigma_hat * r))
            + alpha * _l1(c, penalize_diagonal) + beta * float(np.trace(m)))


def _soft_offdiag(z: np.ndarray, t: float, penalize_diagonal: bool) -> np.ndarray:
    out = soft_threshold(z, t)
    if not penalize_diagonal:
        out[np.diag_indices_from(out)] = np.diag(z)
    return out


def glasso_fit(sigma_hat: np.ndarray, alpha: float,
               opts: SolverOptions | None = None,
               init: np.ndarray | None = None) -> GlassoEstimate:
    """Sparse inverse covariance by two-block ADMM.

    Minimizes ``-logdet(Theta) + tr(Sigma_hat Theta) + alpha ||Theta||_1``.
    The log-det block keeps every iterate positive definite; the returned
    estimate is the soft-thresholded consensus iterate, so its support is
    exact.  Non-convergence within ``max_iter`` is reported through the
    diagnostics, not raised.
    """
    if alpha < 0:
        raise ValueError(f"l1 weight must be nonnegative, got {alpha}")
    opts = opts or SolverOptions()
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    n = sigma_hat.shape[0]
    rho = opts.penalty
    mu = 1.0 / rho

    z = np.eye(n) if init is None else np.asarray(init, dtype=float).copy()
    u = np.zeros((n, n))
    trace = []
    r_norm = s_norm = np.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        theta = prox_logdet(z - u, sigma_hat, mu)
        z_old = z
        z = _soft_offdiag(theta + u, mu * alpha, opts.penalize_diagonal)
        u = u + theta - z

        r_norm = float(np.linalg.norm(theta - z))
        s_norm = rho * float(np.linalg.norm(z - z_old))
        trace.append(-_logdet_pd(theta) + float(np.sum(sigma_hat * theta))
                     + alpha * _l1(z, opts.penalize_diagonal))
        eps_pri = opts.eps_abs + opts.eps_rel * max(np.linalg.norm(theta),
                                                    np.linalg.norm(z))
        eps_dual = opts.eps_abs + opts.eps_rel * rho * np.linalg.norm(u)
        if r_norm < eps_pri and s_norm < eps_dual:
            converged = True
            break

    kkt = _glasso_kkt(z, sigma_hat, alpha, opts.penalize_diagonal)
    diag = SolverDiagnostics(iterations=it, converged=converged,
                             primal_residual=r_norm, dual_residual=s_norm,
                             objective_trace=trace, kkt_residual=kkt)
    return GlassoEstimate(precision=z, diagnostics=diag)


def _glasso_kkt(z: np.ndarray, sigma_hat: np.ndarray, alpha: float,
                penalize_diagonal: bool) -> float:
    """Worst-entry violation of the stationarity condition at z."""
    try:
        grad = sigma_hat - np.linalg.inv(z)
    except np.linalg.LinAlgError:
        return np.inf
    active = np.abs(z) > 0
    viol = np.where(active, np.abs(grad + alpha * np.sign(z)),
                    np.maximum(np.abs(grad) - alpha, 0.0))
    if not penalize_diagonal:
        d = np.abs(np.diag(grad))
        viol[np.diag_indices_from(viol)] = d
    return float(viol.max())


def lvggm_fit(sigma1_hat: np.ndarray, alpha: float, beta: float,
              opts: SolverOptions | None = None) -> LvggmEstimate:
    """Latent-variable GGM by cyclic three-block ADMM.

    Minimizes ``-logdet(C - M) + tr(Sigma1_hat (C - M)) + alpha ||C||_1 +
    beta ||M||_*`` subject to ``C - M > 0`` and ``M >= 0``.  The splitting
    introduces a consensus variable for C - M handled by the log-det prox
    (which enforces the positive-definite constraint), an l1 block for C and
    an eigenvalue-shrink block for M.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("penalty weights must be nonnegative")
    opts = opts or SolverOptions()
    sigma1_hat = np.asarray(sigma1_hat, dtype=float)
    n = sigma1_hat.shape[0]
    rho = opts.penalty
    mu = 1.0 / rho

    c = np.eye(n)
    m = np.zeros((n, n))
    u = np.zeros((n, n))
    trace = []
    r_norm = s_norm = np.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        zr = prox_logdet(c - m - u, sigma1_hat, mu)
        c_old, m_old = c, m
        c = _soft_offdiag(zr + m + u, mu * alpha, opts.penalize_diagonal)
        m = psd_eig_shrink(c - zr - u, mu * beta)
        u = u + zr - c + m

        r_norm = float(np.linalg.norm(zr - c + m))
        s_norm = rho * float(np.hypot(np.linalg.norm(c - c_old),
                                      np.linalg.norm(m - m_old)))
        trace.append(-_logdet_pd(zr) + float(np.sum(sigma1_hat * zr))
                     + alpha * _l1(c, opts.penalize_diagonal)
                     + beta * float(np.trace(m)))
        eps_pri = opts.eps_abs + opts.eps_rel * max(
            np.linalg.norm(zr), np.linalg.norm(c - m))
        eps_dual = opts.eps_abs + opts.eps_rel * rho * np.linalg.norm(u)
        if r_norm < eps_pri and s_norm < eps_dual:
            converged = True
            break

    diag = SolverDiagnostics(iterations=it, converged=converged,
                             primal_residual=r_norm, dual_residual=s_norm,
                             objective_trace=trace)
    return LvggmEstimate(c_hat=c, m_hat=m, diagnostics=diag)
