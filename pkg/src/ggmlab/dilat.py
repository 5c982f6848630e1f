"""Semiblind subgraph estimator with decayed external influence.

The estimator minimizes, over the target-block precision C and the coupling
map B,

    -logdet(C - B Th2 B^T) + tr(S1 (C - B Th2 B^T))
        + alpha ||C||_1 + beta ||Th2 B^T||_{2,1}
    s.t.  C - B Th2 B^T >= 0,

where S1 is the internal sample covariance and Th2 the shared noisy
precision summary of the external variables.  The quadratic coupling term
makes the trace a difference of convex functions, so the outer loop is a
convex-concave procedure: the concave part is linearized at the previous
iterate and each resulting convex surrogate is solved by an ADMM whose
blocks are the closed-form proximal kernels of :mod:`ggmlab.prox`.

Writing ``R = [[C, B], [B^T, Th2^{-1}]]`` turns the feasible set into the
positive-semidefinite cone (Schur complement), which is what the inner
solver actually iterates on.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .baselines import SolverDiagnostics, SolverOptions, glasso_fit
from .prox import (CachedEigh, group_row_shrink, prox_logdet,
                   prox_p21_coupled, soft_threshold, weighted_row_shrink)

__all__ = [
    "SummaryNotPDError",
    "InfeasibleIterateError",
    "InitializationError",
    "DilatProblem",
    "CcpState",
    "AdmmState",
    "dilat_objective",
    "linearize_concave",
    "solve_subproblem",
    "initialize",
    "spectral_init",
    "lowrank_init",
    "dilat_fit",
    "infer_latent_mean",
]


class SummaryNotPDError(ValueError):
    """The external summary is not positive definite ("summary not PD")."""


class InfeasibleIterateError(ValueError):
    """C - B Th2 B^T left the positive-definite cone."""

    def __init__(self, smallest_eig: float):
        self.smallest_eig = smallest_eig
        super().__init__(
            f"iterate infeasible: smallest eigenvalue {smallest_eig:.3e}")


class InitializationError(ValueError):
    """No feasible starting point could be constructed."""


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class DilatProblem:
    """One estimation instance: data matrices, penalty weights and caches.

    gamma_t scales the external diagonal block of the linearized trace
    matrix.  It multiplies a block that the constraints pin to Th2^{-1} at
    any fixed point, so it only preconditions the inner log-det update; the
    default 0 keeps the surrogate objective equal to the linearized
    likelihood up to a constant, and fixed points are invariant to it.
    """

    def __init__(self, sigma1_hat, theta2_hat, alpha: float, beta: float,
                 gamma_t: float = 0.0, theta2_eigen: CachedEigh | None = None):
        if alpha <= 0 or beta <= 0:
            raise ValueError("penalty weights must be positive")
        self.sigma1_hat = _sym(np.asarray(sigma1_hat, dtype=float))
        self.theta2_hat = _sym(np.asarray(theta2_hat, dtype=float))
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.gamma_t = float(gamma_t)
        self.n1 = self.sigma1_hat.shape[0]
        self.n2 = self.theta2_hat.shape[0]
        try:
            cho = scipy.linalg.cho_factor(self.theta2_hat, lower=True,
                                          check_finite=False)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise SummaryNotPDError("summary not PD") from exc
        self.t_inv = _sym(scipy.linalg.cho_solve(cho, np.eye(self.n2),
                                                 check_finite=False))
        # one summary eigendecomposition serves every grid point at fixed sigma
        self.theta2_eigen = theta2_eigen or CachedEigh(self.theta2_hat)
        off = self.theta2_hat - np.diag(np.diag(self.theta2_hat))
        self.theta2_is_diagonal = not np.any(off)

    @property
    def n(self) -> int:
        return self.n1 + self.n2


def coupling_penalty(b: np.ndarray, theta2_hat: np.ndarray) -> float:
    """Row-sparsity penalty ||Th2 B^T||_{2,1} (sum of row norms)."""
    return float(np.linalg.norm(theta2_hat @ b.T, axis=1).sum())


def dilat_objective(c: np.ndarray, b: np.ndarray, prob: DilatProblem) -> float:
    """Objective value at (C, B); raises if the point is infeasible."""
    r = _sym(c - b @ prob.theta2_hat @ b.T)
    try:
        chol = np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        raise InfeasibleIterateError(float(np.linalg.eigvalsh(r)[0])) from None
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    return (-logdet + float(np.sum(prob.sigma1_hat * r))
            + prob.alpha * float(np.abs(c).sum())
            + prob.beta * coupling_penalty(b, prob.theta2_hat))


def linearize_concave(b_prev: np.ndarray, prob: DilatProblem):
    """Linearize the concave part of the trace at the previous coupling map.

    Returns ``(d, s)`` with ``d = B_prev Th2`` and the block matrix
    ``s = [[S1, -S1 d], [-(S1 d)^T, gamma_t I]]`` whose inner product with
    ``R = [[C, B], [B^T, .]]`` reproduces ``tr(S1 (C - 2 B d^T))`` plus a
    constant; the gradient of the quadratic ``tr(S1 B Th2 B^T)`` is
    ``2 S1 B_prev Th2``.
    """
    d = b_prev @ prob.theta2_hat
    cross = prob.sigma1_hat @ d
    s = np.block([[prob.sigma1_hat, -cross],
                  [-cross.T, prob.gamma_t * np.eye(prob.n2)]])
    return d, _sym(s)


@dataclass
class AdmmState:
    """Mutable iterate of the inner solver, reusable as a warm start."""

    r: np.ndarray
    p: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    lam_w: np.ndarray

    @classmethod
    def cold(cls, prob: DilatProblem, c0: np.ndarray, b0: np.ndarray,
             s: np.ndarray | None = None) -> "AdmmState":
        n, n1 = prob.n, prob.n1
        r = np.zeros((n, n))
        r[:n1, :n1] = c0
        r[:n1, n1:] = b0
        r[n1:, :n1] = b0.T
        r[n1:, n1:] = prob.t_inv
        if s is None:
            lam = np.zeros((n, n))
            lam_w = np.zeros((prob.n2, prob.n1))
        else:
            # duals at their fixed-point values for R0: the R-step
            # stationarity gives Lam = R^{-1} - S and the coupled block
            # satisfies Th2 Lam_w = -2 Lam_21; starting there instead of at
            # zero removes the dual ramp-up phase for good primal starts
            cho = scipy.linalg.cho_factor(r, lower=True, check_finite=False)
            lam = _sym(scipy.linalg.cho_solve(cho, np.eye(n),
                                              check_finite=False)) - s
            lam_w = -2.0 * prob.t_inv @ lam[n1:, :n1]
        return cls(r=r, p=r.copy(), w=prob.theta2_hat @ r[n1:, :n1],
                   lam=lam, lam_w=lam_w)


def solve_subproblem(prob: DilatProblem, d: np.ndarray, s: np.ndarray,
                     opts: SolverOptions | None = None,
                     state: AdmmState | None = None,
                     force_general: bool = False):
    """Solve one convex surrogate by ADMM over (R, P, W).

    The constraints are ``R = P``, ``P_2 = Th2^{-1}`` and ``W = Th2 P_21``.
    Per sweep: l1-shrink the target block P_1; update the coupling block
    P_21 (directly for a diagonal summary, otherwise through the W split and
    its dual); pin P_2 and symmetry; log-det prox for R; dual ascent.  Stops
    when the primal residual ||R - P||_F (plus the W gap on the general
    path) and the dual residual ||P - P_prev||_F / mu fall below
    ``eps_abs + eps_rel * scale``.

    Returns ``(r, p, w, diagnostics)``; pass ``state`` to warm start and
    retrieve the updated iterate.
    """
    opts = opts or SolverOptions()
    n1 = prob.n1
    mu = 1.0 / opts.penalty
    mu_w = 1.0 / opts.penalty_w
    diagonal_path = prob.theta2_is_diagonal and not force_general
    th2 = prob.theta2_hat
    diag_th2 = np.diag(th2).copy()

    if state is None:
        state = AdmmState.cold(prob, np.eye(n1), np.zeros((n1, prob.n2)), s)
    r, p, w, lam, lam_w = state.r, state.p, state.w, state.lam, state.lam_w

    r_norm = s_norm = np.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        p_old = p
        p21_old = p[n1:, :n1]

        # the off-diagonal block enters ||R - P||_F^2 twice (P is kept
        # symmetric), so its effective proximal step is mu/2; with step mu
        # the fixed point would solve the problem with a doubled coupling
        # penalty and fail the interior-point oracle check
        p1 = soft_threshold(r[:n1, :n1] + mu * lam[:n1, :n1], mu * prob.alpha)
        if diagonal_path:
            p21 = weighted_row_shrink(r[n1:, :n1] + mu * lam[n1:, :n1],
                                      0.5 * mu * prob.beta, diag_th2)
            w = th2 @ p21
        else:
            w = group_row_shrink(th2 @ p21_old - mu_w * lam_w, mu_w * prob.beta)
            p21 = prox_p21_coupled(r[n1:, :n1] + mu * lam[n1:, :n1],
                                   w + mu_w * lam_w, 0.5 * mu, mu_w,
                                   prob.theta2_eigen)
            lam_w = lam_w + (w - th2 @ p21) / mu_w

        p = np.zeros_like(r)
        p[:n1, :n1] = p1
        p[n1:, :n1] = p21
        p[:n1, n1:] = p21.T
        p[n1:, n1:] = prob.t_inv

        r = prox_logdet(p - mu * lam, s, mu)
        lam = lam + (r - p) / mu

        gap = np.linalg.norm(r - p)
        if not diagonal_path:
            gap = float(np.hypot(gap, np.linalg.norm(w - th2 @ p21)))
        r_norm = float(gap)
        s_norm = float(np.linalg.norm(p - p_old)) / mu
        eps_pri = opts.eps_abs + opts.eps_rel * max(np.linalg.norm(r),
                                                    np.linalg.norm(p))
        eps_dual = opts.eps_abs + opts.eps_rel * np.linalg.norm(lam)
        if r_norm < eps_pri and s_norm < eps_dual:
            converged = True
            break

    state.r, state.p, state.w = r, p, w
    state.lam, state.lam_w = lam, lam_w
    diag = SolverDiagnostics(iterations=it, converged=converged,
                             primal_residual=r_norm, dual_residual=s_norm)
    return r, p, w, diag


def lowrank_init(c_hat: np.ndarray, m_hat: np.ndarray, theta2_eigen):
    """Factor a sparse-plus-low-rank estimate into a feasible (C0, B0).

    Given the latent-variable baseline's split ``marginal = C - M`` with
    ``M >= 0``, write ``M = U diag(nu) U^T`` and push it through the summary
    eigenbasis: ``B0 = U diag(sqrt(nu/lam)) V^T`` reproduces
    ``B0 Th2 B0^T = M`` exactly, so ``C0 - B0 Th2 B0^T = C - M > 0`` and the
    start inherits the baseline's feasibility.
    """
    if not isinstance(theta2_eigen, CachedEigh):
        theta2_eigen = CachedEigh(theta2_eigen)
    c0 = _sym(np.asarray(c_hat, dtype=float))
    nu, u = np.linalg.eigh(_sym(np.asarray(m_hat, dtype=float)))
    nu = np.maximum(nu, 0.0)
    k = min(nu.shape[0], theta2_eigen.eigvals.shape[0])
    order = np.argsort(nu)[::-1][:k]
    u = u[:, order]
    nu = nu[order]
    lam = theta2_eigen.eigvals[-k:]
    v = theta2_eigen.eigvecs[:, -k:]
    b0 = (u * np.sqrt(nu / lam)) @ v.T
    return c0, b0


def spectral_init(glasso_precision: np.ndarray, theta2_eigen):
    """Warm start with a nonzero coupling map factored from the convex fit.

    A zero coupling map is a stationary point of the outer loop (the
    linearized cross term vanishes and the log-det is maximized at B = 0),
    so a useful start must break that symmetry.  Shift the blind precision
    estimate to ``C0 = (lam_max + 1) I``; the residual ``C0 - Th_blind`` is
    positive definite and its top eigendirections (those the blind fit
    shrank hardest) are the candidate latent-effect subspace.  Factoring
    ``U diag(nu) U^T = B0 Th2 B0^T`` through the summary's eigenbasis gives
    ``B0 = U diag(sqrt(nu/lam)) V^T``, and ``C0 - B0 Th2 B0^T >= Th_blind``
    keeps the start strictly feasible.
    """
    if not isinstance(theta2_eigen, CachedEigh):
        theta2_eigen = CachedEigh(theta2_eigen)
    th = _sym(np.asarray(glasso_precision, dtype=float))
    evals, evecs = np.linalg.eigh(th)
    n1 = th.shape[0]
    n2 = theta2_eigen.eigvals.shape[0]
    shift = evals[-1] + 1.0
    c0 = shift * np.eye(n1)
    resid = shift - evals  # eigenvalues of c0 - th, all >= 1
    k = min(n1, n2)
    order = np.argsort(resid)[::-1][:k]
    u = evecs[:, order]
    nu = resid[order]
    lam = theta2_eigen.eigvals[-k:]
    v = theta2_eigen.eigvecs[:, -k:]
    b0 = (u * np.sqrt(nu / lam)) @ v.T
    return c0, b0


def initialize(prob: DilatProblem, mode: str = "lvggm_warm", seed=None,
               delta: float = 1e-3, opts: SolverOptions | None = None):
    """Feasible starting point (C0, B0) for the outer loop.

    A zero coupling map must be avoided: B = 0 is a stationary point of the
    convex-concave iteration, so starting there reduces the estimator to a
    graphical lasso.  ``lvggm_warm`` (default) fits the latent-variable
    baseline at the problem's own (alpha, beta) and factors its low-rank
    term through the summary (:func:`lowrank_init`); ``spectral`` is the
    cheaper glasso-residual variant (:func:`spectral_init`).  The remaining
    modes keep B0 = 0 or random: ``glasso_warm`` (graphical lasso on a
    jittered covariance), ``zero_b`` (diagonal precision guess), ``random``
    (small Gaussian B0, halved until the Schur complement is positive
    definite).  Every mode guarantees C0 - B0 Th2 B0^T > 0.
    """
    n1, n2 = prob.n1, prob.n2
    if mode == "lvggm_warm":
        from .baselines import lvggm_fit  # late import, baselines are lighter
        est = lvggm_fit(prob.sigma1_hat, prob.alpha, prob.beta,
                        opts or SolverOptions(max_iter=1000))
        return lowrank_init(est.c_hat, est.m_hat, prob.theta2_eigen)
    if mode in ("spectral", "glasso_warm"):
        warm = glasso_fit(prob.sigma1_hat + delta * np.eye(n1), prob.alpha,
                          opts or SolverOptions(max_iter=1000))
        if mode == "glasso_warm":
            return _sym(warm.precision), np.zeros((n1, n2))
        return spectral_init(warm.precision, prob.theta2_eigen)
    diag_c = 1.0 / (np.diag(prob.sigma1_hat) + delta)
    if np.any(diag_c <= 0):
        raise InitializationError("sample variances must be positive")
    c0 = np.diag(diag_c)
    if mode == "zero_b":
        return c0, np.zeros((n1, n2))
    if mode == "random":
        rng = np.random.default_rng(seed)
        b0 = 0.1 * rng.standard_normal((n1, n2))
        for _ in range(64):
            try:
                np.linalg.cholesky(_sym(c0 - b0 @ prob.theta2_hat @ b0.T))
                return c0, b0
            except np.linalg.LinAlgError:
                b0 *= 0.5
        raise InitializationError("could not scale B0 into the feasible set")
    raise ValueError(f"unknown initialization mode {mode!r}")


@dataclass
class CcpState:
    """Outer-loop iterate: current (C, B), its trace and bookkeeping."""

    c: np.ndarray
    b: np.ndarray
    d: np.ndarray
    objective_trace: list
    t: int
    converged: bool
    inner_iterations: list = field(default_factory=list)
    rolled_back: bool = False

    def as_dict(self) -> dict:
        return {
            "outer_iterations": self.t,
            "converged": self.converged,
            "rolled_back": self.rolled_back,
            "inner_iterations": list(self.inner_iterations),
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def dilat_fit(prob: DilatProblem, opts: SolverOptions | None = None,
              init="lvggm_warm", seed=None):
    """Run the convex-concave outer loop; returns ``(c_hat, b_hat, state)``.

    ``init`` is either a mode name understood by :func:`initialize` or an
    explicit feasible pair ``(c0, b0)``.  Each outer step linearizes the
    concave coupling term at the previous B, solves the surrogate with the
    warm-started inner ADMM and extracts (C, B) from the leading blocks of
    R.  Steps are accepted under a sufficient-decrease rule: when the
    relative objective improvement falls below ``opts.ccp_tol`` the step is
    rejected and the previous (certified) iterate is returned; the loop also
    stops after ``opts.ccp_max_iter`` steps.  A step that increases the
    objective (possible only through inner-solver inexactness; exact
    surrogate minimization cannot) is likewise rejected and flagged via
    ``rolled_back``.
    """
    opts = opts or SolverOptions()
    if isinstance(init, str):
        c, b = initialize(prob, init, seed=seed, opts=opts)
    else:
        c, b = (np.asarray(init[0], dtype=float).copy(),
                np.asarray(init[1], dtype=float).copy())
    obj = dilat_objective(c, b, prob)  # raises if init infeasible
    trace = [obj]
    inner_iters = []
    n1 = prob.n1
    state = None
    converged = False
    rolled_back = False
    t = 0
    for t in range(1, opts.ccp_max_iter + 1):
        d, s = linearize_concave(b, prob)
        if state is None:
            state = AdmmState.cold(prob, c, b, s)
        r, p, w, inner = solve_subproblem(prob, d, s, opts, state=state)
        inner_iters.append(inner.iterations)
        c_new = _sym(r[:n1, :n1])
        b_new = r[:n1, n1:].copy()
        try:
            obj_new = dilat_objective(c_new, b_new, prob)
        except InfeasibleIterateError:
            rolled_back = True
            converged = False
            break
        if obj_new > obj + 1e-12 * max(1.0, abs(obj)):
            # inner inexactness produced an uphill step; keep the better point
            rolled_back = True
            converged = True
            break
        if obj - obj_new < opts.ccp_tol * max(1.0, abs(obj)):
            # sufficient-decrease acceptance: a below-tolerance step is not
            # taken, so the returned iterate is the last certified one
            converged = True
            break
        c, b = c_new, b_new
        obj = obj_new
        trace.append(obj)

    final_state = CcpState(c=c, b=b, d=b @ prob.theta2_hat,
                           objective_trace=trace, t=t, converged=converged,
                           inner_iterations=inner_iters,
                           rolled_back=rolled_back)
    return c, b, final_state


def infer_latent_mean(b_hat: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """Conditional-mean readout of the external variables, B^T x1."""
    b_hat = np.asarray(b_hat, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if x1.shape[0] != b_hat.shape[0]:
        raise ValueError(
            f"dimension mismatch: B is {b_hat.shape}, x1 has leading "
            f"dimension {x1.shape[0]}")
    return b_hat.T @ x1
