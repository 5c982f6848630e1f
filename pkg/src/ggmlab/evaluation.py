"""Support extraction, Jaccard-distance scoring and experiment orchestration.

The harness reproduces the benchmark protocol end to end: generate a graph,
partition it, build the ground-truth Gaussian model, draw internal samples,
fabricate the noisy external summary, fit every requested solver over a
hyperparameter grid, and score the recovered edge set against the true
target subgraph.  Per run the best (smallest) Jaccard distance over the
grid is kept and then averaged across runs.

Determinism: per-run seeds are spawned from the master seed by run index,
so results never depend on scheduling or worker count.  The results CSV is
reproducible column-for-column except ``wall_ms`` (real timing);
:func:`csv_without_timing` strips that column for byte-level comparisons.
"""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import SolverOptions, glasso_fit, lvggm_fit
from .dilat import DilatProblem, dilat_fit, lowrank_init
from .prox import CachedEigh
from .graphs import (GraphSpec, build_ground_truth, generate_graph,
                     partition_vertices)
from .sampling import gram_noise, internal_samples, make_external_summary

__all__ = [
    "SupportSet",
    "ExperimentConfig",
    "ResultRow",
    "CSV_COLUMNS",
    "support_set",
    "jaccard_distance",
    "run_experiment",
    "sensitivity_sweep",
    "write_rows_csv",
    "rows_to_csv_bytes",
    "csv_without_timing",
    "summarize",
]

log = logging.getLogger("ggmlab")

CSV_COLUMNS = ("solver", "graph", "seed", "alpha", "beta", "sigma_l", "tau",
               "jaccard", "iters", "wall_ms")


@dataclass(frozen=True)
class SupportSet:
    """Off-diagonal support of a symmetric matrix at threshold tau."""

    edges: frozenset
    threshold: float


def support_set(c: np.ndarray, tau: float) -> SupportSet:
    """Unordered index pairs (i, j), i < j, with |c_ij| > tau."""
    c = np.asarray(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    iu, ju = np.triu_indices(c.shape[0], k=1)
    mask = np.abs(c[iu, ju]) > tau
    edges = frozenset(zip(iu[mask].tolist(), ju[mask].tolist()))
    return SupportSet(edges=edges, threshold=float(tau))


def jaccard_distance(a, b) -> float:
    """1 - |A intersect B| / |A union B|; two empty sets are identical (0)."""
    ea = a.edges if isinstance(a, SupportSet) else frozenset(a)
    eb = b.edges if isinstance(b, SupportSet) else frozenset(b)
    union = ea | eb
    if not union:
        return 0.0
    return 1.0 - len(ea & eb) / len(union)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark sweep needs, serializable for replay."""

    graph: GraphSpec
    n1: int
    epsilon: float = 1e-3
    m: int = 500
    runs: int = 50
    alpha_grid: tuple = (0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7)
    beta_grid: tuple = (0.01, 0.1, 0.5, 1.0, 5.0)
    sigma_grid: tuple = (0.01, 1.0, 5.0)
    snr_grid: tuple = ()
    tau: float = 1e-3
    master_seed: int = 0
    solvers: tuple = ("glasso", "lvggm", "dilat")
    options: SolverOptions = field(default_factory=SolverOptions)
    summary_base: str = "theta2"  # or "marginal2": external marginal precision
    center: bool = False
    init_delta: float = 1e-3
    parallel: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.alpha_grid:
            raise ValueError("alpha grid must be non-empty")
        if not self.solvers:
            raise ValueError("solver list must be non-empty")


@dataclass(frozen=True)
class ResultRow:
    solver: str
    graph: str
    seed: int
    alpha: float
    beta: float | None
    sigma_l: float | None
    tau: float
    jaccard: float
    iters: int
    wall_ms: float


def _external_base(pp, which: str) -> np.ndarray:
    if which == "theta2":
        return pp.theta2.copy()
    if which == "marginal2":
        # precision of x2 after marginalizing the target block out
        back = np.linalg.solve(pp.theta1, pp.theta12)
        marg = pp.theta2 - pp.theta21 @ back
        return 0.5 * (marg + marg.T)
    raise ValueError(f"unknown summary base {which!r}")


def _run_context(cfg: ExperimentConfig, run_index: int):
    """Deterministic per-run data: model, samples, summary ingredients."""
    ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(run_index,))
    graph_seed, part_seed, sample_seed, noise_seed = ss.spawn(4)
    g = generate_graph(cfg.graph, seed=graph_seed)
    part = partition_vertices(g, cfg.n1, seed=part_seed)
    pp = build_ground_truth(g, cfg.epsilon, part)
    true_edges = pp.target_edges(g)
    samples = internal_samples(pp, cfg.m, seed=sample_seed, center=cfg.center)
    l2_hat = _external_base(pp, cfg.summary_base)
    noise = gram_noise(pp.n2, seed=noise_seed)
    return g, pp, true_edges, samples, l2_hat, noise


def _score(c_hat: np.ndarray, true_edges, tau: float) -> float:
    return jaccard_distance(support_set(c_hat, tau), true_edges)


def _run_single(cfg: ExperimentConfig, run_index: int) -> list:
    g, pp, true_edges, samples, l2_hat, noise = _run_context(cfg, run_index)
    sigma1 = samples.sigma1_hat
    tag = cfg.graph.tag()
    rows = []

    def emit(solver, alpha, beta, sigma_l, jaccard, iters, wall_ms):
        rows.append(ResultRow(solver=solver, graph=tag, seed=run_index,
                              alpha=alpha, beta=beta, sigma_l=sigma_l,
                              tau=cfg.tau, jaccard=jaccard, iters=iters,
                              wall_ms=wall_ms))

    # one latent-variable fit per (alpha, beta) serves both the baseline rows
    # and the warm starts of the semiblind solver
    lv_cache = {}

    def lv_fit(alpha, beta):
        key = (alpha, beta)
        if key not in lv_cache:
            lv_cache[key] = lvggm_fit(sigma1, alpha, beta, cfg.options)
        return lv_cache[key]

    for solver in cfg.solvers:
        if solver == "glasso":
            for alpha in cfg.alpha_grid:
                t0 = time.perf_counter()
                try:
                    est = glasso_fit(sigma1, alpha, cfg.options)
                except Exception:
                    log.warning("glasso failed (run %d, alpha %g)",
                                run_index, alpha, exc_info=True)
                    continue
                emit("glasso", alpha, None, None,
                     _score(est.precision, true_edges, cfg.tau),
                     est.diagnostics.iterations,
                     (time.perf_counter() - t0) * 1e3)
        elif solver == "lvggm":
            for alpha in cfg.alpha_grid:
                for beta in cfg.beta_grid:
                    t0 = time.perf_counter()
                    try:
                        est = lv_fit(alpha, beta)
                    except Exception:
                        log.warning("lvggm failed (run %d, a %g, b %g)",
                                    run_index, alpha, beta, exc_info=True)
                        continue
                    emit("lvggm", alpha, beta, None,
                         _score(est.c_hat, true_edges, cfg.tau),
                         est.diagnostics.iterations,
                         (time.perf_counter() - t0) * 1e3)
        elif solver == "dilat":
            for sigma_l in cfg.sigma_grid:
                summary = make_external_summary(l2_hat, sigma_l, noise=noise)
                eig_cache = CachedEigh(summary.theta2_hat)
                for alpha in cfg.alpha_grid:
                    for beta in cfg.beta_grid:
                        t0 = time.perf_counter()
                        # larger beta needs a stronger W-consensus penalty
                        # for the duals to keep pace (fixed point unchanged)
                        opts = replace(cfg.options,
                                       penalty_w=max(cfg.options.penalty_w,
                                                     beta))
                        try:
                            lv = lv_fit(alpha, beta)
                            init = lowrank_init(lv.c_hat, lv.m_hat, eig_cache)
                            prob = DilatProblem(sigma1, summary.theta2_hat,
                                                alpha, beta,
                                                theta2_eigen=eig_cache)
                            c_hat, _, st = dilat_fit(prob, opts, init)
                        except Exception:
                            log.warning(
                                "dilat failed (run %d, a %g, b %g, s %g)",
                                run_index, alpha, beta, sigma_l,
                                exc_info=True)
                            continue
                        emit("dilat", alpha, beta, sigma_l,
                             _score(c_hat, true_edges, cfg.tau),
                             int(sum(st.inner_iterations)),
                             (time.perf_counter() - t0) * 1e3)
        else:
            raise ValueError(f"unknown solver {solver!r}")
    return rows


def _sensitivity_single(cfg: ExperimentConfig, run_index: int,
                        mode: str) -> list:
    g, pp, true_edges, samples, l2_hat, noise = _run_context(cfg, run_index)
    sigma1 = samples.sigma1_hat
    tag = cfg.graph.tag()
    n1, n2 = cfg.n1, pp.n2
    rows = []

    lv_cache = {}

    def fit_one(summary, alpha, beta):
        t0 = time.perf_counter()
        key = (alpha, beta)
        if key not in lv_cache:
            lv_cache[key] = lvggm_fit(sigma1, alpha, beta, cfg.options)
        lv = lv_cache[key]
        prob = DilatProblem(sigma1, summary.theta2_hat, alpha, beta)
        init = lowrank_init(lv.c_hat, lv.m_hat, prob.theta2_eigen)
        opts = replace(cfg.options,
                       penalty_w=max(cfg.options.penalty_w, beta))
        c_hat, _, st = dilat_fit(prob, opts, init)
        return (_score(c_hat, true_edges, cfg.tau),
                int(sum(st.inner_iterations)),
                (time.perf_counter() - t0) * 1e3)

    if mode == "alpha_beta":
        sigma_l = cfg.sigma_grid[0]
        summary = make_external_summary(l2_hat, sigma_l, noise=noise)
        for alpha in cfg.alpha_grid:
            for beta in cfg.beta_grid:
                jac, iters, ms = fit_one(summary, alpha, beta)
                rows.append(ResultRow("dilat", tag, run_index, alpha, beta,
                                      sigma_l, cfg.tau, jac, iters, ms))
    elif mode == "snr":
        if not cfg.snr_grid:
            raise ValueError("snr mode needs a non-empty snr grid")
        base_norm = float(np.linalg.norm(l2_hat, "fro"))
        for snr in cfg.snr_grid:
            sigma_l = 0.0 if np.isinf(snr) else base_norm / np.sqrt(snr)
            summary = make_external_summary(l2_hat, sigma_l, noise=noise)
            best = None
            for alpha in cfg.alpha_grid:
                for beta in cfg.beta_grid:
                    jac, iters, ms = fit_one(summary, alpha, beta)
                    cand = (jac, alpha, beta, iters, ms)
                    if best is None or cand[0] < best[0]:
                        best = cand
            jac, alpha, beta, iters, ms = best
            rows.append(ResultRow("dilat", tag, run_index, alpha, beta,
                                  sigma_l, cfg.tau, jac, iters, ms))
    else:
        raise ValueError(f"unknown sensitivity mode {mode!r}")
    return rows


_BLAS_LIMITER = None


def _single_threaded_blas():
    """Pin BLAS to one thread per worker; oversubscription on small
    matrices otherwise destroys parallel efficiency."""
    global _BLAS_LIMITER
    try:
        from threadpoolctl import threadpool_limits
        _BLAS_LIMITER = threadpool_limits(limits=1)
    except Exception:
        pass


def _map_runs(worker, cfg: ExperimentConfig, extra=()):
    indices = range(cfg.runs)
    if cfg.parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel,
                                 initializer=_single_threaded_blas) as pool:
            chunks = list(pool.map(worker, [cfg] * cfg.runs, indices,
                                   *[[x] * cfg.runs for x in extra]))
    else:
        chunks = [worker(cfg, i, *extra) for i in indices]
    return [row for chunk in chunks for row in chunk]


def run_experiment(cfg: ExperimentConfig):
    """Full benchmark sweep; returns ``(rows, summary)``.

    Rows arrive in deterministic order (run index, then solver, then grid
    position); the summary aggregates the per-run best score for each
    solver.  Individual solver failures are logged and skipped, never fatal.
    """
    rows = _map_runs(_run_single, cfg)
    return rows, summarize(rows, cfg)


def sensitivity_sweep(cfg: ExperimentConfig, mode: str):
    """Hyperparameter or summary-noise sensitivity rows for the semiblind
    solver.  ``mode`` is ``alpha_beta`` (error surface at fixed summary) or
    ``snr`` (best-over-grid error per noise level, one row per run)."""
    rows = _map_runs(_sensitivity_single, cfg, extra=(mode,))
    return rows, summarize(rows, cfg)


def summarize(rows, cfg: ExperimentConfig) -> dict:
    """Per-solver mean of per-run best Jaccard, with its standard error."""
    per_solver = {}
    for solver in sorted({r.solver for r in rows}):
        best_by_run = {}
        for r in rows:
            if r.solver != solver:
                continue
            cur = best_by_run.get(r.seed)
            best_by_run[r.seed] = r.jaccard if cur is None else min(cur,
                                                                    r.jaccard)
        best = [best_by_run[k] for k in sorted(best_by_run)]
        arr = np.asarray(best)
        per_solver[solver] = {
            "runs": len(best),
            "per_run_best": [float(v) for v in best],
            "mean_best_jaccard": float(arr.mean()),
            "stderr": float(arr.std(ddof=1) / np.sqrt(len(best)))
            if len(best) > 1 else 0.0,
        }
    return {
        "graph": cfg.graph.tag(),
        "n1": cfg.n1,
        "m": cfg.m,
        "runs": cfg.runs,
        "tau": cfg.tau,
        "master_seed": cfg.master_seed,
        "solvers": per_solver,
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv_bytes(rows) -> bytes:
    """Serialize rows with the canonical column order and float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            r.solver, r.graph, r.seed, _fmt(r.alpha), _fmt(r.beta),
            _fmt(r.sigma_l), _fmt(r.tau), _fmt(r.jaccard), r.iters,
            f"{r.wall_ms:.3f}",
        ])
    return buf.getvalue().encode()


def write_rows_csv(rows, path) -> None:
    with open(path, "wb") as fh:
        fh.write(rows_to_csv_bytes(rows))


def csv_without_timing(text_or_bytes) -> bytes:
    """Drop the wall_ms column, the only nondeterministic field, so that
    reruns with one master seed can be compared byte for byte."""
    if isinstance(text_or_bytes, bytes):
        text_or_bytes = text_or_bytes.decode()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for record in csv.reader(io.StringIO(text_or_bytes)):
        writer.writerow(record[:-1])
    return out.getvalue().encode()
