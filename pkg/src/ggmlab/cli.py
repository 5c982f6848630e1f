"""Command-line entry point.

Subcommands: ``generate`` (materialize one synthetic instance),
``estimate`` (fit one solver on matrix files), ``experiment`` (full
benchmark sweep), ``sensitivity`` (hyperparameter / summary-noise sweeps).
Configuration is a TOML file with sections [graph], [sampling], [summary],
[solvers.*] and [evaluation]; the ``GGMLAB_LOG`` environment variable sets
the log level.

Exit codes: 0 success, 2 usage or configuration error, 3 a solver finished
without meeting its convergence tolerances (outputs are still written).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .baselines import SolverOptions, glasso_fit, lvggm_fit
from .dilat import DilatProblem, SummaryNotPDError, dilat_fit
from .evaluation import (ExperimentConfig, run_experiment, sensitivity_sweep,
                         summarize, write_rows_csv)
from .graphs import GraphSpec
from .matio import (RunManifest, read_matrix, write_edge_list, write_json,
                    write_matrix)
from .sampling import make_external_summary

log = logging.getLogger("ggmlab")


class ConfigError(Exception):
    pass


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key '{key}' in [{where}]")
    return section[key]


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}")


def _graph_spec(cfg: dict) -> GraphSpec:
    graph = cfg.get("graph")
    if graph is None:
        raise ConfigError("missing required section [graph]")
    topology = _require(graph, "topology", "graph")
    if topology == "binary_tree":
        return GraphSpec("binary_tree", height=_require(graph, "height", "graph"))
    if topology == "grid":
        return GraphSpec("grid", width=_require(graph, "width", "graph"),
                         height=_require(graph, "height", "graph"))
    if topology == "erdos_renyi":
        return GraphSpec("erdos_renyi", n=_require(graph, "n", "graph"),
                         p=_require(graph, "p", "graph"))
    raise ConfigError(f"unknown topology {topology!r} in [graph]")


def _solver_options(cfg: dict, solver: str | None = None) -> SolverOptions:
    solvers = cfg.get("solvers", {})
    merged = dict(solvers.get("common", {}))
    if solver:
        merged.update(solvers.get(solver, {}))
    valid = {f.name for f in dataclasses.fields(SolverOptions)}
    unknown = set(merged) - valid
    if unknown:
        raise ConfigError(f"unknown solver option(s): {sorted(unknown)}")
    return SolverOptions(**merged)


def experiment_config(cfg: dict, seed_override=None,
                      parallel: int = 1) -> ExperimentConfig:
    spec = _graph_spec(cfg)
    graph = cfg["graph"]
    sampling = cfg.get("sampling", {})
    summary = cfg.get("summary", {})
    ev = cfg.get("evaluation", {})
    master_seed = (seed_override if seed_override is not None
                   else ev.get("master_seed", 0))
    kwargs = dict(
        graph=spec,
        n1=_require(graph, "n1", "graph"),
        epsilon=_require(graph, "epsilon", "graph"),
        m=_require(sampling, "m", "sampling"),
        center=sampling.get("center", False),
        summary_base=summary.get("base", "theta2"),
        master_seed=master_seed,
        options=_solver_options(cfg, "dilat"),
        parallel=parallel,
    )
    for key in ("runs", "tau", "init_delta"):
        if key in ev:
            kwargs[key] = ev[key]
    for key in ("alpha_grid", "beta_grid", "sigma_grid", "snr_grid",
                "solvers"):
        if key in ev:
            kwargs[key] = tuple(ev[key])
    return ExperimentConfig(**kwargs)


def _write_manifest(command: str, cfg: dict, seed: int, out: Path) -> None:
    RunManifest(
        command=command,
        config=cfg,
        master_seed=int(seed),
        out_dir=str(out),
        artifact_version=__version__,
        created_utc=datetime.now(timezone.utc).isoformat(),
    ).write(out / "manifest.json")


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    exp = experiment_config(cfg, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest("generate", cfg, exp.master_seed, out)

    from .evaluation import _run_context  # single source of per-run data
    g, pp, _, samples, l2_hat, noise = _run_context(exp, run_index=0)
    sigma_l = cfg.get("summary", {}).get("sigma_l", 0.0)
    ext = make_external_summary(l2_hat, sigma_l, noise=noise)

    write_edge_list(g, out / "graph.edges")
    write_matrix(pp.theta, out / "theta.mtx")
    write_matrix(pp.theta1, out / "theta1.mtx")
    write_matrix(pp.theta2, out / "theta2.mtx")
    write_matrix(pp.theta12, out / "theta12.mtx")
    write_matrix(pp.marginal_theta1, out / "marginal_theta1.mtx")
    write_matrix(samples.x1, out / "x1.csv")
    write_matrix(samples.sigma1_hat, out / "sigma1_hat.mtx")
    write_matrix(ext.theta2_hat, out / "theta2_hat.mtx")
    write_json({
        "master_seed": exp.master_seed,
        "sigma_l": ext.sigma_l,
        "snr": ext.snr if np.isfinite(ext.snr) else "inf",
        "m": exp.m,
        "n": g.n,
        "n1": exp.n1,
        "graph": exp.graph.tag(),
        "permutation": list(pp.perm),
    }, out / "meta.json")
    log.info("instance written to %s", out)
    return 0


def cmd_estimate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sigma1 = read_matrix(args.sigma1)
    opts = SolverOptions(max_iter=args.max_iter) if args.max_iter else None

    if args.solver == "glasso":
        est = glasso_fit(sigma1, args.alpha, opts)
        write_matrix(est.precision, out / "c_hat.mtx")
        diags = est.diagnostics
    elif args.solver == "lvggm":
        est = lvggm_fit(sigma1, args.alpha, args.beta, opts)
        write_matrix(est.c_hat, out / "c_hat.mtx")
        write_matrix(est.m_hat, out / "m_hat.mtx")
        diags = est.diagnostics
    else:  # dilat
        if args.theta2 is None:
            print("error: solver 'dilat' requires --theta2", file=sys.stderr)
            return 2
        theta2_hat = read_matrix(args.theta2)
        try:
            prob = DilatProblem(sigma1, theta2_hat, args.alpha, args.beta)
        except SummaryNotPDError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        c_hat, b_hat, state = dilat_fit(prob, opts)
        write_matrix(c_hat, out / "c_hat.mtx")
        write_matrix(b_hat, out / "b_hat.mtx")
        write_json(state.as_dict(), out / "diagnostics.json")
        return 0 if state.converged else 3

    write_json(diags.as_dict(), out / "diagnostics.json")
    return 0 if diags.converged else 3


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    exp = experiment_config(cfg, seed_override=args.seed,
                            parallel=args.parallel)
    if args.solver:
        exp = dataclasses.replace(exp, solvers=tuple(args.solver))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest("experiment", cfg, exp.master_seed, out)
    rows, summary = run_experiment(exp)
    write_rows_csv(rows, out / "results.csv")
    write_json(summary, out / "summary.json")
    log.info("%d rows written to %s", len(rows), out / "results.csv")
    return 0


def cmd_sensitivity(args) -> int:
    cfg = load_config(args.config)
    exp = experiment_config(cfg, seed_override=args.seed,
                            parallel=args.parallel)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(f"sensitivity:{args.mode}", cfg, exp.master_seed, out)
    rows, summary = sensitivity_sweep(exp, args.mode)
    write_rows_csv(rows, out / f"sensitivity_{args.mode}.csv")
    write_json(summary, out / "summary.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ggmlab",
        description="Semiblind subgraph recovery in Gaussian graphical models")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="ggmlab-out",
                        help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=None,
                        help="master seed override")
    common.add_argument("--parallel", type=int, default=1,
                        help="worker processes (results are identical for "
                             "any worker count)")

    p_gen = sub.add_parser("generate", parents=[common],
                           help="materialize one synthetic instance")
    p_gen.add_argument("--config", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_est = sub.add_parser("estimate", parents=[common],
                           help="fit one solver on matrix files")
    p_est.add_argument("--solver", required=True,
                       choices=("glasso", "lvggm", "dilat"))
    p_est.add_argument("--sigma1", required=True,
                       help="internal sample covariance (.csv or .mtx)")
    p_est.add_argument("--theta2", default=None,
                       help="external summary matrix (dilat only)")
    p_est.add_argument("--alpha", type=float, required=True)
    p_est.add_argument("--beta", type=float, default=1.0)
    p_est.add_argument("--max-iter", type=int, default=None)
    p_est.set_defaults(func=cmd_estimate)

    p_exp = sub.add_parser("experiment", parents=[common],
                           help="run the benchmark sweep from a config")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--solver", action="append", default=None,
                       choices=("glasso", "lvggm", "dilat"),
                       help="restrict to these solvers (repeatable)")
    p_exp.set_defaults(func=cmd_experiment)

    p_sen = sub.add_parser("sensitivity", parents=[common],
                           help="alpha/beta surface or SNR robustness sweep")
    p_sen.add_argument("--config", required=True)
    p_sen.add_argument("--mode", required=True, choices=("alpha_beta", "snr"))
    p_sen.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GGMLAB_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
