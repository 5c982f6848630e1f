"""Generate interior-point oracle fixtures for the test suite.

Run once (requires cvxpy); the JSON outputs are committed so the tests never
depend on a conic solver at runtime.

    python scripts/make_oracle_fixtures.py
"""
import json
from pathlib import Path

import cvxpy as cp
import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def rand_pd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T / n + np.eye(n))


def glasso_oracle():
    """Graphical-lasso objective at the interior-point optimum, 5x5."""
    rng = np.random.default_rng(20240501)
    sigma = rand_pd(rng, 5, 1.5)
    alpha = 0.3
    theta = cp.Variable((5, 5), symmetric=True)
    objective = (-cp.log_det(theta) + cp.trace(sigma @ theta)
                 + alpha * cp.norm(cp.vec(theta, order="F"), 1))
    prob = cp.Problem(cp.Minimize(objective))
    prob.solve(solver=cp.CLARABEL)
    return {
        "sigma": sigma.tolist(),
        "alpha": alpha,
        "oracle_objective": float(prob.value),
    }


def lvggm_oracle():
    """Latent-variable objective at the interior-point optimum, 4x4."""
    rng = np.random.default_rng(20240502)
    sigma = rand_pd(rng, 4, 1.2)
    alpha, beta = 0.2, 0.5
    c = cp.Variable((4, 4), symmetric=True)
    m = cp.Variable((4, 4), PSD=True)
    objective = (-cp.log_det(c - m) + cp.trace(sigma @ (c - m))
                 + alpha * cp.norm(cp.vec(c, order="F"), 1)
                 + beta * cp.normNuc(m))
    prob = cp.Problem(cp.Minimize(objective))
    prob.solve(solver=cp.CLARABEL)
    return {
        "sigma": sigma.tolist(),
        "alpha": alpha,
        "beta": beta,
        "oracle_objective": float(prob.value),
    }


def inner_subproblem_oracles(count=20):
    """Convex surrogate instances with their interior-point optima.

    Instance layout mirrors the inner solver: data (sigma1, theta2), a
    linearization point b_prev, weights (alpha, beta); the oracle solves the
    surrogate over (C, B) with the external block pinned to theta2^{-1}.
    """
    rng = np.random.default_rng(20240503)
    fixtures = []
    for idx in range(count):
        n = int(rng.integers(2, 4))  # n1 = n2 in {2, 3}
        sigma1 = rand_pd(rng, n, 2.0)
        theta2 = rand_pd(rng, n)
        alpha = float(rng.uniform(0.05, 0.5))
        beta = float(rng.uniform(0.05, 1.0))
        b_prev = 0.4 * rng.standard_normal((n, n))
        d = b_prev @ theta2
        t_inv = np.linalg.inv(theta2)

        c = cp.Variable((n, n), symmetric=True)
        b = cp.Variable((n, n))
        r = cp.bmat([[c, b], [b.T, cp.Constant(t_inv)]])
        objective = (-cp.log_det(r)
                     + cp.trace(sigma1 @ (c - 2 * b @ d.T))
                     + alpha * cp.norm(cp.vec(c, order="F"), 1)
                     + beta * cp.sum(cp.norm(theta2 @ b.T, 2, axis=1)))
        prob = cp.Problem(cp.Minimize(objective))
        prob.solve(solver=cp.CLARABEL)
        fixtures.append({
            "n": n,
            "sigma1": sigma1.tolist(),
            "theta2": theta2.tolist(),
            "alpha": alpha,
            "beta": beta,
            "b_prev": b_prev.tolist(),
            "oracle_objective": float(prob.value),
            "oracle_c": np.asarray(c.value).tolist(),
            "oracle_b": np.asarray(b.value).tolist(),
        })
        print(f"  instance {idx}: n={n} oracle={prob.value:.8f}")
    return fixtures


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    print("graphical lasso oracle ...")
    (OUT / "glasso_oracle.json").write_text(
        json.dumps(glasso_oracle(), indent=1))
    print("latent-variable oracle ...")
    (OUT / "lvggm_oracle.json").write_text(
        json.dumps(lvggm_oracle(), indent=1))
    print("inner subproblem oracles ...")
    (OUT / "inner_oracle.json").write_text(
        json.dumps(inner_subproblem_oracles(), indent=1))
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
