"""Gaussian graph-signal sampling and the noisy external summary.

All randomness flows from explicit seeds (anything accepted by
``numpy.random.default_rng``), so every artifact here is reproducible and
safe to regenerate concurrently with derived seeds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .graphs import PartitionedPrecision

__all__ = [
    "SampleSet",
    "ExternalSummary",
    "DegenerateSummaryError",
    "sample_gaussian",
    "sample_covariance",
    "internal_samples",
    "gram_noise",
    "make_external_summary",
]


class DegenerateSummaryError(ValueError):
    """The fabricated external summary lost positive definiteness."""


@dataclass(frozen=True)
class SampleSet:
    """Internal observations (columns are samples) with their covariance."""

    x1: np.ndarray = field(compare=False, repr=False)
    m: int
    sigma1_hat: np.ndarray = field(compare=False, repr=False)


@dataclass(frozen=True)
class ExternalSummary:
    """Shared noisy matrix Theta2_hat = L2_hat + sigma_l^2 * G.

    G = H H^T / n2^2 is a Gram matrix of an i.i.d. standard normal H, so the
    noise is PSD and the summary stays positive definite whenever the base
    is.  snr is ||L2_hat||_F^2 / sigma_l^2 (inf for a noiseless summary).
    """

    theta2_hat: np.ndarray = field(compare=False, repr=False)
    l2_hat: np.ndarray = field(compare=False, repr=False)
    sigma_l: float
    snr: float
    seed: object = None


def sample_gaussian(theta: np.ndarray, m: int, seed=None) -> np.ndarray:
    """Draw m i.i.d. columns from N(0, theta^{-1}).

    Factors theta = L L^T and solves L^T x = z for standard normal z; no
    explicit inverse is formed.  Raises ``numpy.linalg.LinAlgError`` when
    theta is not positive definite.
    """
    if m < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    theta = np.asarray(theta, dtype=float)
    chol = np.linalg.cholesky(0.5 * (theta + theta.T))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((theta.shape[0], m))
    return scipy.linalg.solve_triangular(chol.T, z, lower=False,
                                         check_finite=False)


def sample_covariance(x1: np.ndarray, center: bool = False) -> np.ndarray:
    """X X^T / m.  The mean is known to be zero, so centering is off by
    default; ``center=True`` subtracts row means for real-data use."""
    x1 = np.asarray(x1, dtype=float)
    m = x1.shape[1]
    if center:
        x1 = x1 - x1.mean(axis=1, keepdims=True)
    cov = x1 @ x1.T / m
    return 0.5 * (cov + cov.T)


def internal_samples(pp: PartitionedPrecision, m: int, seed=None,
                     center: bool = False) -> SampleSet:
    """Sample the full graph signal and keep the target rows.

    The precision is already reindexed with the target block leading, so the
    internal data are simply the first n1 rows.
    """
    x = sample_gaussian(pp.theta, m, seed)
    x1 = x[: pp.n1]
    return SampleSet(x1=x1, m=m, sigma1_hat=sample_covariance(x1, center))


def gram_noise(n2: int, seed=None) -> np.ndarray:
    """Unit-scale PSD noise G = H H^T / n2^2, H i.i.d. standard normal."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n2, n2))
    return h @ h.T / float(n2) ** 2


def make_external_summary(theta2: np.ndarray, sigma_l: float, seed=None,
                          noise: np.ndarray | None = None) -> ExternalSummary:
    """Fabricate the shared summary Theta2_hat = theta2 + sigma_l^2 * G.

    Pass ``noise`` to reuse one Gram draw across a sigma_l sweep (the
    experiment harness does this so the grid varies only the noise scale).
    """
    if sigma_l < 0:
        raise ValueError(f"noise scale must be nonnegative, got {sigma_l}")
    l2_hat = np.asarray(theta2, dtype=float)
    n2 = l2_hat.shape[0]
    g = gram_noise(n2, seed) if noise is None else np.asarray(noise, dtype=float)
    theta2_hat = l2_hat + sigma_l**2 * g
    theta2_hat = 0.5 * (theta2_hat + theta2_hat.T)
    try:
        np.linalg.cholesky(theta2_hat)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSummaryError(
            "external summary is not positive definite") from exc
    base_energy = float(np.linalg.norm(l2_hat, "fro") ** 2)
    snr = np.inf if sigma_l == 0 else base_energy / sigma_l**2
    return ExternalSummary(theta2_hat=theta2_hat, l2_hat=l2_hat,
                           sigma_l=float(sigma_l), snr=snr, seed=seed)
