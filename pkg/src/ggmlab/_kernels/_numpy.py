"""Pure NumPy implementations of the shrinkage kernels.

Inputs are C-contiguous float64 arrays (the dispatching wrappers in
``ggmlab.prox`` normalize dtype/layout); thresholds are nonnegative scalars.
"""
import numpy as np


def soft_threshold(z, t):
    """Entrywise sign(z) * max(|z| - t, 0)."""
    out = np.abs(z) - t
    np.maximum(out, 0.0, out=out)
    out *= np.sign(z)
    return out


def group_row_shrink(z, t):
    """Row i maps to (1 - t / ||z_i||_2)_+ * z_i; zero rows stay zero."""
    norms = np.linalg.norm(z, axis=1)
    scale = np.zeros_like(norms)
    nz = norms > 0.0
    scale[nz] = np.maximum(1.0 - t / norms[nz], 0.0)
    return z * scale[:, None]


def weighted_row_shrink(z, beta_xi, diag_theta):
    """Row i maps to (1 - beta_xi * theta_ii / ||z_i||_2)_+ * z_i."""
    norms = np.linalg.norm(z, axis=1)
    scale = np.zeros_like(norms)
    nz = norms > 0.0
    scale[nz] = np.maximum(1.0 - beta_xi * diag_theta[nz] / norms[nz], 0.0)
    return z * scale[:, None]
