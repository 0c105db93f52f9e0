"""Synthetic data generation from the model's own generative process.

Used by the test suite as the recovery oracle and for producing small
demonstration datasets.
"""

import numpy as np

from .gmrf import leroux_precision, sample_spatial_innovations
from .spatial import Trace

__all__ = ["simulate_trace", "simulate_field", "three_cluster_assignments"]


def simulate_field(rng, grid, t_length, xi, rho, tau2):
    """Latent AR(1) field with Leroux-precision innovations, shape (I, T).

    The stationary marginal of every time slice is N(0, tau2 * Q^{-1}).
    """
    q = leroux_precision(rho, grid).toarray()
    chol_q = np.linalg.cholesky(q)
    w = np.empty((grid.n_locations, t_length))
    w[:, 0] = sample_spatial_innovations(rng, chol_q, tau2)
    scale = np.sqrt(1.0 - xi * xi)
    for t in range(1, t_length):
        innovation = sample_spatial_innovations(rng, chol_q, tau2)
        w[:, t] = xi * w[:, t - 1] + scale * innovation
    return w


def simulate_trace(rng, grid, design, t_length, beta0, betas,
                   assignments=None, xi=0.0, rho=0.0, tau2=0.0,
                   sigma2=0.01, t0=0):
    """Positive-valued trace drawn from the generative model.

    ``betas`` is (n_clusters, 2K) with ``assignments`` mapping locations
    to rows (a single shared row when omitted). ``tau2 = 0`` drops the
    latent field entirely (the baseline variant). Returns the Trace and
    the simulated field (None without one).
    """
    betas = np.atleast_2d(np.asarray(betas, dtype=np.float64))
    if assignments is None:
        assignments = np.zeros(grid.n_locations, dtype=np.int64)
    assignments = np.asarray(assignments, dtype=np.int64)
    x_design = design.matrix(t0, t_length)
    mean = beta0 + betas[assignments] @ x_design.T

    if tau2 > 0.0:
        w = simulate_field(rng, grid, t_length, xi, rho, tau2)
    else:
        w = None
    noise = rng.standard_normal(mean.shape) * np.sqrt(sigma2)
    log_values = mean + (w if w is not None else 0.0) + noise
    return Trace(np.exp(log_values), t0=t0), w


def three_cluster_assignments(grid):
    """Partition a grid into three vertical bands (west/centre/east)."""
    out = np.empty(grid.n_locations, dtype=np.int64)
    thirds = grid.n_cols / 3.0
    for loc in range(grid.n_locations):
        _, col = grid.cell_of(loc)
        out[loc] = min(int(col / thirds), 2)
    return out
