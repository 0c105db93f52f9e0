"""Spatial precision matrices and sampling of the space-time random field.

The latent field follows a stationary AR(1) in time whose innovations carry
a Leroux-type spatial precision. Its joint precision over all I*T sites is
block tridiagonal in time, which the sampler exploits through a banded
Cholesky factorisation (bandwidth 2I-1 under time-major ordering).
"""

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve, cholesky_banded, \
    solve_triangular
from scipy.linalg.blas import dtbsv

from .errors import NumericalError

__all__ = ["laplacian", "leroux_precision", "leroux_logdet",
           "SpaceTimePrecision", "sample_spatial_innovations"]


def laplacian(grid):
    """Graph Laplacian diag(W 1) - W of the grid adjacency, sparse CSR."""
    w = sparse.csr_matrix(grid.adjacency.astype(np.float64))
    degrees = np.asarray(w.sum(axis=1)).ravel()
    return (sparse.diags(degrees) - w).tocsr()


def leroux_precision(rho, grid):
    """Spatial precision rho * (diag(W 1) - W) + (1 - rho) * I, sparse.

    Positive definite for 0 <= rho < 1 and positive semidefinite at
    rho = 1, where it degenerates to the graph Laplacian.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    n = grid.n_locations
    return (rho * laplacian(grid) + (1.0 - rho) * sparse.identity(n)).tocsr()


def leroux_logdet(rho, lap_eigvals):
    """log det of the Leroux precision from precomputed Laplacian
    eigenvalues; -inf at rho = 1 on connected graphs."""
    terms = rho * lap_eigvals + (1.0 - rho)
    if (terms <= 0.0).any():
        return -np.inf
    return float(np.log(terms).sum())


def sample_spatial_innovations(rng, chol_q_lower, tau2, size=None):
    """Draws from N(0, tau2 * Q^{-1}) given the lower Cholesky of Q.

    ``size`` draws columns of shape (I, size); a single (I,) vector when
    omitted.
    """
    n = chol_q_lower.shape[0]
    shape = (n,) if size is None else (n, size)
    z = rng.standard_normal(shape)
    return np.sqrt(tau2) * solve_triangular(chol_q_lower.T, z, lower=False)


class SpaceTimePrecision:
    """Banded assembly and sampling for the latent field's full conditional.

    With Q = Q(rho, W) and a = 1 / (tau2 * (1 - xi^2)), the prior precision
    of the time-major stacked field is the block tridiagonal matrix with
    diagonal blocks a*Q, a*(1+xi^2)*Q, ..., a*Q and off-diagonal blocks
    -xi*a*Q. The data contribute 1/sigma2 on the main diagonal. The sparsity
    pattern is fixed per grid, so assembly reduces to scattering freshly
    scaled values into a reusable banded layout.
    """

    _CAT_END, _CAT_MID, _CAT_OFF = 0, 1, 2

    def __init__(self, grid, t_length):
        if t_length < 1:
            raise ValueError("t_length must be >= 1")
        n = grid.n_locations
        self.n_locations = n
        self.t_length = t_length
        self.size = n * t_length
        self.bandwidth = min(2 * n - 1, self.size - 1)

        lap = laplacian(grid)
        pattern = (lap + sparse.identity(n)).tocoo()
        qi, qj, = pattern.row, pattern.col
        lap_vals = np.asarray(lap[qi, qj]).ravel()
        eye_vals = (qi == qj).astype(np.float64)

        rows, cols, cats = [], [], []
        lapv, eyev = [], []
        for t in range(t_length):
            cat = (self._CAT_END if t in (0, t_length - 1) and t_length > 1
                   else self._CAT_MID if t_length > 1 else self._CAT_END)
            upper = qi <= qj
            rows.append(t * n + qi[upper])
            cols.append(t * n + qj[upper])
            cats.append(np.full(upper.sum(), cat))
            lapv.append(lap_vals[upper])
            eyev.append(eye_vals[upper])
            if t + 1 < t_length:
                rows.append(t * n + qi)
                cols.append((t + 1) * n + qj)
                cats.append(np.full(len(qi), self._CAT_OFF))
                lapv.append(lap_vals)
                eyev.append(eye_vals)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        self._cats = np.concatenate(cats)
        self._lap_vals = np.concatenate(lapv)
        self._eye_vals = np.concatenate(eyev)
        # position of each entry inside the upper-banded storage
        self._positions = (self.bandwidth + rows - cols) * self.size + cols

    def banded(self, xi, rho, tau2, sigma2):
        """Posterior precision in scipy upper-banded layout."""
        one_minus = 1.0 - xi * xi
        if one_minus <= 0.0 and self.t_length > 1:
            raise ValueError(f"|xi| must be < 1, got {xi}")
        scale = 1.0 / (tau2 * one_minus) if self.t_length > 1 else 1.0 / tau2
        tcoef = np.choose(self._cats,
                          [1.0, 1.0 + xi * xi, -xi]) * scale
        qv = rho * self._lap_vals + (1.0 - rho) * self._eye_vals
        ab = np.zeros((self.bandwidth + 1, self.size))
        ab.ravel()[self._positions] = tcoef * qv
        ab[-1, :] += 1.0 / sigma2
        return ab

    def sample(self, rng, xi, rho, tau2, sigma2, resid, noise=None):
        """One draw of the field given residuals ``resid`` of shape (I, T).

        Solves the Gaussian full conditional with precision
        ``prior + I/sigma2`` and linear term ``resid/sigma2``. ``noise``
        injects the standard-normal vector (tests only).
        """
        ab = self.banded(xi, rho, tau2, sigma2)
        rhs = (resid / sigma2).T.ravel()  # time-major stacking
        try:
            factor = cholesky_banded(ab, lower=False, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"banded Cholesky of the space-time precision failed: {exc}"
            ) from exc
        # with the posterior precision factored as U'U, the draw is
        # U^{-1}(U^{-T} rhs + z); both solves are triangular banded (BLAS
        # tbsv), which shares the factor's storage layout
        u = self.bandwidth
        mean_stage = dtbsv(u, factor, rhs, trans=1)
        z = rng.standard_normal(self.size) if noise is None else noise
        field = dtbsv(u, factor, mean_stage + z, trans=0)
        return field.reshape(self.t_length, self.n_locations).T

    def dense(self, xi, rho, tau2, sigma2):
        """Dense posterior precision (small problems; used by tests)."""
        ab = self.banded(xi, rho, tau2, sigma2)
        out = np.zeros((self.size, self.size))
        u = self.bandwidth
        for j in range(self.size):
            for k in range(max(0, j - u), j + 1):
                out[k, j] = ab[u + k - j, j]
                out[j, k] = out[k, j]
        return out


def mvn_logpdf(x, mean, cov):
    """Log density of N(mean, cov) at x via a Cholesky factorisation."""
    factor = cho_factor(cov, lower=True)
    diff = x - mean
    maha = diff @ cho_solve(factor, diff)
    logdet = 2.0 * np.log(np.diag(factor[0])).sum()
    k = len(x)
    return -0.5 * (k * np.log(2.0 * np.pi) + logdet + maha)
