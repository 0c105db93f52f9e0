"""Gibbs samplers for the harmonic-regression model variants.

Model on the log scale: log y_{i,t} = beta0 + h_t' beta_{c(i)} + w_{i,t}
+ eps_{i,t}. The baseline variant drops the latent field w; the CAR-AR
variants evolve w as a stationary AR(1) with Leroux-precision spatial
innovations; the BNP variant additionally clusters the harmonic
coefficient vectors under a Dirichlet-process prior.

All full conditionals are standard conjugate updates except for the
spatial-dependence and persistence parameters, which move by
random-walk Metropolis-Hastings with truncated-normal proposals on
their supports (adapted during burn-in).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import truncnorm

from .errors import DataError, NumericalError
from .gmrf import SpaceTimePrecision, laplacian, leroux_logdet
from .harmonic import HarmonicDesign

__all__ = ["Hyperparams", "BNPConfig", "McmcConfig", "ModelConfig",
           "PosteriorDraw", "GibbsSampler", "gibbs_run", "VARIANTS"]

VARIANTS = ("baseline", "car_ar_rho_fixed", "car_ar", "car_ar_bnp")


@dataclass(frozen=True)
class Hyperparams:
    """Prior hyperparameters shared by all variants.

    ``m0`` and ``s0`` (a full coefficient prior covariance, row tuples)
    default to a zero vector and ``s0_scale * I`` of the right dimension
    once the number of harmonic coefficients is known.
    """

    m0: tuple = None
    s0: tuple = None
    s0_scale: float = 0.1
    a_sigma: float = 1.0
    b_sigma: float = 0.01
    a_tau: float = 1.0
    b_tau: float = 0.01
    intercept_variance: float = 100.0

    def __post_init__(self):
        for name in ("s0_scale", "a_sigma", "b_sigma", "a_tau", "b_tau",
                     "intercept_variance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.m0 is not None:
            object.__setattr__(self, "m0",
                               tuple(float(v) for v in self.m0))
        if self.s0 is not None:
            matrix = np.asarray(self.s0, dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ValueError("s0 must be a square matrix")
            if not np.allclose(matrix, matrix.T):
                raise ValueError("s0 must be symmetric")
            if np.linalg.eigvalsh(matrix).min() <= 0:
                raise ValueError("s0 must be positive definite")
            object.__setattr__(self, "s0",
                               tuple(tuple(float(v) for v in row)
                                     for row in matrix))

    def coefficient_prior(self, n_coefficients):
        """(m0 vector, S0 matrix) resolved for 2K coefficients."""
        if self.m0 is None:
            m0 = np.zeros(n_coefficients)
        else:
            m0 = np.asarray(self.m0, dtype=np.float64)
            if m0.shape != (n_coefficients,):
                raise ValueError(f"m0 has length {len(m0)}, expected "
                                 f"{n_coefficients}")
        if self.s0 is None:
            return m0, self.s0_scale * np.eye(n_coefficients)
        s0 = np.asarray(self.s0, dtype=np.float64)
        if s0.shape != (n_coefficients, n_coefficients):
            raise ValueError(f"s0 has shape {s0.shape}, expected "
                             f"({n_coefficients}, {n_coefficients})")
        return m0, s0


@dataclass(frozen=True)
class BNPConfig:
    """Dirichlet-process concentration and auxiliary-slot count."""

    alpha: float = 1.0
    n_aux: int = 50

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n_aux < 1:
            raise ValueError("n_aux must be >= 1")


@dataclass(frozen=True)
class McmcConfig:
    iters: int = 10000
    burnin: int = 5000
    thin: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= self.burnin < self.iters:
            raise ValueError("burnin must satisfy 0 <= burnin < iters")

    @property
    def n_draws(self):
        return (self.iters - self.burnin) // self.thin


@dataclass(frozen=True)
class ModelConfig:
    variant: str
    frequencies: tuple
    hyper: Hyperparams = field(default_factory=Hyperparams)
    bnp: BNPConfig = None
    rho0: float = None
    mcmc: McmcConfig = field(default_factory=McmcConfig)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; "
                             f"expected one of {VARIANTS}")
        object.__setattr__(self, "frequencies",
                           tuple(float(f) for f in self.frequencies))
        if self.variant == "car_ar_rho_fixed":
            if self.rho0 is None or not 0.0 <= self.rho0 < 1.0:
                raise ValueError("car_ar_rho_fixed needs rho0 in [0, 1)")
        if self.variant == "car_ar_bnp" and self.bnp is None:
            object.__setattr__(self, "bnp", BNPConfig())

    @property
    def design(self):
        return HarmonicDesign(self.frequencies)

    @property
    def has_spatial_field(self):
        return self.variant != "baseline"


@dataclass
class PosteriorDraw:
    """One recorded MCMC state.

    ``betas`` holds the unique coefficient vectors (one row per cluster)
    and ``assignments`` maps each location to a row; non-clustering
    variants use a single shared row. ``w`` is the latent field over the
    training window, or None for the baseline variant, whose placeholder
    ``xi``/``rho``/``tau2`` values are never used downstream.
    """

    beta0: float
    betas: np.ndarray
    assignments: np.ndarray
    w: np.ndarray
    xi: float
    rho: float
    tau2: float
    sigma2: float

    def __post_init__(self):
        self.betas = np.atleast_2d(np.asarray(self.betas, dtype=np.float64))
        self.assignments = np.asarray(self.assignments, dtype=np.int64)
        if not -1.0 < self.xi < 1.0:
            raise ValueError(f"xi must lie in (-1, 1), got {self.xi}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if self.tau2 <= 0 or self.sigma2 <= 0:
            raise ValueError("variances must be positive")
        if self.assignments.min(initial=0) < 0 or \
                self.assignments.max(initial=0) >= len(self.betas):
            raise ValueError("assignments refer to missing clusters")

    @property
    def n_clusters(self):
        return self.betas.shape[0]

    def location_coefficients(self):
        """Per-location coefficient matrix of shape (I, 2K)."""
        return self.betas[self.assignments]


# ---------------------------------------------------------------------------
# conditional updates (module-level so each is unit-testable on its own)
# ---------------------------------------------------------------------------

def draw_intercept(rng, resid, sigma2, prior_variance):
    """Gaussian full conditional of the global intercept.

    ``resid`` is the data minus every other mean component.
    """
    precision = 1.0 / prior_variance + resid.size / sigma2
    mean = resid.sum() / sigma2 / precision
    return mean + rng.standard_normal() / math.sqrt(precision)


def draw_cluster_coefficients(rng, resid, x_design, xtx, sigma2,
                              assignments, n_clusters, m0, s0_inv):
    """Gaussian full conditionals of the unique coefficient vectors.

    ``resid`` is (I, T) with intercept and latent field removed. Shape of
    the result is (n_clusters, 2K); empty clusters draw from the prior.
    """
    out = np.empty((n_clusters, x_design.shape[1]))
    prior_rhs = s0_inv @ m0
    for j in range(n_clusters):
        members = assignments == j
        n_members = int(members.sum())
        precision = s0_inv + (n_members / sigma2) * xtx
        rhs = prior_rhs.copy()
        if n_members:
            rhs += x_design.T @ resid[members].sum(axis=0) / sigma2
        chol = np.linalg.cholesky(precision)
        mean = np.linalg.solve(precision, rhs)
        z = rng.standard_normal(len(m0))
        out[j] = mean + np.linalg.solve(chol.T, z)
    return out


def draw_variance_ig(rng, shape, rate):
    """Inverse-gamma draw parameterised by shape and rate."""
    return 1.0 / rng.gamma(shape, 1.0 / rate)


def xi_log_density(xi, quad_same, quad_cross, quad_prev, tau2,
                   n_locations, t_length):
    """Log full conditional of the AR persistence (up to a constant).

    The quadratics are sums over t >= 2 of w_t' Q w_t, w_t' Q w_{t-1} and
    w_{t-1}' Q w_{t-1}; the time-1 stationary term does not involve xi.
    """
    one_minus = 1.0 - xi * xi
    if one_minus <= 1e-12:
        return -np.inf
    quad = quad_same - 2.0 * xi * quad_cross + xi * xi * quad_prev
    return (-0.5 * (t_length - 1) * n_locations * math.log(one_minus)
            - quad / (2.0 * tau2 * one_minus))


def rho_log_density(rho, g_lap, g_eye, tau2, lap_eigvals, t_length):
    """Log full conditional of the spatial-dependence parameter.

    ``g_lap``/``g_eye`` collect the Laplacian and identity parts of the
    field's quadratic form, so the density is linear in rho apart from
    the determinant term.
    """
    if not 0.0 <= rho <= 1.0:
        return -np.inf
    logdet = leroux_logdet(rho, lap_eigvals)
    if not np.isfinite(logdet):
        return -np.inf
    return (0.5 * t_length * logdet
            - (rho * g_lap + (1.0 - rho) * g_eye) / (2.0 * tau2))


def _log_truncnorm_mass(mean, sd, lo, hi):
    return math.log(ndtr((hi - mean) / sd) - ndtr((lo - mean) / sd))


def mh_truncnorm_step(rng, current, sd, lo, hi, log_target):
    """One MH move with a truncated-normal proposal on [lo, hi].

    The proposal's normalising constants enter the acceptance ratio, so
    the move targets ``log_target`` exactly. Returns (value, accepted).
    """
    a, b = (lo - current) / sd, (hi - current) / sd
    proposal = float(truncnorm.rvs(a, b, loc=current, scale=sd,
                                   random_state=rng))
    log_alpha = (log_target(proposal) - log_target(current)
                 + _log_truncnorm_mass(current, sd, lo, hi)
                 - _log_truncnorm_mass(proposal, sd, lo, hi))
    if math.log(rng.uniform()) < log_alpha:
        return proposal, True
    return current, False


def sweep_assignments_reuse(rng, resid, x_design, sigma2, betas,
                            assignments, alpha, n_aux, m0, chol_s0):
    """One marginalised cluster-assignment sweep with slot reuse.

    Auxiliary coefficient vectors are refreshed from the prior at the
    start of the sweep; a cluster emptied mid-sweep parks its vector in a
    random slot so it can be rediscovered, and a slot that seeds a new
    cluster is replenished from the prior. Weights: n_j f(y_i | beta_j)
    for occupied clusters and (alpha/C) f(y_i | aux_c) for slots.

    Returns (betas, assignments) with compacted cluster labels.
    """
    n_locations, t_length = resid.shape
    dim = x_design.shape[1]

    betas_list = [betas[j].copy() for j in range(len(betas))]
    fitted = [x_design @ b for b in betas_list]
    counts = np.bincount(assignments, minlength=len(betas_list)).tolist()
    assignments = assignments.copy()

    aux = [m0 + chol_s0 @ rng.standard_normal(dim) for _ in range(n_aux)]
    aux_fitted = [x_design @ b for b in aux]
    log_alpha_slot = math.log(alpha / n_aux)

    for i in range(n_locations):
        current = assignments[i]
        counts[current] -= 1
        if counts[current] == 0:
            # reuse: park the orphaned coefficients in a random slot
            slot = int(rng.integers(n_aux))
            aux[slot] = betas_list.pop(current)
            aux_fitted[slot] = fitted.pop(current)
            counts.pop(current)
            assignments[assignments > current] -= 1
            assignments[i] = -1

        n_occ = len(betas_list)
        cand_fitted = np.stack(fitted + aux_fitted, axis=0)  # (n_cand, T)
        sq = ((resid[i][None, :] - cand_fitted) ** 2).sum(axis=1)
        loglik = -0.5 * sq / sigma2
        logw = loglik.copy()
        logw[:n_occ] += np.log(counts)
        logw[n_occ:] += log_alpha_slot

        logw -= logw.max()
        probs = np.exp(logw)
        probs /= probs.sum()
        choice = int(rng.choice(len(probs), p=probs))

        if choice < n_occ:
            assignments[i] = choice
            counts[choice] += 1
        else:
            slot = choice - n_occ
            betas_list.append(aux[slot])
            fitted.append(aux_fitted[slot])
            counts.append(1)
            assignments[i] = n_occ
            aux[slot] = m0 + chol_s0 @ rng.standard_normal(dim)
            aux_fitted[slot] = x_design @ aux[slot]

    return np.stack(betas_list, axis=0), assignments


# ---------------------------------------------------------------------------
# sampler
# ---------------------------------------------------------------------------

class GibbsSampler:
    """Holds the chain state and runs full Gibbs sweeps.

    Most callers should use :func:`gibbs_run`; the class is public so
    tests can drive single sweeps and inject states.
    """

    ADAPT_INTERVAL = 100

    def __init__(self, data, grid, config, rng):
        values = data.values
        if (values <= 0).any():
            loc, step = np.argwhere(values <= 0)[0]
            raise DataError(f"training data must be strictly positive; "
                            f"location {loc} at step {step} is "
                            f"{values[loc, step]}")
        if data.n_locations != grid.n_locations:
            raise ValueError(f"trace has {data.n_locations} locations but "
                             f"the grid has {grid.n_locations}")
        self.config = config
        self.grid = grid
        self.rng = rng
        self.z = np.log(values)
        self.n_locations, self.t_length = self.z.shape

        design = config.design
        design.check_train_length(self.t_length)
        if self.t_length < design.n_coefficients + 2:
            raise DataError(f"training window of {self.t_length} steps is "
                            f"too short for {design.n_coefficients} "
                            f"coefficients (need T >= 2K + 2)")
        self.x_design = design.matrix(data.t0, self.t_length)
        self.xtx = self.x_design.T @ self.x_design
        self.m0, s0 = config.hyper.coefficient_prior(design.n_coefficients)
        self.s0_inv = np.linalg.inv(s0)
        self.chol_s0 = np.linalg.cholesky(s0)

        self.spatial = config.has_spatial_field
        if self.spatial:
            self.stp = SpaceTimePrecision(grid, self.t_length)
            self.lap = laplacian(grid)
            self.lap_eigvals = np.linalg.eigvalsh(self.lap.toarray())

        self._init_state()
        self.prop_sd = {"xi": 0.05, "rho": 0.05}
        self._accepts = {"xi": 0, "rho": 0}
        self._proposals = {"xi": 0, "rho": 0}

    def _init_state(self):
        cfg = self.config
        self.beta0 = float(self.z.mean())
        pooled = (self.z - self.beta0).mean(axis=0)
        beta = np.linalg.solve(self.xtx + self.s0_inv,
                               self.x_design.T @ pooled)
        self.betas = beta[None, :].copy()
        self.assignments = np.zeros(self.n_locations, dtype=np.int64)
        resid_var = float((self.z - self.beta0
                           - self._fitted()).var())
        if self.spatial:
            self.w = np.zeros((self.n_locations, self.t_length))
            self.xi = 0.5
            self.rho = cfg.rho0 if cfg.variant == "car_ar_rho_fixed" else 0.5
            self.sigma2 = max(resid_var / 2.0, 1e-4)
            self.tau2 = max(resid_var / 2.0, 1e-4)
        else:
            self.w = None
            self.xi = 0.0
            self.rho = 0.0
            self.sigma2 = max(resid_var, 1e-4)
            # unused placeholder kept positive for the draw invariants
            self.tau2 = cfg.hyper.b_tau / (cfg.hyper.a_tau + 1.0)

    def _fitted(self):
        return self.betas[self.assignments] @ self.x_design.T

    def _field(self):
        return self.w if self.spatial else 0.0

    def sweep(self):
        """One full Gibbs sweep over the variant's blocks."""
        cfg = self.config
        rng = self.rng
        hyper = cfg.hyper

        # (a) cluster assignments and unique values, BNP only
        if cfg.variant == "car_ar_bnp":
            resid = self.z - self.beta0 - self._field()
            self.betas, self.assignments = sweep_assignments_reuse(
                rng, resid, self.x_design, self.sigma2, self.betas,
                self.assignments, cfg.bnp.alpha, cfg.bnp.n_aux,
                self.m0, self.chol_s0)

        # (b) unique regression coefficients, then the global intercept
        resid = self.z - self.beta0 - self._field()
        self.betas = draw_cluster_coefficients(
            rng, resid, self.x_design, self.xtx, self.sigma2,
            self.assignments, len(self.betas), self.m0, self.s0_inv)
        resid0 = self.z - self._fitted() - self._field()
        self.beta0 = draw_intercept(rng, resid0, self.sigma2,
                                    hyper.intercept_variance)

        if self.spatial:
            # (c) joint draw of the latent space-time field
            resid_w = self.z - self.beta0 - self._fitted()
            self.w = self.stp.sample(rng, self.xi, self.rho, self.tau2,
                                     self.sigma2, resid_w)

            # (d) persistence and spatial dependence
            lw = self.lap @ self.w
            qw = self.rho * lw + (1.0 - self.rho) * self.w
            quad_same = float((self.w[:, 1:] * qw[:, 1:]).sum())
            quad_cross = float((self.w[:, 1:] * qw[:, :-1]).sum())
            quad_prev = float((self.w[:, :-1] * qw[:, :-1]).sum())
            self.xi, accepted = mh_truncnorm_step(
                rng, self.xi, self.prop_sd["xi"], -1.0, 1.0,
                lambda v: xi_log_density(v, quad_same, quad_cross,
                                         quad_prev, self.tau2,
                                         self.n_locations, self.t_length))
            self._proposals["xi"] += 1
            self._accepts["xi"] += accepted

            delta = self.w[:, 1:] - self.xi * self.w[:, :-1]
            ldelta = lw[:, 1:] - self.xi * lw[:, :-1]
            scale = 1.0 - self.xi * self.xi
            g_lap = float((self.w[:, 0] * lw[:, 0]).sum()
                          + (delta * ldelta).sum() / scale)
            g_eye = float((self.w[:, 0] ** 2).sum()
                          + (delta ** 2).sum() / scale)
            if cfg.variant != "car_ar_rho_fixed":
                self.rho, accepted = mh_truncnorm_step(
                    rng, self.rho, self.prop_sd["rho"], 0.0, 1.0,
                    lambda v: rho_log_density(v, g_lap, g_eye, self.tau2,
                                              self.lap_eigvals,
                                              self.t_length))
                self._proposals["rho"] += 1
                self._accepts["rho"] += accepted
                g_quad = self.rho * g_lap + (1.0 - self.rho) * g_eye
            else:
                g_quad = self.rho * g_lap + (1.0 - self.rho) * g_eye

            # (e) variances
            self.tau2 = draw_variance_ig(
                rng, hyper.a_tau + 0.5 * self.w.size,
                hyper.b_tau + 0.5 * g_quad)

        resid_eps = self.z - self.beta0 - self._fitted() - self._field()
        self.sigma2 = draw_variance_ig(
            rng, hyper.a_sigma + 0.5 * resid_eps.size,
            hyper.b_sigma + 0.5 * float((resid_eps ** 2).sum()))

    def adapt(self):
        """Rescale proposal sds toward a 20-40% acceptance band."""
        for name in ("xi", "rho"):
            if self._proposals[name] == 0:
                continue
            rate = self._accepts[name] / self._proposals[name]
            if rate < 0.2:
                self.prop_sd[name] = max(self.prop_sd[name] * 0.7, 1e-4)
            elif rate > 0.4:
                self.prop_sd[name] = min(self.prop_sd[name] * 1.4, 2.0)
            self._accepts[name] = 0
            self._proposals[name] = 0

    def snapshot(self):
        return PosteriorDraw(
            beta0=self.beta0,
            betas=self.betas.copy(),
            assignments=self.assignments.copy(),
            w=self.w.copy() if self.spatial else None,
            xi=self.xi, rho=self.rho, tau2=self.tau2, sigma2=self.sigma2)


def gibbs_run(data, grid, config, rng=None):
    """Fit a model variant and return the thinned post-burn-in draws.

    ``data`` holds strictly positive values over the training window (the
    log transform is applied internally); draws are reproducible given
    ``config.mcmc.seed`` (or an explicit ``rng``).
    """
    if rng is None:
        rng = np.random.default_rng(config.mcmc.seed)
    sampler = GibbsSampler(data, grid, config, rng)
    mcmc = config.mcmc
    draws = []
    for it in range(1, mcmc.iters + 1):
        try:
            sampler.sweep()
        except NumericalError as exc:
            raise NumericalError(str(exc), draw_index=it) from exc
        if it <= mcmc.burnin and it % GibbsSampler.ADAPT_INTERVAL == 0:
            sampler.adapt()
        if it > mcmc.burnin and (it - mcmc.burnin) % mcmc.thin == 0:
            draws.append(sampler.snapshot())
    return draws
