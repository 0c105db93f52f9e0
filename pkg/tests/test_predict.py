import numpy as np
import pytest
from scipy.stats import norm

from stverify.gibbs import PosteriorDraw
from stverify.harmonic import HarmonicDesign
from stverify.predict import (cumulative_log_bayes_factor, lpds,
                              predictive_draws)
from stverify.spatial import Trace, queen_adjacency

DESIGN = HarmonicDesign((1 / 12,))


def _history(n, t_length=24, t0=0):
    rng = np.random.default_rng(0)
    return Trace(rng.uniform(5.0, 10.0, size=(n, t_length)), t0=t0)


def _draw(beta0=1.0, beta=(0.5, -0.2), w_last=None, t_length=24, xi=0.5,
          rho=0.4, tau2=0.3, sigma2=0.1, n=4):
    if w_last is None:
        w = None
    else:
        w = np.zeros((n, t_length))
        w[:, -1] = w_last
    return PosteriorDraw(beta0, np.asarray(beta)[None, :],
                         np.zeros(n, dtype=int), w, xi, rho, tau2, sigma2)


def test_anchor_row_equals_last_observed():
    grid = queen_adjacency(2, 2)
    history = _history(4)
    draws = [_draw(w_last=np.zeros(4)) for _ in range(3)]
    trajs = predictive_draws(draws, 3, history, DESIGN, grid, seed=1)
    assert len(trajs) == 3
    for tr in trajs:
        assert tr.values.shape == (4, 4)
        np.testing.assert_array_equal(tr.values[:, 0],
                                      history.values[:, -1])
        assert tr.t0 == history.t0 + history.n_steps - 1


def test_degenerate_noise_recovers_harmonic_mean():
    grid = queen_adjacency(2, 2)
    history = _history(4)
    draw = _draw(w_last=np.zeros(4), xi=0.0, tau2=1e-12, sigma2=1e-12)
    (traj,) = predictive_draws([draw], 3, history, DESIGN, grid, seed=2)
    origin = history.t0 + history.n_steps - 1
    for s in range(1, 4):
        expected = np.exp(draw.beta0
                          + DESIGN.row(origin + s) @ draw.betas[0])
        np.testing.assert_allclose(traj.values[:, s], expected, rtol=1e-4)


def test_trajectories_differ_but_share_the_mean():
    grid = queen_adjacency(2, 2)
    history = _history(4)
    draws = [_draw(w_last=np.zeros(4), sigma2=0.05)] * 4000
    trajs = predictive_draws(draws, 1, history, DESIGN, grid, seed=3)
    values = np.stack([t.values[:, 1] for t in trajs])
    assert np.unique(values[:, 0]).size > 3900  # distinct trajectories
    origin = history.t0 + history.n_steps - 1
    draw = draws[0]
    # lognormal mean of the one-step conditional
    var = draw.sigma2 + draw.tau2 * (1 - draw.xi ** 2)
    mean_log = draw.beta0 + DESIGN.row(origin + 1) @ draw.betas[0]
    expected = np.exp(mean_log + 0.5 * var)
    np.testing.assert_allclose(values.mean(axis=0), expected, rtol=0.05)


def test_chained_simulation_matches_direct_distribution():
    grid = queen_adjacency(2, 2)
    history = _history(4)
    base = _draw(w_last=np.array([0.3, -0.2, 0.1, 0.0]), xi=0.7, tau2=0.2,
                 sigma2=0.05)
    m = 4000
    direct = predictive_draws([base] * m, 2, history, DESIGN, grid, seed=4)
    z_direct = np.log(np.stack([t.values[:, 2] for t in direct]))

    one, fields = predictive_draws([base] * m, 1, history, DESIGN, grid,
                                   seed=5, return_fields=True)
    chained = []
    for traj, w_path in zip(one, fields):
        extended_w = np.concatenate([base.w, w_path], axis=1)
        draw2 = PosteriorDraw(base.beta0, base.betas, base.assignments,
                              extended_w, base.xi, base.rho, base.tau2,
                              base.sigma2)
        hist2 = Trace(np.concatenate([history.values, traj.values[:, 1:2]],
                                     axis=1), t0=history.t0)
        chained.append(draw2)
    rng = np.random.default_rng(6)
    z_two = []
    for draw2, traj in zip(chained, one):
        hist2 = Trace(np.concatenate([history.values, traj.values[:, 1:2]],
                                     axis=1), t0=history.t0)
        (step,) = predictive_draws([draw2], 1, hist2, DESIGN, grid, rng=rng)
        z_two.append(np.log(step.values[:, 1]))
    z_two = np.stack(z_two)

    se = z_direct.std(axis=0) / np.sqrt(m)
    np.testing.assert_allclose(z_two.mean(axis=0), z_direct.mean(axis=0),
                               atol=6 * se.max())
    np.testing.assert_allclose(z_two.std(axis=0), z_direct.std(axis=0),
                               rtol=0.1)


def test_lpds_single_draw_univariate_closed_form():
    grid = queen_adjacency(1, 1)
    history = Trace(np.full((1, 10), 5.0), t0=3)
    w_last = 0.4
    draw = _draw(beta0=1.2, beta=(0.3, 0.1), w_last=np.array([w_last]),
                 t_length=10, xi=0.6, rho=0.0, tau2=0.5, sigma2=0.2, n=1)
    h = 2
    observed = np.array([4.0])
    got = lpds([draw], h, observed, history, DESIGN, grid)
    origin = history.t0 + history.n_steps - 1
    mean = (draw.beta0 + DESIGN.row(origin + h) @ draw.betas[0]
            + draw.xi ** h * w_last)
    var = draw.sigma2 + draw.tau2 * (1 - draw.xi ** (2 * h))  # Q = 1
    expected = norm.logpdf(np.log(observed[0]), mean, np.sqrt(var))
    assert got == pytest.approx(expected, abs=1e-10)


def test_lpds_baseline_draw_has_no_field_terms():
    grid = queen_adjacency(1, 1)
    history = Trace(np.full((1, 10), 5.0))
    draw = _draw(beta0=1.0, beta=(0.2, 0.0), w_last=None, sigma2=0.3, n=1)
    observed = np.array([3.0])
    got = lpds([draw], 1, observed, history, DESIGN, grid)
    mean = draw.beta0 + DESIGN.row(9 + 1) @ draw.betas[0]
    expected = norm.logpdf(np.log(3.0), mean, np.sqrt(0.3))
    assert got == pytest.approx(expected, abs=1e-10)


def test_lpds_invariant_to_duplication_and_order():
    grid = queen_adjacency(2, 2)
    history = _history(4)
    rng = np.random.default_rng(7)
    draws = [_draw(beta0=float(rng.normal()), w_last=rng.normal(size=4))
             for _ in range(5)]
    observed = np.abs(rng.normal(size=4)) + 3.0
    single = lpds(draws, 1, observed, history, DESIGN, grid)
    assert lpds(draws * 3, 1, observed, history, DESIGN,
                grid) == pytest.approx(single, abs=1e-12)
    assert lpds(draws[::-1], 1, observed, history, DESIGN,
                grid) == pytest.approx(single, abs=1e-12)


def test_lpds_conjugate_gaussian_toy():
    """Intercept-only conjugate model: the Monte Carlo LPDS must approach
    the closed-form predictive density."""
    rng = np.random.default_rng(8)
    design = HarmonicDesign(())
    grid = queen_adjacency(1, 1)
    sigma2, prior_var = 0.5, 2.0
    mu_true = 1.3
    t_length = 30
    z = mu_true + rng.normal(scale=np.sqrt(sigma2), size=t_length)
    history = Trace(np.exp(z)[None, :])
    # conjugate posterior of the intercept
    post_var = 1.0 / (1.0 / prior_var + t_length / sigma2)
    post_mean = post_var * z.sum() / sigma2
    z_future = mu_true + 0.2
    analytic = norm.logpdf(z_future, post_mean,
                           np.sqrt(post_var + sigma2))
    draws = [PosteriorDraw(float(rng.normal(post_mean,
                                            np.sqrt(post_var))),
                           np.zeros((1, 0)), np.zeros(1, dtype=int), None,
                           0.0, 0.0, 1.0, sigma2) for _ in range(1000)]
    got = lpds(draws, 1, np.array([np.exp(z_future)]), history, design,
               grid)
    assert got == pytest.approx(analytic, abs=0.05)


def test_lpds_input_validation():
    grid = queen_adjacency(1, 1)
    history = Trace(np.full((1, 10), 5.0))
    draw = _draw(w_last=None, n=1)
    with pytest.raises(ValueError):
        lpds([], 1, np.array([1.0]), history, DESIGN, grid)
    with pytest.raises(ValueError):
        lpds([draw], 1, np.array([-1.0]), history, DESIGN, grid)
    with pytest.raises(ValueError):
        lpds([draw], 0, np.array([1.0]), history, DESIGN, grid)


def test_cumulative_log_bayes_factor():
    np.testing.assert_allclose(
        cumulative_log_bayes_factor([1.0, 2.0], [1.0, 2.0]), [0.0, 0.0])
    series = cumulative_log_bayes_factor([0.1] * 10, [0.0] * 10)
    assert series[-1] == pytest.approx(1.0)
    rng = np.random.default_rng(9)
    a, b = rng.normal(size=20), rng.normal(size=20)
    got = cumulative_log_bayes_factor(a, b)
    expected = [np.sum(a[:k + 1] - b[:k + 1]) for k in range(20)]
    np.testing.assert_allclose(got, expected)
    with pytest.raises(ValueError):
        cumulative_log_bayes_factor([1.0], [1.0, 2.0])
