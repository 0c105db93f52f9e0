import numpy as np
import pytest

from stverify.assess import (PropertyAssessment, assess_property,
                             binder_partition, coclustering_matrix,
                             expected_robustness, robustness_rmse,
                             satisfaction_accuracy, satisfaction_f1,
                             satisfaction_probability, summarize_measure)
from stverify.monitor import VerificationField


def _bool(*rows):
    return [VerificationField("boolean", np.asarray(r, dtype=bool))
            for r in rows]


def _rob(*rows):
    return [VerificationField("robustness", np.asarray(r, dtype=float))
            for r in rows]


def test_satisfaction_probability_basics():
    np.testing.assert_allclose(
        satisfaction_probability(_bool([1, 1], [1, 1], [1, 1])), [1.0, 1.0])
    np.testing.assert_allclose(
        satisfaction_probability(_bool([1, 0], [1, 0], [1, 1], [0, 1])),
        [0.75, 0.5])


def test_satisfaction_probability_recount_oracle():
    rng = np.random.default_rng(0)
    fields = _bool(*(rng.integers(0, 2, size=6) for _ in range(9)))
    got = satisfaction_probability(fields)
    for i in range(6):
        expected = np.mean([f.values[i] for f in fields])
        assert got[i] == pytest.approx(expected)


def test_expected_robustness():
    field = [0.5, -1.0, 2.0]
    np.testing.assert_allclose(expected_robustness(_rob(field, field)),
                               field)
    np.testing.assert_allclose(
        expected_robustness(_rob([1.0, -2.0], [-1.0, 2.0])), [0.0, 0.0])
    rng = np.random.default_rng(1)
    fields = _rob(*(rng.normal(size=4) for _ in range(7)))
    got = expected_robustness(fields)
    expected = np.stack([f.values for f in fields]).mean(axis=0)
    np.testing.assert_allclose(got, expected)


def test_empty_ensembles_rejected():
    with pytest.raises(ValueError):
        satisfaction_probability([])
    with pytest.raises(ValueError):
        expected_robustness([])


def test_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        satisfaction_probability(_rob([1.0]))
    with pytest.raises(ValueError):
        expected_robustness(_bool([1]))


def test_accuracy_fixture():
    obs = _bool([1, 1, 0, 0])[0]
    pred = _bool([1, 0, 0, 0])
    mean, sd = satisfaction_accuracy(pred, obs)
    assert mean == pytest.approx(0.25)
    assert sd == 0.0


def test_accuracy_has_no_true_negative_term():
    obs = _bool([0, 0, 0])[0]
    for pred in ([0, 0, 0], [1, 1, 1], [1, 0, 1]):
        mean, _ = satisfaction_accuracy(_bool(pred), obs)
        assert mean == 0.0


def test_accuracy_perfect_match():
    obs = _bool([1, 1, 1, 1])[0]
    mean, sd = satisfaction_accuracy(_bool([1, 1, 1, 1], [1, 1, 1, 1]), obs)
    assert mean == 1.0 and sd == 0.0
    # mean accuracy is 1 only when obs is all-positive and covered
    partial_obs = _bool([1, 1, 0, 0])[0]
    mean, _ = satisfaction_accuracy(_bool([1, 1, 1, 1]), partial_obs)
    assert mean == pytest.approx(0.5)
    assert mean < 1.0


def test_f1_fixture():
    obs = _bool([1, 1, 0, 0])[0]
    mean, sd = satisfaction_f1(_bool([1, 0, 0, 0]), obs)
    assert mean == pytest.approx(2.0 / 3.0)
    assert sd == 0.0


def test_f1_perfect_and_degenerate():
    obs = _bool([1, 0, 1])[0]
    mean, _ = satisfaction_f1(_bool([1, 0, 1]), obs)
    assert mean == pytest.approx(1.0)
    # no predicted positives: precision undefined -> zero contribution
    mean, _ = satisfaction_f1(_bool([0, 0, 0]), obs)
    assert mean == 0.0
    # no observed positives: recall undefined -> zero
    empty_obs = _bool([0, 0, 0])[0]
    mean, _ = satisfaction_f1(_bool([1, 0, 0]), empty_obs)
    assert mean == 0.0


def test_f1_location_permutation_invariance():
    rng = np.random.default_rng(2)
    obs_vec = rng.integers(0, 2, size=8).astype(bool)
    preds = [rng.integers(0, 2, size=8).astype(bool) for _ in range(5)]
    base = satisfaction_f1(_bool(*preds), _bool(obs_vec)[0])
    perm = rng.permutation(8)
    shuffled = satisfaction_f1(_bool(*(p[perm] for p in preds)),
                               _bool(obs_vec[perm])[0])
    assert base == pytest.approx(shuffled)


def test_rmse_fixtures():
    obs = _rob([1.0])[0]
    assert robustness_rmse(_rob([3.0]), obs) == pytest.approx(2.0)
    obs4 = _rob([0.5, -1.0, 2.0, 0.0])[0]
    assert robustness_rmse(_rob([0.5, -1.0, 2.0, 0.0]), obs4) == 0.0


def test_rmse_matches_double_loop():
    rng = np.random.default_rng(3)
    preds = [rng.normal(size=5) for _ in range(6)]
    obs = rng.normal(size=5)
    got = robustness_rmse(_rob(*preds), _rob(obs)[0])
    total = 0.0
    for p in preds:
        total += np.mean([(p[i] - obs[i]) ** 2 for i in range(5)])
    assert got == pytest.approx(np.sqrt(total / 6))


def test_dimension_mismatch():
    obs = _rob([1.0, 2.0])[0]
    with pytest.raises(ValueError):
        robustness_rmse(_rob([1.0]), obs)
    with pytest.raises(ValueError):
        satisfaction_accuracy(_bool([1, 0]), _bool([1, 0, 1])[0])


def test_coclustering_matrix():
    draws = [np.array([0, 0, 1]), np.array([1, 1, 1])]
    got = coclustering_matrix(draws)
    np.testing.assert_allclose(got, [[1.0, 1.0, 0.5],
                                     [1.0, 1.0, 0.5],
                                     [0.5, 0.5, 1.0]])


def test_binder_identical_draws():
    part = np.array([0, 1, 1, 0])
    out = binder_partition([part, part, part])
    np.testing.assert_array_equal(out, part)


def test_binder_tie_breaks_to_earliest():
    # two locations, co-clustering probability 0.5: both candidates share
    # the same loss, so the first draw wins
    out = binder_partition([np.array([0, 1]), np.array([0, 0])])
    np.testing.assert_array_equal(out, [0, 1])
    out = binder_partition([np.array([0, 0]), np.array([0, 1])])
    np.testing.assert_array_equal(out, [0, 0])


def test_binder_label_permutation_invariance():
    rng = np.random.default_rng(4)
    draws = [rng.integers(0, 3, size=10) for _ in range(20)]
    base = binder_partition(draws)
    permuted = []
    for d in draws:
        mapping = rng.permutation(3)
        permuted.append(mapping[d])
    out = binder_partition(permuted)
    # same partition structure regardless of labels
    same_base = base[:, None] == base[None, :]
    same_out = out[:, None] == out[None, :]
    np.testing.assert_array_equal(same_base, same_out)


def test_binder_exhaustive_loss_check():
    rng = np.random.default_rng(5)
    draws = [rng.integers(0, 2, size=5) for _ in range(8)]
    cocluster = coclustering_matrix(draws)

    def binder_loss(candidate):
        loss = 0.0
        for i in range(5):
            for l in range(i + 1, 5):
                same = candidate[i] == candidate[l]
                loss += (1 - cocluster[i, l]) if same else cocluster[i, l]
        return loss

    losses = [binder_loss(d) for d in draws]
    got = binder_partition(draws)
    assert binder_loss(got) == pytest.approx(min(losses))


def test_summarize_measure_and_assess_property():
    rng = np.random.default_rng(6)
    summary = summarize_measure([1.0, 2.0, 3.0, 4.0])
    assert summary.mean == pytest.approx(2.5)
    assert summary.q10 <= summary.mean <= summary.q90

    bools = _bool(*(rng.integers(0, 2, size=4) for _ in range(10)))
    robs = _rob(*(rng.normal(size=4) for _ in range(10)))
    obs_b = _bool(rng.integers(0, 2, size=4))[0]
    obs_r = _rob(rng.normal(size=4))[0]
    report = assess_property(bools, robs, obs_b, obs_r)
    assert isinstance(report, PropertyAssessment)
    assert report.satisfaction_prob.shape == (4,)
    assert (report.satisfaction_prob >= 0).all()
    assert (report.satisfaction_prob <= 1).all()
    assert report.rmse >= 0
    np.testing.assert_allclose(report.satisfaction_prob,
                               satisfaction_probability(bools))
    np.testing.assert_allclose(report.expected_robustness,
                               expected_robustness(robs))
    acc_mean, acc_sd = satisfaction_accuracy(bools, obs_b)
    assert report.accuracy.mean == pytest.approx(acc_mean)
    assert report.accuracy.sd == pytest.approx(acc_sd)
    assert report.rmse == pytest.approx(robustness_rmse(robs, obs_r))
    assert (report.robustness_q10 <= report.robustness_q90).all()


def test_satisfaction_probability_composes_with_monitor_ensemble():
    # Monte Carlo satisfaction estimate == independent recount over draws
    from stverify.monitor import boolean_monitor, monitor_ensemble
    from stverify.properties import build_p1
    from stverify.spatial import Trace, queen_adjacency

    rng = np.random.default_rng(7)
    grid = queen_adjacency(2, 2)
    phi = build_p1(500.0, 2)
    traces = [Trace(rng.uniform(100, 900, size=(4, 3)))
              for _ in range(12)]
    prob = satisfaction_probability(
        monitor_ensemble(phi, traces, grid, mode="boolean"))
    recount = np.zeros(4)
    for trace in traces:
        recount += boolean_monitor(phi, trace, grid).values
    np.testing.assert_array_equal(prob, recount / len(traces))
