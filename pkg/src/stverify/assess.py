"""Aggregation of ensemble verification results and model-comparison
measures.

The satisfaction accuracy follows the matched-positive-rate form used for
the crowdedness study (there is no true-negative term), and F1 handles
empty-positive draws by contributing zero.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["satisfaction_probability", "expected_robustness",
           "satisfaction_accuracy", "satisfaction_f1", "robustness_rmse",
           "binder_partition", "coclustering_matrix", "MeasureSummary",
           "summarize_measure", "PropertyAssessment", "assess_property"]


def _stack_boolean(fields):
    fields = list(fields)
    if not fields:
        raise ValueError("empty verification ensemble")
    for f in fields:
        if f.mode != "boolean":
            raise ValueError(f"expected boolean fields, got {f.mode!r}")
    return np.stack([f.values for f in fields], axis=0)


def _stack_robustness(fields):
    fields = list(fields)
    if not fields:
        raise ValueError("empty verification ensemble")
    for f in fields:
        if f.mode != "robustness":
            raise ValueError(f"expected robustness fields, got {f.mode!r}")
    return np.stack([f.values for f in fields], axis=0)


def satisfaction_probability(fields):
    """Per-location fraction of draws satisfying the property."""
    return _stack_boolean(fields).mean(axis=0)


def expected_robustness(fields):
    """Per-location mean robustness across draws."""
    return _stack_robustness(fields).mean(axis=0)


def _check_obs(pred, obs):
    if obs.shape != pred.shape[1:]:
        raise ValueError(f"observed field has shape {obs.shape}, "
                         f"expected {pred.shape[1:]}")


def satisfaction_accuracy(pred_fields, obs_field):
    """Matched-positive rate per draw: (1/I) sum_i 1{pred=1} 1{obs=1}.

    Returns (mean, sd) across draws. Deliberately has no true-negative
    term; an all-negative observed field scores zero for any prediction.
    """
    pred = _stack_boolean(pred_fields)
    obs = np.asarray(obs_field.values, dtype=bool)
    _check_obs(pred, obs)
    per_draw = (pred & obs).mean(axis=1)
    return float(per_draw.mean()), float(per_draw.std())


def _f1_per_draw(pred, obs):
    matched = (pred & obs).sum(axis=1).astype(np.float64)
    pred_pos = pred.sum(axis=1)
    obs_pos = obs.sum()
    out = np.zeros(len(pred))
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_pos > 0, matched / pred_pos, np.nan)
        recall = matched / obs_pos if obs_pos > 0 else \
            np.full(len(pred), np.nan)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    # undefined precision or recall contributes zero for that draw
    valid = ~np.isnan(precision) & ~np.isnan(recall)
    out[valid] = f1[valid]
    return out


def satisfaction_f1(pred_fields, obs_field):
    """Mean and sd across draws of the per-draw F1 score.

    Draws with no predicted positives (undefined precision) or an
    observed field with no positives (undefined recall) contribute zero.
    """
    pred = _stack_boolean(pred_fields)
    obs = np.asarray(obs_field.values, dtype=bool)
    _check_obs(pred, obs)
    per_draw = _f1_per_draw(pred, obs)
    return float(per_draw.mean()), float(per_draw.std())


def robustness_rmse(pred_fields, obs_field):
    """sqrt of the draw-averaged mean squared robustness deviation."""
    pred = _stack_robustness(pred_fields)
    obs = np.asarray(obs_field.values, dtype=np.float64)
    _check_obs(pred, obs)
    per_draw = ((pred - obs) ** 2).mean(axis=1)
    return float(np.sqrt(per_draw.mean()))


def _rmse_per_draw(pred_fields, obs_field):
    pred = _stack_robustness(pred_fields)
    obs = np.asarray(obs_field.values, dtype=np.float64)
    return np.sqrt(((pred - obs) ** 2).mean(axis=1))


def coclustering_matrix(assignment_draws):
    """Posterior pairwise co-assignment frequencies, shape (I, I)."""
    draws = np.asarray(list(assignment_draws))
    if draws.ndim != 2 or draws.shape[0] < 1:
        raise ValueError("need at least one assignment draw")
    same = draws[:, :, None] == draws[:, None, :]
    return same.mean(axis=0)


def binder_partition(assignment_draws):
    """Sampled partition minimising Binder's loss (equal costs).

    The loss of a candidate partition against the posterior co-clustering
    matrix is sum_{i<l} [1{c_i=c_l} (1 - 2 p_il) + p_il]; only sampled
    partitions are candidates and ties resolve to the earliest draw.
    """
    draws = np.asarray(list(assignment_draws))
    cocluster = coclustering_matrix(draws)
    n = cocluster.shape[0]
    upper = np.triu_indices(n, k=1)
    penalty = 1.0 - 2.0 * cocluster[upper]
    best_idx, best_loss = 0, np.inf
    for m, candidate in enumerate(draws):
        same = candidate[:, None] == candidate[None, :]
        loss = float((same[upper] * penalty).sum())
        if loss < best_loss - 1e-12:
            best_idx, best_loss = m, loss
    return draws[best_idx].copy()


@dataclass(frozen=True)
class MeasureSummary:
    """Posterior spread of a scalar measure across draws."""

    mean: float
    sd: float
    q10: float
    q90: float

    @classmethod
    def from_samples(cls, samples):
        samples = np.asarray(samples, dtype=np.float64)
        return cls(mean=float(samples.mean()), sd=float(samples.std()),
                   q10=float(np.quantile(samples, 0.10)),
                   q90=float(np.quantile(samples, 0.90)))


def summarize_measure(samples):
    return MeasureSummary.from_samples(samples)


@dataclass(frozen=True)
class PropertyAssessment:
    """All per-property outputs for one forecast window.

    Location fields carry their across-draw spread; scalar measures the
    paper-style point value plus the spread of their per-draw versions.
    """

    satisfaction_prob: np.ndarray
    expected_robustness: np.ndarray
    robustness_sd: np.ndarray
    robustness_q10: np.ndarray
    robustness_q90: np.ndarray
    accuracy: MeasureSummary
    f1: MeasureSummary
    rmse: float
    rmse_spread: MeasureSummary


def assess_property(bool_fields, rob_fields, obs_bool, obs_rob):
    """Aggregate one property's ensemble results against the observed
    outcome fields."""
    pred_bool = _stack_boolean(bool_fields)
    rob = _stack_robustness(rob_fields)
    obs_b = np.asarray(obs_bool.values, dtype=bool)
    acc = (pred_bool & obs_b).mean(axis=1)
    return PropertyAssessment(
        satisfaction_prob=pred_bool.mean(axis=0),
        expected_robustness=rob.mean(axis=0),
        robustness_sd=rob.std(axis=0),
        robustness_q10=np.quantile(rob, 0.10, axis=0),
        robustness_q90=np.quantile(rob, 0.90, axis=0),
        accuracy=MeasureSummary.from_samples(acc),
        f1=MeasureSummary.from_samples(_f1_per_draw(pred_bool, obs_b)),
        rmse=robustness_rmse(rob_fields, obs_rob),
        rmse_spread=MeasureSummary.from_samples(
            _rmse_per_draw(rob_fields, obs_rob)),
    )
