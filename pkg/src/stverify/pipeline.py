"""Rolling-window model comparison: fit, predict, score, monitor, assess.

Each window trains every model variant on a shifted copy of the training
span, draws posterior predictive trajectories from the forecast origin,
scores the h-step LPDS on the realised values, monitors the property set
on the trajectory ensemble and on the realised future, and aggregates the
per-property measures. Cumulative log Bayes factors compare each variant
against a designated baseline.

Randomness derives from a single master seed split per (window, variant),
so results do not depend on scheduling and identical seeds reproduce all
outputs byte for byte.
"""

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .assess import assess_property
from .errors import DataError
from .formula import temporal_depth
from .gibbs import gibbs_run
from .io import model_config_from_dict, model_config_to_dict, \
    save_draw_archive
from .monitor import monitor_ensemble
from .parser import parse
from .predict import cumulative_log_bayes_factor, lpds, predictive_draws
from .properties import (PropertyParams, build_p1, build_p2, build_p3,
                         build_p4, minutes_to_steps)

__all__ = ["PipelineConfig", "PipelineResult", "run_pipeline",
           "property_from_spec"]

logger = logging.getLogger(__name__)


def _fmt(x):
    return repr(float(x))


def property_from_spec(spec, step_minutes=10):
    """Build one property from its JSON description.

    Either ``{"formula": "<text>"}`` or a template reference such as
    ``{"template": "p1", "c": 500, "h_minutes": 30}`` (``h_steps`` and
    ``d_cells`` are accepted directly as well).
    """
    if "formula" in spec:
        return parse(spec["formula"])
    template = spec.get("template", "").lower()
    c = float(spec.get("c", PropertyParams().c))

    def steps(key_steps, key_minutes, default):
        if key_steps in spec:
            return int(spec[key_steps])
        if key_minutes in spec:
            return minutes_to_steps(spec[key_minutes], step_minutes)
        return default

    if template == "p1":
        return build_p1(c, steps("h_steps", "h_minutes", 3))
    if template == "p2":
        return build_p2(c, steps("h_steps", "h_minutes", 1),
                        int(spec.get("d_cells", 1)))
    if template == "p3":
        return build_p3(c, steps("h_steps", "h_minutes", 3),
                        int(spec.get("d_cells", 1)))
    if template == "p4":
        return build_p4(c, int(spec.get("d_cells", 4)))
    raise DataError(f"property spec needs a 'formula' or a template in "
                    f"p1..p4, got {spec!r}")


@dataclass(frozen=True)
class PipelineConfig:
    """Rolling-window comparison settings.

    ``variants`` maps a display name to a ModelConfig; ``properties``
    maps a name to a Formula. ``baseline_variant`` selects the reference
    for Bayes factors (None disables them, e.g. single-variant runs).
    """

    train_length: int
    n_windows: int
    variants: dict
    properties: dict
    horizons: tuple = (1, 2, 3)
    shift: int = 1
    baseline_variant: str = None
    seed: int = 0
    workers: int = 1
    step_minutes: int = 10
    save_draws: bool = False

    def __post_init__(self):
        if self.train_length < 3:
            raise ValueError("train_length must be >= 3")
        if self.n_windows < 1 or self.shift < 1:
            raise ValueError("n_windows and shift must be >= 1")
        if not self.variants:
            raise ValueError("at least one model variant is required")
        horizons = tuple(int(h) for h in self.horizons)
        if any(h < 1 for h in horizons):
            raise ValueError("horizons must be >= 1")
        object.__setattr__(self, "horizons", horizons)
        if self.baseline_variant is not None \
                and self.baseline_variant not in self.variants:
            raise ValueError(f"baseline variant "
                             f"{self.baseline_variant!r} is not among "
                             f"{sorted(self.variants)}")

    @property
    def max_steps_ahead(self):
        depth = max((temporal_depth(phi)
                     for phi in self.properties.values()), default=0)
        return max(max(self.horizons), depth)

    @classmethod
    def from_dict(cls, doc):
        try:
            variants = {name: model_config_from_dict(spec)
                        for name, spec in doc["variants"].items()}
            step_minutes = int(doc.get("step_minutes", 10))
            properties = {spec["name"]: property_from_spec(spec,
                                                           step_minutes)
                          for spec in doc.get("properties", [])}
            return cls(
                train_length=int(doc["train_length"]),
                n_windows=int(doc["n_windows"]),
                variants=variants,
                properties=properties,
                horizons=tuple(doc.get("horizons", (1, 2, 3))),
                shift=int(doc.get("shift", 1)),
                baseline_variant=doc.get("baseline_variant"),
                seed=int(doc.get("seed", 0)),
                workers=int(doc.get("workers", 1)),
                step_minutes=step_minutes,
                save_draws=bool(doc.get("save_draws", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid pipeline config: {exc}") from exc


@dataclass
class WindowResult:
    window: int
    variant: str
    lpds: dict            # horizon -> float
    assessments: dict     # property name -> PropertyAssessment
    error: str = None


@dataclass
class PipelineResult:
    config: PipelineConfig
    windows: list = field(default_factory=list)

    def lpds_series(self, variant, horizon):
        out = []
        for w in sorted({r.window for r in self.windows}):
            rows = [r for r in self.windows
                    if r.window == w and r.variant == variant
                    and r.error is None]
            out.append(rows[0].lpds[horizon] if rows else np.nan)
        return np.asarray(out)

    def bayes_factors(self, variant, horizon):
        base = self.config.baseline_variant
        if base is None:
            raise ValueError("no baseline variant configured")
        return cumulative_log_bayes_factor(
            self.lpds_series(variant, horizon),
            self.lpds_series(base, horizon))


def _window_seed(master, window, variant_index):
    return np.random.SeedSequence((master, window, variant_index))


def _run_window_variant(task):
    """Fit one (window, variant) pair; returns a WindowResult.

    Module-level so it can cross a process boundary.
    """
    (window, variant_name, variant_index, model_config, data, grid,
     labels, pl_config, out_dir) = task
    start = window * pl_config.shift
    train = data.window(start, pl_config.train_length)
    origin = start + pl_config.train_length - 1
    steps_ahead = pl_config.max_steps_ahead
    rng = np.random.default_rng(
        _window_seed(pl_config.seed, window, variant_index))

    draws = gibbs_run(train, grid, model_config, rng=rng)
    design = model_config.design
    trajectories = predictive_draws(draws, steps_ahead, train, design,
                                    grid, rng=rng)

    lpds_by_h = {}
    for h in pl_config.horizons:
        observed = data.values[:, origin + h]
        lpds_by_h[h] = lpds(draws, h, observed, train, design, grid)

    observed_future = data.window(origin, steps_ahead + 1)
    assessments = {}
    for name, phi in pl_config.properties.items():
        bool_fields = monitor_ensemble(phi, trajectories, grid, labels,
                                       mode="boolean")
        rob_fields = monitor_ensemble(phi, trajectories, grid, labels,
                                      mode="robustness")
        obs_bool = monitor_ensemble(phi, [observed_future], grid, labels,
                                    mode="boolean")[0]
        obs_rob = monitor_ensemble(phi, [observed_future], grid, labels,
                                   mode="robustness")[0]
        assessments[name] = assess_property(bool_fields, rob_fields,
                                            obs_bool, obs_rob)

    if out_dir is not None:
        wdir = os.path.join(out_dir, "windows", f"w{window:03d}",
                            variant_name)
        os.makedirs(wdir, exist_ok=True)
        _write_window_files(wdir, lpds_by_h, assessments)
        if pl_config.save_draws:
            save_draw_archive(os.path.join(wdir, "draws"), draws,
                              model_config, train, save_w=True)

    return WindowResult(window=window, variant=variant_name,
                        lpds=lpds_by_h, assessments=assessments)


def _write_window_files(wdir, lpds_by_h, assessments):
    with open(os.path.join(wdir, "lpds.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "lpds"])
        for h in sorted(lpds_by_h):
            writer.writerow([h, _fmt(lpds_by_h[h])])
    with open(os.path.join(wdir, "fields.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["property", "location_id", "satisfaction_prob",
                         "expected_robustness"])
        for name in sorted(assessments):
            a = assessments[name]
            for loc in range(len(a.satisfaction_prob)):
                writer.writerow([name, loc,
                                 _fmt(a.satisfaction_prob[loc]),
                                 _fmt(a.expected_robustness[loc])])


def run_pipeline(config, data, grid, labels=None, out_dir=None):
    """Run the rolling-window comparison; returns a PipelineResult.

    ``data`` must cover train_length + (n_windows - 1) * shift +
    max(horizon, property depth) steps. A failing (window, variant) task
    is logged and skipped; the remaining tasks still run. With
    ``out_dir`` set, per-window files plus aggregated report/LPDS/Bayes
    factor CSVs are written.
    """
    needed = (config.train_length
              + (config.n_windows - 1) * config.shift
              + config.max_steps_ahead)
    if data.n_steps < needed:
        raise DataError(f"data has {data.n_steps} steps but the "
                        f"configuration needs {needed}")

    variant_names = sorted(config.variants)
    tasks = []
    for window in range(config.n_windows):
        for vi, name in enumerate(variant_names):
            tasks.append((window, name, vi, config.variants[name], data,
                          grid, labels, config, out_dir))

    results = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(_run_window_variant, t): t
                       for t in tasks}
            for future, task in futures.items():
                try:
                    results.append(future.result())
                except Exception as exc:  # noqa: BLE001
                    logger.error("window %d variant %s failed: %s",
                                 task[0], task[1], exc)
                    results.append(WindowResult(task[0], task[1], {}, {},
                                                error=str(exc)))
    else:
        for task in tasks:
            try:
                results.append(_run_window_variant(task))
            except Exception as exc:  # noqa: BLE001
                logger.error("window %d variant %s failed: %s",
                             task[0], task[1], exc)
                results.append(WindowResult(task[0], task[1], {}, {},
                                            error=str(exc)))

    results.sort(key=lambda r: (r.window, r.variant))
    outcome = PipelineResult(config=config, windows=results)
    if out_dir is not None:
        _write_aggregates(out_dir, outcome)
    return outcome


def _write_aggregates(out_dir, outcome):
    os.makedirs(out_dir, exist_ok=True)
    config = outcome.config
    variant_names = sorted(config.variants)

    with open(os.path.join(out_dir, "lpds.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "horizon", "variant", "lpds"])
        for r in outcome.windows:
            if r.error is not None:
                continue
            for h in sorted(r.lpds):
                writer.writerow([r.window, h, r.variant, _fmt(r.lpds[h])])

    if config.baseline_variant is not None and len(variant_names) > 1:
        with open(os.path.join(out_dir, "bayes_factors.csv"), "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window_id", "horizon", "variant",
                             "cumulative_log_bf"])
            for name in variant_names:
                if name == config.baseline_variant:
                    continue
                for h in config.horizons:
                    series = outcome.bayes_factors(name, h)
                    for w, value in enumerate(series):
                        writer.writerow([w, h, name, _fmt(value)])

    with open(os.path.join(out_dir, "report.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "property", "variant", "measure",
                         "statistic", "value"])
        for r in outcome.windows:
            if r.error is not None:
                continue
            for prop in sorted(r.assessments):
                a = r.assessments[prop]
                rows = [("accuracy", a.accuracy), ("f1", a.f1)]
                for measure, summary in rows:
                    for stat in ("mean", "sd", "q10", "q90"):
                        writer.writerow([r.window, prop, r.variant,
                                         measure, stat,
                                         _fmt(getattr(summary, stat))])
                writer.writerow([r.window, prop, r.variant, "rmse",
                                 "value", _fmt(a.rmse)])
                for stat in ("sd", "q10", "q90"):
                    writer.writerow([r.window, prop, r.variant, "rmse",
                                     stat,
                                     _fmt(getattr(a.rmse_spread, stat))])

    with open(os.path.join(out_dir, "fields.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "property", "variant",
                         "location_id", "satisfaction_prob",
                         "expected_robustness"])
        for r in outcome.windows:
            if r.error is not None:
                continue
            for prop in sorted(r.assessments):
                a = r.assessments[prop]
                for loc in range(len(a.satisfaction_prob)):
                    writer.writerow([
                        r.window, prop, r.variant, loc,
                        _fmt(a.satisfaction_prob[loc]),
                        _fmt(a.expected_robustness[loc])])

    summary = {"config": {
        "train_length": config.train_length,
        "n_windows": config.n_windows,
        "shift": config.shift,
        "horizons": list(config.horizons),
        "seed": config.seed,
        "variants": {n: model_config_to_dict(c)
                     for n, c in sorted(config.variants.items())},
        "baseline_variant": config.baseline_variant,
    }, "failures": [
        {"window": r.window, "variant": r.variant, "error": r.error}
        for r in outcome.windows if r.error is not None]}
    with open(os.path.join(out_dir, "run.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
