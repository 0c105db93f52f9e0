"""Command-line interface.

Subcommands mirror the analysis stages: ingest raw activity data, inspect
spectra, fit a model, draw predictive trajectories, monitor properties,
assess ensembles against observed data, compare LPDS series, and run the
full rolling-window pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .assess import assess_property
from .errors import DataError, NumericalError, ParseError
from .formula import temporal_depth
from .gibbs import gibbs_run
from .harmonic import periodogram, select_top_frequencies
from .io import (history_stub_from_meta, ingest, load_draw_archive,
                 load_grid, load_predictions, load_trace,
                 model_config_from_dict, save_draw_archive, save_grid,
                 save_predictions, save_trace, save_verification)
from .monitor import monitor_ensemble
from .parser import parse, parse_script
from .pipeline import PipelineConfig, property_from_spec, run_pipeline
from .predict import cumulative_log_bayes_factor, predictive_draws

USAGE_EXIT, DATA_EXIT, NUMERICAL_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_EXIT)


def _selection(text):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "selection must be row_lo,row_hi,col_lo,col_hi")
    return tuple(parts)


def build_parser():
    shared = _Parser(add_help=False)
    shared.add_argument("--seed", type=int, default=None,
                        help="override the seed of the invoked stage")
    shared.add_argument("--step-minutes", type=int, default=10,
                        help="wall-clock length of one time step")
    shared.add_argument("--workers", type=int, default=1,
                        help="parallel (window, variant) tasks in "
                             "'pipeline'")

    parser = _Parser(prog="stverify",
                     description="Bayesian spatio-temporal forecasting "
                                 "with logic-based verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[shared],
                       help="aggregate raw activity records into a trace "
                       "over a (sub)grid")
    p.add_argument("--raw", required=True)
    p.add_argument("--grid-spec", required=True)
    p.add_argument("--select", type=_selection, default=None,
                   help="row_lo,row_hi,col_lo,col_hi inclusive bounds")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("spectrum", parents=[shared], help="periodogram CSV for frequency "
                       "selection")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top", type=int, default=None,
                   help="also print the strongest n frequencies")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", parents=[shared], help="run the Gibbs sampler, write a draw "
                       "archive")
    p.add_argument("--trace", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--config", required=True, help="model config JSON")
    p.add_argument("--out", required=True, help="archive directory")
    p.add_argument("--save-w", action="store_true",
                   help="store latent fields (needed for prediction)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[shared], help="draw posterior predictive "
                       "trajectories from an archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--out", required=True, help="predictions CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("monitor", parents=[shared], help="verify a property on a trace or "
                       "a prediction ensemble")
    p.add_argument("--formula", help="property text")
    p.add_argument("--script", help="property script file (uses the "
                   "first property unless --name is given)")
    p.add_argument("--name", help="property name inside the script")
    p.add_argument("--template", choices=["p1", "p2", "p3", "p4"],
                   help="built-in crowdedness requirement")
    p.add_argument("--c", type=float, default=500.0,
                   help="crowdedness threshold for --template")
    p.add_argument("--h-minutes", type=int, default=None,
                   help="template time window in minutes")
    p.add_argument("--h-steps", type=int, default=None,
                   help="template time window in steps")
    p.add_argument("--d-cells", type=int, default=None,
                   help="template distance in cells")
    p.add_argument("--trace", help="single trace CSV")
    p.add_argument("--predictions", help="ensemble CSV")
    p.add_argument("--grid", required=True)
    p.add_argument("--mode", choices=["boolean", "robustness"],
                   default="boolean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("assess", parents=[shared], help="aggregate an ensemble against the "
                       "observed outcome")
    p.add_argument("--predictions", required=True)
    p.add_argument("--observed", required=True,
                   help="observed trace CSV (anchor plus future steps)")
    p.add_argument("--grid", required=True)
    p.add_argument("--script", required=True, help="property script file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("compare", parents=[shared], help="cumulative log Bayes factors "
                       "from an LPDS table")
    p.add_argument("--lpds", required=True,
                   help="CSV with window_id,horizon,variant,lpds")
    p.add_argument("--baseline", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", parents=[shared], help="rolling-window comparison")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--data", required=True, help="full trace CSV")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline)

    return parser


def cmd_ingest(args):
    trace, grid, labels = ingest(args.raw, args.grid_spec, args.select)
    os.makedirs(args.out, exist_ok=True)
    save_trace(os.path.join(args.out, "trace.csv"), trace)
    save_grid(os.path.join(args.out, "grid.json"), grid, labels)
    print(f"ingested {trace.n_locations} locations x {trace.n_steps} "
          f"steps into {args.out}")


def cmd_spectrum(args):
    trace = load_trace(args.trace)
    freqs, total = periodogram(trace.values[0])
    for row in trace.values[1:]:
        total = total + periodogram(row)[1]
    total = total / trace.n_locations
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "power"])
        for f, p in zip(freqs, total):
            writer.writerow([repr(float(f)), repr(float(p))])
    if args.top:
        chosen = select_top_frequencies(trace.values, args.top)
        print(",".join(repr(f) for f in chosen))


def cmd_fit(args):
    trace = load_trace(args.trace)
    grid, _ = load_grid(args.grid)
    with open(args.config) as fh:
        config = model_config_from_dict(json.load(fh))
    rng = None
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
    draws = gibbs_run(trace, grid, config, rng=rng)
    save_draw_archive(args.out, draws, config, trace,
                      save_w=args.save_w or config.has_spatial_field)
    print(f"wrote {len(draws)} draws to {args.out}")


def cmd_predict(args):
    draws, config, meta = load_draw_archive(args.archive)
    grid, _ = load_grid(args.grid)
    history = history_stub_from_meta(meta)
    seed = args.seed if args.seed is not None else config.mcmc.seed + 1
    trajectories = predictive_draws(draws, args.horizon, history,
                                    config.design, grid, seed=seed)
    save_predictions(args.out, trajectories)
    print(f"wrote {len(trajectories)} trajectories to {args.out}")


def _load_property(args):
    chosen = [bool(args.formula), bool(args.script),
              bool(getattr(args, "template", None))]
    if sum(chosen) != 1:
        raise DataError("monitor needs exactly one of --formula, "
                        "--script or --template")
    if args.formula:
        return parse(args.formula)
    if getattr(args, "template", None):
        spec = {"template": args.template, "c": args.c}
        if args.h_steps is not None:
            spec["h_steps"] = args.h_steps
        if args.h_minutes is not None:
            spec["h_minutes"] = args.h_minutes
        if args.d_cells is not None:
            spec["d_cells"] = args.d_cells
        return property_from_spec(spec, step_minutes=args.step_minutes)
    with open(args.script) as fh:
        props = parse_script(fh.read())
    if not props:
        raise DataError(f"{args.script}: no properties defined")
    if args.name is not None:
        if args.name not in props:
            raise DataError(f"{args.script}: no property named "
                            f"{args.name!r}")
        return props[args.name]
    return next(iter(props.values()))


def cmd_monitor(args):
    phi = _load_property(args)
    grid, labels = load_grid(args.grid)
    if bool(args.trace) == bool(args.predictions):
        raise DataError("monitor needs exactly one of --trace or "
                        "--predictions")
    if args.trace:
        traces = [load_trace(args.trace)]
    else:
        traces = load_predictions(args.predictions)
    fields = monitor_ensemble(phi, traces, grid, labels, mode=args.mode)
    save_verification(args.out, fields)
    print(f"monitored {len(fields)} trace(s) -> {args.out}")


def cmd_assess(args):
    grid, labels = load_grid(args.grid)
    predictions = load_predictions(args.predictions)
    observed = load_trace(args.observed)
    with open(args.script) as fh:
        props = parse_script(fh.read())
    if not props:
        raise DataError(f"{args.script}: no properties defined")
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "report.csv")
    fields_path = os.path.join(args.out, "fields.csv")
    with open(report_path, "w", newline="") as rep, \
            open(fields_path, "w", newline="") as flds:
        report = csv.writer(rep)
        report.writerow(["window_id", "property", "measure", "statistic",
                         "value"])
        fields = csv.writer(flds)
        fields.writerow(["window_id", "property", "location_id",
                         "satisfaction_prob", "expected_robustness"])
        for name, phi in props.items():
            needed = temporal_depth(phi)
            if needed > observed.horizon:
                raise DataError(
                    f"property {name} needs {needed} future steps but "
                    f"the observed trace provides {observed.horizon}")
            bools = monitor_ensemble(phi, predictions, grid, labels,
                                     mode="boolean")
            robs = monitor_ensemble(phi, predictions, grid, labels,
                                    mode="robustness")
            obs_b = monitor_ensemble(phi, [observed], grid, labels,
                                     mode="boolean")[0]
            obs_r = monitor_ensemble(phi, [observed], grid, labels,
                                     mode="robustness")[0]
            a = assess_property(bools, robs, obs_b, obs_r)
            for measure, summary in (("accuracy", a.accuracy),
                                     ("f1", a.f1)):
                for stat in ("mean", "sd", "q10", "q90"):
                    report.writerow([0, name, measure, stat,
                                     repr(float(getattr(summary, stat)))])
            report.writerow([0, name, "rmse", "value",
                             repr(float(a.rmse))])
            for loc in range(len(a.satisfaction_prob)):
                fields.writerow([0, name, loc,
                                 repr(float(a.satisfaction_prob[loc])),
                                 repr(float(a.expected_robustness[loc]))])
    print(f"wrote {report_path} and {fields_path}")


def cmd_compare(args):
    table = {}
    with open(args.lpds, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"window_id", "horizon", "variant", "lpds"}
        if reader.fieldnames is None or not required.issubset(
                reader.fieldnames):
            raise DataError(f"{args.lpds}: expected columns "
                            f"{sorted(required)}")
        for row in reader:
            key = (row["variant"], int(row["horizon"]))
            table.setdefault(key, {})[int(row["window_id"])] = \
                float(row["lpds"])
    variants = sorted({v for v, _ in table})
    horizons = sorted({h for _, h in table})
    if args.baseline not in variants:
        raise DataError(f"baseline {args.baseline!r} not in {variants}")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "horizon", "variant",
                         "cumulative_log_bf"])
        for variant in variants:
            if variant == args.baseline:
                continue
            for h in horizons:
                if (variant, h) not in table:
                    continue
                ours = table[(variant, h)]
                base = table[(args.baseline, h)]
                windows = sorted(set(ours) & set(base))
                series = cumulative_log_bayes_factor(
                    [ours[w] for w in windows],
                    [base[w] for w in windows])
                for w, value in zip(windows, series):
                    writer.writerow([w, h, variant, repr(float(value))])
    print(f"wrote {args.out}")


def cmd_pipeline(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.workers != 1:
        doc["workers"] = args.workers
    if args.step_minutes != 10:
        doc["step_minutes"] = args.step_minutes
    config = PipelineConfig.from_dict(doc)
    data = load_trace(args.data)
    grid, labels = load_grid(args.grid)
    outcome = run_pipeline(config, data, grid, labels, out_dir=args.out)
    failures = [r for r in outcome.windows if r.error is not None]
    print(f"completed {len(outcome.windows) - len(failures)} of "
          f"{len(outcome.windows)} window tasks -> {args.out}")
    if failures:
        for r in failures:
            print(f"  failed: window {r.window} variant {r.variant}: "
                  f"{r.error}", file=sys.stderr)


def main(argv=None):
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except (DataError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
