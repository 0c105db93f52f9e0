"""File formats: grid JSON, trace CSV, raw-activity ingestion, draw
archives and the report/field CSV outputs.

Floats are written with ``repr`` so identical runs produce byte-identical
files and values round-trip exactly.
"""

import csv
import json
import os

import numpy as np

from .errors import DataError
from .gibbs import (BNPConfig, Hyperparams, McmcConfig, ModelConfig,
                    PosteriorDraw)
from .spatial import SpatialGrid, StaticLabels, Trace

__all__ = [
    "save_grid", "load_grid", "save_trace", "load_trace", "ingest",
    "save_draw_archive", "load_draw_archive", "history_stub_from_meta",
    "model_config_to_dict", "model_config_from_dict",
    "save_predictions", "load_predictions", "save_verification",
]


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------------------
# grid JSON
# ---------------------------------------------------------------------------

def save_grid(path, grid, labels=None):
    """Write a grid (and optional labels) as JSON.

    Queen-contiguity grids are stored symbolically; anything else as an
    explicit edge list.
    """
    queen = SpatialGrid(grid.n_rows, grid.n_cols)
    if np.array_equal(queen.adjacency, grid.adjacency):
        adjacency = "queen"
    else:
        rows, cols = np.nonzero(np.triu(grid.adjacency))
        adjacency = [[int(i), int(j)] for i, j in zip(rows, cols)]
    doc = {"rows": grid.n_rows, "cols": grid.n_cols,
           "adjacency": adjacency,
           "labels": labels.as_dict() if labels is not None else {}}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_grid(path):
    """Read a grid JSON; returns (SpatialGrid, StaticLabels)."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: grid JSON needs integer 'rows' and "
                        f"'cols'") from exc
    adjacency = doc.get("adjacency", "queen")
    if adjacency == "queen":
        grid = SpatialGrid(rows, cols)
    else:
        n = rows * cols
        matrix = np.zeros((n, n), dtype=bool)
        for edge in adjacency:
            i, j = int(edge[0]), int(edge[1])
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"{path}: edge ({i}, {j}) outside "
                                f"[0, {n})")
            matrix[i, j] = matrix[j, i] = True
        grid = SpatialGrid(rows, cols, matrix)
    labels = StaticLabels(doc.get("labels", {}))
    for name in labels.names():
        labels.mask(name, grid.n_locations)  # id range check
    return grid, labels


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------

def save_trace(path, trace):
    """Write `location_id,time_index,value` rows for a trace."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location_id", "time_index", "value"])
        for loc in range(trace.n_locations):
            for t in range(trace.n_steps):
                writer.writerow([loc, t, _fmt(trace.values[loc, t])])


def load_trace(path, t0=0):
    """Read a trace CSV; any missing (location, time) cell is an error."""
    cells = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"location_id", "time_index", "value"}
        if reader.fieldnames is None or not required.issubset(
                reader.fieldnames):
            raise DataError(f"{path}: expected header with columns "
                            f"{sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                loc = int(row["location_id"])
                t = int(row["time_index"])
                value = float(row["value"])
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row") from exc
            if (loc, t) in cells:
                raise DataError(f"{path}:{lineno}: duplicate cell "
                                f"({loc}, {t})")
            cells[(loc, t)] = value
    if not cells:
        raise DataError(f"{path}: empty trace")
    n_loc = max(k[0] for k in cells) + 1
    n_steps = max(k[1] for k in cells) + 1
    missing = [(i, t) for i in range(n_loc) for t in range(n_steps)
               if (i, t) not in cells]
    if missing:
        raise DataError(f"{path}: {len(missing)} missing cells, "
                        f"first {missing[:5]}")
    values = np.empty((n_loc, n_steps))
    for (loc, t), value in cells.items():
        values[loc, t] = value
    return Trace(values, t0=t0)


# ---------------------------------------------------------------------------
# raw activity ingestion
# ---------------------------------------------------------------------------

def ingest(raw_csv, grid_spec, selection=None):
    """Aggregate raw activity records into a crowdedness trace.

    The raw CSV needs ``cell_id`` and ``time_slot`` columns plus at least
    one activity column; activities are summed per cell and slot.
    ``selection`` is an inclusive (row_lo, row_hi, col_lo, col_hi) window
    onto the grid from ``grid_spec``; the returned grid, labels and trace
    are renumbered row-major inside the selection. Aggregates must be
    strictly positive and every (cell, slot) pair present.
    """
    grid, labels = load_grid(grid_spec)
    totals = {}
    with open(raw_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "cell_id" not in reader.fieldnames \
                or "time_slot" not in reader.fieldnames:
            raise DataError(f"{raw_csv}: expected 'cell_id' and "
                            f"'time_slot' columns")
        activity_cols = [c for c in reader.fieldnames
                         if c not in ("cell_id", "time_slot")]
        if not activity_cols:
            raise DataError(f"{raw_csv}: no activity columns")
        for lineno, row in enumerate(reader, start=2):
            try:
                cell = int(row["cell_id"])
                slot = int(row["time_slot"])
                total = sum(float(row[c]) for c in activity_cols
                            if row[c] not in (None, ""))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{raw_csv}:{lineno}: malformed "
                                f"row") from exc
            if not 0 <= cell < grid.n_locations:
                raise DataError(f"{raw_csv}:{lineno}: unknown cell id "
                                f"{cell} for a grid of "
                                f"{grid.n_locations} cells")
            totals[(cell, slot)] = totals.get((cell, slot), 0.0) + total

    if selection is not None:
        row_lo, row_hi, col_lo, col_hi = selection
        if not (0 <= row_lo <= row_hi < grid.n_rows
                and 0 <= col_lo <= col_hi < grid.n_cols):
            raise DataError(f"selection {selection} outside the "
                            f"{grid.n_rows}x{grid.n_cols} grid")
    else:
        row_lo, row_hi = 0, grid.n_rows - 1
        col_lo, col_hi = 0, grid.n_cols - 1

    keep = [grid.location_id(r, c)
            for r in range(row_lo, row_hi + 1)
            for c in range(col_lo, col_hi + 1)]
    keep_index = {loc: k for k, loc in enumerate(keep)}
    sub_grid = SpatialGrid(row_hi - row_lo + 1, col_hi - col_lo + 1,
                           grid.adjacency[np.ix_(keep, keep)])
    sub_labels = StaticLabels({
        name: [keep_index[i] for i in labels.ids(name) if i in keep_index]
        for name in labels.names()})

    slots = sorted({slot for _, slot in totals})
    if not slots:
        raise DataError(f"{raw_csv}: no records")
    expected = set(range(slots[0], slots[-1] + 1))
    gaps = sorted(expected - set(slots))
    if gaps:
        raise DataError(f"{raw_csv}: missing time slots {gaps[:5]}"
                        f"{'...' if len(gaps) > 5 else ''}")
    values = np.empty((len(keep), len(slots)))
    for k, loc in enumerate(keep):
        for j, slot in enumerate(slots):
            if (loc, slot) not in totals:
                raise DataError(f"{raw_csv}: no record for cell {loc} "
                                f"at slot {slot}")
            value = totals[(loc, slot)]
            if value <= 0:
                raise DataError(f"{raw_csv}: nonpositive aggregate "
                                f"{value} for cell {loc} at slot {slot}")
            values[k, j] = value
    return Trace(values, t0=slots[0]), sub_grid, sub_labels


# ---------------------------------------------------------------------------
# model config JSON
# ---------------------------------------------------------------------------

def model_config_to_dict(config):
    hyper = config.hyper
    doc = {
        "variant": config.variant,
        "frequencies": list(config.frequencies),
        "hyper": {
            "m0": None if hyper.m0 is None else list(hyper.m0),
            "s0": None if hyper.s0 is None else [list(row)
                                                 for row in hyper.s0],
            "s0_scale": hyper.s0_scale,
            "a_sigma": hyper.a_sigma, "b_sigma": hyper.b_sigma,
            "a_tau": hyper.a_tau, "b_tau": hyper.b_tau,
            "intercept_variance": hyper.intercept_variance,
        },
        "mcmc": {"iters": config.mcmc.iters, "burnin": config.mcmc.burnin,
                 "thin": config.mcmc.thin, "seed": config.mcmc.seed},
    }
    if config.bnp is not None:
        doc["bnp"] = {"alpha": config.bnp.alpha, "n_aux": config.bnp.n_aux}
    if config.rho0 is not None:
        doc["rho0"] = config.rho0
    return doc


def model_config_from_dict(doc):
    try:
        hyper = Hyperparams(**doc["hyper"]) if "hyper" in doc \
            else Hyperparams()
        bnp = BNPConfig(**doc["bnp"]) if "bnp" in doc else None
        mcmc = McmcConfig(**doc["mcmc"]) if "mcmc" in doc else McmcConfig()
        return ModelConfig(variant=doc["variant"],
                           frequencies=tuple(doc["frequencies"]),
                           hyper=hyper, bnp=bnp,
                           rho0=doc.get("rho0"), mcmc=mcmc)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"invalid model config: {exc}") from exc


# ---------------------------------------------------------------------------
# draw archive
# ---------------------------------------------------------------------------

def save_draw_archive(dirpath, draws, config, history, save_w=False):
    """Persist posterior draws plus the metadata needed to predict later.

    Layout: ``params.csv`` (one row per draw), ``betas/<m>.csv``,
    ``assignments.csv`` and, when ``save_w`` is set, ``w/<m>.csv`` (these
    dominate the archive size). ``config.json`` records the model config
    and the training window's shape, offset and final observed values.
    """
    os.makedirs(dirpath, exist_ok=True)
    os.makedirs(os.path.join(dirpath, "betas"), exist_ok=True)
    save_w = save_w and config.has_spatial_field
    if save_w:
        os.makedirs(os.path.join(dirpath, "w"), exist_ok=True)

    with open(os.path.join(dirpath, "params.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "beta0", "xi", "rho", "tau2", "sigma2",
                         "n_clusters"])
        for m, draw in enumerate(draws):
            writer.writerow([m, _fmt(draw.beta0), _fmt(draw.xi),
                             _fmt(draw.rho), _fmt(draw.tau2),
                             _fmt(draw.sigma2), draw.n_clusters])

    with open(os.path.join(dirpath, "assignments.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "location_id", "cluster"])
        for m, draw in enumerate(draws):
            for loc, cluster in enumerate(draw.assignments):
                writer.writerow([m, loc, int(cluster)])

    n_coeff = draws[0].betas.shape[1] if draws else 0
    header = ["cluster"] + [f"c{k}" for k in range(n_coeff)]
    for m, draw in enumerate(draws):
        with open(os.path.join(dirpath, "betas", f"{m}.csv"), "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for j, beta in enumerate(draw.betas):
                writer.writerow([j] + [_fmt(v) for v in beta])

    if save_w:
        for m, draw in enumerate(draws):
            with open(os.path.join(dirpath, "w", f"{m}.csv"), "w",
                      newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["location_id"]
                                + [f"t{t}" for t in
                                   range(draw.w.shape[1])])
                for loc in range(draw.w.shape[0]):
                    writer.writerow([loc] + [_fmt(v)
                                             for v in draw.w[loc]])

    meta = {
        "model": model_config_to_dict(config),
        "n_draws": len(draws),
        "n_locations": history.n_locations,
        "t_length": history.n_steps,
        "t0": history.t0,
        "last_observed": [_fmt(v) for v in history.values[:, -1]],
        "has_w": save_w,
    }
    with open(os.path.join(dirpath, "config.json"), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def history_stub_from_meta(meta):
    """Single-column Trace standing in for the training history.

    Carries the forecast origin's absolute time index and the last
    observed values, which is all prediction and scoring need.
    """
    last = np.array([float(v) for v in meta["last_observed"]])
    return Trace(last[:, None],
                 t0=int(meta["t0"]) + int(meta["t_length"]) - 1)


def load_draw_archive(dirpath):
    """Load an archive; returns (draws, config, meta dict).

    Archives saved without the latent fields reload them as the all-zero
    field of the right shape when the variant has one (only the final
    column matters for prediction, and a missing archive cannot restore
    it), so prediction from a slim archive needs ``save_w``; this loader
    raises if the fields are required but absent.
    """
    with open(os.path.join(dirpath, "config.json")) as fh:
        meta = json.load(fh)
    config = model_config_from_dict(meta["model"])
    n_draws = int(meta["n_draws"])

    params = {}
    with open(os.path.join(dirpath, "params.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            params[int(row["draw"])] = row

    assignments = {m: np.zeros(meta["n_locations"], dtype=np.int64)
                   for m in range(n_draws)}
    with open(os.path.join(dirpath, "assignments.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            assignments[int(row["draw"])][int(row["location_id"])] = \
                int(row["cluster"])

    draws = []
    for m in range(n_draws):
        betas = []
        with open(os.path.join(dirpath, "betas", f"{m}.csv"),
                  newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                betas.append([float(v) for v in row[1:]])
        betas = np.asarray(betas, dtype=np.float64)
        if betas.size == 0:
            betas = np.zeros((1, len(header) - 1))

        w = None
        if config.has_spatial_field:
            w_path = os.path.join(dirpath, "w", f"{m}.csv")
            if not meta.get("has_w"):
                raise DataError(
                    f"{dirpath}: archive was saved without latent fields; "
                    f"refit with save_w to enable prediction")
            w = np.empty((meta["n_locations"], meta["t_length"]))
            with open(w_path, newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                for row in reader:
                    w[int(row[0])] = [float(v) for v in row[1:]]
        p = params[m]
        draws.append(PosteriorDraw(
            beta0=float(p["beta0"]), betas=betas,
            assignments=assignments[m], w=w, xi=float(p["xi"]),
            rho=float(p["rho"]), tau2=float(p["tau2"]),
            sigma2=float(p["sigma2"])))
    return draws, config, meta


# ---------------------------------------------------------------------------
# predictions and verification outputs
# ---------------------------------------------------------------------------

def save_predictions(path, trajectories):
    """Write an ensemble of trajectories as
    `draw,location_id,time_index,value` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "location_id", "time_index", "value"])
        for m, trace in enumerate(trajectories):
            for loc in range(trace.n_locations):
                for t in range(trace.n_steps):
                    writer.writerow([m, loc, t,
                                     _fmt(trace.values[loc, t])])


def load_predictions(path, t0=0):
    """Read a predictions CSV back into a list of Traces."""
    cells = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"draw", "location_id", "time_index", "value"}
        if reader.fieldnames is None or not required.issubset(
                reader.fieldnames):
            raise DataError(f"{path}: expected header with columns "
                            f"{sorted(required)}")
        for row in reader:
            key = (int(row["draw"]), int(row["location_id"]),
                   int(row["time_index"]))
            cells[key] = float(row["value"])
    if not cells:
        raise DataError(f"{path}: empty predictions file")
    n_draws = max(k[0] for k in cells) + 1
    n_loc = max(k[1] for k in cells) + 1
    n_steps = max(k[2] for k in cells) + 1
    out = []
    for m in range(n_draws):
        values = np.empty((n_loc, n_steps))
        for loc in range(n_loc):
            for t in range(n_steps):
                if (m, loc, t) not in cells:
                    raise DataError(f"{path}: missing cell for draw {m}, "
                                    f"location {loc}, time {t}")
                values[loc, t] = cells[(m, loc, t)]
        out.append(Trace(values, t0=t0))
    return out


def save_verification(path, fields, draw_ids=None):
    """Write verification fields as `draw,location_id,mode,value` rows
    (the draw column is omitted for a single field)."""
    fields = list(fields)
    single = len(fields) == 1 and draw_ids is None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if single:
            writer.writerow(["location_id", "mode", "value"])
        else:
            writer.writerow(["draw", "location_id", "mode", "value"])
        ids = draw_ids if draw_ids is not None else range(len(fields))
        for m, field in zip(ids, fields):
            for loc in range(field.n_locations):
                value = field.values[loc]
                text = str(int(value)) if field.mode == "boolean" \
                    else _fmt(value)
                row = [loc, field.mode, text]
                if not single:
                    row = [m] + row
                writer.writerow(row)
