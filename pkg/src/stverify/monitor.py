"""Boolean and quantitative monitoring of formulas on traces over a grid.

Satisfaction and robustness are reported per location at the anchor time
(column 0 of the trace). Internally every node is evaluated over the whole
range of time steps it can cover: a node of temporal depth D yields an
(I, H+1-D) array, temporal operators shrink that range, and spatial
operators act column-wise through the fixpoint kernels.

Comparisons are non-strict in the Boolean semantics (a zero margin counts
as satisfied) so that ties, which have measure zero for continuous draws,
are resolved deterministically.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import HorizonError
from .formula import (Always, And, AtomicCompare, AtomicLabel, Escape,
                      Eventually, Implies, Not, Or, Reach, Somewhere,
                      temporal_depth)
from .kernels import escape_fixpoint, reach_fixpoint
from .spatial import StaticLabels

__all__ = ["VerificationField", "boolean_monitor", "quantitative_monitor",
           "monitor_ensemble", "LABEL_ROBUSTNESS"]

# Crisp labels get a large finite robustness so min/max propagation stays
# well-behaved under arithmetic.
LABEL_ROBUSTNESS = 1e9


@dataclass(frozen=True)
class VerificationField:
    """Per-location verification result at the anchor time.

    ``values`` is a boolean vector for mode 'boolean' and a float vector of
    robustness values for mode 'robustness'.
    """

    mode: str
    values: np.ndarray

    def __post_init__(self):
        if self.mode not in ("boolean", "robustness"):
            raise ValueError(f"unknown mode {self.mode!r}")
        values = np.asarray(self.values)
        if self.mode == "boolean":
            values = values.astype(bool)
        else:
            values = values.astype(np.float64)
            if np.isnan(values).any():
                raise ValueError("robustness field contains NaN")
        object.__setattr__(self, "values", values)

    @property
    def n_locations(self):
        return len(self.values)


class _Context:
    __slots__ = ("values", "grid", "labels", "quantitative")

    def __init__(self, values, grid, labels, quantitative):
        self.values = values
        self.grid = grid
        self.labels = labels
        self.quantitative = quantitative


def _eval(phi, ctx):
    v = ctx.values
    quant = ctx.quantitative

    if isinstance(phi, AtomicCompare):
        if quant:
            margin = v - phi.threshold
            return margin if phi.direction == "greater" else -margin
        if phi.direction == "greater":
            return (v >= phi.threshold).astype(np.float64)
        return (v <= phi.threshold).astype(np.float64)

    if isinstance(phi, AtomicLabel):
        try:
            mask = ctx.labels.mask(phi.name, ctx.grid.n_locations)
        except KeyError as exc:
            raise ValueError(str(exc)) from exc
        if quant:
            col = np.where(mask, LABEL_ROBUSTNESS, -LABEL_ROBUSTNESS)
        else:
            col = mask.astype(np.float64)
        return np.tile(col[:, None], (1, v.shape[1]))

    if isinstance(phi, Not):
        child = _eval(phi.child, ctx)
        return -child if quant else 1.0 - child

    if isinstance(phi, (And, Or, Implies)):
        left = _eval(phi.left, ctx)
        right = _eval(phi.right, ctx)
        n = min(left.shape[1], right.shape[1])
        left, right = left[:, :n], right[:, :n]
        if isinstance(phi, And):
            return np.minimum(left, right)
        if isinstance(phi, Or):
            return np.maximum(left, right)
        neg = -left if quant else 1.0 - left
        return np.maximum(neg, right)

    if isinstance(phi, (Eventually, Always)):
        child = _eval(phi.child, ctx)
        windows = sliding_window_view(child[:, phi.lo:],
                                      phi.hi - phi.lo + 1, axis=1)
        return windows.max(-1) if isinstance(phi, Eventually) \
            else windows.min(-1)

    if isinstance(phi, Reach):
        via = _eval(phi.via, ctx)
        target = _eval(phi.target, ctx)
        n = min(via.shape[1], target.shape[1])
        return reach_fixpoint(via[:, :n], target[:, :n],
                              ctx.grid.neighbor_matrix, phi.d_max)

    if isinstance(phi, Somewhere):
        child = _eval(phi.child, ctx)
        unbounded = np.full_like(child, np.inf)
        return reach_fixpoint(unbounded, child, ctx.grid.neighbor_matrix,
                              phi.d_max)

    if isinstance(phi, Escape):
        child = _eval(phi.child, ctx)
        return escape_fixpoint(child, ctx.grid.neighbor_matrix,
                               ctx.grid.hop_matrix, phi.d_lo, phi.d_hi)

    raise TypeError(f"not a formula node: {phi!r}")


def _monitor(phi, trace, grid, labels, quantitative):
    if trace.n_locations != grid.n_locations:
        raise ValueError(f"trace has {trace.n_locations} locations but the "
                         f"grid has {grid.n_locations}")
    required = temporal_depth(phi)
    if required > trace.horizon:
        raise HorizonError(required, trace.horizon)
    if labels is None:
        labels = StaticLabels.empty()
    ctx = _Context(trace.values, grid, labels, quantitative)
    anchor = _eval(phi, ctx)[:, 0]
    if quantitative:
        return VerificationField("robustness", anchor)
    return VerificationField("boolean", anchor > 0.5)


def boolean_monitor(phi, trace, grid, labels=None):
    """Per-location satisfaction of ``phi`` at the trace's anchor time.

    Raises :class:`~stverify.errors.HorizonError` when the formula's
    temporal depth exceeds the trace horizon; windows are never treated as
    vacuously true.
    """
    return _monitor(phi, trace, grid, labels, quantitative=False)


def quantitative_monitor(phi, trace, grid, labels=None):
    """Per-location robustness of ``phi`` at the trace's anchor time.

    Positive values indicate satisfaction, negative values violation; the
    magnitude is the margin the signal can tolerate before the verdict
    flips (labels contribute +/-LABEL_ROBUSTNESS).
    """
    return _monitor(phi, trace, grid, labels, quantitative=True)


def monitor_ensemble(phi, traces, grid, labels=None, mode="boolean"):
    """Monitor each trace of an ensemble; results align with the input.

    All traces must share the ensemble's dimensions. Monitoring is a pure
    function of its inputs, so callers may safely shard this loop.
    """
    if mode not in ("boolean", "robustness"):
        raise ValueError(f"unknown mode {mode!r}")
    traces = list(traces)
    if traces:
        shape = traces[0].values.shape
        for k, tr in enumerate(traces):
            if tr.values.shape != shape:
                raise ValueError(f"trace {k} has shape {tr.values.shape}, "
                                 f"expected {shape}")
    fn = boolean_monitor if mode == "boolean" else quantitative_monitor
    return [fn(phi, tr, grid, labels) for tr in traces]
