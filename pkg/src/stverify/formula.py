"""AST for spatio-temporal logic formulas.

Nodes are immutable and compare structurally. Temporal bounds are integer
step counts relative to the evaluation instant; spatial bounds are hop
counts on the grid graph.
"""

import math
from dataclasses import dataclass

__all__ = [
    "Formula", "AtomicCompare", "AtomicLabel", "Not", "And", "Or", "Implies",
    "Eventually", "Always", "Reach", "Escape", "Somewhere",
    "true_formula", "TRUE_THRESHOLD", "temporal_depth", "expand_derived",
    "to_text",
]

# Threshold of the synthetic always-true atom produced when rewriting
# `somewhere`; any signal above -TRUE_THRESHOLD satisfies it.
TRUE_THRESHOLD = 1e9


class Formula:
    """Base class; use the concrete node dataclasses below."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class AtomicCompare(Formula):
    """Signal comparison at the current location and time: y > c or y < c."""

    direction: str  # "greater" | "less"
    threshold: float

    def __post_init__(self):
        if self.direction not in ("greater", "less"):
            raise ValueError(f"direction must be 'greater' or 'less', "
                             f"got {self.direction!r}")
        object.__setattr__(self, "threshold", float(self.threshold))
        if not math.isfinite(self.threshold):
            raise ValueError("comparison threshold must be finite")


@dataclass(frozen=True)
class AtomicLabel(Formula):
    """Membership of the current location in a named static label set."""

    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


def _check_steps(lo, hi):
    if not (0 <= lo <= hi):
        raise ValueError(f"temporal bounds must satisfy 0 <= lo <= hi, "
                         f"got [{lo}, {hi}]")


@dataclass(frozen=True)
class Eventually(Formula):
    """Child holds at some step in [lo, hi] relative to the current time."""

    lo: int
    hi: int
    child: Formula

    def __post_init__(self):
        _check_steps(self.lo, self.hi)


@dataclass(frozen=True)
class Always(Formula):
    """Child holds at every step in [lo, hi] relative to the current time."""

    lo: int
    hi: int
    child: Formula

    def __post_init__(self):
        _check_steps(self.lo, self.hi)


@dataclass(frozen=True)
class Reach(Formula):
    """A location satisfying ``target`` is reachable within ``d_max`` hops
    by a route whose strictly-preceding locations all satisfy ``via``.

    The zero-hop route is admitted without any ``via`` check.
    """

    via: Formula
    d_max: int
    target: Formula

    def __post_init__(self):
        if self.d_max < 0:
            raise ValueError(f"reach distance must be >= 0, got {self.d_max}")


@dataclass(frozen=True)
class Escape(Formula):
    """A route through locations satisfying the child ends at hop distance
    (from the route origin) within [d_lo, d_hi].
    """

    d_lo: int
    d_hi: int
    child: Formula

    def __post_init__(self):
        if not (0 <= self.d_lo <= self.d_hi):
            raise ValueError(f"escape bounds must satisfy 0 <= lo <= hi, "
                             f"got [{self.d_lo}, {self.d_hi}]")


@dataclass(frozen=True)
class Somewhere(Formula):
    """Child holds at some location within ``d_max`` hops."""

    d_max: int
    child: Formula

    def __post_init__(self):
        if self.d_max < 0:
            raise ValueError(f"somewhere distance must be >= 0, "
                             f"got {self.d_max}")


def true_formula():
    """An atom satisfied by any signal value above -TRUE_THRESHOLD."""
    return AtomicCompare("greater", -TRUE_THRESHOLD)


def temporal_depth(phi):
    """Maximum cumulative upper time bound along any path of the AST.

    A trace must provide at least this many future steps for the formula to
    be evaluable at the forecast origin.
    """
    if isinstance(phi, (AtomicCompare, AtomicLabel)):
        return 0
    if isinstance(phi, Not):
        return temporal_depth(phi.child)
    if isinstance(phi, (And, Or, Implies)):
        return max(temporal_depth(phi.left), temporal_depth(phi.right))
    if isinstance(phi, (Eventually, Always)):
        return phi.hi + temporal_depth(phi.child)
    if isinstance(phi, Reach):
        return max(temporal_depth(phi.via), temporal_depth(phi.target))
    if isinstance(phi, (Escape, Somewhere)):
        return temporal_depth(phi.child)
    raise TypeError(f"not a formula node: {phi!r}")


def _negate(phi):
    # unwrap instead of stacking a double negation on synthesized rewrites
    return phi.child if isinstance(phi, Not) else Not(phi)


def expand_derived(phi):
    """Rewrite derived operators into the core grammar.

    ``somewhere[d] psi`` becomes ``true reach[d] psi``, implication becomes
    disjunction, and disjunction becomes negated conjunction, so the result
    uses only atoms, not, and, eventually, always, reach and escape.
    Idempotent; Boolean and robustness semantics of the rewritten Boolean
    connectives are preserved exactly.
    """
    if isinstance(phi, (AtomicCompare, AtomicLabel)):
        return phi
    if isinstance(phi, Not):
        return Not(expand_derived(phi.child))
    if isinstance(phi, And):
        return And(expand_derived(phi.left), expand_derived(phi.right))
    if isinstance(phi, Or):
        return Not(And(_negate(expand_derived(phi.left)),
                       _negate(expand_derived(phi.right))))
    if isinstance(phi, Implies):
        return Not(And(expand_derived(phi.left),
                       _negate(expand_derived(phi.right))))
    if isinstance(phi, Eventually):
        return Eventually(phi.lo, phi.hi, expand_derived(phi.child))
    if isinstance(phi, Always):
        return Always(phi.lo, phi.hi, expand_derived(phi.child))
    if isinstance(phi, Reach):
        return Reach(expand_derived(phi.via), phi.d_max,
                     expand_derived(phi.target))
    if isinstance(phi, Escape):
        return Escape(phi.d_lo, phi.d_hi, expand_derived(phi.child))
    if isinstance(phi, Somewhere):
        return Reach(true_formula(), phi.d_max, expand_derived(phi.child))
    raise TypeError(f"not a formula node: {phi!r}")


def _fmt_number(x):
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_text(phi):
    """Render a formula in the surface syntax accepted by the parser.

    Sub-formulas are parenthesised wherever the grammar would otherwise
    bind differently, so ``parse(to_text(phi))`` reproduces ``phi``.
    """
    if isinstance(phi, AtomicCompare):
        op = ">" if phi.direction == "greater" else "<"
        return f"y {op} {_fmt_number(phi.threshold)}"
    if isinstance(phi, AtomicLabel):
        return f"label({phi.name})"
    if isinstance(phi, Not):
        return f"!({to_text(phi.child)})"
    if isinstance(phi, And):
        return f"({to_text(phi.left)}) & ({to_text(phi.right)})"
    if isinstance(phi, Or):
        return f"({to_text(phi.left)}) | ({to_text(phi.right)})"
    if isinstance(phi, Implies):
        return f"({to_text(phi.left)}) -> ({to_text(phi.right)})"
    if isinstance(phi, Eventually):
        return f"F[{phi.lo},{phi.hi}] ({to_text(phi.child)})"
    if isinstance(phi, Always):
        return f"G[{phi.lo},{phi.hi}] ({to_text(phi.child)})"
    if isinstance(phi, Reach):
        return (f"({to_text(phi.via)}) reach[{phi.d_max}] "
                f"({to_text(phi.target)})")
    if isinstance(phi, Escape):
        return f"escape[{phi.d_lo},{phi.d_hi}] ({to_text(phi.child)})"
    if isinstance(phi, Somewhere):
        return f"somewhere[{phi.d_max}] ({to_text(phi.child)})"
    raise TypeError(f"not a formula node: {phi!r}")
