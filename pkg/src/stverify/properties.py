"""Builders for the four crowdedness requirements.

All builders take the crowdedness threshold ``c`` and express "crowded" as
the atom ``y > c``. Temporal bounds are step counts; ``minutes_to_steps``
converts wall-clock property parameters for a given aggregation interval.
"""

from dataclasses import dataclass

from .formula import (Always, And, AtomicCompare, AtomicLabel, Eventually,
                      Implies, Not, Or, Somewhere)

__all__ = ["PropertyParams", "minutes_to_steps", "crowded_atom",
           "build_p1", "build_p2", "build_p3", "build_p4",
           "build_property_set"]

HOSPITAL_LABEL = "hospital"


@dataclass(frozen=True)
class PropertyParams:
    """Threshold and per-property time/distance parameters.

    Defaults follow the urban-mobility case study: threshold 500, 30 min
    for the recovery and fault-tolerance windows, 10 min for the locality
    check, 40 min / 4 cells for hospital reachability, one-cell
    neighbourhoods elsewhere, at 10-minute aggregation steps.
    """

    c: float = 500.0
    h1_steps: int = 3
    h2_steps: int = 1
    h3_steps: int = 3
    d2_cells: int = 1
    d3_cells: int = 1
    d4_cells: int = 4

    def __post_init__(self):
        for name in ("h1_steps", "h2_steps", "h3_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("d2_cells", "d3_cells", "d4_cells"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_minutes(cls, c=500.0, h1_min=30, h2_min=10, h3_min=30,
                     h4_min=40, d2_cells=1, d3_cells=1, d4_cells=4,
                     step_minutes=10):
        """Build params from minute-valued windows.

        ``h4_min`` is accepted for interface completeness: the hospital
        property's time extent is implied by its distance (one hop per
        step), so only a mismatch is reported.
        """
        h4_steps = minutes_to_steps(h4_min, step_minutes)
        if h4_steps != d4_cells:
            raise ValueError(
                f"hospital-reachability window of {h4_min} min is "
                f"{h4_steps} steps but the distance is {d4_cells} cells; "
                f"the property advances one cell per step")
        return cls(c=c,
                   h1_steps=minutes_to_steps(h1_min, step_minutes),
                   h2_steps=minutes_to_steps(h2_min, step_minutes),
                   h3_steps=minutes_to_steps(h3_min, step_minutes),
                   d2_cells=d2_cells, d3_cells=d3_cells, d4_cells=d4_cells)


def minutes_to_steps(minutes, step_minutes=10):
    if step_minutes <= 0:
        raise ValueError("step_minutes must be positive")
    if minutes % step_minutes:
        raise ValueError(f"{minutes} min is not a whole number of "
                         f"{step_minutes}-min steps")
    steps = minutes // step_minutes
    if steps < 1:
        raise ValueError(f"{minutes} min is below one step")
    return int(steps)


def crowded_atom(c):
    return AtomicCompare("greater", c)


def build_p1(c, h):
    """Overloads are temporary: a currently crowded location must drop
    below the threshold within h future steps."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    phi = crowded_atom(c)
    return Implies(phi, Eventually(1, h, Not(phi)))


def build_p2(c, h, d):
    """Overloads are local: h steps ahead, any crowded location must have
    an uncrowded location within d hops."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    phi = crowded_atom(c)
    return Eventually(h, h, Implies(phi, Somewhere(d, Not(phi))))


def build_p3(c, h, d):
    """The network is fault-tolerant: at every future step up to h, some
    location within d hops is uncrowded."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    phi = crowded_atom(c)
    return Always(1, h, Somewhere(d, Not(phi)))


def build_p4(c, d, hospital_label=HOSPITAL_LABEL):
    """Uncrowded hospital reachability within d cells, advancing one cell
    per step through locations that stay uncrowded while traversed.

    The recursion unrolls d levels: at level k the current location is
    either a hospital, or uncrowded over steps [k, k+1] with a neighbour
    from which the remaining d-k-1 levels succeed. Requires a trace
    horizon of exactly d steps; hospitals satisfy it trivially.
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    phi = crowded_atom(c)
    hospital = AtomicLabel(hospital_label)

    def level(k, remaining):
        if remaining == 0:
            return hospital
        return Or(hospital,
                  And(Always(k, k + 1, Not(phi)),
                      Somewhere(1, level(k + 1, remaining - 1))))

    return level(0, d)


def build_property_set(params):
    """The four standard properties as an ordered name -> Formula map."""
    return {
        "P1": build_p1(params.c, params.h1_steps),
        "P2": build_p2(params.c, params.h2_steps, params.d2_cells),
        "P3": build_p3(params.c, params.h3_steps, params.d3_cells),
        "P4": build_p4(params.c, params.d4_cells),
    }
