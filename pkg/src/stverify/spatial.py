"""City grids, adjacency structure, hop distances and spatio-temporal traces.

Locations are numbered row-major starting from the south-west corner of the
grid, so location ``r * n_cols + c`` sits in row ``r`` (from the bottom) and
column ``c``.
"""

from functools import cached_property

import numpy as np

__all__ = ["SpatialGrid", "StaticLabels", "Trace", "queen_adjacency",
           "hop_distance"]

UNREACHABLE = -1  # sentinel in the integer hop-distance matrix


class SpatialGrid:
    """A set of areal units with a symmetric 0/1 adjacency structure.

    Immutable after construction; derived structures (neighbour lists,
    all-pairs hop distances) are computed lazily and cached.

    Parameters
    ----------
    n_rows, n_cols : int
        Grid dimensions; the number of locations is ``n_rows * n_cols``.
    adjacency : ndarray of shape (I, I)
        Symmetric 0/1 (or boolean) matrix with zero diagonal. Defaults to
        queen contiguity for the given dimensions.
    """

    def __init__(self, n_rows, n_cols, adjacency=None):
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"grid dimensions must be positive, "
                             f"got {n_rows}x{n_cols}")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        n = self.n_rows * self.n_cols
        if adjacency is None:
            adjacency = _queen_matrix(self.n_rows, self.n_cols)
        adjacency = np.asarray(adjacency)
        if adjacency.shape != (n, n):
            raise ValueError(f"adjacency must be {n}x{n}, "
                             f"got {adjacency.shape}")
        adjacency = adjacency.astype(bool)
        if adjacency.diagonal().any():
            raise ValueError("adjacency has a nonzero diagonal")
        if not np.array_equal(adjacency, adjacency.T):
            raise ValueError("adjacency is not symmetric")
        self.adjacency = adjacency
        self.adjacency.setflags(write=False)

    @property
    def n_locations(self):
        return self.n_rows * self.n_cols

    def location_id(self, row, col):
        """Row-major id of cell (row, col), rows counted from the south."""
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise ValueError(f"cell ({row}, {col}) outside "
                             f"{self.n_rows}x{self.n_cols} grid")
        return row * self.n_cols + col

    def cell_of(self, loc):
        if not 0 <= loc < self.n_locations:
            raise ValueError(f"location id {loc} outside [0, {self.n_locations})")
        return divmod(loc, self.n_cols)

    @cached_property
    def neighbor_lists(self):
        """Tuple of int arrays: neighbour ids of each location."""
        return tuple(np.flatnonzero(self.adjacency[i]).astype(np.int64)
                     for i in range(self.n_locations))

    @cached_property
    def neighbor_matrix(self):
        """Padded (I, max_degree) neighbour-index matrix.

        Rows are padded with the sentinel index I, which kernel code maps to
        an identity value; shape is (I, 1) with all-sentinel entries when the
        graph has no edges.
        """
        lists = self.neighbor_lists
        max_deg = max((len(l) for l in lists), default=0)
        max_deg = max(max_deg, 1)
        out = np.full((self.n_locations, max_deg), self.n_locations,
                      dtype=np.int64)
        for i, l in enumerate(lists):
            out[i, :len(l)] = l
        out.setflags(write=False)
        return out

    @cached_property
    def hop_matrix(self):
        """All-pairs hop distances (BFS); UNREACHABLE marks disconnection."""
        n = self.n_locations
        dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
        lists = self.neighbor_lists
        for src in range(n):
            d = dist[src]
            d[src] = 0
            frontier = [src]
            level = 0
            while frontier:
                level += 1
                nxt = []
                for u in frontier:
                    for v in lists[u]:
                        if d[v] == UNREACHABLE:
                            d[v] = level
                            nxt.append(v)
                frontier = nxt
        dist.setflags(write=False)
        return dist

    def __eq__(self, other):
        return (isinstance(other, SpatialGrid)
                and self.n_rows == other.n_rows
                and self.n_cols == other.n_cols
                and np.array_equal(self.adjacency, other.adjacency))

    def __repr__(self):
        return f"SpatialGrid({self.n_rows}x{self.n_cols})"


def _queen_matrix(n_rows, n_cols):
    n = n_rows * n_cols
    adj = np.zeros((n, n), dtype=bool)
    for r in range(n_rows):
        for c in range(n_cols):
            i = r * n_cols + c
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n_rows and 0 <= cc < n_cols:
                        adj[i, rr * n_cols + cc] = True
    return adj


def queen_adjacency(n_rows, n_cols):
    """Grid where cells sharing an edge or a vertex are neighbours."""
    return SpatialGrid(n_rows, n_cols)


def hop_distance(grid, i, j):
    """Minimum number of adjacency hops between locations i and j.

    Returns 0 iff ``i == j`` and ``math.inf`` when no path exists.
    """
    n = grid.n_locations
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"location ids must lie in [0, {n}), got {i}, {j}")
    d = grid.hop_matrix[i, j]
    return float("inf") if d == UNREACHABLE else int(d)


class StaticLabels:
    """Named sets of location ids (e.g. which cells contain a hospital)."""

    def __init__(self, sets=None):
        self._sets = {}
        for name, ids in (sets or {}).items():
            self._sets[name] = np.array(sorted(int(i) for i in ids),
                                        dtype=np.int64)

    @classmethod
    def empty(cls):
        return cls({})

    def names(self):
        return sorted(self._sets)

    def ids(self, name):
        if name not in self._sets:
            raise KeyError(f"unknown label {name!r}; "
                           f"known labels: {self.names()}")
        return self._sets[name]

    def mask(self, name, n_locations):
        """Boolean membership vector of length ``n_locations``."""
        ids = self.ids(name)
        if len(ids) and (ids.min() < 0 or ids.max() >= n_locations):
            raise ValueError(f"label {name!r} has ids outside "
                             f"[0, {n_locations})")
        out = np.zeros(n_locations, dtype=bool)
        out[ids] = True
        return out

    def __contains__(self, name):
        return name in self._sets

    def as_dict(self):
        return {name: self._sets[name].tolist() for name in self.names()}

    def __repr__(self):
        return f"StaticLabels({self.as_dict()})"


class Trace:
    """Real-valued field over locations and discrete time steps.

    ``values`` has shape (I, L). For forecast trajectories, column 0 holds
    the value at the forecast origin (the last observed step) and columns
    1..H the future steps; ``horizon`` is then H. For training series the
    columns are simply consecutive observations.

    ``t0`` is the absolute time index of column 0, used to keep harmonic
    regressors phase-aligned across rolling windows.
    """

    def __init__(self, values, t0=0):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"trace values must be a nonempty 2-d array, "
                             f"got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("trace contains non-finite values")
        self.values = values
        self.t0 = int(t0)

    @property
    def n_locations(self):
        return self.values.shape[0]

    @property
    def n_steps(self):
        return self.values.shape[1]

    @property
    def horizon(self):
        return self.values.shape[1] - 1

    def window(self, start, length):
        """Sub-trace of ``length`` columns beginning at column ``start``."""
        if start < 0 or start + length > self.n_steps:
            raise ValueError(f"window [{start}, {start + length}) outside "
                             f"trace of {self.n_steps} steps")
        return Trace(self.values[:, start:start + length],
                     t0=self.t0 + start)

    def __repr__(self):
        return (f"Trace({self.n_locations} locations x "
                f"{self.n_steps} steps, t0={self.t0})")
