"""Shared test oracles and random generators.

The oracles deliberately use naive algorithms (BFS, route enumeration,
subset DP) that are independent of the production fixpoint/kernel code.
"""

import numpy as np

from stverify.formula import (Always, And, AtomicCompare, AtomicLabel,
                              Escape, Eventually, Implies, Not, Or, Reach,
                              Somewhere)


def bfs_hops(adjacency, src):
    """Single-source hop distances by textbook BFS; -1 when unreachable."""
    n = adjacency.shape[0]
    dist = [-1] * n
    dist[src] = 0
    queue = [src]
    while queue:
        nxt = []
        for u in queue:
            for v in range(n):
                if adjacency[u, v] and dist[v] == -1:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        queue = nxt
    return dist


def reach_oracle_bool(via, target, adjacency, d):
    """Route enumeration: exists l0..lk, k <= d, with target at lk and via
    at every strictly earlier location. Revisits allowed."""
    n = len(target)
    nbrs = [np.flatnonzero(adjacency[i]) for i in range(n)]
    out = np.zeros(n, dtype=bool)
    for i in range(n):
        stack = [(i, 0)]
        while stack:
            node, k = stack.pop()
            if target[node]:
                out[i] = True
                break
            if k < d and via[node]:
                for nb in nbrs[node]:
                    stack.append((nb, k + 1))
    return out


def reach_oracle_values(via, target, adjacency, d):
    """Max over routes of min(target at end, via along the prefix)."""
    n = len(target)
    nbrs = [np.flatnonzero(adjacency[i]) for i in range(n)]
    out = np.full(n, -np.inf)
    for i in range(n):
        stack = [(i, 0, np.inf)]
        while stack:
            node, k, prefix = stack.pop()
            out[i] = max(out[i], min(prefix, target[node]))
            if k < d:
                ext = min(prefix, via[node])
                for nb in nbrs[node]:
                    stack.append((nb, k + 1, ext))
    return out


def escape_oracle_bool(values, adjacency, hop, d_lo, d_hi):
    """Simple-path enumeration over satisfied locations, endpoint in the
    hop-distance window measured from the route origin."""
    n = len(values)
    nbrs = [np.flatnonzero(adjacency[i]) for i in range(n)]
    out = np.zeros(n, dtype=bool)
    for i in range(n):
        if not values[i]:
            continue
        seen_states = set()
        stack = [(1 << i, i)]
        while stack:
            mask, v = stack.pop()
            if (mask, v) in seen_states:
                continue
            seen_states.add((mask, v))
            if 0 <= hop[i, v] and d_lo <= hop[i, v] <= d_hi:
                out[i] = True
                break
            for u in nbrs[v]:
                if values[u] and not mask & (1 << u):
                    stack.append((mask | (1 << u), u))
    return out


def escape_oracle_values(values, adjacency, hop, d_lo, d_hi):
    """Exhaustive subset DP over simple paths: best min-value per
    (visited set, endpoint), maximised over admissible endpoints.

    Simple paths suffice for a max-min objective, so this enumerates every
    route value exactly.
    """
    n = len(values)
    nbrs = [np.flatnonzero(adjacency[i]) for i in range(n)]
    out = np.full(n, -np.inf)
    for i in range(n):
        best = {(1 << i, i): values[i]}
        stack = [(1 << i, i)]
        while stack:
            key = stack.pop()
            mask, v = key
            val = best[key]
            for u in nbrs[v]:
                if mask & (1 << u):
                    continue
                nkey = (mask | (1 << u), int(u))
                nval = min(val, values[u])
                if best.get(nkey, -np.inf) < nval:
                    best[nkey] = nval
                    stack.append(nkey)
        for (mask, v), val in best.items():
            if 0 <= hop[i, v] and d_lo <= hop[i, v] <= d_hi:
                out[i] = max(out[i], val)
    return out


def random_formula(rng, depth, horizon, value_scale=1.0, labels=(),
                   max_dist=2, positive_only=False):
    """Random AST of nesting depth <= depth and temporal depth <= horizon.

    ``positive_only`` restricts to operators under which signal atoms occur
    with positive polarity (used by the monotonicity property test).
    """

    def atom():
        if labels and not positive_only and rng.random() < 0.2:
            return AtomicLabel(str(rng.choice(labels)))
        direction = "greater" if positive_only or rng.random() < 0.5 \
            else "less"
        return AtomicCompare(direction, rng.normal(scale=value_scale))

    def build(d, budget):
        if d == 0:
            return atom()
        kinds = ["atom", "and", "or", "reach", "somewhere", "escape"]
        if not positive_only:
            kinds += ["implies", "not"]
        if budget > 0:
            kinds += ["eventually", "always"]
        kind = rng.choice(kinds)
        if kind == "atom":
            return atom()
        if kind == "not":
            return Not(build(d - 1, budget))
        if kind in ("and", "or", "implies"):
            cls = {"and": And, "or": Or, "implies": Implies}[kind]
            return cls(build(d - 1, budget), build(d - 1, budget))
        if kind in ("eventually", "always"):
            hi = int(rng.integers(1, budget + 1))
            lo = int(rng.integers(0, hi + 1))
            cls = Eventually if kind == "eventually" else Always
            return cls(lo, hi, build(d - 1, budget - hi))
        if kind == "reach":
            return Reach(build(d - 1, budget),
                         int(rng.integers(0, max_dist + 1)),
                         build(d - 1, budget))
        if kind == "escape":
            d_hi = int(rng.integers(0, max_dist + 1))
            d_lo = int(rng.integers(0, d_hi + 1))
            return Escape(d_lo, d_hi, build(d - 1, budget))
        return Somewhere(int(rng.integers(0, max_dist + 1)),
                         build(d - 1, budget))

    return build(depth, horizon)
