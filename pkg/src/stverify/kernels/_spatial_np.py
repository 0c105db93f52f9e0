"""NumPy implementation of the spatial fixpoint kernels.

Both kernels operate on (I, S) arrays whose columns are independent
problems (one per time step), in max-min algebra. Boolean monitoring uses
the same kernels on 0/1-valued arrays.
"""

import numpy as np

NEG_INF = -np.inf


def _neighbor_max(stacked, nbr_matrix):
    # stacked has a trailing sentinel row holding -inf
    return stacked[nbr_matrix].max(axis=1)


def reach_fixpoint(via, target, nbr_matrix, d):
    """Best max-min route value within d hops.

    Iterates ``D <- max(D, min(via, max_neighbor D))`` from ``D = target``;
    each column of the inputs is an independent field over locations.
    """
    out = np.asarray(target, dtype=np.float64).copy()
    if d == 0:
        return out
    via = np.asarray(via, dtype=np.float64)
    pad = np.full((1, out.shape[1]), NEG_INF)
    for _ in range(d):
        best = _neighbor_max(np.vstack([out, pad]), nbr_matrix)
        new = np.maximum(out, np.minimum(via, best))
        if np.array_equal(new, out):
            break
        out = new
    return out


def escape_fixpoint(values, nbr_matrix, hop_matrix, d_lo, d_hi):
    """Best max-min route value over routes ending in a hop-distance window.

    Computes pairwise route values e(i, j) by iterating
    ``e <- max(e, min(values_i, max_{k in N(i)} e(k, j)))`` from
    ``e(i, i) = values_i``, then maximises over destinations j with
    ``d_lo <= hop(i, j) <= d_hi``. Locations with no admissible
    destination get -inf.

    Memory is O(I^2 * S * max_degree) transiently; intended for the modest
    grids this package targets.
    """
    values = np.asarray(values, dtype=np.float64)
    n, s = values.shape
    e = np.full((n, n, s), NEG_INF)
    idx = np.arange(n)
    e[idx, idx, :] = values
    pad = np.full((1, n, s), NEG_INF)
    origin = values[:, None, :]
    for _ in range(n - 1):
        best = np.concatenate([e, pad], axis=0)[nbr_matrix].max(axis=1)
        new = np.maximum(e, np.minimum(origin, best))
        if np.array_equal(new, e):
            break
        e = new
    admissible = (hop_matrix >= 0) & (hop_matrix >= d_lo) & (hop_matrix <= d_hi)
    return np.where(admissible[:, :, None], e, NEG_INF).max(axis=1)
