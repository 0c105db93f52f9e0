"""Timing comparison of the compiled and NumPy spatial kernels.

Run as ``python benchmarks/bench_kernels.py``. Exercises the two fixpoint
kernels directly on city-scale grids and the full monitor on an ensemble,
once per available backend.
"""

import time

import numpy as np

from stverify import monitor as monitor_module
from stverify.kernels import available_backends, get_backend
from stverify.monitor import monitor_ensemble
from stverify.properties import build_p1, build_p4
from stverify.spatial import StaticLabels, Trace, queen_adjacency


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_reach(impl, grid, n_cols, d):
    rng = np.random.default_rng(0)
    n = grid.n_locations
    via = rng.normal(size=(n, n_cols))
    target = rng.normal(size=(n, n_cols))
    return best_of(lambda: impl.reach_fixpoint(via, target,
                                               grid.neighbor_matrix, d))


def bench_escape(impl, grid, n_cols, d_lo, d_hi):
    rng = np.random.default_rng(0)
    values = rng.normal(size=(grid.n_locations, n_cols))
    return best_of(lambda: impl.escape_fixpoint(
        values, grid.neighbor_matrix, grid.hop_matrix, d_lo, d_hi),
        repeats=3)


def bench_monitor(backend_name, grid, labels, traces, phi):
    impl = get_backend(backend_name)
    saved = (monitor_module.reach_fixpoint, monitor_module.escape_fixpoint)
    monitor_module.reach_fixpoint = impl.reach_fixpoint
    monitor_module.escape_fixpoint = impl.escape_fixpoint
    try:
        return best_of(lambda: monitor_ensemble(phi, traces, grid, labels,
                                                mode="robustness"),
                       repeats=3)
    finally:
        monitor_module.reach_fixpoint = saved[0]
        monitor_module.escape_fixpoint = saved[1]


def main():
    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    rows = []

    city = queen_adjacency(21, 21)
    for d in (1, 4):
        times = {b: bench_reach(get_backend(b), city, 8, d)
                 for b in backends}
        rows.append((f"reach 21x21 grid, 8 columns, d={d}", times))

    mid = queen_adjacency(12, 12)
    times = {b: bench_escape(get_backend(b), mid, 4, 0, 3)
             for b in backends}
    rows.append(("escape 12x12 grid, 4 columns, d in [0,3]", times))

    rng = np.random.default_rng(7)
    labels = StaticLabels({"hospital": [100, 220, 340]})
    traces = [Trace(rng.uniform(100, 900, size=(441, 5)))
              for _ in range(100)]
    for name, phi in (("P1 (temporal only)", build_p1(500.0, 3)),
                      ("P4 (nested spatial)", build_p4(500.0, 4))):
        times = {b: bench_monitor(b, city, labels, traces, phi)
                 for b in backends}
        rows.append((f"monitor {name}, M=100, 21x21", times))

    width = max(len(r[0]) for r in rows)
    header = f"{'case':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for name, times in rows:
        line = f"{name:<{width}}  " + "  ".join(
            f"{times[b] * 1e3:>8.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"  {times['numpy'] / times['cython']:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
