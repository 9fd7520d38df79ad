"""Time one Monte Carlo path on the compiled and the numpy backends.

    python benchmarks/bench_kernels.py --cells 100 200 400 --repeat 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from skl import compiled_available
from skl.noise import path_seed, sample_path
from skl.scenarios import standard_data, standard_shared
from skl.solver import prepare, run_problem


def bench(n_cells: int, repeat: int, backend: str) -> tuple[float, np.ndarray]:
    shared = standard_shared(n_cells=n_cells)
    data = standard_data(shared)
    prob = prepare(shared.grid, shared.cfg, data.u0, data.b, shared.flux, shared.noise)
    path = sample_path(path_seed(0, 0), prob.n_steps, prob.dt, prob.cfg.K)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = run_problem(prob, path, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, traj.u


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cells", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not compiled_available():
        raise SystemExit("compiled extension not built; reinstall without SKL_NO_EXT")
    print(f"{'cells':>6} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8} {'max |du|':>10}")
    for n in args.cells:
        tc, uc = bench(n, args.repeat, "compiled")
        tp, up = bench(n, args.repeat, "python")
        print(f"{n:>6} {tc:>13.4f} {tp:>11.4f} {tp / tc:>8.1f} {np.max(np.abs(uc - up)):>10.2e}")


if __name__ == "__main__":
    main()
