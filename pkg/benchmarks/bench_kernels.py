"""Time the trajectory kernel on both backends.

    python benchmarks/bench_kernels.py --n-traj 20000 --repeat 3

The numba timing excludes the first (compiling) call.  Both backends run the
same trajectories, so their outputs are also compared.
"""
import argparse
import time

import numpy as np

from spinteleport.montecarlo import HAVE_NUMBA, TrajectoryConfig, initial_factor, simulate_block
from spinteleport.states import ProtocolParams, make_coherent_state


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-traj", type=int, default=20_000)
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--t-max", type=float, default=10.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = ProtocolParams(cooperativity=100, squeezing_r=1.0, gain_g=1.0)
    means, factor = initial_factor(make_coherent_state(), params.squeezing_r)
    cfg = TrajectoryConfig(dt=args.dt, t_max=args.t_max, n_traj=args.n_traj)
    work = cfg.n_traj * cfg.n_steps
    print(f"{cfg.n_traj} trajectories x {cfg.n_steps} steps")

    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not HAVE_NUMBA:
            print("numba: unavailable")
            continue
        run = lambda: simulate_block(params, means, factor, cfg, backend=backend)  # noqa: E731
        if backend == "numba":
            t0 = time.perf_counter()
            simulate_block(params, means, factor, TrajectoryConfig(n_traj=2, t_max=1, dt=0.5), backend=backend)
            print(f"numba: compile/load {time.perf_counter() - t0:.2f} s")
        best, out = timed(run, args.repeat)
        results[backend] = (best, out)
        print(f"{backend:>6}: {best:8.3f} s   {1e9 * best / work:7.1f} ns per trajectory-step")

    if len(results) == 2:
        a, b = results["numba"][1], results["numpy"][1]
        print(f"speedup: {results['numpy'][0] / results['numba'][0]:.1f}x; "
              f"max |numba - numpy| = {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
