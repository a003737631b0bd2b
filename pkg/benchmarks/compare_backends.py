"""Time the compiled stepping kernel against the pure-numpy fallback.

Both backends integrate the same heterogeneous scenario; the script reports
wall time, steps per second, the speedup, and the worst final-state
disagreement between the two routes.

Usage:
    python3 benchmarks/compare_backends.py --n 10 --d 2 --t-end 2.0
"""

import argparse
import time

import numpy as np

from spheresync import EnsembleState, IntegratorConfig, ModelParams, simulate
from spheresync import backend as backend_mod
from spheresync import integrator as integrator_mod
from spheresync.linalg import random_skew_hermitian, random_unit_vector


def build_scenario(n, d, seed):
    rng = np.random.default_rng(seed)
    omegas = np.stack([random_skew_hermitian(rng, d, 1.0) for _ in range(n)])
    p = ModelParams(N=n, d=d, m=0.5, gamma=1.0, kappa0=1.0, kappa1=0.2,
                    omegas=omegas)
    z = np.stack([random_unit_vector(rng, d) for _ in range(n)])
    w = np.einsum("jab,jb->ja", omegas, z) / p.gamma
    return p, EnsembleState(0.0, z, w)


def time_backend(name, p, s0, cfg, model, repeats):
    kern = backend_mod.get_kernel(name)
    saved = integrator_mod.kernel
    integrator_mod.kernel = kern
    try:
        best, traj = None, None
        for _ in range(repeats):
            t0 = time.perf_counter()
            traj = simulate(p, s0, cfg, model)
            dt_wall = time.perf_counter() - t0
            best = dt_wall if best is None else min(best, dt_wall)
    finally:
        integrator_mod.kernel = saved
    return best, traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10, help="ensemble size")
    ap.add_argument("--d", type=int, default=2, help="sphere dimension")
    ap.add_argument("--t-end", type=float, default=2.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--model", default="second_order",
                    choices=["second_order", "first_order"])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p, s0 = build_scenario(args.n, args.d, args.seed)
    cfg = IntegratorConfig(t_end=args.t_end, dt=args.dt,
                           observe_every=max(1, int(round(args.t_end / args.dt)) // 100))
    steps = int(round(args.t_end / args.dt))

    names = ["python"]
    try:
        backend_mod.get_kernel("compiled")
        names.append("compiled")
    except ImportError:
        print("compiled kernel not available; timing the python backend only")

    results = {}
    for name in names:
        wall, traj = time_backend(name, p, s0, cfg, args.model, args.repeats)
        results[name] = (wall, traj)
        print("%-9s %8.3f s   %10.0f steps/s" % (name, wall, steps / wall))

    if len(results) == 2:
        speedup = results["python"][0] / results["compiled"][0]
        gap = np.max(np.abs(results["python"][1].Z[-1]
                            - results["compiled"][1].Z[-1]))
        print("speedup: %.1fx   final-state disagreement: %.3e" % (speedup, gap))


if __name__ == "__main__":
    main()
