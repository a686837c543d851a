"""Numba vs pure-numpy tableau kernels.

Part 1 times the pivot kernel directly on random dense tableaus. Part 2
solves a small corpus end to end in two subprocesses, one with
CIRCUITAUG_NO_NUMBA=1, so the dispatch flag is honoured at import time.

    python benchmarks/bench_kernels.py [--reps 200] [--sizes 20,60,150]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from circuitaug import _kernels

E2E = r"""
import time
from circuitaug.lp_model import generate
from circuitaug.augment import solve_wallacher
insts = [generate(k, (6, 12), s) for k in ("generalized-flow", "random") for s in range(10)]
solve_wallacher(insts[0], insts[0].witness)  # warm-up (numba compile or cache load)
t = time.perf_counter()
for inst in insts:
    solve_wallacher(inst, inst.witness)
print(time.perf_counter() - t)
"""


def time_pivots(fn, size, reps, seed=0):
    rng = np.random.default_rng(seed)
    T0 = rng.standard_normal((size, 2 * size)) + 3.0
    fn(T0.copy(), 0, 0)  # compile outside the timed loop
    t = time.perf_counter()
    for k in range(reps):
        T = T0.copy()
        fn(T, k % size, (3 * k) % (2 * size))
    return (time.perf_counter() - t) / reps


def end_to_end(no_numba):
    env = dict(os.environ)
    if no_numba:
        env["CIRCUITAUG_NO_NUMBA"] = "1"
    else:
        env.pop("CIRCUITAUG_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--sizes", default="20,60,150")
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)

    if not _kernels.USE_NUMBA:
        print("numba disabled (CIRCUITAUG_NO_NUMBA set or numba missing); numpy timings only")
    print(f"{'rows':>6} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for size in (int(s) for s in args.sizes.split(",")):
        t_np = time_pivots(_kernels.pivot_numpy, size, args.reps)
        if _kernels.USE_NUMBA:
            t_nb = time_pivots(_kernels.pivot_numba, size, args.reps)
            print(f"{size:>6} {t_np * 1e6:>10.1f} {t_nb * 1e6:>10.1f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{size:>6} {t_np * 1e6:>10.1f} {'-':>10} {'-':>8}")

    if not args.skip_e2e:
        t_nb, t_np = end_to_end(False), end_to_end(True)
        print(f"wallacher corpus (20 instances): numba {t_nb:.3f}s  numpy {t_np:.3f}s  ratio {t_np / t_nb:.2f}")


if __name__ == "__main__":
    main()
