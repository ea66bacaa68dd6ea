"""Time the compiled kernel against the pure-Python fallback.

Usage: python benchmarks/bench_backends.py [--repeat N] [--skip-slow]

Each workload is solved on both backends with identical settings; the
script reports the best wall time over the repeats, the speedup and the
largest difference between the two final averages.
"""

import argparse
import time
import warnings

import numpy as np

from pata import _backend, solvers
from pata.problems import RandomFamilySpec, random_skew_rank_one, rotation2d
from pata.schedules import PowerLaw, PowerStep, Theorem3
from pata.solvers import SolverConfig


def workloads(skip_slow):
    yield ("table1 rotation2d", rotation2d(), solvers.pata_solve,
           dict(step_rule=PowerStep(0.5, 0.5), tikhonov=PowerLaw(1.0, 2.0), k_max=10 ** 6, tol=1e-3))
    yield ("certificate delta=.25", rotation2d(), solvers.pata_solve_certificate,
           dict(tikhonov=Theorem3(0.25), k_max=10 ** 6))
    n, k = (20, 5000) if skip_slow else (100, 50_000)
    yield (f"random n={n} k={k}", random_skew_rank_one(RandomFamilySpec(n, 0.1, 0)), solvers.pata_solve,
           dict(step_rule=PowerStep(1.0, 0.25), tikhonov=PowerLaw(1.0, 2.0), k_max=k, tol=1e-12,
                record_limit=200))


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-slow", action="store_true", help="shrink the random-family workload")
    args = ap.parse_args(argv)
    if not _backend.HAVE_COMPILED:
        print("compiled kernel unavailable; only the fallback can run")
        return 1
    warnings.simplefilter("ignore", RuntimeWarning)
    print(f"{'workload':<26}{'compiled s':>12}{'python s':>12}{'speedup':>10}{'max |dz|':>12}")
    for name, problem, solve, kw in workloads(args.skip_slow):
        tc, rc = best_time(lambda: solve(problem, SolverConfig(backend="compiled", **kw)), args.repeat)
        tp, rp = best_time(lambda: solve(problem, SolverConfig(backend="python", **kw)), 1)
        dz = float(np.max(np.abs(rc.final_z - rp.final_z)))
        print(f"{name:<26}{tc:>12.3f}{tp:>12.3f}{tp / tc:>9.1f}x{dz:>12.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
