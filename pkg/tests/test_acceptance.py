"""Acceptance criteria 1-9, one PASS/FAIL line each."""

import json
import math
import time

import numpy as np

from pata import _backend, checks, cli, core, merit, schedules, solvers
from pata.problems import rotation2d
from pata.schedules import PowerLaw, PowerStep, Theorem3
from pata.solvers import SolverConfig

TABLE1 = SolverConfig(step_rule=PowerStep(0.5, 0.5), tikhonov=PowerLaw(1.0, 2.0), k_max=10 ** 6, tol=1e-3)
_cache = {}


def _table1():
    if "t1" not in _cache:
        t0 = time.perf_counter()
        r = solvers.pata_solve(rotation2d(), TABLE1)
        _cache["t1"] = (r, time.perf_counter() - t0)
    return _cache["t1"]


def _named(crit, *names):
    return [c for c in crit if c[0] in names]


def test_criterion_1_table1_epsilon(verdict):
    r, elapsed = _table1()
    crit = _named(cli.table1_criteria(r.events, r, elapsed), "epsilon equals 1/i^2 at every event",
                  "epsilon rows 2,3,4,5,10 match to 5 decimals", "runtime under 2 minutes")
    ok = len(crit) == 3 and all(c[1] for c in crit) and [e.i for e in r.events] == list(range(1, 33))
    assert verdict(1, ok, f"{len(r.events)} events, eps = 1/i^2, printed rows match, {elapsed:.2f} s")


def test_criterion_2_table1_convergence(verdict):
    r, elapsed = _table1()
    crit = _named(cli.table1_criteria(r.events, r, elapsed), "terminates with epsilon <= 1e-3 before k_max",
                  "final |z| <= 2e-3", "|z| decreasing for i >= 3 (1.1 slack)")
    ok = len(crit) == 3 and all(c[1] for c in crit)
    fails = "; ".join(c[2] for c in crit if not c[1])
    assert verdict(2, ok, f"k={r.iterations}, final |z|={r.events[-1].z_norm:.3e}" + (f", {fails}" if fails else ""))


def test_criterion_3_divergent_y(verdict):
    # step the kernel one iteration at a time with the rotation-table outer logic
    p = rotation2d()
    rule, sched = TABLE1.step_rule, TABLE1.tikhonov
    kernel, _ = _backend.make_kernel(p, solvers.MODE_PRACTICAL, rule, 1, "auto")
    y = solvers.initial_point(p.set, "boundary-random", 42)
    z = y.copy()
    k, i, l, wsum = 0, 1, 0, 0.0
    kernel.set_tau(sched.tau(i))
    worst = abs(np.linalg.norm(y) - 1.0)
    while k < 100_000:
        k, wsum, status, _, _ = kernel.advance(y, z, k, k + 1, l, wsum, sched.epsilon(i))
        worst = max(worst, abs(np.linalg.norm(y) - 1.0))
        if status == solvers.STATUS_EVENT:
            i, l, wsum = i + 1, k, 0.0
            kernel.set_tau(sched.tau(i))
    ok = worst <= 1e-9 and k == 100_000
    assert verdict(3, ok, f"max | |y^k| - 1 | = {worst:.2e} over k <= {k} ({i - 1} restarts)")


def test_criterion_4_lemma1(verdict):
    (res,) = checks.run_all(["lemma1 sum bounds"])
    ok = res.ok and res.seconds < 5.0
    assert verdict(4, ok, f"{res.passed}/{res.total} bounds hold in {res.seconds:.2f} s" + (f", {res.failure}" if res.failure else ""))


def test_criterion_5_lemma2_prop3(verdict):
    res = checks.run_all(["lemma2 residual bound", "prop3 gap-residual"])
    ok = len(res) == 2 and all(r.ok for r in res)
    detail = ", ".join(f"{r.name} {r.passed}/{r.total}" for r in res)
    assert verdict(5, ok, detail + "".join(f" [{r.failure}]" for r in res if r.failure))


def test_criterion_6_prop1_at_events(verdict):
    r, _ = _table1()
    p = rotation2d()
    c = p.constants
    ys = p.set.sample(np.random.Generator(np.random.PCG64(6)), 1000)
    worst_up = worst_low = math.inf
    for e, w in zip(r.events, r.outer_points):
        gap = merit.subproblem_gap(p, e.tau, w)
        up = float(core.evaluate(p.upper, w) @ (0.0 - w)) + gap * e.tau
        low = float(np.min((ys - w) @ core.evaluate(p.lower, w))) + gap + c.H * c.D / e.tau
        worst_up, worst_low = min(worst_up, up), min(worst_low, low)
    ok = len(r.outer_points) == len(r.events) == 32 and worst_up >= -1e-9 and worst_low >= -1e-6
    assert verdict(6, ok, f"{len(r.events)} events, min upper slack {worst_up:.3e}, "
                          f"min lower slack {worst_low:.3e}")


def test_criterion_7_certificate(verdict):
    p = rotation2d()
    r = solvers.pata_solve_certificate(p, SolverConfig(tikhonov=Theorem3(0.25), k_max=10 ** 7))
    cert = r.certificate
    c = p.constants
    bound = schedules.complexity_bound_thm3(0.25, c.D, c.R, c.H)
    target = 1.0 / bound.I_bar_max ** 2
    ys = p.set.sample(np.random.Generator(np.random.PCG64(7)), 1000)
    phi = core.tikhonov_affine(p, cert["tau"])
    dual = np.einsum("ij,ij->i", ys @ phi.matrix.T + phi.offset, ys - r.final_z)
    ok = (r.termination == "certificate_reached" and cert["dual_gap_bound"] <= target
          and r.iterations <= bound.sigma_bar and cert["I_bar_max"] == bound.I_bar_max
          and dual.min() >= -target - 1e-6)
    assert verdict(7, ok, f"k={r.iterations} <= sigma={bound.sigma_bar}, bound {cert['dual_gap_bound']:.6g} "
                          f"<= {target:.6g}, min dual {dual.min():.3e}")


def test_criterion_8_comparison(verdict, tmp_path):
    t0 = time.perf_counter()
    rc = cli.main(["compare", "--out", str(tmp_path), "--jobs", "6", "--quiet"])
    elapsed = time.perf_counter() - t0
    s = json.loads((tmp_path / "summary.json").read_text())
    ok = rc == 0 and s["total_pairs"] == 6 and s["pata_wins"] >= 5 and elapsed < 600
    assert verdict(8, ok, f"PATA wins {s['pata_wins']}/{s['total_pairs']} pairs in {elapsed:.1f} s")


def test_criterion_9_check_suite(verdict):
    t0 = time.perf_counter()
    res = checks.run_all()
    elapsed = time.perf_counter() - t0
    bad = [r.name for r in res if not r.ok]
    ok = not bad and elapsed < 60
    assert verdict(9, ok, f"{len(res) - len(bad)}/{len(res)} checks green in {elapsed:.2f} s"
                          + (f", failing {bad}" if bad else ""))
