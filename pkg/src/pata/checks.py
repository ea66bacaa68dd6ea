"""Property suites run by ``pata check``.

Every check samples its own points from a fixed PCG64 seed and returns a
:class:`CheckResult`; ``run_all`` runs them in order.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import core, merit, schedules, solvers
from .core import Ball, Box, Simplex
from .problems import RandomFamilySpec, random_skew_rank_one, rotation2d, skew_antidiagonal

TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: int
    total: int
    failure: Optional[str] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failure is None and self.passed == self.total


class _Tally:
    def __init__(self):
        self.passed = self.total = 0
        self.failure = None

    def add(self, ok, detail):
        self.total += 1
        if ok:
            self.passed += 1
        elif self.failure is None:
            self.failure = detail() if callable(detail) else detail


def _rng(tag):
    return np.random.Generator(np.random.PCG64(20240 + tag))


def _sets():
    r = _rng(0)
    return [
        Ball.unit(2),
        Ball(r.standard_normal(5), 1.7),
        Box(-np.ones(3), np.array([1.0, 2.0, 0.5])),
        Box(np.zeros(20), np.ones(20)),
        Simplex(4, 1.0),
        Simplex(20, 2.5),
    ]


def _outside(s, rng, m):
    """Points spread around the set, many of them well outside it."""
    c = s.interior_point()
    return c + (s.diameter() + 1.0) * rng.standard_normal((m, s.n))


def check_projection_idempotence():
    t, rng = _Tally(), _rng(1)
    for s in _sets():
        for x in _outside(s, rng, 200):
            p = s.project(x)
            pp = s.project(p)
            err = float(np.linalg.norm(pp - p))
            t.add(err <= TOL, lambda: f"{s!r}: |P(P(x)) - P(x)| = {err:.3e} at x={x.tolist()}")
    return t


def check_projection_characterization():
    # (x - P x)^T (y - P x) <= 0 for all y in the set
    t, rng = _Tally(), _rng(2)
    for s in _sets():
        xs = _outside(s, rng, 60)
        ys = s.sample(rng, 200)
        for x in xs:
            p = s.project(x)
            dist = float(np.linalg.norm(core.project(s, p) - p))
            # P x must itself lie in the set
            member = _is_member(s, p)
            vals = (ys - p) @ (x - p)
            worst = float(vals.max())
            scale = 1.0 + float(np.linalg.norm(x - p)) * s.diameter()
            ok = member and dist <= TOL and worst <= TOL * scale
            t.add(ok, lambda: f"{s!r}: x={x.tolist()} P(x)={p.tolist()} member={member} "
                              f"max (x-Px)^T(y-Px) = {worst:.3e}")
    return t


def _is_member(s, p):
    if isinstance(s, Ball):
        return float(np.linalg.norm(p - s.center)) <= s.radius + TOL
    if isinstance(s, Box):
        return bool(np.all(p >= s.lower - TOL) and np.all(p <= s.upper + TOL))
    return bool(np.all(p >= -TOL) and abs(p.sum() - s.scale) <= TOL * max(1.0, s.scale))


def check_projection_nonexpansive():
    t, rng = _Tally(), _rng(3)
    for s in _sets():
        a, b = _outside(s, rng, 200), _outside(s, rng, 200)
        for x, y in zip(a, b):
            lhs = float(np.linalg.norm(s.project(x) - s.project(y)))
            rhs = float(np.linalg.norm(x - y))
            t.add(lhs <= rhs + TOL, lambda: f"{s!r}: |Px - Py| = {lhs:.6e} > |x - y| = {rhs:.6e}")
    return t


def _grid_2d(s, m=2000):
    if isinstance(s, Ball):
        th = np.linspace(0, 2 * np.pi, m, endpoint=False)
        pts = s.center + s.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        return np.vstack([pts, s.center[None, :]])
    if isinstance(s, Box):
        g = np.linspace(0.0, 1.0, 60)
        u, v = np.meshgrid(g, g)
        uv = np.stack([u.ravel(), v.ravel()], axis=1)
        return s.lower + uv * (s.upper - s.lower)
    g = np.linspace(0.0, 1.0, m)
    return s.scale * np.stack([g, 1.0 - g], axis=1)


def check_lmo_bruteforce():
    # exact LMO against brute force over a fine discretization of 2-D sets,
    # and against sampled members in higher dimension
    t, rng = _Tally(), _rng(4)
    sets2 = [Ball.unit(2), Ball(np.array([0.3, -1.0]), 2.0), Box(np.array([-1.0, 0.0]), np.array([2.0, 0.5])),
             Simplex(2, 1.5)]
    for s in sets2:
        grid = _grid_2d(s)
        # worst-case discretization error of the grid minimum
        slack = s.diameter() * (2 * np.pi / 2000) ** 2 if isinstance(s, Ball) else 1e-12
        for _ in range(250):
            g = rng.standard_normal(2)
            u = s.lmo(g)
            val, best = float(g @ u), float((grid @ g).min())
            ok = _is_member(s, u) and val <= best + 1e-12 and val >= best - slack * np.linalg.norm(g) - 1e-12
            t.add(ok, lambda: f"{s!r}: g={g.tolist()} lmo value {val:.12e} vs grid min {best:.12e}")
    for s in _sets():
        ys = s.sample(rng, 1000)
        for _ in range(20):
            g = rng.standard_normal(s.n)
            val = float(g @ s.lmo(g))
            worst = float((ys @ g).min())
            t.add(val <= worst + 1e-12, lambda: f"{s!r}: sampled member beats lmo ({worst} < {val})")
    return t


def check_averaging_window():
    t, rng = _Tally(), _rng(5)
    m = 100
    for trial in range(20):
        ys = rng.standard_normal((m, 3))
        ws = rng.uniform(0.01, 1.0, m)
        z, wsum = np.zeros(3), 0.0
        for j in range(m):
            z, wsum = solvers.averaging_update(z, wsum, ws[j], ys[j])
            ref = (ws[: j + 1, None] * ys[: j + 1]).sum(axis=0) / ws[: j + 1].sum()
            err = float(np.abs(z - ref).max())
            t.add(err <= 1e-12, lambda: f"trial {trial}, update {j + 1}: deviation {err:.3e}")
    return t


def check_determinism():
    t = _Tally()
    cfg = solvers.SolverConfig(step_rule=schedules.PowerStep(1.0, 0.25), k_max=3000, record_limit=300)
    for make in (rotation2d, lambda: random_skew_rank_one(RandomFamilySpec(20, 0.1, 3))):
        p1, p2 = make(), make()
        same_problem = (np.array_equal(p1.upper.matrix, p2.upper.matrix)
                        and np.array_equal(p1.lower.matrix, p2.lower.matrix)
                        and np.array_equal(p1.upper.offset, p2.upper.offset))
        t.add(same_problem, f"{p1.name}: regenerated matrices differ")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            r1, r2 = solvers.pata_solve(p1, cfg), solvers.pata_solve(p2, cfg)
        rows1 = [r.row() for r in r1.trace]
        rows2 = [r.row() for r in r2.trace]
        t.add(rows1 == rows2 and np.array_equal(r1.final_z, r2.final_z),
              f"{p1.name}: reruns are not bit-identical")
    return t


def check_lemma1():
    t = _Tally()
    for a in (0.5, 1.0, 2.0):
        for alpha in (0.25, 0.5, 1.0):
            rule = schedules.PowerStep(a, alpha)
            g = rule.values(100_001)
            s1, s2 = np.cumsum(g), np.cumsum(g * g)
            for K in (100, 1000, 100_000):
                lo = schedules.gamma_sum_lower_bound(a, alpha, K)
                hi = schedules.gamma_sq_sum_upper_bound(a, alpha, K)
                t.add(lo <= s1[K], f"a={a} alpha={alpha} K={K}: sum {s1[K]:.10g} < lower bound {lo:.10g}")
                t.add(s2[K] <= hi, f"a={a} alpha={alpha} K={K}: sq sum {s2[K]:.10g} > upper bound {hi:.10g}")
    return t


def _instances():
    return [rotation2d(), random_skew_rank_one(RandomFamilySpec(10, 0.1, 11))]


def check_lemma2():
    t, rng = _Tally(), _rng(6)
    for prob in _instances():
        zs = Ball.unit(prob.n).sample(rng, 1000)
        for tau in (1.0, 10.0, 100.0):
            for z in zs:
                v = merit.natural_residual(prob.lower, prob.set, z)
                b = merit.lower_level_residual_bound(prob, tau, z)
                t.add(v <= b + TOL, lambda: f"{prob.name} tau={tau}: V(z)={v:.6e} > bound {b:.6e}")
    return t


def check_prop3():
    t, rng = _Tally(), _rng(7)
    for prob in _instances():
        zs = Ball.unit(prob.n).sample(rng, 1000)
        Omega = core.diameter(prob.set)
        for tau in (1.0, 10.0, 100.0):
            phi = core.tikhonov_affine(prob, tau)
            Xi = core.map_norm_bound(phi, prob.set)
            for z in zs:
                gap = merit.subproblem_gap(prob, tau, z)
                U = merit.natural_residual(phi, prob.set, z)
                t.add(U <= merit.residual_from_gap(max(gap, 0.0)) + TOL,
                      lambda: f"{prob.name} tau={tau}: U={U:.6e} > sqrt(gap)={math.sqrt(max(gap, 0)):.6e}")
                t.add(gap <= merit.gap_from_residual(U, Omega, Xi) + TOL,
                      lambda: f"{prob.name} tau={tau}: gap={gap:.6e} > (Omega+Xi)U={(Omega + Xi) * U:.6e}")
    return t


def check_gap_nonnegative():
    t, rng = _Tally(), _rng(8)
    for prob in _instances():
        for z in prob.set.sample(rng, 500):
            for tau in (1.0, 100.0):
                g = merit.subproblem_gap(prob, tau, z)
                t.add(g >= -1e-12, lambda: f"{prob.name}: negative gap {g:.3e}")
    return t


def check_skew_construction():
    t, rng = _Tally(), _rng(9)
    for n in (2, 4, 10, 100):
        M = skew_antidiagonal(rng.uniform(size=n // 2))
        t.add(np.array_equal(M, -M.T), f"n={n}: M + M^T != 0")
    return t


def check_schedules():
    t = _Tally()
    sched = schedules.PowerLaw(1.0, 2.0)
    prev_e, prev_t = math.inf, 0.0
    for i in range(1, 200):
        e, tau = sched.epsilon(i), sched.tau(i)
        t.add(e < prev_e and tau > prev_t, f"i={i}: schedule not strictly monotone")
        t.add(abs(e - 1.0 / i ** 2) <= 1e-15 / i ** 2, f"i={i}: epsilon != 1/i^2")
        prev_e, prev_t = e, tau
    return t


CHECKS: list[tuple[str, Callable[[], _Tally]]] = [
    ("projection idempotence", check_projection_idempotence),
    ("projection characterization", check_projection_characterization),
    ("projection nonexpansiveness", check_projection_nonexpansive),
    ("lmo optimality", check_lmo_bruteforce),
    ("averaging window", check_averaging_window),
    ("determinism", check_determinism),
    ("lemma1 sum bounds", check_lemma1),
    ("lemma2 residual bound", check_lemma2),
    ("prop3 gap-residual", check_prop3),
    ("gap nonnegativity", check_gap_nonnegative),
    ("skew construction", check_skew_construction),
    ("schedule monotonicity", check_schedules),
]


def run_all(names=None) -> list:
    out = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        t0 = time.perf_counter()
        try:
            tally = fn()
            res = CheckResult(name, tally.passed, tally.total, tally.failure)
        except Exception as exc:  # a crash counts as a failure of that check
            res = CheckResult(name, 0, 1, f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
