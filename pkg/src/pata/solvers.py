"""Projected averaging Tikhonov solver, its fixed-tau certificate mode and a
non-averaging Tikhonov baseline.

All three share one driver: the inner recurrence runs in a kernel (compiled
when available, see :mod:`pata._backend`) that stops at outer events and at
trace sampling points; the driver owns the schedules, restarts and the trace.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _backend, core, merit
from ._fallback import MODE_ERGODIC, MODE_PLAIN, MODE_PRACTICAL, STATUS_EVENT, STATUS_NONFINITE
from .core import NestedVIProblem
from .schedules import (
    THEOREM_STEP,
    ConstantStep,
    PowerLaw,
    PowerStep,
    RecursiveStep,
    Theorem2,
    Theorem3,
    complexity_bound_thm3,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "SolveResult",
    "SolverError",
    "NonFiniteIterateError",
    "pata_solve",
    "pata_solve_certificate",
    "baseline_tikhonov_solve",
    "averaging_update",
    "initial_point",
    "normalization_scale",
]

MONOTONE_TOL = 1e-8
TRACE_COLUMNS = ("k", "i", "l", "tau", "epsilon", "gamma", "z_norm", "gap", "measure", "v_residual")


@dataclass(frozen=True)
class SolverConfig:
    step_rule: Union[PowerStep, RecursiveStep] = PowerStep(0.5, 0.5)
    tikhonov: Union[PowerLaw, Theorem2, Theorem3] = PowerLaw()
    k_max: int = 1_000_000
    tol: float = 1e-3
    initial: Union[str, Sequence[float]] = "boundary-random"
    seed: int = 42
    check_every: int = 1
    normalize_maps: bool = False
    record_limit: int = 10_000
    weighting: str = "practical"
    backend: str = "auto"

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")
        if self.record_limit < 1:
            raise ValueError("record_limit must be >= 1")
        if self.weighting not in ("practical", "ergodic"):
            raise ValueError("weighting must be 'practical' or 'ergodic'")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    i: int
    l: int
    tau: float
    epsilon: float
    gamma: float
    z_norm: float
    gap: float
    measure: float
    v_residual: float
    event: bool = False

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in TRACE_COLUMNS)


@dataclass
class SolveResult:
    final_z: np.ndarray
    final_w: np.ndarray
    trace: list
    termination: str
    outer_count: int
    iterations: int
    events: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    scale: float = 1.0
    backend: str = "python"
    certificate: Optional[dict] = None
    # w at every outer event, in event order
    outer_points: list = field(default_factory=list)

    @property
    def final_record(self) -> Optional[IterationRecord]:
        return self.trace[-1] if self.trace else None


class SolverError(RuntimeError):
    pass


class NonFiniteIterateError(SolverError):
    """Raised when an iterate becomes NaN/Inf; carries the last records."""

    def __init__(self, k, records, result):
        super().__init__(f"non-finite iterate at k={k}")
        self.k = k
        self.records = records
        self.result = result


def averaging_update(z, gamma_sum, gamma_next, y_next):
    """Fold ``y_next`` with weight ``gamma_next`` into the running average."""
    if gamma_sum < 0 or not gamma_next > 0:
        raise ValueError("need gamma_sum >= 0 and gamma_next > 0")
    z = np.asarray(z, dtype=np.float64)
    y_next = np.asarray(y_next, dtype=np.float64)
    total = gamma_sum + gamma_next
    return (z * gamma_sum + gamma_next * y_next) / total, total


def initial_point(set, initial="boundary-random", seed=42):
    """Starting point in ``set``.

    ``"boundary-random"`` draws a Gaussian direction from PCG64(seed) and
    pushes it to the boundary; a vector is projected onto the set.
    """
    if isinstance(initial, str):
        if initial not in ("boundary-random", "boundary_random"):
            raise ValueError(f"unknown initial point rule {initial!r}")
        rng = np.random.Generator(np.random.PCG64(seed))
        d = rng.standard_normal(set.n)
        d /= np.linalg.norm(d)
        if isinstance(set, core.Ball):
            return set.center + set.radius * d
        far = set.interior_point() + (2.0 * set.diameter() + 1.0) * d
        return set.project(far)
    return core.project(set, np.asarray(initial, dtype=np.float64))


def normalization_scale(problem: NestedVIProblem) -> float:
    """Factor that brings ``L_F + L_G`` below one (1.0 if already there)."""
    L = problem.constants.L_phi
    return 0.9 / L if L >= 1 else 1.0


def _prepare(problem, config):
    flags = list(problem.flags)
    for f in flags:
        warnings.warn(f"{problem.name}: {f} (defects {problem.defects})", RuntimeWarning, stacklevel=3)
    scale = 1.0
    if config.normalize_maps:
        scale = normalization_scale(problem)
        if scale != 1.0:
            problem = core.scale_problem(problem, scale)
    return problem, flags, scale


def _make_record(problem, k, i, l, tau, eps, g, z, gap, event):
    if gap is None or not math.isfinite(gap):
        gap = merit.subproblem_gap(problem, tau, z)
    return IterationRecord(
        k=int(k), i=int(i), l=int(l), tau=float(tau), epsilon=float(eps), gamma=float(g),
        z_norm=float(np.linalg.norm(z)), gap=float(gap),
        measure=merit.optimality_measure(gap, tau),
        v_residual=merit.natural_residual(problem.lower, problem.set, z),
        event=event,
    )


def _drive(prepared, config, observer, mode, rule, schedule, *, eps_fn=None, stop_at=None):
    """Shared outer loop over a ``_prepare``d problem.

    ``schedule`` supplies ``tau(i)``/``epsilon(i)``; with ``eps_fn`` the gap
    test is disabled and ``eps_fn(k)`` only fills the epsilon column, and
    ``stop_at`` ends the run (certificate mode).
    """
    problem, flags, scale = prepared
    kernel, backend = _backend.make_kernel(problem, mode, rule, config.check_every, config.backend)
    y = initial_point(problem.set, config.initial, config.seed)
    z = y.copy()
    w_last = y.copy()
    wsum = rule(0) if mode == MODE_ERGODIC else 0.0
    k, i, l = 0, 1, 0
    k_max = config.k_max if stop_at is None else min(config.k_max, stop_at)
    stride = max(1, math.ceil(config.k_max / config.record_limit))
    trace, events, points = [], [], []
    termination = "k_max_reached"
    table_len = 0
    g = rule(1)

    def emit(rec):
        trace.append(rec)
        if observer is not None:
            observer(rec)

    tau = schedule.tau(i)
    kernel.set_tau(tau)
    while k < k_max:
        eps = schedule.epsilon(i)
        next_rec = (k // stride + 1) * stride
        k_stop = min(next_rec, k_max)
        if isinstance(rule, RecursiveStep) and k_stop - l + 1 > table_len:
            table_len = max(2 * table_len, k_stop - l + 1)
            kernel.set_table(rule.values(table_len))
        k, wsum, status, gap, g = kernel.advance(y, z, k, k_stop, l, wsum, -1.0 if eps_fn else eps)
        if status == STATUS_NONFINITE:
            partial = SolveResult(z.copy(), w_last, trace, "non_finite", len(events), k, events,
                                  flags, scale, backend, outer_points=points)
            raise NonFiniteIterateError(k, trace[-10:], partial)
        if status == STATUS_EVENT:
            rec = _make_record(problem, k, i, l, tau, eps, g, z, gap, True)
            events.append(rec)
            emit(rec)
            w_last = z.copy()
            points.append(w_last)
            if eps <= config.tol:
                termination = "tol_reached"
                break
            i, l = i + 1, k
            tau = schedule.tau(i)
            kernel.set_tau(tau)
            if mode == MODE_PRACTICAL:
                wsum = 0.0
            elif mode == MODE_ERGODIC:
                z[:] = y
                wsum = rule(0)
            continue
        if k == next_rec or k == k_max:
            e = eps_fn(k) if eps_fn else eps
            emit(_make_record(problem, k, i, l, tau, e, g, z, None, False))
    if stop_at is not None and k == stop_at:
        termination = "certificate_reached"
    return SolveResult(
        final_z=z.copy(), final_w=w_last, trace=trace, termination=termination,
        outer_count=len(events), iterations=k, events=events, flags=flags,
        scale=scale, backend=backend, outer_points=points,
    ), problem


def pata_solve(problem: NestedVIProblem, config: SolverConfig = SolverConfig(),
               observer: Optional[Callable[[IterationRecord], None]] = None) -> SolveResult:
    """Run the averaging Tikhonov scheme until ``eps <= tol`` at an outer event."""
    if isinstance(config.tikhonov, Theorem3):
        return pata_solve_certificate(problem, config, observer)
    mode = MODE_PRACTICAL if config.weighting == "practical" else MODE_ERGODIC
    result, _ = _drive(_prepare(problem, config), config, observer, mode,
                       config.step_rule, config.tikhonov)
    return result


def certificate_length(D, R, H, rule, target, k_max):
    """Smallest ``k <= k_max`` whose dual-gap certificate is ``<= target``, else None."""
    chunk = 1 << 16
    s1 = s2 = 0.0
    start = 0
    while start <= k_max:
        stop = min(start + chunk, k_max + 1)
        g = rule.values(stop)[start:]
        c1 = s1 + np.cumsum(g)
        c2 = s2 + np.cumsum(g * g)
        bound = (D * D + c2 * (R + H) ** 2) / (2 * c1)
        idx = np.arange(start, stop)
        hit = np.nonzero((bound <= target) & (idx >= 1))[0]
        if hit.size:
            k = int(idx[hit[0]])
            # settle against the exactly summed value
            while k > 1 and merit.dual_gap_bound(k - 1, D, R, H, rule) <= target:
                k -= 1
            while merit.dual_gap_bound(k, D, R, H, rule) > target:
                k += 1
            return k if k <= k_max else None
        s1, s2 = c1[-1], c2[-1]
        start = stop
    return None


def pata_solve_certificate(problem: NestedVIProblem, config: SolverConfig,
                           observer: Optional[Callable[[IterationRecord], None]] = None) -> SolveResult:
    """Fixed ``tau = I`` with ``I = ceil((H+1)/delta)``; stop once the dual-gap
    certificate drops to ``I**-2``.

    Uses the ergodic average (each point weighted by the step taken from
    it), which is the average the certificate is valid for, and the step
    rule ``min(1, 1/(2 sqrt(k)))`` regardless of ``config.step_rule``.
    """
    sched = config.tikhonov
    if not isinstance(sched, Theorem3):
        raise ValueError("certificate mode needs a Theorem3 schedule")
    prepared = _prepare(problem, config)
    work, _, scale = prepared
    c = work.constants
    I_bar, sigma_bar = complexity_bound_thm3(sched.delta, c.D, c.R, c.H, sched.eta)
    tau = float(I_bar)
    target = 1.0 / I_bar ** 2
    rule = THEOREM_STEP
    K = certificate_length(c.D, c.R, c.H, rule, target, config.k_max)

    class _Fixed:
        def tau(self, i):
            return tau

        def epsilon(self, i):
            return 0.0

    g = rule.values((K or config.k_max) + 1)
    s1, s2 = np.cumsum(g), np.cumsum(g * g)

    def eps_fn(k):
        return float((c.D ** 2 + s2[k] * (c.R + c.H) ** 2) / (2 * s1[k]))

    result, _ = _drive(prepared, config, observer, MODE_ERGODIC, rule, _Fixed(), eps_fn=eps_fn, stop_at=K)
    bound = merit.dual_gap_bound(result.iterations, c.D, c.R, c.H, rule)
    result.certificate = {
        "I_bar_max": I_bar,
        "sigma_bar": sigma_bar,
        "tau": tau,
        "target": target,
        "dual_gap_bound": bound,
        "errors": merit.translate_errors_dual(bound, tau, c.H, c.D),
    }
    return result


def baseline_tikhonov_solve(problem: NestedVIProblem, config: SolverConfig = SolverConfig(),
                            lam: float = 0.1,
                            observer: Optional[Callable[[IterationRecord], None]] = None) -> SolveResult:
    """Plain projected Tikhonov steps with fixed step ``lam`` and no averaging.

    The outer test is applied to the current iterate itself, with the same
    schedules and trace columns as :func:`pata_solve`.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if isinstance(config.tikhonov, Theorem3):
        raise ValueError("the baseline needs an increasing-tau schedule")
    result, _ = _drive(_prepare(problem, config), config, observer, MODE_PLAIN,
                       ConstantStep(lam), config.tikhonov)
    return result
