"""Merit functions, natural residuals and accuracy translations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from .core import MEMBERSHIP_TOL, NestedVIProblem

__all__ = [
    "ErrorBundle",
    "subproblem_gap",
    "natural_residual",
    "translate_errors",
    "translate_errors_dual",
    "dual_gap_bound",
    "residual_from_gap",
    "gap_from_residual",
    "optimality_measure",
    "optimality_measure_hd",
    "lower_level_residual_bound",
]


@dataclass(frozen=True)
class ErrorBundle:
    eps_sub: float
    eps_up: float
    eps_low: float
    eps_low_hat: float

    def __post_init__(self):
        vals = (self.eps_sub, self.eps_up, self.eps_low, self.eps_low_hat)
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise ValueError("error bounds must be finite and nonnegative")


def _member(set, z):
    """Return ``z`` re-projected, or raise if it is too far outside ``set``."""
    z = np.asarray(z, dtype=np.float64)
    p = core.project(set, z)
    if np.linalg.norm(p - z) > MEMBERSHIP_TOL:
        raise ValueError("point is not a member of the feasible set")
    return p


def subproblem_gap(problem: NestedVIProblem, tau: float, z) -> float:
    """``-min_{y in Y} Phi_tau(z)^T (y - z)``, evaluated exactly by the LMO."""
    z = _member(problem.set, z)
    phi = core.tikhonov_map(problem, tau, z)
    u = core.lmo(problem.set, phi)
    return float(-(phi @ (u - z)))


def natural_residual(map, set, x) -> float:
    """``|P(x - map(x)) - x|``; zero exactly at solutions of VI(map, set)."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.linalg.norm(core.project(set, x - core.evaluate(map, x)) - x))


def translate_errors(eps_sub: float, tau: float, H: float, D: float) -> ErrorBundle:
    """Nested-problem accuracies implied by an ``eps_sub``-solution of the subproblem."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if eps_sub < 0:
        raise ValueError("eps_sub must be nonnegative")
    return ErrorBundle(
        eps_sub=eps_sub,
        eps_up=eps_sub * tau,
        eps_low=eps_sub + H * D / tau,
        eps_low_hat=math.sqrt(eps_sub) + H / tau,
    )


def translate_errors_dual(eps_sub_dual: float, tau: float, H: float, D: float) -> ErrorBundle:
    """Dual (Minty) counterpart of :func:`translate_errors`; same algebra."""
    return translate_errors(eps_sub_dual, tau, H, D)


def dual_gap_bound(k: int, D: float, R: float, H: float, rule) -> float:
    """Dual-gap certificate after ``k`` steps of the ergodic average.

    Computed from the actual partial sums of ``rule``, not from the
    closed-form estimates.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = rule.values(k + 1)
    return float((D * D + math.fsum(g * g) * (R + H) ** 2) / (2 * math.fsum(g)))


def residual_from_gap(eps: float) -> float:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return math.sqrt(eps)


def gap_from_residual(eps_hat: float, Omega: float, Xi: float) -> float:
    if eps_hat < 0 or Omega < 0 or Xi < 0:
        raise ValueError("arguments must be nonnegative")
    return (Omega + Xi) * eps_hat


def optimality_measure(eps_sub_k: float, tau_k: float) -> float:
    """Benchmark merit ``max(eps*tau, eps + 1/tau)``."""
    if not tau_k > 0:
        raise ValueError("tau must be positive")
    return max(eps_sub_k * tau_k, eps_sub_k + 1.0 / tau_k)


def optimality_measure_hd(eps_sub_k: float, tau_k: float, H: float, D: float) -> float:
    """As :func:`optimality_measure` but with the ``H*D/tau`` feasibility term."""
    if not tau_k > 0:
        raise ValueError("tau must be positive")
    return max(eps_sub_k * tau_k, eps_sub_k + H * D / tau_k)


def lower_level_residual_bound(problem: NestedVIProblem, tau: float, z) -> float:
    """Right-hand side of ``V(z) <= |G(z)|/tau + |P(z - Phi_tau(z)) - z|``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    z = np.asarray(z, dtype=np.float64)
    g = core.evaluate(problem.upper, z)
    phi = core.tikhonov_map(problem, tau, z)
    return float(np.linalg.norm(g) / tau + np.linalg.norm(core.project(problem.set, z - phi) - z))
