"""Step sizes, Tikhonov schedules, step-sum bounds and complexity counts."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "PowerStep",
    "RecursiveStep",
    "ConstantStep",
    "PowerLaw",
    "Theorem2",
    "Theorem3",
    "gamma",
    "gamma_sum_lower_bound",
    "gamma_sq_sum_upper_bound",
    "admissibility_check",
    "complexity_bound_thm2",
    "complexity_bound_thm3",
    "C1",
    "C2",
    "THEOREM_STEP",
]

DEFAULT_ETA = 0.01


@dataclass(frozen=True)
class PowerStep:
    """``gamma_k = min(1, a / k**alpha)``, with ``gamma_0 = 1``."""

    a: float
    alpha: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def __call__(self, k: int) -> float:
        if k < 0:
            raise ValueError("step index must be nonnegative")
        if k == 0:
            return 1.0
        return min(1.0, self.a / k ** self.alpha)

    def values(self, stop: int) -> np.ndarray:
        """``gamma_0 .. gamma_{stop-1}`` as an array (for summation checks)."""
        k = np.arange(stop, dtype=np.float64)
        out = np.ones(stop)
        out[1:] = np.minimum(1.0, self.a / k[1:] ** self.alpha)
        return out


@dataclass(frozen=True)
class RecursiveStep:
    """``gamma_k = gamma_{k-1} (1 - theta gamma_{k-1})`` from ``gamma0``."""

    gamma0: float
    theta: float
    _memo: list = field(default_factory=list, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.gamma0 <= 1:
            raise ValueError("gamma0 must lie in (0, 1]")
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")

    def _extend(self, stop: int):
        with self._lock:
            memo = self._memo
            if not memo:
                memo.append(float(self.gamma0))
            g = memo[-1]
            th = self.theta
            for _ in range(len(memo), stop):
                g = g * (1.0 - th * g)
                memo.append(g)

    def __call__(self, k: int) -> float:
        if k < 0:
            raise ValueError("step index must be nonnegative")
        if k >= len(self._memo):
            self._extend(k + 1)
        return self._memo[k]

    def values(self, stop: int) -> np.ndarray:
        if stop > len(self._memo):
            self._extend(stop)
        return np.asarray(self._memo[:stop])

    def __getstate__(self):
        return {"gamma0": self.gamma0, "theta": self.theta}

    def __setstate__(self, state):
        object.__setattr__(self, "gamma0", state["gamma0"])
        object.__setattr__(self, "theta", state["theta"])
        object.__setattr__(self, "_memo", [])
        object.__setattr__(self, "_lock", threading.Lock())


@dataclass(frozen=True)
class ConstantStep:
    """Fixed step ``lam`` (used by the non-averaging baseline)."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("step must be positive")

    def __call__(self, k: int) -> float:
        return float(self.lam)

    def values(self, stop: int) -> np.ndarray:
        return np.full(stop, float(self.lam))


StepSizeRule = Union[PowerStep, RecursiveStep, ConstantStep]

# step rule prescribed by both complexity theorems
THEOREM_STEP = PowerStep(0.5, 0.5)


def gamma(rule: StepSizeRule, k: int) -> float:
    return rule(k)


@dataclass(frozen=True)
class PowerLaw:
    """``tau_i = max(1, slope * i)`` and ``eps_i = c / tau_i**beta``."""

    c: float = 1.0
    beta: float = 2.0
    slope: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")
        if not self.slope > 0:
            raise ValueError("slope must be positive")

    def tau(self, i: int) -> float:
        return max(1.0, i * self.slope)

    def epsilon(self, i: int) -> float:
        return self.c / self.tau(i) ** self.beta


@dataclass(frozen=True)
class Theorem2:
    """``tau_i = max(1, i)``, ``eps_i = 1 / tau_i**2``."""

    def tau(self, i: int) -> float:
        return float(max(1, i))

    def epsilon(self, i: int) -> float:
        return 1.0 / self.tau(i) ** 2


@dataclass(frozen=True)
class Theorem3:
    """Fixed ``tau``; termination is driven by the dual-gap certificate."""

    delta: float
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.eta < 0.5:
            raise ValueError("eta must lie in (0, 0.5)")


TikhonovSchedule = Union[PowerLaw, Theorem2, Theorem3]


def _cutoff(a, alpha):
    return math.ceil(a ** (1.0 / alpha))


def gamma_sum_lower_bound(a: float, alpha: float, K: int) -> float:
    """Lower bound on ``sum_{k=0}^K min(1, a/k^alpha)``."""
    if not a > 0 or not 0 < alpha <= 1:
        raise ValueError("need a > 0 and alpha in (0, 1]")
    c = _cutoff(a, alpha)
    if K < c:
        raise ValueError(f"K must be at least {c}")
    if alpha == 1:
        return c + a * math.log((K + 1) / c)
    return c + a / (1 - alpha) * ((K + 1) ** (1 - alpha) - c ** (1 - alpha))


def gamma_sq_sum_upper_bound(a: float, alpha: float, K: int) -> float:
    """Upper bound on ``sum_{k=0}^K min(1, a/k^alpha)**2``."""
    if not a > 0 or not 0 < alpha <= 1:
        raise ValueError("need a > 0 and alpha in (0, 1]")
    c = _cutoff(a, alpha)
    if K < c + 1:
        raise ValueError(f"K must be at least {c + 1}")
    head = c + a * a / c ** (2 * alpha)
    if alpha == 0.5:
        return head + a * a * math.log(K / c)
    return head + a * a / (1 - 2 * alpha) * (K ** (1 - 2 * alpha) - c ** (1 - 2 * alpha))


class Admissibility(NamedTuple):
    sum_estimate: float
    ratio_estimate: float
    sum_previous: float
    ratio_previous: float
    admissible: bool


def admissibility_check(rule: StepSizeRule, K_probe: int) -> Admissibility:
    """Probe the divergence conditions by partial sums at ``K`` and ``K/10``."""
    if K_probe < 1000:
        raise ValueError("K_probe must be at least 1000")
    g = rule.values(K_probe + 1)
    s1 = np.cumsum(g)
    s2 = np.cumsum(g * g)
    k0 = K_probe // 10
    rho, rho0 = s2[K_probe] / s1[K_probe], s2[k0] / s1[k0]
    # relative margin so a flat ratio is not called decreasing by rounding
    ok = bool(s1[K_probe] > s1[k0] and rho < rho0 * (1 - 1e-9))
    return Admissibility(float(s1[K_probe]), float(rho), float(s1[k0]), float(rho0), ok)


def C1(D, R, H) -> float:
    return (D * D + 1.25 * (R + H) ** 2) ** 2


def C2(R, H, eta=DEFAULT_ETA) -> float:
    return ((R + H) ** 2 / (4 * eta)) ** (2 / (1 - 2 * eta))


def _ceil(x: float):
    return math.ceil(x) if math.isfinite(x) else math.inf


class Thm2Bound(NamedTuple):
    I_max: int
    sigma: float


class Thm3Bound(NamedTuple):
    I_bar_max: int
    sigma_bar: float


def complexity_bound_thm2(delta_up, delta_low_hat, D, R, H, L_phi, eta=DEFAULT_ETA) -> Thm2Bound:
    """Outer count and total iteration bound for the increasing-tau scheme.

    ``sigma`` is returned as an int when finite; it overflows to ``inf``
    for moderately small tolerances.
    """
    if not (0 < delta_up < 1 and 0 < delta_low_hat < 1):
        raise ValueError("tolerances must lie in (0, 1)")
    if not L_phi < 1:
        raise ValueError("L_phi must be below 1; normalize the maps first")
    if not 0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 0.5)")
    I = math.ceil(max(1 / delta_up, (H + 1) / delta_low_hat))
    p = 1 / (1 - 2 * eta)
    try:
        t1 = I ** 8 * (D + R) ** 4 / (1 - L_phi) ** 2 * C1(D, R, H)
        t2 = I ** (8 * p) * (D + R) ** (4 * p) / (1 - L_phi) ** (2 * p) * C2(R, H, eta)
    except OverflowError:
        return Thm2Bound(I, math.inf)
    return Thm2Bound(I, I * _ceil(max(t1, t2)))


def complexity_bound_thm3(delta, D, R, H, eta=DEFAULT_ETA) -> Thm3Bound:
    """Fixed-tau count: ``I = ceil((H+1)/delta)`` and the iteration bound."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 0.5)")
    I = math.ceil((H + 1) / delta)
    try:
        t1 = I ** 4 * C1(D, R, H)
        t2 = I ** (4 / (1 - 2 * eta)) * C2(R, H, eta)
    except OverflowError:
        return Thm3Bound(I, math.inf)
    return Thm3Bound(I, _ceil(max(t1, t2)))
