"""Instance generators: the 2-D rotation example and the skew + rank-one family."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import AffineMap, Ball, NestedVIProblem, make_problem, problem_from_dict

log = logging.getLogger(__name__)

__all__ = ["RandomFamilySpec", "rotation2d", "skew_antidiagonal", "random_skew_rank_one", "from_spec"]

ROTATION_G = np.array([[0.0, -0.5], [0.5, 0.0]])
ROTATION_F = np.array([[0.0, 1.0], [-1.0, 0.0]])


def rotation2d() -> NestedVIProblem:
    """Two skew maps on the unit disc; the only solution is the origin."""
    return make_problem(
        AffineMap.linear(ROTATION_G),
        AffineMap.linear(ROTATION_F),
        Ball.unit(2),
        known_solution=np.zeros(2),
        name="rotation2d",
    )


def skew_antidiagonal(v) -> np.ndarray:
    """Skew matrix with ``v`` on the upper anti-diagonal and ``-v`` mirrored below.

    For ``n = 2 * len(v)``, entry ``(j, n-1-j)`` is ``v[j]`` and entry
    ``(n-1-j, j)`` is ``-v[j]`` (0-based).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("v must be a vector")
    h = v.size
    n = 2 * h
    if n == 0:
        raise ValueError("v must be nonempty")
    m = np.zeros((n, n))
    j = np.arange(h)
    m[j, n - 1 - j] = v
    m[n - 1 - j, j] = -v
    return m


@dataclass(frozen=True)
class RandomFamilySpec:
    n: int
    zeta: float
    seed: int

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise ValueError("n must be a positive even integer")
        if self.zeta < 0:
            raise ValueError("zeta must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def random_skew_rank_one(spec: RandomFamilySpec) -> NestedVIProblem:
    """Skew anti-diagonal plus ``zeta * u (u + 0.01 w)^T`` for both maps.

    Draw order is fixed (G: v, u, w; F: v, u, w; then the G offset) and is
    part of the reproducibility contract.  Uniforms come from PCG64.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, h, zeta = spec.n, spec.n // 2, spec.zeta
    vG, uG, wG = rng.random(h), rng.random(n), rng.random(n)
    vF, uF, wF = rng.random(h), rng.random(n), rng.random(n)
    vb = rng.random(n)
    MG = skew_antidiagonal(vG) + zeta * np.outer(uG, uG + 0.01 * wG)
    MF = skew_antidiagonal(vF) + zeta * np.outer(uF, uF + 0.01 * wF)
    prob = make_problem(
        AffineMap(MG, zeta * vb),
        AffineMap(MF, np.zeros(n)),
        Ball.unit(n),
        name=f"random(n={n},zeta={zeta},seed={spec.seed})",
    )
    for key, d in prob.defects.items():
        if d < -1e-6:
            log.info("%s: map %s has monotonicity defect %.3e", prob.name, key, d)
    return prob


def from_spec(spec: dict) -> NestedVIProblem:
    """Build a problem from its config dictionary."""
    kind = spec.get("type")
    if kind == "rotation2d":
        return rotation2d()
    if kind == "random":
        return random_skew_rank_one(RandomFamilySpec(int(spec["n"]), float(spec["zeta"]), int(spec["seed"])))
    if kind == "inline":
        return problem_from_dict(spec["data"], name="inline")
    if kind == "file":
        import json

        with open(spec["path"]) as fh:
            return problem_from_dict(json.load(fh), name=str(spec["path"]))
    raise ValueError(f"unknown problem type {kind!r}")
