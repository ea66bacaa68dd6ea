"""Problem data: affine maps, feasible sets, projections and linear oracles.

A nested VI is described by an upper-level map ``G``, a lower-level map
``F`` and a compact convex set ``Y``.  Everything here is immutable and
pure, so problems can be shared freely between worker processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
from scipy.sparse.linalg import eigsh

__all__ = [
    "AffineMap",
    "Ball",
    "Box",
    "Simplex",
    "Constants",
    "NestedVIProblem",
    "evaluate",
    "tikhonov_map",
    "tikhonov_affine",
    "project",
    "lmo",
    "diameter",
    "map_norm_bound",
    "spectral_norm",
    "monotonicity_defect",
    "make_problem",
    "scale_problem",
    "problem_to_dict",
    "problem_from_dict",
    "dumps",
]

MEMBERSHIP_TOL = 1e-9
_EIGH_MAX_N = 200


def _vector(x, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D vector")
    return x


def _check_dim(n, x, what="x"):
    if x.shape != (n,):
        raise ValueError(f"dimension mismatch: expected {what} of length {n}, got {x.shape}")


@dataclass(frozen=True, eq=False)
class AffineMap:
    """The map ``x -> matrix @ x + offset`` on R^n."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("matrix must be square and nonempty")
        b = _vector(self.offset, "offset")
        _check_dim(m.shape[0], b, "offset")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(b))):
            raise ValueError("map entries must be finite")
        m.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    @classmethod
    def linear(cls, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix, np.zeros(matrix.shape[0]))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ x + self.offset

    def scaled(self, s: float) -> "AffineMap":
        return AffineMap(s * self.matrix, s * self.offset)


# A user map is either affine or any callable R^n -> R^n.
Map = Union[AffineMap, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = _vector(self.center, "center")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive and finite")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, n: int) -> "Ball":
        return cls(np.zeros(n), 1.0)

    @property
    def n(self) -> int:
        return self.center.size

    def project(self, x):
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd > self.radius:
            return self.center + (self.radius / nd) * d
        return np.array(x, dtype=np.float64)

    def lmo(self, g):
        ng = np.linalg.norm(g)
        if ng == 0.0:
            return self.center.copy()
        return self.center - (self.radius / ng) * g

    def diameter(self) -> float:
        return 2.0 * self.radius

    def max_norm(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def interior_point(self):
        return self.center.copy()

    def sample(self, rng, size):
        d = rng.standard_normal((size, self.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.random(size) ** (1.0 / self.n)
        return self.center + r[:, None] * d


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _vector(self.lower, "lower")
        hi = _vector(self.upper, "upper")
        _check_dim(lo.size, hi, "upper")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self) -> int:
        return self.lower.size

    def project(self, x):
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def lmo(self, g):
        # ties (g_j == 0) go to the lower bound
        return np.where(g < 0, self.upper, self.lower)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def max_norm(self) -> float:
        return float(np.linalg.norm(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def interior_point(self):
        return 0.5 * (self.lower + self.upper)

    def sample(self, rng, size):
        return self.lower + rng.random((size, self.n)) * (self.upper - self.lower)


def project_simplex(x, scale=1.0):
    """Sort-based Euclidean projection onto ``{y >= 0, sum(y) = scale}``."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - scale
    ind = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(x - theta, 0.0)


@dataclass(frozen=True, eq=False)
class Simplex:
    n_dim: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.n_dim) < 1:
            raise ValueError("simplex dimension must be >= 1")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("simplex scale must be positive and finite")
        object.__setattr__(self, "n_dim", int(self.n_dim))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def n(self) -> int:
        return self.n_dim

    def project(self, x):
        return project_simplex(x, self.scale)

    def lmo(self, g):
        y = np.zeros(self.n)
        y[int(np.argmin(g))] = self.scale  # argmin returns the lowest index on ties
        return y

    def diameter(self) -> float:
        return self.scale * math.sqrt(2.0) if self.n > 1 else 0.0

    def max_norm(self) -> float:
        return self.scale

    def interior_point(self):
        return np.full(self.n, self.scale / self.n)

    def sample(self, rng, size):
        return self.scale * rng.dirichlet(np.ones(self.n), size)


FeasibleSet = Union[Ball, Box, Simplex]


@dataclass(frozen=True)
class Constants:
    """Upper bounds used by every error translation.

    ``H`` and ``R`` bound ``|G|`` and ``|F|`` over the set, ``D`` is its
    diameter; ``L_F`` and ``L_G`` are Lipschitz constants.
    """

    H: float
    R: float
    D: float
    L_F: float
    L_G: float

    @property
    def L_phi(self) -> float:
        return self.L_F + self.L_G


@dataclass(frozen=True, eq=False)
class NestedVIProblem:
    upper: Map
    lower: Map
    set: FeasibleSet
    constants: Constants
    known_solution: np.ndarray | None = None
    defects: dict = field(default_factory=dict)
    name: str = "custom"

    @property
    def n(self) -> int:
        return self.set.n

    @property
    def is_affine(self) -> bool:
        return isinstance(self.upper, AffineMap) and isinstance(self.lower, AffineMap)

    @property
    def flags(self) -> list:
        return [f"{k}_not_monotone" for k, v in self.defects.items() if v < -1e-8]


def evaluate(map: Map, x):
    x = _vector(x)
    if isinstance(map, AffineMap):
        _check_dim(map.n, x)
    return np.asarray(map(x), dtype=np.float64)


def tikhonov_map(problem: NestedVIProblem, tau: float, x):
    """Return ``F(x) + G(x) / tau``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return evaluate(problem.lower, x) + evaluate(problem.upper, x) / tau


def tikhonov_affine(problem: NestedVIProblem, tau: float) -> AffineMap:
    """The regularized map as a single affine map (affine problems only)."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if not problem.is_affine:
        raise TypeError("tikhonov_affine requires affine maps")
    F, G = problem.lower, problem.upper
    return AffineMap(F.matrix + G.matrix / tau, F.offset + G.offset / tau)


def project(set: FeasibleSet, x):
    x = _vector(x)
    _check_dim(set.n, x)
    return set.project(x)


def lmo(set: FeasibleSet, g):
    g = _vector(g, "g")
    _check_dim(set.n, g, "g")
    return set.lmo(g)


def diameter(set: FeasibleSet) -> float:
    return set.diameter()


def spectral_norm(matrix) -> float:
    """Largest singular value (exact, via LAPACK SVD)."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("spectral_norm expects a square matrix")
    return float(np.linalg.norm(a, 2))


def map_norm_bound(map: AffineMap, set: FeasibleSet) -> float:
    """Cheap upper bound on ``max_{y in set} |map(y)|``."""
    _check_dim(set.n, map.offset, "map")
    sigma = spectral_norm(map.matrix)
    if isinstance(set, Ball):
        return float(np.linalg.norm(map(set.center))) + set.radius * sigma
    return sigma * set.max_norm() + float(np.linalg.norm(map.offset))


def monotonicity_defect(map: AffineMap) -> float:
    """Smallest eigenvalue of the symmetric part of the matrix.

    A value ``>= -tol`` certifies monotonicity up to ``tol``.
    """
    m = map.matrix if isinstance(map, AffineMap) else np.asarray(map, dtype=np.float64)
    sym = 0.5 * (m + m.T)
    if sym.shape[0] <= _EIGH_MAX_N:
        return float(np.linalg.eigvalsh(sym)[0])
    v0 = np.full(sym.shape[0], 1.0)
    return float(eigsh(sym, k=1, which="SA", v0=v0, return_eigenvectors=False)[0])


def _lipschitz(map) -> float:
    if isinstance(map, AffineMap):
        return spectral_norm(map.matrix)
    return float(getattr(map, "lipschitz", math.nan))


def make_problem(upper: Map, lower: Map, set: FeasibleSet, *, constants=None,
                 known_solution=None, name="custom") -> NestedVIProblem:
    """Assemble a problem and compute H, R, D, L_F, L_G and defects.

    For non-affine maps the caller must pass ``constants``.
    """
    for m in (upper, lower):
        if isinstance(m, AffineMap) and m.n != set.n:
            raise ValueError("map and set dimensions disagree")
    defects = {}
    if constants is None:
        if not (isinstance(upper, AffineMap) and isinstance(lower, AffineMap)):
            raise ValueError("constants are required for non-affine maps")
        constants = Constants(
            H=map_norm_bound(upper, set),
            R=map_norm_bound(lower, set),
            D=diameter(set),
            L_F=_lipschitz(lower),
            L_G=_lipschitz(upper),
        )
    for key, m in (("G", upper), ("F", lower)):
        if isinstance(m, AffineMap):
            defects[key] = monotonicity_defect(m)
    if known_solution is not None:
        known_solution = _vector(known_solution, "known_solution")
    return NestedVIProblem(upper, lower, set, constants, known_solution, defects, name)


def scale_problem(problem: NestedVIProblem, s: float) -> NestedVIProblem:
    """Scale both maps by ``s > 0``; the solution sets are unchanged."""
    if not s > 0:
        raise ValueError("scale must be positive")
    c = problem.constants
    const = Constants(H=s * c.H, R=s * c.R, D=c.D, L_F=s * c.L_F, L_G=s * c.L_G)
    up = problem.upper.scaled(s) if isinstance(problem.upper, AffineMap) else (lambda x, f=problem.upper: s * f(x))
    lo = problem.lower.scaled(s) if isinstance(problem.lower, AffineMap) else (lambda x, f=problem.lower: s * f(x))
    defects = {k: s * v for k, v in problem.defects.items()}
    return replace(problem, upper=up, lower=lo, constants=const, defects=defects)


# -- serialization -----------------------------------------------------------

def _set_to_dict(s: FeasibleSet) -> dict:
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Box):
        return {"type": "box", "lower": s.lower.tolist(), "upper": s.upper.tolist()}
    return {"type": "simplex", "n": s.n, "scale": s.scale}


def set_from_dict(d: dict, n: int | None = None) -> FeasibleSet:
    kind = d.get("type")
    if kind == "ball":
        center = d.get("center")
        if center is None:
            if n is None:
                raise ValueError("ball needs a center or a dimension")
            center = np.zeros(n)
        return Ball(np.asarray(center, dtype=np.float64), float(d.get("radius", 1.0)))
    if kind == "box":
        return Box(np.asarray(d["lower"], dtype=np.float64), np.asarray(d["upper"], dtype=np.float64))
    if kind == "simplex":
        return Simplex(int(d.get("n", n)), float(d.get("scale", 1.0)))
    raise ValueError(f"unknown set type {kind!r}")


def problem_to_dict(problem: NestedVIProblem) -> dict:
    if not problem.is_affine:
        raise TypeError("only affine problems can be serialized")
    return {
        "n": problem.n,
        "G": {"matrix": problem.upper.matrix.tolist(), "offset": problem.upper.offset.tolist()},
        "F": {"matrix": problem.lower.matrix.tolist(), "offset": problem.lower.offset.tolist()},
        "set": _set_to_dict(problem.set),
    }


def problem_from_dict(d: dict, name="file") -> NestedVIProblem:
    n = int(d["n"])
    G = AffineMap(d["G"]["matrix"], d["G"].get("offset", np.zeros(n)))
    F = AffineMap(d["F"]["matrix"], d["F"].get("offset", np.zeros(n)))
    s = set_from_dict(d["set"], n)
    if G.n != n or F.n != n or s.n != n:
        raise ValueError("dimension mismatch in problem description")
    return make_problem(G, F, s, name=name)


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1)) if indent else ""
    sep = ",\n" if indent else ", "
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        if not items:
            return "{}"
        close = "\n" + " " * (indent * level) if indent else ""
        return "{" + ("\n" if indent else "") + sep.join(items) + close + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        # numeric rows stay on one line
        return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(None)
        return format(x, ".16e")
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2) -> str:
    """JSON text with every real written to 17 significant digits."""
    return _encode(obj, indent, 0)
