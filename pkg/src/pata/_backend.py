"""Pick the compiled inner loop when it is importable, else the Python one.

Set ``PATA_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback
from .core import Ball, Box, Simplex
from .schedules import ConstantStep, PowerStep, RecursiveStep

try:
    if os.environ.get("PATA_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernel disabled by PATA_PURE_PYTHON")
    from ._kernels import AffineKernel
except ImportError:  # pragma: no cover - depends on the build
    AffineKernel = None

HAVE_COMPILED = AffineKernel is not None
DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"


def _step_params(rule):
    if isinstance(rule, PowerStep):
        return _fallback.STEP_POWER, rule.a, rule.alpha
    if isinstance(rule, RecursiveStep):
        return _fallback.STEP_TABLE, 0.0, 0.0
    if isinstance(rule, ConstantStep):
        return _fallback.STEP_CONSTANT, rule.lam, 0.0
    raise TypeError(f"unsupported step rule {rule!r}")


def _set_params(s):
    if isinstance(s, Ball):
        return _fallback.SET_BALL, s.center, s.center, s.radius, 0.0
    if isinstance(s, Box):
        return _fallback.SET_BOX, s.lower, s.upper, 0.0, 0.0
    if isinstance(s, Simplex):
        z = np.zeros(s.n)
        return _fallback.SET_SIMPLEX, z, z, 0.0, s.scale
    raise TypeError(f"unsupported set {s!r}")


def make_kernel(problem, mode, rule, check_every, backend="auto"):
    """Return ``(kernel, backend_name)`` for ``problem``."""
    if backend not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    step_kind, a, b = _step_params(rule)
    if backend == "compiled" and not (HAVE_COMPILED and problem.is_affine):
        raise RuntimeError("compiled backend unavailable for this problem")
    use_compiled = backend != "python" and HAVE_COMPILED and problem.is_affine
    if use_compiled:
        kind, p1, p2, radius, scale = _set_params(problem.set)
        F, G = problem.lower, problem.upper
        k = AffineKernel(F.matrix, F.offset, G.matrix, G.offset, kind, p1, p2, radius, scale,
                         mode, step_kind, a, b, check_every)
        return k, "compiled"
    if problem.is_affine:
        F, G = problem.lower, problem.upper
        k = _fallback.PythonKernel(problem.set, mode, step_kind, a, b, check_every,
                                   affine=(F.matrix, F.offset, G.matrix, G.offset))
    else:
        k = _fallback.PythonKernel(problem.set, mode, step_kind, a, b, check_every,
                                   maps=(problem.lower, problem.upper))
    return k, "python"
