"""Solvers for monotone nested variational inequalities VI(G, SOL(F, Y)).

The main entry points are :func:`pata_solve` (averaging Tikhonov scheme),
:func:`pata_solve_certificate` (fixed-tau run with a dual-gap certificate)
and :func:`baseline_tikhonov_solve`.
"""

from ._backend import DEFAULT_BACKEND, HAVE_COMPILED
from .core import (
    AffineMap,
    Ball,
    Box,
    Constants,
    NestedVIProblem,
    Simplex,
    diameter,
    evaluate,
    lmo,
    make_problem,
    map_norm_bound,
    monotonicity_defect,
    project,
    spectral_norm,
    tikhonov_map,
)
from .problems import RandomFamilySpec, random_skew_rank_one, rotation2d, skew_antidiagonal
from .schedules import PowerLaw, PowerStep, RecursiveStep, Theorem2, Theorem3
from .solvers import (
    IterationRecord,
    NonFiniteIterateError,
    SolveResult,
    SolverConfig,
    averaging_update,
    baseline_tikhonov_solve,
    pata_solve,
    pata_solve_certificate,
)

__version__ = "0.1.0"
