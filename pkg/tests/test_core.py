import json
import math

import numpy as np
import pytest

from pata import core
from pata.core import AffineMap, Ball, Box, Simplex
from pata.problems import rotation2d

RNG = np.random.Generator(np.random.PCG64(7))


def test_evaluate_examples():
    assert np.array_equal(core.evaluate(AffineMap.linear(np.eye(2)), [3, 4]), [3, 4])
    G = AffineMap.linear([[0, -0.5], [0.5, 0]])
    F = AffineMap.linear([[0, 1], [-1, 0]])
    assert np.allclose(core.evaluate(G, [1, 0]), [0, 0.5])
    assert np.allclose(core.evaluate(F, [0, 1]), [1, 0])


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        core.evaluate(AffineMap.linear(np.eye(2)), [1, 2, 3])


def test_affine_map_validation():
    with pytest.raises(ValueError):
        AffineMap(np.ones((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        AffineMap(np.eye(2), np.zeros(3))
    with pytest.raises(ValueError):
        AffineMap(np.array([[np.nan, 0], [0, 1]]), np.zeros(2))
    m = AffineMap.linear(np.eye(2))
    with pytest.raises(ValueError):
        m.matrix[0, 0] = 5.0


def test_tikhonov_map():
    p = rotation2d()
    # F(1,0) = (0,-1) and G(1,0) = (0,0.5)
    assert np.allclose(core.tikhonov_map(p, 1.0, [1, 0]), [0, -0.5])
    assert np.array_equal(core.tikhonov_map(p, 3.0, [0, 0]), [0, 0])
    x = np.array([0.3, -0.7])
    far = core.tikhonov_map(p, 1e9, x)
    Fx, Gx = core.evaluate(p.lower, x), core.evaluate(p.upper, x)
    assert np.linalg.norm(far - Fx) <= 1e-9 * np.linalg.norm(Gx) + 1e-15
    with pytest.raises(ValueError):
        core.tikhonov_map(p, 0.0, x)
    A = core.tikhonov_affine(p, 4.0)
    assert np.allclose(A(x), core.tikhonov_map(p, 4.0, x))


def test_projection_examples():
    assert np.allclose(core.project(Ball.unit(2), [3, 4]), [0.6, 0.8])
    assert np.array_equal(core.project(Ball.unit(2), [0.2, 0.1]), [0.2, 0.1])
    assert np.allclose(core.project(Simplex(3), [0.5, 0.5, 0.5]), [1 / 3] * 3)
    assert np.array_equal(core.project(Box(np.zeros(2), np.ones(2)), [-1, 0.5]), [0, 0.5])


def test_simplex_projection_brute_force():
    # fine grid over the 2-simplex in R^3
    g = np.linspace(0, 1, 201)
    pts = np.array([(a, b, 1 - a - b) for a in g for b in g if a + b <= 1 + 1e-12])
    for _ in range(20):
        x = RNG.standard_normal(3)
        p = core.project(Simplex(3), x)
        best = pts[np.argmin(((pts - x) ** 2).sum(axis=1))]
        assert np.linalg.norm(p - x) <= np.linalg.norm(best - x) + 1e-12
        assert np.linalg.norm(p - best) < 1e-2


def test_lmo_examples():
    assert np.allclose(core.lmo(Ball.unit(2), [0, 2]), [0, -1])
    assert np.array_equal(core.lmo(Ball.unit(2), [0, 0]), [0, 0])
    assert np.array_equal(core.lmo(Simplex(3), [3, 1, 2]), [0, 1, 0])
    assert np.array_equal(core.lmo(Simplex(3), [1, 1, 2]), [1, 0, 0])
    assert np.array_equal(core.lmo(Box(-np.ones(3), np.ones(3)), [1, -1, 0]), [-1, 1, -1])


def test_diameters():
    assert core.diameter(Ball.unit(5)) == 2.0
    assert math.isclose(core.diameter(Box(np.zeros(2), np.ones(2))), math.sqrt(2))
    verts = np.eye(2)
    assert math.isclose(core.diameter(Simplex(2)), np.linalg.norm(verts[0] - verts[1]))


def test_set_validation():
    with pytest.raises(ValueError):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        Box(np.ones(2), np.zeros(2))
    with pytest.raises(ValueError):
        Box(np.zeros(2), np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        Simplex(3, -1.0)


def test_spectral_norm_examples():
    assert math.isclose(core.spectral_norm([[0, -0.5], [0.5, 0]]), 0.5, rel_tol=1e-10)
    assert math.isclose(core.spectral_norm(np.eye(6)), 1.0, rel_tol=1e-10)
    assert math.isclose(core.spectral_norm(np.diag([3.0, 1.0])), 3.0, rel_tol=1e-10)
    assert core.spectral_norm(np.zeros((3, 3))) == 0.0
    A = RNG.standard_normal((30, 30))
    assert math.isclose(core.spectral_norm(A), np.linalg.norm(A, 2), rel_tol=1e-14)


def test_map_norm_bound_examples():
    G = AffineMap.linear([[0, -0.5], [0.5, 0]])
    assert math.isclose(core.map_norm_bound(G, Ball.unit(2)), 0.5, rel_tol=1e-10)
    th = np.linspace(0, 2 * np.pi, 10_000)
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    assert np.max(np.linalg.norm(u @ G.matrix.T, axis=1)) <= 0.5 + 1e-12
    b = np.array([3.0, 4.0])
    assert core.map_norm_bound(AffineMap(np.zeros((2, 2)), b), Ball.unit(2)) == 5.0
    assert math.isclose(core.map_norm_bound(AffineMap.linear(np.eye(3)), Ball.unit(3)), 1.0)


@pytest.mark.parametrize("s", [Ball(np.array([0.5, -1.0, 2.0]), 1.5), Box(-np.ones(3), 2 * np.ones(3)), Simplex(3, 2.0)])
def test_map_norm_bound_dominates_samples(s):
    m = AffineMap(RNG.standard_normal((3, 3)), RNG.standard_normal(3))
    bound = core.map_norm_bound(m, s)
    ys = s.sample(RNG, 1000)
    assert np.all(np.linalg.norm(ys @ m.matrix.T + m.offset, axis=1) <= bound + 1e-12)


def test_monotonicity_defect():
    S = RNG.standard_normal((5, 5))
    assert abs(core.monotonicity_defect(AffineMap.linear(S - S.T))) <= 1e-12
    assert math.isclose(core.monotonicity_defect(AffineMap.linear(np.eye(4))), 1.0)
    # large n goes through the sparse eigensolver
    A = RNG.standard_normal((250, 250))
    ref = np.linalg.eigvalsh(0.5 * (A + A.T))[0]
    assert math.isclose(core.monotonicity_defect(AffineMap.linear(A)), ref, rel_tol=1e-14)


def test_phi_monotone():
    p = rotation2d()
    for tau in (1.0, 10.0):
        d = core.monotonicity_defect(core.tikhonov_affine(p, tau))
        assert d >= min(0.0, p.defects["F"] + p.defects["G"] / tau) - 1e-12


def test_rotation_constants():
    c = rotation2d().constants
    assert math.isclose(c.H, 0.5, rel_tol=1e-10)
    assert math.isclose(c.R, 1.0, rel_tol=1e-10)
    assert c.D == 2.0
    assert math.isclose(c.L_phi, 1.5, rel_tol=1e-10)


def test_problem_json_roundtrip():
    p = rotation2d()
    text = core.dumps(core.problem_to_dict(p))
    q = core.problem_from_dict(json.loads(text))
    assert np.array_equal(q.upper.matrix, p.upper.matrix)
    assert np.array_equal(q.lower.matrix, p.lower.matrix)
    assert isinstance(q.set, Ball) and q.set.radius == 1.0
    # reals carry 17 significant digits
    assert "5.0000000000000000e-01" in text


def test_problem_from_dict_box_and_simplex():
    d = {"n": 2, "G": {"matrix": [[1, 0], [0, 1]]}, "F": {"matrix": [[0, 1], [-1, 0]], "offset": [0, 0]},
         "set": {"type": "box", "lower": [0, 0], "upper": [1, 2]}}
    p = core.problem_from_dict(d)
    assert isinstance(p.set, Box)
    d["set"] = {"type": "simplex", "n": 2, "scale": 1}
    assert isinstance(core.problem_from_dict(d).set, Simplex)
    d["set"] = {"type": "ball", "center": [0, 0, 0]}
    with pytest.raises(ValueError):
        core.problem_from_dict(d)


def test_scale_problem_keeps_solutions():
    p = rotation2d()
    q = core.scale_problem(p, 0.5)
    assert math.isclose(q.constants.L_phi, 0.75, rel_tol=1e-10)
    x = np.array([0.2, 0.3])
    assert np.allclose(core.tikhonov_map(q, 2.0, x), 0.5 * core.tikhonov_map(p, 2.0, x))
    with pytest.raises(ValueError):
        core.scale_problem(p, 0.0)


def test_flags():
    M = np.array([[-1.0, 0.0], [0.0, 1.0]])
    p = core.make_problem(AffineMap.linear(M), AffineMap.linear(np.eye(2)), Ball.unit(2))
    assert p.flags == ["G_not_monotone"]
    assert rotation2d().flags == []
