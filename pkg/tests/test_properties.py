"""Randomized properties of the set oracles and the averaging recurrence."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pata import solvers
from pata.core import Ball, Box, Simplex

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def set_and_points(draw):
    n = draw(st.integers(1, 6))
    kind = draw(st.sampled_from(["ball", "box", "simplex"]))
    if kind == "ball":
        s = Ball(draw(arrays(np.float64, n, elements=st.floats(-5, 5))), draw(st.floats(0.1, 10)))
    elif kind == "box":
        lo = draw(arrays(np.float64, n, elements=st.floats(-5, 5)))
        s = Box(lo, lo + draw(arrays(np.float64, n, elements=st.floats(0, 5))))
    else:
        s = Simplex(n, draw(st.floats(0.1, 10)))
    x = draw(arrays(np.float64, n, elements=finite))
    y = draw(arrays(np.float64, n, elements=finite))
    return s, x, y


def _member(s, p, tol=1e-9):
    if isinstance(s, Ball):
        return np.linalg.norm(p - s.center) <= s.radius * (1 + tol)
    if isinstance(s, Box):
        return np.all(p >= s.lower) and np.all(p <= s.upper)
    return np.all(p >= 0) and abs(p.sum() - s.scale) <= tol * max(1.0, abs(p).sum())


@settings(max_examples=300, deadline=None)
@given(set_and_points())
def test_projection_properties(data):
    s, x, y = data
    px, py = s.project(x), s.project(y)
    scale = 1.0 + np.abs(x).max() + np.abs(y).max()
    assert _member(s, px)
    assert np.linalg.norm(s.project(px) - px) <= 1e-12 * scale
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12 * scale
    # characterization against the (feasible) projection of y
    assert (x - px) @ (py - px) <= 1e-9 * scale * scale


@settings(max_examples=300, deadline=None)
@given(set_and_points())
def test_lmo_beats_projected_points(data):
    s, g, y = data
    u = s.lmo(g)
    assert _member(s, u)
    assert g @ u <= g @ s.project(y) + 1e-9 * (1 + np.abs(g).sum() * (1 + np.abs(y).max()))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-3, 1.0), st.floats(-10, 10)), min_size=1, max_size=100))
def test_averaging_matches_weighted_mean(items):
    z, s = np.zeros(1), 0.0
    for w, y in items:
        z, s = solvers.averaging_update(z, s, w, [y])
    w = np.array([a for a, _ in items])
    y = np.array([b for _, b in items])
    assert abs(z[0] - (w @ y) / w.sum()) <= 1e-12 * (1 + np.abs(y).max())
    assert y.min() - 1e-12 <= z[0] <= y.max() + 1e-12
