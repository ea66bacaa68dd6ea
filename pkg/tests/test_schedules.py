import math
import pickle
import threading

import numpy as np
import pytest

from pata import schedules as S


def test_power_step_examples():
    assert S.gamma(S.PowerStep(0.5, 0.5), 0) == 1.0
    assert S.gamma(S.PowerStep(1.0, 0.5), 4) == 0.5
    assert S.THEOREM_STEP(1) == 0.5
    r = S.PowerStep(2.0, 0.25)
    assert np.allclose(r.values(50), [r(k) for k in range(50)], rtol=1e-14, atol=0)
    with pytest.raises(ValueError):
        S.PowerStep(1.0, 1.5)
    with pytest.raises(ValueError):
        S.PowerStep(0.0, 0.5)


def test_recursive_step():
    r = S.RecursiveStep(1.0, 0.5)
    vals = r.values(1000)
    assert vals[0] == 1.0 and vals[1] == 0.5
    assert np.all(np.diff(vals) < 0) and np.all(vals > 0)
    assert r(999) == vals[999]
    clone = pickle.loads(pickle.dumps(r))
    assert clone(10) == r(10)
    with pytest.raises(ValueError):
        S.RecursiveStep(0.0, 0.5)


def test_recursive_step_threads():
    r = S.RecursiveStep(0.9, 0.3)
    out = []
    ts = [threading.Thread(target=lambda: out.append(r.values(5000)[-1])) for _ in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert len(set(out)) == 1


def test_gamma_sum_lower_bound_examples():
    # the closed form evaluates to 1 + 2(sqrt(101) - 1)
    assert math.isclose(S.gamma_sum_lower_bound(1, 0.5, 100), 1 + 2 * (math.sqrt(101) - 1))
    assert math.isclose(S.gamma_sum_lower_bound(1, 1, 10), 1 + math.log(11), rel_tol=1e-12)
    with pytest.raises(ValueError):
        S.gamma_sum_lower_bound(4, 0.5, 10)


def test_gamma_sq_sum_upper_bound_examples():
    assert math.isclose(S.gamma_sq_sum_upper_bound(1, 0.5, 100), 2 + math.log(100), rel_tol=1e-12)
    assert math.isclose(S.gamma_sq_sum_upper_bound(1, 1, 10), 2.9, rel_tol=1e-12)
    with pytest.raises(ValueError):
        S.gamma_sq_sum_upper_bound(1, 0.5, 1)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_lemma1_grid(a, alpha):
    g = S.PowerStep(a, alpha).values(10_001)
    s1, s2 = np.cumsum(g), np.cumsum(g * g)
    for K in (100, 10_000):
        assert S.gamma_sum_lower_bound(a, alpha, K) <= s1[K]
        assert s2[K] <= S.gamma_sq_sum_upper_bound(a, alpha, K)


def test_admissibility():
    r = S.admissibility_check(S.PowerStep(1, 0.5), 10 ** 6)
    assert r.admissible and r.ratio_estimate < r.ratio_previous
    r = S.admissibility_check(S.PowerStep(1, 1), 10 ** 6)
    assert r.sum_estimate > r.sum_previous
    assert S.admissibility_check(S.RecursiveStep(1.0, 0.5), 10 ** 6).admissible
    # a summable sequence has a ratio that does not shrink
    assert not S.admissibility_check(S.ConstantStep(0.1), 1000).admissible
    with pytest.raises(ValueError):
        S.admissibility_check(S.PowerStep(1, 1), 10)


def test_ratio_decreasing_on_grid():
    for a in (0.5, 1, 2):
        for alpha in (0.25, 0.5, 1):
            g = S.PowerStep(a, alpha).values(100_001)
            rho = np.cumsum(g * g) / np.cumsum(g)
            for K in (100, 1000, 10_000):
                assert rho[10 * K] < rho[K]


def test_schedules():
    t2 = S.Theorem2()
    for i in range(1, 100):
        assert abs(t2.epsilon(i) * t2.tau(i) - 1 / i) <= 1e-15
    pl = S.PowerLaw(1.0, 2.0)
    assert [pl.epsilon(i) for i in (2, 3, 10)] == [0.25, 1 / 9, 0.01]
    assert S.PowerLaw(slope=0.1).tau(3) == 1.0
    with pytest.raises(ValueError):
        S.PowerLaw(beta=1.0)
    with pytest.raises(ValueError):
        S.Theorem3(1.5)


def test_complexity_thm2():
    b = S.complexity_bound_thm2(0.5, 0.99, 2, 1, 0, 0.5)
    assert b.I_max == 2
    assert S.complexity_bound_thm2(0.1, 0.1, 2, 1, 0.5, 0.9).I_max == 15
    s1 = S.complexity_bound_thm2(0.5, 0.5, 2, 1, 0.5, 0.5).sigma
    s2 = S.complexity_bound_thm2(0.25, 0.5, 2, 1, 0.5, 0.5).sigma
    assert s2 >= s1
    with pytest.raises(ValueError):
        S.complexity_bound_thm2(0.5, 0.5, 2, 1, 0.5, 1.0)


def test_complexity_thm3():
    assert S.complexity_bound_thm3(0.5, 2, 1, 0).I_bar_max == 2
    assert S.complexity_bound_thm3(0.1, 2, 1, 0.5).I_bar_max == 15
    for d in (0.5, 0.25, 0.1):
        t3 = S.complexity_bound_thm3(d, 2, 1, 0.5)
        t2 = S.complexity_bound_thm2(d, d, 2, 1, 0.5, 0.5)
        assert t3.sigma_bar <= t2.sigma


def test_constants_formulas():
    assert S.C1(2, 1, 0.5) == (4 + 1.25 * 2.25) ** 2
    assert math.isclose(S.C2(1, 0.5, 0.01), (2.25 / 0.04) ** (2 / 0.98))
