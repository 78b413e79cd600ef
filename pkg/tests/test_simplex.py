from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from interwoven_pdc.simplex import UnboundedError, phase_one, solve_lp


def random_feasible_lp(rng, m, n):
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, n)
    b = A @ x0
    c = rng.uniform(0.1, 2.0, n)
    return c, A, b


@pytest.mark.parametrize("seed", range(8))
def test_optimum_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    c, A, b = random_feasible_lp(rng, 4, 9)
    ours = solve_lp(c, A, b, tol=1e-9)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ours.feasible and ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-9)
    np.testing.assert_allclose(A @ ours.x, b, atol=1e-9)
    # dual feasibility and strong duality
    assert np.all(ours.duals @ A <= c + 1e-8)
    assert ours.duals @ b == pytest.approx(ours.objective, rel=1e-7, abs=1e-9)


def test_farkas_certificate_for_infeasible_system():
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    res = phase_one(A, b)
    assert not res.feasible
    y = res.duals
    assert np.all(y @ A <= 1e-12)
    assert y @ b > 0


def test_negative_right_hand_side():
    # -x = -3  ->  x = 3
    res = phase_one(np.array([[-1.0]]), np.array([-3.0]))
    assert res.feasible
    assert res.x[0] == pytest.approx(3.0)


def test_exact_mode_returns_fractions():
    A = [[1, 2, 1], [3, 1, 0]]
    b = [Fraction(1, 3), Fraction(1, 2)]
    res = solve_lp([1, 1, 1], A, b, exact=True)
    assert res.exact and res.feasible
    assert all(isinstance(v, Fraction) for v in res.x)
    assert [sum(Fraction(a) * x for a, x in zip(row, res.x)) for row in A] == b
    ref = linprog([1, 1, 1], A_eq=A, b_eq=[float(v) for v in b], method="highs")
    assert float(res.objective) == pytest.approx(ref.fun)


def test_exact_infeasibility_is_strict():
    A = [[1, 1]]
    res = phase_one(A, [Fraction(-1, 10 ** 12)], exact=True)
    assert not res.feasible
    assert res.infeasibility == Fraction(1, 10 ** 12)


def test_unbounded():
    # min -x1 with x1 - x2 = 0
    with pytest.raises(UnboundedError):
        solve_lp([-1.0, 0.0], np.array([[1.0, -1.0]]), np.array([0.0]))


def test_degenerate_redundant_rows():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 2.0, 1.0])
    res = solve_lp([1.0, 2.0, 3.0], A, b)
    assert res.feasible
    # x2 = 1 serves both rows
    assert res.objective == pytest.approx(2.0)
    np.testing.assert_allclose(res.x, [0.0, 1.0, 0.0], atol=1e-12)


def test_bad_shape():
    with pytest.raises(ValueError):
        phase_one(np.ones((2, 2)), np.ones(3))
