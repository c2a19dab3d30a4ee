"""Tests for the dense two-phase simplex.

The oracle for random problems is exhaustive vertex enumeration: every basic
point of the constraint system is generated by intersecting n constraint
hyperplanes (rows or bound faces), feasibility-filtered, and the best value
kept.  That is exact for nondegenerate LPs of this size.
"""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from convexkit.errors import LPInfeasible
from convexkit.simplex import LPSolution, solve_lp


def test_simple_box_lp():
    # minimize x1 + x2 on [1, 3] x [-2, 5]
    got = solve_lp(np.array([1.0, 1.0]), lower=np.array([1.0, -2.0]), upper=np.array([3.0, 5.0]))
    assert_allclose(got.x, [1.0, -2.0], atol=1e-9)
    assert got.value == pytest.approx(-1.0, abs=1e-9)


def test_equality_constraint():
    # minimize x2 subject to x1 + x2 = 2 in [-5, 5]^2
    got = solve_lp(
        np.array([0.0, 1.0]),
        A_eq=np.array([[1.0, 1.0]]),
        b_eq=np.array([2.0]),
        lower=-5.0 * np.ones(2),
        upper=5.0 * np.ones(2),
    )
    assert got.value == pytest.approx(-3.0, abs=1e-9)
    assert_allclose(got.x, [5.0, -3.0], atol=1e-9)


def test_inequality_constraints():
    # classic diet-style corner: minimize -x1 - 2 x2, x1 + x2 <= 4, x1 <= 3
    got = solve_lp(
        np.array([-1.0, -2.0]),
        A_ub=np.array([[1.0, 1.0], [1.0, 0.0]]),
        b_ub=np.array([4.0, 3.0]),
        lower=np.zeros(2),
        upper=10.0 * np.ones(2),
    )
    assert got.value == pytest.approx(-8.0, abs=1e-9)
    assert_allclose(got.x, [0.0, 4.0], atol=1e-9)


def test_infeasible_rows():
    with pytest.raises(LPInfeasible):
        solve_lp(
            np.array([1.0]),
            A_ub=np.array([[1.0], [-1.0]]),
            b_ub=np.array([-3.0, 2.0]),  # x <= -3 and x >= -2
            lower=np.array([-10.0]),
            upper=np.array([10.0]),
        )


def test_infeasible_box():
    with pytest.raises(LPInfeasible):
        solve_lp(np.array([1.0]), lower=np.array([1.0]), upper=np.array([0.0]))


def test_degenerate_rows_terminate():
    # many redundant copies of the same constraint force degenerate pivots
    A = np.repeat(np.array([[1.0, 1.0]]), 6, axis=0)
    b = np.ones(6)
    got = solve_lp(
        np.array([-1.0, -1.0]),
        A_ub=A,
        b_ub=b,
        lower=np.zeros(2),
        upper=np.ones(2) * 9.0,
    )
    assert got.value == pytest.approx(-1.0, abs=1e-9)


def test_zero_objective_returns_feasible_point():
    got = solve_lp(
        np.zeros(2),
        A_ub=np.array([[1.0, 0.0]]),
        b_ub=np.array([0.5]),
        A_eq=np.array([[0.0, 1.0]]),
        b_eq=np.array([0.25]),
        lower=-np.ones(2),
        upper=np.ones(2),
    )
    assert got.x[0] <= 0.5 + 1e-9
    assert got.x[1] == pytest.approx(0.25, abs=1e-9)


def _enumerate_optimum(c, A_ub, b_ub, A_eq, b_eq, lower, upper):
    """Brute-force vertex oracle: try every n-subset of tight constraints."""
    n = c.shape[0]
    rows = [(a, b) for a, b in zip(A_ub, b_ub)]
    rows += [(a, b) for a, b in zip(A_eq, b_eq)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows.append((e, upper[j]))
        rows.append((-e, -lower[j]))
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        A = np.array([rows[i][0] for i in combo])
        b = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        x = np.linalg.solve(A, b)
        ok = (
            np.all(A_ub @ x <= b_ub + 1e-8)
            and np.all(np.abs(A_eq @ x - b_eq) <= 1e-8)
            and np.all(x >= lower - 1e-8)
            and np.all(x <= upper + 1e-8)
        )
        if ok:
            v = float(c @ x)
            if best is None or v < best:
                best = v
    return best


def test_against_vertex_enumeration_random():
    rng = np.random.default_rng(77)
    solved = 0
    for trial in range(60):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, 4))
        c = rng.uniform(-2, 2, n)
        A_ub = rng.uniform(-2, 2, (m, n))
        b_ub = rng.uniform(0.5, 3.0, m)  # origin feasible, so never infeasible
        A_eq = np.zeros((0, n))
        b_eq = np.zeros(0)
        lower = -3.0 * np.ones(n)
        upper = 3.0 * np.ones(n)
        oracle = _enumerate_optimum(c, A_ub, b_ub, A_eq, b_eq, lower, upper)
        got = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
        assert oracle is not None
        assert got.value == pytest.approx(oracle, abs=1e-7)
        assert np.all(A_ub @ got.x <= b_ub + 1e-8)
        solved += 1
    assert solved == 60


def test_against_vertex_enumeration_with_equalities():
    rng = np.random.default_rng(88)
    for trial in range(40):
        n = 3
        c = rng.uniform(-2, 2, n)
        A_eq = rng.uniform(-1, 1, (1, n))
        x0 = rng.uniform(-1, 1, n)
        b_eq = A_eq @ x0  # guaranteed feasible interior point
        A_ub = rng.uniform(-2, 2, (2, n))
        b_ub = A_ub @ x0 + rng.uniform(0.5, 2.0, 2)
        lower = -4.0 * np.ones(n)
        upper = 4.0 * np.ones(n)
        oracle = _enumerate_optimum(c, A_ub, b_ub, A_eq, b_eq, lower, upper)
        got = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, lower=lower, upper=upper)
        assert got.value == pytest.approx(oracle, abs=1e-7)
        assert np.abs(A_eq @ got.x - b_eq).max() <= 1e-8


def test_determinism():
    rng = np.random.default_rng(5)
    c = rng.uniform(-1, 1, 4)
    A = rng.uniform(-1, 1, (3, 4))
    b = rng.uniform(1, 2, 3)
    kw = dict(A_ub=A, b_ub=b, lower=-2 * np.ones(4), upper=2 * np.ones(4))
    a = solve_lp(c, **kw)
    b2 = solve_lp(c, **kw)
    assert a.value == b2.value
    assert np.array_equal(a.x, b2.x)
