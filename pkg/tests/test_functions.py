"""Tests for the convex function families and their subdifferential calculus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from convexkit.errors import DimensionMismatch
from convexkit.functions import (
    AffinePiece,
    MaxAffine,
    Polytope,
    Quadratic,
    SumFunction,
    directional_derivative_minus,
    directional_derivative_plus,
    evaluate,
    evaluate_many,
    fd_directional_derivative,
    max_affine,
    one_dim_subdifferential,
    quadratic,
    subdifferential,
)

# max(+-x1, +-x2), the infinity norm on R^2
INF_NORM = max_affine(
    [((1.0, 0.0), 0.0), ((-1.0, 0.0), 0.0), ((0.0, 1.0), 0.0), ((0.0, -1.0), 0.0)]
)
# |x1| + |x2| written as a max over the four sign patterns
ONE_NORM = max_affine(
    [((1.0, 1.0), 0.0), ((1.0, -1.0), 0.0), ((-1.0, 1.0), 0.0), ((-1.0, -1.0), 0.0)]
)
SQUARED_NORM = quadratic(np.eye(2))
ABS = max_affine([((1.0,), 0.0), ((-1.0,), 0.0)])


def test_evaluate_frozen_examples():
    assert evaluate(INF_NORM, (3.0, -1.0)) == 3.0
    assert evaluate(SQUARED_NORM, (1.0, 2.0)) == 5.0
    s = SumFunction(2, (INF_NORM, SQUARED_NORM))
    assert evaluate(s, (1.0, 2.0)) == 7.0


def test_evaluate_many_matches_scalar():
    rng = np.random.default_rng(3)
    X = rng.uniform(-3.0, 3.0, size=(40, 2))
    for f in (INF_NORM, ONE_NORM, SQUARED_NORM, SumFunction(2, (ONE_NORM, SQUARED_NORM))):
        assert_allclose(evaluate_many(f, X), [evaluate(f, x) for x in X], atol=1e-12)


def test_subdifferential_one_norm_at_origin_is_square():
    P = subdifferential(ONE_NORM, (0.0, 0.0))
    got = {tuple(g) for g in P.generators}
    assert got == {(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)}


def test_subdifferential_one_norm_at_generic_point():
    P = subdifferential(ONE_NORM, (2.0, 3.0))
    assert P.generators.shape == (1, 2)
    assert_allclose(P.generators[0], [1.0, 1.0])


def test_subdifferential_quadratic_is_gradient():
    f = quadratic(np.eye(2), c=(1.0, 0.0))
    P = subdifferential(f, (1.0, 2.0))
    assert_allclose(P.generators, [[3.0, 4.0]])


def test_subdifferential_sum_is_minkowski_sum():
    s = SumFunction(2, (ONE_NORM, SQUARED_NORM))
    P = subdifferential(s, (0.0, 0.0))
    # gradient of the quadratic at origin is 0, so the square survives as is
    got = {tuple(g) for g in P.generators}
    assert got == {(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)}


def test_active_tolerance_is_relative():
    # two pieces within 5e-10 * (|max|+1) of each other: both active at default tol
    f = max_affine([((1.0,), 0.0), ((-1.0,), 5e-10)])
    P = subdifferential(f, (0.0,))
    assert P.generators.shape[0] == 2
    # a tiny tolerance keeps only the top piece
    P = subdifferential(f, (0.0,), active_tol=1e-12)
    assert P.generators.shape[0] == 1


def test_directional_derivatives_at_kink():
    assert directional_derivative_plus(ONE_NORM, (0.0, 0.0), (1.0, -1.0)) == 2.0
    assert directional_derivative_minus(ONE_NORM, (0.0, 0.0), (1.0, -1.0)) == -2.0


def test_one_dim_subdifferential_of_abs():
    assert one_dim_subdifferential(ABS, (0.0,), (1.0,)) == (-1.0, 1.0)
    # scaling the direction scales the interval
    assert one_dim_subdifferential(ABS, (0.0,), (2.0,)) == (-2.0, 2.0)


def test_one_dim_subdifferential_smooth_point():
    lo, hi = one_dim_subdifferential(SQUARED_NORM, (1.0, 0.0), (0.0, 1.0))
    assert lo == hi == 0.0


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        one_dim_subdifferential(ABS, (0.0,), (0.0,))
    with pytest.raises(ValueError):
        directional_derivative_plus(ABS, (0.0,), (0.0,))


def test_fd_directional_derivative_frozen():
    assert fd_directional_derivative(ABS, (0.0,), (1.0,), 1e-6) == pytest.approx(1.0)
    got = fd_directional_derivative(quadratic(np.eye(1)), (1.0,), (1.0,), 1e-6)
    # exact value is 2 + h; the quotient carries ~1e-10 of cancellation noise
    assert got == pytest.approx(2.0 + 1e-6, abs=1e-9)
    with pytest.raises(ValueError):
        fd_directional_derivative(ABS, (0.0,), (1.0,), 0.0)


def test_fd_agrees_with_subdifferential_random():
    # generic points: forward difference equals the right derivative up to L*h
    rng = np.random.default_rng(42)
    for trial in range(100):
        dim = int(rng.integers(1, 5))
        k = int(rng.integers(2, 8))
        f = max_affine([(rng.uniform(-2, 2, dim), rng.uniform(-2, 2)) for _ in range(k)])
        x = rng.uniform(-3, 3, dim)
        v = rng.normal(size=dim)
        v /= np.linalg.norm(v)
        L = max(np.linalg.norm(p.a) for p in f.pieces)
        for h in (1e-4, 1e-6):
            fd = fd_directional_derivative(f, x, v, h)
            dd = directional_derivative_plus(f, x, v)
            assert abs(fd - dd) <= L * h + 1e-6


def test_fd_exact_at_constructed_kink():
    # at the kink of |x| the forward difference is exactly the right derivative
    for h in (1e-4, 1e-6, 0.5):
        assert fd_directional_derivative(ABS, (0.0,), (1.0,), h) == 1.0


def test_subgradient_inequality_random():
    # f(y) >= f(x) + g . (y - x) for every generator g, all three families
    rng = np.random.default_rng(2024)
    for trial in range(100):
        dim = int(rng.integers(1, 5))
        pieces = [(rng.uniform(-2, 2, dim), rng.uniform(-2, 2)) for _ in range(5)]
        A = rng.uniform(-1, 1, (dim, dim))
        fs = [
            max_affine(pieces),
            quadratic(A.T @ A + 0.1 * np.eye(dim), c=rng.uniform(-1, 1, dim)),
        ]
        fs.append(SumFunction(dim, tuple(fs)))
        for f in fs:
            x = rng.uniform(-3, 3, dim)
            y = rng.uniform(-3, 3, dim)
            fx, fy = evaluate(f, x), evaluate(f, y)
            for g in subdifferential(f, x).generators:
                assert fy >= fx + g @ (y - x) - 1e-8 * (1 + abs(fx) + abs(fy))


def test_interval_endpoints_order_random():
    rng = np.random.default_rng(5)
    for trial in range(100):
        dim = int(rng.integers(1, 4))
        f = max_affine([(rng.uniform(-2, 2, dim), rng.uniform(-2, 2)) for _ in range(6)])
        x = rng.uniform(-1, 1, dim)
        v = rng.normal(size=dim)
        if np.linalg.norm(v) == 0:
            continue
        lo, hi = one_dim_subdifferential(f, x, v)
        assert lo <= hi


@settings(max_examples=200, deadline=None)
@given(
    t=st.floats(min_value=0.01, max_value=100.0),
    coeffs=st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=6),
)
def test_directional_derivative_positive_homogeneity(t, coeffs):
    f = max_affine([((a,), 0.0) for a in coeffs])
    lo1, hi1 = one_dim_subdifferential(f, (0.0,), (1.0,))
    lo2, hi2 = one_dim_subdifferential(f, (0.0,), (t,))
    assert lo2 == pytest.approx(t * lo1, rel=1e-12, abs=1e-12)
    assert hi2 == pytest.approx(t * hi1, rel=1e-12, abs=1e-12)


def test_validation_errors():
    with pytest.raises(ValueError):
        max_affine([])
    with pytest.raises(ValueError):
        quadratic(np.array([[1.0, 0.5], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(ValueError):
        quadratic(np.array([[-1.0]]))  # not PSD
    with pytest.raises(DimensionMismatch):
        MaxAffine(3, (AffinePiece(np.array([1.0, 2.0]), 0.0),))
    with pytest.raises(DimensionMismatch):
        SumFunction(2, (ABS, SQUARED_NORM))
    with pytest.raises(ValueError):
        SumFunction(2, ())
    with pytest.raises(DimensionMismatch):
        evaluate(ABS, (1.0, 2.0))
    with pytest.raises(ValueError):
        Polytope(2, np.zeros((0, 2)))


def test_psd_accepts_semidefinite():
    # rank-deficient but PSD passes the floor check
    q = quadratic(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert evaluate(q, (0.0, 3.0)) == 0.0
