"""Convex function families with exact values and exact subdifferentials.

Three families are closed under the operations used elsewhere:

* ``MaxAffine``     f(x) = max_i (a_i . x + b_i)
* ``Quadratic``     f(x) = x^T Q x + c . x + r0, with Q symmetric PSD
* ``SumFunction``   pointwise sum of the above

Subdifferentials are returned as polytopes in generator form; no inequality
representation is ever needed because every question downstream is answered
through support values.  For these families the generator sets are exact:
active gradients for a max of affine pieces, the single gradient for a
quadratic, and pairwise Minkowski sums for sums (exact since every summand is
finite everywhere).  All values involved are immutable; every operation here
is a pure function of its arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_matrix, as_vector

ACTIVE_TOL = 1e-9
PSD_FLOOR = -1e-8
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class AffinePiece:
    """One affine piece x -> a . x + b."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not np.isfinite(self.b):
            raise ValueError("offset must be finite")


@dataclass(frozen=True)
class MaxAffine:
    """Pointwise maximum of finitely many affine pieces."""

    dim: int
    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        pieces = tuple(
            p if isinstance(p, AffinePiece) else AffinePiece(*p) for p in self.pieces
        )
        if not pieces:
            raise ValueError("a max-affine function needs at least one piece")
        for p in pieces:
            if p.a.shape[0] != self.dim:
                raise DimensionMismatch(
                    f"piece gradient has dimension {p.a.shape[0]}, function has {self.dim}"
                )
        object.__setattr__(self, "pieces", pieces)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Piece gradients stacked as rows, shape (pieces, dim)."""
        return np.array([p.a for p in self.pieces])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([p.b for p in self.pieces])


@dataclass(frozen=True)
class Quadratic:
    """x -> x^T Q x + c . x + r0 with Q symmetric positive semidefinite."""

    dim: int
    Q: np.ndarray
    c: np.ndarray
    r0: float = 0.0

    def __post_init__(self):
        Q = as_matrix(self.Q, (self.dim, self.dim))
        c = as_vector(self.c, self.dim)
        if np.max(np.abs(Q - Q.T)) > SYMMETRY_TOL:
            raise ValueError("Q must be symmetric within 1e-10")
        if self.dim > 0 and float(np.min(np.linalg.eigvalsh(Q))) < PSD_FLOOR:
            raise ValueError("Q must be positive semidefinite (eigenvalue floor -1e-8)")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "r0", float(self.r0))
        if not np.isfinite(self.r0):
            raise ValueError("constant term must be finite")


@dataclass(frozen=True)
class SumFunction:
    """Pointwise sum of convex functions on a common space."""

    dim: int
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a sum needs at least one part")
        for p in parts:
            if p.dim != self.dim:
                raise DimensionMismatch(
                    f"part has dimension {p.dim}, sum has {self.dim}"
                )
        object.__setattr__(self, "parts", parts)


ConvexFunction = MaxAffine | Quadratic | SumFunction


def quadratic(Q, c=None, r0: float = 0.0) -> Quadratic:
    """Convenience constructor that infers the dimension from Q."""
    Q = as_matrix(Q)
    dim = Q.shape[0]
    if c is None:
        c = np.zeros(dim)
    return Quadratic(dim, Q, c, r0)


def max_affine(pieces) -> MaxAffine:
    """Convenience constructor that infers the dimension from the pieces."""
    items = [p if isinstance(p, AffinePiece) else AffinePiece(*p) for p in pieces]
    if not items:
        raise ValueError("a max-affine function needs at least one piece")
    return MaxAffine(items[0].a.shape[0], tuple(items))


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many generator points (rows)."""

    ambient_dim: int
    generators: np.ndarray

    def __post_init__(self):
        g = as_matrix(self.generators)
        if g.shape[0] == 0:
            raise ValueError("a polytope needs at least one generator")
        if g.shape[1] != self.ambient_dim:
            raise DimensionMismatch(
                f"generators live in R^{g.shape[1]}, ambient is R^{self.ambient_dim}"
            )
        object.__setattr__(self, "generators", g)


def evaluate(f: ConvexFunction, x) -> float:
    """Exact function value at ``x``."""
    x = as_vector(x, f.dim)
    return _value(f, x)


def _value(f, x) -> float:
    if isinstance(f, MaxAffine):
        return float(np.max(f.matrix @ x + f.offsets))
    if isinstance(f, Quadratic):
        return float(x @ f.Q @ x + f.c @ x + f.r0)
    if isinstance(f, SumFunction):
        return float(sum(_value(p, x) for p in f.parts))
    raise TypeError(f"not a convex function: {type(f).__name__}")


def evaluate_many(f: ConvexFunction, X) -> np.ndarray:
    """Vectorized values at the rows of ``X`` (shape (N, dim))."""
    X = as_matrix(X)
    if X.shape[1] != f.dim:
        raise DimensionMismatch(f"points have dimension {X.shape[1]}, function has {f.dim}")
    return _values(f, X)


def _values(f, X) -> np.ndarray:
    if isinstance(f, MaxAffine):
        return np.max(X @ f.matrix.T + f.offsets, axis=1)
    if isinstance(f, Quadratic):
        return np.einsum("ij,jk,ik->i", X, f.Q, X) + X @ f.c + f.r0
    if isinstance(f, SumFunction):
        total = np.zeros(X.shape[0])
        for p in f.parts:
            total += _values(p, X)
        return total
    raise TypeError(f"not a convex function: {type(f).__name__}")


def subdifferential(f: ConvexFunction, x, active_tol: float = ACTIVE_TOL) -> Polytope:
    """The subdifferential at ``x`` as a generator polytope.

    ``active_tol`` is relative: a piece counts as active when its value is
    within active_tol * (|max| + 1) of the maximum.
    """
    x = as_vector(x, f.dim)
    if active_tol < 0:
        raise ValueError("active_tol must be nonnegative")
    return Polytope(f.dim, _generators(f, x, active_tol))


def _generators(f, x, active_tol) -> np.ndarray:
    if isinstance(f, MaxAffine):
        values = f.matrix @ x + f.offsets
        top = float(np.max(values))
        cut = top - active_tol * (abs(top) + 1.0)
        return f.matrix[values >= cut].copy()
    if isinstance(f, Quadratic):
        return (2.0 * (f.Q @ x) + f.c)[None, :]
    if isinstance(f, SumFunction):
        gens = _generators(f.parts[0], x, active_tol)
        for p in f.parts[1:]:
            more = _generators(p, x, active_tol)
            gens = np.array([u + v for u, v in itertools.product(gens, more)])
        return gens
    raise TypeError(f"not a convex function: {type(f).__name__}")


def _direction(v, dim: int) -> np.ndarray:
    v = as_vector(v, dim)
    if float(np.linalg.norm(v)) == 0.0:
        raise ValueError("direction must be nonzero")
    return v


def directional_derivative_plus(f: ConvexFunction, x, v, active_tol: float = ACTIVE_TOL) -> float:
    """Right directional derivative: max of g . v over subgradients g."""
    v = _direction(v, f.dim)
    P = subdifferential(f, x, active_tol)
    return float(np.max(P.generators @ v))


def directional_derivative_minus(f: ConvexFunction, x, v, active_tol: float = ACTIVE_TOL) -> float:
    """Left directional derivative: min of g . v over subgradients g."""
    v = _direction(v, f.dim)
    P = subdifferential(f, x, active_tol)
    return float(np.min(P.generators @ v))


def one_dim_subdifferential(f: ConvexFunction, x, v, active_tol: float = ACTIVE_TOL) -> tuple[float, float]:
    """Subdifferential interval of t -> f(x + t v) at t = 0.

    Returns (lo, hi) = (left derivative, right derivative); lo <= hi always.
    """
    v = _direction(v, f.dim)
    P = subdifferential(f, x, active_tol)
    along = P.generators @ v
    return float(np.min(along)), float(np.max(along))


def fd_directional_derivative(f: ConvexFunction, x, v, h: float) -> float:
    """Forward-difference quotient (f(x + h v) - f(x)) / h; h must be positive."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_vector(x, f.dim)
    v = _direction(v, f.dim)
    return (evaluate(f, x + h * v) - evaluate(f, x)) / h
