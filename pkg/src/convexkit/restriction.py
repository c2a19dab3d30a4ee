"""Restriction of convex functions to affine solution sets.

For a convex f on R^n and the solution set {y : S y = zeta}, the restriction
g(w) = f(anchor + B^T w) is parametrized by coordinates w over an orthonormal
kernel basis B of S.  Its subdifferential is the orthogonal projection of the
ambient subdifferential onto ker(S): feasible directions inside the solution
set are exactly the kernel directions, so the projection must land in ker(S).
(Projecting onto the row space instead is the natural-looking mistake; it is
dimensionally wrong for the restriction and the checks below catch it.)

The projection identity is verified per direction through one-dimensional
slices: for v in ker(S), the interval of t -> f(x + t v) at 0 must equal
[-support(P, -v), support(P, v)] where P is the projected subdifferential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import functions
from .errors import DimensionMismatch
from .functions import ACTIVE_TOL, Polytope, subdifferential
from .instances import function_to_json, matrix_to_json, vector_to_json
from .linalg import RANK_TOL, Subspace, as_matrix, as_vector, kernel, solve_anchor
from .report import CheckResult, TrialResult

SUPPORT_TOL = 1e-7
CONVEXITY_SLACK = 1e-9
FIBER_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class AffineFiber:
    """The affine set {y : matrix @ y = target} with a min-norm anchor point."""

    matrix: np.ndarray
    target: np.ndarray
    anchor: np.ndarray
    kernel_basis: Subspace

    def __post_init__(self):
        M = as_matrix(self.matrix)
        t = as_vector(self.target, M.shape[0])
        a = as_vector(self.anchor, M.shape[1])
        if self.kernel_basis.ambient_dim != M.shape[1]:
            raise DimensionMismatch("kernel basis ambient dimension disagrees with the map")
        if float(np.linalg.norm(M @ a - t)) > FIBER_RESIDUAL_TOL:
            raise ValueError("anchor does not satisfy the affine system within 1e-8")
        if self.kernel_basis.dim:
            if float(np.max(np.abs(self.kernel_basis.basis @ a))) > FIBER_RESIDUAL_TOL:
                raise ValueError("anchor has a kernel component above 1e-8")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "anchor", a)

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def fiber_dim(self) -> int:
        return self.kernel_basis.dim


def make_fiber(S, zeta, *, residual_tol: float = FIBER_RESIDUAL_TOL, rank_tol: float = RANK_TOL) -> AffineFiber:
    """Build the fiber of ``S`` over ``zeta``; raises InfeasibleFiber when empty."""
    S = as_matrix(S)
    anchor = solve_anchor(S, zeta, residual_tol, rank_tol=rank_tol)
    return AffineFiber(S, as_vector(zeta, S.shape[0]), anchor, kernel(S, rank_tol))


def embed(fiber: AffineFiber, w) -> np.ndarray:
    """Map fiber coordinates w to the ambient point anchor + B^T w."""
    w = as_vector(w, fiber.fiber_dim)
    if fiber.fiber_dim == 0:
        return fiber.anchor.copy()
    return fiber.anchor + fiber.kernel_basis.basis.T @ w


@dataclass(frozen=True)
class RestrictedFunction:
    """A convex function composed with a fiber parametrization."""

    f: functions.ConvexFunction
    fiber: AffineFiber

    def __post_init__(self):
        if self.f.dim != self.fiber.ambient_dim:
            raise DimensionMismatch(
                f"function lives on R^{self.f.dim}, fiber on R^{self.fiber.ambient_dim}"
            )


def restrict(f, S, zeta, **fiber_kwargs) -> RestrictedFunction:
    return RestrictedFunction(f, make_fiber(S, zeta, **fiber_kwargs))


def restrict_evaluate(g: RestrictedFunction, w) -> float:
    return functions.evaluate(g.f, embed(g.fiber, w))


def restricted_subdifferential(g: RestrictedFunction, w, active_tol: float = ACTIVE_TOL) -> Polytope:
    """Subdifferential of the restriction: ambient generators projected onto ker(S).

    Output generators are ambient vectors lying inside the kernel subspace.
    A zero-dimensional fiber yields the singleton origin.
    """
    x = embed(g.fiber, w)
    P = subdifferential(g.f, x, active_tol)
    B = g.fiber.kernel_basis.basis
    if B.shape[0] == 0:
        return Polytope(g.fiber.ambient_dim, np.zeros((1, g.fiber.ambient_dim)))
    projected = (P.generators @ B.T) @ B
    return Polytope(g.fiber.ambient_dim, projected)


def support_function(P: Polytope, v) -> float:
    """h_P(v) = max over generators of the inner product with v."""
    v = as_vector(v, P.ambient_dim)
    return float(np.max(P.generators @ v))


def default_directions(dim: int, *, seed: int = 0, random_count: int = 50) -> list[np.ndarray]:
    """Deterministic direction battery: +-e_i, normalized e_i +- e_j, seeded units."""
    dirs: list[np.ndarray] = []
    eye = np.eye(dim)
    for i in range(dim):
        dirs.append(eye[i].copy())
        dirs.append(-eye[i])
    for i in range(dim):
        for j in range(i + 1, dim):
            for sign in (1.0, -1.0):
                d = eye[i] + sign * eye[j]
                dirs.append(d / np.linalg.norm(d))
    rng = np.random.default_rng(seed)
    made = 0
    while made < random_count:
        d = rng.normal(size=dim)
        norm = float(np.linalg.norm(d))
        if norm > 1e-12:
            dirs.append(d / norm)
            made += 1
    return dirs


def polytopes_equal(P1: Polytope, P2: Polytope, directions=None, tol: float = SUPPORT_TOL) -> bool:
    """Support-function equality over a direction battery.

    Exact for equal hulls; distinct hulls differ along some tested direction
    with overwhelming probability once the battery includes random units.
    """
    if P1.ambient_dim != P2.ambient_dim:
        raise DimensionMismatch("polytopes live in different spaces")
    if directions is None:
        directions = default_directions(P1.ambient_dim)
    scale = 1.0 + max(
        float(np.max(np.abs(P1.generators))), float(np.max(np.abs(P2.generators)))
    )
    for v in directions:
        if abs(support_function(P1, v) - support_function(P2, v)) > tol * scale:
            return False
    return True


def lemma1_check(
    f,
    S,
    zeta,
    w,
    directions,
    *,
    pairs: int = 20,
    seed: int = 0,
    support_tol: float = SUPPORT_TOL,
    convexity_slack: float = CONVEXITY_SLACK,
    active_tol: float = ACTIVE_TOL,
    pair_scale: float = 2.0,
) -> TrialResult:
    """One verification trial for the restricted-subdifferential identity.

    Per direction v (must lie in ker S): the one-dimensional subdifferential
    interval of the ambient f at embed(w) along v has to match
    [-support(P, -v), support(P, v)] for the projected polytope P within
    ``support_tol``.  Additionally the restriction must be midpoint convex on
    ``pairs`` seeded coordinate pairs up to ``convexity_slack``.
    """
    g = restrict(f, S, zeta)
    fiber = g.fiber
    w = as_vector(w, fiber.fiber_dim)
    x = embed(fiber, w)
    P = restricted_subdifferential(g, w, active_tol)

    instance = {
        "f": function_to_json(f),
        "S": matrix_to_json(fiber.matrix),
        "zeta": vector_to_json(fiber.target),
        "w": vector_to_json(w),
        "directions": [vector_to_json(v) for v in directions],
        "seed": int(seed),
        "suite": "lemma1",
    }
    checks: list[CheckResult] = []

    for i, v in enumerate(directions):
        v = as_vector(v, fiber.ambient_dim)
        kernel_residual = float(np.linalg.norm(v - fiber.kernel_basis.basis.T @ (fiber.kernel_basis.basis @ v))) if fiber.fiber_dim else float(np.linalg.norm(v))
        if kernel_residual > 1e-9 * (1.0 + float(np.linalg.norm(v))):
            raise ValueError(f"direction {i} does not lie in the kernel of S")
        lo, hi = functions.one_dim_subdifferential(f, x, v, active_tol)
        want_hi = support_function(P, v)
        want_lo = -support_function(P, -v)
        gap = max(abs(lo - want_lo), abs(hi - want_hi))
        checks.append(
            CheckResult(
                name=f"slice_interval_{i}",
                passed=gap <= support_tol,
                gap=gap,
                witness={"direction": vector_to_json(v), "interval": [lo, hi], "projected": [want_lo, want_hi]},
            )
        )

    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(11,)))
    worst = None
    worst_pair = None
    for _ in range(pairs):
        w1 = rng.uniform(-pair_scale, pair_scale, fiber.fiber_dim)
        w2 = rng.uniform(-pair_scale, pair_scale, fiber.fiber_dim)
        gap = 0.5 * (restrict_evaluate(g, w1) + restrict_evaluate(g, w2)) - restrict_evaluate(
            g, 0.5 * (w1 + w2)
        )
        if worst is None or gap < worst:
            worst, worst_pair = gap, (w1, w2)
    if worst is None:
        worst = 0.0
    checks.append(
        CheckResult(
            name="restricted_midpoint_convexity",
            passed=worst >= -convexity_slack,
            gap=worst,
            witness=None
            if worst_pair is None
            else {"w1": vector_to_json(worst_pair[0]), "w2": vector_to_json(worst_pair[1])},
        )
    )
    return TrialResult(trial_id=0, instance=instance, checks=checks).settle()
