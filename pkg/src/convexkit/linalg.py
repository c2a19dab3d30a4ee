"""Dense real linear algebra: orthonormal bases, kernels, projections, anchors.

Everything here is deterministic and allocation-light.  Rank decisions use
modified Gram-Schmidt with one re-orthogonalization pass; thresholds are
relative to the largest input norm so the routines are scale invariant.
All functions are pure and all returned arrays are freshly allocated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleFiber

RANK_TOL = 1e-10
ANCHOR_RESIDUAL_TOL = 1e-8


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-d float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_matrix(a, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce to a finite 2-d float array, optionally checking its shape."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if shape is not None and m.shape != shape:
        raise DimensionMismatch(f"expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by an orthonormal row basis.

    ``basis`` has shape (dim, ambient_dim); an empty basis (0 rows) is the
    zero subspace.  Orthonormality is validated on construction.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis)
        if b.shape[1] != self.ambient_dim:
            raise DimensionMismatch(
                f"basis rows live in R^{b.shape[1]}, ambient is R^{self.ambient_dim}"
            )
        if b.shape[0] > 0:
            gram = b @ b.T
            if not np.allclose(gram, np.eye(b.shape[0]), atol=1e-10):
                raise ValueError("basis rows are not orthonormal within 1e-10")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def _strip(u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # two projection-removal passes: plain MGS leaks for near-dependent input
    for _ in range(2):
        if rows.shape[0]:
            u = u - rows.T @ (rows @ u)
    return u


def orthonormalize(vectors, tol: float = RANK_TOL, *, ambient_dim: int | None = None) -> Subspace:
    """Orthonormal basis for the span of ``vectors``.

    Modified Gram-Schmidt with re-orthogonalization.  A vector is dropped when
    its residual after projection removal is at most ``tol`` times the largest
    input norm.  ``ambient_dim`` is only needed when ``vectors`` is empty.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vs = [as_vector(v) for v in vectors]
    dims = {v.shape[0] for v in vs}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed vector dimensions: {sorted(dims)}")
    if not vs:
        if ambient_dim is None:
            raise ValueError("ambient_dim is required for an empty vector list")
        return Subspace(ambient_dim, np.zeros((0, ambient_dim)))
    n = dims.pop()
    scale = max(float(np.linalg.norm(v)) for v in vs)
    threshold = tol * scale
    rows = np.zeros((0, n))
    for v in vs:
        u = _strip(v.copy(), rows)
        norm = float(np.linalg.norm(u))
        if norm > threshold:
            rows = np.vstack([rows, u / norm])
    return Subspace(n, rows)


def row_space(S, tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of the span of the rows of ``S``."""
    S = as_matrix(S)
    return orthonormalize(list(S), tol, ambient_dim=S.shape[1])


def kernel(S, tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of the null space of ``S``.

    Built as the orthogonal complement of the row space: each identity vector
    is stripped of its row-space and already-accepted components; survivors
    (residual norm above ``tol``) are normalized and kept.  Dimensions add up
    with ``row_space`` by construction.
    """
    S = as_matrix(S)
    n = S.shape[1]
    pre = row_space(S, tol).basis
    rows = np.zeros((0, n))
    for i in range(n):
        u = np.zeros(n)
        u[i] = 1.0
        u = _strip(_strip(u, pre), rows)
        # one more combined pass keeps the complement orthogonal to both
        u = _strip(_strip(u, pre), rows)
        norm = float(np.linalg.norm(u))
        if norm > tol:
            rows = np.vstack([rows, u / norm])
    return Subspace(n, rows)


def project(x, W: Subspace) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the subspace ``W``."""
    x = as_vector(x, W.ambient_dim)
    if W.dim == 0:
        return np.zeros(W.ambient_dim)
    return W.basis.T @ (W.basis @ x)


def solve_anchor(S, zeta, tol: float = ANCHOR_RESIDUAL_TOL, *, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Minimum-norm solution of ``S y = zeta``.

    The solution is sought in the row space of ``S`` via normal equations on
    row-space coordinates, which keeps the output orthogonal to the kernel.
    Raises InfeasibleFiber when the residual exceeds ``tol``.
    """
    S = as_matrix(S)
    zeta = as_vector(zeta, S.shape[0])
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = row_space(S, rank_tol)
    if rows.dim == 0:
        y = np.zeros(S.shape[1])
    else:
        M = S @ rows.basis.T
        w = np.linalg.solve(M.T @ M, M.T @ zeta)
        y = rows.basis.T @ w
    residual = float(np.linalg.norm(S @ y - zeta))
    if residual > tol:
        raise InfeasibleFiber(
            f"no solution within tolerance: residual {residual:.3e} > {tol:.3e}"
        )
    return y
