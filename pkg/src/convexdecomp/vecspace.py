"""Dense vectors and subspaces of R^n.

Subspaces are stored as an orthonormal basis held row-wise.  Spans are
accumulated incrementally by modified Gram-Schmidt with one
reorthogonalization pass, so the rank decision for each candidate is made
against everything accepted before it.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DimensionError

ORTHONORMAL_TOL = 1e-12


def as_vector(z, dim=None, name="vector"):
    """Return ``z`` as a finite 1-d float array, optionally checking its length."""
    v = np.asarray(z, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n given by an orthonormal basis.

    Attributes
    ----------
    ambient_dim : int
    basis : ndarray, shape (k, ambient_dim)
        Orthonormal rows; ``k`` may be zero.
    tol : float
        Dependence tolerance used when the basis was accumulated.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        B = np.array(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self):
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"

    def is_orthonormal(self, atol=ORTHONORMAL_TOL):
        G = self.basis @ self.basis.T
        return bool(np.all(np.abs(G - np.eye(self.dim)) <= atol))

    @classmethod
    def zero(cls, n, tol=1e-9):
        return cls(n, np.zeros((0, n)), tol)

    @classmethod
    def full(cls, n, tol=1e-9):
        return cls(n, np.eye(n), tol)


def accumulate_span(vectors, tol=1e-9, ambient_dim=None):
    """Orthonormal basis of the span of ``vectors``, processed in input order.

    A candidate is rejected as dependent when its residual after projection
    onto the basis accumulated so far has norm ``<= tol * max(1, |candidate|)``.

    Parameters
    ----------
    vectors : sequence of array_like or 2-d array
    tol : float
    ambient_dim : int, optional
        Needed only when ``vectors`` is empty.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = [as_vector(v, name="span candidate") for v in vectors]
    if not rows:
        if ambient_dim is None:
            raise ValueError("ambient_dim is required for an empty vector list")
        return Subspace.zero(ambient_dim, tol)
    n = rows[0].shape[0]
    if ambient_dim is not None and ambient_dim != n:
        raise DimensionError(f"vectors have dimension {n}, expected {ambient_dim}")
    if any(r.shape[0] != n for r in rows):
        raise DimensionError("span candidates have mixed dimensions")
    return extend_span(Subspace.zero(n, tol), np.vstack(rows), tol)


def extend_span(s, vectors, tol=None):
    """Continue accumulating ``vectors`` onto the basis of ``s``."""
    tol = s.tol if tol is None else tol
    C = np.ascontiguousarray(np.asarray(vectors, dtype=float).reshape(-1, s.ambient_dim))
    if not np.all(np.isfinite(C)):
        raise ValueError("span candidates have non-finite entries")
    B = np.zeros((s.ambient_dim, s.ambient_dim))
    B[: s.dim] = s.basis
    k = _backend.kernels.mgs_accumulate(B, s.dim, C, float(tol))
    return Subspace(s.ambient_dim, B[:k].copy(), tol)


def _check(s, z):
    return as_vector(z, s.ambient_dim, "point")


def project(s, z):
    """Orthogonal projection of ``z`` onto ``s``."""
    z = _check(s, z)
    if s.dim == 0:
        return np.zeros_like(z)
    return s.basis.T @ (s.basis @ z)


def complement_project(s, z):
    """Projection onto the orthogonal complement, ``z - project(s, z)``."""
    z = _check(s, z)
    return z - project(s, z)


def coordinates(s, z):
    """Coefficients of the projection of ``z`` in the basis of ``s``."""
    return s.basis @ _check(s, z)


def embed(s, u):
    """Point of R^n with coordinates ``u`` in the basis of ``s``."""
    u = as_vector(u, s.dim, "coordinates")
    return s.basis.T @ u


def orthogonal_complement(s):
    """Orthonormal basis of the complement, from a full SVD of the basis."""
    n, k = s.ambient_dim, s.dim
    if k == 0:
        return Subspace.full(n, s.tol)
    _, _, Vt = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(n, Vt[k:], s.tol)


def subspace_distance(a, b):
    """Largest sine of the principal angles between ``a`` and ``b``.

    Returns 1.0 when the dimensions differ and 0.0 for two zero subspaces.
    The sines are taken as singular values of the residual ``B_a - B_a P_b``
    rather than ``sqrt(1 - cos^2)``, which keeps small angles accurate.
    """
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    if a.dim != b.dim:
        return 1.0
    if a.dim == 0:
        return 0.0

    def one_way(p, q):
        R = p.basis - (p.basis @ q.basis.T) @ q.basis
        return np.linalg.norm(R, 2)

    return float(min(1.0, max(one_way(a, b), one_way(b, a))))


def intersect(a, b, tol=1e-9):
    """Intersection of two subspaces as the complement of the sum of complements."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    ca, cb = orthogonal_complement(a), orthogonal_complement(b)
    rows = np.vstack([ca.basis, cb.basis])
    return orthogonal_complement(extend_span(Subspace.zero(a.ambient_dim, tol), rows, tol))
