"""Continuous convex functions with value and subgradient oracles.

Every structural variant is convex by construction.  Subgradients follow a
fixed selection rule so that repeated calls, and the sampling code built on
them, are deterministic:

* ``MaxAffine`` returns the slope of the lowest-index piece within ``1e-12``
  of the maximum;
* ``ReluSquare`` and ``Abs`` kernels take derivative 0 at their kink.
"""
import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import DimensionError, RangeError
from .vecspace import as_vector

TIE_TOL = 1e-12
PSD_TOL = 1e-10
EXP_LIMIT = 700.0


class Kernel(enum.Enum):
    RELU_SQUARE = "relu_square"
    SQUARE = "square"
    ABS = "abs"
    EXP = "exp"

    @property
    def code(self):
        return _KERNEL_CODES[self]

    def __call__(self, t):
        """Kernel value at scalar ``t``."""
        if self is Kernel.RELU_SQUARE:
            return t * t if t > 0.0 else 0.0
        if self is Kernel.SQUARE:
            return t * t
        if self is Kernel.ABS:
            return abs(t)
        if t > EXP_LIMIT:
            raise RangeError(f"exp argument {t} exceeds {EXP_LIMIT}")
        return float(np.exp(t))

    def derivative(self, t):
        """Chosen element of the subdifferential at scalar ``t``."""
        if self is Kernel.RELU_SQUARE:
            return 2.0 * t if t > 0.0 else 0.0
        if self is Kernel.SQUARE:
            return 2.0 * t
        if self is Kernel.ABS:
            return 1.0 if t > 0.0 else (-1.0 if t < 0.0 else 0.0)
        if t > EXP_LIMIT:
            raise RangeError(f"exp argument {t} exceeds {EXP_LIMIT}")
        return float(np.exp(t))


_KERNEL_CODES = {Kernel.RELU_SQUARE: 0, Kernel.SQUARE: 1, Kernel.ABS: 2, Kernel.EXP: 3}


class ConvexFunction:
    """Base class.  Subclasses provide ``dim``, ``_value`` and ``_subgradient``.

    ``values``/``subgradients`` evaluate row-wise on a 2-d array; the
    structural variants override them with vectorized versions.
    """

    dim: int

    def value(self, z):
        return self._value(self._point(z))

    def subgradient(self, z):
        return self._subgradient(self._point(z))

    def values(self, Z):
        Z = self._points(Z)
        return np.array([self._value(z) for z in Z])

    def subgradients(self, Z):
        Z = self._points(Z)
        out = np.empty_like(Z)
        for i, z in enumerate(Z):
            out[i] = self._subgradient(z)
        return out

    def __call__(self, z):
        return self.value(z)

    def _point(self, z):
        return as_vector(z, self.dim, "point")

    def _points(self, Z):
        Z = np.asarray(Z, dtype=float)
        if Z.ndim == 1 and self.dim == 1:
            Z = Z.reshape(-1, 1)
        if Z.ndim != 2 or Z.shape[1] != self.dim:
            raise DimensionError(f"expected points of dimension {self.dim}, got shape {Z.shape}")
        return Z

    # combinators
    def __add__(self, other):
        if not isinstance(other, ConvexFunction):
            return NotImplemented
        return Sum([self, other])

    def shifted(self, l=None, c0=0.0):
        """``self + <l, .> + c0``."""
        return AffinePlus(self, np.zeros(self.dim) if l is None else l, c0)


def _array(x, ndim, name):
    a = np.array(x, dtype=float)
    if a.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


def smallest_eigenvalue_estimate(A, steps=64):
    """Estimate of the smallest eigenvalue of symmetric ``A`` by shifted power iteration."""
    n = A.shape[0]
    shift = float(np.abs(A).sum(axis=1).max()) if n else 0.0
    if shift == 0.0:
        return 0.0
    B = shift * np.eye(n) - A
    x = np.random.default_rng(0).standard_normal(n)
    x /= np.linalg.norm(x)
    mu = 0.0
    for _ in range(steps):
        y = B @ x
        mu = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
    return shift - mu


@dataclass(frozen=True, eq=False)
class Quadratic(ConvexFunction):
    """``0.5 x'Ax + b'x + c`` with ``A`` symmetric positive semidefinite."""

    A: np.ndarray
    b: Optional[np.ndarray] = None
    c: float = 0.0

    def __post_init__(self):
        A = _array(self.A, 2, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0))):
            raise ValueError("A must be symmetric")
        b = np.zeros(n) if self.b is None else self.b
        b = _array(b, 1, "b")
        if b.shape[0] != n:
            raise DimensionError(f"b has dimension {b.shape[0]}, A has {n}")
        scale = np.linalg.norm(A, 2) if n else 0.0
        if n and smallest_eigenvalue_estimate(A) < -PSD_TOL * max(scale, 1e-300):
            raise ValueError("A is not positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self):
        return self.A.shape[0]

    def _value(self, z):
        return 0.5 * float(z @ self.A @ z) + float(self.b @ z) + self.c

    def _subgradient(self, z):
        return self.A @ z + self.b

    def values(self, Z):
        Z = self._points(Z)
        return 0.5 * np.einsum("ij,ij->i", Z @ self.A, Z) + Z @ self.b + self.c

    def subgradients(self, Z):
        Z = self._points(Z)
        return Z @ self.A + self.b


@dataclass(frozen=True, eq=False)
class MaxAffine(ConvexFunction):
    """``max_i <slopes[i], x> + intercepts[i]``."""

    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        S = _array(self.slopes, 2, "slopes")
        c = _array(self.intercepts, 1, "intercepts")
        if S.shape[0] == 0:
            raise ValueError("MaxAffine needs at least one piece")
        if c.shape[0] != S.shape[0]:
            raise DimensionError("slopes and intercepts disagree on the piece count")
        object.__setattr__(self, "slopes", S)
        object.__setattr__(self, "intercepts", c)

    @classmethod
    def from_pieces(cls, pieces):
        """Build from a list of ``(a, c)`` pairs."""
        pieces = list(pieces)
        if not pieces:
            raise ValueError("MaxAffine needs at least one piece")
        return cls(np.array([a for a, _ in pieces], dtype=float),
                   np.array([c for _, c in pieces], dtype=float))

    @property
    def dim(self):
        return self.slopes.shape[1]

    @property
    def n_pieces(self):
        return self.slopes.shape[0]

    def piece_values(self, z):
        return self.slopes @ z + self.intercepts

    def active_index(self, z):
        p = self.piece_values(z)
        return int(np.flatnonzero(p >= p.max() - TIE_TOL)[0])

    def _value(self, z):
        return float(self.piece_values(z).max())

    def _subgradient(self, z):
        return self.slopes[self.active_index(z)].copy()

    def values(self, Z):
        Z = self._points(Z)
        return (Z @ self.slopes.T + self.intercepts).max(axis=1)

    def subgradients(self, Z):
        Z = self._points(Z)
        P = Z @ self.slopes.T + self.intercepts
        idx = np.argmax(P >= P.max(axis=1, keepdims=True) - TIE_TOL, axis=1)
        return self.slopes[idx].copy()


@dataclass(frozen=True)
class Term:
    """One summand ``w * kernel(<a, x> - s)`` of a :class:`ScalarComposite`."""

    w: float
    kernel: Kernel
    a: tuple
    s: float = 0.0


@dataclass(frozen=True, eq=False)
class ScalarComposite(ConvexFunction):
    """``sum_i weights[i] * kernels[i](<directions[i], x> - shifts[i])``."""

    weights: np.ndarray
    kernels: tuple
    directions: np.ndarray
    shifts: np.ndarray

    def __post_init__(self):
        w = _array(self.weights, 1, "weights")
        D = _array(self.directions, 2, "directions")
        s = _array(self.shifts, 1, "shifts")
        kernels = tuple(Kernel(k) for k in self.kernels)
        T = w.shape[0]
        if T == 0:
            raise ValueError("ScalarComposite needs at least one term")
        if not (D.shape[0] == s.shape[0] == len(kernels) == T):
            raise DimensionError("term fields disagree on the term count")
        if np.any(w <= 0):
            raise ValueError("term weights must be positive")
        if np.any(np.linalg.norm(D, axis=1) == 0):
            raise ValueError("term directions must be nonzero")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "directions", np.ascontiguousarray(D))
        object.__setattr__(self, "shifts", s)
        object.__setattr__(self, "kernels", kernels)
        codes = np.array([k.code for k in kernels], dtype=np.int32)
        codes.setflags(write=False)
        object.__setattr__(self, "_codes", codes)

    @classmethod
    def from_terms(cls, terms):
        terms = list(terms)
        return cls(np.array([t.w for t in terms], dtype=float),
                   tuple(Kernel(t.kernel) for t in terms),
                   np.array([t.a for t in terms], dtype=float),
                   np.array([t.s for t in terms], dtype=float))

    @property
    def terms(self):
        return [Term(float(w), k, tuple(a), float(s))
                for w, k, a, s in zip(self.weights, self.kernels, self.directions, self.shifts)]

    @property
    def dim(self):
        return self.directions.shape[1]

    def _value(self, z):
        return float(self.values(z.reshape(1, -1))[0])

    def _subgradient(self, z):
        return self.subgradients(z.reshape(1, -1))[0]

    def values(self, Z):
        Z = np.ascontiguousarray(self._points(Z))
        out = np.empty(Z.shape[0])
        bad = _backend.kernels.composite_values(Z, self.directions, self.shifts,
                                                self.weights, self._codes, out)
        if bad >= 0:
            raise RangeError(f"exp kernel overflow at point {Z[bad]}")
        return out

    def subgradients(self, Z):
        Z = np.ascontiguousarray(self._points(Z))
        out = np.empty_like(Z)
        bad = _backend.kernels.composite_gradients(Z, self.directions, self.shifts,
                                                   self.weights, self._codes, out)
        if bad >= 0:
            raise RangeError(f"exp kernel overflow at point {Z[bad]}")
        return out


@dataclass(frozen=True, eq=False)
class AffinePlus(ConvexFunction):
    """``base + <l, .> + c0``."""

    base: ConvexFunction
    l: np.ndarray
    c0: float = 0.0

    def __post_init__(self):
        l = _array(self.l, 1, "l")
        if l.shape[0] != self.base.dim:
            raise DimensionError(f"l has dimension {l.shape[0]}, base has {self.base.dim}")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "c0", float(self.c0))

    @property
    def dim(self):
        return self.base.dim

    def _value(self, z):
        return self.base._value(z) + float(self.l @ z) + self.c0

    def _subgradient(self, z):
        return self.base._subgradient(z) + self.l

    def values(self, Z):
        Z = self._points(Z)
        return self.base.values(Z) + Z @ self.l + self.c0

    def subgradients(self, Z):
        Z = self._points(Z)
        return self.base.subgradients(Z) + self.l


@dataclass(frozen=True, eq=False)
class Sum(ConvexFunction):
    """Sum of convex functions on a common space, added left to right."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("Sum needs at least one part")
        if len({p.dim for p in parts}) != 1:
            raise DimensionError("Sum parts have different dimensions")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def _value(self, z):
        total = self.parts[0]._value(z)
        for p in self.parts[1:]:
            total = total + p._value(z)
        return total

    def _subgradient(self, z):
        g = self.parts[0]._subgradient(z)
        for p in self.parts[1:]:
            g = g + p._subgradient(z)
        return g

    def values(self, Z):
        Z = self._points(Z)
        total = self.parts[0].values(Z)
        for p in self.parts[1:]:
            total = total + p.values(Z)
        return total

    def subgradients(self, Z):
        Z = self._points(Z)
        g = self.parts[0].subgradients(Z)
        for p in self.parts[1:]:
            g = g + p.subgradients(Z)
        return g


@dataclass(frozen=True, eq=False)
class BlackBox(ConvexFunction):
    """Opaque convex function given by callables.

    The oracles may be invoked from several worker threads at once.
    ``values_fn``, when given, evaluates a 2-d array of points in one call.
    """

    value_fn: Callable
    subgradient_fn: Callable
    dim: int = field(default=1)
    values_fn: Optional[Callable] = None

    @classmethod
    def wrap(cls, f):
        """Hide the structure of ``f`` behind its oracles."""
        return cls(f.value, f.subgradient, f.dim, f.values)

    def _value(self, z):
        return float(self.value_fn(z))

    def _subgradient(self, z):
        return as_vector(self.subgradient_fn(z), self.dim, "oracle subgradient")

    def values(self, Z):
        if self.values_fn is None:
            return super().values(Z)
        return np.asarray(self.values_fn(self._points(Z)), dtype=float)


def is_structural(f):
    """True when ``f`` contains no black-box component."""
    if isinstance(f, BlackBox):
        return False
    if isinstance(f, AffinePlus):
        return is_structural(f.base)
    if isinstance(f, Sum):
        return all(is_structural(p) for p in f.parts)
    return True


def evaluate(f, z):
    """Value of ``f`` at ``z``."""
    return f.value(z)


def subgradient(f, z):
    """The chosen subgradient of ``f`` at ``z``."""
    return f.subgradient(z)


@dataclass(frozen=True, eq=False)
class SubgradientSample:
    point: np.ndarray
    xi: np.ndarray


PROBE_SCALES = (1e-2, 1.0, 8.0, 64.0)


def probe_points(point, probes, seed):
    """Seeded probe points around ``point`` at mixed scales."""
    rng = np.random.default_rng(seed)
    n = point.shape[0]
    scales = np.array([PROBE_SCALES[i % len(PROBE_SCALES)] for i in range(probes)])
    return point + scales[:, None] * rng.standard_normal((probes, n))


def subgradient_violation(f, sample, probes=64, seed=0):
    """Largest relative violation of the subgradient inequality over the probes.

    A value ``<= 1e-8`` means the inequality held everywhere with the
    tolerance ``1e-8 * (1 + |f(y)|)``.  Probes where an exponential kernel
    overflows are skipped: there ``f(y)`` is astronomically large.
    """
    x = as_vector(sample.point, f.dim, "sample point")
    xi = as_vector(sample.xi, f.dim, "sample subgradient")
    fx = f.value(x)
    Y = probe_points(x, probes, seed)
    try:
        fy = f.values(Y)
    except RangeError:
        fy = []
        for y in Y:
            try:
                fy.append(f.value(y))
            except RangeError:
                fy.append(np.inf)
        fy = np.array(fy)
    lower = fx + (Y - x) @ xi
    with np.errstate(invalid="ignore"):
        rel = (lower - fy) / (1.0 + np.abs(fy))
    rel = np.where(np.isfinite(fy), rel, -np.inf)
    return float(rel.max())


def validate_subgradient(f, sample, probes=64, seed=0):
    """Check ``sample.xi`` against the subgradient inequality at seeded probes."""
    if probes < 1:
        raise ValueError("probes must be >= 1")
    return subgradient_violation(f, sample, probes, seed) <= 1e-8
