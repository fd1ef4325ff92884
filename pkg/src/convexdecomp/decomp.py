"""Canonical decomposition ``f = c(P_X z) + <v, z>`` of a convex function.

``X`` is the span of all differences of subgradients of ``f``; its
orthogonal complement ``Y`` is the subspace of directions along which ``f``
agrees with its supporting affine map at any base point; ``v`` is the part
of any subgradient orthogonal to ``X``; and the core ``c`` is ``f``
restricted to ``X``.

Structural functions are decomposed from closed forms.  Black boxes (or
any function when ``method="sample"``) are decomposed by accumulating
subgradient differences at seeded multi-scale sample points until the rank
is stable, then cross-checked by line-flatness probes on the complement.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, InconclusiveError, InconsistencyError, OracleError
from .funcrepr import (AffinePlus, MaxAffine, Quadratic, ScalarComposite, SubgradientSample,
                       Sum, is_structural, validate_subgradient)
from .vecspace import (Subspace, accumulate_span, as_vector, complement_project, coordinates,
                       extend_span, orthogonal_complement, subspace_distance)

SAMPLE_SCALES = (1.0, 8.0, 64.0)
DEFAULT_TS = (1.0, -1.0, 4.0, -4.0, 16.0, -16.0, 64.0, -64.0, 256.0, -256.0)
FLAT_TOL = 1e-8
CROSS_CHECK_TOL = 1e-6
ACTIVE_MARGIN = 1e-10
ORACLE_PROBES = 64


@dataclass(frozen=True)
class DecompConfig:
    """Sampling and tolerance settings.

    ``samples`` and ``max_samples`` default to ``64 * dim`` and ``100 * dim``.
    ``workers`` only changes how oracle calls are scheduled, never the result.
    """

    samples: Optional[int] = None
    seed: int = 0
    tol_rank: float = 1e-9
    ts: tuple = DEFAULT_TS
    stability_batches: int = 3
    max_samples: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.samples is not None and self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.tol_rank <= 0:
            raise ValueError("tol_rank must be positive")
        ts = tuple(float(t) for t in self.ts)
        if not ts or not any(t > 0 for t in ts) or not any(t < 0 for t in ts):
            raise ValueError("ts must contain both positive and negative values")
        object.__setattr__(self, "ts", ts)
        if self.stability_batches < 1:
            raise ValueError("stability_batches must be >= 1")
        if self.max_samples is not None and self.max_samples < 1:
            raise ValueError("max_samples must be >= 1")

    def n_samples(self, dim):
        return self.samples if self.samples is not None else 64 * dim

    def sample_cap(self, dim):
        return self.max_samples if self.max_samples is not None else 100 * dim


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Result of :func:`decompose`.

    Attributes
    ----------
    x_space, y_space : Subspace
        Coercive-direction subspace and its complement, the constancy subspace.
    v : ndarray
        Residual linear part, orthogonal to ``x_space``.
    z0, xi0 : ndarray
        Base point and the subgradient chosen there.
    a : float
        ``f(z0) - <xi0, z0>``, the lower bound of the normalized core.
    method : str
        ``"exact"`` or ``"sample"``.
    samples_used : int
    conclusive : bool
    """

    f: object
    x_space: Subspace
    y_space: Subspace
    v: np.ndarray
    z0: np.ndarray
    xi0: np.ndarray
    a: float
    method: str = "exact"
    samples_used: int = 0
    conclusive: bool = True

    def core(self, u):
        """Core function at coordinates ``u`` of a point of ``x_space``."""
        x = self.x_space.basis.T @ as_vector(u, self.x_space.dim, "core coordinates")
        return self.f.value(x) - float(self.v @ x)

    def core_values(self, U):
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U.reshape(1, -1)
        Xs = U @ self.x_space.basis
        return self.f.values(Xs) - Xs @ self.v

    def reconstruct(self, z):
        """``core(P_X z) + <v, z>``, which equals ``f(z)``."""
        z = as_vector(z, self.x_space.ambient_dim)
        return self.core(coordinates(self.x_space, z)) + float(self.v @ z)

    def reconstruct_values(self, Z):
        Z = np.asarray(Z, dtype=float)
        return self.core_values(Z @ self.x_space.basis.T) + Z @ self.v


@dataclass(frozen=True)
class DecompReport:
    """Residuals from :func:`verify_decomposition`.

    ``*_rel`` entries divide each residual by its natural scale before taking
    the maximum: ``1 + |f(z)|`` for r1 and r2, ``1 + |xi|`` for r3.
    """

    r1: float
    r1_rel: float
    r2: float
    r2_rel: float
    r3: float
    r3_rel: float
    probes: int

    def as_dict(self):
        return {k: getattr(self, k) for k in ("r1", "r1_rel", "r2", "r2_rel", "r3", "r3_rel", "probes")}


# ---------------------------------------------------------------------------
# closed forms


def retained_pieces(f, seed=0):
    """Indices of max-affine pieces that are strictly maximal somewhere.

    A piece is kept when it beats every other piece by ``1e-10`` at one of
    ``200 * dim`` seeded multi-scale samples or at a probe just off the
    bisector hyperplane it shares with another piece.  Exact duplicates keep
    their first copy.  A piece whose active region is never probed is dropped;
    the sampling path of :func:`decompose` is the cross-check for that case.
    """
    S, c = f.slopes, f.intercepts
    m, n = S.shape
    unique = []
    seen = set()
    for i in range(m):
        key = (S[i].tobytes(), float(c[i]))
        if key not in seen:
            seen.add(key)
            unique.append(i)
    if len(unique) == 1:
        return unique
    S_u, c_u = S[unique], c[unique]
    rng = np.random.default_rng([seed, 0xA11])
    k = 200 * n
    scales = np.array([SAMPLE_SCALES[i % 3] for i in range(k)])
    pts = [scales[:, None] * rng.standard_normal((k, n))]
    for i in range(len(unique)):
        for j in range(len(unique)):
            if i == j:
                continue
            d = S_u[i] - S_u[j]
            dd = float(d @ d)
            if dd == 0.0:
                continue
            x0 = (c_u[j] - c_u[i]) / dd * d
            u = d / np.sqrt(dd)
            pts.append(x0 + np.array([1e-4, 1e-2, 1.0, 1e2])[:, None] * u)
    P = np.vstack(pts) @ S_u.T + c_u
    keep = []
    for i in range(len(unique)):
        others = np.delete(P, i, axis=1)
        if np.any(P[:, i] - others.max(axis=1) > ACTIVE_MARGIN):
            keep.append(unique[i])
    return keep


def constraint_rows(f, seed=0):
    """Rows whose span is X and whose null space is Y, or None for black boxes."""
    if isinstance(f, Quadratic):
        return f.A
    if isinstance(f, MaxAffine):
        keep = retained_pieces(f, seed)
        return f.slopes[keep[1:]] - f.slopes[keep[0]]
    if isinstance(f, ScalarComposite):
        return f.directions
    if isinstance(f, AffinePlus):
        return constraint_rows(f.base, seed)
    if isinstance(f, Sum):
        parts = [constraint_rows(p, seed) for p in f.parts]
        if any(p is None for p in parts):
            return None
        return np.vstack(parts)
    return None


def _null_space(C, n, tol):
    if C.shape[0] == 0:
        return Subspace.full(n, tol)
    _, s, Vt = np.linalg.svd(C, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s.max(initial=0.0))))
    return Subspace(n, Vt[rank:], tol)


# ---------------------------------------------------------------------------
# sampling


def _pmap(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def sample_point(center, seed, index):
    """Sample ``index`` of the stream: ``center + scale * N(0, I)``."""
    rng = np.random.default_rng([seed, index])
    return center + SAMPLE_SCALES[index % 3] * rng.standard_normal(center.shape[0])


def _subgradients(f, P, workers):
    if workers <= 1 or is_structural(f):
        return f.subgradients(P)
    return np.vstack(_pmap(f.subgradient, list(P), workers))


def _check_oracle(f, points, xis, seed, first_index, workers):
    def check(i):
        s = SubgradientSample(points[i], xis[i])
        return validate_subgradient(f, s, ORACLE_PROBES, [seed, first_index + i, 1])

    ok = _pmap(check, list(range(len(points))), workers)
    for i, good in enumerate(ok):
        if not good:
            raise OracleError(f"oracle returned a non-subgradient at sample {first_index + i}: "
                              f"point={points[i].tolist()}")


def sampled_span(f, center, xi_ref, config, validate=True):
    """Span of ``subgradient(z_i) - xi_ref`` over seeded samples around ``center``.

    Returns ``(subspace, samples_used, conclusive)``.  Sampling stops once at
    least ``config.samples`` points were used and the rank has not changed
    for ``config.stability_batches`` consecutive batches, or when the span
    is the whole space.  Reaching ``config.max_samples`` first is
    inconclusive.
    """
    n = f.dim
    batch = max(8, n)
    target, cap = config.n_samples(n), config.sample_cap(n)
    X = Subspace.zero(n, config.tol_rank)
    drawn, stable = 0, 0
    while drawn < cap:
        m = min(batch, cap - drawn)
        P = np.vstack([sample_point(center, config.seed, drawn + 1 + i) for i in range(m)])
        G = _subgradients(f, P, config.workers)
        if validate:
            _check_oracle(f, P, G, config.seed, drawn + 1, config.workers)
        prev = X.dim
        X = extend_span(X, G - xi_ref, config.tol_rank)
        drawn += m
        stable = stable + 1 if X.dim == prev else 0
        if X.dim == n:
            return X, drawn, True
        if drawn >= target and stable >= config.stability_batches:
            return X, drawn, True
    return X, drawn, stable >= config.stability_batches


def is_flat_direction(f, z0, xi0, v, ts=DEFAULT_TS, f0=None):
    """Whether ``f(z0 + t v) - f(z0) - t <xi0, v>`` vanishes for every t in ``ts``."""
    f0 = f.value(z0) if f0 is None else f0
    ts = np.asarray(ts, dtype=float)
    vals = f.values(z0 + ts[:, None] * v)
    dev = np.abs(vals - f0 - ts * float(xi0 @ v))
    return bool(np.all(dev <= FLAT_TOL * (1.0 + abs(f0))))


def _flat_filter(f, z0, xi0, candidates, config):
    f0 = f.value(z0)
    keep = [v for v in candidates.basis if is_flat_direction(f, z0, xi0, v, config.ts, f0)]
    if len(keep) == candidates.dim:
        return candidates
    return accumulate_span(keep, config.tol_rank, ambient_dim=f.dim)


# ---------------------------------------------------------------------------
# public operations


def _base(f, z0, xi0, validate, seed):
    n = f.dim
    z0 = np.zeros(n) if z0 is None else as_vector(z0, n, "z0")
    xi0 = f.subgradient(z0) if xi0 is None else as_vector(xi0, n, "xi0")
    if validate and not validate_subgradient(f, SubgradientSample(z0, xi0), ORACLE_PROBES, [seed, 0, 1]):
        raise OracleError(f"xi0={xi0.tolist()} is not a subgradient at z0={z0.tolist()}")
    return z0, xi0


def constancy_space(f, z0=None, xi0=None, config=None, method="auto"):
    """Constancy subspace Y: directions v with f(z0 + t v) = f(z0) + t <xi0, v> for all t.

    ``method="exact"`` reads Y off the closed form (SVD null space of the
    constraint rows); ``"sample"`` builds candidates as the complement of the
    subgradient-difference span sampled around ``z0`` and keeps those that
    pass the line-flatness probe at ``z0``.  ``"auto"`` picks exact for
    structural functions.
    """
    config = config or DecompConfig()
    z0, xi0 = _base(f, z0, xi0, True, config.seed)
    if method == "auto":
        method = "exact" if is_structural(f) else "sample"
    if method == "exact":
        C = constraint_rows(f, config.seed)
        if C is None:
            raise ValueError("exact constancy space needs a structural function")
        return _null_space(np.asarray(C, dtype=float), f.dim, config.tol_rank)
    if method != "sample":
        raise ValueError(f"unknown method {method!r}")
    X, _, _ = sampled_span(f, z0, xi0, config, validate=not is_structural(f))
    return _flat_filter(f, z0, xi0, orthogonal_complement(X), config)


def decompose(f, config=None, method="auto"):
    """Decompose ``f`` as ``core(P_X z) + <v, z>``.

    Raises
    ------
    InconclusiveError
        Sampling hit ``max_samples`` with the rank still moving; the partial
        decomposition is attached.
    OracleError
        A black-box subgradient failed validation.
    InconsistencyError
        ``X``'s complement and the directly computed constancy subspace
        disagree by more than ``1e-6``.
    """
    config = config or DecompConfig()
    n = f.dim
    structural = is_structural(f)
    if method == "auto":
        method = "exact" if structural else "sample"
    z0, xi0 = _base(f, None, None, not structural, config.seed)
    samples_used, conclusive = 0, True

    if method == "exact":
        if not structural:
            raise ValueError("exact decomposition needs a structural function")
        C = np.asarray(constraint_rows(f, config.seed), dtype=float)
        X = accumulate_span(C, config.tol_rank, ambient_dim=n)
        Y = orthogonal_complement(X)
        Y_direct = _null_space(C, n, config.tol_rank)
    elif method == "sample":
        X, samples_used, conclusive = sampled_span(f, z0, xi0, config, validate=not structural)
        Y = orthogonal_complement(X)
        Y_direct = _flat_filter(f, z0, xi0, Y, config)
    else:
        raise ValueError(f"unknown method {method!r}")

    v = complement_project(X, xi0)
    d = Decomposition(f, X, Y, v, z0, xi0, float(f.value(z0) - xi0 @ z0),
                      method, samples_used, conclusive)
    if not conclusive:
        raise InconclusiveError(
            f"rank of the subgradient-difference span did not stabilize within "
            f"{samples_used} samples (dim X so far {X.dim})", partial=d)
    gap = subspace_distance(Y, Y_direct)
    if gap > CROSS_CHECK_TOL:
        raise InconsistencyError(
            f"constancy subspace from X-complement (dim {Y.dim}) and from flat-line test "
            f"(dim {Y_direct.dim}) differ by {gap:.3g}")
    return d


def probe_set(n, probes, seed, scales=SAMPLE_SCALES):
    rng = np.random.default_rng([seed, 0x7E57])
    sc = np.array([scales[i % len(scales)] for i in range(probes)])
    return sc[:, None] * rng.standard_normal((probes, n))


def verify_decomposition(f, d, probes=1000, seed=0):
    """Residuals of the reconstruction identity and of the Y-invariance properties.

    r1: ``|f(z) - core(P_X z) - <v, z>|``;
    r2: ``|g(z + y) - g(z)|`` with ``g = f - <xi0, .>`` and ``y`` in Y;
    r3: ``|<xi(z2) - xi(z1), y>|`` over sample pairs and Y basis vectors.
    """
    n = f.dim
    if d.x_space.ambient_dim != n:
        raise DimensionError("decomposition and function live in different spaces")
    Z = probe_set(n, probes, seed)
    fz = f.values(Z)
    res1 = np.abs(fz - d.reconstruct_values(Z))
    r1, r1_rel = float(res1.max()), float((res1 / (1.0 + np.abs(fz))).max())

    r2 = r2_rel = 0.0
    r3 = r3_rel = 0.0
    if d.y_space.dim:
        rng = np.random.default_rng([seed, 0x7E58])
        sc = np.array([SAMPLE_SCALES[i % 3] for i in range(probes)])
        W = (sc[:, None] * rng.standard_normal((probes, d.y_space.dim))) @ d.y_space.basis
        g0 = fz - Z @ d.xi0
        g1 = f.values(Z + W) - (Z + W) @ d.xi0
        res2 = np.abs(g1 - g0)
        r2, r2_rel = float(res2.max()), float((res2 / (1.0 + np.abs(fz))).max())

        G = f.subgradients(Z)
        half = probes // 2
        if half:
            D = G[half:2 * half] - G[:half]
            scale = 1.0 + np.maximum(np.linalg.norm(G[:half], axis=1), np.linalg.norm(G[half:2 * half], axis=1))
            res3 = np.abs(D @ d.y_space.basis.T)
            r3 = float(res3.max())
            r3_rel = float((res3 / scale[:, None]).max())
    return DecompReport(r1, r1_rel, r2, r2_rel, r3, r3_rel, probes)


def lemma_line_residual(f, z, v, ts=(1.0, -1.0, 10.0, -10.0, 100.0, -100.0)):
    """Max relative deviation of ``f(z + t v)`` from ``f(z) + t <xi(z), v>``."""
    z = as_vector(z, f.dim)
    xi = f.subgradient(z)
    fz = f.value(z)
    ts = np.asarray(ts, dtype=float)
    vals = f.values(z + ts[:, None] * v)
    return float(np.max(np.abs(vals - fz - ts * float(xi @ v))) / (1.0 + abs(fz)))
