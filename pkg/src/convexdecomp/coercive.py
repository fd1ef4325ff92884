"""Directional coercivity: verdicts, coercivizing witnesses, strict minima.

A verdict is three-valued.  ``CERTIFIED`` comes only from an exact
structural criterion; ``REFUTED`` carries a ray along which the function
stays bounded; anything else is ``EVIDENCE`` with the scan statistics.

The witness construction normalizes ``psi(x) = f(x) - f(0) - <xi0, x>``,
shoots rays from the origin to the boundary of ``{psi <= 1}``, and sums the
boundary subgradients with weights ``1 / (2^(n+1) max(1, |xi_n|))``.
``f - <xi0 + xi, .>`` is then directionally coercive whenever the boundary
subgradients separate points.
"""
import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog, minimize

from .decomp import DecompConfig, decompose, probe_set
from .errors import (DimensionError, InconclusiveError, InconsistencyError, OracleError,
                     PreconditionError, RangeError)
from .funcrepr import (AffinePlus, Kernel, Quadratic, ScalarComposite, SubgradientSample,
                       validate_subgradient)
from .vecspace import accumulate_span, as_vector

LEVEL = 1.0
SLOPE_TOL = 1e-9
GAP_TOL = 1.0
RECESSION_CUTOFF = 1e6
BOUNDARY_TOL = 1e-10
MAX_BISECTIONS = 200


class Status(enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    EVIDENCE = "evidence"


@dataclass(frozen=True, eq=False)
class CoercivityVerdict:
    status: Status
    refuting_ray: Optional[tuple] = None
    rays_checked: int = 0
    max_t: float = 0.0
    min_terminal_slope: float = float("inf")
    reason: str = ""

    def as_dict(self):
        out = {"status": self.status.value, "reason": self.reason,
               "rays_checked": self.rays_checked, "max_t": self.max_t,
               "min_terminal_slope": self.min_terminal_slope}
        if self.refuting_ray is not None:
            x, v = self.refuting_ray
            out["refuting_ray"] = {"x": x.tolist(), "v": v.tolist()}
        return out


# ---------------------------------------------------------------------------
# certification


def _growth_generators(f):
    """Directions g such that a term of the composite grows along any v with <g, v> > 0."""
    gens = []
    for k, a in zip(f.kernels, f.directions):
        gens.append(a)
        if k in (Kernel.SQUARE, Kernel.ABS):
            gens.append(-a)
    return np.array(gens)


def positively_spans(G):
    """Exact LP test: the rows of ``G`` positively span R^n.

    True iff ``G`` has full column rank and some strictly positive
    combination of its rows vanishes.
    """
    m, n = G.shape
    if np.linalg.matrix_rank(G) < n:
        return False
    res = linprog(np.zeros(m), A_eq=G.T, b_eq=np.zeros(n), bounds=[(1.0, None)] * m,
                  method="highs")
    return res.status == 0


def non_growth_direction(G):
    """A unit v with ``G v <= 0`` and ``v != 0``, or None when the rows positively span."""
    m, n = G.shape
    _, s, Vt = np.linalg.svd(G, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
    if rank < n:
        return Vt[rank]
    # min 1'(G v) subject to -1 <= G v <= 0
    res = linprog(G.sum(axis=0), A_ub=np.vstack([G, -G]),
                  b_ub=np.concatenate([np.zeros(m), np.ones(m)]),
                  bounds=[(None, None)] * n, method="highs")
    if res.status != 0 or res.fun > -1e-9:
        return None
    v = res.x
    return v / np.linalg.norm(v)


def certify(f):
    """Exact certificate of directional coercivity, or ``(False, reason)``."""
    base = f.base if isinstance(f, AffinePlus) else f
    if isinstance(base, Quadratic):
        lam = np.linalg.eigvalsh(base.A)
        scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
        if lam.size and lam.min() > 1e-12 * scale:
            return True, "positive definite quadratic"
        return False, "quadratic with singular A"
    if isinstance(f, ScalarComposite):
        if positively_spans(_growth_generators(f)):
            return True, "composite growth directions positively span"
        return False, "composite growth directions do not positively span"
    return False, "no exact criterion for this representation"


# ---------------------------------------------------------------------------
# ray scans


def _unit_rows(rng, k, n):
    U = rng.standard_normal((k, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def scan_directions(f, rays, seed, decomposition=None):
    """Ray directions in scan order: +/- coordinates, +/- Y basis, structural hints, random."""
    n = f.dim
    dirs = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dirs += [e, -e]
    d = decomposition
    if d is None:
        try:
            d = decompose(f, DecompConfig(seed=seed))
        except InconclusiveError as exc:
            d = exc.partial
        except InconsistencyError:
            d = None
    if d is not None:
        for y in d.y_space.basis:
            dirs += [y.copy(), -y]
    if isinstance(f, ScalarComposite):
        v = non_growth_direction(_growth_generators(f))
        if v is not None:
            dirs.append(v)
    if rays > 0:
        dirs += list(_unit_rows(np.random.default_rng([seed, 0x5CA7]), rays, n))
    return dirs


def _safe_value(f, x):
    try:
        return f.value(x)
    except RangeError:
        return np.inf


def ray_gap_and_slope(f, x, v, max_t):
    """``f(x + T v) - f(x)`` and the terminal slope over ``[T/2, T]``."""
    fx = f.value(x)
    f_end = _safe_value(f, x + max_t * v)
    f_mid = _safe_value(f, x + 0.5 * max_t * v)
    gap = f_end - fx
    slope = (f_end - f_mid) / (0.5 * max_t) if np.isfinite(f_end) else np.inf
    return gap, slope


def directional_verdict(f, rays=256, seed=0, max_t=1e4, decomposition=None):
    """Three-valued directional-coercivity verdict for ``f``.

    Rays start at the origin; for a convex function boundedness along a ray
    does not depend on its base point.
    """
    if max_t < 1:
        raise ValueError("max_t must be >= 1")
    ok, reason = certify(f)
    if ok:
        return CoercivityVerdict(Status.CERTIFIED, reason=reason)
    x = np.zeros(f.dim)
    min_slope = np.inf
    checked = 0
    for v in scan_directions(f, rays, seed, decomposition):
        gap, slope = ray_gap_and_slope(f, x, v, max_t)
        checked += 1
        min_slope = min(min_slope, slope)
        if gap <= GAP_TOL and slope <= SLOPE_TOL:
            return CoercivityVerdict(Status.REFUTED, (x.copy(), np.array(v, dtype=float)), checked,
                                     float(max_t), float(min_slope), reason)
    return CoercivityVerdict(Status.EVIDENCE, None, checked, float(max_t), float(min_slope), reason)


def sphere_growth_radius(f, samples=512, seed=0, max_power=20):
    """Smallest ``R = 2^k <= 2^max_power`` with ``min_{|u|=1} f(R u) > f(0) + 1`` over samples."""
    U = _unit_rows(np.random.default_rng([seed, 0x5F3]), samples, f.dim)
    target = f.value(np.zeros(f.dim)) + 1.0
    for k in range(max_power + 1):
        R = float(2 ** k)
        try:
            vals = f.values(R * U)
        except RangeError:
            vals = np.array([_safe_value(f, R * u) for u in U])
        if vals.min() > target:
            return R
    return None


# ---------------------------------------------------------------------------
# witness


@dataclass(frozen=True, eq=False)
class TraceEntry:
    x: np.ndarray
    xi: np.ndarray
    weight: float
    direction: np.ndarray


@dataclass(frozen=True, eq=False)
class Witness:
    """Coercivizing functional and its construction trace.

    ``xi`` is the weighted sum of boundary subgradients of ``psi``;
    ``functional = xi0 + xi`` is the linear form to subtract from ``f``.
    """

    xi: np.ndarray
    trace: list
    xi0: np.ndarray
    f0: float
    skipped: list = field(default_factory=list)
    level: float = LEVEL

    @property
    def functional(self):
        return self.xi0 + self.xi

    def psi(self, f):
        return normalized(f, self.xi0, self.f0)

    def as_dict(self):
        return {
            "xi": self.xi.tolist(),
            "functional": self.functional.tolist(),
            "level": self.level,
            "level_shift": {"xi0": self.xi0.tolist(), "f0": self.f0},
            "trace": [{"x": t.x.tolist(), "xi": t.xi.tolist(), "weight": t.weight,
                       "direction": t.direction.tolist()} for t in self.trace],
            "skipped_rays": [d.tolist() for d in self.skipped],
        }


def normalized(f, xi0, f0):
    """``psi = f - f0 - <xi0, .>``."""
    return AffinePlus(f, -np.asarray(xi0, dtype=float), -f0)


def boundary_point(psi, u, level=LEVEL):
    """Parameter t with ``psi(t u) = level`` (within 1e-10), or None if the ray recedes.

    Brackets by doubling from t = 1 and stops at t > 1e6; then bisects.
    Exact hits at bracket or midpoints are returned as is.
    """
    t = 1.0
    while True:
        val = psi.value(t * u)
        if val == level:
            return t
        if val > level:
            break
        t *= 2.0
        if t > RECESSION_CUTOFF:
            return None
    lo, hi = (0.0 if t == 1.0 else 0.5 * t), t
    best, best_err = hi, abs(val - level)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        val = psi.value(mid * u)
        err = abs(val - level)
        if err < best_err:
            best, best_err = mid, err
        if err <= BOUNDARY_TOL:
            return mid
        if val > level:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 0.0:
            break
    return best


def witness_directions(n, seed):
    """+/- coordinate directions, then an endless seeded stream of random unit vectors."""
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        yield e
        yield -e
    rng = np.random.default_rng([seed, 0xB17])
    while True:
        u = rng.standard_normal(n)
        yield u / np.linalg.norm(u)


def witness_weight(n, xi_norm):
    return 1.0 / (2.0 ** (n + 1) * max(1.0, xi_norm))


def build_witness(f, n_terms=None, seed=0, decomposition=None, max_directions=None):
    """Coercivizing witness for ``f``, which must not be affine along any line.

    Collects ``n_terms`` boundary points (default ``2 * dim``), trying at most
    ``max_directions`` rays (default ``2 * dim + 16 * n_terms``).
    """
    n = f.dim
    n_terms = 2 * n if n_terms is None else n_terms
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    d = decomposition if decomposition is not None else decompose(f, DecompConfig(seed=seed))
    if d.y_space.dim:
        raise PreconditionError("function is affine along a line (constancy subspace is nonzero)",
                                direction=d.y_space.basis[0].copy())
    origin = np.zeros(n)
    xi0 = f.subgradient(origin)
    f0 = f.value(origin)
    psi = normalized(f, xi0, f0)
    max_directions = 2 * n + 16 * n_terms if max_directions is None else max_directions

    trace, skipped = [], []
    xi = np.zeros(n)
    for u in itertools.islice(witness_directions(n, seed), max_directions):
        if len(trace) >= n_terms:
            break
        t = boundary_point(psi, u)
        if t is None:
            skipped.append(u)
            continue
        x = t * u
        g = psi.subgradient(x)
        k = len(trace) + 1
        if not validate_subgradient(psi, SubgradientSample(x, g), 64, [seed, k, 2]):
            raise OracleError(f"boundary subgradient {k} failed validation at x={x.tolist()}")
        w = witness_weight(k, float(np.linalg.norm(g)))
        trace.append(TraceEntry(x, g, w, u))
        xi = xi + w * g
    if not trace:
        raise PreconditionError("every tried ray recedes; the sublevel set has no boundary")
    return Witness(xi, trace, xi0, f0, skipped)


def envelope_violation(f, w, points=1000, seed=0):
    """Max relative violation of ``psi(x) >= max(0, max_n psi(x_n) + <xi_n, x - x_n>)``."""
    psi = w.psi(f)
    Z = probe_set(f.dim, points, seed)
    pz = psi.values(Z)
    if not w.trace:
        return float((-pz / (1.0 + np.abs(pz))).max())
    Xn = np.array([t.x for t in w.trace])
    Gn = np.array([t.xi for t in w.trace])
    pn = psi.values(Xn)
    lower = pn + Z @ Gn.T - np.einsum("ij,ij->i", Gn, Xn)
    env = np.maximum(0.0, lower.max(axis=1))
    return float(((env - pz) / (1.0 + np.abs(pz))).max())


@dataclass(frozen=True, eq=False)
class WitnessCheck:
    verdict: CoercivityVerdict
    envelope_violation: float

    def as_dict(self):
        return {"verdict": self.verdict.as_dict(), "envelope_violation": self.envelope_violation}


def verify_witness(f, w, rays=500, seed=0, max_t=1e4):
    """Ray-scan ``f - <w.functional, .>`` and check the lower-envelope bound."""
    shifted = AffinePlus(f, -w.functional, 0.0)
    verdict = directional_verdict(shifted, rays, seed, max_t)
    return WitnessCheck(verdict, envelope_violation(f, w, 1000, seed))


def separation_rank(w, tol=1e-9):
    """Rank of the boundary subgradients; full rank means they separate points."""
    if not w.trace:
        return 0
    return accumulate_span([t.xi for t in w.trace], tol).dim


# ---------------------------------------------------------------------------
# strict minima (dim <= 3)


def candidate_points(axis, radius, dim):
    """Integer lattice points of the box, then the remaining grid points, each by norm."""
    def ordered(pts):
        return sorted(pts, key=lambda p: (float(p @ p), tuple(p)))

    ints = np.arange(-int(np.floor(radius)), int(np.floor(radius)) + 1, dtype=float)
    lattice = ordered([np.array(p) for p in itertools.product(ints, repeat=dim)])
    rest = ordered([np.array(p) for p in itertools.product(axis, repeat=dim)
                    if not np.all(p == np.round(p))])
    return lattice + rest


def _probe_offsets(dim):
    out = []
    for i in range(dim):
        for sign in (1.0, -1.0):
            for j in range(8):
                e = np.zeros(dim)
                e[i] = sign * 1e-3 * (j + 1) / 8
                out.append(e)
    return np.array(out)


def isolated_minimizer(g, grid_pts, gvals, x_star, step):
    """Grid and local-probe checks that ``x_star`` is a strict minimizer of ``g``.

    Every grid point farther than two grid steps from ``x_star`` must be
    strictly above ``g(x_star)``, and so must all ``2 * dim * 8`` probes at
    radii up to 1e-3.
    """
    gx = g.value(x_star)
    far = np.linalg.norm(grid_pts - x_star, axis=1) > 2.0 * step * np.sqrt(grid_pts.shape[1])
    if not np.all(gvals[far] > gx):
        return False
    probes = x_star + _probe_offsets(grid_pts.shape[1])
    return bool(np.all(g.values(probes) - gx > 0.0))


def strict_minimum_witness(f, grid=64, radius=4.0, candidates=None, max_candidates=512):
    """Find a slope ``xi0`` such that ``f - <xi0, .>`` has a strict minimizer.

    Candidate slopes default to subgradients at integer lattice points of
    ``[-radius, radius]^dim`` in order of increasing norm; a candidate's source
    point is then already a minimizer of the shifted function.  Explicit
    ``candidates`` are minimized from the best grid point by Nelder-Mead.

    Returns ``(xi0, minimizer)`` or None.
    """
    n = f.dim
    if n > 3:
        raise DimensionError("strict_minimum_witness supports dim <= 3")
    if grid < 64:
        raise ValueError("grid must be >= 64")
    axis = np.linspace(-radius, radius, grid)
    step = axis[1] - axis[0]
    grid_pts = np.array(list(itertools.product(axis, repeat=n)))
    fvals = f.values(grid_pts)
    interior = np.all(np.abs(grid_pts) < radius - 0.5 * step, axis=1)

    if candidates is None:
        pairs = []
        seen = set()
        for p in candidate_points(axis, radius, n)[:max_candidates]:
            s = f.subgradient(p)
            key = s.tobytes()
            if key not in seen:
                seen.add(key)
                pairs.append((s, p))
    else:
        pairs = [(as_vector(c, n, "candidate slope"), None) for c in candidates]

    for xi, src in pairs:
        g = AffinePlus(f, -xi, 0.0)
        gvals = fvals - grid_pts @ xi
        i_min = int(np.argmin(gvals))
        if not interior[i_min]:
            continue
        if src is not None and g.value(src) <= gvals[i_min] + 1e-12 * (1.0 + abs(gvals[i_min])):
            x_star = np.array(src, dtype=float)
        else:
            res = minimize(g.value, grid_pts[i_min], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 20000})
            x_star = res.x if res.fun <= gvals[i_min] else grid_pts[i_min]
        if isolated_minimizer(g, grid_pts, gvals, x_star, step):
            return xi, x_star
    return None


# ---------------------------------------------------------------------------
# coordinate-separable helpers (truncated sequence-space examples)


def _axis_terms(f):
    if not isinstance(f, ScalarComposite):
        raise PreconditionError("expected a coordinate-aligned scalar composite")
    by_axis = {}
    for w, k, a, s in zip(f.weights, f.kernels, f.directions, f.shifts):
        nz = np.flatnonzero(a)
        if nz.size != 1:
            raise PreconditionError("composite terms must each act on a single coordinate")
        i = int(nz[0])
        by_axis.setdefault(i, []).append((w, k, float(a[i]), s))
    return by_axis


def coordinatewise_minimizer(f, xi):
    """Minimizer of ``f - <xi, .>`` for a composite whose terms each act on one coordinate.

    Each coordinate is minimized separately by bisection on its
    nondecreasing derivative.  Returns None when some coordinate has no
    minimizer.
    """
    by_axis = _axis_terms(f)
    xi = as_vector(xi, f.dim, "xi")
    x = np.zeros(f.dim)
    for i in range(f.dim):
        terms = by_axis.get(i, [])

        def deriv(t):
            return sum(w * a * k.derivative(a * t - s) for w, k, a, s in terms) - xi[i]

        lo, hi = -1.0, 1.0
        for _ in range(200):
            if deriv(lo) < 0:
                break
            lo *= 2.0
        else:
            return None
        for _ in range(200):
            if deriv(hi) > 0:
                break
            hi *= 2.0
        else:
            return None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if deriv(mid) > 0:
                hi = mid
            elif deriv(mid) < 0:
                lo = mid
            else:
                lo = hi = mid
                break
        x[i] = 0.5 * (lo + hi)
    return x


def flat_segment_check(f, x, m):
    """``f(x + t e_m) == f(x)`` exactly at 33 equispaced t in ``(-(m - x_m), m - x_m)``.

    ``m`` is 1-based and must satisfy ``m <= dim`` and ``x_m < m``.
    """
    x = as_vector(x, f.dim)
    if not 1 <= m <= f.dim:
        raise PreconditionError(f"m={m} outside 1..{f.dim}")
    h = m - x[m - 1]
    if h <= 0:
        raise PreconditionError(f"coordinate x_{m}={x[m - 1]} is not below {m}")
    ts = -h + 2.0 * h * np.arange(1, 34) / 34.0
    fx = f.value(x)
    E = np.zeros((33, f.dim))
    E[:, m - 1] = ts
    return bool(np.all(f.values(x + E) == fx))


def flat_half_length(f, x, i, lo_limit=1e-9, hi_limit=2.0 ** 30):
    """Largest h with ``f(x +/- h e_i) == f(x)`` (exact), 0 if not flat at ``lo_limit``.

    Equality at both ends implies constancy in between by convexity.
    """
    x = as_vector(x, f.dim)
    fx = f.value(x)
    e = np.zeros(f.dim)
    e[i] = 1.0

    def flat(h):
        return f.value(x + h * e) == fx and f.value(x - h * e) == fx

    if not flat(lo_limit):
        return 0.0
    lo, hi = lo_limit, 2.0 * lo_limit
    while flat(hi):
        lo, hi = hi, 2.0 * hi
        if hi > hi_limit:
            return float("inf")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if flat(mid):
            lo = mid
        else:
            hi = mid
    return lo
