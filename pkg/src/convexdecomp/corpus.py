"""Named examples and a graded corpus with exact ground-truth decompositions.

Every random entry is assembled from seeded orthogonal factors, so its
coercive-direction subspace and residual linear part are known exactly
from the construction rather than computed.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .decomp import Decomposition
from .funcrepr import AffinePlus, Kernel, MaxAffine, Quadratic, ScalarComposite, Sum
from .vecspace import Subspace, accumulate_span, complement_project, orthogonal_complement

PAPER_SIZES = (1, 2, 4, 8, 16)


@dataclass(frozen=True)
class Truth:
    x_space: Subspace
    y_space: Subspace
    v: np.ndarray


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    f: object
    truth: Optional[Truth] = None
    tags: tuple = field(default_factory=tuple)

    @property
    def dim(self):
        return self.f.dim

    def truth_decomposition(self):
        """The ground truth packaged as a :class:`Decomposition` based at the origin."""
        if self.truth is None:
            return None
        z0 = np.zeros(self.dim)
        xi0 = self.f.subgradient(z0)
        return Decomposition(self.f, self.truth.x_space, self.truth.y_space, self.truth.v,
                             z0, xi0, float(self.f.value(z0)), "truth")


def _truth(W, linear_part, n):
    """Truth from a spanning set ``W`` (rows) of X and the linear part of f."""
    X = accumulate_span(W, 1e-9, ambient_dim=n) if len(W) else Subspace.zero(n)
    return Truth(X, orthogonal_complement(X), complement_project(X, np.asarray(linear_part, dtype=float)))


def _full(n):
    return Truth(Subspace.full(n), Subspace.zero(n), np.zeros(n))


def make_weighted_quadratic(N):
    """``sum_n x_n^2 / 2^n`` on R^N: A = diag(2 / 2^n)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    A = np.diag([2.0 / 2.0 ** n for n in range(1, N + 1)])
    return CorpusEntry(f"weighted_quadratic_N{N}", Quadratic(A), _full(N),
                       ("paper-example", "strict-min-at-0", "coercive"))


def theta():
    """The one-dimensional kernel ``t -> max(t, 0)^2``."""
    return ScalarComposite([1.0], (Kernel.RELU_SQUARE,), [[1.0]], [0.0])


def make_example_gamma(N):
    """``sum_gamma theta(x_gamma)`` truncated to N coordinates."""
    if N < 1:
        raise ValueError("N must be >= 1")
    f = ScalarComposite(np.ones(N), (Kernel.RELU_SQUARE,) * N, np.eye(N), np.zeros(N))
    return CorpusEntry(f"example_gamma_N{N}", f, _full(N),
                       ("paper-example", "paper-counterexample"))


def make_example33(N):
    """``sum_n 2^-n theta(x_n - n)`` truncated to N coordinates."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w = np.array([2.0 ** -n for n in range(1, N + 1)])
    s = np.arange(1, N + 1, dtype=float)
    f = ScalarComposite(w, (Kernel.RELU_SQUARE,) * N, np.eye(N), s)
    return CorpusEntry(f"example33_N{N}", f, _full(N), ("paper-example", "no-strict-min-limit"))


def _orthonormal(rng, n, k):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q[:, :k]


def random_psd_quadratic(rng, n, r, name, linear=True):
    U = _orthonormal(rng, n, r)
    lam = rng.uniform(0.5, 4.0, r)
    A = (U * lam) @ U.T
    A = 0.5 * (A + A.T)
    b = rng.standard_normal(n) if linear else np.zeros(n)
    c = float(rng.standard_normal())
    tags = ("quadratic", "coercive") if r == n else ("quadratic", "flat-directions")
    return CorpusEntry(name, Quadratic(A, b, c), _truth(U.T, b, n), tags)


def random_max_affine(rng, n, k, m, name, drift=True):
    """Max of m affine pieces whose slopes lie in a random k-dim subspace, plus a drift."""
    W = _orthonormal(rng, n, k)
    slopes = rng.standard_normal((m, k)) @ W.T
    intercepts = rng.uniform(0.0, 0.5, m)
    f = MaxAffine(slopes, intercepts)
    d = rng.standard_normal(n) if drift else np.zeros(n)
    tags = ("max-affine",) + (("flat-directions",) if k < n else ())
    if drift:
        f = AffinePlus(f, d, 0.0)
        tags += ("affine-shift",)
    return CorpusEntry(name, f, _truth(W.T, d, n), tags)


def random_composite(rng, n, k, kernels, name, shift=False, a_scale=1.0):
    """Scalar composite whose term directions lie in a random k-dim subspace."""
    W = _orthonormal(rng, n, k)
    T = len(kernels)
    D = rng.standard_normal((T, k)) @ W.T
    D *= a_scale / np.linalg.norm(D, axis=1, keepdims=True)
    w = rng.uniform(0.5, 2.0, T)
    s = rng.uniform(-1.0, 1.0, T)
    f = ScalarComposite(w, tuple(kernels), D, s)
    l = np.zeros(n)
    tags = ("composite",) + (("flat-directions",) if k < n else ())
    if shift:
        l = rng.standard_normal(n)
        f = AffinePlus(f, l, float(rng.standard_normal()))
        tags += ("affine-shift",)
    return CorpusEntry(name, f, _truth(D, l, n), tags)


def make_graded_corpus(seed=0):
    """Deterministic list of corpus entries (named families first)."""
    entries = []
    for N in PAPER_SIZES:
        entries.append(make_weighted_quadratic(N))
    for N in PAPER_SIZES:
        entries.append(make_example_gamma(N))
    for N in PAPER_SIZES:
        entries.append(make_example33(N))

    def rng(tag):
        return np.random.default_rng([seed, tag])

    for i, (n, r) in enumerate([(2, 1), (3, 1), (3, 2), (4, 2), (6, 3), (8, 5), (12, 7), (16, 10)]):
        entries.append(random_psd_quadratic(rng(100 + i), n, r, f"psd_quadratic_n{n}_r{r}"))
    for i, n in enumerate([3, 8]):
        entries.append(random_psd_quadratic(rng(120 + i), n, n, f"pd_quadratic_n{n}"))

    for i, (n, k, m) in enumerate([(2, 1, 3), (3, 2, 5), (4, 2, 6), (6, 3, 8), (8, 4, 10),
                                   (12, 5, 12), (16, 6, 14)]):
        entries.append(random_max_affine(rng(200 + i), n, k, m, f"max_affine_n{n}_k{k}"))
    for i, n in enumerate([2, 3, 4]):
        entries.append(random_max_affine(rng(220 + i), n, n, 2 * n + 3, f"max_affine_full_n{n}",
                                         drift=False))

    K = Kernel
    specs = [
        (2, 1, [K.RELU_SQUARE, K.ABS], False, 1.0),
        (4, 2, [K.SQUARE, K.RELU_SQUARE, K.EXP], True, 0.25),
        (6, 4, [K.ABS, K.ABS, K.RELU_SQUARE, K.SQUARE, K.EXP], True, 0.25),
        (8, 3, [K.RELU_SQUARE] * 4, False, 1.0),
        (16, 8, [K.SQUARE, K.ABS, K.RELU_SQUARE, K.EXP] * 3, True, 0.25),
        (3, 3, [K.RELU_SQUARE, K.ABS, K.EXP, K.RELU_SQUARE], False, 0.25),
    ]
    for i, (n, k, kernels, shift, a_scale) in enumerate(specs):
        entries.append(random_composite(rng(300 + i), n, k, kernels, f"composite_n{n}_k{k}",
                                        shift, a_scale))

    # coercive composite: squares on every axis plus an exponential
    n = 3
    f = ScalarComposite([1.0, 0.5, 2.0, 0.1], (K.SQUARE, K.SQUARE, K.SQUARE, K.EXP),
                        np.vstack([np.eye(n), 0.2 * np.ones((1, n))]), [0.5, -0.5, 0.0, 0.0])
    entries.append(CorpusEntry("composite_squares_n3", f, _full(n), ("composite", "coercive")))

    # sums of the families above
    for i, (n, r, k) in enumerate([(4, 1, 1), (6, 2, 2), (8, 2, 3), (16, 4, 4)]):
        g = rng(400 + i)
        q = random_psd_quadratic(g, n, r, "q")
        c = random_composite(g, n, k, [K.RELU_SQUARE, K.ABS, K.SQUARE][:k] + [K.ABS] * max(0, k - 3),
                             "c", shift=True, a_scale=1.0)
        f = Sum([q.f, c.f])
        W = np.vstack([q.truth.x_space.basis, c.truth.x_space.basis])
        lin = q.f.b + c.f.l
        entries.append(CorpusEntry(f"sum_quadratic_composite_n{n}", f, _truth(W, lin, n),
                                   ("sum", "flat-directions")))
    for i, (n, k) in enumerate([(3, 1), (5, 2)]):
        g = rng(420 + i)
        ma = random_max_affine(g, n, k, k + 3, "m")
        q = random_psd_quadratic(g, n, 1, "q")
        f = Sum([ma.f, q.f])
        W = np.vstack([ma.truth.x_space.basis, q.truth.x_space.basis])
        lin = ma.f.l + q.f.b
        tags = ("sum",) + (("flat-directions",) if k + 1 < n else ())
        entries.append(CorpusEntry(f"sum_max_affine_quadratic_n{n}", f, _truth(W, lin, n), tags))

    # affine functions: constant along every line
    for i, n in enumerate([1, 3]):
        g = rng(500 + i)
        l = g.standard_normal(n)
        f = AffinePlus(Quadratic(np.zeros((n, n))), l, float(g.standard_normal()))
        entries.append(CorpusEntry(f"affine_n{n}", f, _truth([], l, n), ("affine", "flat-directions")))
    return entries


def corpus_by_name(seed=0):
    return {e.name: e for e in make_graded_corpus(seed)}


def manifest_row(entry):
    t = entry.truth
    return {
        "name": entry.name,
        "tags": ";".join(entry.tags),
        "dim": entry.dim,
        "x_dim": "" if t is None else t.x_space.dim,
        "y_dim": "" if t is None else t.y_space.dim,
        "v_norm": "" if t is None else repr(float(np.linalg.norm(t.v))),
    }
