"""Compiled vs pure-numpy kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the three hot kernels on representative shapes, plus a full exact
decomposition of the graded corpus, under each backend.
"""
import argparse
import timeit

import numpy as np

from convexdecomp import _backend, _kernels_py
from convexdecomp.corpus import make_graded_corpus
from convexdecomp.decomp import DecompConfig, decompose
from convexdecomp.funcrepr import BlackBox


def kernel_cases(rng):
    n = 32
    cands = np.ascontiguousarray(rng.standard_normal((256, n)))
    X = np.ascontiguousarray(3.0 * rng.standard_normal((4096, 16)))
    A = np.ascontiguousarray(rng.standard_normal((24, 16)) / 8.0)
    s = rng.standard_normal(24)
    w = rng.uniform(0.5, 2.0, 24)
    kinds = np.array([0, 1, 2, 3] * 6, dtype=np.intc)

    def mgs(mod):
        return lambda: mod.mgs_accumulate(np.zeros((n, n)), 0, cands, 1e-9)

    def values(mod):
        out = np.empty(X.shape[0])
        return lambda: mod.composite_values(X, A, s, w, kinds, out)

    def grads(mod):
        out = np.empty_like(X)
        return lambda: mod.composite_gradients(X, A, s, w, kinds, out)

    return {"mgs_accumulate 256x32": mgs, "composite_values 4096x16": values,
            "composite_gradients 4096x16": grads}


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    try:
        from convexdecomp import _kernels as compiled
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1

    rows = []
    for name, make in kernel_cases(np.random.default_rng(0)).items():
        rows.append((name, best(make(compiled), args.repeat), best(make(_kernels_py), args.repeat)))

    corpus = make_graded_corpus(0)
    config = DecompConfig(seed=0)

    def sampled():
        for e in corpus:
            decompose(BlackBox.wrap(e.f), config)

    timings = []
    for backend in ("cython", "python"):
        prev = _backend.use(backend)
        try:
            timings.append(best(sampled, max(1, args.repeat // 3)))
        finally:
            _backend.use(prev)
    rows.append(("sampled decomposition, 50 entries", *timings))

    print(f"{'case':36s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, tc, tp in rows:
        print(f"{name:36s} {tc:10.5f} {tp:10.5f} {tp / tc:8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
