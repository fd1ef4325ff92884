"""Command-line front end.

    convexdecomp decompose  SPEC [--samples N] [--seed S] [--tol-rank T] [--output PATH]
    convexdecomp coercivity SPEC [--rays N] [--max-t T] [--seed S]
    convexdecomp witness    SPEC [--terms N] [--seed S] [--verify-rays N]
    convexdecomp corpus     --out-dir DIR [--seed S]
    convexdecomp sweep      --family {gamma,example33} --n-list 2,4,8 --out PATH

Reports are JSON objects ``{command, input_digest, seed, version, results}``
written with sorted keys, so identical inputs and flags give identical bytes.

Exit codes: 0 ok, 2 parse error, 3 inconclusive rank, 4 invalid oracle,
5 failed precondition.
"""
import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .coercive import (build_witness, coordinatewise_minimizer, directional_verdict,
                       flat_half_length, separation_rank, verify_witness)
from .corpus import make_example33, make_example_gamma, make_graded_corpus, manifest_row
from .decomp import DecompConfig, decompose, verify_decomposition
from .errors import InconclusiveError, OracleError, PreconditionError, SpecFormatError
from .funcrepr import BlackBox
from .specio import dump, load

EXIT_OK, EXIT_PARSE, EXIT_INCONCLUSIVE, EXIT_ORACLE, EXIT_PRECONDITION = 0, 2, 3, 4, 5


def _clean(obj):
    """Make a payload JSON-safe: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def render(report):
    return json.dumps(_clean(report), sort_keys=True, indent=1) + "\n"


def _digest_file(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _report(command, digest, seed, results):
    return {"command": command, "input_digest": digest, "seed": seed,
            "version": __version__, "results": results}


def _emit(report, output):
    text = render(report)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CONVEXDECOMP_THREADS")
    return max(1, int(env)) if env else 1


def _load(args):
    return load(args.input), _digest_file(args.input)


def _decomposition_payload(f, d, probes, seed):
    rep = verify_decomposition(f, d, probes, seed)
    return {
        "dim": f.dim,
        "method": d.method,
        "samples_used": d.samples_used,
        "conclusive": d.conclusive,
        "x_basis": d.x_space.basis,
        "y_basis": d.y_space.basis,
        "v": d.v,
        "z0": d.z0,
        "xi0": d.xi0,
        "a": d.a,
        "residuals": rep.as_dict(),
    }


def cmd_decompose(args):
    f, digest = _load(args)
    if args.blackbox:
        f = BlackBox.wrap(f)
    config = DecompConfig(samples=args.samples, seed=args.seed, tol_rank=args.tol_rank,
                          max_samples=args.max_samples, workers=_threads(args))
    try:
        d = decompose(f, config)
    except InconclusiveError as exc:
        payload = _decomposition_payload(f, exc.partial, args.probes, args.seed)
        payload["error"] = str(exc)
        _emit(_report("decompose", digest, args.seed, payload), args.output)
        return EXIT_INCONCLUSIVE
    _emit(_report("decompose", digest, args.seed,
                  _decomposition_payload(f, d, args.probes, args.seed)), args.output)
    return EXIT_OK


def cmd_coercivity(args):
    f, digest = _load(args)
    v = directional_verdict(f, args.rays, args.seed, args.max_t)
    _emit(_report("coercivity", digest, args.seed, v.as_dict()), args.output)
    return EXIT_OK


def cmd_witness(args):
    f, digest = _load(args)
    try:
        w = build_witness(f, args.terms, args.seed)
    except PreconditionError as exc:
        payload = {"error": str(exc)}
        if exc.direction is not None:
            payload["flat_direction"] = exc.direction
        _emit(_report("witness", digest, args.seed, payload), args.output)
        return EXIT_PRECONDITION
    check = verify_witness(f, w, args.verify_rays, args.seed, args.max_t)
    payload = w.as_dict()
    payload["separation_rank"] = separation_rank(w)
    payload["verification"] = check.as_dict()
    _emit(_report("witness", digest, args.seed, payload), args.output)
    return EXIT_OK


MANIFEST_FIELDS = ("name", "tags", "dim", "x_dim", "y_dim", "v_norm")


def cmd_corpus(args):
    os.makedirs(args.out_dir, exist_ok=True)
    entries = make_graded_corpus(args.seed)
    for e in entries:
        dump(e.f, os.path.join(args.out_dir, f"{e.name}.json"))
    with open(os.path.join(args.out_dir, "manifest.csv"), "w", newline="", encoding="utf-8") as fh:
        wr = csv.DictWriter(fh, MANIFEST_FIELDS, lineterminator="\n")
        wr.writeheader()
        for e in entries:
            wr.writerow(manifest_row(e))
    _emit(_report("corpus", "", args.seed, {"entries": [e.name for e in entries],
                                            "out_dir": args.out_dir}), args.output)
    return EXIT_OK


FAMILIES = {"gamma": make_example_gamma, "example33": make_example33}
SWEEP_FIELDS = ("N", "witness_norm", "strict_min_norm", "flat_half_length", "runtime_s")


def sweep_row(family, N, seed=0):
    """One sweep row; ``runtime_s`` is wall time and is excluded from reports."""
    t0 = time.perf_counter()
    entry = FAMILIES[family](N)
    f = entry.f
    w = build_witness(f, seed=seed)
    xi = np.array([2.0 ** -n for n in range(1, N + 1)])
    x_min = coordinatewise_minimizer(f, xi)
    origin = np.zeros(N)
    half = max(flat_half_length(f, origin, i) for i in range(N))
    return {"N": N,
            "witness_norm": float(np.linalg.norm(w.xi)),
            "strict_min_norm": float("nan") if x_min is None else float(np.linalg.norm(x_min)),
            "flat_half_length": half,
            "runtime_s": time.perf_counter() - t0}


def _parse_n_list(text):
    try:
        ns = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --n-list {text!r}") from None
    if not ns or any(n < 1 for n in ns):
        raise argparse.ArgumentTypeError("--n-list needs positive integers")
    return ns


def cmd_sweep(args):
    rows = [sweep_row(args.family, N, args.seed) for N in args.n_list]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        wr = csv.DictWriter(fh, SWEEP_FIELDS, lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    stable = [{k: v for k, v in r.items() if k != "runtime_s"} for r in rows]
    _emit(_report("sweep", "", args.seed, {"family": args.family, "rows": stable}), args.output)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_PARSE)


def build_parser():
    p = _Parser(prog="convexdecomp", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("input", help="function spec (JSON)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $CONVEXDECOMP_THREADS or 1)")

    sp = sub.add_parser("decompose", help="canonical decomposition")
    common(sp)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--max-samples", type=int, default=None)
    sp.add_argument("--tol-rank", type=float, default=1e-9)
    sp.add_argument("--probes", type=int, default=1000, help="probes for the residual report")
    sp.add_argument("--blackbox", action="store_true", help="hide the structure; use sampling")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("coercivity", help="directional-coercivity verdict")
    common(sp)
    sp.add_argument("--rays", type=int, default=256)
    sp.add_argument("--max-t", type=float, default=1e4)
    sp.set_defaults(func=cmd_coercivity)

    sp = sub.add_parser("witness", help="coercivizing linear functional")
    common(sp)
    sp.add_argument("--terms", type=int, default=None)
    sp.add_argument("--verify-rays", type=int, default=500)
    sp.add_argument("--max-t", type=float, default=1e4)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("corpus", help="write the graded corpus as spec files")
    common(sp, spec=False)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_corpus)

    sp = sub.add_parser("sweep", help="truncation sweep over a named example family")
    common(sp, spec=False)
    sp.add_argument("--family", choices=sorted(FAMILIES), required=True)
    sp.add_argument("--n-list", type=_parse_n_list, required=True)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecFormatError as exc:
        sys.stderr.write(f"convexdecomp: {exc}\n")
        return EXIT_PARSE
    except OSError as exc:
        if getattr(args, "input", None) and not os.path.exists(args.input):
            sys.stderr.write(f"convexdecomp: cannot read {args.input}: {exc}\n")
            return EXIT_PARSE
        raise
    except OracleError as exc:
        sys.stderr.write(f"convexdecomp: invalid oracle: {exc}\n")
        return EXIT_ORACLE
    except PreconditionError as exc:
        sys.stderr.write(f"convexdecomp: precondition failed: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
