"""JSON function-spec files.

A spec is a JSON object with a ``"kind"`` field::

    {"kind": "quadratic", "A": [[2, 0], [0, 0]], "b": [1, 1], "c": 0}
    {"kind": "max_affine", "pieces": [{"a": [1, 0], "c": 0}, ...]}
    {"kind": "scalar_composite",
     "terms": [{"w": 1, "kernel": "relu_square", "a": [1], "s": 0}, ...]}
    {"kind": "affine_plus", "base": {...}, "l": [0, 1], "c0": 0}
    {"kind": "sum", "parts": [{...}, {...}]}

Dimensions are inferred from the arrays and cross-checked.  Every load
failure raises :class:`~convexdecomp.errors.SpecFormatError` naming the
offending field.
"""
import json
import math

from .errors import ConvexDecompError, SpecFormatError
from .funcrepr import AffinePlus, BlackBox, Kernel, MaxAffine, Quadratic, ScalarComposite, Sum

KINDS = ("quadratic", "max_affine", "scalar_composite", "affine_plus", "sum")


def _field(doc, key, where, default=...):
    if not isinstance(doc, dict):
        raise SpecFormatError(f"{where or 'spec'}: expected an object")
    if key not in doc:
        if default is ...:
            raise SpecFormatError(f"{where}{'.' if where else ''}{key}: missing field")
        return default
    return doc[key]


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise SpecFormatError(f"{path}: expected a finite number, got {x!r}")
    return float(x)


def _vector(x, path, dim=None):
    if not isinstance(x, list) or not x:
        raise SpecFormatError(f"{path}: expected a nonempty array of numbers")
    v = [_number(e, f"{path}[{i}]") for i, e in enumerate(x)]
    if dim is not None and len(v) != dim:
        raise SpecFormatError(f"{path}: dimension {len(v)} does not match {dim}")
    return v


def _matrix(x, path):
    if not isinstance(x, list) or not x:
        raise SpecFormatError(f"{path}: expected a nonempty array of arrays")
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(x)]
    n = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != n:
            raise SpecFormatError(f"{path}[{i}]: row length {len(r)} does not match {n}")
    return rows


def _list(x, path):
    if not isinstance(x, list) or not x:
        raise SpecFormatError(f"{path}: expected a nonempty array")
    return x


def _join(where, key):
    return f"{where}.{key}" if where else key


def function_from_dict(doc, where=""):
    """Build a :class:`ConvexFunction` from a parsed spec document."""
    kind = _field(doc, "kind", where)
    try:
        if kind == "quadratic":
            A = _matrix(_field(doc, "A", where), _join(where, "A"))
            n = len(A)
            if len(A[0]) != n:
                raise SpecFormatError(f"{_join(where, 'A')}: matrix is not square")
            b = _field(doc, "b", where, None)
            b = [0.0] * n if b is None else _vector(b, _join(where, "b"), n)
            c = _number(_field(doc, "c", where, 0.0), _join(where, "c"))
            return Quadratic(A, b, c)
        if kind == "max_affine":
            pieces = _list(_field(doc, "pieces", where), _join(where, "pieces"))
            out, dim = [], None
            for i, p in enumerate(pieces):
                pw = f"{_join(where, 'pieces')}[{i}]"
                a = _vector(_field(p, "a", pw), f"{pw}.a", dim)
                dim = len(a)
                out.append((a, _number(_field(p, "c", pw, 0.0), f"{pw}.c")))
            return MaxAffine.from_pieces(out)
        if kind == "scalar_composite":
            terms = _list(_field(doc, "terms", where), _join(where, "terms"))
            ws, ks, As, ss, dim = [], [], [], [], None
            for i, t in enumerate(terms):
                tw = f"{_join(where, 'terms')}[{i}]"
                w = _number(_field(t, "w", tw, 1.0), f"{tw}.w")
                if w <= 0:
                    raise SpecFormatError(f"{tw}.w: weight must be positive")
                kname = _field(t, "kernel", tw)
                try:
                    k = Kernel(kname)
                except ValueError:
                    raise SpecFormatError(f"{tw}.kernel: unknown kernel {kname!r}") from None
                a = _vector(_field(t, "a", tw), f"{tw}.a", dim)
                dim = len(a)
                if not any(a):
                    raise SpecFormatError(f"{tw}.a: direction must be nonzero")
                ws.append(w)
                ks.append(k)
                As.append(a)
                ss.append(_number(_field(t, "s", tw, 0.0), f"{tw}.s"))
            return ScalarComposite(ws, tuple(ks), As, ss)
        if kind == "affine_plus":
            base = function_from_dict(_field(doc, "base", where), _join(where, "base"))
            l = _vector(_field(doc, "l", where), _join(where, "l"), base.dim)
            c0 = _number(_field(doc, "c0", where, 0.0), _join(where, "c0"))
            return AffinePlus(base, l, c0)
        if kind == "sum":
            parts = _list(_field(doc, "parts", where), _join(where, "parts"))
            fs = [function_from_dict(p, f"{_join(where, 'parts')}[{i}]") for i, p in enumerate(parts)]
            dims = {f.dim for f in fs}
            if len(dims) != 1:
                raise SpecFormatError(f"{_join(where, 'parts')}: parts have dimensions {sorted(dims)}")
            return Sum(fs)
    except SpecFormatError:
        raise
    except (ConvexDecompError, ValueError) as exc:
        raise SpecFormatError(f"{where or 'spec'}: {exc}") from exc
    raise SpecFormatError(f"{_join(where, 'kind')}: unknown kind {kind!r}, expected one of {KINDS}")


def function_to_dict(f):
    """Inverse of :func:`function_from_dict` for structural functions."""
    if isinstance(f, Quadratic):
        return {"kind": "quadratic", "A": f.A.tolist(), "b": f.b.tolist(), "c": f.c}
    if isinstance(f, MaxAffine):
        return {"kind": "max_affine",
                "pieces": [{"a": a.tolist(), "c": float(c)} for a, c in zip(f.slopes, f.intercepts)]}
    if isinstance(f, ScalarComposite):
        return {"kind": "scalar_composite",
                "terms": [{"w": t.w, "kernel": t.kernel.value, "a": list(t.a), "s": t.s}
                          for t in f.terms]}
    if isinstance(f, AffinePlus):
        return {"kind": "affine_plus", "base": function_to_dict(f.base), "l": f.l.tolist(), "c0": f.c0}
    if isinstance(f, Sum):
        return {"kind": "sum", "parts": [function_to_dict(p) for p in f.parts]}
    if isinstance(f, BlackBox):
        raise TypeError("black-box functions cannot be serialized")
    raise TypeError(f"unsupported function type {type(f).__name__}")


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"invalid JSON: {exc}") from exc
    return function_from_dict(doc)


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(f):
    return json.dumps(function_to_dict(f), sort_keys=True)


def dump(f, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(f) + "\n")
