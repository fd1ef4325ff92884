"""Pure-Python/numpy versions of the compiled kernels.

Same signatures and in-place protocol as ``_kernels.pyx``.  Selected
automatically when the extension is not built, or forced with
``CONVEXDECOMP_PURE=1``.
"""
import numpy as np

RELU_SQUARE, SQUARE, ABS, EXP = 0, 1, 2, 3
EXP_LIMIT = 700.0


def mgs_accumulate(basis, k, cands, tol):
    cap = basis.shape[0]
    for c in cands:
        r = np.array(c, dtype=float)
        cnorm = np.sqrt(np.dot(r, r))
        for _ in range(2):
            for j in range(k):
                r -= np.dot(basis[j], r) * basis[j]
        nrm = np.sqrt(np.dot(r, r))
        if nrm <= tol * max(1.0, cnorm) or k >= cap:
            continue
        basis[k] = r / nrm
        k += 1
    return k


def _arguments(X, A, s, kinds):
    T = X @ A.T - s
    over = (T > EXP_LIMIT) & (kinds == EXP)[None, :]
    if over.any():
        return T, int(np.flatnonzero(over.any(axis=1))[0])
    return T, -1


def composite_values(X, A, s, w, kinds, out):
    T, bad = _arguments(X, A, s, kinds)
    if bad >= 0:
        return bad
    K = np.empty_like(T)
    for code in (RELU_SQUARE, SQUARE, ABS, EXP):
        cols = kinds == code
        if not cols.any():
            continue
        t = T[:, cols]
        if code == RELU_SQUARE:
            K[:, cols] = np.where(t > 0.0, t * t, 0.0)
        elif code == SQUARE:
            K[:, cols] = t * t
        elif code == ABS:
            K[:, cols] = np.abs(t)
        else:
            K[:, cols] = np.exp(t)
    out[:] = K @ w
    return -1


def composite_gradients(X, A, s, w, kinds, out):
    T, bad = _arguments(X, A, s, kinds)
    if bad >= 0:
        return bad
    D = np.empty_like(T)
    for code in (RELU_SQUARE, SQUARE, ABS, EXP):
        cols = kinds == code
        if not cols.any():
            continue
        t = T[:, cols]
        if code == RELU_SQUARE:
            D[:, cols] = np.where(t > 0.0, 2.0 * t, 0.0)
        elif code == SQUARE:
            D[:, cols] = 2.0 * t
        elif code == ABS:
            D[:, cols] = np.sign(t)
        else:
            D[:, cols] = np.exp(t)
    out[:] = (D * w) @ A
    return -1
