"""Hot loops over the quotient, compiled with numba when available.

Set ``ENGEL_DISABLE_NUMBA=1`` to force the pure numpy implementations (the
benchmark in ``benchmarks/`` compares the two).
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - depends on the environment
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def numba_enabled() -> bool:
    return njit is not None and os.environ.get("ENGEL_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def backend_name() -> str:
    return "numba" if numba_enabled() else "numpy"


BLOCK = 1024

# --- numpy reference versions ---------------------------------------------


def shift_apply_numpy(f, tgt, w):
    """out[x] = sum_k w[k] * (f[tgt[x, k]] - f[x])."""
    return f[tgt] @ w - w.sum() * f


def restrict_numpy(col, val, tgt, w, d):
    n, _ = tgt.shape
    cols_t = col[tgt]
    vals_t = val[tgt] * w
    flat = (np.arange(n)[:, None] * d + cols_t).ravel()
    buf = np.bincount(flat, weights=vals_t.real.ravel(), minlength=n * d) + 1j * np.bincount(
        flat, weights=vals_t.imag.ravel(), minlength=n * d
    )
    buf = buf.reshape(n, d)
    buf[np.arange(n), col] -= w.sum() * val
    tnorm = (np.abs(buf) ** 2).sum(axis=0)
    contrib = np.conj(val)[:, None] * buf
    R = np.stack([np.sum(contrib[col == k], axis=0) for k in range(d)])
    return R, tnorm


def residual_numpy(col, val, tgt, w, d, sigma):
    n, _ = tgt.shape
    cols_t = col[tgt]
    vals_t = val[tgt] * w
    flat = (np.arange(n)[:, None] * d + cols_t).ravel()
    buf = np.bincount(flat, weights=vals_t.real.ravel(), minlength=n * d) + 1j * np.bincount(
        flat, weights=vals_t.imag.ravel(), minlength=n * d
    )
    buf = buf.reshape(n, d)
    buf[np.arange(n), col] -= w.sum() * val
    buf -= sigma[col, :] * val[:, None]
    return (np.abs(buf) ** 2).sum(axis=0)


# --- numba versions --------------------------------------------------------

if njit is not None:

    @njit(cache=True, nogil=True)
    def _shift_apply_nb(f, tgt, w):
        n, T = tgt.shape
        W = 0.0
        for k in range(T):
            W += w[k]
        out = np.empty(n, dtype=np.complex128)
        for x in range(n):
            acc = 0j
            for k in range(T):
                acc += w[k] * f[tgt[x, k]]
            out[x] = acc - W * f[x]
        return out

    @njit(cache=True, nogil=True)
    def _restrict_nb(col, val, tgt, w, d):
        n, T = tgt.shape
        W = 0.0
        for k in range(T):
            W += w[k]
        R = np.zeros((d, d), dtype=np.complex128)
        tnorm = np.zeros(d)
        # partial sums per block keep rounding growth small at large n
        Rb = np.zeros((d, d), dtype=np.complex128)
        tb = np.zeros(d)
        buf = np.zeros(d, dtype=np.complex128)
        for x in range(n):
            for c in range(d):
                buf[c] = 0j
            for k in range(T):
                y = tgt[x, k]
                buf[col[y]] += w[k] * val[y]
            buf[col[x]] -= W * val[x]
            cv = np.conj(val[x])
            row = col[x]
            for c in range(d):
                b = buf[c]
                Rb[row, c] += cv * b
                tb[c] += b.real * b.real + b.imag * b.imag
            if (x + 1) % BLOCK == 0 or x == n - 1:
                for i in range(d):
                    tnorm[i] += tb[i]
                    tb[i] = 0.0
                    for j in range(d):
                        R[i, j] += Rb[i, j]
                        Rb[i, j] = 0j
        return R, tnorm

    @njit(cache=True, nogil=True)
    def _residual_nb(col, val, tgt, w, d, sigma):
        n, T = tgt.shape
        W = 0.0
        for k in range(T):
            W += w[k]
        res = np.zeros(d)
        rb = np.zeros(d)
        buf = np.zeros(d, dtype=np.complex128)
        for x in range(n):
            for c in range(d):
                buf[c] = 0j
            for k in range(T):
                y = tgt[x, k]
                buf[col[y]] += w[k] * val[y]
            buf[col[x]] -= W * val[x]
            row = col[x]
            for c in range(d):
                b = buf[c] - sigma[row, c] * val[x]
                rb[c] += b.real * b.real + b.imag * b.imag
            if (x + 1) % BLOCK == 0 or x == n - 1:
                for c in range(d):
                    res[c] += rb[c]
                    rb[c] = 0.0
        return res


def shift_apply(f: np.ndarray, tgt: np.ndarray, w: np.ndarray) -> np.ndarray:
    f = np.ascontiguousarray(f, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if numba_enabled():
        return _shift_apply_nb(f, np.ascontiguousarray(tgt), w)
    return shift_apply_numpy(f, tgt, w)


def restrict(col: np.ndarray, val: np.ndarray, tgt: np.ndarray, w: np.ndarray, d: int):
    """Restrict a shift operator to a span of monomial functions.

    The span has basis f_c(y) = [col[y] == c] * val[y], c < d.  Returns the raw
    matrix R[k, c] = sum_x conj(f_k(x)) (T f_c)(x) and the raw squared norms
    sum_x |(T f_c)(x)|^2, both unnormalised.
    """
    col = np.ascontiguousarray(col, dtype=np.int64)
    val = np.ascontiguousarray(val, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if numba_enabled():
        return _restrict_nb(col, val, np.ascontiguousarray(tgt), w, d)
    return restrict_numpy(col, val, tgt, w, d)


def residual(col, val, tgt, w, d: int, sigma: np.ndarray) -> np.ndarray:
    """sum_x |(T f_c)(x) - sum_k sigma[k, c] f_k(x)|^2 for each c (raw)."""
    col = np.ascontiguousarray(col, dtype=np.int64)
    val = np.ascontiguousarray(val, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    sigma = np.ascontiguousarray(sigma, dtype=np.complex128)
    if numba_enabled():
        return _residual_nb(col, val, np.ascontiguousarray(tgt), w, d, sigma)
    return residual_numpy(col, val, tgt, w, d, sigma)
