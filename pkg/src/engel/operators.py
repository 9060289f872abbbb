"""Vladimirov-Taibleson type operators on level-n functions and their symbols.

Every operator here has the shape

    (T f)(x) = sum_k w[k] * (f(tgt[x, k]) - f(x)) + shift * f(x)

so it is stored as a target table plus weights (:class:`OperatorMatrix`); a
sparse matrix is built on demand.  Level-n functions turn the defining
integrals into these finite sums exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .dual import DualPoint, monomial_column, monomial_row
from .group import quotient
from .padic import CapacityError, PhaseClass, budget_dim

CONVENTIONS = ("right", "left", "mixed")


def c_alpha(p: int, alpha: float) -> float:
    return (1 - p ** alpha) / (1 - p ** (-(alpha + 1)))


def const_C(p: int, alpha: float) -> float:
    return (1 - 1 / p) / (1 - p ** (-(alpha + 1)))


def term(lam: PhaseClass, alpha: float) -> float:
    """Eigenvalue of the 1-D operator on u -> exp(2 pi i {lam u})."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if lam.is_trivial():
        return 0.0
    return lam.norm() ** alpha - const_C(lam.p, alpha)


def term_literal(lam: PhaseClass, alpha: float) -> float:
    """|lam|^alpha - C without the special case at the trivial class."""
    return lam.norm() ** alpha - const_C(lam.p, alpha)


def shell_weights(p: int, n: int, alpha: float) -> np.ndarray:
    """w[t-1] = c_alpha p^-n |t|^-(alpha+1) for t = 1 .. p^n - 1."""
    q = p ** n
    t = np.arange(1, q)
    v = np.zeros(t.size)
    rest = t.copy()
    while True:
        m = rest % p == 0
        if not m.any():
            break
        v[m] += 1
        rest[m] //= p
    return c_alpha(p, alpha) * p ** (-n) * p ** ((alpha + 1) * v)


def term_bruteforce(lam: PhaseClass, alpha: float, depth: int | None = None) -> float:
    """Shell sum of the 1-D operator on a character, at the given depth."""
    p = lam.p
    if depth is None:
        depth = max(lam.expo, 1)
    if depth < lam.expo:
        raise ValueError("depth below the level of the frequency")
    q = p ** depth
    t = np.arange(1, q)
    e = (-lam.residue(depth) * t) % q
    vals = np.exp(2j * np.pi * e / q) - 1
    return float(np.real(shell_weights(p, depth, alpha) @ vals))


@dataclass(eq=False)
class OperatorMatrix:
    tgt: np.ndarray
    w: np.ndarray
    p: int
    n: int
    alpha: float
    directions: tuple
    convention: str = "right"
    shift: float = 0.0
    kind: str = "directional"
    _sparse: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.tgt.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        out = _kernels.shift_apply(f, self.tgt, self.w)
        if self.shift:
            out = out + self.shift * np.asarray(f)
        return out

    @property
    def sparse(self) -> sp.csr_matrix:
        if self._sparse is None:
            N, T = self.tgt.shape
            rows = np.repeat(np.arange(N), T)
            data = np.tile(self.w, N)
            A = sp.csr_matrix((data, (rows, self.tgt.ravel())), shape=(N, N))
            A = A + sp.identity(N, format="csr") * (self.shift - self.w.sum())
            A.sum_duplicates()
            self._sparse = A.tocsr()
        return self._sparse

    def dense(self) -> np.ndarray:
        if self.size > budget_dim():
            raise CapacityError(f"dimension {self.size} exceeds ENGEL_BUDGET_DIM={budget_dim()}")
        return self.sparse.toarray()

    def hermitian_error(self) -> float:
        A = self.sparse
        D = A - A.conj().T
        return float(abs(D).max()) if D.nnz else 0.0

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if (self.p, self.n, self.alpha) != (other.p, other.n, other.alpha):
            raise ValueError("operators live on different quotients")
        conv = self.convention if self.convention == other.convention else "mixed"
        return OperatorMatrix(
            np.hstack([self.tgt, other.tgt]),
            np.concatenate([self.w, other.w]),
            self.p,
            self.n,
            self.alpha,
            self.directions + other.directions,
            conv,
            self.shift + other.shift,
            "sum",
        )

    def triplets(self):
        A = self.sparse.tocoo()
        order = np.lexsort((A.col, A.row))
        return A.row[order], A.col[order], A.data[order]


def _check_level(n: int):
    if n < 1:
        raise ValueError("operators need level n >= 1")


def directional_vt_matrix(j: int, alpha: float, n: int, p: int = 5, translation: str = "right") -> OperatorMatrix:
    """Directional operator along X_j at level n."""
    _check_level(n)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if translation not in ("right", "left"):
        raise ValueError("translation must be 'right' or 'left'")
    Q = quotient(p, n)
    tgt = Q.one_param_targets(j, translation)
    return OperatorMatrix(tgt, shell_weights(p, n, alpha), p, n, alpha, (j,), translation)


def sub_laplacian_matrix(alpha: float, n: int, p: int = 5, translation: str = "right") -> OperatorMatrix:
    """X_1 + X_2 directional operators.

    ``translation="mixed"`` takes X_1 with right and X_2 with left translations;
    it is not left-invariant and only serves as a diagnostic.
    """
    if translation == "mixed":
        return directional_vt_matrix(1, alpha, n, p, "right") + directional_vt_matrix(2, alpha, n, p, "left")
    A = directional_vt_matrix(1, alpha, n, p, translation) + directional_vt_matrix(2, alpha, n, p, translation)
    A.kind = "sub_laplacian"
    return A


def vladimirov_laplacian_matrix(alpha: float, n: int, p: int = 5, translation: str = "right") -> OperatorMatrix:
    A = directional_vt_matrix(1, alpha, n, p, translation)
    for j in (2, 3, 4):
        A = A + directional_vt_matrix(j, alpha, n, p, translation)
    A.kind = "laplacian"
    return A


def _max_norm_expo(coords: np.ndarray, p: int, n: int) -> np.ndarray:
    """-log_p of the max-norm of integer coordinates mod p^n (n for zero)."""
    v = np.full(coords.shape, n, dtype=np.int64)
    rest = coords.copy()
    nz = rest != 0
    v[nz] = 0
    for _ in range(n):
        m = nz & (rest % p == 0)
        v[m] += 1
        rest[m] //= p
    return v.min(axis=1)


def full_vt_matrix(alpha: float, n: int, p: int = 5, shifted: bool = False, translation: str = "right") -> OperatorMatrix:
    """Operator built from the group max-norm with exponent alpha + 4.

    With ``shifted`` the constant (1 - p^-4)/(1 - p^-(alpha+4)) is added.
    """
    _check_level(n)
    Q = quotient(p, n)
    N = Q.size
    if N > budget_dim():
        raise CapacityError(f"dimension {N} exceeds ENGEL_BUDGET_DIM={budget_dim()}")
    ys = Q.coords[1:]
    v = _max_norm_expo(ys, p, n)
    c = (1 - p ** alpha) / (1 - p ** (-(alpha + 4)))
    w = c * p ** (-4 * n) * p ** ((alpha + 4) * v)
    tgt = np.empty((N, N - 1), dtype=np.int64)
    for k, y in enumerate(ys):
        yinv = Q.inverse(y)
        tgt[:, k] = Q.right_translation(yinv) if translation == "right" else Q.left_translation(yinv)
    shift = (1 - p ** -4) / (1 - p ** (-(alpha + 4))) if shifted else 0.0
    return OperatorMatrix(tgt, w, p, n, alpha, (1, 2, 3, 4), translation, shift, "full_shifted" if shifted else "full")


# --- symbols ---------------------------------------------------------------


def q_argument(xi: DualPoint, h: int) -> PhaseClass:
    """xi2 + xi3 h + xi4 h^2 / 2 as a class."""
    return xi.xi2 + xi.xi3.scale(h) + xi.xi4.scale(Fraction(h * h, 2))


def symbol_x2(xi: DualPoint, alpha: float) -> np.ndarray:
    return np.diag([term(q_argument(xi, h), alpha) for h in range(xi.dim)]).astype(np.complex128)


def symbol_x1(xi: DualPoint, alpha: float) -> np.ndarray:
    p, d = xi.p, xi.dim
    L = max(xi.k, xi.xi1.expo)
    S = np.zeros((d, d), dtype=np.complex128)
    if L == 0:
        return S
    q = p ** L
    w = shell_weights(p, L, alpha)
    t = np.arange(1, q)
    ph = np.exp(-2j * np.pi * ((xi.xi1.residue(L) * t) % q) / q)
    k = np.arange(d)
    for kk in k:
        cols = (kk - t) % d
        np.add.at(S[kk], cols, w * ph)
        S[kk, kk] -= w.sum()
    return S


def symbol_closed_form(xi: DualPoint, alpha: float) -> np.ndarray:
    """d x d symbol of the sub-Laplacian: shift part along X_1 plus a diagonal along X_2.

    In the std layout, T pi = pi sigma for right translations and
    T pi = sigma pi for left translations.
    """
    return symbol_x1(xi, alpha) + symbol_x2(xi, alpha)


@dataclass
class SymbolEstimate:
    sigma: np.ndarray
    leakage: float
    row_spread: float


def restrict_span(T: OperatorMatrix, xi: DualPoint, span: str = "row", index: int = 0, residual: bool = True):
    """Restrict T to one row (``span="row"``) or column of pi_xi.

    Returns (S, leak) where S[k, c] is the coefficient of basis function k in
    T applied to basis function c, and leak is the largest relative norm of
    the part of T f_c outside the span, relative to |T f_c| (computed in a
    second pass rather than by subtracting norms).
    """
    if xi.level > T.n:
        raise ValueError("xi is finer than the operator level")
    Q = quotient(T.p, T.n)
    d = xi.dim
    col, val = (monomial_row if span == "row" else monomial_column)(xi, index, Q)
    R, tn = _kernels.restrict(col, val, T.tgt, T.w, d)
    S = R * d / Q.size
    leak = 0.0
    if residual:
        res = _kernels.residual(col, val, T.tgt, T.w, d, S)
        # relative to |T f_c|; a column with T f_c = 0 cannot leak
        nz = tn > 0
        if nz.any():
            leak = float(np.sqrt((res[nz] / tn[nz]).max()))
    if T.shift:
        S = S + T.shift * np.eye(d)
    return S, leak


def symbol_numeric(xi: DualPoint, T: OperatorMatrix, check_row: int | None = 1) -> SymbolEstimate:
    """Extract sigma_T(xi) by restricting T to one row (or column) of pi_xi.

    ``leakage`` is the relative norm of the part of T f that leaves the span;
    ``row_spread`` compares against another row and is an x-independence
    witness.  Both should vanish for a left-invariant T.
    """
    if T.convention == "mixed":
        raise ValueError("the mixed operator has no symbol on a single row or column")
    span = "row" if T.convention == "right" else "column"
    sigma, leak = restrict_span(T, xi, span, 0)
    spread = 0.0
    if check_row is not None and xi.dim > 1:
        s2, l2 = restrict_span(T, xi, span, check_row % xi.dim)
        spread = float(np.abs(s2 - sigma).max())
        leak = max(leak, l2)
    if span == "column":
        sigma = sigma.T
    return SymbolEstimate(sigma, leak, spread)


def character_eigenvalue(lams, alpha: float) -> float:
    """Sum of term() over per-direction frequencies."""
    return float(sum(term(l, alpha) for l in lams))


def plane_wave(p: int, n: int, lams) -> np.ndarray:
    """x -> exp(2 pi i {sum lam_j x_j}) sampled on G/G_n."""
    Q = quotient(p, n)
    e = sum(l.residue(n) * Q.coords[:, j] for j, l in enumerate(lams))
    return np.exp(2j * np.pi * (e % Q.q) / Q.q)

