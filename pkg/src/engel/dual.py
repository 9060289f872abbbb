"""Unitary dual of B_4(Z_p): enumeration, matrix coefficients, characters and
the group Fourier transform on level-n functions.

Representation matrices use the "std" layout: entry (r, c) is

    exp(2 pi i E(x, r)) * [x1 == c - r  mod d]
    E(x, r) = xi.x + (xi3 x2 + xi4 x3) r + xi4 x2 r^2 / 2

which satisfies pi(x * y) = pi(x) pi(y).  The transposed layout (phase on
the column index) is kept as a candidate for :func:`orientation_check`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gaussian import char_integral, char_integral_table
from .group import EngelPoint, Quotient, project, quotient
from .padic import PhaseClass, check_prime

CASES = ("abelian", "heisenberg", "big_xi4", "big_xi3")


@dataclass(frozen=True)
class DualPoint:
    xi1: PhaseClass
    xi2: PhaseClass
    xi3: PhaseClass
    xi4: PhaseClass

    def __post_init__(self):
        if len({c.p for c in self.components}) != 1:
            raise ValueError("components use different primes")
        if not is_canonical(self):
            raise ValueError(f"{self} is not a canonical dual point")

    @classmethod
    def of(cls, numers, expos, p: int) -> "DualPoint":
        return cls(*(PhaseClass(a, m, p) for a, m in zip(numers, expos)))

    @property
    def components(self) -> tuple[PhaseClass, ...]:
        return (self.xi1, self.xi2, self.xi3, self.xi4)

    @property
    def p(self) -> int:
        return self.xi1.p

    @property
    def level(self) -> int:
        return max(c.expo for c in self.components)

    @property
    def k(self) -> int:
        """log_p of the dimension."""
        return max(self.xi3.expo, self.xi4.expo)

    @property
    def dim(self) -> int:
        return self.p ** self.k

    @property
    def case_tag(self) -> str:
        t3, t4 = self.xi3.is_trivial(), self.xi4.is_trivial()
        if t3 and t4:
            return "abelian"
        if t4:
            return "heisenberg"
        if t3:
            return "big_xi4"
        return "big_xi3"

    def residues(self, n: int) -> tuple[int, int, int, int]:
        """Numerators of the four components over p**n."""
        return tuple(c.residue(n) for c in self.components)

    def sort_key(self, n: int):
        return (self.xi4.expo, self.xi3.expo) + self.residues(n)

    def to_json(self) -> dict:
        return {
            "xi1": self.xi1.to_json(),
            "xi2": self.xi2.to_json(),
            "xi3": self.xi3.to_json(),
            "xi4": self.xi4.to_json(),
            "level": self.level,
            "dim": self.dim,
            "case_tag": self.case_tag,
        }

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _reduced(c: PhaseClass, k: int) -> bool:
    """c is the chosen representative of its class mod p^-k Z_p."""
    if c.is_trivial():
        return True
    # c = a / p^m with m > k must have a < p^(m-k) when written over p^m
    return c.expo > k and c.numer < c.p ** (c.expo - k)


def is_canonical(xi: DualPoint) -> bool:
    m3, m4 = xi.xi3.expo, xi.xi4.expo
    if m3 == 0 and m4 == 0:
        return True
    if m3 == 0:
        return _reduced(xi.xi1, m4)
    if m4 >= m3:
        return False
    return _reduced(xi.xi1, m3) and _reduced(xi.xi2, m3)


def _classes(p: int, n: int, norm_expo: int | None = None):
    """Classes of level <= n, or exactly of norm p**norm_expo."""
    q = p ** n
    out = [PhaseClass(a, n, p) for a in range(q)]
    if norm_expo is not None:
        out = [c for c in out if c.expo == norm_expo]
    return out


def _reduced_classes(p: int, n: int, k: int):
    # representatives a / p^n, 0 <= a < p^(n-k), of p^-n Z_p / p^-k Z_p
    return [PhaseClass(a, n, p) for a in range(p ** (n - k))]


@lru_cache(maxsize=16)
def enumerate_dual(p: int, n: int) -> tuple[DualPoint, ...]:
    """All canonical dual points of level <= n, sorted by (m4, m3, numerators)."""
    check_prime(p)
    if n < 0:
        raise ValueError("level must be non-negative")
    pts = []
    full = _classes(p, n)
    for x1 in full:
        for x2 in full:
            pts.append((x1, x2, PhaseClass.trivial(p), PhaseClass.trivial(p)))
    for k in range(1, n + 1):
        red = _reduced_classes(p, n, k)
        for x3 in _classes(p, n, k):
            for x1 in red:
                for x2 in red:
                    pts.append((x1, x2, x3, PhaseClass.trivial(p)))
        for x4 in _classes(p, n, k):
            for x1 in red:
                for x2 in full:
                    pts.append((x1, x2, PhaseClass.trivial(p), x4))
        for j in range(1, k):
            for x3 in _classes(p, n, k):
                for x4 in _classes(p, n, j):
                    for x1 in red:
                        for x2 in red:
                            pts.append((x1, x2, x3, x4))
    out = [DualPoint(*c) for c in pts]
    out.sort(key=lambda xi: xi.sort_key(n))
    return tuple(out)


def census(p: int, n: int) -> dict:
    """Counts per (case, dim), sum of d^2 and the expected p^(4n)."""
    pts = enumerate_dual(p, n)
    counts = Counter((xi.case_tag, xi.dim) for xi in pts)
    new = Counter((xi.case_tag, xi.dim) for xi in pts if xi.level == n)
    total = sum(xi.dim ** 2 for xi in pts)
    return {
        "p": p,
        "level": n,
        "classes": len(pts),
        "by_case": [
            {"case_tag": c, "dim": d, "count": counts[(c, d)], "new_at_level": new[(c, d)]}
            for c, d in sorted(counts, key=lambda cd: (CASES.index(cd[0]), cd[1]))
        ],
        "sum_d2": total,
        "expected": p ** (4 * n),
        "pass": total == p ** (4 * n),
    }


# --- representation matrices ----------------------------------------------


def _consts(xi: DualPoint, n: int):
    q = xi.p ** n
    inv2 = pow(2, -1, q) if q > 1 else 0
    return xi.residues(n), q, inv2


def phase_exponent(xi: DualPoint, coords: np.ndarray, r, n: int) -> np.ndarray:
    """q * E(x, r) mod q, exactly, for integer coords mod p**n."""
    (a1, a2, a3, a4), q, inv2 = _consts(xi, n)
    c = np.asarray(coords, dtype=np.int64)
    x1, x2, x3, x4 = (c[..., i] for i in range(4))
    r = np.asarray(r, dtype=np.int64)
    rr = (r * r % q) * inv2 % q
    e = a1 * x1 + a2 * x2 + a3 * x3 + a4 * x4
    e = e + (r * ((a3 * x2 + a4 * x3) % q)) % q
    e = e + (rr * (a4 * x2 % q)) % q
    return e % q


def _level_for(xi: DualPoint) -> int:
    return max(xi.level, 1)


def rep_matrix_quotient(
    xi: DualPoint,
    coords: np.ndarray,
    n: int,
    orientation: str = "h_minus_hprime",
    layout: str = "std",
) -> np.ndarray:
    """pi_xi at a batch of quotient points; returns shape coords.shape[:-1] + (d, d)."""
    if xi.level > n:
        raise ValueError(f"xi has level {xi.level} > {n}")
    if orientation not in ("h_minus_hprime", "hprime_minus_h"):
        raise ValueError(f"unknown orientation {orientation!r}")
    if layout not in ("std", "transposed"):
        raise ValueError(f"unknown layout {layout!r}")
    d = xi.dim
    q = xi.p ** n
    coords = np.asarray(coords, dtype=np.int64)
    lead = coords.shape[:-1]
    r = np.arange(d)
    # phase index (on rows for std, on columns for the other layout)
    e = phase_exponent(xi, coords[..., None, :], r, n)  # lead + (d,)
    ph = np.exp(2j * np.pi * e / q)
    x1 = coords[..., 0][..., None, None]
    i = r[:, None]
    j = r[None, :]
    if layout == "std":
        # rows carry the phase: (i, j) = (r, c)
        diff = (j - i) if orientation == "h_minus_hprime" else (i - j)
        mask = (x1 - diff) % d == 0
        return ph[..., :, None] * mask
    # transposed layout: (i, j) = (h, h'), phase on h'
    diff = (i - j) if orientation == "h_minus_hprime" else (j - i)
    mask = (x1 - diff) % d == 0
    out = ph[..., None, :] * mask
    return out.reshape(lead + (d, d))


def rep_matrix(xi: DualPoint, x: EngelPoint, orientation: str = "h_minus_hprime", layout: str = "std") -> np.ndarray:
    n = _level_for(xi)
    c = np.array(project(x, n).coords, dtype=np.int64)
    return rep_matrix_quotient(xi, c, n, orientation, layout)


def orientation_check(p: int = 5, n: int = 1, pairs: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
    """Run pi(x * y) = pi(x) pi(y) for every (orientation, layout) candidate."""
    rng = np.random.default_rng(seed)
    Q = quotient(p, n)
    xs, ys = Q.sample(rng, pairs), Q.sample(rng, pairs)
    xy = Q.star(xs, ys)
    out = {}
    for layout in ("transposed", "std"):
        for orient in ("h_minus_hprime", "hprime_minus_h"):
            worst = 0.0
            for xi in enumerate_dual(p, n):
                if xi.dim == 1:
                    continue
                A = rep_matrix_quotient(xi, xs, n, orient, layout)
                B = rep_matrix_quotient(xi, ys, n, orient, layout)
                C = rep_matrix_quotient(xi, xy, n, orient, layout)
                worst = max(worst, float(np.abs(C - A @ B).max()))
            out[f"{layout}:{orient}"] = {"max_error": worst, "pass": worst <= tol}
    return out


def coefficient_vector(xi: DualPoint, r: int, c: int, n: int) -> np.ndarray:
    """Matrix coefficient x -> pi_xi(x)[r, c] sampled on G/G_n."""
    Q = quotient(xi.p, n)
    d = xi.dim
    e = phase_exponent(xi, Q.coords, r, n)
    mask = (Q.coords[:, 0] + r - c) % d == 0
    return np.exp(2j * np.pi * e / Q.q) * mask


def monomial_row(xi: DualPoint, r: int, Q: Quotient):
    """Row r of pi_xi as a monomial family: f_c(x) = [col[x] == c] * val[x]."""
    d = xi.dim
    e = phase_exponent(xi, Q.coords, r, Q.n)
    col = (Q.coords[:, 0] + r) % d
    return col, np.exp(2j * np.pi * e / Q.q)


def monomial_column(xi: DualPoint, c: int, Q: Quotient):
    """Column c of pi_xi: f_r(x) = [col[x] == r] * val[x]."""
    d = xi.dim
    col = (c - Q.coords[:, 0]) % d
    e = phase_exponent(xi, Q.coords, col, Q.n)
    return col, np.exp(2j * np.pi * e / Q.q)


# --- characters ------------------------------------------------------------


@lru_cache(maxsize=4096)
def _char_table(xi3: PhaseClass, xi4: PhaseClass, k: int) -> np.ndarray:
    t = char_integral_table(xi3, xi4, k)
    t.setflags(write=False)
    return t


def character(xi: DualPoint, x: EngelPoint) -> complex:
    """Character via the Gaussian integral; equals the trace of rep_matrix."""
    d = xi.dim
    x1 = x.x1
    if xi.k and not (x1 / d).is_integral():
        return 0j
    n = _level_for(xi)
    c = np.array(project(x, n).coords, dtype=np.int64)
    a = phase_exponent(xi, c, 0, n)
    ph = np.exp(2j * np.pi * a / xi.p ** n)
    return complex(d * ph * char_integral(xi.xi3, xi.xi4, x.x2, x.x3))


def character_on_quotient(xi: DualPoint, n: int, coords: np.ndarray | None = None) -> np.ndarray:
    if xi.level > n:
        raise ValueError(f"xi has level {xi.level} > {n}")
    Q = quotient(xi.p, n)
    if coords is None:
        coords = Q.coords
    d = xi.dim
    ph = np.exp(2j * np.pi * phase_exponent(xi, coords, 0, n) / Q.q)
    if d == 1:
        return ph
    table = _char_table(xi.xi3, xi.xi4, xi.k)
    vals = table[coords[:, 1] % d, coords[:, 2] % d]
    return d * ph * vals * (coords[:, 0] % d == 0)


# --- Fourier transform -----------------------------------------------------


def fourier_transform(f: np.ndarray, xi: DualPoint, n: int) -> np.ndarray:
    """Direct route: f_hat = mean_x f(x) pi(x)^* (d x d)."""
    Q = quotient(xi.p, n)
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (Q.size,):
        raise ValueError("function has the wrong length for this level")
    if xi.level > n:
        raise ValueError(f"xi has level {xi.level} > {n}")
    d = xi.dim
    out = np.empty((d, d), dtype=np.complex128)
    for r in range(d):
        col, val = monomial_row(xi, r, Q)
        g = f * np.conj(val)
        out[:, r] = np.bincount(col, weights=g.real, minlength=d) + 1j * np.bincount(col, weights=g.imag, minlength=d)
    return out / Q.size


def _kvals(xi: DualPoint, n: int):
    (a1, a2, a3, a4), q, inv2 = _consts(xi, n)
    r = np.arange(xi.dim, dtype=np.int64)
    k2 = (a2 + r * a3 + (r * r % q) * inv2 % q * a4) % q
    k3 = (a3 + r * a4) % q
    return a1, a4 % q, k2, k3


def transform_all(f: np.ndarray, p: int, n: int) -> dict:
    """Fourier coefficients at every dual point of level <= n, via one FFT."""
    Q = quotient(p, n)
    q = Q.q
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (Q.size,):
        raise ValueError("function has the wrong length for this level")
    F = np.fft.fftn(f.reshape(q, q, q, q), axes=(1, 2, 3))
    x1 = np.arange(q)
    out = {}
    for xi in enumerate_dual(p, n):
        d = xi.dim
        a1, a4, k2, k3 = _kvals(xi, n)
        w = np.exp(-2j * np.pi * a1 * x1 / q)
        # S[x1, r] = w[x1] F[x1, k2[r], k3[r], a4]
        S = w[:, None] * F[:, k2, k3, a4]
        fh = np.zeros((d, d), dtype=np.complex128)
        r = np.arange(d)
        rows = (x1[:, None] + r[None, :]) % d
        np.add.at(fh, (rows, np.broadcast_to(r, rows.shape)), S)
        out[xi] = fh / Q.size
    return out


def fourier_inverse(coeffs: dict, p: int, n: int) -> np.ndarray:
    """f(x) = sum_xi d Tr[pi(x) f_hat(xi)] on G/G_n."""
    Q = quotient(p, n)
    q = Q.q
    G = np.zeros((q, q, q, q), dtype=np.complex128)
    x1 = np.arange(q)
    for xi, fh in coeffs.items():
        if xi.level > n:
            raise ValueError(f"xi has level {xi.level} > {n}")
        d = xi.dim
        a1, a4, k2, k3 = _kvals(xi, n)
        w = d * np.exp(2j * np.pi * a1 * x1 / q)
        r = np.arange(d)
        vals = w[:, None] * fh[(x1[:, None] + r[None, :]) % d, r[None, :]]  # (q, d)
        idx1 = np.broadcast_to(x1[:, None], vals.shape)
        np.add.at(G, (idx1, np.broadcast_to(k2, vals.shape), np.broadcast_to(k3, vals.shape), a4), vals)
    out = np.fft.ifftn(G, axes=(1, 2, 3)) * q ** 3
    return out.reshape(-1)


def plancherel(coeffs: dict) -> float:
    return float(sum(xi.dim * np.sum(np.abs(fh) ** 2) for xi, fh in coeffs.items()))
