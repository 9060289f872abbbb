"""The Engel group law on Z_p^4 and its finite quotients G/G_n.

Points of the group are exact (:class:`EngelPoint`).  The quotient G/G_n is
handled entirely in integers mod p**n; classes are indexed row-major over
(c1, c2, c3, c4) so that operator matrices are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .padic import PAdicScalar, check_prime, residue, valuation


@dataclass(frozen=True)
class EngelPoint:
    x1: PAdicScalar
    x2: PAdicScalar
    x3: PAdicScalar
    x4: PAdicScalar

    def __post_init__(self):
        ps = {c.p for c in self.coords}
        if len(ps) != 1:
            raise ValueError("coordinates use different primes")
        for c in self.coords:
            if valuation(c) < 0:
                raise ValueError(f"coordinate {c} is not a p-adic integer")

    @classmethod
    def of(cls, coords, p: int) -> "EngelPoint":
        return cls(*(PAdicScalar.of(c, p) for c in coords))

    @property
    def coords(self) -> tuple[PAdicScalar, ...]:
        return (self.x1, self.x2, self.x3, self.x4)

    @property
    def p(self) -> int:
        return self.x1.p

    def __matmul__(self, other: "EngelPoint") -> "EngelPoint":
        return star(self, other)

    def to_json(self) -> list:
        return [c.to_json() for c in self.coords]

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def identity(p: int) -> EngelPoint:
    return EngelPoint.of((0, 0, 0, 0), p)


def star(x: EngelPoint, y: EngelPoint) -> EngelPoint:
    x1, x2, x3, x4 = x.coords
    y1, y2, y3, y4 = y.coords
    half = PAdicScalar.of(1, x.p) / 2
    return EngelPoint(
        x1 + y1,
        x2 + y2,
        x3 + y3 + x1 * y2,
        x4 + y4 + x1 * y3 + half * x1 * x1 * y2,
    )


def inverse(x: EngelPoint) -> EngelPoint:
    x1, x2, x3, x4 = x.coords
    half = PAdicScalar.of(1, x.p) / 2
    return EngelPoint(-x1, -x2, -x3 + x1 * x2, -x4 + x1 * x3 - half * x1 * x1 * x2)


def one_param(j: int, t, p: int | None = None) -> EngelPoint:
    """exp(t X_j) in exponential coordinates: t in slot j."""
    if j not in (1, 2, 3, 4):
        raise ValueError("direction must be 1..4")
    if p is None:
        if not isinstance(t, PAdicScalar):
            raise TypeError("pass p when t is not a PAdicScalar")
        p = t.p
    t = PAdicScalar.of(t, p)
    if valuation(t) < 0:
        raise ValueError("one-parameter subgroups are indexed by Z_p")
    coords = [0, 0, 0, 0]
    coords[j - 1] = t
    return EngelPoint.of(coords, p)


@dataclass(frozen=True)
class QuotientIndex:
    """A class of G/G_n written as four residues mod p**n."""

    c1: int
    c2: int
    c3: int
    c4: int
    p: int
    n: int

    def __post_init__(self):
        q = self.p ** self.n
        for c in self.coords:
            if not 0 <= c < q:
                raise ValueError(f"residue {c} outside [0, {q})")

    @property
    def coords(self) -> tuple[int, int, int, int]:
        return (self.c1, self.c2, self.c3, self.c4)

    @property
    def flat(self) -> int:
        q = self.p ** self.n
        return ((self.c1 * q + self.c2) * q + self.c3) * q + self.c4


def project(x: EngelPoint, n: int) -> QuotientIndex:
    return QuotientIndex(*(residue(c / x.p ** n, n) if n else 0 for c in x.coords), p=x.p, n=n)


def lift(c: QuotientIndex) -> EngelPoint:
    return EngelPoint.of(c.coords, c.p)


class Quotient:
    """The finite group G/G_n = B_4(Z/p^n) with vectorised integer arithmetic.

    Use :func:`quotient` to get a cached, shared instance.
    """

    def __init__(self, p: int, n: int):
        check_prime(p)
        if n < 0:
            raise ValueError("level must be non-negative")
        self.p = p
        self.n = n
        self.q = p ** n
        self.size = self.q ** 4
        self.inv2 = pow(2, -1, self.q) if self.q > 1 else 0

    @cached_property
    def coords(self) -> np.ndarray:
        """All classes as an (N, 4) table in index order (built on first use)."""
        q = self.q
        grid = np.indices((q, q, q, q), dtype=np.int64).reshape(4, -1).T
        grid.setflags(write=False)
        return grid

    def __repr__(self):
        return f"Quotient(p={self.p}, n={self.n})"

    def index(self, c: np.ndarray) -> np.ndarray:
        q = self.q
        c = np.asarray(c, dtype=np.int64)
        return ((c[..., 0] * q + c[..., 1]) * q + c[..., 2]) * q + c[..., 3]

    def star(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        q, h = self.q, self.inv2
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        a1, a2, a3, a4 = (a[..., i] for i in range(4))
        b1, b2, b3, b4 = (b[..., i] for i in range(4))
        sq = (a1 * a1) % q
        return np.stack(
            [
                (a1 + b1) % q,
                (a2 + b2) % q,
                (a3 + b3 + a1 * b2) % q,
                (a4 + b4 + a1 * b3 + ((h * sq) % q) * b2) % q,
            ],
            axis=-1,
        )

    def inverse(self, a: np.ndarray) -> np.ndarray:
        q, h = self.q, self.inv2
        a = np.asarray(a, dtype=np.int64)
        a1, a2, a3, a4 = (a[..., i] for i in range(4))
        sq = (a1 * a1) % q
        return np.stack(
            [(-a1) % q, (-a2) % q, (-a3 + a1 * a2) % q, (-a4 + a1 * a3 - ((h * sq) % q) * a2) % q],
            axis=-1,
        )

    def point(self, i: int) -> QuotientIndex:
        return QuotientIndex(*(int(v) for v in self.coords[i]), p=self.p, n=self.n)

    def left_translation(self, z) -> np.ndarray:
        """Permutation s with (L_z f)(x) = f(z * x) = f[s[x]]."""
        z = np.broadcast_to(np.asarray(z, dtype=np.int64), self.coords.shape)
        return self.index(self.star(z, self.coords))

    def right_translation(self, z) -> np.ndarray:
        """Permutation s with (R_z f)(x) = f(x * z) = f[s[x]]."""
        z = np.broadcast_to(np.asarray(z, dtype=np.int64), self.coords.shape)
        return self.index(self.star(self.coords, z))

    def one_param_targets(self, j: int, side: str = "right") -> np.ndarray:
        """Targets of x -> x * exp(t X_j)^{-1} (or exp(t X_j)^{-1} * x).

        Returns an (N, q - 1) array; column k holds t = k + 1.
        """
        if j not in (1, 2, 3, 4):
            raise ValueError("direction must be 1..4")
        if side not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")
        q = self.q
        out = np.empty((self.size, q - 1), dtype=np.int64)
        for t in range(1, q):
            g = np.zeros(4, dtype=np.int64)
            g[j - 1] = (-t) % q
            out[:, t - 1] = self.right_translation(g) if side == "right" else self.left_translation(g)
        return out

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return rng.integers(0, self.q, size=(k, 4), dtype=np.int64)


@lru_cache(maxsize=8)
def quotient(p: int, n: int) -> Quotient:
    return Quotient(p, n)


@dataclass(frozen=True, eq=False)
class QuotientFunction:
    """A level-n function stored as its values on G/G_n in index order."""

    values: np.ndarray
    p: int
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != ((self.p ** self.n) ** 4,):
            raise ValueError(f"expected {(self.p ** self.n) ** 4} values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def inner(self, other: "QuotientFunction") -> complex:
        """Normalised Haar pairing <self, other> (conjugate-linear in other)."""
        return complex(np.vdot(other.values, self.values) / self.values.size)

    def norm2(self) -> float:
        return float(np.vdot(self.values, self.values).real / self.values.size)


def haar_average(f, n: int | None = None) -> complex:
    """Integral of a level-n function against the normalised Haar measure."""
    values = f.values if isinstance(f, QuotientFunction) else np.asarray(f)
    if n is not None and isinstance(f, QuotientFunction) and f.n != n:
        raise ValueError("level mismatch")
    return complex(values.mean())


def lift_function(values: np.ndarray, p: int, n: int, m: int) -> np.ndarray:
    """View a level-n function as a level-m function (m >= n)."""
    if m < n:
        raise ValueError("can only lift to a finer level")
    qm = p ** m
    coarse = quotient(p, n)
    fine = quotient(p, m)
    idx = coarse.index(fine.coords % coarse.q) if coarse.q > 1 else np.zeros(qm ** 4, dtype=np.int64)
    return np.asarray(values)[idx]
