"""Exact p-adic scalars and classes of Q_p/Z_p.

Everything here is exact rational arithmetic on Python integers.  Floats only
appear when a phase class is turned into a point on the unit circle.

The trivial class of Q_p/Z_p is stored as ``0`` (numer=0, expo=0).
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

INF = math.inf

Rational = Union[int, Fraction, "PAdicScalar"]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p) or p < 5:
        raise ValueError(f"p must be a prime >= 5, got {p!r}")
    return p


@dataclass(frozen=True)
class Config:
    """Run parameters shared by the library entry points and the CLI."""

    p: int = 5
    n: int = 1
    alpha: float = 1.0
    tol_float: float = 1e-9
    rng_seed: int = 0

    def __post_init__(self):
        check_prime(self.p)
        if self.n < 0:
            raise ValueError("level n must be non-negative")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.tol_float < 0:
            raise ValueError("tol_float must be non-negative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be unsigned")


class CapacityError(RuntimeError):
    """A requested computation exceeds the configured size budget."""


def budget_dim() -> int:
    """Largest dimension handed to a dense solver (ENGEL_BUDGET_DIM)."""
    return int(os.environ.get("ENGEL_BUDGET_DIM", "10000"))


def budget_quotient() -> int:
    """Largest quotient size swept by the per-sector restriction (ENGEL_BUDGET_QUOTIENT)."""
    return int(os.environ.get("ENGEL_BUDGET_QUOTIENT", "500000"))


def _split_p(m: int, p: int) -> tuple[int, int]:
    """Return (k, u) with m = p**k * u and p not dividing u (m != 0)."""
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    return k, m


@dataclass(frozen=True)
class PAdicScalar:
    """A rational number viewed inside Q_p.

    Stored as a reduced fraction ``num/den`` with ``den > 0``.  Denominators
    prime to p are allowed (they are p-adic units), so 1/2 is a valid element
    of Z_p for odd p.
    """

    num: int
    den: int
    p: int

    def __post_init__(self):
        if self.den == 0:
            raise ZeroDivisionError("zero denominator")
        g = math.gcd(self.num, self.den)
        sign = -1 if self.den < 0 else 1
        object.__setattr__(self, "num", sign * self.num // g)
        object.__setattr__(self, "den", sign * self.den // g)

    @classmethod
    def of(cls, value, p: int) -> "PAdicScalar":
        if isinstance(value, PAdicScalar):
            if value.p != p:
                raise ValueError("mixing different primes")
            return value
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, int):
            return cls(value, 1, p)
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator, p)
        raise TypeError(f"cannot build a p-adic scalar from {type(value).__name__}")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def _coerce(self, other) -> "PAdicScalar | None":
        if isinstance(other, PAdicScalar):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PAdicScalar.of(other, self.p)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PAdicScalar(self.num * o.den + o.num * self.den, self.den * o.den, self.p)

    __radd__ = __add__

    def __neg__(self):
        return PAdicScalar(-self.num, self.den, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PAdicScalar(self.num * o.num, self.den * o.den, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num == 0:
            raise ZeroDivisionError("division by zero in Q_p")
        return PAdicScalar(self.num * o.den, self.den * o.num, self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        return PAdicScalar.of(self.fraction ** k, self.p)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, PAdicScalar) else other
        if o is None:
            return NotImplemented
        return self.p == o.p and self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den, self.p))

    def __bool__(self):
        return self.num != 0

    def __repr__(self):
        return f"PAdicScalar({self.fraction}, p={self.p})"

    def __str__(self):
        return str(self.fraction)

    def valuation(self):
        return valuation(self)

    def norm(self) -> Fraction:
        return norm(self)

    def is_integral(self) -> bool:
        return valuation(self) >= 0

    def to_json(self) -> dict:
        return {"num": str(self.num), "den": str(self.den)}

    @classmethod
    def from_json(cls, data: dict, p: int) -> "PAdicScalar":
        return cls(int(data["num"]), int(data["den"]), p)


def valuation(x: PAdicScalar):
    """p-adic valuation; ``math.inf`` for zero."""
    if x.num == 0:
        return INF
    return _split_p(x.num, x.p)[0] - _split_p(x.den, x.p)[0]


def norm(x: PAdicScalar) -> Fraction:
    """|x|_p = p**(-valuation) as an exact fraction."""
    v = valuation(x)
    if v == INF:
        return Fraction(0)
    return Fraction(x.p) ** (-v)


def residue(x: PAdicScalar, s: int) -> int:
    """Image of p**s * x in Z/p**s.

    Requires valuation(x) >= -s.  The map x -> residue(x, s) / p**s is the
    fractional part, and residue is additive and Z-linear, which lets hot
    loops work on plain integers mod p**s.
    """
    if x.num == 0:
        return 0
    p = x.p
    mod = p ** s
    kd, ud = _split_p(x.den, p)
    if kd > s:
        raise ValueError(f"valuation {valuation(x)} below -{s}")
    return (x.num * p ** (s - kd) * pow(ud, -1, mod)) % mod if mod > 1 else 0


@dataclass(frozen=True)
class PhaseClass:
    """Element numer/p**expo of Q_p/Z_p in canonical form.

    Either the trivial class (0, 0) or p does not divide numer and expo >= 1.
    """

    numer: int
    expo: int
    p: int

    def __post_init__(self):
        numer, expo = self.numer, self.expo
        if expo < 0:
            raise ValueError("negative exponent")
        numer %= self.p ** expo
        while expo > 0 and numer % self.p == 0:
            numer //= self.p
            expo -= 1
        if expo == 0:
            numer = 0
        object.__setattr__(self, "numer", numer)
        object.__setattr__(self, "expo", expo)

    @classmethod
    def trivial(cls, p: int) -> "PhaseClass":
        return cls(0, 0, p)

    @classmethod
    def from_residue(cls, r: int, s: int, p: int) -> "PhaseClass":
        """Class of r / p**s."""
        return cls(r, s, p)

    def is_trivial(self) -> bool:
        return self.expo == 0

    def norm(self) -> int:
        """|lambda|_p of the canonical representative (1 when trivial)."""
        return self.p ** self.expo

    def residue(self, s: int) -> int:
        """Numerator over p**s (requires s >= expo)."""
        if s < self.expo:
            raise ValueError(f"class {self} needs scale >= {self.expo}")
        return self.numer * self.p ** (s - self.expo)

    def as_scalar(self) -> PAdicScalar:
        return PAdicScalar(self.numer, self.p ** self.expo, self.p)

    def __add__(self, other: "PhaseClass") -> "PhaseClass":
        s = max(self.expo, other.expo)
        return PhaseClass(self.residue(s) + other.residue(s), s, self.p)

    def __neg__(self) -> "PhaseClass":
        return PhaseClass(-self.numer, self.expo, self.p)

    def __sub__(self, other: "PhaseClass") -> "PhaseClass":
        return self + (-other)

    def scale(self, u) -> "PhaseClass":
        """Multiply by an element of Z_p (int, Fraction or integral scalar)."""
        u = PAdicScalar.of(u, self.p)
        if valuation(u) < 0:
            raise ValueError("can only scale a class by a p-adic integer")
        if self.expo == 0:
            return self
        return PhaseClass(self.numer * _unit_residue(u, self.expo), self.expo, self.p)

    def __str__(self):
        if self.expo == 0:
            return "0"
        return f"{self.numer}/{self.p}^{self.expo}"

    def to_json(self) -> dict:
        return {"numer": str(self.numer), "expo": self.expo}

    @classmethod
    def from_json(cls, data: dict, p: int) -> "PhaseClass":
        return cls(int(data["numer"]), int(data["expo"]), p)


def _unit_residue(u: PAdicScalar, s: int) -> int:
    """u mod p**s for u in Z_p."""
    mod = u.p ** s
    return (u.num * pow(u.den, -1, mod)) % mod


def fractional_part(x: PAdicScalar) -> PhaseClass:
    """{x}_p as a canonical class."""
    v = valuation(x)
    if v >= 0:
        return PhaseClass.trivial(x.p)
    s = -v
    return PhaseClass(residue(x, s), s, x.p)


def phase_value(c: PhaseClass) -> complex:
    """exp(2 pi i numer / p**expo)."""
    if c.expo == 0:
        return 1 + 0j
    return cmath.exp(2j * math.pi * c.numer / c.p ** c.expo)


def legendre_symbol(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def leading_digit(a: PAdicScalar) -> int:
    """First non-zero digit a_0 of the p-adic expansion of a != 0."""
    if a.num == 0:
        raise ValueError("zero has no leading digit")
    p = a.p
    _, un = _split_p(a.num, p)
    _, ud = _split_p(a.den, p)
    return (un * pow(ud, -1, p)) % p


def lambda_p(a: PAdicScalar) -> complex:
    """Fourth-root-of-unity factor of the p-adic Gaussian integral."""
    if a.num == 0:
        raise ValueError("lambda_p is undefined at 0")
    v = valuation(a)
    if v % 2 == 0:
        return 1 + 0j
    leg = legendre_symbol(leading_digit(a), a.p)
    if a.p % 4 == 1:
        return complex(leg, 0)
    return complex(0, leg)
