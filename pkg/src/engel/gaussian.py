"""p-adic Gaussian integrals over p^gamma Z_p and their Riemann-sum oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .padic import (
    INF,
    PAdicScalar,
    PhaseClass,
    fractional_part,
    lambda_p,
    phase_value,
    residue,
    valuation,
)

BRANCHES = ("flat", "oscillatory", "zero")


@dataclass(frozen=True)
class GaussianResult:
    """Value of the integral plus which branch produced it.

    ``abs2`` is the exact squared modulus, useful for identities that should
    hold in rational arithmetic.
    """

    value: complex
    branch: str
    abs2: Fraction

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")


def gaussian_integral(a: PAdicScalar, b: PAdicScalar, gamma: int) -> GaussianResult:
    """Integral of exp(2 pi i {a u^2 + b u}) over u in p^gamma Z_p."""
    p = a.p
    b = PAdicScalar.of(b, p)
    va, vb = valuation(a), valuation(b)
    if va == INF or va >= -2 * gamma:
        # |a u^2| <= 1 on the domain, so only the linear character matters
        if vb >= -gamma:
            return GaussianResult(complex(Fraction(p) ** (-gamma)), "flat", Fraction(p) ** (-2 * gamma))
        return GaussianResult(0j, "zero", Fraction(0))
    # |b / a| <= p^-gamma
    if vb != INF and vb - va < gamma:
        return GaussianResult(0j, "zero", Fraction(0))
    mod = Fraction(p) ** va  # |a|^{-1}
    amp = math.sqrt(mod)
    ph = phase_value(fractional_part(-(b * b) / (4 * a)))
    return GaussianResult(lambda_p(a) * amp * ph, "oscillatory", mod)


def local_constancy_index(a: PAdicScalar, b: PAdicScalar, gamma: int) -> int:
    """Smallest D >= gamma with the integrand constant on p^D-cosets of p^gamma Z_p."""
    va, vb = valuation(a), valuation(b)
    need = [gamma]
    if va != INF:
        need += [-va - gamma, -((va) // 2)]  # -floor(va/2) == ceil(-va/2)
    if vb != INF:
        need.append(-vb)
    return int(max(need))


def gaussian_integral_bruteforce(a: PAdicScalar, b: PAdicScalar, gamma: int, depth: int | None = None) -> complex:
    """Exact Riemann sum over the cosets of p^depth Z_p inside p^gamma Z_p.

    Each coset has Haar measure p^-depth.  ``depth`` defaults to one more than
    the local-constancy index; smaller values are rejected.
    """
    p = a.p
    b = PAdicScalar.of(b, p)
    dmin = local_constancy_index(a, b, gamma)
    if depth is None:
        depth = dmin + 1
    if depth < dmin:
        raise ValueError(f"depth {depth} too small, need >= {dmin}")
    # u = p^gamma j with j running over Z / p^(depth - gamma)
    scale = PAdicScalar.of(Fraction(p) ** gamma, p)
    a2 = a * scale * scale
    b2 = b * scale
    s = max(0, -min(valuation(a2), 0), -min(valuation(b2), 0))
    ps = p ** s
    ra = residue(a2, s) if s else 0
    rb = residue(b2, s) if s else 0
    j = np.arange(p ** (depth - gamma), dtype=np.int64) % max(ps, 1)
    if ps > 1:
        k = (ra * ((j * j) % ps) + rb * j) % ps
        roots = np.exp(2j * np.pi * np.arange(ps) / ps)
        total = roots[k].sum()
    else:
        total = complex(j.size)
    return complex(total) * float(Fraction(p) ** (-depth))


def char_integral(xi3: PhaseClass, xi4: PhaseClass, x2, x3) -> complex:
    """Integral over Z_p of exp(2 pi i {(xi3 x2 + xi4 x3) u + xi4 x2 u^2 / 2})."""
    return char_integral_result(xi3, xi4, x2, x3).value


def char_integral_result(xi3: PhaseClass, xi4: PhaseClass, x2, x3) -> GaussianResult:
    p = xi3.p
    x2 = PAdicScalar.of(x2, p)
    x3 = PAdicScalar.of(x3, p)
    s3, s4 = xi3.as_scalar(), xi4.as_scalar()
    a = s4 * x2 / 2
    b = s3 * x2 + s4 * x3
    return gaussian_integral(a, b, 0)


def char_integral_table(xi3: PhaseClass, xi4: PhaseClass, s: int) -> np.ndarray:
    """char_integral at (x2, x3) = (i, j) for 0 <= i, j < p**s."""
    p = xi3.p
    q = p ** s
    out = np.empty((q, q), dtype=np.complex128)
    for i in range(q):
        for j in range(q):
            out[i, j] = char_integral(xi3, xi4, i, j)
    return out

