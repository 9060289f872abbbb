"""Closed-form spectrum of the sub-Laplacian, independent oracles, and reports.

The closed form assigns to every (xi, h', tau) the value

    term(xi1 + tau) + term(Q(xi, h')),   Q(xi, h') = xi2 + xi3 h' + xi4 h'^2 / 2

with tau running over the classes of norm <= d_xi.  The oracles diagonalise
the operator itself: densely at small levels, and sector by sector (one row
or column of pi_xi at a time) beyond that.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dual import DualPoint, coefficient_vector, enumerate_dual, orientation_check, phase_exponent
from .group import quotient
from .operators import (
    OperatorMatrix,
    const_C,
    q_argument,
    restrict_span,
    sub_laplacian_matrix,
    symbol_closed_form,
    term,
    term_literal,
)
from .padic import CapacityError, PhaseClass, budget_dim, budget_quotient

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class SpectralLine:
    xi: DualPoint
    hprime: int
    tau: PhaseClass
    value: float
    descriptor: tuple[int, int]  # exponents of the two term arguments, 0 = zero term
    multiplicity: int = 1

    def literal_value(self, alpha: float) -> float:
        p = self.xi.p
        return sum(p ** (e * alpha) - const_C(p, alpha) for e in self.descriptor)

    def to_row(self) -> dict:
        xi = self.xi
        return {
            "case_tag": xi.case_tag,
            "xi1": str(xi.xi1),
            "xi2": str(xi.xi2),
            "xi3": str(xi.xi3),
            "xi4": str(xi.xi4),
            "hprime": self.hprime,
            "tau": str(self.tau),
            "e1": self.descriptor[0],
            "e2": self.descriptor[1],
            "value": self.value,
            "multiplicity": self.multiplicity,
        }


def tau_classes(xi: DualPoint) -> list[PhaseClass]:
    return [PhaseClass(a, xi.k, xi.p) for a in range(xi.dim)]


def closed_form_lines(xi: DualPoint, alpha: float) -> list[SpectralLine]:
    out = []
    for h in range(xi.dim):
        qa = q_argument(xi, h)
        t2 = term(qa, alpha)
        for tau in tau_classes(xi):
            a1 = xi.xi1 + tau
            out.append(SpectralLine(xi, h, tau, term(a1, alpha) + t2, (a1.expo, qa.expo)))
    return out


def closed_form_values(xi: DualPoint, alpha: float, literal: bool = False) -> np.ndarray:
    """All d^2 closed-form values of one sector (fast path for aggregation)."""
    f = term_literal if literal else term
    a = np.array([f(xi.xi1 + tau, alpha) for tau in tau_classes(xi)])
    b = np.array([f(q_argument(xi, h), alpha) for h in range(xi.dim)])
    return (b[:, None] + a[None, :]).ravel()


def closed_form_spectrum(p: int, n: int, alpha: float, literal: bool = False) -> np.ndarray:
    return np.sort(np.concatenate([closed_form_values(xi, alpha, literal) for xi in enumerate_dual(p, n)]))


def merge(values, tol: float = MERGE_TOL) -> list[tuple[float, int]]:
    """Sort and merge values closer than tol into (value, multiplicity) clusters."""
    v = np.sort(np.asarray(values, dtype=float))
    out: list[tuple[float, int]] = []
    start = 0
    for i in range(1, v.size + 1):
        if i == v.size or v[i] - v[i - 1] > tol:
            out.append((float(v[start:i].mean()), i - start))
            start = i
    return out


def expand(multiset) -> np.ndarray:
    """Flat sorted values from (value, multiplicity) pairs or from plain values."""
    items = list(multiset)
    if not items:
        return np.zeros(0)
    if np.ndim(items[0]) == 0:
        return np.sort(np.asarray(items, dtype=float))
    return np.sort(np.concatenate([np.full(m, v) for v, m in items]))


def eigenfunction_vector(xi: DualPoint, hprime: int, tau: PhaseClass, n: int) -> np.ndarray:
    """exp(2 pi i {xi.x + tau x1 + (xi3 x2 + xi4 x3) h' + xi4 x2 h'^2 / 2}) on G/G_n."""
    if xi.level > n or tau.expo > n:
        raise ValueError("parameters are finer than the level")
    Q = quotient(xi.p, n)
    e = phase_exponent(xi, Q.coords, hprime, n) + tau.residue(n) * Q.coords[:, 0]
    return np.exp(2j * np.pi * (e % Q.q) / Q.q)


# --- oracles ---------------------------------------------------------------


def dense_spectrum(T: OperatorMatrix) -> np.ndarray:
    A = T.dense()
    return np.linalg.eigvalsh((A + A.conj().T) / 2)


@dataclass
class SectorResult:
    xi: DualPoint
    values: np.ndarray  # with multiplicities
    span: str
    leakage: float
    spans_tested: dict = field(default_factory=dict)


def _full_span_restriction(T: OperatorMatrix, xi: DualPoint):
    Q = quotient(T.p, T.n)
    if Q.size > budget_dim():
        raise CapacityError("full-sector restriction needs the dense operator")
    d = xi.dim
    B = np.stack([coefficient_vector(xi, r, c, T.n) for r in range(d) for c in range(d)], axis=1)
    TB = T.sparse @ B
    G = B.conj().T @ B
    R = np.linalg.solve(G, B.conj().T @ TB)
    resid = np.linalg.norm(TB - B @ R) / max(np.linalg.norm(TB), 1e-300)
    return R, float(resid)


def sector_spectrum(T: OperatorMatrix, xi: DualPoint, tol: float = MERGE_TOL, spot_row: int | None = None) -> SectorResult:
    """Eigenvalues of T on the xi-isotypic block, with invariant-span detection.

    Tries the row span, then the column span of pi_xi; falls back to the
    whole block, which every left- or right-invariant operator preserves.
    """
    d = xi.dim
    tested = {}
    for span in ("row", "column"):
        S, leak = restrict_span(T, xi, span, 0)
        tested[span] = leak
        if leak <= tol:
            if spot_row is not None and d > 1:
                S2, leak2 = restrict_span(T, xi, span, spot_row % d)
                tested[f"{span}_spot"] = max(leak2, float(np.abs(S2 - S).max()))
            vals = np.linalg.eigvalsh((S + S.conj().T) / 2)
            return SectorResult(xi, np.repeat(vals, d), span, leak, tested)
    R, leak = _full_span_restriction(T, xi)
    tested["full"] = leak
    vals = np.sort(np.linalg.eigvals(R).real)
    return SectorResult(xi, vals, "full", leak, tested)


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


@dataclass
class OracleResult:
    values: np.ndarray
    method: str
    sectors: list = field(default_factory=list)
    max_leakage: float = 0.0

    @property
    def multiset(self):
        return merge(self.values)


def oracle_spectrum(
    p: int,
    n: int,
    alpha: float,
    translation: str = "right",
    jobs: int = 1,
    only_level: int | None = None,
    spot_every: int = 0,
) -> OracleResult:
    """Spectrum of the sub-Laplacian computed from the operator itself.

    Dense diagonalisation when p^(4n) fits ENGEL_BUDGET_DIM, otherwise a
    per-sector restriction (bounded by ENGEL_BUDGET_QUOTIENT).  With
    ``only_level`` set, only sectors of exactly that level are computed.
    """
    T = sub_laplacian_matrix(alpha, n, p, translation)
    N = T.size
    if N <= budget_dim() and only_level is None:
        return OracleResult(dense_spectrum(T), "dense")
    if N > budget_quotient():
        raise CapacityError(f"quotient size {N} exceeds ENGEL_BUDGET_QUOTIENT={budget_quotient()}")
    pts = [xi for xi in enumerate_dual(p, n) if only_level is None or xi.level == only_level]

    def one(ix):
        i, xi = ix
        spot = 1 if spot_every and i % spot_every == 0 else None
        return sector_spectrum(T, xi, spot_row=spot)

    secs = _pmap(one, list(enumerate(pts)), jobs)
    vals = np.sort(np.concatenate([s.values for s in secs])) if secs else np.zeros(0)
    leak = max((max(v for k, v in s.spans_tested.items() if k.startswith(s.span)) for s in secs), default=0.0)
    return OracleResult(vals, "sector", secs, leak)


def symbol_spectrum(p: int, n: int, alpha: float, only_level: int | None = None) -> np.ndarray:
    """Spectrum assembled from the d x d symbols (each eigenvalue times d)."""
    out = []
    for xi in enumerate_dual(p, n):
        if only_level is not None and xi.level != only_level:
            continue
        S = symbol_closed_form(xi, alpha)
        out.append(np.repeat(np.linalg.eigvalsh((S + S.conj().T) / 2), xi.dim))
    return np.sort(np.concatenate(out))


# --- comparison ------------------------------------------------------------


@dataclass
class SpectrumReport:
    closed_form: list
    oracle: list
    max_pairing_error: float
    pass_: bool
    gap: float
    closed_form_gap: float
    total_closed: int
    total_oracle: int
    first_mismatch: dict | None = None

    def to_json(self) -> dict:
        return {
            "pass": self.pass_,
            "max_pairing_error": self.max_pairing_error,
            "gap": self.gap,
            "closed_form_gap": self.closed_form_gap,
            "total_multiplicity": {"closed_form": self.total_closed, "oracle": self.total_oracle},
            "first_mismatch": self.first_mismatch,
            "closed_form": [[v, m] for v, m in self.closed_form],
            "oracle": [[v, m] for v, m in self.oracle],
        }


def spectral_gap(values) -> float:
    """Smallest |value| once the single constant mode is removed."""
    v = np.sort(np.abs(expand(values)))
    return float(v[1]) if v.size > 1 else math.inf


def compare_spectra(closed, oracle, tol: float = 1e-9) -> SpectrumReport:
    """Greedy sorted pairing of two multisets (clusters merged at 1e-9 first)."""
    cm = merge(expand(closed))
    om = merge(expand(oracle))
    a, b = expand(cm), expand(om)
    tc, to = int(a.size), int(b.size)
    m = min(tc, to)
    diff = np.abs(a[:m] - b[:m])
    err = float(diff.max()) if m else 0.0
    ok = tc == to and err <= tol
    mismatch = None
    if not ok:
        if m and err > tol:
            i = int(np.argmax(diff > tol))
            mismatch = {"rank": i, "closed_form": float(a[i]), "oracle": float(b[i]), "error": float(diff[i])}
        else:
            mismatch = {"rank": m, "reason": "multiplicity totals differ"}
    return SpectrumReport(cm, om, err, ok, spectral_gap(b), spectral_gap(a), tc, to, mismatch)


# --- sub-ellipticity ---------------------------------------------------------


def _loglog_slope(x, y) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if len(set(lx.tolist())) < 2:
        return math.nan
    return float(np.polyfit(lx, ly, 1)[0])


def ellipticity_report(p: int, n: int, alpha: float) -> dict:
    """Symbol norms per sector and the sub-elliptic sandwich constants.

    The growth exponent is fitted on the per-shell maximum of the operator
    norm.  ``exponent_fit`` uses the norm shifted by 2C (each of the two
    directional pieces shifted to its positive form, whose character
    eigenvalues are exactly |lam|^alpha); ``exponent_fit_raw`` uses the bare
    norm and is dominated by that constant at small shells.
    """
    C = const_C(p, alpha)
    rows = []
    for xi in enumerate_dual(p, n):
        if xi.level == 0:
            continue
        S = symbol_closed_form(xi, alpha)
        ev = np.linalg.eigvalsh((S + S.conj().T) / 2)
        op, inf = float(np.abs(ev).max()), float(np.abs(ev).min())
        norm = p ** xi.level
        low = xi.xi1.norm() ** alpha + xi.xi2.norm() ** alpha
        rows.append(
            {
                "xi": str(xi),
                "case_tag": xi.case_tag,
                "dim": xi.dim,
                "norm": norm,
                "op": op,
                "inf": inf,
                "lower_ratio": inf / low,
                "upper_ratio": op / norm ** alpha,
            }
        )
    shells = sorted({r["norm"] for r in rows})
    top = [max(r["op"] for r in rows if r["norm"] == s) for s in shells]
    return {
        "p": p,
        "level": n,
        "alpha": alpha,
        "rows": rows,
        "lower_constant": min(r["lower_ratio"] for r in rows) if rows else math.nan,
        "upper_constant": max(r["upper_ratio"] for r in rows) if rows else math.nan,
        "shells": shells,
        "shell_max_op": top,
        "exponent_fit": _loglog_slope(shells, [t + 2 * C for t in top]),
        "exponent_fit_raw": _loglog_slope(shells, top),
        "gap": min(r["inf"] for r in rows) if rows else math.inf,
    }


# --- discrepancy report ----------------------------------------------------


def literal_discrepancies(p: int, n: int, alpha: float) -> list[dict]:
    """Lines whose literal value (no special case at trivial arguments) differs."""
    out = []
    for xi in enumerate_dual(p, n):
        for line in closed_form_lines(xi, alpha):
            lit = line.literal_value(alpha)
            if abs(lit - line.value) > MERGE_TOL:
                row = line.to_row()
                row["literal_value"] = lit
                out.append(row)
    return out


def line_residuals(p: int, alpha: float, n: int = 1, translation: str = "right", tol: float = 1e-9) -> dict:
    """|A e - lambda e| / |e| for every closed-form line (dense levels only)."""
    T = sub_laplacian_matrix(alpha, n, p, translation)
    A = T.dense()
    flagged = 0
    worst = 0.0
    by_case: dict = {}
    for xi in enumerate_dual(p, n):
        for line in closed_form_lines(xi, alpha):
            v = eigenfunction_vector(xi, line.hprime, line.tau, n)
            r = float(np.linalg.norm(A @ v - line.value * v) / np.linalg.norm(v))
            worst = max(worst, r)
            bad = r > tol
            flagged += bad
            c = by_case.setdefault(xi.case_tag, {"lines": 0, "flagged": 0, "max_residual": 0.0})
            c["lines"] += 1
            c["flagged"] += int(bad)
            c["max_residual"] = max(c["max_residual"], r)
    return {"translation": translation, "flagged": flagged, "max_residual": worst, "by_case": by_case}


def span_census(p: int, alpha: float, n: int = 1, translation: str = "right") -> dict:
    """Which span of each sector the operator preserves, counted per case."""
    T = sub_laplacian_matrix(alpha, n, p, translation)
    out: dict = {}
    for xi in enumerate_dual(p, n):
        if xi.dim == 1:
            continue
        s = sector_spectrum(T, xi)
        c = out.setdefault(xi.case_tag, {})
        c[s.span] = c.get(s.span, 0) + 1
    return out


def verify_spectrum(p: int, n: int, alpha: float, translation: str = "right", tol: float = 1e-9, jobs: int = 1) -> dict:
    """Closed form against the oracle, with every discrepancy spelled out."""
    oracle = oracle_spectrum(p, n, alpha, translation, jobs=jobs)
    piece = closed_form_spectrum(p, n, alpha)
    lit = closed_form_spectrum(p, n, alpha, literal=True)
    rep_piece = compare_spectra(piece, oracle.values, tol)
    rep_lit = compare_spectra(lit, oracle.values, tol)
    orient = orientation_check(p, 1)
    passing = [k for k, v in orient.items() if v["pass"]]
    report = {
        "p": p,
        "level": n,
        "alpha": alpha,
        "translation": translation,
        "tol": tol,
        "oracle_method": oracle.method,
        "pass": rep_piece.pass_ or rep_lit.pass_,
        "max_pairing_error": rep_piece.max_pairing_error,
        "gap": rep_piece.gap,
        "closed_form_gap": rep_piece.closed_form_gap,
        "readings": {
            "piecewise": _short(rep_piece),
            "literal": _short(rep_lit),
        },
        "literal_vs_piecewise": literal_discrepancies(p, n, alpha),
        "orientation": {"candidates": orient, "passing": passing},
        "oracle_spectrum": [[v, m] for v, m in rep_piece.oracle],
        "closed_form_spectrum": [[v, m] for v, m in rep_piece.closed_form],
    }
    if n == 1 and quotient(p, n).size <= budget_dim():
        realized = {}
        for conv in ("right", "left", "mixed"):
            vals = dense_spectrum(sub_laplacian_matrix(alpha, n, p, conv))
            r = compare_spectra(piece, vals, tol)
            realized[conv] = {"matches_closed_form": r.pass_, "max_pairing_error": r.max_pairing_error}
        report["closed_form_realized_by"] = [c for c, v in realized.items() if v["matches_closed_form"]]
        report["conventions"] = realized
        report["line_residuals"] = line_residuals(p, alpha, n, translation, tol)
        report["invariant_spans"] = span_census(p, alpha, n, translation)
    return report


def _short(rep: SpectrumReport) -> dict:
    return {
        "pass": rep.pass_,
        "max_pairing_error": rep.max_pairing_error,
        "first_mismatch": rep.first_mismatch,
        "total_multiplicity": {"closed_form": rep.total_closed, "oracle": rep.total_oracle},
        "closed_form_gap": rep.closed_form_gap,
    }
