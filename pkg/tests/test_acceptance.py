"""Acceptance criteria 1-9, one test each, one PASS/FAIL line each.

Every test computes all of its sub-checks before asserting, so the printed
line carries the full picture even when the criterion fails.
"""

import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from engel.cli import gauss_sweep, ortho_stats, plancherel_stats, rep_stats
from engel.dual import DualPoint, census, enumerate_dual
from engel.gaussian import char_integral_result, gaussian_integral, gaussian_integral_bruteforce
from engel.group import quotient
from engel.operators import sub_laplacian_matrix, symbol_closed_form
from engel.padic import PhaseClass
from engel.spectral import (
    closed_form_spectrum,
    closed_form_values,
    compare_spectra,
    ellipticity_report,
    merge,
    oracle_spectrum,
    sector_spectrum,
    spectral_gap,
    verify_spectrum,
)

ALPHAS = (0.5, 1.0, 2.0)


def report(k: int, ok: bool, detail: str, capsys):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


@lru_cache(maxsize=None)
def dense_oracle(p, alpha):
    return oracle_spectrum(p, 1, alpha)


def test_criterion_1_peter_weyl(capsys):
    t = time.perf_counter()
    bad = []
    for p in (5, 7):
        for n in (1, 2, 3):
            c = census(p, n)
            if not (c["pass"] and c["sum_d2"] == p ** (4 * n)):
                bad.append((p, n, c["sum_d2"]))
        c1 = {(r["case_tag"], r["dim"]): r["count"] for r in census(p, 1)["by_case"]}
        want = {("abelian", 1): p * p, ("heisenberg", p): p - 1, ("big_xi4", p): p * (p - 1)}
        if c1 != want:
            bad.append((p, "level-1 breakdown", c1))
    dt = time.perf_counter() - t
    ok = not bad and dt < 10
    report(1, ok, f"sum d^2 = p^(4n) for p in (5,7), n<=3; level-1 breakdown; {dt:.1f}s; failures={bad}", capsys)


def test_criterion_2_representations(capsys):
    t = time.perf_counter()
    s = rep_stats(5, 2, 100, seed=0)
    dt = time.perf_counter() - t
    ok = s["homomorphism_error"] <= 1e-12 and s["unitarity_error"] <= 1e-12 and dt < 120
    report(
        2,
        ok,
        f"p=5 level<=2, 100 pairs: hom err {s['homomorphism_error']:.2e}, unitarity err {s['unitarity_error']:.2e}, {dt:.1f}s",
        capsys,
    )


def test_criterion_3_orthogonality(capsys):
    t = time.perf_counter()
    full = ortho_stats(5, 1, 200, seed=0)
    samp = ortho_stats(5, 2, 200, seed=0)
    dt = time.perf_counter() - t
    errs = [full["max_norm_error"], full["max_cross"], samp["max_norm_error"], samp["max_cross"]]
    ok = full["mode"] == "full" and max(errs) <= 1e-12 and dt < 300
    report(3, ok, f"n=1 full ({full['classes']} classes), n=2 {samp['mode']}: max err {max(errs):.2e}, {dt:.1f}s", capsys)


def _mass_identity_failures(p, level):
    bad = 0
    for e3 in range(level + 1):
        for e4 in range(level + 1):
            for a3 in range(p ** e3) if e3 else [0]:
                if e3 and a3 % p == 0:
                    continue
                for a4 in range(p ** e4) if e4 else [0]:
                    if e4 and a4 % p == 0:
                        continue
                    x3, x4 = PhaseClass(a3, e3, p), PhaseClass(a4, e4, p)
                    q = p ** max(e3, e4)
                    total = sum(char_integral_result(x3, x4, i, j).abs2 for i in range(q) for j in range(q))
                    bad += total / q ** 2 != Fraction(1, max(x3.norm(), x4.norm()))
    return bad


def test_criterion_4_gaussian(capsys):
    t = time.perf_counter()
    worst, cases = 0.0, 0
    for p in (5, 7):
        for a, b, g in gauss_sweep(p):
            worst = max(worst, abs(gaussian_integral(a, b, g).value - gaussian_integral_bruteforce(a, b, g)))
            cases += 1
    mass_bad = _mass_identity_failures(5, 2)
    dt = time.perf_counter() - t
    ok = worst <= 1e-12 and mass_bad == 0 and dt < 60
    report(4, ok, f"{cases} sweep cases max err {worst:.2e}; L2 mass identity failures (p=5, level<=2) {mass_bad}; {dt:.1f}s", capsys)


@pytest.mark.slow
def test_criterion_5_spectrum(capsys):
    notes = []
    ok = True
    t = time.perf_counter()
    for p in (5, 7):
        for alpha in ALPHAS:
            oracle = dense_oracle(p, alpha)
            rep = compare_spectra(closed_form_spectrum(p, 1, alpha), oracle.values, 1e-9)
            good = rep.pass_ and rep.total_oracle == p ** 4
            ok &= good
            if not good:
                notes.append(f"n=1 p={p} a={alpha}: max pairing err {rep.max_pairing_error:.3g}")
    t1 = time.perf_counter() - t
    ok &= t1 < 60

    xi = DualPoint.of((0, 0, 1, 0), (0, 0, 1, 0), 5)
    sec = sector_spectrum(sub_laplacian_matrix(1.0, 1, 5), xi)
    worked = merge(sec.values)
    want = [(0.0, 1), (25 / 6, 8), (25 / 3, 16)]
    wgood = len(worked) == 3 and all(m == wm and abs(v - wv) <= 1e-9 for (v, m), (wv, wm) in zip(worked, want))
    ok &= wgood
    if not wgood:
        notes.append("worked instance got " + ", ".join(f"{v:.6g}x{m}" for v, m in worked))

    t = time.perf_counter()
    lvl2 = oracle_spectrum(5, 2, 1.0, only_level=2, spot_every=50)
    pts = [x for x in enumerate_dual(5, 2) if x.level == 2]
    closed = np.concatenate([closed_form_values(x, 1.0) for x in pts])
    bad = 0
    for s in lvl2.sectors:
        bad += not compare_spectra(closed_form_values(s.xi, 1.0), s.values, 1e-9).pass_
    t2 = time.perf_counter() - t
    rep2 = compare_spectra(closed, lvl2.values, 1e-9)
    good2 = bad == 0 and rep2.pass_ and t2 < 900
    ok &= good2
    if not good2:
        notes.append(f"n=2 p=5 a=1: {bad}/{len(pts)} level-2 sectors disagree (leakage {lvl2.max_leakage:.1e})")
    report(5, ok, f"n=1 {t1:.1f}s, n=2 {t2:.1f}s; " + ("; ".join(notes) or "all match"), capsys)


def test_criterion_6_operator_sanity(capsys):
    T = sub_laplacian_matrix(1.0, 1, 5)
    A = T.dense()
    herm = float(np.abs(A - A.conj().T).max())
    const = float(np.abs(T.apply(np.ones(T.size))).max())
    Q = quotient(5, 1)
    comm = 0.0
    for z in Q.coords:
        s = Q.left_translation(z)
        comm = max(comm, float(np.abs(A[np.ix_(s, s)] - A).max()))
    ok = herm <= 1e-12 and const == 0 and comm <= 1e-12
    report(6, ok, f"hermitian err {herm:.1e}, constants -> {const:.1e}, {Q.size} left translations max err {comm:.1e}", capsys)


def test_criterion_7_plancherel(capsys):
    worst = {}
    for n in (1, 2):
        s = plancherel_stats(5, n, 20, seed=n)
        worst[n] = max(s["inversion_error"], s["plancherel_error"])
    ok = max(worst.values()) <= 1e-10
    report(7, ok, f"p=5 inversion/plancherel max err n=1 {worst[1]:.1e}, n=2 {worst[2]:.1e}", capsys)


def test_criterion_8_gap_and_exponent(capsys):
    rows = []
    ok = True
    for p in (5, 7):
        for alpha in ALPHAS:
            g1 = spectral_gap(dense_oracle(p, alpha).values)
            rep = ellipticity_report(p, 2, alpha)
            fit = rep["exponent_fit"]
            good = g1 > 0 and rep["gap"] > 0 and abs(fit - alpha) <= 0.1
            ok &= good
            rows.append(f"p={p} a={alpha}: gap n1 {g1:.4g} n2 {rep['gap']:.4g} fit {fit:.3f}")
    # the level-2 symbols used above against the operator itself (sampled sectors)
    T = sub_laplacian_matrix(1.0, 2, 5)
    pts = [x for x in enumerate_dual(5, 2) if x.level == 2][::97]
    err = 0.0
    for x in pts:
        s = sector_spectrum(T, x)
        want = np.repeat(np.linalg.eigvalsh(symbol_closed_form(x, 1.0)), x.dim)
        err = max(err, float(np.abs(np.sort(s.values) - want).max()))
    ok &= err <= 1e-8
    report(8, ok, "; ".join(rows) + f"; symbol vs operator (p=5 n=2, {len(pts)} sectors) err {err:.1e}", capsys)


def test_criterion_9_discrepancy_ledger(capsys):
    rep = verify_spectrum(5, 1, 1.0)
    lines = rep["literal_vs_piecewise"]
    listed = len(lines) > 0 and all({"xi1", "hprime", "tau", "value", "literal_value"} <= set(r) for r in lines)
    orient = rep["orientation"]["passing"]
    matches = [k for k, v in rep["readings"].items() if v["pass"]]
    ok = listed and bool(orient) and bool(matches)
    detail = (
        f"{len(lines)} literal/piecewise discrepancies listed; orientation passing {orient}; "
        f"oracle matches readings {matches or 'none'}; closed form realised by {rep.get('closed_form_realized_by')}"
    )
    report(9, ok, detail, capsys)
