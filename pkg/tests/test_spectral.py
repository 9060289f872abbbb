import numpy as np
import pytest
from hypothesis import given, strategies as st

from engel.dual import DualPoint, enumerate_dual
from engel.operators import sub_laplacian_matrix, symbol_closed_form
from engel.padic import CapacityError, PhaseClass
from engel.spectral import (
    closed_form_lines,
    closed_form_spectrum,
    closed_form_values,
    compare_spectra,
    dense_spectrum,
    eigenfunction_vector,
    ellipticity_report,
    expand,
    literal_discrepancies,
    merge,
    oracle_spectrum,
    sector_spectrum,
    spectral_gap,
    symbol_spectrum,
    verify_spectrum,
)

P = 5

# frozen from dense diagonalisation of the 625 x 625 operator (p=5, level 1)
GAPS = {0.5: 0.49893615337556, 1.0: 1.5314352831930, 2.0: 8.8922048701529}


def test_closed_form_examples():
    xi = DualPoint.of((1, 2, 0, 0), (1, 1, 0, 0), P)
    assert closed_form_values(xi, 1.0).tolist() == pytest.approx([25 / 3])
    xi = DualPoint.of((0, 0, 1, 0), (0, 0, 1, 0), P)
    lines = closed_form_lines(xi, 1.0)
    assert len(lines) == 25
    zero = [ln for ln in lines if ln.value == 0]
    assert len(zero) == 1 and zero[0].hprime == 0 and zero[0].tau.numer == 0
    assert sorted({round(v, 9) for v in closed_form_values(xi, 1.0)}) == [0, round(25 / 6, 9), round(25 / 3, 9)]


def test_closed_form_total_multiplicity():
    for n, total in ((1, 625), (2, 390625)):
        assert closed_form_spectrum(P, n, 1.0).size == total


def test_literal_reading_differs_only_at_zero_terms():
    rows = literal_discrepancies(P, 1, 1.0)
    assert len(rows) == 225
    assert all(r["e1"] == 0 or r["e2"] == 0 for r in rows)


def test_merge_and_expand():
    m = merge([1.0, 1.0 + 1e-12, 2.0, 0.5])
    assert [c for _, c in m] == [1, 2, 1]
    assert expand(m).tolist() == pytest.approx([0.5, 1.0, 1.0, 2.0])
    assert spectral_gap([0.0, 3.0, 2.0]) == 2.0


def test_compare_locates_perturbation():
    vals = closed_form_spectrum(P, 1, 1.0)
    assert compare_spectra(vals, vals.copy()).pass_
    bad = vals.copy()
    bad[-1] += 1e-6
    rep = compare_spectra(vals, bad)
    assert not rep.pass_
    assert rep.first_mismatch["rank"] == vals.size - 1
    assert rep.first_mismatch["error"] == pytest.approx(1e-6, rel=1e-3)
    rep = compare_spectra(vals, vals[:-1])
    assert not rep.pass_ and rep.first_mismatch["reason"] == "multiplicity totals differ"


def test_eigenfunctions_orthonormal():
    vecs = []
    for xi in enumerate_dual(P, 1):
        for ln in closed_form_lines(xi, 1.0):
            vecs.append(eigenfunction_vector(xi, ln.hprime, ln.tau, 1))
    V = np.stack(vecs, axis=1) / np.sqrt(P ** 4)
    assert V.shape == (625, 625)
    assert np.abs(V.conj().T @ V - np.eye(625)).max() < 1e-10


def test_eigenfunction_rejects_fine_parameters():
    xi = DualPoint.of((0, 0, 1, 0), (0, 0, 2, 0), P)
    with pytest.raises(ValueError):
        eigenfunction_vector(xi, 0, PhaseClass.trivial(P), 1)


@pytest.mark.parametrize("alpha", sorted(GAPS))
def test_frozen_gap(alpha):
    vals = dense_spectrum(sub_laplacian_matrix(alpha, 1, P))
    assert abs(vals).min() < 1e-10
    assert spectral_gap(vals) == pytest.approx(GAPS[alpha], abs=1e-9)


def test_frozen_sector_values():
    T = sub_laplacian_matrix(1.0, 1, P)
    s = sector_spectrum(T, DualPoint.of((0, 0, 1, 0), (0, 0, 1, 0), P))
    assert s.span == "row"
    want = np.repeat([25 / 6 * (1 - 5 ** -0.5), 25 / 6 * (1 + 5 ** -0.5), 25 / 3, 25 / 3, 25 / 3], 5)
    assert np.abs(np.sort(s.values) - want).max() < 1e-10
    s = sector_spectrum(T, DualPoint.of((0, 1, 0, 1), (0, 1, 0, 1), P))
    want = np.repeat([25 / 6, 25 / 3, 25 / 3, 25 / 3, 25 / 3], 5)
    assert np.abs(np.sort(s.values) - want).max() < 1e-10


@pytest.mark.parametrize("translation", ["right", "left"])
def test_sector_oracle_matches_dense(translation, monkeypatch):
    dense = oracle_spectrum(P, 1, 1.0, translation)
    assert dense.method == "dense"
    monkeypatch.setenv("ENGEL_BUDGET_DIM", "100")
    sec = oracle_spectrum(P, 1, 1.0, translation, spot_every=3)
    assert sec.method == "sector"
    assert sec.max_leakage < 1e-10
    assert np.abs(sec.values - dense.values).max() < 1e-10
    assert np.abs(symbol_spectrum(P, 1, 1.0) - dense.values).max() < 1e-10


def test_oracle_capacity(monkeypatch):
    monkeypatch.setenv("ENGEL_BUDGET_DIM", "100")
    monkeypatch.setenv("ENGEL_BUDGET_QUOTIENT", "600")
    with pytest.raises(CapacityError):
        oracle_spectrum(P, 1, 1.0)


def test_only_level_two_sample():
    T = sub_laplacian_matrix(1.0, 2, P)
    pts = [xi for xi in enumerate_dual(P, 2) if xi.level == 2][::400]
    for xi in pts:
        s = sector_spectrum(T, xi, spot_row=1)
        S = symbol_closed_form(xi, 1.0)
        want = np.repeat(np.linalg.eigvalsh(S), xi.dim)
        assert np.abs(np.sort(s.values) - want).max() < 1e-8


def test_verify_spectrum_report():
    rep = verify_spectrum(P, 1, 1.0)
    assert rep["pass"] is False
    assert rep["closed_form_realized_by"] == ["mixed"]
    assert rep["gap"] == pytest.approx(GAPS[1.0], abs=1e-9)
    assert rep["closed_form_gap"] == pytest.approx(0, abs=1e-12)
    assert rep["orientation"]["passing"] == ["std:h_minus_hprime"]
    assert rep["line_residuals"]["flagged"] == 400
    assert rep["line_residuals"]["by_case"]["abelian"]["flagged"] == 0
    assert rep["readings"]["piecewise"]["first_mismatch"] is not None
    assert set(rep["invariant_spans"]["heisenberg"]) == {"row"}


def test_mixed_operator_realises_closed_form():
    vals = dense_spectrum(sub_laplacian_matrix(1.0, 1, P, "mixed"))
    assert compare_spectra(closed_form_spectrum(P, 1, 1.0), vals).pass_


def test_ellipticity_report_level_one():
    rep = ellipticity_report(P, 1, 1.0)
    assert rep["gap"] == pytest.approx(GAPS[1.0], abs=1e-9)
    assert rep["lower_constant"] > 0
    assert rep["shells"] == [5]


@given(st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 10**6))
def test_symbol_spectrum_nonnegative(alpha, k):
    pts = enumerate_dual(7, 1)
    S = symbol_closed_form(pts[k % len(pts)], alpha)
    assert np.linalg.eigvalsh(S).min() > -1e-9
