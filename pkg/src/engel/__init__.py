"""Harmonic analysis on the p-adic Engel group B_4(Z_p).

Exact p-adic arithmetic, the group law and its finite quotients, the unitary
dual with matrix coefficients and characters, Vladimirov-Taibleson type
operators, and tools to check a closed-form spectrum against finite oracles.
"""

from .dual import DualPoint, character, enumerate_dual, fourier_inverse, fourier_transform, rep_matrix
from .gaussian import GaussianResult, char_integral, gaussian_integral, gaussian_integral_bruteforce
from .group import EngelPoint, QuotientFunction, QuotientIndex, haar_average, inverse, lift, one_param, project, star
from .operators import (
    OperatorMatrix,
    directional_vt_matrix,
    full_vt_matrix,
    sub_laplacian_matrix,
    symbol_closed_form,
    symbol_numeric,
    term,
    vladimirov_laplacian_matrix,
)
from .padic import Config, PAdicScalar, PhaseClass, fractional_part, lambda_p, legendre_symbol, phase_value, valuation
from .spectral import (
    SpectralLine,
    SpectrumReport,
    closed_form_lines,
    compare_spectra,
    eigenfunction_vector,
    ellipticity_report,
    oracle_spectrum,
    verify_spectrum,
)

__version__ = "0.1.0"
