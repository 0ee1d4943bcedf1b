"""Exact series for the PDF and CDF of sums of i.i.d. alpha-mu variates,
their truncation bounds, EGC/MRC receiver metrics and independent oracles."""

from .combining import (
    G_BPSK,
    G_BPSK_MIN_CORRELATION,
    G_BPSK_ORTHOGONAL,
    CombinerKind,
    GainSummary,
    SnrConfig,
    aser,
    aser_asymptotic,
    combined_envelope_pdf,
    db_to_linear,
    linear_to_db,
    op_asymptotic,
    outage_probability,
    snr_cdf,
    snr_pdf,
)
from .distribution import AlphaMuParams, alpha_moment, make_rng, marginal_cdf, marginal_pdf, sample
from .errors import (
    AlphaMuError,
    ConvergenceError,
    DomainError,
    NumericRangeError,
    ResolutionError,
    ValidationFailure,
)
from .oracles import EmpiricalCdf, GridPdf, aser_quadrature, convolution_pdf, mc_empirical_cdf
from .series import (
    CoefficientTable,
    PrecisionWarning,
    SeriesEval,
    SumSpec,
    cdf_truncation_bound,
    delta_coefficients,
    pdf_truncation_bound,
    required_terms,
    sum_cdf,
    sum_pdf,
    truncation_error_reference,
)
from .special import (
    SeriesControl,
    erfc,
    gaussian_q,
    ln_gamma,
    mittag_leffler,
    reg_lower_incomplete_gamma,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
