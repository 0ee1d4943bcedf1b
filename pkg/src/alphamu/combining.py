"""Pre-detection EGC and MRC receivers over i.i.d. alpha-mu branches.

With equal branch noise the combined SNR is ``Psi = (Es / (L N0)) * R_nu ** (2 / theta)``
where ``R_EGC = sum(R_n)`` (theta = 1) and ``R_MRC = sum(R_n ** 2)``
(theta = 2).  ``R_n ** 2`` is itself alpha-mu with parameters
``(alpha / 2, mu, r_hat ** 2)``, so both receivers reduce to the sum
series of an *envelope spec*; every SNR statistic here is a change of
variables on that series.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, NumericRangeError, require_positive
from .series import (
    DEFAULT_CAP,
    PrecisionWarning,
    SeriesEval,
    SumSpec,
    coefficient_table,
    empirical_terms,
    sum_cdf,
    sum_pdf,
)
from .special import ln_gamma, signed_log_sum

# modulation constants for Q(sqrt(2 G psi)) error rates
G_BPSK = 1.0
G_BPSK_ORTHOGONAL = 0.5
G_BPSK_MIN_CORRELATION = 0.715

MODULATIONS = {
    "bpsk": G_BPSK,
    "bpsk-orthogonal": G_BPSK_ORTHOGONAL,
    "bpsk-min-correlation": G_BPSK_MIN_CORRELATION,
}

LOW_SNR_DB = 0.0


class CombinerKind(enum.Enum):
    EGC = 1
    MRC = 2

    @property
    def theta(self) -> int:
        return self.value

    @classmethod
    def parse(cls, name: "str | CombinerKind") -> "CombinerKind":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise DomainError(f"combiner must be EGC or MRC, got {name!r}") from None


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SnrConfig:
    """Mean SNR per symbol, modulation constant and outage threshold (all linear)."""

    es_n0: float
    modulation_g: float = G_BPSK
    gamma_out: float = 1.0

    def __post_init__(self):
        for name in ("es_n0", "modulation_g", "gamma_out"):
            object.__setattr__(self, name, require_positive(name, getattr(self, name)))

    @classmethod
    def from_db(cls, snr_db: float, modulation_g: float = G_BPSK,
                gamma_out_db: float = 0.0) -> "SnrConfig":
        return cls(db_to_linear(snr_db), modulation_g, db_to_linear(gamma_out_db))

    @property
    def snr_db(self) -> float:
        return linear_to_db(self.es_n0)

    def with_snr_db(self, snr_db: float) -> "SnrConfig":
        return replace(self, es_n0=db_to_linear(snr_db))


@dataclass(frozen=True)
class GainSummary:
    diversity_gain: float
    coding_gain: float


def envelope_spec(spec: SumSpec, c: CombinerKind) -> SumSpec:
    """Sum spec whose density is that of ``R_nu``."""
    c = CombinerKind.parse(c)
    if c is CombinerKind.EGC:
        return spec
    return SumSpec.of(spec.alpha / 2.0, spec.mu, spec.r_hat ** 2, spec.branches)


def _scale(ev: SeriesEval, factor: float) -> SeriesEval:
    bound = None if ev.certified_bound is None else ev.certified_bound * factor
    return replace(ev, value=ev.value * factor, certified_bound=bound,
                   rounding_error=ev.rounding_error * factor)


def envelope_of_snr(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, psi: float) -> float:
    c = CombinerKind.parse(c)
    per_branch = cfg.es_n0 / spec.branches
    return (psi / per_branch) ** (c.theta / 2.0)


def combined_envelope_pdf(spec: SumSpec, c: CombinerKind, r: float,
                          target_abs_err: float = 0.0) -> SeriesEval:
    """Density of ``R_EGC`` (the plain sum) or ``R_MRC`` (sum of squares)."""
    return sum_pdf(envelope_spec(spec, c), r, target_abs_err)


def snr_pdf(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, psi: float,
            target_abs_err: float = 0.0) -> SeriesEval:
    c = CombinerKind.parse(c)
    psi = require_positive("psi", psi)
    r = envelope_of_snr(spec, c, cfg, psi)
    ev = sum_pdf(envelope_spec(spec, c), r, target_abs_err)
    return _scale(ev, (c.theta / 2.0) * r / psi)


def snr_cdf(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, psi: float,
            target_abs_err: float = 0.0) -> SeriesEval:
    """``P(Psi <= psi)``.

    Deep in the upper tail the series cancels beyond what double precision
    can resolve; there the value comes from the convolution oracle instead
    and ``method`` is ``"convolution"``.
    """
    c = CombinerKind.parse(c)
    psi = require_positive("psi", psi)
    env = envelope_spec(spec, c)
    r = envelope_of_snr(spec, c, cfg, psi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        try:
            ev = sum_cdf(env, r, target_abs_err)
        except NumericRangeError:
            ev = None
    if ev is not None and ev.rounding_error <= max(target_abs_err, 1e-6 * abs(ev.value)):
        return ev
    from .oracles import convolution_cdf

    return SeriesEval(convolution_cdf(env, r), 0, None, "none", 0.0, "convolution")


def outage_probability(spec: SumSpec, c: CombinerKind, cfg: SnrConfig,
                       target_abs_err: float = 0.0) -> SeriesEval:
    """Probability that the combined SNR does not exceed ``cfg.gamma_out``."""
    return snr_cdf(spec, c, cfg, cfg.gamma_out, target_abs_err)


def _aser_term_logs(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, n: int):
    # term i: delta_i Gamma((s+1)/2) / (2 sqrt(pi) Gamma(e+1)) (G Es/(L N0))**(-s/2)
    # with e = (alpha i + alpha mu L) of the envelope spec and s = theta * e
    env = envelope_spec(spec, c)
    table = coefficient_table(env, n)
    i = np.arange(n, dtype=float)
    e = env.alpha * i + env.alpha * env.mu * env.branches
    s = c.theta * e
    log_snr = math.log(cfg.modulation_g * cfg.es_n0 / spec.branches)
    base = (table.log_prefactor + _sp.gammaln((s + 1.0) / 2.0) - _sp.gammaln(e + 1.0)
            - 0.5 * math.log(math.pi) - math.log(2.0) - 0.5 * s * log_snr)
    return table.signs[:n].astype(float), base + table.log_abs[:n], base + table.log_err[:n]


def aser_series(spec: SumSpec, c: CombinerKind, cfg: SnrConfig,
                cap: int = DEFAULT_CAP) -> SeriesEval:
    """Closed-form ASER series, stopped by the three-negligible-terms rule."""
    c = CombinerKind.parse(c)
    signs, logs, log_errs = _aser_term_logs(spec, c, cfg, cap)
    n = empirical_terms(signs, logs)
    if n is None:
        raise ConvergenceError(
            f"ASER series for {spec} ({c.name}) at {cfg.snr_db:.2f} dB did not settle "
            f"within {cap} terms", terms=cap)
    s, g = signed_log_sum(signs[:n], logs[:n])
    value = s * math.exp(g) if s else 0.0
    live = signs[:n] != 0
    rounding = float(2 * np.finfo(float).eps * np.sum(np.exp(logs[:n][live]))
                     + np.sum(np.exp(log_errs[:n][live])))
    return SeriesEval(value, n, None, "none", rounding, "series")


def aser(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, target_abs_err: float = 0.0,
         cap: int = DEFAULT_CAP) -> SeriesEval:
    """Average symbol error rate ``E[Q(sqrt(2 G Psi))]``.

    Uses the term-by-term integrated series at or above 0 dB.  Below that,
    or when the series does not settle or loses too many digits to
    cancellation, the value comes from quadrature and ``method`` says so.
    """
    c = CombinerKind.parse(c)
    if cfg.snr_db >= LOW_SNR_DB:
        try:
            ev = aser_series(spec, c, cfg, cap)
            limit = max(target_abs_err, 1e-6 * abs(ev.value))
            if ev.rounding_error <= limit and 0.0 <= ev.value <= 0.5:
                return ev
        except ConvergenceError:
            pass
    from .oracles import aser_quadrature

    value = aser_quadrature(spec, c, cfg)
    return SeriesEval(value, 0, None, "none", 0.0, "quadrature")


def aser_asymptotic(spec: SumSpec, c: CombinerKind, cfg: SnrConfig) -> tuple[float, GainSummary]:
    """Leading high-SNR term of the ASER as ``(C * Es/N0) ** (-D)``."""
    c = CombinerKind.parse(c)
    env = envelope_spec(spec, c)
    table = coefficient_table(env, 1)
    s0 = spec.alpha * spec.mu * spec.branches
    e0 = s0 / c.theta
    diversity = s0 / 2.0
    log_k = (table.log_prefactor + ln_gamma((s0 + 1.0) / 2.0) - ln_gamma(e0 + 1.0)
             - 0.5 * math.log(math.pi) - math.log(2.0)
             - diversity * math.log(cfg.modulation_g / spec.branches))
    coding = math.exp(-log_k / diversity)
    prob = math.exp(-diversity * math.log(coding * cfg.es_n0))
    return prob, GainSummary(diversity, coding)


def op_asymptotic(spec: SumSpec, c: CombinerKind, cfg: SnrConfig) -> tuple[float, GainSummary]:
    """Leading high-SNR term of the outage probability as ``(C * Es/N0) ** (-D)``."""
    c = CombinerKind.parse(c)
    env = envelope_spec(spec, c)
    table = coefficient_table(env, 1)
    s0 = spec.alpha * spec.mu * spec.branches
    e0 = s0 / c.theta
    diversity = s0 / 2.0
    log_k = (table.log_prefactor - ln_gamma(e0 + 1.0)
             + diversity * math.log(spec.branches * cfg.gamma_out))
    coding = math.exp(-log_k / diversity)
    prob = math.exp(-diversity * math.log(coding * cfg.es_n0))
    return prob, GainSummary(diversity, coding)
