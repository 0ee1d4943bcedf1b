"""Exact series for the PDF and CDF of a sum of i.i.d. alpha-mu envelopes.

The density of ``R = R_1 + ... + R_L`` is a power series in ``r**alpha``
whose coefficients obey an O(n^2) recursion that involves ``L`` only
through an integer multiplier.  Coefficients are kept normalized by
``Gamma(alpha*mu)**L`` and stored as (sign, log-magnitude) pairs so that
large ``L`` and long tables stay inside double range.

Two closed-form tail bounds certify the truncation error: a
Mittag-Leffler form for ``alpha < 1`` ("dagger") and an incomplete-gamma
form for ``alpha >= 1`` ("star").
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy import special as _sp

from .distribution import AlphaMuParams
from .errors import ConvergenceError, DomainError, NumericRangeError
from .special import (
    ln_gamma,
    log_mittag_leffler_tail,
    log_reg_lower_incomplete_gamma,
    signed_log_sum,
)

Kind = Literal["pdf", "cdf"]

DEFAULT_TARGET = 1e-12
DEFAULT_CAP = 500
REFERENCE_EXTRA_TERMS = 200
_EPS = np.finfo(float).eps
_EMPIRICAL_TOL = 1e-16


class PrecisionWarning(UserWarning):
    """Cancellation in the alternating series has eaten most of the digits."""


@dataclass(frozen=True)
class SumSpec:
    """An alpha-mu marginal together with the number of summed branches."""

    params: AlphaMuParams
    branches: int

    def __post_init__(self):
        L = self.branches
        if isinstance(L, bool) or int(L) != L or L < 1:
            raise DomainError(f"number of branches must be a positive integer, got {L!r}")
        object.__setattr__(self, "branches", int(L))

    @classmethod
    def of(cls, alpha: float, mu: float, r_hat: float, branches: int) -> "SumSpec":
        return cls(AlphaMuParams(alpha, mu, r_hat), branches)

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def r_hat(self) -> float:
        return self.params.r_hat

    @property
    def key(self) -> tuple[float, float, float, int]:
        return (self.alpha, self.mu, self.r_hat, self.branches)

    @property
    def bound_kind(self) -> str:
        return "dagger" if self.alpha < 1.0 else "star"


@dataclass(frozen=True)
class CoefficientTable:
    """Normalized recursion coefficients ``delta_i / Gamma(alpha mu)**L``.

    ``signs`` and ``log_abs`` encode the coefficients; ``log_err`` is a
    running first-order bound on the absolute rounding error of each
    coefficient, carried through the recursion.
    """

    spec: SumSpec
    signs: np.ndarray
    log_abs: np.ndarray
    log_err: np.ndarray
    log_prefactor: float

    def __len__(self) -> int:
        return len(self.signs)

    @property
    def normalized_deltas(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.signs * np.exp(self.log_abs)


def _log_prefactor(spec: SumSpec) -> float:
    a, m, rh, L = spec.key
    return L * (math.log(a) + m * math.log(m) + ln_gamma(a * m) - ln_gamma(m) - a * m * math.log(rh))


def _step_logs(spec: SumSpec, n: int) -> np.ndarray:
    """log|a_l| / Gamma(alpha mu) for l < n, where a_l carries sign (-1)**l."""
    a, m, rh, _ = spec.key
    l = np.arange(n, dtype=float)
    return (_sp.gammaln(a * (l + m)) + l * (math.log(m) - a * math.log(rh))
            - _sp.gammaln(l + 1.0) - ln_gamma(a * m))


def _extend(spec: SumSpec, n_terms: int, signs, log_abs, log_err) -> CoefficientTable:
    L = spec.branches
    start = len(signs)
    S = np.zeros(n_terms, dtype=np.int8)
    G = np.full(n_terms, -math.inf)
    E = np.full(n_terms, -math.inf)
    S[:start], G[:start], E[:start] = signs, log_abs, log_err
    if start == 0:
        S[0], G[0] = 1, 0.0
        start = 1
    c = _step_logs(spec, n_terms)
    alt = np.where(np.arange(n_terms) % 2 == 0, 1, -1)
    log_eps = math.log(_EPS)
    for i in range(start, n_terms):
        l = np.arange(1, i + 1)
        k = l * (L + 1) - i
        prev_s = S[i - 1::-1].astype(float) if i > 0 else S[:0]
        prev_g = G[i - 1::-1]
        prev_e = E[i - 1::-1]
        live = (k != 0) & (prev_s != 0)
        log_k = np.log(np.abs(np.where(k == 0, 1, k)))
        logs = prev_g + log_k + c[1:i + 1]
        sgn = np.where(live, prev_s * np.sign(k) * alt[1:i + 1], 0.0)
        s, g = signed_log_sum(sgn, logs)
        S[i] = s
        G[i] = g - math.log(i) if s else -math.inf
        # propagated error of earlier coefficients plus rounding of this sum
        prop = np.where(k != 0, prev_e + log_k + c[1:i + 1], -math.inf)
        fresh = logs[live] + log_eps if np.any(live) else np.array([-math.inf])
        E[i] = np.logaddexp(_lse(prop), _lse(fresh) + math.log(2.0)) - math.log(i)
        if s and not math.isfinite(G[i]):
            raise NumericRangeError(f"coefficient {i} left double range for {spec}")
    for arr in (S, G, E):
        arr.setflags(write=False)
    return CoefficientTable(spec, S, G, E, _log_prefactor(spec))


def _lse(x: np.ndarray) -> float:
    if x.size == 0:
        return -math.inf
    top = float(np.max(x))
    if top == -math.inf:
        return -math.inf
    return top + math.log(float(np.sum(np.exp(x - top))))


def delta_coefficients(spec: SumSpec, n_terms: int) -> CoefficientTable:
    """Build the first ``n_terms`` normalized coefficients from scratch."""
    if int(n_terms) != n_terms or n_terms < 1:
        raise DomainError(f"n_terms must be a positive integer, got {n_terms!r}")
    empty = np.zeros(0, dtype=np.int8)
    return _extend(spec, int(n_terms), empty, np.zeros(0), np.zeros(0))


def extend_table(table: CoefficientTable, n_terms: int) -> CoefficientTable:
    """Return a table with ``n_terms`` entries; existing entries are reused verbatim."""
    if n_terms <= len(table):
        return table
    return _extend(table.spec, n_terms, table.signs, table.log_abs, table.log_err)


_CACHE: dict[tuple, CoefficientTable] = {}
_CACHE_LOCK = threading.Lock()


def coefficient_table(spec: SumSpec, n_terms: int) -> CoefficientTable:
    """Cached table holding at least ``n_terms`` coefficients for ``spec``."""
    table = _CACHE.get(spec.key)
    if table is not None and len(table) >= n_terms:
        return table
    base = table if table is not None else delta_coefficients(spec, 1)
    grown = extend_table(base, max(n_terms, 2 * len(base)))
    with _CACHE_LOCK:
        current = _CACHE.get(spec.key)
        if current is None or len(current) < len(grown):
            _CACHE[spec.key] = grown
    return grown


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


@dataclass(frozen=True)
class SeriesEval:
    """A truncated-series value with its truncation and rounding diagnostics."""

    value: float
    terms_used: int
    certified_bound: Optional[float] = None
    bound_kind: str = "none"
    rounding_error: float = 0.0
    method: str = "series"
    extra: dict = field(default_factory=dict, compare=False, repr=False)


# -- term assembly --------------------------------------------------------

def term_logs(table: CoefficientTable, n: int, log_x: float, power_shift: float,
              gamma_shift: float, exponent_scale: float = 1.0):
    """Signed log terms ``delta_i x**(e_i + power_shift) / Gamma(e_i + gamma_shift)``.

    ``e_i = (alpha i + alpha mu L) * exponent_scale``.  The table's log
    prefactor is included.  Returns ``(signs, logs, log_errs)``.
    """
    spec = table.spec
    i = np.arange(n, dtype=float)
    e = (spec.alpha * i + spec.alpha * spec.mu * spec.branches) * exponent_scale
    base = table.log_prefactor + (e + power_shift) * log_x - _sp.gammaln(e + gamma_shift)
    return table.signs[:n].astype(float), base + table.log_abs[:n], base + table.log_err[:n]


def _sum_terms(signs, logs, log_errs) -> tuple[float, float]:
    s, g = signed_log_sum(signs, logs)
    with np.errstate(over="ignore"):
        value = s * math.exp(g) if s else 0.0
        live = signs != 0
        total_abs = float(np.sum(np.exp(logs[live]))) if np.any(live) else 0.0
        coef_err = float(np.sum(np.exp(log_errs[live]))) if np.any(live) else 0.0
    if not math.isfinite(value):
        raise NumericRangeError("series value overflowed")
    return value, float(2.0 * _EPS * total_abs + coef_err)


def _kind_shifts(kind: Kind) -> tuple[float, float]:
    if kind == "pdf":
        return -1.0, 0.0
    if kind == "cdf":
        return 0.0, 1.0
    raise DomainError(f"kind must be 'pdf' or 'cdf', got {kind!r}")


def partial_sum(spec: SumSpec, r: float, n_terms: int, kind: Kind = "pdf") -> float:
    """The plain ``n_terms``-term truncation of the PDF or CDF series."""
    r = _check_r(r)
    shift, gshift = _kind_shifts(kind)
    table = coefficient_table(spec, n_terms)
    return _sum_terms(*term_logs(table, n_terms, math.log(r), shift, gshift))[0]


# -- truncation bounds ----------------------------------------------------

def _log_bound_scale(spec: SumSpec, r: float) -> float:
    a, m, rh, L = spec.key
    return L * (math.log(a) + m * math.log(m) + ln_gamma(a * m) + a * m * math.log(r / rh)
                - ln_gamma(m))


def log_truncation_bound(spec: SumSpec, r: float, n_t: int, kind: Kind = "pdf") -> float:
    """Natural log of the closed-form bound on the tail after ``n_t`` terms."""
    r = _check_r(r)
    if int(n_t) != n_t or n_t < 1:
        raise DomainError(f"n_t must be a positive integer, got {n_t!r}")
    _kind_shifts(kind)
    a, m, rh, L = spec.key
    log_scale = _log_bound_scale(spec, r)
    if kind == "pdf":
        log_scale -= math.log(r)
    if a < 1.0:
        z = 2.0 * m * L * (r / rh) ** a * math.exp(ln_gamma(m * a + a))
        b = a * m * L + (1.0 if kind == "cdf" else 0.0)
        try:
            tail = log_mittag_leffler_tail(a, b, z, int(n_t))
        except ConvergenceError:
            return math.inf
        return log_scale + tail
    x = m * (r / rh) ** a
    return math.log(2.0 * L) + log_scale + x + log_reg_lower_incomplete_gamma(int(n_t), x)


def truncation_bound(spec: SumSpec, r: float, n_t: int, kind: Kind = "pdf") -> float:
    lb = log_truncation_bound(spec, r, n_t, kind)
    return math.exp(lb) if lb < 709.0 else math.inf


def pdf_truncation_bound(spec: SumSpec, r: float, n_t: int) -> float:
    """Upper bound on the PDF truncation error after ``n_t`` terms."""
    return truncation_bound(spec, r, n_t, "pdf")


def cdf_truncation_bound(spec: SumSpec, r: float, n_t: int) -> float:
    """Upper bound on the CDF truncation error after ``n_t`` terms."""
    return truncation_bound(spec, r, n_t, "cdf")


def required_terms(spec: SumSpec, r: float, target: float, kind: Kind = "pdf",
                   cap: int = DEFAULT_CAP) -> int:
    """Smallest ``n_t <= cap`` whose truncation bound does not exceed ``target``.

    Doubles ``n_t`` until the bound is met, then bisects.
    """
    if not (target > 0):
        raise DomainError(f"target must be positive, got {target!r}")
    log_target = math.log(target) if math.isfinite(target) else math.inf

    def ok(n: int) -> bool:
        return log_truncation_bound(spec, r, n, kind) <= log_target

    lo, hi = 0, 1
    while not ok(hi):
        if hi >= cap:
            raise ConvergenceError(
                f"truncation bound above {target:g} after cap={cap} terms",
                bound=truncation_bound(spec, r, cap, kind), terms=cap)
        lo, hi = hi, min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- evaluation -----------------------------------------------------------

def _check_r(r: float) -> float:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"r must be a finite positive number, got {r!r}")
    return r


def empirical_terms(signs, logs, rel_tol: float = _EMPIRICAL_TOL) -> Optional[int]:
    """Index after three consecutive terms below ``rel_tol * |partial sum|``."""
    quiet = 0
    partial = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        terms = signs * np.exp(logs)
    for i, t in enumerate(terms):
        if not math.isfinite(t):
            return None
        partial += t
        if abs(t) <= rel_tol * abs(partial):
            quiet += 1
            if quiet >= 3:
                return i + 1
        else:
            quiet = 0
    return None


def evaluate(spec: SumSpec, r: float, kind: Kind = "pdf", target_abs_err: float = 0.0,
             cap: int = DEFAULT_CAP) -> SeriesEval:
    r = _check_r(r)
    target = float(target_abs_err) if target_abs_err else DEFAULT_TARGET
    if not target > 0:
        raise DomainError(f"target_abs_err must be non-negative, got {target_abs_err!r}")
    shift, gshift = _kind_shifts(kind)
    log_r = math.log(r)
    try:
        n = required_terms(spec, r, target, kind, cap)
        extra = {"stopping": "bound"}
    except ConvergenceError:
        table = coefficient_table(spec, cap)
        signs, logs, _ = term_logs(table, cap, log_r, shift, gshift)
        n = empirical_terms(signs, logs)
        if n is None:
            value, _ = _sum_terms(*term_logs(table, cap, log_r, shift, gshift))
            bound = truncation_bound(spec, r, cap, kind)
            raise ConvergenceError(
                f"{kind} series for {spec} at r={r:g} did not converge within {cap} terms",
                value=value, bound=bound, terms=cap)
        extra = {"stopping": "empirical"}
    table = coefficient_table(spec, n)
    value, rounding = _sum_terms(*term_logs(table, n, log_r, shift, gshift))
    bound = truncation_bound(spec, r, n, kind)
    if rounding > 1e-6 * max(abs(value), 1e-300):
        warnings.warn(
            f"{kind} at r={r:g} for {spec}: estimated rounding error {rounding:.3g} "
            f"against value {value:.6g}", PrecisionWarning, stacklevel=3)
    if kind == "cdf" and not 0.0 <= value <= 1.0:
        slack = bound + rounding
        excess = -value if value < 0 else value - 1.0
        if excess > slack:
            raise NumericRangeError(
                f"CDF value {value!r} outside [0, 1] by more than its error bound {slack:.3g}")
        value = min(max(value, 0.0), 1.0)
    return SeriesEval(value, n, bound, spec.bound_kind, rounding, "series", extra)


def sum_pdf(spec: SumSpec, r: float, target_abs_err: float = 0.0,
            cap: int = DEFAULT_CAP) -> SeriesEval:
    """Density of the L-fold sum at ``r`` with a certified truncation bound."""
    return evaluate(spec, r, "pdf", target_abs_err, cap)


def sum_cdf(spec: SumSpec, r: float, target_abs_err: float = 0.0,
            cap: int = DEFAULT_CAP) -> SeriesEval:
    """Distribution function of the L-fold sum at ``r``."""
    return evaluate(spec, r, "cdf", target_abs_err, cap)


def truncation_error_reference(spec: SumSpec, r: float, n_t: int, kind: Kind = "pdf",
                               extra_terms: int = REFERENCE_EXTRA_TERMS) -> float:
    """Actual size of the discarded tail ``|sum_{i=n_t}^{n_t+extra-1} term_i|``.

    The tail is summed directly rather than as a difference of two long
    partial sums, so it stays accurate far below the value's own ulp.
    """
    r = _check_r(r)
    if int(n_t) != n_t or n_t < 1:
        raise DomainError(f"n_t must be a positive integer, got {n_t!r}")
    shift, gshift = _kind_shifts(kind)
    total = int(n_t) + extra_terms
    table = coefficient_table(spec, total)
    signs, logs, _ = term_logs(table, total, math.log(r), shift, gshift)
    s, g = signed_log_sum(signs[n_t:], logs[n_t:])
    return math.exp(g) if s else 0.0
