"""Real-valued special functions used throughout the package.

Everything here is pure and reentrant.  Gamma-family values are routed
through :func:`ln_gamma` so that large arguments never overflow, and the
series helpers work on (sign, log-magnitude) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

_SQRT2 = math.sqrt(2.0)
_TINY = 1e-300


@dataclass(frozen=True)
class SeriesControl:
    """Stopping parameters for internal series evaluations."""

    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms!r}")


DEFAULT_CONTROL = SeriesControl()


def ln_gamma(x):
    """Natural log of the gamma function for positive ``x`` (scalar or array)."""
    if np.ndim(x) == 0:
        x = float(x)
        if not (x > 0 and math.isfinite(x)):
            raise DomainError(f"ln_gamma requires a finite positive argument, got {x!r}")
        return math.lgamma(x)
    arr = np.asarray(x, dtype=float)
    if not np.all((arr > 0) & np.isfinite(arr)):
        raise DomainError("ln_gamma requires finite positive arguments")
    return _sp.gammaln(arr)


def log_sum_exp(logs) -> float:
    """``log(sum(exp(logs)))`` using an exactly rounded sum of rescaled terms."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return -math.inf
    top = float(np.max(logs))
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(np.exp(logs - top)))


def signed_log_sum(signs, logs) -> tuple[int, float]:
    """Sum of ``signs * exp(logs)`` returned as ``(sign, log|sum|)``.

    Terms are rescaled by the largest exponent and accumulated with
    :func:`math.fsum`, which is exactly rounded, so cancellation between
    alternating terms costs no more than the final rounding.
    """
    signs = np.asarray(signs, dtype=float)
    logs = np.asarray(logs, dtype=float)
    live = signs != 0
    if not np.any(live):
        return 0, -math.inf
    top = float(np.max(logs[live]))
    total = math.fsum(signs[live] * np.exp(logs[live] - top))
    if total == 0.0:
        return 0, -math.inf
    return (1 if total > 0 else -1), top + math.log(abs(total))


def log_reg_lower_incomplete_gamma(a: float, x: float) -> float:
    """``log P(a, x)`` where ``P`` is the regularized lower incomplete gamma.

    Series for ``x < a + 1`` and the Lentz continued fraction for the
    complement otherwise.  Stays finite when ``P`` underflows.
    """
    a = float(a)
    x = float(x)
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"incomplete gamma requires a > 0, got {a!r}")
    if not (x >= 0 and not math.isnan(x)):
        raise DomainError(f"incomplete gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return -math.inf
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        term = 1.0
        total = 1.0
        n = 0
        while True:
            n += 1
            term *= x / (a + n)
            total += term
            if term < total * 1e-17:
                break
            if n > 100_000:  # unreachable for x < a + 1, ratio stays below one
                raise ConvergenceError("incomplete gamma series did not converge")
        return -x + a * math.log(x) - math.lgamma(a + 1.0) + math.log(total)
    return math.log1p(-math.exp(_log_upper_cf(a, x)))


def _log_upper_cf(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 100_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return -x + a * math.log(x) - math.lgamma(a) + math.log(h)


def reg_lower_incomplete_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma ``gamma(a, x) / Gamma(a)``."""
    return math.exp(log_reg_lower_incomplete_gamma(a, x))


def erfc(x):
    """Complementary error function (scalar or array)."""
    if np.ndim(x) == 0:
        return math.erfc(float(x))
    return _sp.erfc(np.asarray(x, dtype=float))


def gaussian_q(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt(2)) / 2``."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / _SQRT2)
    return 0.5 * _sp.erfc(np.asarray(x, dtype=float) / _SQRT2)


def log_mittag_leffler_tail(a: float, b: float, z: float, start: int = 0,
                            ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``log sum_{k >= start} z**k / Gamma(a*k + b)`` for ``z >= 0``.

    Summing the tail directly avoids subtracting two nearly equal
    quantities when ``start`` is large.  Terms are generated in blocks;
    summation stops once three consecutive terms fall below
    ``ctrl.rel_tol`` times the running partial sum.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"Mittag-Leffler parameters must be positive, got a={a!r}, b={b!r}")
    if not (z >= 0 and math.isfinite(z)):
        raise DomainError(f"Mittag-Leffler argument must be finite and >= 0, got {z!r}")
    if start < 0:
        raise DomainError("start index must be non-negative")
    if z == 0.0:
        return -math.lgamma(b) if start == 0 else -math.inf

    log_z = math.log(z)
    log_tol = math.log(ctrl.rel_tol)
    chunks = []
    partial = -math.inf
    quiet = 0
    k0 = start
    block = 64
    while True:
        ks = np.arange(k0, k0 + block, dtype=float)
        logs = ks * log_z - _sp.gammaln(a * ks + b)
        running = np.logaddexp.accumulate(np.concatenate(([partial], logs)))[1:]
        small = logs < running + log_tol
        for j, is_small in enumerate(small):
            quiet = quiet + 1 if is_small else 0
            if quiet >= 3:
                chunks.append(logs[: j + 1])
                return log_sum_exp(np.concatenate(chunks))
        chunks.append(logs)
        partial = float(running[-1])
        k0 += block
        if k0 - start >= ctrl.max_terms:
            raise ConvergenceError(
                f"Mittag-Leffler series E_{{{a},{b}}}({z}) not converged after "
                f"{ctrl.max_terms} terms",
                value=math.exp(min(partial, 709.0)), bound=math.exp(min(float(logs[-1]), 709.0)),
                terms=ctrl.max_terms)


def mittag_leffler(a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Two-parameter Mittag-Leffler function ``E_{a,b}(z)`` for real ``z >= 0``."""
    return math.exp(log_mittag_leffler_tail(a, b, z, 0, ctrl))
