"""Independent reference routes used to cross-check the series engine.

* Monte Carlo: seeded sampling of the branch envelopes, summarized as an
  empirical CDF with a Dvoretzky-Kiefer-Wolfowitz confidence band.
* Iterated convolution: the L-fold density on a uniform grid, built by
  ``L - 1`` direct discrete convolutions of a lattice form of the marginal.
* Quadrature of the ASER definition over the SNR density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .combining import CombinerKind, SnrConfig, envelope_of_snr, envelope_spec, snr_cdf, snr_pdf
from .distribution import AlphaMuParams, alpha_moment, make_rng, marginal_cdf, marginal_pdf, sample
from .errors import ConvergenceError, DomainError, ResolutionError
from .series import PrecisionWarning, SumSpec
from .special import gaussian_q

DKW_CONFIDENCE = 0.99
MC_CHUNK = 1 << 18
GRID_MASS_TOL = 1e-4
MIN_GRID = 1 << 10
MAX_GRID = 1 << 14


def dkw_half_width(n: int, confidence: float = DKW_CONFIDENCE) -> float:
    """Half-width of the two-sided DKW band at the given confidence."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class EmpiricalCdf:
    grid: np.ndarray
    values: np.ndarray
    n_samples: int

    @property
    def dkw_band(self) -> float:
        return dkw_half_width(self.n_samples)

    def contains(self, cdf_values) -> np.ndarray:
        """Mask of grid points where ``cdf_values`` lie inside the band."""
        return np.abs(np.asarray(cdf_values) - self.values) <= self.dkw_band


def mc_sum_samples(spec: SumSpec, n_samples: int, seed: int) -> np.ndarray:
    """``n_samples`` draws of the L-branch sum.

    Draws are produced in fixed-size chunks, chunk ``k`` from stream ``k``
    of ``seed``, and concatenated in chunk order, so the output does not
    depend on how the chunks are scheduled.
    """
    n_samples = int(n_samples)
    out = np.empty(n_samples)
    for k, start in enumerate(range(0, n_samples, MC_CHUNK)):
        stop = min(start + MC_CHUNK, n_samples)
        rng = make_rng(seed, k)
        acc = np.zeros(stop - start)
        for _ in range(spec.branches):
            acc += sample(spec.params, rng, stop - start)
        out[start:stop] = acc
    return out


def mc_snr_samples(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, n_samples: int,
                   seed: int) -> np.ndarray:
    """Combined SNR draws built directly from simulated branch envelopes."""
    c = CombinerKind.parse(c)
    n_samples = int(n_samples)
    out = np.empty(n_samples)
    per_branch = cfg.es_n0 / spec.branches
    for k, start in enumerate(range(0, n_samples, MC_CHUNK)):
        stop = min(start + MC_CHUNK, n_samples)
        rng = make_rng(seed, k)
        acc = np.zeros(stop - start)
        for _ in range(spec.branches):
            acc += sample(spec.params, rng, stop - start) ** c.theta
        out[start:stop] = per_branch * acc ** (2.0 / c.theta)
    return out


def empirical_cdf(samples: np.ndarray, grid) -> EmpiricalCdf:
    grid = np.asarray(grid, dtype=float)
    ordered = np.sort(samples)
    values = np.searchsorted(ordered, grid, side="right") / ordered.size
    return EmpiricalCdf(grid, values, ordered.size)


def mc_empirical_cdf(spec: SumSpec, grid, n_samples: int = 1_000_000,
                     seed: int = 0) -> EmpiricalCdf:
    """Fraction of simulated sums not exceeding each grid point."""
    grid = np.asarray(grid, dtype=float)
    if n_samples < 1000:
        raise DomainError("Monte Carlo needs at least 1000 samples")
    if grid.ndim != 1 or np.any(grid <= 0) or np.any(np.diff(grid) < 0):
        raise DomainError("grid must be a sorted 1-D array of positive points")
    return empirical_cdf(mc_sum_samples(spec, n_samples, seed), grid)


@dataclass(frozen=True)
class GridPdf:
    """Density samples on ``grid = k * grid_step``; ``mass`` is the probability below ``r_max``.

    ``origin_power`` is the exponent ``beta`` of the ``r**beta`` behaviour at
    the origin.  When it is negative the density is singular there and
    interpolation works on ``f / r**beta`` instead.
    """

    grid: np.ndarray
    densities: np.ndarray
    grid_step: float
    mass: float
    origin_power: float = 0.0

    def at(self, r):
        """Four-point Lagrange interpolation, fourth-order like the grid values."""
        r = np.asarray(r, dtype=float)
        u = r / self.grid_step
        last = self.grid.size - 1
        beta = min(self.origin_power, 0.0)
        if beta == 0.0:
            k = np.clip(np.floor(u).astype(int), 1, last - 2)
            f = self.densities
        else:
            # the origin node is skipped: f / r**beta is not defined there
            k = np.clip(np.floor(u).astype(int), 2, last - 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                f = self.densities / self.grid ** beta
        s = u - k
        out = (-s * (s - 1) * (s - 2) / 6 * f[k - 1] + (s + 1) * (s - 1) * (s - 2) / 2 * f[k]
               - (s + 1) * s * (s - 2) / 2 * f[k + 1] + (s + 1) * s * (s - 1) / 6 * f[k + 2])
        if beta != 0.0:
            out = out * r ** beta
        return float(out) if out.ndim == 0 else out


def default_r_max(spec: SumSpec, tail: float = 1e-6) -> float:
    """Grid end that leaves at most ``tail`` of the sum's mass beyond it.

    If the sum exceeds ``L q`` then some branch exceeds ``q``, so taking
    ``q`` as the marginal ``tail / L`` upper quantile suffices.  The fixed
    rule ``L r_hat (1 + 8 / sqrt(alpha mu))`` is kept as a floor.
    """
    p = spec.params
    x = float(_sp.gammainccinv(p.mu, tail / spec.branches))
    q = p.r_hat * (x / p.mu) ** (1.0 / p.alpha)
    floor = spec.branches * p.r_hat * (1.0 + 8.0 / math.sqrt(p.alpha * p.mu))
    return max(floor, spec.branches * q)


def _cell_masses(p, edges: np.ndarray) -> np.ndarray:
    """Probability of the marginal in each cell ``[edges[m], edges[m+1]]``.

    Differences of ``P`` below the mode region and of ``Q`` above it, so
    far-tail cells keep their relative accuracy.
    """
    x = p.mu * (edges / p.r_hat) ** p.alpha
    lower = _sp.gammainc(p.mu, x)
    upper = _sp.gammaincc(p.mu, x)
    return np.where(x[:-1] < p.mu, np.diff(lower), -np.diff(upper))


def _moment_lattice(p, h: float, n: int) -> np.ndarray:
    """Marginal as point masses on ``k h`` matching each cell's mass and mean.

    The mass of cell ``[m h, (m+1) h]`` is split between its two end nodes
    so that the cell's first moment is preserved.  Any test function that is
    linear on each cell then has the exact expectation, which keeps the
    lattice second-order accurate even when the density is singular at 0.
    """
    edges = h * np.arange(n + 1)
    m0 = _cell_masses(p, edges)
    # partial first moment E[R; R in cell] is a shifted-shape incomplete gamma
    mu1 = p.mu + 1.0 / p.alpha
    shifted = AlphaMuParams(p.alpha, mu1, p.r_hat * (mu1 / p.mu) ** (1.0 / p.alpha))
    mean = alpha_moment(p, 1.0)
    m1 = mean * _cell_masses(shifted, edges)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(m0 > 0, m1 / m0 / h - np.arange(n), 0.5)
    t = np.clip(t, 0.0, 1.0)
    w = np.zeros(n + 1)
    w[:-1] += m0 * (1.0 - t)
    w[1:] += m0 * t
    return w


def _lattice_sum(spec: SumSpec, h: float, n: int) -> np.ndarray:
    w = _moment_lattice(spec.params, h, n)
    out = w
    for _ in range(spec.branches - 1):
        out = np.convolve(out, w)[: n + 1]
    return out


def convolution_pdf(spec: SumSpec, r_max: float | None = None,
                    n_grid: int = 1 << 13) -> GridPdf:
    """L-fold density by repeated numerical convolution of the marginal.

    Each branch is replaced by point masses on a uniform lattice that match
    the exact mass and first moment of every cell (the product trapezoid
    rule), the lattices are convolved directly, and the node probabilities
    divided by the step give the density.  The ``h**2`` bias of that
    estimate is removed by one Richardson step against a half-step run.
    The convolution at ``r`` only involves the marginal on ``[0, r]``, so
    ``r_max`` affects coverage and the reported ``mass`` but not the values.
    """
    n_grid = int(n_grid)
    if n_grid < MIN_GRID:
        raise ResolutionError(f"n_grid={n_grid} is below the minimum {MIN_GRID}; "
                              "increase n_grid")
    if n_grid > MAX_GRID:
        raise DomainError(f"n_grid={n_grid} exceeds {MAX_GRID} (direct convolution is O(n^2))")
    r_max = default_r_max(spec) if r_max is None else float(r_max)
    if not (r_max > 0 and math.isfinite(r_max)):
        raise DomainError("r_max must be positive and finite")
    p = spec.params
    n = n_grid - 1
    h = r_max / n
    x = h * np.arange(n_grid)
    total = spec.alpha * spec.mu * spec.branches
    if spec.branches == 1:
        dens = marginal_pdf(p, x)
        mass = marginal_cdf(p, r_max)
    else:
        coarse = _lattice_sum(spec, h, n)
        fine = _lattice_sum(spec, h / 2.0, 2 * n)
        dens = (4.0 * fine[::2] / (h / 2.0) - coarse / h) / 3.0
        dens[0] = 0.0 if total > 1 else (math.inf if total < 1 else dens[0])
        mass = float(math.fsum(fine))
    if not (1.0 - GRID_MASS_TOL <= mass <= 1.0 + GRID_MASS_TOL):
        raise ResolutionError(
            f"convolution grid holds mass {mass:.6g}; increase r_max or n_grid")
    return GridPdf(x, dens, h, float(mass), total - 1.0)


def convolution_cdf(spec: SumSpec, r: float, n_grid: int = 1 << 13) -> float:
    """CDF of the L-fold sum at ``r`` from the convolution density.

    Computed as one minus the integral of the grid density over
    ``[r, r_max]`` (composite Simpson on interpolated nodes), with ``r_max``
    placed where the remaining tail is below 1e-13.  Working from the upper
    side keeps the result accurate when ``F(r)`` is close to one.
    """
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"r must be a finite positive number, got {r!r}")
    r_max = max(default_r_max(spec, tail=1e-13), 1.01 * r)
    grid = convolution_pdf(spec, r_max=r_max, n_grid=n_grid)
    n = max(2, 2 * int(math.ceil((r_max - r) / grid.grid_step / 2)))
    x = np.linspace(r, grid.grid[-1], n + 1)
    f = grid.at(x)
    step = (x[-1] - x[0]) / n
    upper = step / 3.0 * (f[0] + f[-1] + 4.0 * np.sum(f[1:-1:2]) + 2.0 * np.sum(f[2:-1:2]))
    return float(min(max(1.0 - upper, 0.0), 1.0))


def _reliable_limit(spec: SumSpec, c: CombinerKind, cfg: SnrConfig, psi_hi: float) -> float:
    # largest point of a geometric scan below psi_hi where the series density
    # is still computed to about nine digits
    psi = psi_hi
    while psi > 1e-9 * psi_hi:
        try:
            ev = snr_pdf(spec, c, cfg, psi, 1e-14)
            if ev.rounding_error <= 1e-9 * abs(ev.value) + 1e-300:
                return psi
        except ConvergenceError:
            pass
        psi /= 2.0 ** 0.25
    return psi


def aser_quadrature(spec: SumSpec, c: CombinerKind, cfg: SnrConfig,
                    abs_tol: float = 1e-10, psi_split: float | None = None) -> float:
    """ASER as the integral of ``Q(sqrt(2 G psi))`` against the SNR density.

    Works in ``theta = arctan(psi)`` with composite Gauss-Legendre panels
    graded geometrically towards ``psi = 0``, where the density may be
    singular, up to the point where the Q factor drops below 1e-20.  The
    sliver below the finest panel is bounded by ``F(psi_min) / 2``.

    The series density is used up to the largest SNR where it is still
    well conditioned (or ``psi_split`` if given).  Beyond that the density
    comes from the convolution oracle, which does not cancel in the tail.
    """
    c = CombinerKind.parse(c)
    g_mod = cfg.modulation_g
    psi_top = 45.0 / g_mod
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        split = _reliable_limit(spec, c, cfg, psi_top) if psi_split is None else float(psi_split)
        grid_pdf = None
        if split < psi_top:
            env = envelope_spec(spec, c)
            r_top = envelope_of_snr(spec, c, cfg, psi_top)
            grid_pdf = convolution_pdf(env, r_max=max(1.01 * r_top, default_r_max(env)))

        def density(psi: np.ndarray) -> np.ndarray:
            out = np.empty_like(psi)
            for j, v in enumerate(psi):
                if v <= split:
                    out[j] = snr_pdf(spec, c, cfg, float(v), 1e-14).value
                else:
                    r = envelope_of_snr(spec, c, cfg, float(v))
                    out[j] = (c.theta / 2.0) * r / v * grid_pdf.at(r)
            return out

        theta_hi = math.atan(psi_top)
        psi_lo = 1e-12 * min(1.0, psi_top)
        theta_lo = math.atan(psi_lo)
        n_geo = int(math.ceil(math.log2(theta_hi / theta_lo)))
        edges = np.concatenate(([theta_lo], theta_hi * 2.0 ** -np.arange(n_geo, -1, -1)[1:]))
        edges = np.concatenate((edges, np.linspace(theta_hi / 2, theta_hi, 9)))
        if split < psi_top:
            edges = np.concatenate((edges, [math.atan(split)]))
        edges = np.unique(edges)

        def integrand(theta: np.ndarray) -> np.ndarray:
            psi = np.tan(theta)
            return gaussian_q(np.sqrt(2.0 * g_mod * psi)) * density(psi) / np.cos(theta) ** 2

        def rule(order: int) -> float:
            nodes, weights = np.polynomial.legendre.leggauss(order)
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                total += half * float(np.dot(weights, integrand(mid + half * nodes)))
            return total

        try:
            sliver = 0.5 * snr_cdf(spec, c, cfg, psi_lo).value
            previous = rule(16)
            for order in (32, 64):
                current = rule(order)
                if abs(current - previous) <= abs_tol:
                    return current + sliver
                previous = current
        except ConvergenceError as exc:
            raise ResolutionError(f"ASER quadrature could not evaluate the SNR density: {exc}") from exc
    raise ResolutionError(
        f"ASER quadrature did not reach {abs_tol:g}; last change {abs(current - previous):.3g}")
