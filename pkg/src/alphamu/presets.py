"""Parameter sets for the accuracy tables, timing tables and figure sweeps.

Table rows carry the reference figures they were printed with (value,
term count, truncation error and bound) so tests and the CLI can report
against them.  Figure presets fix the curve families; where a caption
names only a "range" of a parameter, the values chosen here are a
representative spread.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TableRow:
    alpha: float
    mu: float
    r_hat: float
    branches: int
    r: float
    value: float
    n_terms: Optional[int] = None
    error: Optional[float] = None
    bound: Optional[float] = None

    @property
    def key(self) -> tuple[float, float, float, int]:
        return (self.alpha, self.mu, self.r_hat, self.branches)


PDF_ACCURACY = (
    TableRow(0.8, 0.2, 5.0, 3, 2.0, 0.06218, 13, 1.94428e-26, 5.44576e-11),
    TableRow(1.2, 0.5, 1.0, 3, 2.0, 0.24861, 15, 4.62796e-14, 2.49407e-11),
    TableRow(0.7, 0.1, 7.0, 4, 2.0, 0.04389, 13, 2.46361e-31, 1.15486e-11),
    TableRow(1.5, 0.7, 2.0, 4, 2.0, 0.02492, 12, 3.14923e-16, 7.20537e-11),
    TableRow(0.9, 0.7, 10.0, 5, 3.0, 0.00067, 15, 2.81411e-26, 2.13662e-11),
    TableRow(1.7, 1.0, 3.0, 5, 3.0, 0.00013, 15, 1.27159e-22, 2.39054e-11),
)

CDF_ACCURACY = (
    TableRow(0.8, 0.2, 5.0, 3, 2.0, 0.27666, 13, 3.33080e-27, 9.94579e-11),
    TableRow(1.2, 0.5, 1.0, 3, 2.0, 0.42717, 15, 4.42165e-15, 4.98814e-11),
    TableRow(0.7, 0.1, 7.0, 4, 2.0, 0.32405, 11, 1.41096e-29, 2.98271e-11),
    TableRow(1.5, 0.7, 2.0, 4, 2.0, 0.01330, 13, 9.61472e-19, 7.72864e-11),
    TableRow(0.9, 0.7, 10.0, 5, 3.0, 0.00068, 14, 3.02419e-25, 2.30528e-11),
    TableRow(1.7, 1.0, 3.0, 5, 3.0, 0.00005, 15, 1.07039e-23, 7.17163e-11),
)

# Nakagami-m sums at r = 5 (PDF)
TIMING_PDF_NAKAGAMI = (
    TableRow(2.0, 1.0, 1.0, 3, 5.0, 0.0054),
    TableRow(2.0, 1.0, 1.0, 4, 5.0, 0.1222),
    TableRow(2.0, 2.0, 1.0, 5, 5.0, 0.3079),
    TableRow(2.0, 2.0, 1.0, 6, 5.0, 0.3475),
    TableRow(2.0, 3.0, 1.0, 7, 5.0, 0.5572),
)

TIMING_PDF_ALPHA_MU = (
    TableRow(0.5, 2.5, 5.0, 3, 5.0, 0.0306),
    TableRow(1.0, 2.5, 5.0, 4, 15.0, 0.0572),
    TableRow(1.5, 2.5, 5.0, 5, 15.0, 0.0111),
    TableRow(2.0, 2.5, 5.0, 6, 20.0, 0.0069),
    TableRow(2.5, 2.5, 5.0, 7, 22.0, 0.0002),
)

TIMING_CDF_ALPHA_MU = (
    TableRow(0.5, 2.5, 5.0, 3, 5.0, 0.0729),
    TableRow(1.0, 2.5, 5.0, 4, 15.0, 0.2235),
    TableRow(1.5, 2.5, 5.0, 5, 15.0, 0.0158),
    TableRow(2.0, 2.5, 5.0, 6, 20.0, 0.0311),
    TableRow(2.5, 2.5, 5.0, 7, 22.0, 0.0101),
)


@dataclass(frozen=True)
class Curve:
    alpha: float
    mu: float
    r_hat: float
    branches: int


@dataclass(frozen=True)
class FigurePreset:
    name: str
    quantity: str  # pdf | cdf | aser | op
    curves: tuple[Curve, ...]
    r_grid: Optional[tuple[float, float, int]] = None  # (min, max, points)
    snr_db: Optional[tuple[float, float, float]] = None  # (min, max, step)
    modulation_g: float = 1.0
    gamma_out_db: float = 0.0

    def r_values(self) -> np.ndarray:
        lo, hi, n = self.r_grid
        return np.linspace(lo, hi, n)

    def snr_values(self) -> np.ndarray:
        lo, hi, step = self.snr_db
        return np.round(np.arange(lo, hi + step / 2, step), 10)


def _grid(**params) -> tuple[Curve, ...]:
    """Cartesian product over the parameters given as tuples."""
    combos = [{}]
    for name, values in params.items():
        values = values if isinstance(values, tuple) else (values,)
        combos = [dict(c, **{name: v}) for c in combos for v in values]
    return tuple(Curve(**c) for c in combos)


_R_GRID = (0.05, 12.0, 240)
_SNR = (0.0, 50.0, 2.5)

FIGURES = {
    "fig1": FigurePreset("fig1", "pdf", _grid(alpha=1.7, branches=3, mu=(0.5, 1.0, 2.0), r_hat=(1.0, 2.0)), _R_GRID),
    "fig2": FigurePreset("fig2", "pdf", _grid(mu=1.7, branches=3, alpha=(0.8, 1.5, 2.5), r_hat=(1.0, 2.0)), _R_GRID),
    "fig3": FigurePreset("fig3", "pdf", _grid(alpha=0.5, mu=1.5, r_hat=1.0, branches=(2, 3, 5, 8)), _R_GRID),
    "fig4": FigurePreset("fig4", "cdf", _grid(alpha=1.7, branches=3, mu=(0.5, 1.0, 2.0), r_hat=(1.0, 2.0)), _R_GRID),
    "fig5": FigurePreset("fig5", "cdf", _grid(mu=1.7, branches=3, alpha=(0.8, 1.5, 2.5), r_hat=(1.0, 2.0)), _R_GRID),
    "fig6": FigurePreset("fig6", "cdf", _grid(alpha=0.5, mu=1.5, r_hat=1.0, branches=(2, 3, 5, 8)), _R_GRID),
    "fig7": FigurePreset("fig7", "aser", _grid(alpha=1.2, r_hat=2.0, branches=3, mu=(0.5, 0.9, 1.5, 2.5)), snr_db=_SNR),
    "fig8": FigurePreset("fig8", "aser", _grid(mu=0.9, r_hat=2.0, branches=3, alpha=(0.8, 1.2, 2.0, 3.0)), snr_db=_SNR),
    "fig9": FigurePreset("fig9", "aser", _grid(alpha=0.9, mu=0.5, r_hat=1.0, branches=(1, 2, 3, 4)), snr_db=_SNR),
    "fig10": FigurePreset("fig10", "op", _grid(alpha=1.2, r_hat=3.0, branches=3, mu=(0.5, 0.9, 1.5, 2.5)),
                          snr_db=_SNR, gamma_out_db=10.0),
    "fig11": FigurePreset("fig11", "op", _grid(mu=0.8, r_hat=6.0, branches=3, alpha=(0.8, 1.2, 2.0, 3.0)),
                          snr_db=_SNR, gamma_out_db=10.0),
    "fig12": FigurePreset("fig12", "op", _grid(alpha=0.5, mu=0.7, r_hat=3.0, branches=(1, 2, 3, 4)),
                          snr_db=_SNR, gamma_out_db=1.0),
}
