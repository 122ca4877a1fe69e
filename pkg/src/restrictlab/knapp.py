"""Knapp packets on the unit circle and the endpoint slope probe.

A packet whose spectrum fills a ``delta x delta^2`` cap has restriction ratio

    ||f^|_S||_{L^2} / ||f||_{L^p}  ~  delta^{(d-1)/2 - (d+1)/p'},

flat in ``delta`` exactly at the endpoint ``p = p0`` and growing as
``delta -> 0`` for larger ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .chains import sphere_ratio
from .families import KnappPacket, sample
from .norms import exponent_profile
from .spectral import GridSpec, make_grid

MIN_CELLS = 4
DEFAULT_DELTAS = (0.5, 0.42, 0.35, 0.3, 0.25)


def predicted_exponent(d: int, p: float) -> float:
    """Power of ``delta`` in the Knapp ratio at exponent ``p``."""
    p_dual = p / (p - 1)
    return (d - 1) / 2 - (d + 1) / p_dual


def knapp_grid(N: int = 256) -> GridSpec:
    """Box holding the ``delta = 1/4`` packet, long along the cap normal ``e_2``."""
    return make_grid(2, N, (64.0, 128.0))


@dataclass
class KnappReport:
    deltas: np.ndarray
    p_values: np.ndarray
    ratios: np.ndarray  # (len(p_values), len(deltas))
    slopes: np.ndarray
    predicted: np.ndarray

    def slope(self, p: float) -> float:
        i = int(np.argmin(np.abs(self.p_values - p)))
        return float(self.slopes[i])


def _loglog_slope(deltas, values) -> float:
    return float(np.polyfit(np.log(deltas), np.log(values), 1)[0])


def knapp_sweep(deltas: Sequence[float] = DEFAULT_DELTAS, p_values: Optional[Sequence[float]] = None,
                grid: Optional[GridSpec] = None, nodes: Optional[int] = None) -> KnappReport:
    """Restriction ratios of Knapp packets on ``S^1`` and their log-log slopes in ``delta``.

    Parameters
    ----------
    deltas : decreasing cap widths.
    p_values : exponents; defaults to ``p0, p0 + 0.1, p0 + 0.3``.
    grid : 2-D grid; every packet must decay to the sampling budget on it.
    nodes : circle quadrature nodes.
    """
    d = 2
    grid = knapp_grid() if grid is None else grid
    if grid.dim != d:
        raise ValueError(f"Knapp sweep runs on the circle (2-D grid, got {grid.dim}-D)")
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or len(deltas) < 2 or not np.all(np.diff(deltas) < 0):
        raise ValueError(f"deltas must be a strictly decreasing list of at least two values (got {list(deltas)})")
    cell = float(np.max(grid.dxi))
    if deltas[-1] < MIN_CELLS * cell:
        raise ValueError(f"delta = {deltas[-1]} is below {MIN_CELLS} grid cells ({MIN_CELLS * cell:.4g})")
    p0 = float(exponent_profile(d).p0)
    ps = np.asarray([p0, p0 + 0.1, p0 + 0.3] if p_values is None else p_values, dtype=float)
    if np.any(ps <= 1):
        raise ValueError("Knapp exponents must exceed 1")
    ratios = np.empty((len(ps), len(deltas)))
    for j, delta in enumerate(deltas):
        f = sample(KnappPacket(1.0, (0.0, 1.0), float(delta)), grid)
        for i, p in enumerate(ps):
            ratios[i, j] = sphere_ratio(f, 1.0, float(p), nodes).ratio
    slopes = np.array([_loglog_slope(deltas, r) for r in ratios])
    return KnappReport(deltas, ps, ratios, slopes, np.array([predicted_exponent(d, p) for p in ps]))
