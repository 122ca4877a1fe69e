"""Quadrature rules: spheres, singular endpoints, composite Gauss-Legendre."""
from __future__ import annotations

import numpy as np

# x = a + (b - a) s**SINGULAR_POWER turns any endpoint weight |x - a|^(-k/6),
# k < 6, into a polynomial factor in s
SINGULAR_POWER = 6


def gauss_legendre(a: float, b: float, n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def composite_gauss(a: float, b: float, n: int, panel: float):
    """Gauss-Legendre with ``n`` nodes on each panel of length <= ``panel``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    k = max(1, int(np.ceil((b - a) / panel)))
    edges = np.linspace(a, b, k + 1)
    xs, ws = zip(*(gauss_legendre(lo, hi, n) for lo, hi in zip(edges[:-1], edges[1:])))
    return np.concatenate(xs), np.concatenate(ws)


def singular_endpoint(a: float, b: float, n: int, power: int = SINGULAR_POWER):
    """Rule for ``int_a^b`` with an integrable power singularity at ``a``.

    ``b < a`` is allowed (singular end on the right of the interval); the
    weights are then still positive, for integration over the interval
    between the two points.
    """
    s, w = gauss_legendre(0.0, 1.0, n)
    x = a + (b - a) * s**power
    jac = abs(b - a) * power * s ** (power - 1)
    return x, w * jac


def circle_nodes(radius: float, n: int):
    """Trapezoid rule on the circle of given radius (standard arclength)."""
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return pts, np.full(n, 2.0 * np.pi * radius / n)


def sphere2_nodes(radius: float, n_polar: int, n_azimuth: int):
    """Gauss-Legendre in cos(theta) times trapezoid in phi on the 2-sphere."""
    c, wc = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1.0 - C**2)
    pts = radius * np.column_stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), C.ravel()])
    w = np.multiply.outer(wc, np.full(n_azimuth, 2.0 * np.pi / n_azimuth)).ravel()
    return pts, w * radius**2


def sphere_nodes(dim: int, radius: float, n: int):
    """Nodes and area weights on the sphere of radius ``radius`` in R^dim.

    ``n`` is the azimuthal count; in three dimensions ``n // 2`` polar nodes.
    """
    if dim == 2:
        return circle_nodes(radius, n)
    if dim == 3:
        return sphere2_nodes(radius, max(2, n // 2), n)
    raise ValueError(f"sphere quadrature implemented for dim 2 and 3 (got {dim})")
