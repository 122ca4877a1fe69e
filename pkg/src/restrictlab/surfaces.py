"""Surfaces with measures, restriction of spectra to them and extension operators.

Graph surfaces live in ``R^{d+1}`` as ``{(xi, phi(xi))}`` with measure
``w(xi) dxi``; the last grid axis carries the graph value.  Spheres live in
``R^d`` with the standard surface-area measure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import quadrature
from .norms import epstein_zeta
from .spectral import (Field, GridSpec, _check_in_box, _ifft_axis, forward_transform, frequency, inverse_transform,
                       partial_inverse, partial_transform, phase_matrix, spectrum_along_last, spectrum_at,
                       to_physical)


@dataclass(frozen=True)
class Sphere:
    dim: int
    radius: float
    nodes: Optional[int] = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"Sphere needs dim 2 or 3 (got {self.dim})")
        if not self.radius > 0:
            raise ValueError("Sphere radius must be positive")

    def quadrature(self, grid: GridSpec):
        n = self.nodes if self.nodes is not None else 4 * grid.N
        return quadrature.sphere_nodes(self.dim, self.radius, n)


class _Graph:
    """Graph ``xi -> (xi, height(xi))`` over ``R^dim`` with weight ``weight(xi)``."""

    dim: int
    singular_origin = False
    # weight ~ |xi|^(-origin_order) near 0
    origin_order = 0

    def height(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def weight(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ConeGraph(_Graph):
    """``phi = slope |xi|``, ``w = 1/|xi|``."""

    dim: int
    slope: float = 1.0
    singular_origin = True
    origin_order = 1

    def __post_init__(self):
        if self.slope == 0:
            raise ValueError("ConeGraph slope 0 is the hyperplane; use HyperplaneGraph")

    def height(self, xi):
        return self.slope * np.linalg.norm(xi, axis=-1)

    def weight(self, xi):
        return 1.0 / np.linalg.norm(xi, axis=-1)


@dataclass(frozen=True)
class MGraph(_Graph):
    """``phi = xi_3/|xi|``, ``w = 1/|xi|^2`` over ``R^3``."""

    dim: int = 3
    singular_origin = True
    origin_order = 2

    def __post_init__(self):
        if self.dim != 3:
            raise ValueError("MGraph lives over R^3")

    def height(self, xi):
        return xi[..., 2] / np.linalg.norm(xi, axis=-1)

    def weight(self, xi):
        return 1.0 / (xi**2).sum(-1)


@dataclass(frozen=True)
class MFGraph(_Graph):
    """``phi = |xi|_F / (F |xi|)`` with ``|xi|_F^2 = |xi_h|^2 + F^2 xi_3^2``, ``w = 1/|xi|^2``."""

    F: float
    dim: int = 3
    singular_origin = True
    origin_order = 2

    def __post_init__(self):
        if not self.F > 1:
            raise ValueError(f"MFGraph needs F > 1 (got {self.F})")

    def height(self, xi):
        nf = np.sqrt((xi[..., :2] ** 2).sum(-1) + self.F**2 * xi[..., 2] ** 2)
        return nf / (self.F * np.linalg.norm(xi, axis=-1))

    def weight(self, xi):
        return 1.0 / (xi**2).sum(-1)


@dataclass(frozen=True)
class HyperplaneGraph(_Graph):
    dim: int
    level: float = 0.0

    def height(self, xi):
        return np.full(xi.shape[:-1], float(self.level))

    def weight(self, xi):
        return np.ones(xi.shape[:-1])


SurfaceSpec = Union[Sphere, ConeGraph, MGraph, MFGraph, HyperplaneGraph]


@dataclass(frozen=True)
class SurfaceTrace:
    """Values of a spectrum on surface nodes together with measure weights.

    For graphs, ``nodes`` are the parameter points ``xi``.  For cones
    ``origin_jet`` holds the spectrum at the excluded vertex with its first
    and pure second derivatives along each axis, so that norms can remove
    the lattice-sum defect caused by the exclusion.
    """

    surface: object
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    spacing: Optional[float] = None
    origin_jet: Optional[tuple] = None

    def __post_init__(self):
        if len(self.values) != len(self.nodes) or len(self.weights) != len(self.nodes):
            raise ValueError("trace nodes, values and weights differ in length")
        if np.any(self.weights <= 0):
            raise ValueError("trace weights must be positive")


def _origin_defect(trace: SurfaceTrace, q: float) -> float:
    """Lattice-sum defect of the cone trace caused by dropping ``xi = 0``.

    With ``G = |f^|^q`` along the ray ``r (omega, slope)``, the terms of order
    ``r^0, r^1, r^2`` of the isotropic part of ``G`` give
    ``Z(1/2) h^{d-1} G + Z(0) h^d slope dG/dtau
    + Z(-1/2) h^{d+1} (tr H_h / d + slope^2 H_tau) / 2``.
    """
    d, h, rho = trace.surface.dim, trace.spacing, trace.surface.slope
    F0, F1, F2 = trace.origin_jet
    G0 = abs(F0) ** 2
    out = epstein_zeta(d, 0.5) * h ** (d - 1) * G0 ** (q / 2)
    if G0 == 0:
        return out
    dG = 2.0 * (F1 * np.conj(F0)).real
    d2G = 2.0 * (F2 * np.conj(F0)).real + 2.0 * np.abs(F1) ** 2
    a = q / 2
    dGq = a * G0 ** (a - 1) * dG
    d2Gq = a * G0 ** (a - 1) * d2G + a * (a - 1) * G0 ** (a - 2) * dG**2
    out += epstein_zeta(d, 0.0) * h**d * rho * dGq[-1]
    out += epstein_zeta(d, -0.5) * h ** (d + 1) * 0.5 * (d2Gq[:-1].sum() / d + rho**2 * d2Gq[-1])
    return float(out)


def trace_lq_norm(trace: SurfaceTrace, q: float) -> float:
    """``(sum w |v|^q)^{1/q}``, minus the origin lattice defect for cones."""
    if not q >= 1:
        raise ValueError(f"exponent must be >= 1 (got {q})")
    total = float((trace.weights * np.abs(trace.values) ** q).sum())
    if trace.origin_jet is not None and trace.spacing is not None:
        total -= _origin_defect(trace, q)
    return max(total, 0.0) ** (1.0 / q)


def _graph_points(grid: GridSpec, spec: _Graph):
    """Parameter-grid points (all but the last axis) with the singular node removed."""
    sub = grid.sub(range(grid.dim - 1))
    mesh = np.meshgrid(*[sub.xi(a) for a in range(sub.dim)], indexing="ij")
    pts = np.stack(mesh, -1).reshape(-1, sub.dim)
    keep = np.ones(len(pts), bool)
    if spec.singular_origin:
        keep = np.any(pts != 0, axis=1)
    return sub, pts, keep


def _isotropic(grid: GridSpec, axes) -> Optional[float]:
    h = grid.dxi[list(axes)]
    return float(h[0]) if np.allclose(h, h[0], rtol=1e-13) else None


def restrict_to_surface(fhat: Field, spec: SurfaceSpec, outside: str = "error") -> SurfaceTrace:
    """Trace of a frequency-side field on a sphere or a graph surface.

    Sphere values come from band-limited interpolation at quadrature nodes.
    Graph values ``f^(xi, phi(xi))`` are obtained at each grid ``xi`` by 1-D
    interpolation in the last frequency coordinate.  With ``outside="drop"``
    graph nodes whose height leaves the box are dropped instead of raising.
    """
    if not fhat.is_frequency:
        raise ValueError("restrict_to_surface expects a frequency-side field")
    grid = fhat.grid
    if isinstance(spec, Sphere):
        if spec.dim != grid.dim:
            raise ValueError(f"Sphere of dim {spec.dim} on a {grid.dim}-D grid")
        if np.any(spec.radius > grid.xi_max * (1 - 1e-12)):
            raise ValueError(f"sphere radius {spec.radius} outside the frequency box")
        pts, w = spec.quadrature(grid)
        vals = spectrum_at(inverse_transform(fhat), pts)
        return SurfaceTrace(spec, pts, vals, w)
    if spec.dim != grid.dim - 1:
        raise ValueError(f"graph over R^{spec.dim} needs a {spec.dim + 1}-D grid (got {grid.dim})")
    mixed = partial_inverse(fhat, grid.dim - 1)
    return _graph_trace(mixed.values, grid, spec, outside)


def restrict_physical(f: Field, spec: SurfaceSpec, outside: str = "error") -> SurfaceTrace:
    """Same as :func:`restrict_to_surface` but starting from a physical field."""
    if isinstance(spec, Sphere):
        return restrict_to_surface(forward_transform(f), spec, outside)
    g = f
    for a in range(f.dim - 1):
        g = partial_transform(g, a)
    return _graph_trace(g.values, f.grid, spec, outside)


def _graph_trace(mixed: np.ndarray, grid: GridSpec, spec: _Graph, outside: str) -> SurfaceTrace:
    sub, pts, keep = _graph_points(grid, spec)
    rows = mixed.reshape(-1, grid.N)
    heights = np.zeros(len(pts))
    heights[keep] = spec.height(pts[keep])
    lim = grid.xi_max[-1]
    inside = np.abs(heights) <= lim * (1 + 1e-12)
    if not np.all(inside[keep]):
        if outside == "error":
            raise ValueError(f"graph value leaves the last-axis frequency range |tau| <= {lim:.6g}")
        keep = keep & inside
    vals = spectrum_along_last(rows[keep], grid, heights[keep])
    w = spec.weight(pts[keep]) * float(np.prod(sub.dxi))
    jet = None
    h = _isotropic(grid, range(grid.dim - 1))
    if isinstance(spec, ConeGraph) and h is not None:
        phys = mixed
        for a in range(grid.dim - 1):
            phys = _ifft_axis(phys, grid, a)
        jet = _moment_jet(phys, grid)
    return SurfaceTrace(spec, pts[keep], vals, w, spacing=h, origin_jet=jet)


def _moment_jet(values: np.ndarray, grid: GridSpec):
    """``f^(0)``, ``d_a f^(0)`` and ``d_a^2 f^(0)`` from physical moments."""
    X = grid.mesh()
    vol = float(np.prod(grid.dx))
    F0 = vol * values.sum()
    F1 = np.array([vol * (-1j * X[a] * values).sum() for a in range(grid.dim)])
    F2 = np.array([vol * (-(X[a] ** 2) * values).sum() for a in range(grid.dim)])
    return complex(F0), F1, F2


def extension_operator(density: Field, spec: _Graph, t: float) -> Field:
    """Inverse transform of ``xi -> exp(i t phi(xi)) g(xi) w(xi)``.

    ``density`` is a frequency-side field over ``R^dim``; the singular node
    of the weight is set to zero.
    """
    if isinstance(spec, Sphere) or not isinstance(spec, _Graph):
        raise ValueError("extension_operator needs a graph surface")
    if not density.is_frequency:
        raise ValueError("extension density must be frequency-side")
    grid = density.grid
    if spec.dim != grid.dim:
        raise ValueError(f"graph over R^{spec.dim} with a {grid.dim}-D density")
    pts = np.stack(np.meshgrid(*[grid.xi(a) for a in range(grid.dim)], indexing="ij"), -1)
    mult = np.zeros(grid.shape, dtype=complex)
    ok = np.any(pts != 0, axis=-1) if spec.singular_origin else np.ones(grid.shape, bool)
    mult[ok] = np.exp(1j * t * spec.height(pts[ok])) * spec.weight(pts[ok])
    return inverse_transform(frequency(grid, density.values * mult))


def surface_nodes(spec: SurfaceSpec, grid: GridSpec):
    """Ambient node coordinates and measure weights of a surface.

    For graphs the ambient grid is ``grid`` of dimension ``spec.dim + 1``.
    """
    if isinstance(spec, Sphere):
        return spec.quadrature(grid)
    sub, pts, keep = _graph_points(grid, spec)
    pts = pts[keep]
    amb = np.column_stack([pts, spec.height(pts)])
    _check_in_box(grid, amb)
    return amb, spec.weight(pts) * float(np.prod(sub.dxi))


def _contract(values: np.ndarray, grid: GridSpec, axes, pts: np.ndarray) -> np.ndarray:
    """Contract the leading ``len(axes)`` array axes against phases at ``pts``.

    ``values`` has shape ``(N,)*k + rest``; returns ``(P,) + rest``.
    """
    k = len(axes)
    rest = values.shape[k:]
    acc = phase_matrix(grid.x(axes[0]), pts[:, 0]) @ values.reshape(grid.N, -1)
    for j in range(1, k):
        acc = acc.reshape(len(pts), grid.N, -1)
        acc = np.einsum("pj,pjr->pr", phase_matrix(grid.x(axes[j]), pts[:, j]), acc)
    scale = float(np.prod(grid.dx[list(axes)]))
    return acc.reshape((len(pts),) + rest) * scale


def product_restrict(fhat: Field, spec_a: SurfaceSpec, spec_b: SurfaceSpec) -> SurfaceTrace:
    """Trace on ``A x B`` with product nodes and product weights.

    ``A`` uses the leading coordinates of the ambient space, ``B`` the rest.
    Graph factors contribute their ambient ``(xi, phi(xi))`` nodes, built on
    the matching sub-grid.
    """
    if not fhat.is_frequency:
        raise ValueError("product_restrict expects a frequency-side field")
    grid = fhat.grid
    ma = spec_a.dim if isinstance(spec_a, Sphere) else spec_a.dim + 1
    mb = spec_b.dim if isinstance(spec_b, Sphere) else spec_b.dim + 1
    if ma + mb != grid.dim:
        raise ValueError(f"surface dimensions {ma} + {mb} do not match the {grid.dim}-D grid")
    ax_a, ax_b = list(range(ma)), list(range(ma, grid.dim))
    pa, wa = surface_nodes(spec_a, grid.sub(ax_a))
    pb, wb = surface_nodes(spec_b, grid.sub(ax_b))
    f = to_physical(fhat).values
    part = _contract(f, grid, ax_a, pa)  # (Pa, N^mb...)
    part = np.moveaxis(part, 0, -1)  # (N,)*mb + (Pa,)
    vals = _contract(part, grid, ax_b, pb)  # (Pb, Pa)
    vals = vals.T.reshape(-1)
    nodes = np.concatenate([np.repeat(pa, len(pb), 0), np.tile(pb, (len(pa), 1))], 1)
    w = np.multiply.outer(wa, wb).reshape(-1)
    return SurfaceTrace((spec_a, spec_b), nodes, vals, w)
