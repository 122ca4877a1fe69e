"""Concrete test-function families sampled on grids."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .spectral import Field, GridSpec, boundary_decay, frequency, inverse_transform, physical

DECAY_BUDGET = 1e-12


class DecayError(ValueError):
    """A sampled family does not decay inside the box."""


def _vec(v, dim):
    return np.broadcast_to(np.asarray(v, dtype=float), (dim,))


@dataclass(frozen=True)
class Gaussian:
    """``exp(-sum((x - c)/w)^2 / 2) * exp(i k.x)``; width may be per axis."""

    center: object = 0.0
    width: object = 1.0
    modulation: object = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.width, dtype=float) <= 0):
            raise ValueError("Gaussian width must be positive")

    def values(self, grid: GridSpec) -> np.ndarray:
        c, w, k = (_vec(v, grid.dim) for v in (self.center, self.width, self.modulation))
        X = grid.mesh()
        expo = sum(-0.5 * ((X[a] - c[a]) / w[a]) ** 2 + 1j * k[a] * X[a] for a in range(grid.dim))
        return np.exp(expo)

    def spectrum(self, xi: np.ndarray) -> np.ndarray:
        """Closed-form transform at points ``xi`` of shape ``(P, dim)``."""
        xi = np.atleast_2d(xi)
        dim = xi.shape[1]
        c, w, k = (_vec(v, dim) for v in (self.center, self.width, self.modulation))
        q = xi - k
        return np.prod(np.sqrt(2 * np.pi) * w) * np.exp(-0.5 * (q**2 * w**2).sum(1) - 1j * (q * c).sum(1))


@dataclass(frozen=True)
class RingBump:
    """Radial frequency-side shell between ``inner`` and ``outer``.

    The profile is ``exp(-(|xi| - r0)^2 / (2 sigma^2))`` with ``r0`` the
    annulus midpoint and ``sigma`` one eighth of its thickness, so the annulus
    edges sit four standard deviations out.
    """

    inner: float
    outer: float

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("RingBump needs 0 < inner < outer")

    @property
    def r0(self):
        return 0.5 * (self.inner + self.outer)

    @property
    def sigma(self):
        return (self.outer - self.inner) / 8.0

    def spectrum_radial(self, r):
        return np.exp(-0.5 * ((r - self.r0) / self.sigma) ** 2)

    def values(self, grid: GridSpec) -> np.ndarray:
        Xi = grid.mesh("frequency")
        r = np.sqrt(sum(v**2 for v in Xi))
        return inverse_transform(frequency(grid, self.spectrum_radial(r))).values


@dataclass(frozen=True)
class KnappPacket:
    """Wave packet whose spectrum sits on a ``delta x delta^2`` cap of a sphere.

    The spectrum is the Gaussian ``exp(-t^2/(2 delta^2) - n^2/(2 delta^4))``
    with ``n = xi.e - radius`` the normal and ``t`` the tangential offset from
    the cap centre ``radius * e``; ``direction`` gives ``e``.
    """

    radius: float = 1.0
    direction: object = (0.0, 1.0)
    delta: float = 0.25

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("KnappPacket needs 0 < delta <= 1")

    def _frame(self, dim):
        e = _vec(self.direction, dim)
        return e / np.linalg.norm(e)

    def spectrum(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(xi)
        e = self._frame(xi.shape[1])
        n = xi @ e - self.radius
        t2 = (xi**2).sum(1) - (xi @ e) ** 2
        return np.exp(-0.5 * t2 / self.delta**2 - 0.5 * n**2 / self.delta**4)

    def values(self, grid: GridSpec) -> np.ndarray:
        d = grid.dim
        e = self._frame(d)
        X = grid.mesh()
        along = sum(e[a] * X[a] for a in range(d))
        perp2 = sum(X[a] ** 2 for a in range(d)) - along**2
        amp = (self.delta / np.sqrt(2 * np.pi)) ** (d - 1) * (self.delta**2 / np.sqrt(2 * np.pi))
        return amp * np.exp(1j * self.radius * along - 0.5 * self.delta**2 * perp2
                            - 0.5 * self.delta**4 * along**2)

    def cap_mask(self, grid: GridSpec, spread: float = 7.0) -> np.ndarray:
        """Frequency-grid indicator of the ``spread``-sigma cap neighbourhood."""
        Xi = grid.mesh("frequency")
        pts = np.stack(np.broadcast_arrays(*Xi), -1).reshape(-1, grid.dim)
        e = self._frame(grid.dim)
        n = pts @ e - self.radius
        t = np.sqrt(np.maximum((pts**2).sum(1) - (pts @ e) ** 2, 0.0))
        inside = (np.abs(n) <= spread * self.delta**2) & (t <= spread * self.delta)
        return inside.reshape(grid.shape)


@dataclass(frozen=True)
class TensorProduct:
    """Product of one-dimensional families, one per axis."""

    factors: tuple

    def values(self, grid: GridSpec) -> np.ndarray:
        if len(self.factors) != grid.dim:
            raise ValueError(f"TensorProduct has {len(self.factors)} factors for a {grid.dim}-D grid")
        out = np.ones(grid.shape, dtype=complex)
        for a, fac in enumerate(self.factors):
            v = fac.values(grid.sub([a]))
            shape = [1] * grid.dim
            shape[a] = grid.N
            out = out * v.reshape(shape)
        return out


@dataclass(frozen=True)
class HyperplaneDecay:
    """``phi(x') / sqrt(1 + x_d^2)`` with a Gaussian profile ``phi`` of given width.

    Lies in every L^p, p > 1, but never decays inside a finite box, so it is
    sampled without the decay check.
    """

    profile_width: float = 1.0

    def values(self, grid: GridSpec) -> np.ndarray:
        X = grid.mesh()
        d = grid.dim
        prof = np.exp(-0.5 * sum(X[a] ** 2 for a in range(d - 1)) / self.profile_width**2)
        return prof / np.sqrt(1.0 + X[d - 1] ** 2)


@dataclass(frozen=True)
class Custom:
    """Arbitrary callable ``fn(*mesh) -> values``."""

    fn: Callable

    def values(self, grid: GridSpec) -> np.ndarray:
        return np.broadcast_to(self.fn(*grid.mesh()), grid.shape).astype(complex)


def sample(family, grid: GridSpec, decay_budget: Optional[float] = DECAY_BUDGET) -> Field:
    """Sample ``family`` on ``grid`` as a physical-side field.

    Raises :class:`DecayError` when the boundary modulus relative to the peak
    exceeds ``decay_budget``; pass ``None`` to skip the check.
    """
    f = physical(grid, family.values(grid))
    if decay_budget is not None and not isinstance(family, HyperplaneDecay):
        leak = boundary_decay(f)
        if leak > decay_budget:
            raise DecayError(f"{type(family).__name__} reaches {leak:.3g} of its peak at the box "
                             f"boundary (budget {decay_budget:.1g})")
    return f
