"""Uniform grids, continuum-normalised Fourier transforms and off-grid spectra.

Transform convention::

    f^(xi) = int e^{-i x.xi} f(x) dx,      f(x) = (2 pi)^{-d} int e^{i x.xi} f^(xi) dxi

A grid with ``N`` points per axis on ``[-L, L)`` has spacing ``dx = 2L/N`` and
frequency spacing ``dxi = pi/L``.  Frequency-side arrays are stored in
centred order, i.e. index ``k`` holds ``xi = (k - N/2) * dxi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

MAX_POINTS = 2**28
PHYSICAL = "physical"
FREQUENCY = "frequency"

# chunk size (complex entries) for direct trigonometric sums
_CHUNK = 2**22


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L_a, L_a)`` along each axis ``a``.

    ``half_extent`` may be a scalar (same box along every axis) or one value
    per axis; anisotropic boxes are what rescaling a single variable needs.
    """

    dim: int
    points_per_axis: int
    half_extent: tuple

    @property
    def N(self) -> int:
        return self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def L(self) -> np.ndarray:
        return np.asarray(self.half_extent, dtype=float)

    @property
    def dx(self) -> np.ndarray:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> np.ndarray:
        return np.pi / self.L

    @property
    def xi_max(self) -> np.ndarray:
        """Upper edge ``N dxi / 2`` of the frequency box on each axis."""
        return self.N * self.dxi / 2.0

    def x(self, axis: int) -> np.ndarray:
        return -self.L[axis] + self.dx[axis] * np.arange(self.N)

    def xi(self, axis: int) -> np.ndarray:
        return self.dxi[axis] * (np.arange(self.N) - self.N // 2)

    def mesh(self, side: str = PHYSICAL) -> list:
        axes = [self.x(a) if side == PHYSICAL else self.xi(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def sub(self, axes: Sequence[int]) -> "GridSpec":
        """Grid restricted to a subset of the axes."""
        axes = list(axes)
        return GridSpec(len(axes), self.N, tuple(float(self.L[a]) for a in axes))

    def rescaled(self, factors) -> "GridSpec":
        """Same point count, half extents multiplied by ``factors``."""
        f = np.broadcast_to(np.asarray(factors, dtype=float), (self.dim,))
        return GridSpec(self.dim, self.N, tuple(float(v) for v in self.L * f))


def make_grid(dim: int, N: int, L: Union[float, Sequence[float]]) -> GridSpec:
    """Build a :class:`GridSpec`, validating the memory guard and parity of N."""
    if int(dim) != dim or dim not in (1, 2, 3, 4):
        raise ValueError(f"dim must be one of 1, 2, 3, 4 (got {dim})")
    if int(N) != N or N < 8 or N % 2:
        raise ValueError(f"points_per_axis must be an even integer >= 8 (got {N})")
    if float(N) ** dim > MAX_POINTS:
        raise ValueError(f"points_per_axis**dim = {N}**{dim} exceeds the 2**28 guard")
    Ls = np.broadcast_to(np.asarray(L, dtype=float), (dim,))
    if np.any(~np.isfinite(Ls)) or np.any(Ls <= 0):
        raise ValueError(f"half_extent must be positive (got {L})")
    return GridSpec(int(dim), int(N), tuple(float(v) for v in Ls))


@dataclass(frozen=True, eq=False)
class Field:
    """Samples on a grid, tagged by which axes live on the frequency side.

    ``transformed`` lists the axes that have been Fourier transformed; a field
    with every axis transformed is frequency-side, with none physical-side.
    Partially transformed fields report ``side == "frequency"`` as well.
    """

    grid: GridSpec
    values: np.ndarray
    transformed: tuple = field(default=())

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "transformed", tuple(sorted(set(self.transformed))))

    @property
    def side(self) -> str:
        return FREQUENCY if self.transformed else PHYSICAL

    @property
    def is_physical(self) -> bool:
        return not self.transformed

    @property
    def is_frequency(self) -> bool:
        return len(self.transformed) == self.grid.dim

    @property
    def dim(self) -> int:
        return self.grid.dim

    def cell_volume(self) -> float:
        """Riemann cell volume: ``dxi`` on transformed axes, ``dx`` elsewhere."""
        vol = 1.0
        for a in range(self.dim):
            vol *= self.grid.dxi[a] if a in self.transformed else self.grid.dx[a]
        return float(vol)

    def __mul__(self, c):
        return replace(self, values=self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "Field"):
        if other.grid != self.grid or other.transformed != self.transformed:
            raise ValueError("fields live on different grids or sides")
        return replace(self, values=self.values + other.values)


def physical(grid: GridSpec, values) -> Field:
    return Field(grid, np.asarray(values, dtype=complex))


def frequency(grid: GridSpec, values) -> Field:
    return Field(grid, np.asarray(values, dtype=complex), tuple(range(grid.dim)))


def _sign(N: int) -> np.ndarray:
    # e^{i L xi_k} = (-1)^(k - N/2) because L xi_k = pi (k - N/2)
    return np.where((np.arange(N) - N // 2) % 2 == 0, 1.0, -1.0)


def _expand(vec: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = vec.size
    return vec.reshape(shape)


def _fft_axis(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    out = np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis)
    return out * _expand(_sign(grid.N) * grid.dx[axis], axis, values.ndim)


def _ifft_axis(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    vals = values * _expand(_sign(grid.N) / grid.dx[axis], axis, values.ndim)
    return np.fft.ifft(np.fft.ifftshift(vals, axes=axis), axis=axis)


def forward_transform(f: Field) -> Field:
    """Continuum-normalised transform of a physical-side field."""
    if not f.is_physical:
        raise ValueError("forward_transform expects a physical-side field")
    vals = f.values.astype(complex)
    for a in range(f.dim):
        vals = _fft_axis(vals, f.grid, a)
    return Field(f.grid, vals, tuple(range(f.dim)))


def inverse_transform(fhat: Field) -> Field:
    """Inverse of :func:`forward_transform`, including the ``(2 pi)^{-d}``."""
    if not fhat.is_frequency:
        raise ValueError("inverse_transform expects a frequency-side field")
    vals = fhat.values.astype(complex)
    for a in range(fhat.dim):
        vals = _ifft_axis(vals, fhat.grid, a)
    return Field(fhat.grid, vals)


def partial_transform(f: Field, axis: int) -> Field:
    """Transform along a single axis; the result records the transformed axes."""
    if not 0 <= axis < f.dim:
        raise ValueError(f"axis {axis} out of range for a {f.dim}-dimensional field")
    if axis in f.transformed:
        raise ValueError(f"axis {axis} is already on the frequency side")
    vals = _fft_axis(f.values.astype(complex), f.grid, axis)
    return Field(f.grid, vals, f.transformed + (axis,))


def partial_inverse(f: Field, axis: int) -> Field:
    if axis not in f.transformed:
        raise ValueError(f"axis {axis} is not on the frequency side")
    vals = _ifft_axis(f.values, f.grid, axis)
    return Field(f.grid, vals, tuple(a for a in f.transformed if a != axis))


def to_physical(f: Field) -> Field:
    out = f
    for a in f.transformed:
        out = partial_inverse(out, a)
    return out


def phase_matrix(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``E[p, j] = exp(-i xi_p x_j)``."""
    return np.exp(-1j * np.multiply.outer(np.asarray(xi, dtype=float), x))


def spectrum_at(f: Field, points) -> np.ndarray:
    """Band-limited spectrum of a physical-side field at arbitrary points.

    Direct trigonometric summation ``prod(dx) * sum_j f_j exp(-i x_j . xi)``,
    contracted one axis at a time.  ``points`` has shape ``(P, dim)``.
    """
    if not f.is_physical:
        raise ValueError("spectrum_at expects a physical-side field")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    grid = f.grid
    if pts.shape[1] != grid.dim:
        raise ValueError(f"points must have {grid.dim} coordinates")
    N, d = grid.N, grid.dim
    scale = float(np.prod(grid.dx))
    flat = f.values.reshape(N, -1)
    out = np.empty(len(pts), dtype=complex)
    step = max(1, _CHUNK // max(1, N ** (d - 1)))
    for start in range(0, len(pts), step):
        p = pts[start:start + step]
        acc = phase_matrix(grid.x(0), p[:, 0]) @ flat  # (P, N^(d-1))
        for a in range(1, d):
            acc = acc.reshape(len(p), N, -1)
            acc = np.einsum("pj,pjr->pr", phase_matrix(grid.x(a), p[:, a]), acc)
        out[start:start + step] = acc[:, 0] * scale
    return out


def _check_in_box(grid: GridSpec, pts: np.ndarray, axes=None):
    axes = range(grid.dim) if axes is None else axes
    for col, a in enumerate(axes):
        lim = grid.xi_max[a] * (1 + 1e-12)
        if np.any(np.abs(pts[:, col]) > lim):
            raise ValueError(f"point outside the frequency box |xi_{a}| <= {grid.xi_max[a]:.6g}")


def interpolate_spectrum(fhat: Field, point) -> Union[complex, np.ndarray]:
    """Evaluate a frequency-side field off the grid by trigonometric summation.

    Accepts a single point ``(dim,)`` or a batch ``(P, dim)``.  Grid nodes are
    reproduced up to round-off.
    """
    if not fhat.is_frequency:
        raise ValueError("interpolate_spectrum expects a frequency-side field")
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    _check_in_box(fhat.grid, pts)
    vals = spectrum_at(inverse_transform(fhat), pts)
    return complex(vals[0]) if single else vals


def spectrum_along_last(values: np.ndarray, grid: GridSpec, heights: np.ndarray) -> np.ndarray:
    """1-D band-limited spectrum along the last axis, one height per row.

    ``values`` has shape ``(M, N)`` (physical along the last axis), ``heights``
    shape ``(M,)``; returns ``dx * sum_j values[m, j] exp(-i x_j heights[m])``.
    """
    x = grid.x(grid.dim - 1)
    dx = grid.dx[grid.dim - 1]
    out = np.empty(values.shape[0], dtype=complex)
    step = max(1, _CHUNK // grid.N)
    for s in range(0, values.shape[0], step):
        E = phase_matrix(x, heights[s:s + step])
        out[s:s + step] = np.einsum("mj,mj->m", E, values[s:s + step]) * dx
    return out


def last_axis_spectrum(f: Field, taus) -> np.ndarray:
    """Partial transform in the last variable of a physical field at ``taus``.

    Returns shape ``grid.shape[:-1] + (len(taus),)``.
    """
    if not f.is_physical:
        raise ValueError("last_axis_spectrum expects a physical-side field")
    g = f.grid
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    flat = f.values.reshape(-1, g.N)
    out = (flat @ phase_matrix(g.x(g.dim - 1), taus).T) * g.dx[g.dim - 1]
    return out.reshape(g.shape[:-1] + (len(taus),))


def boundary_decay(f: Field) -> float:
    """Largest modulus on the box faces relative to the largest modulus overall."""
    vals = np.abs(f.values)
    peak = vals.max()
    if peak == 0:
        return 0.0
    worst = 0.0
    for a in range(f.dim):
        face = np.take(vals, [0, f.grid.N - 1], axis=a)
        worst = max(worst, float(face.max()))
    return worst / float(peak)


def _dilation_matrix(grid: GridSpec, axis: int, lam: float) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of axis samples at ``lam * x_j``.

    Targets outside the box are set to zero rather than wrapped.
    """
    x = grid.x(axis)
    xi = grid.xi(axis)
    t = lam * x
    # samples -> centred spectrum -> values at t
    fwd = phase_matrix(x, xi) * grid.dx[axis]
    back = np.exp(1j * np.multiply.outer(t, xi)) * grid.dxi[axis] / (2 * np.pi)
    M = back @ fwd
    M[np.abs(t) >= grid.L[axis]] = 0.0
    return M


def dilate(f: Field, factors) -> Field:
    """Band-limited resampling ``x -> f(lam * x)`` on the same grid.

    ``factors`` is a scalar or one factor per axis.  Points whose image falls
    outside the box read zero, so the input must decay there.
    """
    if not f.is_physical:
        raise ValueError("dilate expects a physical-side field")
    lam = np.broadcast_to(np.asarray(factors, dtype=float), (f.dim,))
    vals = f.values.astype(complex)
    for a in range(f.dim):
        if lam[a] == 1.0:
            continue
        M = _dilation_matrix(f.grid, a, float(lam[a]))
        vals = np.moveaxis(np.tensordot(M, np.moveaxis(vals, a, 0), axes=(1, 0)), 0, a)
    return Field(f.grid, vals)
