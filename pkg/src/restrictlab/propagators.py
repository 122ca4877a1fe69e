"""Dispersive semigroups and Strichartz ratios in dual form.

Three evolutions are provided on the periodic grid:

* the wave equation ``u_tt = lap u`` through its half-wave decomposition
  ``u(t) = F^{-1}(e^{it|xi|} gamma_+ + e^{-it|xi|} gamma_-)``, each half
  realised as an extension from the cone ``tau = +-|xi|``;
* the scalar rotating semigroups ``exp(+-i t D_3/|D|)``.

Strichartz ratios accumulate the space-time norm snapshot by snapshot, so
the ``(M, N, ..., N)`` space-time array is never formed.  Time integrals use
the trapezoid rule on ``[0, T]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .chains import RatioEstimate
from .norms import exponent_profile, sobolev_norm
from .spectral import Field, GridSpec, forward_transform, frequency, inverse_transform, physical
from .surfaces import ConeGraph, extension_operator

ZERO_MODE_TOL = 1e-12
TAIL_BUDGET = 0.01
TAIL_FRACTION = 0.1
SNAPSHOTS = 256


class WindowError(ValueError):
    """The last part of the time window carries too much of the norm."""

    def __init__(self, tail: float, budget: float):
        self.tail = tail
        self.budget = budget
        super().__init__(f"window too short: tail fraction {tail:.3e} exceeds budget {budget:.3e}")


# --- data types ---------------------------------------------------------------

@dataclass(frozen=True)
class WaveData:
    """Position ``f`` and velocity ``g`` of a wave on a shared grid."""

    f: Field
    g: Field

    def __post_init__(self):
        if self.f.grid != self.g.grid:
            raise ValueError("wave data f and g must share a grid")
        if not (self.f.is_physical and self.g.is_physical):
            raise ValueError("wave data must be physical-side fields")

    @property
    def grid(self) -> GridSpec:
        return self.f.grid


@dataclass(frozen=True)
class SpaceTimeField:
    """Snapshots ``u(t_k, .)`` on a uniform time grid."""

    times: np.ndarray
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.times),) + self.grid.shape:
            raise ValueError(f"snapshot array {self.values.shape} does not match "
                             f"{len(self.times)} times on a {self.grid.shape} grid")

    @property
    def window(self) -> float:
        return float(self.times[-1] - self.times[0])

    def __len__(self):
        return len(self.times)

    def snapshot(self, k: int) -> Field:
        return physical(self.grid, self.values[k])


@dataclass(frozen=True)
class StrichartzSpec:
    """Equation, space-time exponents and data Sobolev orders.

    ``orders`` holds ``(s_f,)`` for the rotating semigroup and ``(s_f, s_g)``
    for the wave equation, whose data norm is ``||f||_{H^s_f} + ||g||_{H^s_g}``.
    Construction checks scale balance: ``1/q + d/r = d/2 - s_f`` with
    ``s_g = s_f - 1`` for the wave equation, ``d/r = d/2 - s_f`` for the
    rotating semigroup (whose multiplier does not scale time).
    """

    equation: str
    q_t: float
    r_x: float
    orders: Tuple[float, ...]
    dim: int = 3

    def __post_init__(self):
        if self.equation not in ("wave", "rotating"):
            raise ValueError(f"equation must be 'wave' or 'rotating' (got {self.equation!r})")
        if not (self.q_t >= 1 and self.r_x >= 1):
            raise ValueError(f"exponents must be >= 1 (got q={self.q_t}, r={self.r_x})")
        d = self.dim
        if self.equation == "wave":
            if len(self.orders) != 2:
                raise ValueError("wave spec needs orders (s_f, s_g)")
            s_f, s_g = self.orders
            if abs(s_g - (s_f - 1)) > 1e-12:
                raise ValueError(f"wave data orders must differ by one (got {s_f}, {s_g})")
            gap = 1 / self.q_t + d / self.r_x - (d / 2 - s_f)
        else:
            if d != 3 or len(self.orders) != 1:
                raise ValueError("rotating spec lives on R^3 with a single order")
            gap = d / self.r_x - (d / 2 - self.orders[0])
        if abs(gap) > 1e-12:
            raise ValueError(f"exponents ({self.q_t}, {self.r_x}) with orders {self.orders} "
                             f"are not scale balanced (gap {gap:.3g})")

    @classmethod
    def rotating(cls, q_t: float = 6.0, r_x: float = 6.0) -> "StrichartzSpec":
        """Rotating semigroup; the default ``(6, 6)`` pairs with ``H^1`` data."""
        if 1 / q_t + 1 / r_x > 1 / 3 + 1e-12 or q_t < 6:
            raise ValueError(f"rotating exponents need 1/q + 1/r <= 1/3 and q >= 6 (got {q_t}, {r_x})")
        return cls("rotating", q_t, r_x, (1.5 - 3.0 / r_x,), 3)

    @classmethod
    def wave_restriction(cls, dim: int = 3) -> "StrichartzSpec":
        """``L^{p0'}_{t,x}`` against ``H^{1/2} x H^{-1/2}``."""
        p = float(exponent_profile(dim).p0_dual)
        return cls("wave", p, p, (0.5, -0.5), dim)

    @classmethod
    def wave_energy(cls, dim: int, q_t: float) -> "StrichartzSpec":
        """Energy data ``H^1 x L^2`` with ``1/q + d/r = d/2 - 1``."""
        inv_r = (Fraction(dim, 2) - 1 - 1 / Fraction(q_t).limit_denominator()) / dim
        if inv_r <= 0:
            raise ValueError(f"no spatial exponent balances q = {q_t} in dimension {dim}")
        return cls("wave", q_t, float(1 / inv_r), (1.0, 0.0), dim)


def time_grid(window: float, snapshots: int = SNAPSHOTS) -> np.ndarray:
    """Uniform nodes on ``[0, window]``."""
    if not window > 0:
        raise ValueError(f"time window must be positive (got {window})")
    if int(snapshots) != snapshots or snapshots < 3:
        raise ValueError(f"need at least 3 snapshots (got {snapshots})")
    return np.linspace(0.0, float(window), int(snapshots))


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("time grid must be one-dimensional with at least 2 nodes")
    dt = np.diff(times)
    w = np.zeros(len(times))
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


# --- evolutions -----------------------------------------------------------------

def _radius(grid: GridSpec) -> np.ndarray:
    return np.sqrt(sum(v**2 for v in grid.mesh("frequency")))


def _origin_index(grid: GridSpec):
    return tuple(n // 2 for n in grid.shape)


def gamma_decompose(data: WaveData) -> Tuple[Field, Field]:
    """Half-wave amplitudes ``gamma_+- = (f^ +- g^/(i|xi|))/2``.

    ``g^(0)`` must vanish.  At the origin the amplitudes are ``f^(0)/2``: the
    mean of ``f`` is a time-independent solution and splits evenly.
    """
    fh = forward_transform(data.f).values
    gh = forward_transform(data.g).values
    grid = data.grid
    o = _origin_index(grid)
    scale = max(np.abs(gh).max(), 1.0)
    if abs(gh[o]) > ZERO_MODE_TOL * scale:
        raise ValueError(f"velocity has a nonzero mean mode |g^(0)| = {abs(gh[o]):.3e}")
    r = _radius(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(r > 0, gh / (1j * r), 0.0)
    plus, minus = 0.5 * (fh + q), 0.5 * (fh - q)
    return frequency(grid, plus), frequency(grid, minus)


def _wave_snapshots(data: WaveData, times) -> Iterator[np.ndarray]:
    gp, gm = gamma_decompose(data)
    grid = data.grid
    r = _radius(grid)
    # the cone weight is 1/|xi|; multiplying by |xi| makes the extension exact
    dp, dm = frequency(grid, gp.values * r), frequency(grid, gm.values * r)
    up, down = ConeGraph(grid.dim, 1.0), ConeGraph(grid.dim, -1.0)
    o = _origin_index(grid)
    mean = (gp.values[o] + gm.values[o]) * float(np.prod(grid.dxi)) / (2 * np.pi) ** grid.dim
    for t in times:
        u = extension_operator(dp, up, t).values + extension_operator(dm, down, t).values
        yield u + mean


def _rotating_snapshots(u0: Field, times, sign: int) -> Iterator[np.ndarray]:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1 (got {sign})")
    if u0.dim != 3:
        raise ValueError(f"rotating semigroup acts on R^3 (got a {u0.dim}-D field)")
    if not u0.is_physical:
        raise ValueError("rotating_evolve expects physical-side data")
    grid = u0.grid
    uh = forward_transform(u0).values
    r = _radius(grid)
    xi3 = grid.mesh("frequency")[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        # origin mode frozen: multiplier 1 there
        m = np.where(r > 0, xi3 / r, 0.0)
    for t in times:
        yield inverse_transform(frequency(grid, uh * np.exp(1j * sign * t * m))).values


def _collect(gen, times, grid) -> SpaceTimeField:
    times = np.asarray(times, dtype=float)
    vals = np.empty((len(times),) + grid.shape, dtype=complex)
    for k, u in enumerate(gen):
        vals[k] = u
    return SpaceTimeField(times, grid, vals)


def wave_evolve(data: WaveData, times: Sequence[float]) -> SpaceTimeField:
    """Solve ``u_tt = lap u``, ``u(0) = f``, ``u_t(0) = g`` at ``times``."""
    return _collect(_wave_snapshots(data, times), times, data.grid)


def rotating_evolve(u0: Field, times: Sequence[float], sign: int = 1) -> SpaceTimeField:
    """Apply ``exp(sign i t D_3/|D|)`` to ``u0`` at each of ``times``."""
    return _collect(_rotating_snapshots(u0, times, sign), times, u0.grid)


# --- Strichartz ratios --------------------------------------------------------------

@dataclass
class _Accumulator:
    """Streams ``int ||u(t)||_r^q dt`` and ``int |u(t,x)|^q dt`` per point."""

    times: np.ndarray
    r_x: float
    q_t: float
    cell: float
    pointwise: bool = False
    profile: list = field(default_factory=list)
    inner: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weights = _trapezoid_weights(self.times)

    def add(self, k: int, u: np.ndarray):
        a = np.abs(u)
        self.profile.append(float((self.cell * (a**self.r_x).sum()) ** (1 / self.r_x)))
        if self.pointwise:
            term = self.weights[k] * a**self.q_t
            self.inner = term if self.inner is None else self.inner + term

    def time_norm(self) -> float:
        prof = np.asarray(self.profile)
        return float((self.weights * prof**self.q_t).sum() ** (1 / self.q_t))

    def tail(self) -> float:
        """Share of ``int ||u(t)||_r^q dt`` carried by the last tenth of the window."""
        prof = np.asarray(self.profile) ** self.q_t
        t = self.times
        cut = t[0] + (1 - TAIL_FRACTION) * (t[-1] - t[0])
        late = t >= cut
        w_late = _trapezoid_weights(t[late]) if late.sum() > 1 else np.zeros(late.sum())
        total = float((self.weights * prof).sum())
        return float((w_late * prof[late]).sum() / total) if total > 0 else 0.0


def _check_data(data, spec: StrichartzSpec):
    if spec.equation == "wave" and not isinstance(data, WaveData):
        raise ValueError("wave spec needs WaveData")
    if spec.equation == "rotating" and isinstance(data, WaveData):
        raise ValueError("rotating spec needs a single Field")


def _data_norm(data, spec: StrichartzSpec) -> float:
    if spec.equation == "wave":
        s_f, s_g = spec.orders
        return sobolev_norm(data.f, s_f) + sobolev_norm(data.g, s_g)
    return sobolev_norm(data, spec.orders[0])


def _degenerate(data) -> bool:
    fields = (data.f, data.g) if isinstance(data, WaveData) else (data,)
    return all(not np.any(fl.values) for fl in fields)


def default_window(data, spec: StrichartzSpec) -> float:
    """Time window used when none is given.

    The rotating multiplier is degree-zero homogeneous, so its window is a
    fixed multiple of the box.  Wave fronts travel at unit speed and reach
    the box face at ``t = L``; beyond that the periodic solution stops
    dispersing, so the wave window stops short of it.
    """
    grid = data.grid
    L = float(np.min(grid.L))
    return 8.0 * L if spec.equation == "rotating" else 0.75 * L


def _snapshots(data, spec: StrichartzSpec, times, sign: int):
    if spec.equation == "wave":
        return _wave_snapshots(data, times)
    return _rotating_snapshots(data, times, sign)


def strichartz_ratio(data, spec: StrichartzSpec, window: Optional[float] = None,
                     snapshots: int = SNAPSHOTS, tail_budget: float = TAIL_BUDGET,
                     sign: int = 1) -> RatioEstimate:
    """``||u||_{L^q_t L^r_x} / (data norm)`` over ``[0, window]``.

    Raises :class:`WindowError` when the last tenth of the window carries
    more than ``tail_budget`` of ``int ||u(t)||_r^q dt``.
    """
    _check_data(data, spec)
    if _degenerate(data):
        raise ValueError("degenerate input: zero data")
    grid = data.grid
    if spec.dim != grid.dim:
        raise ValueError(f"spec dimension {spec.dim} does not match the {grid.dim}-D data")
    T = default_window(data, spec) if window is None else float(window)
    times = time_grid(T, snapshots)
    acc = _Accumulator(times, spec.r_x, spec.q_t, float(np.prod(grid.dx)))
    for k, u in enumerate(_snapshots(data, spec, times, sign)):
        acc.add(k, u)
    tail = acc.tail()
    if tail > tail_budget:
        raise WindowError(tail, tail_budget)
    num, den = acc.time_norm(), _data_norm(data, spec)
    return RatioEstimate(T, num, den, num / den,
                         extra={"window": T, "snapshots": len(times), "tail": tail,
                                "spec": spec, "profile": np.asarray(acc.profile)})


def anisotropic_ratio(u0: Field, window: Optional[float] = None, snapshots: int = SNAPSHOTS,
                      tail_budget: float = TAIL_BUDGET, sign: int = 1) -> RatioEstimate:
    """``||u||_{L^6_x L^3_t} / ||u0||_{H^1}`` for the rotating semigroup.

    The time integral is taken first at every spatial point.  The reversed
    order ``L^3_t L^6_x`` from the same run is recorded in ``extra``; no
    inequality between the two is implied.
    """
    if _degenerate(u0):
        raise ValueError("degenerate input: zero data")
    spec = StrichartzSpec("rotating", 6.0, 6.0, (1.0,))
    T = default_window(u0, spec) if window is None else float(window)
    times = time_grid(T, snapshots)
    cell = float(np.prod(u0.grid.dx))
    acc = _Accumulator(times, 6.0, 3.0, cell, pointwise=True)
    for k, u in enumerate(_rotating_snapshots(u0, times, sign)):
        acc.add(k, u)
    tail = acc.tail()
    if tail > tail_budget:
        raise WindowError(tail, tail_budget)
    space_time = space_outer_norm(acc.inner, cell, 6.0, 3.0)
    den = sobolev_norm(u0, 1.0)
    return RatioEstimate(T, space_time, den, space_time / den,
                         extra={"window": T, "snapshots": len(times), "tail": tail,
                                "time_outer": acc.time_norm() / den})


def space_outer_norm(inner_power_sum: np.ndarray, cell: float, r_outer: float, q_inner: float) -> float:
    """``|| (inner)^{1/q} ||_{L^r}`` from per-point sums ``int |u|^q dt``."""
    inner = np.asarray(inner_power_sum, dtype=float) ** (1.0 / q_inner)
    return float((cell * (inner**r_outer).sum()) ** (1.0 / r_outer))


def gaussian_wave_data(grid: GridSpec, width: float = 1.0, lam: float = 1.0) -> WaveData:
    """``(f(x/lam), g(x/lam)/lam)`` with ``f = exp(-|x|^2/(2 w^2))`` and ``g = -(x_1/w) f``.

    ``g`` is odd, so its mean vanishes.  Under this family
    ``u_lam(t, x) = u(t/lam, x/lam)``; paired with the window ``lam T`` it
    leaves scale-balanced ratios unchanged.
    """
    if not (width > 0 and lam > 0):
        raise ValueError(f"width and dilation must be positive (got {width}, {lam})")
    w = width * lam
    X = grid.mesh()
    G = np.exp(-sum(x**2 for x in X) / (2 * w * w))
    return WaveData(physical(grid, G.astype(complex)), physical(grid, (-X[0] / w * G / lam).astype(complex)))
