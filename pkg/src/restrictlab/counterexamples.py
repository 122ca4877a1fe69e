"""Failure families for flat surfaces.

Two constructions are measured:

* the hyperplane example ``h(x) = phi(x') / sqrt(1 + x_d^2)``, whose partial
  transform in ``x_d`` is infinite at ``xi_d = 0``;
* the flatness family ``h_R(x) = psi(R x_1, x_2 / R) f(x_3)`` in ``R^3`` with
  ``f(x) = 1/sqrt(1 + x^2)``: ``||h_R||_p`` does not depend on ``R`` while the
  trace of ``h_R^`` on ``M = {(xi, xi_2/|xi|)}`` grows like ``log R``.

The line transform ``f^(tau) = 2 K_0(|tau|)`` is computed by quadrature on
``[0, T]`` with the tail beyond ``T`` added in closed form from the
expansion ``(1 + x^2)^{-1/2} = 1/x - 1/(2 x^3) + O(x^{-5})``; ``K_0`` itself
is used only as a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from . import quadrature
from .families import Gaussian
from .norms import lp_norm
from .spectral import GridSpec, frequency, inverse_transform, make_grid, physical

LINE_CUTOFF = 512.0
LEAK_BUDGET = 1e-10


@dataclass
class CounterexampleReport:
    """Per-parameter lower bound, data norm and ratio, with a growth verdict."""

    params: np.ndarray
    lower_bounds: np.ndarray
    data_norms: np.ndarray
    ratios: np.ndarray
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if len(self.params) > 1 and not np.all(np.diff(self.params) > 0):
            raise ValueError("counterexample parameters must be strictly increasing")
        for name in ("lower_bounds", "data_norms", "ratios"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.params.shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {self.params.shape}")
            setattr(self, name, arr)

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.ratios) > 0))

    def increment_ratios(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        """``(v_{k+2} - v_{k+1}) / (v_{k+1} - v_k)``; tends to 1 under log growth on doublings."""
        return increment_ratios(self.ratios if values is None else values)


def increment_ratios(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return d[1:] / d[:-1]


def _check_increasing(values, what: str):
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) == 0 or not np.all(np.diff(v) > 0) or not np.all(v > 0):
        raise ValueError(f"{what} must be positive and strictly increasing (got {list(v)})")
    return v


# --- line transform of 1/sqrt(1 + x^2) -----------------------------------------

def _line_rule(T: float, panel: float = 2.0, n: int = 16):
    return quadrature.composite_gauss(0.0, T, n, min(panel, T))


def _tail(tau: np.ndarray, T: float) -> np.ndarray:
    """``int_T^inf cos(tau x) (1/x - 1/(2x^3)) dx``."""
    z = tau * T
    _, ci = special.sici(z)
    cube = np.cos(z) / (2 * T**2) - tau * np.sin(z) / (2 * T) + tau**2 * ci / 2
    return -ci - cube / 2


def inverse_sqrt_transform(tau, cutoff: float = LINE_CUTOFF) -> np.ndarray:
    """Transform of ``1/sqrt(1 + x^2)`` at ``tau != 0`` (infinite at 0)."""
    tau = np.abs(np.atleast_1d(np.asarray(tau, dtype=float)))
    out = np.full(tau.shape, np.inf)
    nz = tau > 0
    t = tau[nz]
    if t.size:
        # keep each panel under about one oscillation of cos(tau x)
        x, w = _line_rule(cutoff, panel=min(2.0, 2 * np.pi / t.max()))
    body = np.empty(t.shape)
    for s in range(0, len(t), 4096):
        blk = t[s:s + 4096]
        body[s:s + 4096] = np.cos(np.multiply.outer(blk, x)) @ (w / np.sqrt(1 + x**2))
    out[nz] = 2 * (body + _tail(t, cutoff))
    return out


def line_lp_norm(p: float) -> float:
    """``|| (1 + x^2)^{-1/2} ||_{L^p(R)}`` for ``p > 1``."""
    if not p > 1:
        raise ValueError(f"1/sqrt(1+x^2) is in L^p only for p > 1 (got {p})")
    val, _ = integrate.quad(lambda x: (1 + x * x) ** (-p / 2), 0, np.inf, epsabs=1e-14, epsrel=1e-12)
    return float((2 * val) ** (1 / p))


# --- hyperplane ------------------------------------------------------------------

def truncated_line_integral(T: float, xi: float = 0.0) -> float:
    """``int_{-T}^{T} e^{-i xi x} / sqrt(1 + x^2) dx`` by composite Gauss-Legendre."""
    if not T > 0:
        raise ValueError(f"truncation must be positive (got {T})")
    x, w = quadrature.composite_gauss(0.0, T, 16, min(2.0, T))
    return float(2 * (w * np.cos(xi * x) / np.sqrt(1 + x**2)).sum())


def hyperplane_failure(phi: Optional[Gaussian] = None, truncations: Sequence[float] = tuple(2.0**k for k in range(1, 9)),
                       p_values: Sequence[float] = (1.5, 2.0), grid: Optional[GridSpec] = None,
                       probe: float = 1.0) -> CounterexampleReport:
    """Truncated transforms of ``h = phi(x') / sqrt(1 + x_d^2)`` at ``xi_d = 0``, ``d = 2``.

    ``lower_bounds`` holds ``||phi||_2 int_{|x_d| <= T} f``, the ``L^2(dx')`` norm of
    the truncated partial transform; ``data_norms`` holds ``||h||_2`` and
    ``ratios`` their quotient.  ``extra`` records the line integrals, ``||h||_p``
    for each of ``p_values``, and at ``xi_d = probe`` both the sharply
    truncated transform (converging like ``1/T``) and the tail-corrected one.
    """
    Ts = _check_increasing(truncations, "truncations")
    phi = Gaussian() if phi is None else phi
    grid = make_grid(1, 256, 16.0) if grid is None else grid
    if grid.dim != 1:
        raise ValueError("hyperplane profile lives on R^1 for d = 2")
    pf = physical(grid, phi.values(grid))
    line = np.array([truncated_line_integral(T) for T in Ts])
    norms = {p: lp_norm(pf, p) * line_lp_norm(p) for p in p_values}
    phi2 = lp_norm(pf, 2.0)
    h2 = phi2 * line_lp_norm(2.0)
    lower = phi2 * line
    sharp = np.array([truncated_line_integral(T, probe) for T in Ts])
    corrected = np.array([inverse_sqrt_transform(probe, cutoff=T)[0] for T in Ts])
    return CounterexampleReport(Ts, lower, np.full(len(Ts), h2), lower / h2,
                                extra={"line_integrals": line, "lp_norms": norms,
                                       "probe": probe, "probe_sharp": sharp, "probe_values": corrected})


# --- flatness family ----------------------------------------------------------------

@dataclass(frozen=True)
class WedgeProfile:
    """Gaussian spectrum centred inside ``{|xi_1| <= 1, |xi_2| <= |xi_1|}``, masked to it."""

    center: tuple = (0.6, 0.0)
    sigma: float = 0.05

    def raw(self, xi1, xi2):
        c1, c2 = self.center
        return np.exp(-((xi1 - c1) ** 2 + (xi2 - c2) ** 2) / (2 * self.sigma**2))

    @staticmethod
    def inside(xi1, xi2):
        return (np.abs(xi1) <= 1) & (np.abs(xi2) <= np.abs(xi1))

    def spectrum(self, xi1, xi2):
        return np.where(self.inside(xi1, xi2), self.raw(xi1, xi2), 0.0)

    def leakage(self, n: int = 801, reach: float = 14.0) -> float:
        """Fraction of ``|psi^|^2`` the mask removes, on a local fine grid."""
        c1, c2 = self.center
        s = np.linspace(-reach, reach, n) * self.sigma
        X1, X2 = np.meshgrid(c1 + s, c2 + s, indexing="ij")
        m = self.raw(X1, X2) ** 2
        return float(m[~self.inside(X1, X2)].sum() / m.sum())

    def box(self, reach: float = 10.0):
        """Rectangle holding the spectrum up to ``exp(-reach^2 / 2)``."""
        c1, c2 = self.center
        r = reach * self.sigma
        return (c1 - r, c1 + r), (c2 - r, c2 + r)


def flatness_grid() -> GridSpec:
    """Fixed grid resolving ``psi_R`` for ``R`` in ``[2, 32]`` with the default profile."""
    return make_grid(2, 2048, (96.0, 6000.0))


def _psi_R_physical(profile: WedgeProfile, R: float, grid: GridSpec):
    X1, X2 = grid.mesh("frequency")
    spec = profile.spectrum(X1 / R, R * X2)
    return inverse_transform(frequency(grid, spec.astype(complex))), spec


def _trace_norm(profile: WedgeProfile, R: float, q: float, n: int, with_line: bool) -> float:
    """``|| psi_R^(xi) f^(xi_2/|xi|) ||_{L^q(dxi)}`` (without ``f^`` if ``with_line`` is false).

    Tensor rule: Gauss-Legendre in ``xi_1``, endpoint-singular rule on each
    side of the line ``xi_2 = 0`` where ``f^`` has its logarithmic singularity.
    """
    (a1, b1), (a2, b2) = profile.box()
    x1, w1 = quadrature.gauss_legendre(R * a1, R * b1, n)
    ups, wu = quadrature.singular_endpoint(0.0, b2 / R, n)
    dns, wd = quadrature.singular_endpoint(0.0, a2 / R, n)
    x2, w2 = np.concatenate([ups, dns]), np.concatenate([wu, wd])
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    W = np.outer(w1, w2)
    vals = np.abs(profile.spectrum(X1 / R, R * X2)) ** q
    if with_line:
        tau = X2 / np.hypot(X1, X2)
        vals = vals * inverse_sqrt_transform(tau.ravel()).reshape(tau.shape) ** q
    return float((W * vals).sum() ** (1 / q))


def m_flatness_family(profile: Optional[WedgeProfile] = None,
                      R_values: Sequence[float] = (2, 4, 8, 16, 32), p: float = 1.5, q: float = 2.0,
                      grid: Optional[GridSpec] = None, nodes: int = 96) -> CounterexampleReport:
    """Divergence of the ``M`` trace along ``h_R`` in ``R^3`` (``d = 2``).

    Per ``R``: ``||h_R||_p = ||psi_R||_p ||f||_p`` with ``psi_R`` sampled on a
    fixed grid from its masked spectrum; the lower bound
    ``inf_{|tau| <= 1/R} |f^(tau)| ||psi^||_q``; and the trace norm computed
    directly.  ``ratios`` are trace norm over ``||h_R||_p``.
    """
    profile = WedgeProfile() if profile is None else profile
    Rs = _check_increasing(R_values, "R values")
    if not p > 1:
        raise ValueError(f"p must exceed 1 (got {p})")
    leak = profile.leakage()
    if leak > LEAK_BUDGET:
        raise ValueError(f"profile spectrum leaks {leak:.3e} of its mass outside the wedge")
    grid = flatness_grid() if grid is None else grid
    f_p = line_lp_norm(p)
    psi_hat_q = _trace_norm(profile, 1.0, q, nodes, with_line=False)
    psi_p, traces, direct_q, lower, support = [], [], [], [], []
    for R in Rs:
        psi, spec = _psi_R_physical(profile, R, grid)
        psi_p.append(lp_norm(psi, p))
        X1, X2 = grid.mesh("frequency")
        outside = ~((np.abs(X1) <= R) & (np.abs(X2) <= np.abs(X1) / R**2))
        support.append(float((np.abs(spec[outside]) ** 2).sum() / (np.abs(spec) ** 2).sum()))
        taus = np.linspace(0.0, 1.0 / R, 65)[1:]
        lower.append(float(inverse_sqrt_transform(taus).min()) * psi_hat_q)
        traces.append(_trace_norm(profile, R, q, nodes, with_line=True))
        direct_q.append(_trace_norm(profile, R, q, nodes, with_line=False))
    data = np.asarray(psi_p) * f_p
    traces = np.asarray(traces)
    return CounterexampleReport(Rs, lower, data, traces / data,
                                extra={"trace_norms": traces, "psi_R_hat_q": np.asarray(direct_q),
                                       "psi_hat_q": psi_hat_q, "psi_R_p": np.asarray(psi_p),
                                       "line_p": f_p, "leakage": leak,
                                       "outside_T_R": np.asarray(support), "p": p, "q": q})
