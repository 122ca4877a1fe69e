"""Level-set chains for the surfaces ``M`` and ``M_F`` over ``R^3``.

Both surfaces are graphs ``tau = mu(xi)`` of degree-zero homogeneous
functions.  Freezing ``mu`` and solving for ``xi_3`` turns each level set into
a cone over the horizontal plane, so the trace energy becomes a
``mu``-integral of cone traces of the slices ``x -> f`(x, mu)``:

    M:    dxi/|xi|^2 = dmu dxi_h / (|xi_h| sqrt(1 - mu^2)),
          slope mu / sqrt(1 - mu^2)
    M_F:  dxi/|xi|^2 = mu dmu dxi_h / (|xi_h| sqrt(1 - mu^2) sqrt(mu^2 - F^-2)),
          slope sqrt((mu^2 - F^-2) / (1 - mu^2)),  xi_3 > 0

The chains then bound each cone trace by the cone estimate, exchange norms
by Minkowski, split the ``mu``-line at its singular points, dominate the
weights pointwise, and finish with a one-dimensional Sobolev embedding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import quadrature
from .chains import (ALGEBRAIC_TOL, ESTIMATED, IDENTITY, INFO, LITERAL, ChainReport, ChainStep, safe_ratio)
from .norms import lp_norm, sobolev_norm_along_axis
from .spectral import Field, GridSpec, last_axis_spectrum, phase_matrix, physical
from .surfaces import ConeGraph, MFGraph, MGraph, restrict_physical, trace_lq_norm

P = 6.0 / 5.0
S = -1.0 / 3.0
F_WINDOW = (1.05, 20.0)
_SCAN = 20001


# --- Jacobians ------------------------------------------------------------------

@dataclass(frozen=True)
class JacobianCheck:
    xi3: float
    dxi3_dmu: float
    norm_sq: float
    mu_recovered: float
    fd_derivative: float

    @property
    def derivative_error(self) -> float:
        return abs(self.fd_derivative - self.dxi3_dmu) / abs(self.dxi3_dmu)


def _fd_inverse(mu_of_xi3: Callable[[float], float], xi3: float, scale: float) -> float:
    """``1 / (dmu/dxi3)`` by a Richardson-extrapolated centred difference.

    The level functions are homogeneous of degree 0, so the step is taken
    relative to ``scale = |xi|``.
    """
    h = 1e-3 * scale
    d1 = (mu_of_xi3(xi3 + h) - mu_of_xi3(xi3 - h)) / (2 * h)
    d2 = (mu_of_xi3(xi3 + h / 2) - mu_of_xi3(xi3 - h / 2)) / h
    return 1.0 / ((4 * d2 - d1) / 3)


def jacobian_check_M(xi_h, mu: float) -> JacobianCheck:
    """``xi_3``, ``dxi_3/dmu`` and ``|xi|^2`` on the level set ``xi_3/|xi| = mu``."""
    r = float(np.linalg.norm(xi_h))
    if not abs(mu) < 1:
        raise ValueError(f"level mu must satisfy |mu| < 1 (got {mu})")
    if r == 0:
        raise ValueError("horizontal frequency must be nonzero")
    c = 1.0 - mu * mu
    xi3 = mu * r / np.sqrt(c)
    deriv = r * c ** -1.5
    norm_sq = r * r / c
    level = lambda z: z / np.sqrt(r * r + z * z)
    return JacobianCheck(xi3, deriv, norm_sq, level(xi3), _fd_inverse(level, xi3, np.sqrt(norm_sq)))


def jacobian_check_MF(xi_h, mu: float, F: float) -> JacobianCheck:
    """Same quantities on the level set ``|xi|_F / (F |xi|) = mu`` with ``xi_3 > 0``."""
    r = float(np.linalg.norm(xi_h))
    if not F > 1:
        raise ValueError(f"F must exceed 1 (got {F})")
    if not 1.0 / F < mu < 1.0:
        raise ValueError(f"level mu must lie in (1/F, 1) = ({1 / F:.6g}, 1) (got {mu})")
    if r == 0:
        raise ValueError("horizontal frequency must be nonzero")
    e = F**-2
    c, q = 1.0 - mu * mu, mu * mu - e
    xi3 = np.sqrt(q / c) * r
    deriv = mu * (1 - e) * c ** -1.5 * q ** -0.5 * r
    norm_sq = r * r * (1 - e) / c
    level = lambda z: np.sqrt(r * r + F * F * z * z) / (F * np.sqrt(r * r + z * z))
    return JacobianCheck(xi3, deriv, norm_sq, level(xi3), _fd_inverse(level, xi3, np.sqrt(norm_sq)))


# --- mu quadrature ---------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """Interval with a singular end ``centre`` and the other end ``far``.

    On the piece the level weight is dominated by ``constant * nu^{-power}``
    with ``nu = |mu - centre|``.
    """

    centre: float
    far: float
    constant: float = 1.0
    power: float = 1.0 / 3.0

    def nodes(self, n: int):
        return quadrature.singular_endpoint(self.centre, self.far, n)

    def nu(self, mu):
        return np.abs(mu - self.centre)


def _graded(c: float, near: float, far: float, n: int):
    """Gauss rule on the interval between ``near`` and ``far`` graded towards ``c``.

    Uses ``x = c + (far - c) s^6`` with ``s`` between ``((near - c)/(far - c))^{1/6}``
    and 1; ``near = c`` gives :func:`quadrature.singular_endpoint`.
    """
    k = quadrature.SINGULAR_POWER
    s0 = ((near - c) / (far - c)) ** (1.0 / k)
    t, w = quadrature.gauss_legendre(s0, 1.0, n)
    return c + (far - c) * t**k, w * abs(far - c) * k * t ** (k - 1)


def _complement(centre: float, pieces: Sequence[Piece], tmax: float, n: int, panel: float):
    """Nodes on ``[-tmax, tmax]`` minus the pieces sharing ``centre``.

    Within unit distance of ``centre`` the nodes are graded towards it, so
    that ``|mu - centre|^{-2/3}`` is resolved whether or not the interval
    touches the singular point.
    """
    own = [p for p in pieces if p.centre == centre]
    lo = min(min(p.centre, p.far) for p in own)
    hi = max(max(p.centre, p.far) for p in own)
    xs, ws = [], []
    for a, b in ((-tmax, lo), (hi, tmax)):
        if b <= a:
            continue
        near, other = (b, a) if abs(b - centre) < abs(a - centre) else (a, b)
        if abs(near - centre) < 1.0:
            step = np.sign(other - near) * min(1.0, abs(other - near))
            mid = near + step
            x1, w1 = _graded(centre, near, centre + (mid - centre), n)
            xs.append(x1)
            ws.append(w1)
            x2, w2 = quadrature.composite_gauss(min(mid, other), max(mid, other), n, panel)
        else:
            x2, w2 = quadrature.composite_gauss(a, b, n, panel)
        xs.append(x2)
        ws.append(w2)
    return np.concatenate(xs), np.concatenate(ws)


def _scan_constant(weight: Callable, piece: Piece) -> float:
    """``sup weight(mu) * nu^{power}`` over the piece by a dense interior scan."""
    t = np.linspace(0, 1, _SCAN)[1:-1]
    mu = piece.centre + (piece.far - piece.centre) * t
    return float(np.max(weight(mu) * piece.nu(mu) ** piece.power))


def _with_constants(weight: Callable, pieces: Sequence[Piece]) -> List[Piece]:
    """Scanned constants, shared by pieces with a common centre."""
    raw = [_scan_constant(weight, p) for p in pieces]
    out = []
    for p in pieces:
        c = max(r for q, r in zip(pieces, raw) if q.centre == p.centre)
        out.append(Piece(p.centre, p.far, c, p.power))
    return out


# --- chain engine ----------------------------------------------------------------

def _agg(X: np.ndarray, cell: float) -> float:
    """``|| X^{1/2} ||_{L^{6/5}}^2`` for per-point energies ``X``."""
    return float((cell * (np.maximum(X, 0.0) ** (P / 2)).sum()) ** (2 / P))


def _level_energies(f: Field, mus: np.ndarray, slope: Callable, chunk: int = 16):
    """Per level: cone trace energy ``K`` and ``||f`(., mu)||_{6/5}^2``, plus the slices' energies.

    Yields ``(index, K, A2, |f`|^2)``.
    """
    sub = f.grid.sub(range(f.dim - 1))
    for start in range(0, len(mus), chunk):
        block = last_axis_spectrum(f, mus[start:start + chunk])
        for j in range(block.shape[-1]):
            k = start + j
            g = physical(sub, block[..., j])
            rho = slope(mus[k])
            if rho == 0:
                raise ValueError("level with zero cone slope")
            K = trace_lq_norm(restrict_physical(g, ConeGraph(2, rho), outside="drop"), 2) ** 2
            yield k, K, lp_norm(g, P) ** 2, np.abs(block[..., j]) ** 2


def _line_energy(f: Field, mus, ws, weight) -> np.ndarray:
    """``sum_j w_j weight(mu_j) |f`(., mu_j)|^2`` through one Gram matrix."""
    g = f.grid
    E = phase_matrix(g.x(f.dim - 1), mus)
    c = np.asarray(ws) * weight(np.asarray(mus)) * g.dx[f.dim - 1] ** 2
    gram = E.T @ (c[:, None] * E.conj())
    flat = f.values.reshape(-1, g.N)
    acc = np.einsum("ij,ij->i", flat @ gram, flat.conj()).real
    return acc.reshape(g.shape[:-1])


def _modulated(f: Field, c: float) -> Field:
    x = f.grid.x(f.dim - 1)
    return Field(f.grid, f.values * np.exp(-1j * c * x))


def _run_level_chain(name, f, pieces, level_weight, step2_weight, slope, direct_value, n, params,
                     pre_steps=(), stated_steps=(), scale=1.0):
    """Shared replay for ``M`` and ``M_F``.

    ``level_weight`` is the change-of-variables density multiplying the cone
    trace, ``step2_weight`` the weight after the cone estimate.
    """
    grid = f.grid
    cell = float(np.prod(grid.dx[:-1]))
    tmax = float(grid.xi_max[-1]) * (1 - 1e-9)
    panel = 0.5

    mus, ws, owner = [], [], []
    for i, pc in enumerate(pieces):
        x, w = pc.nodes(n)
        mus.append(x)
        ws.append(w)
        owner.append(np.full(n, i))
    mus, ws, owner = np.concatenate(mus), np.concatenate(ws), np.concatenate(owner)

    decomposed = 0.0
    weighted = 0.0
    X = np.zeros(grid.shape[:-1])
    Y = np.zeros_like(X)
    Z = np.zeros_like(X)
    for k, K, A2, E in _level_energies(f, mus, slope):
        pc = pieces[owner[k]]
        nu = pc.nu(mus[k])
        decomposed += ws[k] * level_weight(mus[k]) * K
        weighted += ws[k] * step2_weight(mus[k]) * A2
        X += ws[k] * step2_weight(mus[k]) * E
        Y += ws[k] * pc.constant * nu ** (-pc.power) * E
        Z += ws[k] * pc.constant * nu ** (-2.0 / 3.0) * E

    # pointwise domination on every node and on a dense scan
    node_ratio = max(step2_weight(m) / (pieces[o].constant * pieces[o].nu(m) ** (-pieces[o].power))
                     for m, o in zip(mus, owner))
    nu_max = max(abs(p.far - p.centre) for p in pieces)

    # full lines around every centre: own pieces plus complement
    Zfull = Z.copy()
    Zgrid = np.zeros_like(X)
    for c in sorted({p.centre for p in pieces}):
        const = next(p.constant for p in pieces if p.centre == c)
        xc, wc = _complement(c, pieces, tmax, n, panel)
        Zfull += const * _line_energy(f, xc, wc, lambda m, c=c: np.abs(m - c) ** (-2.0 / 3.0))
        norms = sobolev_norm_along_axis(_modulated(f, c), f.dim - 1, S)
        Zgrid += const * np.asarray(norms.values).real ** 2

    data = lp_norm(f, P) ** 2
    steps = list(pre_steps) + [
        ChainStep("level-decomposition", IDENTITY, direct_value, decomposed,
                  "level sets of mu are cones; change of variables in xi_3"),
        ChainStep("cone-restriction", ESTIMATED, decomposed, weighted,
                  "cone estimate at each level with slope |rho|^{-1/3}"),
        ChainStep("minkowski", LITERAL, weighted, _agg(X, cell), "L^2_mu L^{6/5}_x -> L^{6/5}_x L^2_mu"),
        ChainStep("pointwise-domination", LITERAL, node_ratio, 1.0,
                  "weight <= C_I nu^{-power_I} on every node of each piece"),
        ChainStep("split-domination", LITERAL, _agg(X, cell), _agg(Y, cell),
                  "split at the singular points, weights dominated piecewise"),
        ChainStep("nu-power", LITERAL, _agg(Y, cell), _agg(Z, cell),
                  "nu^{-1/3} <= nu^{-2/3} for 0 < nu <= 1"),
        ChainStep("nu-range", LITERAL, nu_max, 1.0, "every piece has nu <= 1"),
        ChainStep("full-line", LITERAL, _agg(Z, cell), _agg(Zfull, cell),
                  "each piece extended to the whole line"),
        ChainStep("sobolev-identity", IDENTITY, _agg(Zfull, cell), _agg(Zgrid, cell),
                  "|mu - c|^{-2/3} integral equals the H^{-1/3} norm of the modulated slice"),
        ChainStep("sobolev-embedding", ESTIMATED, _agg(Zgrid, cell), data,
                  "L^{6/5}(R) into H^{-1/3}(R) per slice"),
    ] + list(stated_steps)
    c2 = next(s for s in steps if s.label == "cone-restriction").constant
    c7 = next(s for s in steps if s.label == "sobolev-embedding").constant
    params = dict(params, mu_nodes=len(mus), piece_constants=[p.constant for p in pieces])
    return ChainReport(name, steps, lhs=float(np.sqrt(scale * direct_value)), rhs=float(np.sqrt(data)),
                       chain_constant=float(np.sqrt(scale * c2 * c7)), params=params)


# --- M -----------------------------------------------------------------------

def _m_weight(mu):
    return np.abs(mu) ** (-1.0 / 3.0) * (1 - mu * mu) ** (-1.0 / 3.0)


def verify_M_chain(f: Field, n: int = 16, strict: bool = True) -> ChainReport:
    """Replay of ``||f^|_M||_{L^2(dxi/|xi|^2)} <= C ||f||_{L^{6/5}(R^4)}``.

    The level line is split at ``mu = +-1/2``; per-piece domination constants
    are scanned and recorded next to the closed form ``(3/4)^{-1/3}``.
    """
    if f.dim != 4:
        raise ValueError("M chain needs a field over R^4")
    pieces = _with_constants(_m_weight, [Piece(0.0, 0.5), Piece(0.0, -0.5), Piece(1.0, 0.5), Piece(-1.0, -0.5)])
    direct = trace_lq_norm(restrict_physical(f, MGraph(), outside="drop"), 2) ** 2
    stated = [ChainStep("stated-domination-constant", INFO, max(p.constant for p in pieces),
                        0.75 ** (-1.0 / 3.0), "scanned sup against (3/4)^{-1/3}")]
    report = _run_level_chain(
        "M", f, pieces,
        level_weight=lambda m: (1 - m * m) ** -0.5,
        step2_weight=_m_weight,
        slope=lambda m: m / np.sqrt(1 - m * m),
        direct_value=direct, n=n, params={}, stated_steps=stated)
    return report.check() if strict else report


# --- M_F -----------------------------------------------------------------------

def verify_MF_chain(f: Field, F: float, n: int = 16, strict: bool = True) -> ChainReport:
    """Replay of the ``M_F`` bound on the half surface ``xi_3 > 0``.

    The final constant covers the full surface (twice the half surface for
    data even in ``x_3``).
    """
    lo, hi = F_WINDOW
    if not lo < F < hi:
        raise ValueError(f"F must lie in ({lo}, {hi}) (got {F})")
    if f.dim != 4:
        raise ValueError("M_F chain needs a field over R^4")
    e = F**-2
    a = 1.0 / F
    m = (F + 1) / (2 * F)

    def w2(mu):
        return mu * (1 - mu * mu) ** (-1.0 / 3.0) * np.abs(mu * mu - e) ** (-2.0 / 3.0)

    # near 1/F the weight already carries nu^{-2/3}; near 1 it carries (1 - mu)^{-1/3}
    pieces = _with_constants(w2, [Piece(a, m, power=2.0 / 3.0), Piece(1.0, m)])
    t = np.linspace(0, 1, _SCAN)[1:-1]
    mu_1 = m + (1 - m) * t
    stated_ineq = float(np.max((mu_1 - a) ** (-2.0 / 3.0)
                               / ((F / (F - 1)) ** (1.0 / 3.0) * (1 - mu_1) ** (-1.0 / 3.0))))

    trace = restrict_physical(f, MFGraph(F), outside="drop")
    x3 = trace.nodes[:, 2]
    v = trace.weights * np.abs(trace.values) ** 2
    full = float(v.sum())
    half_energy = float(v[x3 > 0].sum() + 0.5 * v[x3 == 0].sum())
    pre = [ChainStep("half-surface-symmetry", IDENTITY if _even_in(f, 2) else INFO, full, 2 * half_energy,
                     "surface symmetric under xi_3 -> -xi_3", tolerance=ALGEBRAIC_TOL)]
    stated = [
        ChainStep("stated-constant-near-1/F", INFO, pieces[0].constant, F / (F - 1) ** (1.0 / 3.0),
                  "scanned sup against F/(F-1)^{1/3}"),
        ChainStep("stated-inequality-near-1", INFO, stated_ineq, 1.0,
                  "sup of (mu-1/F)^{-2/3} / ((F/(F-1))^{1/3}(1-mu)^{-1/3}) on [(F+1)/2F, 1]"),
    ]
    report = _run_level_chain(
        "M_F", f, pieces,
        level_weight=lambda mu: mu * (1 - mu * mu) ** -0.5 * (mu * mu - e) ** -0.5,
        step2_weight=w2,
        slope=lambda mu: np.sqrt((mu * mu - e) / (1 - mu * mu)),
        direct_value=half_energy, n=n, params={"F": F, "split": m}, pre_steps=pre,
        stated_steps=stated, scale=2.0)
    return report.check() if strict else report


def _even_in(f: Field, axis: int) -> bool:
    """Whether samples are even in ``axis`` about 0 up to round-off (ignoring the unpaired node)."""
    v = np.moveaxis(f.values, axis, 0)[1:]
    scale = np.abs(v).max()
    return bool(scale == 0 or np.abs(v - v[::-1]).max() <= 1e-12 * scale)
