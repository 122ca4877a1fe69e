"""Step-by-step numerical replay of restriction inequality chains.

Each chain records, per step, a left and a right value.  Steps come in four
kinds:

``identity``
    two computations of the same quantity; passes when the relative gap is
    below the step tolerance.
``literal``
    an inequality that holds for the discrete sums themselves (Minkowski,
    pointwise weight domination); passes when ``left <= right`` up to a
    relative slack of ``1e-12``.
``estimated``
    an inequality with an unknown constant; the ratio ``left/right`` is
    recorded as the empirical constant.
``info``
    bookkeeping values with no pass/fail meaning.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import quadrature
from .norms import exponent_profile, lp_norm, sobolev_norm, sobolev_norm_along_axis
from .spectral import Field, GridSpec, dilate, forward_transform, last_axis_spectrum, physical, spectrum_at
from .surfaces import ConeGraph, Sphere, _contract, restrict_physical, restrict_to_surface, trace_lq_norm

IDENTITY, LITERAL, ESTIMATED, INFO = "identity", "literal", "estimated", "info"
CHAIN_TOL = 1e-2
ALGEBRAIC_TOL = 1e-10
SLACK = 1e-12


class ChainError(RuntimeError):
    """An identity or literal step failed; carries the step label and anchor."""

    def __init__(self, step: "ChainStep"):
        self.step = step
        super().__init__(f"chain step '{step.label}' failed ({step.anchor}): "
                         f"left={step.left:.6g} right={step.right:.6g}")


def safe_ratio(num: float, den: float) -> float:
    """``num/den`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return num / den


@dataclass
class ChainStep:
    label: str
    kind: str
    left: float
    right: float
    anchor: str = ""
    tolerance: Optional[float] = None

    @property
    def constant(self) -> float:
        return safe_ratio(self.left, self.right)

    @property
    def error(self) -> float:
        """Relative gap for identities, relative slack deficit for literals."""
        scale = max(abs(self.left), abs(self.right))
        if scale == 0:
            return 0.0
        if self.kind == IDENTITY:
            return abs(self.left - self.right) / scale
        return (self.left - self.right) / scale

    @property
    def ok(self) -> bool:
        if self.kind == IDENTITY:
            return self.error <= (self.tolerance if self.tolerance is not None else CHAIN_TOL)
        if self.kind == LITERAL:
            return self.error <= SLACK
        if self.kind == ESTIMATED:
            return bool(np.isfinite(self.constant))
        return True


@dataclass
class ChainReport:
    name: str
    steps: List[ChainStep]
    lhs: float
    rhs: float
    chain_constant: float
    params: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return safe_ratio(self.lhs, self.rhs)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)

    def step(self, label: str) -> ChainStep:
        for s in self.steps:
            if s.label == label:
                return s
        raise KeyError(label)

    def check(self) -> "ChainReport":
        for s in self.steps:
            if not s.ok:
                raise ChainError(s)
        return self


@dataclass
class RatioEstimate:
    param: float
    numerator: float
    denominator: float
    ratio: float
    compensated: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.denominator > 0:
            raise ValueError("ratio estimate with a non-positive denominator")


# --- polar decomposition of the cone -----------------------------------------

def _origin_rule(rmax: float, n_sing: int = 24, n_panel: int = 16, panels: int = 8):
    """Nodes on ``(0, rmax)`` resolving a ``r^{-k/6}`` singularity at 0."""
    a = rmax / 16.0
    xs, ws = quadrature.singular_endpoint(0.0, a, n_sing)
    xr, wr = quadrature.composite_gauss(a, rmax, n_panel, (rmax - a) / panels)
    return np.concatenate([xs, xr]), np.concatenate([ws, wr])


def _cone_rmax(grid: GridSpec) -> float:
    return float(min(grid.xi_max[:-1].min(), grid.xi_max[-1])) * (1 - 1e-9)


def _slices(f: Field, taus: np.ndarray, chunk: int = 32):
    """Yield ``(index, values)`` of ``x' -> f`(x', tau)`` for each tau."""
    for start in range(0, len(taus), chunk):
        block = last_axis_spectrum(f, taus[start:start + chunk])
        for j in range(block.shape[-1]):
            yield start + j, block[..., j]


def _sphere_energy(g: np.ndarray, sub: GridSpec, radius: float, nodes: int) -> float:
    """``int_{S_radius} |g^|^2 dsigma`` for physical samples ``g`` on ``sub``."""
    pts, w = quadrature.sphere_nodes(sub.dim, radius, nodes)
    vals = spectrum_at(physical(sub, g), pts)
    return float((w * np.abs(vals) ** 2).sum())


def _default_nodes(dim: int, N: int) -> int:
    return 4 * N if dim == 2 else min(4 * N, 64)


def polar_identity_check(f: Field, sphere_nodes: Optional[int] = None, rmax: Optional[float] = None):
    """Cone trace energy by the grid pathway and by integrating sphere energies.

    Returns ``(left, right, relative_error)`` with ``left`` the grid trace
    ``int |f^(xi, |xi|)|^2 dxi/|xi|`` and ``right`` the polar form
    ``int_0^inf int_{S_rho} |f^(xi, rho)|^2 dsigma drho / rho``.
    """
    d = f.dim - 1
    if d not in (2, 3):
        raise ValueError(f"polar identity needs a field over R^3 or R^4 (got dim {f.dim})")
    left = trace_lq_norm(restrict_physical(f, ConeGraph(d, 1.0), outside="drop"), 2) ** 2
    right = _polar_energy(f, sphere_nodes, rmax)
    return left, right, safe_ratio(abs(left - right), max(abs(left), abs(right)))


def _polar_energy(f: Field, sphere_nodes=None, rmax=None) -> float:
    d = f.dim - 1
    sub = f.grid.sub(range(d))
    nodes = sphere_nodes or _default_nodes(d, f.grid.N)
    r, w = _origin_rule(rmax or _cone_rmax(f.grid))
    total = 0.0
    for k, g in _slices(f, r):
        total += w[k] * _sphere_energy(g, sub, r[k], nodes) / r[k]
    return total


def verify_cone_chain(f: Field, sphere_nodes: Optional[int] = None, strict: bool = True) -> ChainReport:
    """Replay of the cone restriction bound ``||f^|_C||_2 <= C ||f||_{p0}``.

    ``f`` lives on ``R^{d+1}``, ``d`` in {2, 3}, with the last axis the cone
    axis.  Exponents come from :func:`exponent_profile`.
    """
    d = f.dim - 1
    if d not in (2, 3):
        raise ValueError(f"cone chain needs a field over R^3 or R^4 (got dim {f.dim})")
    prof = exponent_profile(d)
    p0, alpha, s = float(prof.p0), float(prof.alpha), float(prof.s)
    grid = f.grid
    sub = grid.sub(range(d))
    nodes = sphere_nodes or _default_nodes(d, grid.N)
    rmax = _cone_rmax(grid)
    r, w = _origin_rule(rmax)
    cell = float(np.prod(sub.dx))

    polar = 0.0       # int S(rho) drho / rho
    weighted = 0.0    # int rho^{2s} ||f`(., rho)||_{p0}^2 drho
    per_rho = []      # S(rho) / (rho^{2 alpha} ||f`||^2)
    half = np.zeros(sub.shape)
    for k, g in _slices(f, r):
        S = _sphere_energy(g, sub, r[k], nodes)
        A2 = lp_norm(physical(sub, g), p0) ** 2
        polar += w[k] * S / r[k]
        weighted += w[k] * r[k] ** (2 * s) * A2
        per_rho.append(safe_ratio(S, r[k] ** (2 * alpha) * A2))
        half += w[k] * r[k] ** (2 * s) * np.abs(g) ** 2
    full = half.copy()
    for k, g in _slices(f, -r):
        full += w[k] * r[k] ** (2 * s) * np.abs(g) ** 2

    def agg(X):
        # || X^{1/2} ||_{L^{p0}}^2
        return float((cell * (X ** (p0 / 2)).sum()) ** (2 / p0))

    minkowski_rhs = agg(half)
    full_line = agg(full)
    slice_norms = sobolev_norm_along_axis(f, d, s)
    grid_line = agg(np.asarray(slice_norms.values).real ** 2)
    data = lp_norm(f, p0) ** 2
    trace = trace_lq_norm(restrict_physical(f, ConeGraph(d, 1.0), outside="drop"), 2) ** 2

    steps = [
        ChainStep("polar-identity", IDENTITY, trace, polar,
                  "cone measure dxi/|xi| written as spheres S_rho with drho/rho"),
        ChainStep("sphere-restriction", ESTIMATED, polar, weighted,
                  "per-level sphere bound with the radius power rho^{2 alpha}"),
        ChainStep("minkowski", LITERAL, weighted, minkowski_rhs,
                  "exchange L^2_rho L^{p0}_x -> L^{p0}_x L^2_rho, p0 <= 2"),
        ChainStep("half-to-full-line", LITERAL, minkowski_rhs, full_line,
                  "rho^{2 alpha - 1} on rho > 0 dominated by |rho|^{2s} on R"),
        ChainStep("sobolev-identity", IDENTITY, full_line, grid_line,
                  "weighted rho-integral equals the per-slice homogeneous norm"),
        ChainStep("sobolev-embedding", ESTIMATED, grid_line, data,
                  "per-slice embedding L^{p0} into H^s, s = alpha - 1/2"),
    ]
    c2, c5 = steps[1].constant, steps[5].constant
    report = ChainReport("cone", steps, lhs=np.sqrt(trace), rhs=np.sqrt(data),
                         chain_constant=float(np.sqrt(c2 * c5)),
                         params={"d": d, "p0": p0, "s": s, "rho_nodes": len(r), "rho_max": rmax,
                                 "sphere_nodes": nodes,
                                 "sup_level_constant": float(max(per_rho) if per_rho else 0.0)})
    return report.check() if strict else report


# --- scaling sweeps -------------------------------------------------------------

def sphere_ratio(f: Field, radius: float, p: float, nodes: Optional[int] = None) -> RatioEstimate:
    """``||f^|_{S_R}||_2 / ||f||_p`` for one field and one radius."""
    fhat = forward_transform(f)
    num = trace_lq_norm(restrict_to_surface(fhat, Sphere(f.dim, radius, nodes)), 2)
    den = lp_norm(f, p)
    if den == 0:
        raise ValueError("degenerate input: zero field")
    return RatioEstimate(radius, num, den, num / den)


def sphere_scaling_sweep(members: Sequence[Field], radii: Sequence[float], nodes: Optional[int] = None):
    """Supremum over ``members`` of the sphere ratio at each radius.

    The compensated value is ``sup ratio(R) * R^{-alpha}``; the maximizing
    member index is stored in ``extra``.
    """
    if not members:
        raise ValueError("empty family")
    d = members[0].dim
    prof = exponent_profile(d)
    out = []
    for R in radii:
        best = None
        for i, f in enumerate(members):
            est = sphere_ratio(f, R, float(prof.p0), nodes)
            if best is None or est.ratio > best[1].ratio:
                best = (i, est)
        i, est = best
        est.compensated = est.ratio * R ** (-float(prof.alpha))
        est.extra = {"member": i, "at_edge": i in (0, len(members) - 1)}
        out.append(est)
    return out


def cone_ratio(f: Field, slope: float) -> RatioEstimate:
    """``||f^|_{C_rho}||_{L^2(dxi/|xi|)} / ||f||_{6/5}`` for a field over ``R^3``."""
    if slope == 0:
        raise ValueError("slope 0 is the hyperplane, not a cone")
    tr = restrict_physical(f, ConeGraph(f.dim - 1, slope), outside="drop")
    num = trace_lq_norm(tr, 2)
    den = lp_norm(f, float(exponent_profile(f.dim - 1).p0))
    if den == 0:
        raise ValueError("degenerate input: zero field")
    return RatioEstimate(slope, num, den, num / den)


def last_axis_family(f: Field, scales: Sequence[float]) -> List[Field]:
    """``f(x', x_last / b)`` for each ``b``, realized on last-axis rescaled grids."""
    out = []
    for b in scales:
        factors = np.ones(f.dim)
        factors[-1] = b
        out.append(Field(f.grid.rescaled(factors), f.values))
    return out


def cone_slope_sweep(members: Sequence[Field], slopes: Sequence[float]):
    """Supremum over ``members`` of the cone ratio, compensated by ``|rho|^alpha``.

    ``alpha = 1/6`` for cones over the plane.
    """
    if not members:
        raise ValueError("empty family")
    for rho in slopes:
        if rho == 0:
            raise ValueError("slope 0 is the hyperplane, not a cone")
    d = members[0].dim - 1
    prof = exponent_profile(d)
    # ratio(rho, f(., x/b)) = b^alpha ratio(b rho, f), so the sup scales like |rho|^{-alpha}
    power = float(prof.alpha)
    out = []
    for rho in slopes:
        ests = [cone_ratio(f, rho) for f in members]
        i = int(np.argmax([e.ratio for e in ests]))
        est = ests[i]
        est.compensated = est.ratio * abs(rho) ** power
        est.extra = {"member": i, "at_edge": i in (0, len(members) - 1)}
        out.append(est)
    return out


# --- product surfaces ------------------------------------------------------------

def product_chain_check(h: Field, spec_a: Sphere, spec_b: Sphere, p: float = 1.2, q: float = 2.0,
                        strict: bool = True) -> ChainReport:
    """Replay of the product-surface bound on ``A x B`` with circles ``A, B``.

    Steps: restriction on ``B`` for each ``a`` (estimated), Minkowski in
    ``L^p_y L^q_a`` (literal, needs ``p <= q``) and restriction on ``A`` for each
    ``y`` (estimated).
    """
    if h.dim != 4 or not (isinstance(spec_a, Sphere) and isinstance(spec_b, Sphere)):
        raise ValueError("product chain supports two circles in R^2 x R^2")
    if spec_a.dim != 2 or spec_b.dim != 2:
        raise ValueError("product chain supports two circles in R^2 x R^2")
    if not p <= q:
        raise ValueError("product chain needs p <= q")
    grid = h.grid
    sub_x, sub_y = grid.sub([0, 1]), grid.sub([2, 3])
    pa, wa = spec_a.quadrature(sub_x)
    pb, wb = spec_b.quadrature(sub_y)
    vals = h.values
    Ha = _contract(vals, grid, [0, 1], pa)                  # (Pa, N, N): H_a(y)
    Hb = _contract(np.moveaxis(Ha, 0, -1), grid, [2, 3], pb)  # (Pb, Pa)
    cell_y = float(np.prod(sub_y.dx))

    trace = float((np.outer(wb, wa) * np.abs(Hb) ** q).sum()) ** (2 / q)
    Ly = (cell_y * (np.abs(Ha) ** p).sum(axis=(1, 2))) ** (1 / p)     # ||H_a||_{L^p_y}
    step1_rhs = float((wa * Ly**q).sum()) ** (2 / q)
    La = (np.tensordot(wa, np.abs(Ha) ** q, axes=(0, 0))) ** (1 / q)  # ||H_.(y)||_{L^q(A)}
    mink_rhs = float((cell_y * (La**p).sum()) ** (2 / p))
    data = lp_norm(h, p) ** 2
    steps = [
        ChainStep("restriction-on-B", ESTIMATED, trace, step1_rhs,
                  "restriction on B applied for each a in A"),
        ChainStep("minkowski", LITERAL, step1_rhs, mink_rhs, "L^q_a L^p_y -> L^p_y L^q_a since p <= q"),
        ChainStep("restriction-on-A", ESTIMATED, mink_rhs, data,
                  "restriction on A applied for each y"),
    ]
    c = np.sqrt(steps[0].constant * steps[2].constant)
    report = ChainReport("product", steps, lhs=np.sqrt(trace), rhs=np.sqrt(data), chain_constant=float(c),
                         params={"p": p, "q": q, "radius_a": spec_a.radius, "radius_b": spec_b.radius})
    return report.check() if strict else report


# --- one-dimensional embedding ---------------------------------------------------

def _rational(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v).limit_denominator(10**6)


def sobolev_embedding_check(g: Field, p, s, dilations: Sequence[float] = (0.5, 1.0, 2.0)) -> RatioEstimate:
    """``||g||_{H^s} / ||g||_{L^p}`` for a 1-D field, with a dilation sweep.

    Requires ``s = 1/2 - 1/p`` exactly and ``1 < p < 2``.  ``extra["sweep"]``
    lists ``(lambda, ratio)`` for ``g(lambda x)`` resampled on the same grid.
    """
    P, S = _rational(p), _rational(s)
    if not 1 < P < 2:
        raise ValueError(f"embedding check needs 1 < p < 2 (got {P})")
    if S != Fraction(1, 2) - 1 / P:
        raise ValueError(f"exponent relation s = 1/2 - 1/p violated: s={S}, p={P}")
    if g.dim != 1:
        raise ValueError("embedding check takes a 1-D field")
    num, den = sobolev_norm(g, float(S)), lp_norm(g, float(P))
    if den == 0:
        raise ValueError("degenerate input")
    sweep = []
    for lam in dilations:
        gl = dilate(g, lam)
        sweep.append((float(lam), sobolev_norm(gl, float(S)) / lp_norm(gl, float(P))))
    return RatioEstimate(1.0, num, den, num / den, extra={"sweep": sweep})
