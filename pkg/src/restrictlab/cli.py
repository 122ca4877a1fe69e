"""Command-line experiment runner.

    restrictlab run EXPERIMENT [--config FILE] [--out DIR] [--KEY VALUE ...]

Configuration files hold one ``key = value`` per line (``#`` starts a
comment); flags override file keys.  Each run writes into the output
directory (``--out``, else ``$RESTRICTLAB_OUTPUT_DIR``, else
``./restrictlab-out``):

* ``EXPERIMENT.csv``: one ``#``-prefixed schema line, then a header and rows;
* ``EXPERIMENT.gp``: a gnuplot script plotting columns of the CSV;
* ``EXPERIMENT.json``: the manifest (config echo, version, wall time, status).

Exit codes: 0 success, 2 validation error, 3 failed chain step, 4 tail budget
exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .chains import (ChainError, ChainReport, cone_slope_sweep, last_axis_family, polar_identity_check,
                     product_chain_check, sobolev_embedding_check, sphere_scaling_sweep, verify_cone_chain)
from .counterexamples import hyperplane_failure, m_flatness_family
from .families import Gaussian, RingBump, sample
from .knapp import knapp_sweep
from .levelsets import verify_M_chain, verify_MF_chain
from .norms import lp_norm
from .propagators import StrichartzSpec, WindowError, anisotropic_ratio, gaussian_wave_data, strichartz_ratio
from .spectral import forward_transform, inverse_transform, make_grid, physical
from .surfaces import Sphere

ENV_OUT = "RESTRICTLAB_OUTPUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_CHAIN, EXIT_TAIL = 0, 2, 3, 4


class ConfigError(ValueError):
    """A configuration field is missing, unknown or out of range."""


def _floats(text: str) -> List[float]:
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


# name -> (parser, help)
KEYS: Dict[str, tuple] = {
    "dim": (int, "spatial dimension"),
    "N": (int, "points per axis"),
    "L": (float, "box half-width"),
    "family": (str, "data family: gaussian or random"),
    "width": (float, "base Gaussian width"),
    "seed": (int, "seed for pseudo-random fields"),
    "radii": (_floats, "sphere radii"),
    "slopes": (_floats, "cone slopes"),
    "lambdas": (_floats, "dilation factors"),
    "F": (_floats, "Froude numbers"),
    "deltas": (_floats, "Knapp cap widths"),
    "widths": (_floats, "family widths"),
    "R": (_floats, "flatness parameters"),
    "truncations": (_floats, "hyperplane truncations"),
    "p": (float, "Lebesgue exponent"),
    "q": (float, "trace exponent"),
    "equation": (str, "rotating or wave"),
    "window": (float, "time window"),
    "snapshots": (int, "time snapshots"),
    "tolerance": (float, "flatness tolerance"),
}


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict = field(default_factory=dict)
    out: Optional[str] = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    def echo(self) -> dict:
        return {"experiment": self.experiment, **{k: self.values[k] for k in sorted(self.values)}}


def parse_config_text(text: str) -> dict:
    """``key = value`` lines into raw strings; blank lines and ``#`` comments skipped."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def typed(raw: dict) -> dict:
    vals = {}
    for k, v in raw.items():
        if k not in KEYS:
            raise ConfigError(f"unknown config field {k!r}")
        try:
            vals[k] = KEYS[k][0](v)
        except ValueError as exc:
            raise ConfigError(f"field {k!r}: cannot parse {v!r} ({exc})") from None
    return vals


# --- experiments ------------------------------------------------------------------

@dataclass
class Result:
    columns: List[str]
    rows: List[Sequence]
    summary: dict
    plot: tuple  # (x column, [y columns], logscale)


def _grid(cfg, dim, N, L):
    return make_grid(cfg.get("dim", dim), cfg.get("N", N), cfg.get("L", L))


def exp_plancherel(cfg):
    g = _grid(cfg, 2, 64, 8.0)
    fam = cfg.get("family", "gaussian")
    if fam == "random":
        if "seed" not in cfg.values:
            raise ConfigError("field 'seed' is required for random fields")
        rng = np.random.default_rng(cfg.get("seed"))
        f = physical(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        closed = float("nan")
    elif fam == "gaussian":
        fam_obj = Gaussian(width=cfg.get("width", 1.0))
        f = sample(fam_obj, g)
        fh = forward_transform(f)
        pts = np.stack(np.meshgrid(*[g.xi(a) for a in range(g.dim)], indexing="ij"), -1).reshape(-1, g.dim)
        ref = fam_obj.spectrum(pts).reshape(g.shape)
        closed = float(np.abs(fh.values - ref).max() / np.abs(ref).max())
    else:
        raise ConfigError(f"field 'family': expected gaussian or random, got {fam!r}")
    fh = forward_transform(f)
    back = inverse_transform(fh)
    rt = float(np.abs(back.values - f.values).max() / np.abs(f.values).max())
    lhs = lp_norm(f, 2) ** 2
    rhs = lp_norm(fh, 2) ** 2 / (2 * np.pi) ** g.dim
    pl = abs(lhs - rhs) / lhs
    return Result(["dim", "N", "L", "roundtrip_relerr", "plancherel_relerr", "closed_form_relerr"],
                  [[g.dim, g.N, float(g.L[0]), rt, pl, closed]],
                  {"plancherel_relerr": pl, "roundtrip_relerr": rt}, ("N", ["plancherel_relerr"], True))


def exp_polar(cfg):
    g = _grid(cfg, 3, 64, 15.0)
    f = sample(RingBump(1.0, 5.0), g)
    left, right, err = polar_identity_check(f)
    return Result(["cone_trace", "polar_form", "relerr"], [[left, right, err]], {"relerr": err},
                  ("cone_trace", ["relerr"], False))


def exp_sphere_scaling(cfg):
    g = _grid(cfg, 2, 400, 6.25)
    radii = cfg.get("radii", [1.0, 2.0, 4.0, 8.0])
    w0 = cfg.get("width", float(np.sqrt(1 / 3)))
    members = [sample(Gaussian(width=w0 * 2.0 ** (-k / 2)), g) for k in range(-1, 9)]
    est = sphere_scaling_sweep(members, radii)
    comp = np.array([e.compensated for e in est])
    spread = float((comp.max() - comp.min()) / comp.mean())
    rows = [[e.param, e.numerator, e.denominator, e.ratio, e.compensated, e.extra["member"]] for e in est]
    return Result(["R", "trace_norm", "data_norm", "ratio", "compensated", "member"], rows,
                  {"spread": spread, "tolerance": cfg.get("tolerance", 0.05)}, ("R", ["compensated"], True))


def _chain_rows(tag, report: ChainReport):
    return [[tag, s.label, s.kind, s.left, s.right, s.constant, s.error, int(s.ok)] for s in report.steps]


CHAIN_COLUMNS = ["member", "step", "kind", "left", "right", "constant", "error", "ok"]


def exp_cone_chain(cfg):
    g = _grid(cfg, 3, 64, 12.0)
    rows, consts = [], []
    for w in cfg.get("widths", [0.5, 1.0, 2.0]):
        rep = verify_cone_chain(sample(Gaussian(width=w), g, None))
        rows += _chain_rows(w, rep)
        consts.append(rep.chain_constant)
    return Result(CHAIN_COLUMNS, rows, {"chain_constants": consts}, ("member", ["constant"], False))


def exp_slope_sweep(cfg):
    g = _grid(cfg, 3, 64, 12.0)
    slopes = cfg.get("slopes", [0.25, 0.5, 1.0, 2.0, 4.0])
    f = sample(Gaussian(width=cfg.get("width", 1.0)), g, None)
    est = cone_slope_sweep(last_axis_family(f, 2.0 ** np.arange(-3, 3.5, 0.5)), slopes)
    comp = np.array([e.compensated for e in est])
    rows = [[e.param, e.numerator, e.denominator, e.ratio, e.compensated, e.extra["member"]] for e in est]
    return Result(["slope", "trace_norm", "data_norm", "ratio", "compensated", "member"], rows,
                  {"spread": float((comp.max() - comp.min()) / comp.mean())}, ("slope", ["compensated"], True))


def _level_members(cfg):
    base = _grid(cfg, 4, 64, 8.0)
    for w in cfg.get("widths", [0.5, 1.0, 2.0]):
        g = base.rescaled((w, w, w, 1.0))
        yield w, sample(Gaussian(width=(w, w, w, 1.0), modulation=(3.0 / w, 0, 0, 0)), g, None)


def exp_m_chain(cfg):
    rows, consts = [], []
    for w, f in _level_members(cfg):
        rep = verify_M_chain(f)
        rows += _chain_rows(w, rep)
        consts.append(rep.chain_constant)
    return Result(CHAIN_COLUMNS, rows, {"chain_constants": consts}, ("member", ["constant"], False))


def exp_mf_chain(cfg):
    Fs = cfg.get("F", [2.0, 1.5, 1.2, 1.1])
    cfg.values.setdefault("widths", [1.0])
    rows, consts = [], {}
    for w, f in _level_members(cfg):
        for F in Fs:
            rep = verify_MF_chain(f, F)
            rows += _chain_rows(f"{w}/F={F}", rep)
            consts[f"{w}/F={F}"] = rep.chain_constant
    return Result(CHAIN_COLUMNS, rows, {"chain_constants": consts}, ("member", ["constant"], False))


def exp_product_chain(cfg):
    g = _grid(cfg, 4, 32, 8.0)
    if g.dim != 4:
        raise ConfigError("field 'dim': product chain runs in dimension 4")
    h = sample(Gaussian(width=cfg.get("width", 1.0)), g)
    radii = cfg.get("radii", [1.0, 1.0])
    rep = product_chain_check(h, Sphere(2, radii[0]), Sphere(2, radii[-1]), p=cfg.get("p", 1.2), q=cfg.get("q", 2.0))
    return Result(CHAIN_COLUMNS, _chain_rows("product", rep), {"chain_constant": rep.chain_constant},
                  ("member", ["constant"], False))


def exp_embedding(cfg):
    g = _grid(cfg, 1, 512, 32.0)
    if g.dim != 1:
        raise ConfigError("field 'dim': embedding check is one-dimensional")
    p = cfg.get("p", 1.2)
    est = sobolev_embedding_check(sample(Gaussian(width=cfg.get("width", 1.0)), g), p, 0.5 - 1 / p,
                                  cfg.get("lambdas", [0.5, 1.0, 2.0]))
    rows = [[lam, r] for lam, r in est.extra["sweep"]]
    return Result(["lambda", "ratio"], rows, {"ratio": est.ratio}, ("lambda", ["ratio"], True))


def exp_strichartz(cfg):
    eq = cfg.get("equation", "rotating")
    lambdas = cfg.get("lambdas", [0.5, 1.0, 2.0])
    rows = []
    if eq == "rotating":
        g = _grid(cfg, 3, 64, 16.0)
        spec = StrichartzSpec.rotating()
        T = cfg.get("window", 8 * float(g.L.min()))
        for lam in lambdas:
            u0 = sample(Gaussian(width=cfg.get("width", 1.0) / lam), g, None)
            e = strichartz_ratio(u0, spec, window=T, snapshots=cfg.get("snapshots", 256))
            rows.append([lam, T, e.numerator, e.denominator, e.ratio, e.extra["tail"]])
    elif eq == "wave":
        g = _grid(cfg, 3, 64, 16.0)
        spec = StrichartzSpec.wave_restriction(g.dim)
        T0 = cfg.get("window", 6.0)
        for lam in lambdas:
            e = strichartz_ratio(gaussian_wave_data(g, cfg.get("width", 1.0), lam), spec,
                                 window=lam * T0, snapshots=cfg.get("snapshots", 256))
            rows.append([lam, lam * T0, e.numerator, e.denominator, e.ratio, e.extra["tail"]])
    else:
        raise ConfigError(f"field 'equation': expected rotating or wave, got {eq!r}")
    r = np.array([row[4] for row in rows])
    return Result(["lambda", "window", "spacetime_norm", "data_norm", "ratio", "tail"], rows,
                  {"equation": eq, "spread": float((r.max() - r.min()) / r.mean())}, ("lambda", ["ratio"], True))


def exp_anisotropic(cfg):
    g = _grid(cfg, 3, 96, 24.0)
    T = cfg.get("window", 40.0)
    rows = []
    for lam in cfg.get("lambdas", [0.5, 1.0, 2.0]):
        e = anisotropic_ratio(sample(Gaussian(width=cfg.get("width", 1.0) / lam), g, None), window=T,
                              snapshots=cfg.get("snapshots", 256))
        rows.append([lam, e.numerator, e.denominator, e.ratio, e.extra["time_outer"], e.extra["tail"]])
    return Result(["lambda", "space_outer_norm", "data_norm", "ratio", "time_outer_ratio", "tail"], rows, {},
                  ("lambda", ["ratio", "time_outer_ratio"], True))


def exp_hyperplane(cfg):
    rep = hyperplane_failure(truncations=cfg.get("truncations", [2.0**k for k in range(1, 9)]))
    rows = [[T, li, lb, r, ps, pv] for T, li, lb, r, ps, pv in
            zip(rep.params, rep.extra["line_integrals"], rep.lower_bounds, rep.ratios,
                rep.extra["probe_sharp"], rep.extra["probe_values"])]
    return Result(["T", "line_integral", "lower_bound", "ratio", "probe_sharp", "probe_corrected"], rows,
                  {"increasing": rep.increasing, "lp_norms": {str(k): v for k, v in rep.extra["lp_norms"].items()}},
                  ("T", ["line_integral"], True))


def exp_flatness(cfg):
    rep = m_flatness_family(R_values=cfg.get("R", [2, 4, 8, 16, 32]), p=cfg.get("p", 1.5), q=cfg.get("q", 2.0))
    rows = [[R, d, lb, tr, r] for R, d, lb, tr, r in
            zip(rep.params, rep.data_norms, rep.lower_bounds, rep.extra["trace_norms"], rep.ratios)]
    return Result(["R", "data_norm", "lower_bound", "trace_norm", "ratio"], rows,
                  {"increasing": rep.increasing, "increment_ratios": list(rep.increment_ratios())},
                  ("R", ["ratio", "lower_bound"], True))


def exp_knapp(cfg):
    kwargs = {}
    if "deltas" in cfg.values:
        kwargs["deltas"] = cfg.get("deltas")
    rep = knapp_sweep(**kwargs)
    rows = [[p, d, r, s, pr] for p, rr, s, pr in zip(rep.p_values, rep.ratios, rep.slopes, rep.predicted)
            for d, r in zip(rep.deltas, rr)]
    return Result(["p", "delta", "ratio", "slope", "predicted_slope"], rows,
                  {"slopes": dict(zip(map(str, rep.p_values), rep.slopes.tolist()))}, ("delta", ["ratio"], True))


EXPERIMENTS: Dict[str, Callable] = {
    "plancherel": exp_plancherel,
    "polar-identity": exp_polar,
    "sphere-scaling": exp_sphere_scaling,
    "cone-chain": exp_cone_chain,
    "slope-sweep": exp_slope_sweep,
    "m-chain": exp_m_chain,
    "mf-chain": exp_mf_chain,
    "product-chain": exp_product_chain,
    "embedding-check": exp_embedding,
    "strichartz": exp_strichartz,
    "anisotropic": exp_anisotropic,
    "counterexample-hyperplane": exp_hyperplane,
    "counterexample-flatness": exp_flatness,
    "knapp-sweep": exp_knapp,
}


# --- output ------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, res: Result):
    with open(path, "w", newline="") as fh:
        fh.write("# schema: " + ", ".join(res.columns) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(res.columns)
        for row in res.rows:
            w.writerow([_cell(v) for v in row])


def write_plot(path: Path, csv_name: str, res: Result):
    x, ys, logscale = res.plot
    xi = res.columns.index(x) + 1
    lines = ["set datafile separator ','", "set key autotitle columnhead", f"set xlabel '{x}'"]
    if logscale:
        lines.append("set logscale x")
    plots = [f"'{csv_name}' using {xi}:{res.columns.index(y) + 1} with linespoints" for y in ys]
    lines.append("plot " + ", ".join(plots))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment, write its files, return the exit code."""
    out = Path(cfg.out or os.environ.get(ENV_OUT, "restrictlab-out"))
    t0 = time.perf_counter()
    status, message, res = EXIT_OK, "ok", None
    try:
        if cfg.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {cfg.experiment!r}")
        res = EXPERIMENTS[cfg.experiment](cfg)
    except ChainError as exc:
        status, message = EXIT_CHAIN, str(exc)
    except WindowError as exc:
        status, message = EXIT_TAIL, str(exc)
    except ValueError as exc:
        status, message = EXIT_VALIDATION, str(exc)
    wall = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    if res is not None:
        write_csv(out / f"{cfg.experiment}.csv", res)
        write_plot(out / f"{cfg.experiment}.gp", f"{cfg.experiment}.csv", res)
    manifest = {"config": _jsonable(cfg.echo()), "version": __version__, "wall_time_s": wall,
                "exit_code": status, "message": message,
                "summary": _jsonable(res.summary) if res is not None else {}}
    (out / f"{cfg.experiment}.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if status != EXIT_OK:
        print(f"restrictlab: {message}", file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="restrictlab", description="Fourier restriction experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    r.add_argument("--config", help="key = value configuration file")
    r.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./restrictlab-out)")
    for k, (_, h) in KEYS.items():
        r.add_argument(f"--{k}", dest=f"key_{k}", help=h)
    sub.add_parser("list", help="list experiments")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(EXPERIMENTS))
        return EXIT_OK
    try:
        raw = parse_config_text(Path(args.config).read_text()) if args.config else {}
        for k in KEYS:
            v = getattr(args, f"key_{k}")
            if v is not None:
                raw[k] = v
        cfg = ExperimentConfig(args.experiment, typed(raw), args.out)
    except (ConfigError, OSError) as exc:
        print(f"restrictlab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
