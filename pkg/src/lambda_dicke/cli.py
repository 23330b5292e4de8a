"""Command-line driver.

Exit status: 0 on success, 1 on configuration or I/O errors, 2 when a
numerical stage fails.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from .free_energy import f_grid
from .io import (FORMATS, OBS_COLUMNS, AxisSpec, ConfigError, RunConfig, emit, load_config,
                 metadata)
from .minimizer import (Branch, RefineError, StructureError, check_structure, default_grid,
                        local_minima)
from .model import ParameterError, critical_coupling
from .observables import FIELDS, observable_set
from .phase_diagram import (AmbiguousPhaseError, Axis, NoTransitionError, SweepError,
                            classify, locate_boundary, sweep)
from .zero_temp import ZERO_T_BETA_DELTA, p33_zero_T, y_zero_T

NUMERICAL_ERRORS = (RefineError, StructureError, SweepError, AmbiguousPhaseError,
                    NoTransitionError, ArithmeticError)
ZT_RATIOS = (1.1, 1.5, 2.0, 3.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _axis_arg(name):
    def parse(text):
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"--{name} expects min:max:points, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name}: cannot parse {text!r}") from None
        return lo, hi, n
    return parse


def _temps_arg(text):
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--T: cannot parse {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("--T: empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--format", choices=FORMATS, help="data file format")
    common.add_argument("--g1", type=_axis_arg("g1"), metavar="MIN:MAX:POINTS")
    common.add_argument("--g2", type=_axis_arg("g2"), metavar="MIN:MAX:POINTS")
    common.add_argument("--T", type=_temps_arg, metavar="LIST",
                        help="comma-separated temperatures in units of Delta")
    common.add_argument("--scale-by-critical", action="store_true",
                        help="--g1/--g2 values are multiples of the critical coupling")
    common.add_argument("--spinodals", action="store_true", default=None)
    common.add_argument("--metastable", action="store_true", default=None)

    parser = _Parser(prog="lambda-dicke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "landscape": "free energy on a (y1, y2) grid",
        "minimize": "global minimum and observables at one point",
        "sweep2d": "phase diagram over (g1, g2)",
        "sweepT": "observables over temperature and one coupling",
        "boundary": "locate the phase boundary per temperature",
        "ztcheck": "compare against the zero-temperature closed forms",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for name in ("g1", "g2"):
        val = getattr(args, name)
        if val is not None:
            cfg = cfg.with_axis(AxisSpec(name, val[0], val[1], val[2], args.scale_by_critical))
    if args.T is not None:
        cfg = replace(cfg, temperature_key="kT_over_Delta", temperatures=args.T)
        cfg.betas()
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = replace(cfg, workers=args.workers)
    if args.format is not None:
        cfg = replace(cfg, format=args.format)
    if args.spinodals:
        cfg = replace(cfg, spinodals=True)
    if args.metastable:
        cfg = replace(cfg, metastable=True)
    return cfg


def _single_beta(cfg: RunConfig, command: str) -> float:
    betas = cfg.betas()
    if len(betas) != 1:
        raise ConfigError(f"{command} takes a single temperature, got {len(betas)}")
    return betas[0]


def _temperature_abs(cfg: RunConfig) -> list[float]:
    if cfg.temperature_key == "kT_over_Delta":
        return [t * cfg.params.Delta for t in cfg.temperatures]
    if cfg.temperature_key == "kT":
        return list(cfg.temperatures)
    return [1.0 / b for b in cfg.temperatures]


def _obs_row(obs):
    return [getattr(obs, k) for k in OBS_COLUMNS]


def run_landscape(cfg: RunConfig):
    beta = _single_beta(cfg, "landscape")
    if len(cfg.axes) > 1:
        raise ConfigError("landscape sweeps at most one coupling axis")
    axis = cfg.axes[0] if cfg.axes else None
    coords = axis.coordinates() if axis else [None]
    values = axis.couplings(cfg.params) if axis else [None]
    base = default_grid(cfg.params, cfg.grid_points)
    y1_max = base.y1_max if cfg.y1_max is None else cfg.y1_max
    y2_max = 0.0 if cfg.y2_max is None else cfg.y2_max
    n = cfg.grid_points
    y1 = np.linspace(0.0, y1_max, n) if y1_max > 0 else np.zeros(1)
    y2 = np.linspace(0.0, y2_max, n) if y2_max > 0 else np.zeros(1)
    Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
    rows = []
    for x, g in zip(coords, values):
        p = cfg.params.replace(**{axis.name: float(g)}) if axis else cfg.params
        f = f_grid(p, beta, Y1, Y2)
        lead = [x] if axis else []
        rows.extend(lead + [a, b, c] for a, b, c in zip(Y1.ravel(), Y2.ravel(), f.ravel()))
    columns = ([axis.column] if axis else []) + ["y1", "y2", "f0"]
    return columns, rows


def run_minimize(cfg: RunConfig):
    beta = _single_beta(cfg, "minimize")
    p = cfg.params
    minima = local_minima(p, beta, default_grid(p, cfg.grid_points))
    check_structure(minima[0])
    chosen = minima if cfg.metastable else minima[:1]
    rows = []
    for sp in chosen:
        # only the global minimum is bound by the structural rule
        label = "Mixed" if sp.branch is Branch.MIXED else classify(sp, p).value
        obs = observable_set(p, beta, sp)
        rows.append([p.g1, p.g2, label] + _obs_row(obs) + [len(minima)])
    return ["g1", "g2", "label", *OBS_COLUMNS, "n_local_minima"], rows


def _sweep_rows(result, outer_coords, inner_coords):
    rows = []
    n_inner = len(inner_coords)
    for k, pt in enumerate(result.points):
        i, j = divmod(k, n_inner)
        rows.append([outer_coords[i], inner_coords[j], pt.label.value] + _obs_row(pt.obs)
                    + [pt.n_local_minima])
    return rows


def run_sweep2d(cfg: RunConfig):
    beta = _single_beta(cfg, "sweep2d")
    a1, a2 = cfg.axis("g1"), cfg.axis("g2")
    if a1 is None or a2 is None:
        raise ConfigError("sweep2d needs both axes.g1 and axes.g2 (or --g1/--g2)")
    res = sweep(cfg.params, beta, Axis("g1", a1.couplings(cfg.params)),
                Axis("g2", a2.couplings(cfg.params)), cfg.workers, cfg.grid_points)
    rows = _sweep_rows(res, a1.coordinates(), a2.coordinates())
    return [a1.column, a2.column, "label", *OBS_COLUMNS, "n_local_minima"], rows


def run_sweepT(cfg: RunConfig):
    if len(cfg.axes) != 1:
        raise ConfigError("sweepT needs exactly one coupling axis")
    ax = cfg.axes[0]
    res = sweep(cfg.params, None, Axis("T", _temperature_abs(cfg)),
                Axis(ax.name, ax.couplings(cfg.params)), cfg.workers, cfg.grid_points)
    rows = _sweep_rows(res, list(cfg.temperatures), ax.coordinates())
    return [cfg.temperature_key, ax.column, "label", *OBS_COLUMNS, "n_local_minima"], rows


def run_boundary(cfg: RunConfig):
    b = cfg.boundary
    scale = critical_coupling(cfg.params, int(b.axis[1])) if b.scale_by_critical else 1.0
    column = f"{b.axis}_over_{b.axis}c" if b.scale_by_critical else b.axis
    jump_fields = [k for k in FIELDS if k not in ("f0", "F_per_particle")]
    rows = []
    for t, beta in zip(cfg.temperatures, cfg.betas()):
        bp = locate_boundary(cfg.params, beta, b.axis, b.bracket(cfg.params), rtol=b.rtol,
                             spinodals=cfg.spinodals, grid_points=cfg.grid_points)
        spin = [None if s is None else s / scale for s in (bp.spinodal_lo, bp.spinodal_hi)]
        rows.append([t, bp.location / scale, bp.label_lo.value, bp.label_hi.value]
                    + [bp.jump[k] for k in jump_fields] + spin)
    columns = [cfg.temperature_key, column, "label_lo", "label_hi",
               *(f"jump_{k}" for k in jump_fields), "spinodal_lo", "spinodal_hi"]
    return columns, rows


def run_ztcheck(cfg: RunConfig):
    """Numerical minimum at ``beta Delta = 1e4`` against the closed forms.

    ``delta`` is set to 0, where the closed forms hold.
    """
    if len(cfg.axes) > 1:
        raise ConfigError("ztcheck sweeps at most one coupling axis")
    p = cfg.params.replace(delta=0.0)
    if cfg.axes:
        ax = cfg.axes[0]
        name, coords, values, column = ax.name, ax.coordinates(), ax.couplings(p), ax.column
    else:
        name, column = "g1", "g1_over_g1c"
        coords = np.array(ZT_RATIOS)
        values = coords * critical_coupling(p, 1)
    branch = int(name[1])
    beta = ZERO_T_BETA_DELTA / p.Delta
    rows = []
    for x, g in zip(coords, values):
        q = p.replace(**{name: float(g)})
        sp = check_structure(local_minima(q, beta, default_grid(q, cfg.grid_points))[0])
        y_num = sp.y1 if branch == 1 else sp.y2
        y_ref = y_zero_T(q, branch)
        p33_num = observable_set(q, beta, sp).p33
        p33_ref = p33_zero_T(q, branch) if y_ref > 0 else 0.0
        rel = abs(y_num - y_ref) / y_ref if y_ref > 0 else abs(y_num)
        rows.append([x, y_num, y_ref, rel, p33_num, p33_ref, abs(p33_num - p33_ref)])
    return [column, "y_numeric", "y_closed", "y_rel_err", "p33_numeric", "p33_closed",
            "p33_abs_err"], rows


COMMANDS = {
    "landscape": run_landscape,
    "minimize": run_minimize,
    "sweep2d": run_sweep2d,
    "sweepT": run_sweepT,
    "boundary": run_boundary,
    "ztcheck": run_ztcheck,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
    except (UsageError, ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        columns, rows = COMMANDS[args.command](cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    from pathlib import Path

    try:
        path = emit(columns, rows, Path(cfg.out) / args.command, cfg.format,
                    metadata(cfg, args.command))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    if args.command in ("minimize", "ztcheck"):
        for row in rows:
            print("  ".join(f"{c}={v:.10g}" if isinstance(v, float) and math.isfinite(v)
                            else f"{c}={v}" for c, v in zip(columns, row)))
    return 0


cli = main


if __name__ == "__main__":
    sys.exit(main())
