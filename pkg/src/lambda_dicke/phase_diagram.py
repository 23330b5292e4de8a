"""Parameter sweeps, phase classification and first-order boundaries."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .minimizer import (Branch, GridSpec, StationaryPoint, check_structure,
                        default_grid, local_minima, refine)
from .model import (MeanField, ModelParams, PhaseLabel, check_beta,
                    classification_tolerance, validate)
from .observables import ObservableSet, jump, observable_set

FRESH_EVERY = 32


class AmbiguousPhaseError(RuntimeError):
    pass


class NoTransitionError(ValueError):
    pass


class SweepError(RuntimeError):
    pass


def classify(sp: StationaryPoint, params: ModelParams | None = None, tol=None) -> PhaseLabel:
    """Label a global minimum by which order parameter exceeds ``tol``.

    ``tol`` is a scalar or a per-mode pair; by default the per-mode
    classification tolerance of ``params``.
    """
    if tol is None:
        if params is None:
            raise ValueError("classify needs params or tol")
        tol = (classification_tolerance(params, 1), classification_tolerance(params, 2))
    elif np.isscalar(tol):
        tol = (tol, tol)
    on1, on2 = sp.y1 > tol[0], sp.y2 > tol[1]
    if on1 and on2:
        raise AmbiguousPhaseError(f"ambiguous: both y1={sp.y1} and y2={sp.y2} exceed tolerance")
    if on1:
        return PhaseLabel.SR1
    if on2:
        return PhaseLabel.SR2
    return PhaseLabel.NORMAL


@dataclass(frozen=True)
class PhasePoint:
    coords: tuple
    params: ModelParams
    beta: float
    label: PhaseLabel
    obs: ObservableSet
    n_local_minima: int
    y1: float = 0.0
    y2: float = 0.0


@dataclass(frozen=True)
class Axis:
    """A swept quantity: ``g1``, ``g2`` or ``T`` (absolute temperature)."""

    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in ("g1", "g2", "T"):
            raise ValueError(f"unknown sweep axis {self.name!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 1:
            raise ValueError("axis needs at least one value")


@dataclass
class SweepResult:
    axes: tuple
    points: list = field(default_factory=list)   # row-major, last axis fastest

    @property
    def shape(self):
        return tuple(len(a.values) for a in self.axes)

    def grid(self):
        n0, n1 = self.shape
        return [self.points[i * n1:(i + 1) * n1] for i in range(n0)]

    def labels(self) -> np.ndarray:
        return np.array([[p.label.value for p in row] for row in self.grid()])


def _apply(template: ModelParams, beta: float, name: str, value: float):
    if name == "T":
        return template, 1.0 / value
    return template.replace(**{name: value}), beta


def _node(params, beta, coords, seeds, fresh, spec_points):
    spec = default_grid(params, spec_points)
    minima = local_minima(params, beta, spec, seeds=seeds, fresh=fresh)
    best = check_structure(minima[0])
    label = classify(best, params)
    point = PhasePoint(coords, params, beta, label, observable_set(params, beta, best),
                       len(minima), best.y1, best.y2)
    return point, [sp.mf for sp in minima]


def _run_strip(args):
    template, beta, outer, inner, i, grid_points = args
    params, b = _apply(template, beta, outer.name, outer.values[i])
    row = []
    seeds: list[MeanField] = []
    for j, value in enumerate(inner.values):
        p, bb = _apply(params, b, inner.name, value)
        validate(p)
        check_beta(bb)
        coords = (outer.values[i], value)
        try:
            point, seeds = _node(p, bb, coords, seeds, j % FRESH_EVERY == 0, grid_points)
        except Exception as exc:
            raise SweepError(f"node {outer.name}={coords[0]!r}, {inner.name}={coords[1]!r}: {exc}") from exc
        row.append(point)
    return row


def sweep(template: ModelParams, beta: float, outer: Axis, inner: Axis,
          workers: int = 1, grid_points: int = 401) -> SweepResult:
    """Global minimum and observables on the grid ``outer x inner``.

    Each outer value is an independent strip; along the inner axis the
    previous node's minima seed the next refinement and a fresh 2-D grid
    search runs every ``FRESH_EVERY`` nodes.  Results do not depend on
    ``workers``.
    """
    validate(template)
    if "T" not in (outer.name, inner.name):
        check_beta(beta)
    tasks = [(template, beta, outer, inner, i, grid_points) for i in range(len(outer.values))]
    if workers <= 1:
        rows = [_run_strip(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_strip, tasks))
    result = SweepResult((outer, inner))
    for row in rows:
        result.points.extend(row)
    return result


def sweep_g1g2(template: ModelParams, beta: float, g1_values: Sequence[float],
               g2_values: Sequence[float], workers: int = 1, grid_points: int = 401) -> SweepResult:
    return sweep(template, beta, Axis("g1", g1_values), Axis("g2", g2_values), workers, grid_points)


def sweep_g1T(template: ModelParams, g2: float, g1_values: Sequence[float],
              T_values: Sequence[float], workers: int = 1, grid_points: int = 401) -> SweepResult:
    """Rows are temperatures, ``g1`` runs fastest."""
    return sweep(template.replace(g2=g2), None, Axis("T", T_values), Axis("g1", g1_values),
                 workers, grid_points)


@dataclass(frozen=True)
class BoundaryPoint:
    axis: str
    location: float
    label_lo: PhaseLabel
    label_hi: PhaseLabel
    jump: dict
    obs_lo: ObservableSet
    obs_hi: ObservableSet
    spinodal_lo: float | None = None
    spinodal_hi: float | None = None


def _evaluate(template, beta, axis, x, seeds, grid_points):
    p, b = _apply(template, beta, axis, x)
    minima = local_minima(p, b, default_grid(p, grid_points), seeds=seeds)
    best = check_structure(minima[0])
    return p, b, best, classify(best, p), minima


def _branch_min(p, b, seed, label):
    sp = refine(p, b, seed)
    return sp if classify(sp, p) is label else None


def locate_boundary(template: ModelParams, beta: float | None, axis: str, bracket,
                    rtol: float = 1e-8, spinodals: bool = False, grid_points: int = 401,
                    spinodal_rtol: float = 1e-6) -> BoundaryPoint:
    """Bisect on the switch of the global-minimum label along ``axis``.

    Jumps are taken between the two competing minima refined at the located
    coexistence value.  With ``spinodals`` the window where both minima
    exist is bracketed as well.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    _, _, sp_lo, lab_lo, min_lo = _evaluate(template, beta, axis, lo, (), grid_points)
    _, _, sp_hi, lab_hi, min_hi = _evaluate(template, beta, axis, hi, (), grid_points)
    if lab_lo is lab_hi:
        raise NoTransitionError(f"no transition in bracket [{lo}, {hi}] (both {lab_lo})")
    seed_lo, seed_hi = sp_lo.mf, sp_hi.mf
    while hi - lo > rtol * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        _, _, sp, lab, _ = _evaluate(template, beta, axis, mid, (seed_lo, seed_hi), grid_points)
        if lab is lab_lo:
            lo, seed_lo = mid, sp.mf
        elif lab is lab_hi:
            hi, seed_hi = mid, sp.mf
        else:
            # a third phase inside the bracket: follow the side that changed
            hi, seed_hi, lab_hi = mid, sp.mf, lab
    x = 0.5 * (lo + hi)
    p, b = _apply(template, beta, axis, x)
    a = refine(p, b, seed_lo)
    c = refine(p, b, seed_hi)
    obs_a, obs_c = observable_set(p, b, a), observable_set(p, b, c)
    spin_lo = spin_hi = None
    if spinodals:
        spin_lo = _spinodal(template, beta, axis, float(bracket[0]), x, seed_hi, lab_hi,
                            toward_lo=True, rtol=spinodal_rtol)
        spin_hi = _spinodal(template, beta, axis, x, float(bracket[1]), seed_lo, lab_lo,
                            toward_lo=False, rtol=spinodal_rtol)
    return BoundaryPoint(axis, x, lab_lo, lab_hi, jump(obs_a, obs_c), obs_a, obs_c,
                         spin_lo, spin_hi)


def _spinodal(template, beta, axis, a, b, seed, label, toward_lo, rtol):
    """Edge of the interval where the ``label`` minimum (seeded at the
    coexistence point) survives as a local minimum.

    Returns the bracket end itself when the minimum survives all the way.
    """
    # alive at the coexistence end by construction
    alive, dead = (b, a) if toward_lo else (a, b)
    p, bb = _apply(template, beta, axis, dead)
    if _branch_min(p, bb, seed, label) is not None:
        return dead
    while abs(alive - dead) > rtol * max(abs(alive), abs(dead)):
        mid = 0.5 * (alive + dead)
        p, bb = _apply(template, beta, axis, mid)
        sp = _branch_min(p, bb, seed, label)
        if sp is not None:
            alive, seed = mid, sp.mf
        else:
            dead = mid
    return alive


def relabel(point: PhasePoint) -> PhaseLabel:
    """Re-derive the label from the stored order parameters."""
    tol = (classification_tolerance(point.params, 1), classification_tolerance(point.params, 2))
    sp = StationaryPoint(MeanField(point.y1, 0.0, point.y2, 0.0), point.obs.f0,
                         None, Branch.TRIVIAL)
    return classify(sp, tol=tol)


def label_regions(labels: np.ndarray) -> dict:
    """Number of 4-connected regions per label in a 2-D label array."""
    from scipy.ndimage import label as cc_label

    counts = {}
    for value in np.unique(labels):
        _, n = cc_label(labels == value)
        counts[str(value)] = int(n)
    return counts


def temperature_axis_beta(T: float) -> float:
    if not (math.isfinite(T) and T > 0):
        raise ValueError("temperature must be positive")
    return 1.0 / T
