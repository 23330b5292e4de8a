"""Stationary points and the global minimum of ``f`` over ``(y1, y2)``.

General ``delta``: brute-force grid in the quadrant ``y >= 0`` followed by
per-axis bracketed refinement on the analytic gradient.  ``delta = 0``:
bracketed root solving of the one-dimensional stationarity condition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .free_energy import f_general, f_grid, grad_f, stationarity_residual
from .model import (MeanField, ModelParams, ParameterError, check_beta,
                    classification_tolerance, critical_coupling, validate)

GRAD_TOL = 1e-10
STEP_TOL = 1e-12
TIE_TOL = 1e-12
Y_MAX_INFLATION = 1.5


class RefineError(RuntimeError):
    """Refinement exhausted its step budget."""


class StructureError(RuntimeError):
    """A global minimum with both modes macroscopically occupied."""


class Kind(enum.Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    SADDLE = "saddle"


class Branch(enum.IntEnum):
    # order doubles as the tie-break preference in global_minimum
    TRIVIAL = 0
    BRANCH1 = 1
    BRANCH2 = 2
    MIXED = 3


@dataclass(frozen=True)
class StationaryPoint:
    mf: MeanField
    f0: float
    kind: Kind
    branch: Branch
    grad: tuple = field(default=(0.0, 0.0), compare=False)

    @property
    def y1(self) -> float:
        return self.mf.y1

    @property
    def y2(self) -> float:
        return self.mf.y2


@dataclass(frozen=True)
class GridSpec:
    y1_max: float
    y2_max: float
    points: int = 401

    def __post_init__(self):
        if not (self.y1_max > 0 and self.y2_max > 0):
            raise ParameterError("grid y_max must be positive")
        if self.points < 2:
            raise ParameterError("grid needs at least 2 points per axis")

    def axes(self):
        return (np.linspace(0.0, self.y1_max, self.points),
                np.linspace(0.0, self.y2_max, self.points))


def branch_of(params: ModelParams, y1: float, y2: float) -> Branch:
    on1 = y1 > classification_tolerance(params, 1)
    on2 = y2 > classification_tolerance(params, 2)
    if on1 and on2:
        return Branch.MIXED
    if on1:
        return Branch.BRANCH1
    if on2:
        return Branch.BRANCH2
    return Branch.TRIVIAL


def omega_upper_bound(params: ModelParams, beta: float, branch: int) -> float:
    """``(g_n / g_nc)^2``: every nontrivial root at ``delta = 0`` has
    ``Omega`` below this, because ``q < 1``."""
    check_beta(beta)
    ratio = params.g(branch) / critical_coupling(params, branch)
    return ratio * ratio


def axis_y_bound(params: ModelParams, branch: int) -> float:
    """Largest ``y_n`` of any stationary point on the ``n``-th axis.

    On an axis the active 2x2 block has gap ``Delta`` (mode 1) or
    ``Delta - delta`` (mode 2) and the thermal weight of its upper branch is
    below one, which gives ``y^2 < g^2 / omega^2 - gap^2 / (16 g^2)`` for
    any ``delta >= 0``.  At ``delta = 0`` this is the inversion of
    ``Omega < (g / g_c)^2``.
    """
    g = params.g(branch)
    if g == 0:
        return 0.0
    w = params.omega(branch)
    gap = params.Delta if branch == 1 else params.Delta - params.delta
    y2 = g * g / (w * w) - gap * gap / (16.0 * g * g)
    return math.sqrt(y2) if y2 > 0 else 0.0


def default_grid(params: ModelParams, points: int = 401) -> GridSpec:
    """Grid reaching 1.5x past the axis bound; a floor of ``sqrt(Delta/omega)/2``
    keeps the box nondegenerate below threshold."""
    validate(params)
    maxes = []
    for n in (1, 2):
        floor = 0.5 * math.sqrt(params.Delta / params.omega(n))
        maxes.append(max(Y_MAX_INFLATION * axis_y_bound(params, n), floor))
    return GridSpec(maxes[0], maxes[1], points)


def stationary_points_delta0(params: ModelParams, beta: float, branch: int,
                             samples: int = 1 << 14) -> list[StationaryPoint]:
    """Nontrivial stationary points on axis ``branch`` for ``delta = 0``.

    The residual ``r(Omega) = (g_c/g)^2 Omega - q(Omega)`` carries the sign of
    ``df/dy``; it is scanned on ``(1, (g/g_c)^2)`` (uniform plus
    logarithmically clustered near 1) and each sign change is bisected.
    A ``+ -> -`` crossing is a maximum, ``- -> +`` a minimum.
    """
    validate(params)
    check_beta(beta)
    if params.delta != 0:
        raise ParameterError("stationary_points_delta0 requires delta == 0")
    bound = omega_upper_bound(params, beta, branch)
    if bound <= 1.0:
        return []
    # q may round to exactly 1 near the bound, so scan slightly past it
    span = (bound - 1.0) * (1.0 + 1e-9) + 1e-12
    ts = np.concatenate([np.linspace(0.0, span, samples + 1)[1:],
                         span * np.logspace(-14, 0, samples // 4)])
    omegas = 1.0 + np.unique(ts)
    r = stationarity_residual(params, beta, branch, omegas)
    keep = r != 0
    omegas, signs = omegas[keep], np.sign(r[keep])
    points = []
    D = params.Delta
    g = params.g(branch)
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        lo, hi = omegas[i], omegas[i + 1]
        root = brentq(lambda om: float(stationarity_residual(params, beta, branch, om)),
                      lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        y = math.sqrt(max(root * root - 1.0, 0.0)) * D / (4.0 * g)
        kind = Kind.MAXIMUM if signs[i] > 0 else Kind.MINIMUM
        mf = MeanField(y, 0.0, 0.0, 0.0) if branch == 1 else MeanField(0.0, 0.0, y, 0.0)
        points.append(StationaryPoint(mf, f_general(params, beta, mf).f, kind,
                                      Branch(branch) if y > classification_tolerance(params, branch)
                                      else Branch.TRIVIAL))
    return points


def _local_min_mask(values: np.ndarray) -> np.ndarray:
    padded = np.pad(values, 1, mode="constant", constant_values=np.inf)
    core = padded[1:-1, 1:-1]
    mask = np.ones(values.shape, dtype=bool)
    n, m = values.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= core <= padded[1 + di:1 + di + n, 1 + dj:1 + dj + m]
    return mask


def grid_search(params: ModelParams, beta: float, spec: GridSpec | None = None) -> list[MeanField]:
    """Grid nodes whose ``f`` is no larger than any of their 8 neighbours."""
    validate(params)
    check_beta(beta)
    spec = spec or default_grid(params)
    y1s, y2s = spec.axes()
    values = f_grid(params, beta, y1s[:, None], y2s[None, :])
    idx = np.argwhere(_local_min_mask(values))
    return [MeanField(float(y1s[i]), 0.0, float(y2s[j]), 0.0) for i, j in idx]


def axis_scan(params: ModelParams, beta: float, spec: GridSpec | None = None) -> list[MeanField]:
    """Cheap 1-D version of :func:`grid_search` along both axes."""
    spec = spec or default_grid(params)
    y1s, y2s = spec.axes()
    seeds = []
    for n, ys in ((1, y1s), (2, y2s)):
        zeros = np.zeros_like(ys)
        values = f_grid(params, beta, ys, zeros) if n == 1 else f_grid(params, beta, zeros, ys)
        padded = np.concatenate([[np.inf], values, [np.inf]])
        mask = (values <= padded[:-2]) & (values <= padded[2:])
        for i in np.nonzero(mask)[0]:
            y = float(ys[i])
            seeds.append(MeanField(y, 0.0, 0.0, 0.0) if n == 1 else MeanField(0.0, 0.0, y, 0.0))
    return seeds


def _line_minimize(grad_k, t0: float, step: float, max_steps: int = 400) -> float:
    """Local minimum of a 1-D function on ``t >= 0`` given its derivative.

    Walks downhill from ``t0`` in steps of ``step`` until the derivative
    changes sign from - to +, then solves for the root.  ``t = 0`` is always
    stationary (the function is even), so arriving there with no sign change
    means the minimum sits at the origin.
    """
    g0 = grad_k(t0)
    if g0 == 0.0 and t0 > 0:
        return t0
    probe = 1e-3 * step
    if t0 == 0.0:
        g_probe = grad_k(probe)
        if g_probe >= 0.0:
            return 0.0
        t0, g0 = probe, g_probe
    if g0 > 0.0:
        hi = t0
        width = step
        for i in range(1, max_steps + 1):
            lo = max(hi - width, 0.0)
            if i > 8:
                width *= 2.0
            if lo == 0.0:
                g_probe = grad_k(min(probe, 0.5 * hi))
                if g_probe >= 0.0:
                    return 0.0
                lo = min(probe, 0.5 * hi)
                break
            g_lo = grad_k(lo)
            if g_lo <= 0.0:
                if g_lo == 0.0:
                    return lo
                break
            hi = lo
        else:
            raise RefineError("no downhill bracket")
    else:
        lo = t0
        width = step
        for i in range(max_steps):
            hi = lo + width
            g_hi = grad_k(hi)
            if g_hi >= 0.0:
                if g_hi == 0.0:
                    return hi
                break
            lo = hi
            if i >= 8:
                width *= 2.0
        else:
            raise RefineError("no uphill bracket")
    return brentq(grad_k, lo, hi, xtol=STEP_TOL / 4, rtol=4 * np.finfo(float).eps, maxiter=200)


def _scaled_grad(params, beta, y1, y2):
    d1, d2 = grad_f(params, beta, y1, y2)
    return d1 / beta, d2 / beta


def _hessian(params, beta, y1, y2) -> np.ndarray:
    """Symmetrised central-difference Hessian of ``f / beta`` from the analytic gradient."""
    cols = []
    for k in (0, 1):
        h = 1e-6 * math.sqrt(params.Delta / params.omega(k + 1))
        y = [y1, y2]
        y[k] += h
        up = _scaled_grad(params, beta, *y)
        y[k] -= 2 * h
        down = _scaled_grad(params, beta, *y)
        cols.append([(u - d) / (2 * h) for u, d in zip(up, down)])
    H = np.array(cols).T
    return 0.5 * (H + H.T)


def _classify_kind(params, beta, y1, y2) -> Kind:
    w = np.linalg.eigvalsh(_hessian(params, beta, y1, y2))
    if w[0] > 0:
        return Kind.MINIMUM
    if w[1] < 0:
        return Kind.MAXIMUM
    return Kind.SADDLE


def _project(v: np.ndarray, scale: float) -> np.ndarray:
    v = np.maximum(v, 0.0)
    # roundoff-level amplitudes are the symmetric axis itself
    v[v < 1e-14 * scale] = 0.0
    return v


def _newton(params, beta, y, max_iter: int = 200):
    """Damped Newton on ``f / beta`` over ``y >= 0``; used when the
    alternating 1-D sweeps crawl along a curved valley."""
    y = np.array(y, dtype=float)
    scale = min(math.sqrt(params.Delta / params.omega(n)) for n in (1, 2))

    def fval(v):
        return f_general(params, beta, (v[0], 0.0, v[1], 0.0)).f / beta

    f0 = fval(y)
    for _ in range(max_iter):
        g = np.array(_scaled_grad(params, beta, *y))
        w, v = np.linalg.eigh(_hessian(params, beta, *y))
        convex = w[0] > 0
        # shift to positive definite so the step is always a descent direction
        w = np.maximum(np.abs(w), 1e-8 * max(1.0, float(np.abs(w).max())))
        d = -(v @ ((v.T @ g) / w))
        norm = float(np.abs(d).max())
        if norm > 0.1 * scale:
            d *= 0.1 * scale / norm
            norm = 0.1 * scale
        if convex and norm < 1e-6 * scale:
            # the decrease in f is below its resolution here: plain Newton step
            trial = _project(y + d, scale)
        else:
            t = 1.0
            while True:
                trial = _project(y + t * d, scale)
                if fval(trial) <= f0 or t * norm < STEP_TOL:
                    break
                t *= 0.5
        moved = float(np.abs(trial - y).max())
        y, f0 = trial, min(f0, fval(trial))
        g = _scaled_grad(params, beta, *y)
        if abs(g[0]) < GRAD_TOL and abs(g[1]) < GRAD_TOL and moved < STEP_TOL:
            return [float(y[0]), float(y[1])], g
    raise RefineError(f"Newton polish stalled at ({y[0]}, {y[1]}), scaled gradient {g}")


def refine(params: ModelParams, beta: float, seed: MeanField, step: float | None = None,
           max_sweeps: int = 50) -> StationaryPoint:
    """Polish a grid seed by alternating 1-D minimisations along ``y1``, ``y2``.

    Converged when both components of ``grad f / beta`` are below
    ``GRAD_TOL`` and the last sweep moved less than ``STEP_TOL``.  Seeds that
    are still crawling after ``max_sweeps`` are finished by damped Newton.
    """
    validate(params)
    check_beta(beta)
    y = [abs(seed.y1), abs(seed.y2)]
    steps = []
    for n in (1, 2):
        scale = math.sqrt(params.Delta / params.omega(n))
        steps.append(step if step is not None else 2e-3 * scale)
    g = (math.inf, math.inf)
    for _ in range(max_sweeps):
        moved = 0.0
        for k in (0, 1):
            def grad_k(t, k=k):
                point = list(y)
                point[k] = t
                return _scaled_grad(params, beta, *point)[k]
            try:
                new = _line_minimize(grad_k, y[k], steps[k])
            except RefineError as exc:
                raise RefineError(f"did not converge from seed ({seed.y1}, {seed.y2}); "
                                  f"last iterate ({y[0]}, {y[1]}): {exc}") from None
            moved = max(moved, abs(new - y[k]))
            y[k] = new
        g = _scaled_grad(params, beta, *y)
        if abs(g[0]) < GRAD_TOL and abs(g[1]) < GRAD_TOL and moved < STEP_TOL:
            break
        steps = [min(s, max(moved, 1e-9)) for s in steps]
    else:
        try:
            y, g = _newton(params, beta, y)
        except RefineError as exc:
            raise RefineError(f"did not converge from seed ({seed.y1}, {seed.y2}): {exc}") from None
    mf = MeanField(y[0], 0.0, y[1], 0.0)
    return StationaryPoint(mf, f_general(params, beta, mf).f,
                           _classify_kind(params, beta, *y),
                           branch_of(params, *y), grad=g)


def _dedupe(points: list[StationaryPoint]) -> list[StationaryPoint]:
    out: list[StationaryPoint] = []
    for p in points:
        if not any(abs(p.y1 - q.y1) < 1e-8 and abs(p.y2 - q.y2) < 1e-8 for q in out):
            out.append(p)
    return out


def _order_key(sp: StationaryPoint):
    return (sp.f0, int(sp.branch), sp.y1, sp.y2)


def _pick_global(minima: list[StationaryPoint]) -> StationaryPoint:
    best = min(minima, key=lambda sp: sp.f0)
    tol = TIE_TOL * max(1.0, abs(best.f0))
    tied = [sp for sp in minima if sp.f0 - best.f0 <= tol]
    return min(tied, key=lambda sp: (int(sp.branch), sp.f0, sp.y1, sp.y2))


def local_minima(params: ModelParams, beta: float, spec: GridSpec | None = None,
                 seeds=(), fresh: bool = True) -> list[StationaryPoint]:
    """All distinct refined local minima, global minimum first.

    ``fresh`` runs the full 2-D grid; otherwise only the axis scans and the
    supplied warm-start ``seeds`` are refined.
    """
    spec = spec or default_grid(params)
    cands = list(seeds)
    cands += grid_search(params, beta, spec) if fresh else axis_scan(params, beta, spec)
    cands.append(MeanField())
    step = None
    refined = []
    seen = set()
    for mf in cands:
        key = (round(mf.y1, 12), round(mf.y2, 12))
        if key in seen:
            continue
        seen.add(key)
        refined.append(refine(params, beta, mf, step))
    minima = _dedupe([sp for sp in refined if sp.kind is Kind.MINIMUM]) or _dedupe(refined)
    best = _pick_global(minima)
    rest = sorted((sp for sp in minima if sp is not best), key=_order_key)
    return [best] + rest


def global_minimum(params: ModelParams, beta: float, spec: GridSpec | None = None,
                   seeds=()) -> StationaryPoint:
    """Refine every grid candidate and return the lowest ``f``.

    Ties within ``TIE_TOL`` (relative) prefer trivial, then branch 1, then
    branch 2.  Raises :class:`StructureError` if the winner has both modes
    active.
    """
    best = local_minima(params, beta, spec, seeds)[0]
    check_structure(best)
    return best


def check_structure(sp: StationaryPoint) -> StationaryPoint:
    if sp.branch is Branch.MIXED:
        raise StructureError(f"both modes active at global minimum y=({sp.y1}, {sp.y2})")
    return sp
