"""Per-particle expectation values at a mean-field point.

Bosonic moments follow from the saddle point directly
(``<a_n^dag a_n> / N = y_n0^2``); collective atomic operators reduce to the
single-particle thermal state of ``h(y1_0, y2_0)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .free_energy import thermal_state
from .minimizer import StationaryPoint
from .model import MeanField, ModelParams, check_beta, validate

FIELDS = ("n1", "n2", "p11", "p22", "p33", "c13", "c23", "c12", "f0", "F_per_particle")


@dataclass(frozen=True)
class ObservableSet:
    n1: float
    n2: float
    p11: float
    p22: float
    p33: float
    c13: float
    c23: float
    c12: float
    f0: float
    F_per_particle: float

    def as_dict(self) -> dict:
        return asdict(self)

    def scaled(self, N: float) -> dict:
        """Extensive values for ``N`` particles (intensive ``f0`` excluded)."""
        d = self.as_dict()
        return {k: (v if k == "f0" else v * N) for k, v in d.items()}


def mode_occupations(mf: MeanField):
    return mf.y1 * mf.y1, mf.y2 * mf.y2


def collective_expectation(params: ModelParams, beta: float, mf: MeanField,
                           n: int, m: int) -> float:
    """``<A_n^m> / N``: element ``(n, m)`` (1-based) of the thermal state."""
    if n not in (1, 2, 3) or m not in (1, 2, 3):
        raise ValueError("level indices run over 1..3")
    rho = thermal_state(params, beta, mf.y1, mf.y2)
    return float(rho[n - 1, m - 1])


def observable_set(params: ModelParams, beta: float, sp: StationaryPoint) -> ObservableSet:
    validate(params)
    check_beta(beta)
    rho = thermal_state(params, beta, sp.y1, sp.y2)
    n1, n2 = mode_occupations(sp.mf)
    return ObservableSet(
        n1=n1, n2=n2,
        p11=float(rho[0, 0]), p22=float(rho[1, 1]), p33=float(rho[2, 2]),
        c13=float(rho[0, 2]), c23=float(rho[1, 2]), c12=float(rho[0, 1]),
        f0=sp.f0, F_per_particle=sp.f0 / beta,
    )


def normal_phase_closed_form(params: ModelParams, beta: float):
    """Level populations with both modes empty: plain Boltzmann ratios."""
    check_beta(beta)
    w2 = math.exp(-beta * params.delta)
    w3 = math.exp(-beta * params.Delta)
    z = 1.0 + w2 + w3
    return 1.0 / z, w2 / z, w3 / z


def jump(a: ObservableSet, b: ObservableSet) -> dict:
    """Absolute per-field differences between two observable sets."""
    da, db = a.as_dict(), b.as_dict()
    return {k: abs(db[k] - da[k]) for k in FIELDS if k not in ("f0", "F_per_particle")}


def coherence_bound_ok(obs: ObservableSet, slack: float = 1e-12) -> bool:
    return (abs(obs.c13) <= math.sqrt(obs.p11 * obs.p33) + slack
            and abs(obs.c23) <= math.sqrt(obs.p22 * obs.p33) + slack
            and abs(obs.c12) <= math.sqrt(obs.p11 * obs.p22) + slack)


def as_array(obs: ObservableSet) -> np.ndarray:
    return np.array([getattr(obs, k) for k in FIELDS])
