"""Closed forms of the zero-temperature limit at ``delta = 0``.

Used as oracles for the finite-temperature pipeline, which realises
"zero temperature" as ``beta * Delta = 1e4``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .free_energy import omega, q_func
from .model import ModelParams, ParameterError, critical_coupling, validate

ZERO_T_BETA_DELTA = 1e4


class QStep(enum.Enum):
    ZERO = 0
    ONE = 1
    TRANSITIONAL = "transitional"


@dataclass(frozen=True)
class ZeroTResult:
    branch: int
    y_n0: float
    n_active: float
    p33: float


def y_zero_T(params: ModelParams, branch: int) -> float:
    """``(g_n / omega_n) sqrt(1 - (g_nc / g_n)^4)`` above threshold, else 0.

    Derived for ``delta = 0``; for small ``delta`` it is only approximate.
    """
    validate(params)
    g = params.g(branch)
    gc = critical_coupling(params, branch)
    if g <= gc:
        return 0.0
    return g / params.omega(branch) * math.sqrt(1.0 - (gc / g) ** 4)


def p33_zero_T(params: ModelParams, branch: int = 1) -> float:
    """Upper-level population ``(1 - (g_c / g)^2) / 2`` in the active phase."""
    validate(params)
    g = params.g(branch)
    gc = critical_coupling(params, branch)
    if g < gc:
        raise ParameterError(f"g{branch} is below its critical coupling")
    return 0.5 * (1.0 - (gc / g) ** 2)


def p33_finite_T_closed(params: ModelParams, beta: float, y1: float) -> float:
    """Branch-1 upper-level population at ``delta = 0`` as a function of ``y1``.

    Equivalent to ``[1 - e^X + (1 + e^X) Omega] / (2 Omega [1 + e^X + e^Y])``
    with ``X = beta Delta Omega`` and ``Y = beta Delta (Omega + 1) / 2``; the
    largest exponential ``e^X`` is divided out.
    """
    validate(params)
    if params.delta != 0:
        raise ParameterError("closed form requires delta == 0")
    Om = float(omega(params, y1, 0.0))
    X = beta * params.Delta * Om
    Y = 0.5 * beta * params.Delta * (Om + 1.0)
    eX = math.exp(-X)
    num = (Om - 1.0) + eX * (Om + 1.0)
    den = 2.0 * Om * (1.0 + eX + math.exp(Y - X))
    return num / den


def q_step(beta: float, Delta: float, Omega: float, tol: float = 1e-9) -> QStep:
    q = q_func(beta, Delta, Omega)
    if abs(q) <= tol:
        return QStep.ZERO
    if abs(q - 1.0) <= tol:
        return QStep.ONE
    return QStep.TRANSITIONAL


def zero_t_result(params: ModelParams, branch: int) -> ZeroTResult:
    y = y_zero_T(params, branch)
    p33 = p33_zero_T(params, branch) if y > 0 else 0.0
    return ZeroTResult(branch, y, y * y, p33)
