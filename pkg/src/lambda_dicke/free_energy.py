"""Laplace exponent ``f`` of the partition sum and its gradient.

``Z ~ exp(-N f0)`` with ``f0`` the global minimum of

    f = beta * sum_n omega_n (y_n^2 + z_n^2) - ln Tr exp(-beta h(y1, y2)).

Two routes are provided: the general spectral one and the hyperbolic closed
form valid at ``delta = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import MeanField, ModelParams, ParameterError, check_beta, validate
from .spectrum import boltzmann, build_h, cardano_eigvalsh, eigendecompose


@dataclass(frozen=True)
class FreeEnergyValue:
    f: float
    beta: float

    @property
    def F_per_particle(self) -> float:
        return self.f / self.beta


def _omega_sq_minus_one(params: ModelParams, y1, y2):
    D = params.Delta
    return 16.0 * (params.g1**2 * np.square(y1) + params.g2**2 * np.square(y2)) / (D * D)


def omega(params: ModelParams, y1, y2):
    """``Omega = sqrt(1 + 16 (g1^2 y1^2 + g2^2 y2^2) / Delta^2)``."""
    return np.sqrt(1.0 + _omega_sq_minus_one(params, y1, y2))


def _omega_minus_one(x2):
    return x2 / (np.sqrt(1.0 + x2) + 1.0)


def q_func(beta: float, Delta: float, Omega):
    """Hyperbolic ratio ``2 e^{-a} sinh(a Omega) / (1 + 2 e^{-a} cosh(a Omega))``
    with ``a = beta Delta / 2``, evaluated without overflow."""
    a = 0.5 * beta * Delta
    Omega = np.asarray(Omega, dtype=float)
    u = a * (Omega - 1.0)
    tail = np.exp(-a * (Omega + 1.0))
    with np.errstate(over="ignore"):
        # u >= 0: divide through by exp(u); u < 0: the bare form is safe
        big = -np.expm1(-2.0 * a * Omega) / (np.exp(-np.abs(u)) + 1.0 + np.exp(-2.0 * a * Omega))
        small = (np.exp(np.minimum(u, 0.0)) - tail) / (1.0 + np.exp(np.minimum(u, 0.0)) + tail)
    out = np.where(u >= 0, big, small)
    return float(out) if out.ndim == 0 else out


def _mean_field(mf) -> MeanField:
    if isinstance(mf, MeanField):
        return mf
    return MeanField(*mf)


def _quadratic(params: ModelParams, beta: float, mf: MeanField) -> float:
    return beta * (params.omega1 * (mf.y1**2 + mf.z1**2)
                   + params.omega2 * (mf.y2**2 + mf.z2**2))


def _log_trace_delta0(beta, Delta, x2):
    a = 0.5 * beta * Delta
    om1 = _omega_minus_one(x2)
    u = a * om1
    # ln[1 + exp(u) + exp(-a(Omega + 1))] = u + ln[1 + exp(-u) + exp(-2 a Omega)]
    return u + np.log1p(np.exp(-u) + np.exp(-2.0 * a * (om1 + 1.0)))


def f_delta0(params: ModelParams, beta: float, mf) -> FreeEnergyValue:
    """Closed-form exponent, valid only for degenerate ground levels."""
    validate(params)
    check_beta(beta)
    if params.delta != 0:
        raise ParameterError("f_delta0 requires delta == 0")
    mf = _mean_field(mf)
    x2 = _omega_sq_minus_one(params, mf.y1, mf.y2)
    f = _quadratic(params, beta, mf) - float(_log_trace_delta0(beta, params.Delta, x2))
    return FreeEnergyValue(f, beta)


def log_trace(params: ModelParams, beta: float, y1: float, y2: float) -> float:
    """``ln Tr exp(-beta h)`` from the spectrum, shifted by the lowest level."""
    eps = eigendecompose(build_h(params, y1, y2)).values
    rest = np.exp(-beta * (eps[1:] - eps[0]))
    return -beta * float(eps[0]) + math.log1p(float(rest[0] + rest[1]))


def f_general(params: ModelParams, beta: float, mf) -> FreeEnergyValue:
    validate(params)
    check_beta(beta)
    mf = _mean_field(mf)
    f = _quadratic(params, beta, mf) - log_trace(params, beta, mf.y1, mf.y2)
    return FreeEnergyValue(f, beta)


def f_grid(params: ModelParams, beta: float, y1, y2) -> np.ndarray:
    """Vectorised ``f`` at ``z = 0`` over broadcastable ``y1``, ``y2`` arrays."""
    y1, y2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
    h = np.zeros(y1.shape + (3, 3))
    h[..., 1, 1] = params.delta
    h[..., 2, 2] = params.Delta
    h[..., 0, 2] = h[..., 2, 0] = 2.0 * params.g1 * y1
    h[..., 1, 2] = h[..., 2, 1] = 2.0 * params.g2 * y2
    eps = cardano_eigvalsh(h)
    shift = eps[..., :1]
    log_tr = -beta * shift[..., 0] + np.log(np.exp(-beta * (eps - shift)).sum(axis=-1))
    quad = beta * (params.omega1 * y1**2 + params.omega2 * y2**2)
    return quad - log_tr


def thermal_state(params: ModelParams, beta: float, y1: float, y2: float) -> np.ndarray:
    """Normalised single-particle thermal state at ``(y1, y2)``."""
    return boltzmann(eigendecompose(build_h(params, y1, y2)), beta).state


def grad_f(params: ModelParams, beta: float, y1: float, y2: float):
    """Analytic ``(df/dy1, df/dy2)`` at ``z = 0``.

    Hellmann-Feynman through the thermal state ``rho``:
    ``df/dy1 = 2 beta omega1 y1 + 4 beta g1 rho_13`` and likewise for mode 2.
    """
    rho = thermal_state(params, beta, y1, y2)
    d1 = 2.0 * beta * (params.omega1 * y1 + 2.0 * params.g1 * rho[0, 2])
    d2 = 2.0 * beta * (params.omega2 * y2 + 2.0 * params.g2 * rho[1, 2])
    return d1, d2


def stationarity_residual(params: ModelParams, beta: float, branch: int, Omega):
    """``(g_c / g)^2 Omega - q(Omega)``; its sign is the sign of ``df/dy_n``."""
    g = params.g(branch)
    gc2 = params.Delta * params.omega(branch) / 4.0
    return gc2 / (g * g) * np.asarray(Omega) - q_func(beta, params.Delta, Omega)
