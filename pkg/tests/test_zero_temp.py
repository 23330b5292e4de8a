import math

import pytest

from lambda_dicke.free_energy import thermal_state
from lambda_dicke.model import ModelParams, ParameterError, critical_coupling
from lambda_dicke.zero_temp import (QStep, p33_finite_T_closed, p33_zero_T, q_step, y_zero_T,
                                    zero_t_result)


def test_y_zero_below_threshold(degenerate):
    assert y_zero_T(degenerate.replace(g1=0.1), 1) == 0.0


def test_y_zero_solves_energy_minimum(degenerate):
    # T = 0 energy per particle: omega y^2 + Delta/2 (1 - Omega); minimise numerically
    from scipy.optimize import minimize_scalar

    p = degenerate.replace(g1=1.7 * critical_coupling(degenerate, 1))
    def e(y):
        Om = math.sqrt(1 + 16 * p.g1**2 * y**2)
        return p.omega1 * y * y + 0.5 * (1 - Om)
    ref = minimize_scalar(e, bounds=(0, 3), method="bounded", options={"xatol": 1e-13}).x
    assert y_zero_T(p, 1) == pytest.approx(ref, rel=1e-7)


def test_p33_zero_T(degenerate):
    p = degenerate.replace(g1=2 * critical_coupling(degenerate, 1))
    assert p33_zero_T(p) == pytest.approx(0.375)
    with pytest.raises(ParameterError):
        p33_zero_T(degenerate.replace(g1=0.1))


@pytest.mark.parametrize("beta", [0.5, 5.0, 1e4])
def test_p33_finite_T_closed_matches_thermal_state(degenerate, beta):
    p = degenerate.replace(g1=0.9)
    y = 0.4
    assert p33_finite_T_closed(p, beta, y) == pytest.approx(
        thermal_state(p, beta, y, 0.0)[2, 2], abs=1e-14)


def test_q_step():
    assert q_step(1e4, 1.0, 1.5) is QStep.ONE
    assert q_step(1e4, 1.0, 1.0) is QStep.TRANSITIONAL
    assert q_step(1e-12, 1.0, 1.0) is QStep.ZERO


def test_zero_t_result(degenerate):
    p = degenerate.replace(g1=3 * critical_coupling(degenerate, 1))
    r = zero_t_result(p, 1)
    assert r.n_active == pytest.approx(r.y_n0**2)
    assert r.p33 == pytest.approx(0.5 * (1 - 1 / 9))
