import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_dicke.minimizer import global_minimum
from lambda_dicke.model import MeanField, ModelParams, critical_coupling
from lambda_dicke.observables import (FIELDS, as_array, coherence_bound_ok,
                                      collective_expectation, jump, normal_phase_closed_form,
                                      observable_set)


def test_normal_phase_closed_form(base):
    beta = 4.0
    sp = global_minimum(base.replace(g1=0.1, g2=0.1), beta)
    obs = observable_set(base, beta, sp)
    p11, p22, p33 = normal_phase_closed_form(base, beta)
    assert obs.p11 == pytest.approx(p11, abs=1e-15)
    assert obs.p22 == pytest.approx(p22, abs=1e-15)
    assert obs.p33 == pytest.approx(p33, abs=1e-15)
    assert (obs.c13, obs.c23, obs.c12) == (0.0, 0.0, 0.0)
    assert p11 / p22 == pytest.approx(math.exp(beta * 0.1), rel=1e-14)


def test_sr1_populations(base):
    p = base.replace(g1=1.5 * critical_coupling(base, 1))
    beta = 100.0
    sp = global_minimum(p, beta)
    obs = observable_set(p, beta, sp)
    assert obs.n1 == pytest.approx(sp.y1**2)
    assert obs.n2 == 0.0
    assert obs.p11 + obs.p22 + obs.p33 == pytest.approx(1.0, abs=1e-14)
    assert obs.c13 != 0.0 and obs.c23 == 0.0
    # stationarity ties the coherence to the field: omega1 y1 = -2 g1 c13
    assert p.omega1 * sp.y1 == pytest.approx(-2 * p.g1 * obs.c13, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(beta=st.floats(0.1, 1e3), g1=st.floats(0, 2), g2=st.floats(0, 2),
       y1=st.floats(0, 2), y2=st.floats(0, 2))
def test_coherence_bounds(beta, g1, g2, y1, y2):
    from lambda_dicke.minimizer import Branch, Kind, StationaryPoint

    p = ModelParams(0.1, 1.0, 1.1, 0.8, g1, g2)
    sp = StationaryPoint(MeanField(y1, 0, y2, 0), 0.0, Kind.MINIMUM, Branch.TRIVIAL)
    obs = observable_set(p, beta, sp)
    assert coherence_bound_ok(obs)
    assert min(obs.p11, obs.p22, obs.p33) >= -1e-15


def test_collective_expectation_indices(base):
    mf = MeanField(0.2, 0, 0.1, 0)
    p = base.replace(g1=0.7, g2=0.5)
    assert collective_expectation(p, 2.0, mf, 1, 3) == collective_expectation(p, 2.0, mf, 3, 1)
    with pytest.raises(ValueError):
        collective_expectation(p, 2.0, mf, 0, 1)


def test_scaled_and_jump(base):
    sp = global_minimum(base, 1.0)
    obs = observable_set(base, 1.0, sp)
    s = obs.scaled(1000)
    assert s["p11"] == pytest.approx(1000 * obs.p11)
    assert s["f0"] == obs.f0
    assert set(jump(obs, obs)) == set(FIELDS) - {"f0", "F_per_particle"}
    assert all(v == 0 for v in jump(obs, obs).values())
    assert as_array(obs).shape == (len(FIELDS),)
