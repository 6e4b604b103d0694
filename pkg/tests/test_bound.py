import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from semiguide.bound import (
    NoBoundStateError,
    asymptotic_consistency,
    bound_profile,
    bound_state_exists,
    energy_residual,
    profile_amplitude,
)
from semiguide.dde import asymptotic_amplitude, solve_dde
from semiguide.params import SystemParams, TimeGrid


def test_exists_td2():
    bs = bound_state_exists(SystemParams.reduced(2, 2 * math.pi))
    assert bs is not None
    assert bs.q == 0
    assert bs.atomic_weight == pytest.approx(0.5, abs=1e-15)
    assert abs(bs.q_residual) <= 1e-12


def test_absent_at_pi():
    assert bound_state_exists(SystemParams.reduced(2, math.pi)) is None


def test_small_delay_weights():
    bs = bound_state_exists(SystemParams.reduced(0.1, 0))
    assert bs.atomic_weight == pytest.approx(1 / 1.05, rel=1e-14)
    assert bs.field_norm_sq == pytest.approx(0.05 / 1.05, rel=1e-12)
    assert bs.atomic_weight + bs.field_norm_sq == pytest.approx(1, abs=1e-15)


def test_x0_zero_rejected():
    with pytest.raises(ValueError):
        bound_state_exists(SystemParams(1, 1, 0, 1))


@given(st.floats(0.01, 10), st.integers(1, 6), st.floats(0.1, 5))
def test_existence_independent_of_gamma_and_order(x0, n, gamma):
    p = SystemParams(gamma, 1.0, x0, n * math.pi / x0)
    assert bound_state_exists(p) is not None
    q = SystemParams(gamma, 1.0, x0, (n + 0.3) * math.pi / x0)
    assert bound_state_exists(q) is None


def test_weight_decreasing_in_delay():
    w = [bound_state_exists(SystemParams.reduced(g, 0)).atomic_weight for g in [0.01, 0.1, 1, 2, 10]]
    assert all(a > b for a, b in zip(w, w[1:]))


def test_energy_pinned():
    for gtd in [0.1, 1.0, 7.0]:
        p = SystemParams.reduced(gtd, 0)
        assert abs(energy_residual(p, 0.0)) <= 1e-12


def test_profile_nodes_and_confinement():
    p = SystemParams.reduced(2, 2 * math.pi)
    assert bound_profile(p, 0.0) == 0.0
    assert abs(bound_profile(p, p.x0)) <= 1e-12
    for x in [p.x0 + 1e-12, 1.5, 10.0]:
        assert bound_profile(p, x) == 0.0


def test_profile_norm_by_quadrature():
    p = SystemParams.reduced(2, 2 * math.pi)
    val, _ = quad(lambda x: bound_profile(p, x) ** 2, 0, p.x0, epsrel=1e-12)
    assert val == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("gtd, n", [(2, 1), (0.1, 1), (1, 3)])
def test_profile_amplitude_closed_form(gtd, n):
    base = SystemParams.reduced(gtd, 0)
    p = SystemParams(1, 1, base.x0, n * math.pi / base.x0)
    assert profile_amplitude(p) ** 2 == pytest.approx(2 * p.gamma / p.v / (1 + gtd / 2), rel=1e-9)


def test_profile_without_state():
    with pytest.raises(NoBoundStateError):
        bound_profile(SystemParams.reduced(2, 1.0), 0.2)


def test_asymptotic_consistency_matches_final_value():
    for gtd, phi in [(2, 0), (0.1, 2 * math.pi), (1, math.pi / 2), (3, math.pi)]:
        p = SystemParams.reduced(gtd, phi)
        assert asymptotic_consistency(p) == asymptotic_amplitude(p)


def test_long_run_converges():
    p = SystemParams.reduced(0.1, 2 * math.pi)
    tr = solve_dde(p, TimeGrid.for_delay(p, 20, 60))
    assert abs(tr.values[-1]) == pytest.approx(asymptotic_consistency(p), abs=1e-3)


def test_profile_vectorised_use():
    p = SystemParams.reduced(1, 0)
    xs = np.linspace(0, 1.2, 13)
    vals = np.array([bound_profile(p, x) for x in xs])
    assert np.all(vals[xs > p.x0] == 0)
    assert np.all(vals[(xs > 0) & (xs < p.x0)] > 0)
