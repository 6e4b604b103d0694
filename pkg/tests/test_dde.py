import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from semiguide.dde import (
    PoleError,
    StepSizeWarning,
    approx_small_delay,
    asymptotic_amplitude,
    laplace_eval,
    per_delay_ratio,
    series_solution,
    solve_dde,
)
from semiguide.params import GridAlignmentError, Step, Sinusoid, SystemParams, TimeGrid

PHIS = [0.0, math.pi / 2, math.pi, 2 * math.pi]

# high-precision (40 digit) evaluations of the round-trip series
FROZEN = {
    (1.0, math.pi, 3.0): complex(-0.068932948558933315, 0.0),
    (2.0, math.pi / 2, 5.0): complex(0.0062686661598196172, 0.33469524022264474),
    (0.1, math.pi, 10.0): complex(2.754932808863448e-5, 0.0),
    (0.1, 0.0, 60.0): complex(0.95238095238095238, 0.0),
}


def grid_for(p, m=200, t_max=20.0):
    return TimeGrid.for_delay(p, m, t_max)


@pytest.mark.parametrize("key", list(FROZEN))
def test_series_frozen(key):
    gtd, phi, t = key
    assert series_solution(SystemParams.reduced(gtd, phi), t) == pytest.approx(FROZEN[key], abs=1e-13)


def test_series_before_delay_is_exponential():
    p = SystemParams.reduced(2, 1.3)
    for t in [0, 0.5, 1.999]:
        assert series_solution(p, t) == pytest.approx(math.exp(-t / 2), abs=1e-15)


def test_series_long_horizon_no_overflow():
    p = SystemParams.reduced(0.1, math.pi / 2)
    val = series_solution(p, 400.0)
    assert np.isfinite(val) and abs(val) < 1e-10


def test_series_negative_time():
    with pytest.raises(ValueError):
        series_solution(SystemParams.reduced(1, 0), -1)


def test_series_trapping_asymptote():
    assert abs(series_solution(SystemParams.reduced(2, 0), 60)) ** 2 == pytest.approx(0.25, abs=1e-3)


def test_solve_matches_series_at_probe():
    p = SystemParams.reduced(1, math.pi)
    tr = solve_dde(p, grid_for(p, 200, 3.0))
    assert abs(tr.at(3.0) - FROZEN[(1.0, math.pi, 3.0)]) <= 1e-8


@pytest.mark.parametrize("gtd", [0.1, 1.0, 2.0])
@pytest.mark.parametrize("phi", PHIS)
def test_solve_dde_exactness(gtd, phi):
    p = SystemParams.reduced(gtd, phi)
    g = grid_for(p, 200, 20.0)
    tr = solve_dde(p, g)
    ts = g.times[:: max(1, g.n_steps // 400)]
    exact = np.array([series_solution(p, t) for t in ts])
    assert np.max(np.abs(tr.values[:: max(1, g.n_steps // 400)] - exact)) <= 1e-8


def test_mirrorless_surrogate():
    p = SystemParams.reduced(30, 0.7)
    g = TimeGrid(dt=0.01, n_steps=2000)  # t_max = 20 < t_d = 30
    tr = solve_dde(p, g)
    assert np.max(np.abs(tr.pe - np.exp(-g.times))) <= 1e-10


def test_early_time_independent_of_phi():
    base = None
    for phi in [0, 1, math.pi, 5]:
        p = SystemParams(1, 1, 1.0, phi / 2 if phi else 2 * math.pi)
        g = TimeGrid.for_delay(p, 100, 5)
        v = solve_dde(p, g).values[:100]
        if base is None:
            base = v
        assert np.array_equal(v, base)


@pytest.mark.parametrize("phi", [math.pi / 3, math.pi / 2, math.pi, 3 * math.pi / 2])
def test_small_delay_monotone(phi):
    p = SystemParams.reduced(0.1, phi)
    g = grid_for(p, 20, 20)
    mag = np.abs(solve_dde(p, g).values)[20:]
    assert np.all(np.diff(mag) <= 1e-12)


def test_small_delay_trapping_nearly_flat():
    # at the trapping phase the exact amplitude creeps up from exp(-G t_d/2)
    # to 1/(1 + G t_d/2) after the first return, so it is not monotone
    p = SystemParams.reduced(0.1, 0)
    g = grid_for(p, 20, 20)
    mag = np.abs(solve_dde(p, g).values)[20:]
    assert mag.min() >= math.exp(-0.05) - 1e-12
    assert mag.max() <= 1 / 1.05 + 2e-5


@pytest.mark.parametrize("prof", [Step(t_on=3, delta=4), Sinusoid(t_on=0, amplitude=3, period=2)])
def test_contractive_with_detuning(prof):
    p = SystemParams.reduced(1, 0.4)
    g = grid_for(p, 200, 20)
    assert np.max(np.abs(solve_dde(p, g, prof).values)) <= 1 + 1e-9


def test_final_value():
    for phi, target, tol in [(0, 0.5, 1e-3), (math.pi / 2, 0, 2e-2), (math.pi, 0, 2e-2)]:
        p = SystemParams.reduced(2, phi)
        tr = solve_dde(p, grid_for(p, 200, 60))
        assert abs(tr.values[-1]) == pytest.approx(target, abs=tol)


def test_revival_shape():
    p = SystemParams.reduced(0.1, 0)
    g = grid_for(p, 20, 60)
    tr = solve_dde(p, g, Step(t_on=30, delta=5))
    mag = np.abs(tr.values)
    j_on = g.index(30.0)
    assert np.ptp(mag[g.index(20.0):j_on + 1]) < 1e-6
    assert mag[j_on] == pytest.approx(1 / 1.05, abs=1e-4)
    assert mag[-1] < 0.25 * mag[j_on]


def test_zero_delay_closed_form():
    p = SystemParams(1, 1, 0, 1)
    tr = solve_dde(p, TimeGrid(dt=0.01, n_steps=100))
    assert np.allclose(tr.values, 1.0)


def test_zero_delay_with_detuning_uses_stepper():
    p = SystemParams(2, 1, 0, 1)
    tr = solve_dde(p, TimeGrid(dt=0.001, n_steps=1000), Step(t_on=0, delta=3))
    assert np.allclose(tr.values, np.exp(-3j * tr.times), atol=1e-10)


@pytest.mark.filterwarnings("ignore::semiguide.dde.StepSizeWarning")
def test_odd_delay_rejected():
    p = SystemParams.reduced(1, 0)
    with pytest.raises(GridAlignmentError):
        solve_dde(p, TimeGrid(dt=1 / 3, n_steps=30))


def test_step_warning():
    p = SystemParams.reduced(1, 0)
    with pytest.warns(StepSizeWarning):
        solve_dde(p, TimeGrid(dt=0.5, n_steps=10))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_dde(p, TimeGrid(dt=0.05, n_steps=10))


def test_approx_small_delay_trapping_constant():
    p = SystemParams.reduced(0.3, 0)
    vals = [abs(approx_small_delay(p, t)) for t in [0.5, 1, 7]]
    assert vals == pytest.approx([math.exp(-0.15)] * 3, rel=1e-12)


def test_approx_small_delay_accuracy_example():
    p = SystemParams.reduced(0.01, math.pi / 2)
    ex = abs(series_solution(p, 2.0))
    assert abs(abs(approx_small_delay(p, 2.0)) - ex) / ex <= 1e-2


def test_per_delay_ratio():
    assert per_delay_ratio(SystemParams.reduced(0.1, math.pi)) == pytest.approx(0.95 / 1.05, abs=1e-12)


def test_recursion_identity():
    p = SystemParams.reduced(0.01, math.pi / 2)
    g = grid_for(p, 20, 3)
    v = solve_dde(p, g).values
    n = np.arange(100, 300)
    ratios = v[(n + 1) * 20] / v[n * 20]
    assert np.max(np.abs(ratios / per_delay_ratio(p) - 1)) <= 1e-3


def test_asymptotic_amplitude():
    assert asymptotic_amplitude(SystemParams.reduced(2, 0)) == 0.5
    assert asymptotic_amplitude(SystemParams.reduced(0.1, 0)) == pytest.approx(0.952381, abs=1e-6)
    for gtd in [0.1, 1, 5]:
        assert asymptotic_amplitude(SystemParams.reduced(gtd, math.pi / 2)) == 0


def test_laplace_final_value():
    for gtd in [0.1, 2, 5]:
        p = SystemParams.reduced(gtd, 0)
        s = 1e-6
        assert (s * laplace_eval(p, s)).real == pytest.approx(asymptotic_amplitude(p), abs=1e-4)


def test_laplace_zero_delay():
    p = SystemParams(1, 1, 0, 1)
    assert laplace_eval(p, 0.37) == pytest.approx(1 / 0.37)
    with pytest.raises(PoleError):
        laplace_eval(p, 0)


def test_laplace_against_quadrature():
    p = SystemParams.reduced(1, math.pi)
    f = lambda t: math.exp(-t) * series_solution(p, t).real
    ref, _ = quad(f, 0, 60, points=[1, 2, 3, 4, 5], limit=400)
    val = laplace_eval(p, 1.0)
    assert abs(val - ref) / abs(ref) <= 1e-4
    assert val.real == pytest.approx(0.59384548495130938, rel=1e-12)
