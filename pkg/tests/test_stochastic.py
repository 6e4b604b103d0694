import math

import numpy as np
import pytest

from semiguide.dde import solve_dde
from semiguide.params import Step, SystemParams, TimeGrid
from semiguide.stochastic import (
    NoiseParams,
    ensemble_average,
    fit_amplitude_decay,
    phase_kicks,
    realization_rng,
    reflection_coefficient,
    solve_noisy_dde,
)


def test_reflection_coefficient():
    assert reflection_coefficient(1.0) == 1
    assert reflection_coefficient(0.0) == 0
    r = reflection_coefficient(0.98)
    assert r == pytest.approx(0.98 + 0.14j, abs=1e-12)
    assert abs(r) ** 2 == pytest.approx(0.98, abs=1e-12)
    with pytest.raises(ValueError):
        reflection_coefficient(1.1)


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(R=-0.1)
    with pytest.raises(ValueError):
        NoiseParams(n_realizations=0)
    assert NoiseParams(gamma_ext=0.5).gamma_tot(SystemParams.reduced(1, 0)) == 1.5


@pytest.mark.parametrize("det", [None, Step(t_on=4, delta=2)])
def test_reduction_bitwise(det):
    p = SystemParams.reduced(1, 0.8)
    g = TimeGrid.for_delay(p, 100, 10)
    a = solve_noisy_dde(p, NoiseParams(), g, det).values
    b = solve_dde(p, g, det).values
    assert np.array_equal(a, b)


def test_pure_dephasing_keeps_modulus():
    p = SystemParams(0.0, 1.0, 1.0, math.pi)
    g = TimeGrid(dt=0.01, n_steps=2000)
    noise = NoiseParams(delta_omega=0.5, n_realizations=5)
    for i in range(5):
        v = solve_noisy_dde(p, noise, g, realization_index=i).values
        assert np.max(np.abs(np.abs(v) - 1)) <= 1e-12


def test_modulus_bound_full_model():
    p = SystemParams.reduced(2, 0)
    g = TimeGrid.for_delay(p, 100, 20)
    noise = NoiseParams(gamma_ext=0.2, R=0.9, delta_omega=1.0, n_realizations=8)
    for i in range(8):
        assert np.max(np.abs(solve_noisy_dde(p, noise, g, realization_index=i).values)) <= 1 + 1e-9


def test_dephasing_rate_fit():
    p = SystemParams(0.0, 1.0, 1.0, math.pi)
    g = TimeGrid(dt=0.01, n_steps=300)
    noise = NoiseParams(delta_omega=0.5, n_realizations=1000, master_seed=11)
    rows = np.vstack([solve_noisy_dde(p, noise, g, realization_index=i).values for i in range(1000)])
    rate, se = fit_amplitude_decay(g, rows, t_fit=3.0)
    assert abs(rate - 0.5) <= 3 * se


def test_dephasing_plus_loss_without_mirror():
    p = SystemParams(1.0, 1.0, 1.0, math.pi)
    g = TimeGrid(dt=0.01, n_steps=200)
    noise = NoiseParams(gamma_ext=0.5, R=0.0, delta_omega=0.3, n_realizations=800, master_seed=3)
    rows = np.vstack([solve_noisy_dde(p, noise, g, realization_index=i).values for i in range(800)])
    rate, se = fit_amplitude_decay(g, rows, t_fit=2.0)
    assert abs(rate - (0.75 + 0.3)) <= 3 * se


def test_lossy_mirror_only():
    # with R = 0 the feedback vanishes and the decay is exponential at gamma_tot
    p = SystemParams.reduced(1, 0)
    g = TimeGrid.for_delay(p, 100, 10)
    v = solve_noisy_dde(p, NoiseParams(gamma_ext=1.0, R=0.0), g).values
    assert np.allclose(np.abs(v) ** 2, np.exp(-2 * g.times), atol=1e-10)


def test_single_realization_stderr_zero():
    p = SystemParams.reduced(1, 0)
    g = TimeGrid.for_delay(p, 20, 5)
    noise = NoiseParams(delta_omega=0.3, n_realizations=1)
    res = ensemble_average(p, noise, g)
    assert np.array_equal(res.stderr, np.zeros(g.n_steps + 1))
    assert np.array_equal(res.mean_pe, solve_noisy_dde(p, noise, g).pe)


def test_ensemble_invariants_and_workers():
    p = SystemParams.reduced(0.1, 0)
    g = TimeGrid.for_delay(p, 20, 10)
    noise = NoiseParams(delta_omega=0.25, n_realizations=12, master_seed=99)
    a = ensemble_average(p, noise, g)
    b = ensemble_average(p, noise, g, workers=3)
    assert np.array_equal(a.mean_pe, b.mean_pe) and np.array_equal(a.stderr, b.stderr)
    assert a.mean_pe[0] == 1 and np.all((a.mean_pe >= 0) & (a.mean_pe <= 1 + 1e-12))
    assert np.all(a.stderr >= 0)


def test_streams_are_per_index():
    x = realization_rng(5, 3).standard_normal(4)
    assert np.array_equal(x, realization_rng(5, 3).standard_normal(4))
    assert not np.array_equal(x, realization_rng(5, 4).standard_normal(4))
    assert not np.array_equal(x, realization_rng(6, 3).standard_normal(4))
    g = TimeGrid(dt=0.1, n_steps=10)
    assert phase_kicks(NoiseParams(), g, 0) is None
    k = phase_kicks(NoiseParams(delta_omega=1.0), g, 0)
    assert np.allclose(np.abs(k), 1)


def test_kick_variance():
    g = TimeGrid(dt=0.02, n_steps=200000)
    k = phase_kicks(NoiseParams(delta_omega=0.7), g, 0)
    assert np.var(np.angle(k)) == pytest.approx(2 * 0.7 * 0.02, rel=2e-2)


def test_realization_index_range():
    p = SystemParams.reduced(1, 0)
    with pytest.raises(IndexError):
        solve_noisy_dde(p, NoiseParams(n_realizations=3), TimeGrid(dt=0.01, n_steps=10),
                        realization_index=3)


def test_dephasing_erodes_trapping():
    p = SystemParams.reduced(0.1, 0)
    g = TimeGrid.for_delay(p, 20, 30)
    pe = [ensemble_average(p, NoiseParams(delta_omega=w, n_realizations=100), g).mean_pe[-1]
          for w in (0.0, 0.25, 1.0)]
    assert pe[0] > pe[1] > pe[2]
    assert pe[1] > 0.1
