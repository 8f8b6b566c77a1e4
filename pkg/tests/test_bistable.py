import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from telegraph_power import HorizonError, ParameterError, SwitchSequence, TelegraphForce, iterate_switch_values
from telegraph_power.bistable import (
    Density,
    DoubleWellConfig,
    count_local_maxima,
    first_crossing_time,
    is_bimodal,
    mu_sweep,
    potential,
    potential_curvature,
    potential_gradient,
    simulate_double_well,
    simulate_ensemble,
    trajectory_density,
)
from telegraph_power.ode import rk4_piecewise
from telegraph_power.switching import sample_until
from telegraph_power.trajectory import Trajectory


def test_critical_points_and_values():
    for x in (0.0, 0.5, 1.0):
        assert potential_gradient(x) == 0.0
    assert potential(0.5) == 0.0625
    assert potential(0.0) == potential(1.0) == 0.0
    assert potential_curvature(0.0) == potential_curvature(1.0) == 2.0
    assert potential_curvature(0.5) == -1.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-2.0, 3.0))
def test_gradient_matches_central_difference(x):
    h = 1e-4
    fd = (potential(x + h) - potential(x - h)) / (2 * h)
    # truncation h^2/6 |phi'''| with |phi'''| <= 84 on [-2, 3], plus rounding
    assert abs(fd - potential_gradient(x)) <= h**2 / 6 * 84 + 1e-8
    assert potential_gradient(x) == pytest.approx(2 * x * (1 - x) * (1 - 2 * x), abs=1e-12)


@pytest.mark.parametrize("sign, intervals", [(1, [1e3]), (-1, [1e-9, 1e3])])
def test_frozen_force_reaches_bisection_root(sign, intervals):
    bracket = (1.0, 2.0) if sign > 0 else (-1.0, 0.0)
    root = bisect(lambda x: potential_gradient(x) - sign, *bracket, xtol=1e-15)
    config = DoubleWellConfig(mu=-3.0, horizon=60.0)
    traj = simulate_double_well(config, SwitchSequence.from_intervals(intervals))
    assert traj.states[-1] == pytest.approx(root, abs=1e-6)


def test_frozen_roots_values():
    assert bisect(lambda x: potential_gradient(x) - 1, 1, 2, xtol=1e-15) == pytest.approx(1.2606898534022837, abs=1e-12)
    assert bisect(lambda x: potential_gradient(x) + 1, -1, 0, xtol=1e-15) == pytest.approx(-0.2606898534022838, abs=1e-12)


@pytest.fixture(scope="module")
def sample_run():
    config = DoubleWellConfig(mu=-2.0, horizon=10.0)
    seq = sample_until(config.spec, config.horizon, 3)
    return config, seq, simulate_double_well(config, seq)


def test_steps_are_switch_aligned(sample_run):
    config, seq, traj = sample_run
    inside = seq.times[(seq.times > 0) & (seq.times < config.horizon)]
    assert np.all(np.isin(inside, traj.times))
    assert traj.times[0] == 0.0 and traj.times[-1] == config.horizon
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(np.diff(traj.times) <= config.step * (1 + 1e-12))


def test_matches_generic_switch_aligned_rk4(sample_run):
    config, seq, traj = sample_run
    cut = np.append(seq.times[seq.times < config.horizon], config.horizon)
    ref = rk4_piecewise(
        lambda t, x, k: -potential_gradient(x) + (1.0 if k % 2 == 0 else -1.0), 0.0, cut, config.step
    )
    np.testing.assert_allclose(np.interp(cut, traj.times, traj.states), ref, atol=1e-12)


def test_matches_high_accuracy_reference(sample_run):
    config, seq, traj = sample_run
    x = 0.0
    cut = np.append(seq.times[seq.times < config.horizon], config.horizon)
    for k in range(cut.size - 1):
        f = 1.0 if k % 2 == 0 else -1.0
        sol = solve_ivp(lambda t, y: -potential_gradient(y) + f, (cut[k], cut[k + 1]), [x],
                        method="DOP853", rtol=1e-13, atol=1e-14)
        x = sol.y[0, -1]
    assert traj.states[-1] == pytest.approx(x, abs=1e-10)


def test_short_sequence_raises():
    config = DoubleWellConfig(mu=-3.0)
    with pytest.raises(HorizonError):
        simulate_double_well(config, SwitchSequence.from_intervals([1.0, 2.0]))


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"horizon": 0.0}, "horizon"),
        ({"step": -1.0}, "step"),
        ({"barrier": 1.0}, "barrier"),
        ({"n_realizations": 0}, "n_realizations"),
        ({"mu": float("nan")}, "mu"),
    ],
)
def test_config_validation(kwargs, field):
    params = {"mu": -3.0, **kwargs}
    with pytest.raises(ParameterError) as info:
        DoubleWellConfig(**params)
    assert info.value.field == field


def test_frequency_of_config():
    assert DoubleWellConfig(mu=-6.0).frequency == pytest.approx(math.exp(5.5), rel=1e-14)
    assert DoubleWellConfig(mu=-0.5).frequency == 1.0


def test_first_crossing_interpolates():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    assert first_crossing_time(Trajectory(t, np.array([0.0, 0.2, 0.7, 0.1])), 0.5) == pytest.approx(1.6)
    assert first_crossing_time(Trajectory(t, np.array([0.0, 0.2, 0.4, 0.1])), 0.5) is None


def test_high_frequency_stays_in_basin():
    ens = simulate_ensemble(DoubleWellConfig(mu=-6.0, seed=7))
    assert ens.average_survival_time() == 120.0
    assert all(r.first_crossing_time is None for r in ens.records)
    assert count_local_maxima(ens.density.density) == 1
    assert abs(ens.density.centers[np.argmax(ens.density.density)]) < 0.1


def test_low_frequency_escapes_and_is_bimodal():
    ens = simulate_ensemble(DoubleWellConfig(mu=-0.5, n_realizations=100))
    ast = ens.average_survival_time()
    assert ast < 12.0
    assert all(0 < r.first_crossing_time <= 120 for r in ens.records)
    assert is_bimodal(ens.density)


def test_sample_trajectories_switch_or_stay():
    quiet = simulate_ensemble(DoubleWellConfig(mu=-4.538, n_realizations=1))
    busy = simulate_ensemble(DoubleWellConfig(mu=-3.7401, n_realizations=1))
    assert quiet.records[0].first_crossing_time is None
    assert busy.records[0].first_crossing_time is not None


def test_density_normalized():
    for mu in (-6.0, -2.0):
        dens = trajectory_density(DoubleWellConfig(mu=mu, n_realizations=10), bins=37)
        assert dens.edges.size == 38
        assert dens.total_mass() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        trajectory_density(DoubleWellConfig(mu=-2.0, n_realizations=1), bins=9)


def test_determinism():
    cfg = DoubleWellConfig(mu=-3.0, n_realizations=20, seed=11)
    a = simulate_ensemble(cfg)
    b = simulate_ensemble(cfg)
    assert a.average_survival_time() == b.average_survival_time()
    assert a.density.density.tobytes() == b.density.density.tobytes()


@pytest.mark.parametrize("mu", [-6.0, -5.5, -5.0])
def test_linearization_order_of_magnitude(mu):
    # x' = -2x + F is v' = -v + F/2 in time 2t, so intervals double and the bound halves
    config = DoubleWellConfig(mu=mu)
    start = config.burn_in_fraction * config.horizon
    for i in range(5):
        seq = sample_until(config.spec, config.horizon, config.realization_seed(i))
        _, x = simulate_double_well(config, seq).window(start)
        n = int(np.searchsorted(seq.times, config.horizon))
        v = iterate_switch_values(TelegraphForce.from_intervals(2 * seq.intervals[:n])).values
        k_lin = 0.5 * np.max(np.abs(v[int(np.searchsorted(seq.times, start)):]))
        assert 1 / 3 <= np.max(np.abs(x)) / k_lin <= 3


def test_mu_sweep_columns_and_threshold():
    template = DoubleWellConfig(mu=-6.0, n_realizations=30)
    sweep = mu_sweep([-6.0, -5.0, -3.0, -1.0], template)
    assert sweep.columns == ("mu", "f_d", "AST", "median_survival", "escaped_fraction")
    np.testing.assert_allclose(sweep["f_d"], np.exp(-(sweep["mu"] + 0.5)), rtol=1e-14)
    assert sweep["AST"][0] == 120.0
    assert sweep["escaped_fraction"][-1] == 1.0
    assert -6.0 <= sweep.metadata["mu_star"] < -3.0
    assert set(sweep.metadata["densities"]) == set(sweep["mu"])


def test_mu_sweep_parallel_identical():
    template = DoubleWellConfig(mu=-6.0, n_realizations=5, horizon=20.0)
    a = mu_sweep([-4.0, -2.0], template, n_jobs=1)
    b = mu_sweep([-4.0, -2.0], template, n_jobs=2)
    assert a.to_csv() == b.to_csv()


@pytest.mark.parametrize(
    "values, peaks",
    [
        ([0, 1, 0], 1),
        ([1, 2, 2, 1], 1),
        ([0, 3, 1, 4, 0], 2),
        ([5, 4, 3], 1),
        ([0, 0, 0], 0),
    ],
)
def test_count_local_maxima(values, peaks):
    assert count_local_maxima(values) == peaks


def test_is_bimodal_definition():
    edges = np.linspace(-0.5, 1.5, 11)  # the barrier 0.5 falls in bin 5, [0.5, 0.7)
    two = Density(edges, np.array([0, 1, 3, 1, 0.5, 0.2, 0.5, 2, 1, 0.0]))
    one = Density(edges, np.array([0, 1, 3, 1, 0.5, 0.2, 0.1, 0.0, 0, 0.0]))
    assert is_bimodal(two)
    assert not is_bimodal(one)
