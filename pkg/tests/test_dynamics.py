import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memoryport.dynamics import (CavityParams, CouplingSchedule, SimState, TemporalMode, TimeGrid,
                                 build_linear_map, readout_profile, simulate_dynamics,
                                 write_in_coefficient)
from memoryport.errors import DimensionMismatch, NonFiniteInput
from memoryport.modes import exponential_mode, gaussian_mode

from oracles import eig_trajectory, smooth_schedule, taylor_expm, two_level_matrix

C = CavityParams(1.0)
DT = 5e-3


def test_free_decay_matches_exponential():
    grid = TimeGrid.spanning(10.0, DT)
    traj = simulate_dynamics(C, grid, CouplingSchedule.zeros(grid.n_steps), None, SimState(1.0, [0.0]))
    np.testing.assert_allclose(traj.cavity, np.exp(-grid.edges / 2), rtol=1e-13, atol=0)
    assert traj.cavity[-1] == pytest.approx(np.exp(-5), rel=1e-13)
    # bin averaging drops only O(dt^2) of the emitted energy
    assert traj.emitted_energy == pytest.approx(1 - np.exp(-10), rel=1e-5)


def test_adiabatic_readout_energy():
    # Gamma_E = 4 k^2 / C = 0.01, over T = 400 the spin empties to exp(-4)
    grid = TimeGrid.spanning(400.0, DT)
    res = readout_profile(C, grid, CouplingSchedule.constant(0.05, grid.n_steps))
    assert res.efficiency == pytest.approx(1 - np.exp(-4), rel=5e-3)


def test_strong_coupling_matches_matrix_exponential_oracle():
    k = 0.6
    grid = TimeGrid.spanning(20.0, DT)
    traj = simulate_dynamics(C, grid, CouplingSchedule.constant(k, grid.n_steps), None,
                             SimState.spin_excitation(1))
    m = two_level_matrix(1.0, k)
    ref = eig_trajectory(m, np.array([0, 1], dtype=complex), grid.edges)
    got = np.column_stack([traj.cavity, traj.spins[:, 0]])
    assert np.max(np.abs(got - ref)) < 1e-8
    # spot check the eigen route against scaling-and-squaring
    for i in (1, 777, grid.n_steps):
        np.testing.assert_allclose(taylor_expm(m * grid.edges[i]) @ [0, 1], ref[i], atol=1e-10)


def test_dimension_and_finiteness_errors():
    grid = TimeGrid(DT, 10)
    with pytest.raises(DimensionMismatch):
        simulate_dynamics(C, grid, CouplingSchedule.zeros(9))
    with pytest.raises(DimensionMismatch):
        simulate_dynamics(C, grid, CouplingSchedule.zeros(10, 2), None, SimState.vacuum(1))
    with pytest.raises(DimensionMismatch):
        simulate_dynamics(C, grid, CouplingSchedule.zeros(10), np.zeros(11))
    with pytest.raises(NonFiniteInput):
        simulate_dynamics(C, grid, CouplingSchedule.zeros(10), np.full(10, np.nan))
    with pytest.raises(NonFiniteInput):
        CouplingSchedule(np.array([[np.inf] * 10]))


def test_types_validate():
    with pytest.raises(ValueError):
        CavityParams(0.0)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.1, 0)
    with pytest.raises(ValueError):
        TemporalMode(2 * np.ones(10), 0.1)
    with pytest.raises(ValueError):
        TimeGrid.spanning(1.05, 0.1)


def test_write_in_without_coupling_stores_nothing():
    grid = TimeGrid.spanning(10.0, DT)
    f = gaussian_mode(grid, 5.0, 1.25)
    res = write_in_coefficient(C, grid, CouplingSchedule.zeros(grid.n_steps), f)
    assert res.coefficient == 0
    assert res.efficiency == 0


def test_write_in_rising_exponential_with_constant_coupling():
    gamma = 0.01
    grid = TimeGrid.spanning(600.0, DT)
    f = exponential_mode(grid, gamma, rising=True)
    k = np.sqrt(gamma * 1.0) / 2
    res = write_in_coefficient(C, grid, CouplingSchedule.constant(k, grid.n_steps), f)
    assert res.efficiency >= 0.97


def test_readout_without_coupling_is_dark():
    grid = TimeGrid.spanning(10.0, DT)
    res = readout_profile(C, grid, CouplingSchedule.zeros(grid.n_steps), gaussian_mode(grid, 5, 1.25))
    assert res.efficiency == 0
    assert np.all(res.output == 0)


def test_readout_adiabatic_mode_overlap():
    k = 0.05
    gamma_e = 4 * k ** 2
    grid = TimeGrid.spanning(4 / gamma_e, DT)
    g = exponential_mode(grid, gamma_e)
    res = readout_profile(C, grid, CouplingSchedule.constant(k, grid.n_steps), g)
    assert res.efficiency >= 0.95
    assert abs(res.coefficient) ** 2 >= 0.95
    assert abs(res.coefficient) ** 2 <= res.efficiency + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_passivity_any_schedule(seed):
    rng = np.random.default_rng(seed)
    grid = TimeGrid.spanning(8.0, 1e-2)
    k = smooth_schedule(rng, grid.midpoints, 1, scale=rng.uniform(0.05, 2.0))
    f = TemporalMode.normalized(rng.normal(size=grid.n_steps) + 1j * rng.normal(size=grid.n_steps), grid.dt)
    w = write_in_coefficient(C, grid, CouplingSchedule(k), f)
    assert w.efficiency <= 1 + 1e-6
    r = readout_profile(C, grid, CouplingSchedule(k), f)
    assert abs(r.coefficient) ** 2 <= r.efficiency + 1e-12
    assert r.efficiency <= 1 + 1e-6


def test_linear_map_zero_coupling_spin_block_identity():
    grid = TimeGrid.spanning(2.0, DT)
    lm = build_linear_map(C, grid, CouplingSchedule.zeros(grid.n_steps, 3))
    assert np.array_equal(lm.spin_block, np.eye(3))


def test_linear_map_reproduces_write_in():
    rng = np.random.default_rng(4)
    grid = TimeGrid.spanning(6.0, DT)
    k = smooth_schedule(rng, grid.midpoints, 1)
    f = gaussian_mode(grid, 3.0, 0.7)
    lm = build_linear_map(C, grid, CouplingSchedule(k))
    _, system = lm.apply(f.samples * np.sqrt(grid.dt))
    direct = write_in_coefficient(C, grid, CouplingSchedule(k), f)
    assert abs(system[1] - direct.coefficient) < 1e-10


def test_linear_map_spin_element_matches_oracle():
    k = 0.3 - 0.2j
    grid = TimeGrid.spanning(4.0, DT)
    lm = build_linear_map(C, grid, CouplingSchedule.constant(k, grid.n_steps))
    ref = taylor_expm(two_level_matrix(1.0, k) * grid.duration)
    n = grid.n_steps
    assert abs(lm.spin_block[0, 0] - ref[1, 1]) < 1e-8
    assert abs(lm.matrix[n, n + 1] - ref[0, 1]) < 1e-8


def test_linear_map_unitarity_converges():
    dev = []
    for dt in (5e-3, 2.5e-3):
        grid = TimeGrid.spanning(10.0, dt)
        k = smooth_schedule(np.random.default_rng(11), grid.midpoints, 2)
        dev.append(build_linear_map(C, grid, CouplingSchedule(k)).norm_deviation())
    assert dev[0] < 5e-2
    assert dev[0] < 10 * 1.0 * 5e-3
    assert dev[1] < dev[0] / 3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1),
       alpha=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       beta=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(2e-2, 200)
    sched = CouplingSchedule(smooth_schedule(rng, grid.midpoints, 2))
    x_in, y_in = (rng.normal(size=(2, grid.n_steps)) + 1j * rng.normal(size=(2, grid.n_steps)))
    x0 = SimState(rng.normal() + 1j * rng.normal(), rng.normal(size=2) + 0j)
    y0 = SimState(rng.normal() + 1j * rng.normal(), rng.normal(size=2) + 0j)
    tx = simulate_dynamics(C, grid, sched, x_in, x0)
    ty = simulate_dynamics(C, grid, sched, y_in, y0)
    mixed = SimState(alpha * x0.cavity + beta * y0.cavity, alpha * x0.spins + beta * y0.spins)
    tz = simulate_dynamics(C, grid, sched, alpha * x_in + beta * y_in, mixed)
    scale = 1 + abs(alpha) + abs(beta)
    assert np.max(np.abs(tz.output - (alpha * tx.output + beta * ty.output))) < 1e-11 * scale * 10
    assert np.max(np.abs(tz.spins - (alpha * tx.spins + beta * ty.spins))) < 1e-11 * scale * 10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_excitation_non_increasing_without_input(seed):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(1e-2, 400)
    sched = CouplingSchedule(smooth_schedule(rng, grid.midpoints, 3, scale=1.5))
    x0 = SimState(rng.normal() + 1j * rng.normal(), rng.normal(size=3) + 1j * rng.normal(size=3))
    traj = simulate_dynamics(C, grid, sched, None, x0)
    total = np.abs(traj.cavity) ** 2 + np.sum(np.abs(traj.spins) ** 2, axis=1)
    assert np.all(np.diff(total) <= 1e-12 * total[0])


def test_energy_balance_per_bin():
    rng = np.random.default_rng(3)
    grid = TimeGrid.spanning(10.0, 1e-3)
    sched = CouplingSchedule(smooth_schedule(rng, grid.midpoints, 2))
    a_in = gaussian_mode(grid, 4.0, 1.0).samples
    traj = simulate_dynamics(C, grid, sched, a_in, SimState(0.3, [0.5, -0.2j]))
    total = np.abs(traj.cavity) ** 2 + np.sum(np.abs(traj.spins) ** 2, axis=1)
    a_mid = (traj.cavity[1:] + traj.cavity[:-1]) / 2
    rhs = -np.abs(a_mid) ** 2 + 2 * np.real(np.conj(a_mid) * a_in)
    assert np.max(np.abs(np.diff(total) / grid.dt - rhs)) < 1e-4
    # global ledger: in = out + stored, up to the bin projection
    start = 0.3 ** 2 + 0.25 + 0.04
    fed = np.sum(np.abs(a_in) ** 2) * grid.dt
    assert start + fed == pytest.approx(traj.emitted_energy + total[-1], abs=1e-6)


def test_refinement_second_order():
    etas = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        grid = TimeGrid.spanning(10.0, dt)
        t = grid.midpoints
        k = 0.4 * np.exp(-((t - 4) ** 2) / 8) + 0.1j * np.sin(t)
        etas.append(readout_profile(C, grid, CouplingSchedule(k)).efficiency)
    d1, d2 = abs(etas[0] - etas[1]), abs(etas[1] - etas[2])
    assert d2 < d1 / 3
