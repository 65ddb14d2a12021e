"""
Cavity / collective spin-wave dynamics on a uniform time grid.

All amplitudes live in the frame co-rotating with the cavity mode, so the
equations of motion are

    da/dt   = -(C/2) a + sqrt(C) a_in - i sum_m k_m(t) b_m
    db_m/dt = -i conj(k_m(t)) a
    a_out   = sqrt(C) a - a_in

The coupling k_m is held constant on each bin (sampled at the bin midpoint),
and the input a_in is constant on each bin.  Each bin is then advanced with
the exact matrix exponential of the (N+1)-dimensional linear system, which
makes the integrator exact for piecewise-constant controls.

Input and output signals are given per bin in units of 1/sqrt(time); the
reported output of a bin is the bin average of a_out(t).  Multiplying by
sqrt(dt) turns either into the amplitude of a unit-normalized bin mode,
which is the convention used by :class:`LinearMap`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatch, NonFiniteInput


@dataclass(frozen=True)
class CavityParams:
    decay_rate: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.decay_rate) or self.decay_rate <= 0:
            raise ValueError(f"decay rate must be positive, got {self.decay_rate}")


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int
    t_start: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")

    @classmethod
    def spanning(cls, duration: float, dt: float, t_start: float = 0.0) -> "TimeGrid":
        """Grid with ``round(duration / dt)`` bins; the span must be a multiple of dt."""
        n = int(round(duration / dt))
        if n < 1 or abs(n * dt - duration) > 1e-9 * max(1.0, abs(duration)):
            raise ValueError(f"duration {duration} is not a positive multiple of dt={dt}")
        return cls(dt=dt, n_steps=n, t_start=t_start)

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def edges(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.t_start + self.dt * (np.arange(self.n_steps) + 0.5)


@dataclass(frozen=True)
class TemporalMode:
    """Sampled pulse shape, one value per bin, with sum |f|^2 dt = 1."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size == 0:
            raise DimensionMismatch("mode samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(s)):
            raise NonFiniteInput("mode samples contain non-finite values")
        norm = np.sum(np.abs(s) ** 2) * self.dt
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"mode is not normalized: sum |f|^2 dt = {norm!r}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def normalized(cls, samples, dt: float) -> "TemporalMode":
        s = np.asarray(samples, dtype=complex)
        norm = np.sqrt(np.sum(np.abs(s) ** 2) * dt)
        if norm == 0:
            raise ValueError("cannot normalize an all-zero mode")
        return cls(s / norm, dt)

    def __len__(self):
        return self.samples.size

    def overlap(self, other: "TemporalMode") -> complex:
        """<self|other> = sum conj(self) * other * dt."""
        if len(other) != len(self):
            raise DimensionMismatch("modes have different lengths")
        return complex(np.vdot(self.samples, other.samples) * self.dt)

    def reversed(self) -> "TemporalMode":
        """Time-reversed, conjugated mode conj(f(T - t))."""
        return TemporalMode(np.conj(self.samples[::-1]), self.dt)

    def padded(self, n_before: int = 0, n_after: int = 0) -> "TemporalMode":
        return TemporalMode(np.pad(self.samples, (n_before, n_after)), self.dt)


@dataclass(frozen=True)
class CouplingSchedule:
    """Complex coupling k_m(t) per spin wave; ``samples`` has shape (N, n_steps)."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[None, :]
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise DimensionMismatch(f"coupling samples must have shape (N, n_steps), got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise NonFiniteInput("coupling schedule contains non-finite values")
        object.__setattr__(self, "samples", s)

    @classmethod
    def constant(cls, value: complex, n_steps: int, n_waves: int = 1) -> "CouplingSchedule":
        return cls(np.full((n_waves, n_steps), value, dtype=complex))

    @classmethod
    def zeros(cls, n_steps: int, n_waves: int = 1) -> "CouplingSchedule":
        return cls(np.zeros((n_waves, n_steps), dtype=complex))

    @classmethod
    def from_rows(cls, row: np.ndarray, base: np.ndarray) -> "CouplingSchedule":
        """k_m(t) = row[m] * base(t), the mixing form used for multiport addressing."""
        return cls(np.outer(np.asarray(row, dtype=complex), np.asarray(base, dtype=complex)))

    @property
    def n_waves(self) -> int:
        return self.samples.shape[0]

    @property
    def n_steps(self) -> int:
        return self.samples.shape[1]

    def reversed(self) -> "CouplingSchedule":
        """conj(k(T - t)), the write-in dual of a readout schedule."""
        return CouplingSchedule(np.conj(self.samples[:, ::-1]))


@dataclass(frozen=True)
class SimState:
    cavity: complex = 0j
    spins: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, "cavity", complex(self.cavity))
        object.__setattr__(self, "spins", np.atleast_1d(np.asarray(self.spins, dtype=complex)))

    @classmethod
    def vacuum(cls, n_waves: int = 1) -> "SimState":
        return cls(0j, np.zeros(n_waves, dtype=complex))

    @classmethod
    def spin_excitation(cls, n_waves: int = 1, index: int = 0) -> "SimState":
        b = np.zeros(n_waves, dtype=complex)
        b[index] = 1.0
        return cls(0j, b)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.cavity], self.spins])


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes on the grid edges (length n_steps + 1) and bin-averaged output."""

    grid: TimeGrid
    cavity: np.ndarray
    spins: np.ndarray
    output: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.grid.edges

    @property
    def emitted_energy(self) -> float:
        return float(np.sum(np.abs(self.output) ** 2) * self.grid.dt)

    def state_at(self, i: int) -> SimState:
        return SimState(self.cavity[i], self.spins[i])

    @property
    def final(self) -> SimState:
        return self.state_at(-1)


@dataclass(frozen=True)
class LinearMap:
    """
    Discretized input-output map of one simulation window.

    Column/row ordering is ``[bin_0 .. bin_{n-1}, cavity, spin_1 .. spin_N]``
    on both sides; bin entries are amplitudes of unit-normalized bin modes.
    """

    matrix: np.ndarray
    n_steps: int
    n_waves: int

    def row_norm_deviation(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.matrix, axis=1) - 1.0)))

    def column_norm_deviation(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.matrix, axis=0) - 1.0)))

    def norm_deviation(self) -> float:
        return max(self.row_norm_deviation(), self.column_norm_deviation())

    @property
    def spin_block(self) -> np.ndarray:
        s = self.n_steps + 1
        return self.matrix[s:, s:]

    def apply(self, bins_in: np.ndarray, initial: Optional[SimState] = None):
        """Propagate bin amplitudes (already scaled by sqrt(dt)) and an initial state."""
        n_sys = self.n_waves + 1
        x = np.zeros(self.n_steps + n_sys, dtype=complex)
        x[: self.n_steps] = bins_in
        if initial is not None:
            x[self.n_steps:] = initial.as_vector()
        y = self.matrix @ x
        return y[: self.n_steps], y[self.n_steps:]


class _Propagators(NamedTuple):
    """Per-bin exact propagators, deduplicated over identical coupling rows."""

    index: np.ndarray  # bin -> row of the tables below
    step: np.ndarray  # exp(M dt), shape (u, n, n)
    drive: np.ndarray  # int_0^dt exp(M s) ds e_a sqrt(C), shape (u, n)
    cavity_avg_state: np.ndarray  # e_a^T int_0^dt exp(M s) ds / dt, shape (u, n)
    cavity_avg_drive: np.ndarray  # e_a^T double integral e_a sqrt(C) / dt, shape (u,)


def _check_inputs(grid: TimeGrid, schedule: CouplingSchedule, a_in, initial: SimState):
    if schedule.n_steps != grid.n_steps:
        raise DimensionMismatch(
            f"schedule has {schedule.n_steps} bins but the grid has {grid.n_steps}")
    if initial.spins.size != schedule.n_waves:
        raise DimensionMismatch(
            f"initial state has {initial.spins.size} spin waves, schedule has {schedule.n_waves}")
    if not (np.isfinite(initial.cavity) and np.all(np.isfinite(initial.spins))):
        raise NonFiniteInput("initial state contains non-finite values")
    if a_in is None:
        return None
    a_in = np.asarray(a_in, dtype=complex)
    if a_in.shape != (grid.n_steps,):
        raise DimensionMismatch(f"input has shape {a_in.shape}, expected ({grid.n_steps},)")
    if not np.all(np.isfinite(a_in)):
        raise NonFiniteInput("input contains non-finite values")
    return a_in


def _propagators(decay_rate: float, dt: float, k: np.ndarray) -> _Propagators:
    """k has shape (N, n_steps)."""
    n_waves = k.shape[0]
    n = n_waves + 1
    # dedupe on the exact float pattern; constant or gated couplings collapse to a few rows
    key = np.concatenate([k.real, k.imag], axis=0).T
    uniq, index = np.unique(key, axis=0, return_inverse=True)
    kk = uniq[:, :n_waves] + 1j * uniq[:, n_waves:]

    u = kk.shape[0]
    big = np.zeros((u, 3 * n, 3 * n), dtype=complex)
    big[:, 0, 0] = -decay_rate / 2
    big[:, 0, 1:n] = -1j * kk
    big[:, 1:n, 0] = -1j * np.conj(kk)
    big[:, :n, :n] *= dt
    eye = np.eye(n) * dt
    big[:, :n, n:2 * n] = eye
    big[:, n:2 * n, 2 * n:] = eye
    ex = expm(big)

    step = ex[:, :n, :n]
    f1 = ex[:, :n, n:2 * n]
    f2 = ex[:, :n, 2 * n:]
    sc = np.sqrt(decay_rate)
    return _Propagators(
        index=index.reshape(-1),
        step=np.ascontiguousarray(step),
        drive=np.ascontiguousarray(f1[:, :, 0] * sc),
        cavity_avg_state=np.ascontiguousarray(f1[:, 0, :] / dt),
        cavity_avg_drive=f2[:, 0, 0] * sc / dt,
    )


def _run(decay_rate: float, props: _Propagators, x0: np.ndarray, a_in: Optional[np.ndarray]):
    """Step the system; returns states (n_steps + 1, n) and bin-averaged outputs (n_steps,)."""
    n_steps = props.index.size
    n = x0.size
    sc = np.sqrt(decay_rate)
    states = np.empty((n_steps + 1, n), dtype=complex)
    out = np.empty(n_steps, dtype=complex)
    x = x0.astype(complex)
    states[0] = x
    idx = props.index
    step, drive = props.step, props.drive
    avg_x, avg_u = props.cavity_avg_state, props.cavity_avg_drive
    if a_in is None:
        for i in range(n_steps):
            j = idx[i]
            out[i] = sc * (avg_x[j] @ x)
            x = step[j] @ x
            states[i + 1] = x
    else:
        for i in range(n_steps):
            j = idx[i]
            u = a_in[i]
            out[i] = sc * (avg_x[j] @ x + avg_u[j] * u) - u
            x = step[j] @ x + drive[j] * u
            states[i + 1] = x
    return states, out


def simulate_dynamics(params: CavityParams, grid: TimeGrid, schedule: CouplingSchedule,
                      a_in=None, initial: Optional[SimState] = None) -> Trajectory:
    """
    Integrate the cavity and N spin waves over ``grid``.

    ``a_in`` is the input field per bin (None means vacuum); ``initial``
    defaults to the vacuum state.
    """
    if initial is None:
        initial = SimState.vacuum(schedule.n_waves)
    a_in = _check_inputs(grid, schedule, a_in, initial)
    props = _propagators(params.decay_rate, grid.dt, schedule.samples)
    states, out = _run(params.decay_rate, props, initial.as_vector(), a_in)
    return Trajectory(grid=grid, cavity=states[:, 0], spins=states[:, 1:], output=out)


class WriteInResult(NamedTuple):
    coefficient: complex
    efficiency: float
    trajectory: Trajectory


class ReadoutResult(NamedTuple):
    coefficient: complex
    efficiency: float
    output: np.ndarray
    trajectory: Trajectory


def _single_wave(schedule: CouplingSchedule) -> CouplingSchedule:
    if schedule.n_waves != 1:
        raise DimensionMismatch(f"expected a single-wave schedule, got {schedule.n_waves} waves")
    return schedule


def write_in_coefficient(params: CavityParams, grid: TimeGrid, schedule: CouplingSchedule,
                         f: TemporalMode) -> WriteInResult:
    """Store input mode ``f`` from vacuum; K_W is the final spin amplitude."""
    _single_wave(schedule)
    if len(f) != grid.n_steps:
        raise DimensionMismatch("input mode length does not match the grid")
    traj = simulate_dynamics(params, grid, schedule, f.samples, SimState.vacuum(1))
    k_w = complex(traj.spins[-1, 0])
    return WriteInResult(k_w, abs(k_w) ** 2, traj)


def readout_profile(params: CavityParams, grid: TimeGrid, schedule: CouplingSchedule,
                    g: Optional[TemporalMode] = None) -> ReadoutResult:
    """
    Retrieve a unit spin excitation into vacuum.

    K_R is the projection of the output on ``g``; without a target mode
    the coefficient is reported as nan.
    """
    _single_wave(schedule)
    traj = simulate_dynamics(params, grid, schedule, None, SimState.spin_excitation(1))
    eta = traj.emitted_energy
    if g is None:
        k_r = complex(np.nan)
    else:
        if len(g) != grid.n_steps:
            raise DimensionMismatch("target mode length does not match the grid")
        k_r = complex(np.vdot(g.samples, traj.output) * grid.dt)
    return ReadoutResult(k_r, eta, traj.output, traj)


def build_linear_map(params: CavityParams, grid: TimeGrid,
                     schedule: CouplingSchedule) -> LinearMap:
    """
    Full discretized Green's function of the window.

    Every input slot (each bin, the initial cavity, each initial spin) is
    propagated simultaneously as one column of the state matrix.
    """
    if schedule.n_steps != grid.n_steps:
        raise DimensionMismatch(
            f"schedule has {schedule.n_steps} bins but the grid has {grid.n_steps}")
    n_steps, n_waves = grid.n_steps, schedule.n_waves
    n_sys = n_waves + 1
    dim = n_steps + n_sys
    c, dt = params.decay_rate, grid.dt
    sc = np.sqrt(c)
    root_dt = np.sqrt(dt)
    props = _propagators(c, dt, schedule.samples)

    mat = np.zeros((dim, dim), dtype=complex)
    x = np.zeros((n_sys, dim), dtype=complex)
    x[:, n_steps:] = np.eye(n_sys)
    u = 1.0 / root_dt  # unit bin-mode amplitude as a field value
    for i in range(n_steps):
        j = props.index[i]
        row = sc * (props.cavity_avg_state[j] @ x)
        row[i] += sc * props.cavity_avg_drive[j] * u - u
        mat[i] = row * root_dt
        x = props.step[j] @ x
        x[:, i] += props.drive[j] * u
    mat[n_steps:] = x
    return LinearMap(matrix=mat, n_steps=n_steps, n_waves=n_waves)
