"""
N-signal memory channel: unitary addressing of spin-wave superpositions.

Signal n is written with couplings k_m(t) = U_W[n, m] k_w(t - t_n), which
talks only to the superposition b'_n = sum_m U_W[n, m] b_m, and read with
k_m(t) = U_R[n, m] k_r(t - t_n).  To leading order the sequence maps as

    a_out = K_R K_W U_R U_W^dagger a_in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.stats import unitary_group

from .dynamics import (CavityParams, CouplingSchedule, SimState, TemporalMode, TimeGrid,
                       _propagators, _run, simulate_dynamics)
from .errors import DimensionMismatch, NonUnitary, ScheduleOverlap

log = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
MIN_GUARD_LIFETIMES = 8.0


@dataclass(frozen=True, eq=False)
class UnitarySpec:
    matrix: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise NonUnitary(f"expected a square matrix, got shape {u.shape}")
        err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
        if not err < UNITARY_TOL:
            raise NonUnitary(f"matrix deviates from unitarity by {err:.3g}")
        object.__setattr__(self, "matrix", u)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "UnitarySpec":
        return cls(np.eye(n))

    @classmethod
    def permutation(cls, order) -> "UnitarySpec":
        """Row n has its unit in column order[n]."""
        n = len(order)
        u = np.zeros((n, n))
        u[np.arange(n), list(order)] = 1.0
        return cls(u)

    @classmethod
    def cyclic(cls, n: int) -> "UnitarySpec":
        return cls.permutation([(i + 1) % n for i in range(n)])

    @classmethod
    def balanced(cls) -> "UnitarySpec":
        """The 1:1 beamsplitter (1/sqrt 2)[[1, 1], [1, -1]]."""
        return cls(np.array([[1, 1], [1, -1]]) / np.sqrt(2))

    @classmethod
    def fourier(cls, n: int) -> "UnitarySpec":
        """Symmetric N-port splitter (the DFT matrix)."""
        j = np.arange(n)
        return cls(np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n))

    @classmethod
    def random(cls, n: int, seed=None) -> "UnitarySpec":
        return cls(unitary_group.rvs(n, random_state=seed) if n > 1
                   else np.exp(2j * np.pi * np.random.default_rng(seed).random((1, 1))))


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    transfer: np.ndarray
    total_efficiency: float

    @property
    def n(self) -> int:
        return self.transfer.shape[0]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.transfer, compute_uv=False)


def compose_channel(u_w: UnitarySpec, u_r: UnitarySpec, k_w: complex, k_r: complex) -> ChannelMatrix:
    if u_w.n != u_r.n:
        raise DimensionMismatch("write and read unitaries differ in size")
    if abs(k_w) > 1 + 1e-9 or abs(k_r) > 1 + 1e-9:
        raise ValueError("transfer coefficients must satisfy |K| <= 1")
    k = complex(k_r) * complex(k_w)
    return ChannelMatrix(k * (u_r.matrix @ u_w.matrix.conj().T), abs(k) ** 2)


@dataclass(frozen=True)
class SignalSchedule:
    """
    Write windows start at ``write_starts``, read windows at ``read_starts``.

    All windows, taken in time order, must be separated by at least
    ``guard_gap`` of coupling-free cavity decay.
    """

    write_starts: tuple
    read_starts: tuple
    write_window: float
    read_window: float
    guard_gap: float

    def __post_init__(self):
        object.__setattr__(self, "write_starts", tuple(float(t) for t in self.write_starts))
        object.__setattr__(self, "read_starts", tuple(float(t) for t in self.read_starts))
        if len(self.write_starts) != len(self.read_starts) or not self.write_starts:
            raise ScheduleOverlap("need the same, non-zero number of write and read windows")
        if self.write_window <= 0 or self.read_window <= 0 or self.guard_gap < 0:
            raise ScheduleOverlap("windows must be positive and the guard gap non-negative")
        spans = sorted(self.windows(), key=lambda w: w[1])
        for (_, s0, e0), (_, s1, _) in zip(spans, spans[1:]):
            if s1 < e0 + self.guard_gap - 1e-9:
                raise ScheduleOverlap(
                    f"window at t={s1:g} starts before the previous one (ending {e0:g}) "
                    f"plus the guard gap {self.guard_gap:g}")

    @classmethod
    def sequential(cls, n_signals: int, write_window: float, read_window: float,
                   guard_gap: float, storage_time: float = 0.0) -> "SignalSchedule":
        """Back-to-back writes, then back-to-back reads, each followed by a guard gap."""
        writes = [n * (write_window + guard_gap) for n in range(n_signals)]
        first_read = n_signals * (write_window + guard_gap) + storage_time
        reads = [first_read + n * (read_window + guard_gap) for n in range(n_signals)]
        return cls(tuple(writes), tuple(reads), write_window, read_window, guard_gap)

    @property
    def n_signals(self) -> int:
        return len(self.write_starts)

    def windows(self):
        """(kind, start, end) for every window."""
        out = [("write", t, t + self.write_window) for t in self.write_starts]
        out += [("read", t, t + self.read_window) for t in self.read_starts]
        return out

    @property
    def end(self) -> float:
        """End of the last window plus a trailing guard gap."""
        return max(e for _, _, e in self.windows()) + self.guard_gap


class SequenceResult(NamedTuple):
    measured: ChannelMatrix
    expected: ChannelMatrix
    k_w: complex
    k_r: complex

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.measured.transfer - self.expected.transfer)))


def _bin_index(t: float, dt: float) -> int:
    i = int(round(t / dt))
    if abs(i * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ScheduleOverlap(f"time {t} is not aligned with the grid step {dt}")
    return i


def _propagate_columns(params: CavityParams, dt: float, k: np.ndarray, inputs: np.ndarray,
                       resets) -> np.ndarray:
    """
    Propagate several input columns through one coupling history.

    ``inputs`` has shape (n_cols, n_steps); the cavity amplitude is zeroed
    at each bin index in ``resets``.  Returns outputs of shape (n_cols, n_steps).
    """
    n_waves, n_steps = k.shape
    bounds = sorted({0, n_steps, *[r for r in resets if 0 < r < n_steps]})
    out = np.empty(inputs.shape, dtype=complex)
    for col in range(inputs.shape[0]):
        x = np.zeros(n_waves + 1, dtype=complex)
        for s, e in zip(bounds, bounds[1:]):
            if s in resets:
                x[0] = 0.0
            props = _propagators(params.decay_rate, dt, k[:, s:e])
            states, out[col, s:e] = _run(params.decay_rate, props, x, inputs[col, s:e])
            x = states[-1]
    return out


def simulate_sequence(params: CavityParams, dt: float, schedule: SignalSchedule,
                      u_w: UnitarySpec, u_r: UnitarySpec,
                      write_coupling: np.ndarray, read_coupling: np.ndarray,
                      f: TemporalMode, g: TemporalMode, hard_reset: bool = False,
                      k_w: Optional[complex] = None, k_r: Optional[complex] = None) -> SequenceResult:
    """
    End-to-end time-domain run of the whole sequence.

    Column j of the measured matrix is the projection of the output on
    g(t - t_i) for each read window i, with a unit classical amplitude in
    mode f(t - t_j) at the input.  ``k_w`` and ``k_r`` default to the
    single-window transfer coefficients of the two shapes.
    """
    n = schedule.n_signals
    if u_w.n != n or u_r.n != n:
        raise DimensionMismatch(f"unitaries must be {n}x{n} for {n} signals")
    write_coupling = np.asarray(write_coupling, dtype=complex).reshape(-1)
    read_coupling = np.asarray(read_coupling, dtype=complex).reshape(-1)
    n_w, n_r = _bin_index(schedule.write_window, dt), _bin_index(schedule.read_window, dt)
    if write_coupling.size != n_w or len(f) != n_w:
        raise DimensionMismatch("write coupling and input mode must span the write window")
    if read_coupling.size != n_r or len(g) != n_r:
        raise DimensionMismatch("read coupling and output mode must span the read window")
    if schedule.guard_gap * params.decay_rate < MIN_GUARD_LIFETIMES and not hard_reset:
        log.warning("guard gap %.3g/C is below %g/C; cavity leftovers will leak between windows",
                    schedule.guard_gap * params.decay_rate, MIN_GUARD_LIFETIMES)

    n_total = _bin_index(schedule.end, dt)
    k = np.zeros((n, n_total), dtype=complex)
    w_idx = [_bin_index(t, dt) for t in schedule.write_starts]
    r_idx = [_bin_index(t, dt) for t in schedule.read_starts]
    for row, s in enumerate(w_idx):
        k[:, s:s + n_w] = np.outer(u_w.matrix[row], write_coupling)
    for row, s in enumerate(r_idx):
        k[:, s:s + n_r] = np.outer(u_r.matrix[row], read_coupling)

    inputs = np.zeros((n, n_total), dtype=complex)
    for j, s in enumerate(w_idx):
        inputs[j, s:s + n_w] = f.samples
    resets = set(w_idx + r_idx) if hard_reset else set()
    out = _propagate_columns(params, dt, k, inputs, resets)

    measured = np.empty((n, n), dtype=complex)
    for i, s in enumerate(r_idx):
        measured[i] = out[:, s:s + n_r] @ np.conj(g.samples) * dt

    if k_w is None or k_r is None:
        grid_w = TimeGrid(dt, n_w)
        grid_r = TimeGrid(dt, n_r)
        if k_w is None:
            traj = simulate_dynamics(params, grid_w, CouplingSchedule(write_coupling), f.samples)
            k_w = complex(traj.spins[-1, 0])
        if k_r is None:
            traj = simulate_dynamics(params, grid_r, CouplingSchedule(read_coupling), None,
                                     SimState.spin_excitation(1))
            k_r = complex(np.vdot(g.samples, traj.output) * dt)
    expected = compose_channel(u_w, u_r, k_w, k_r)
    column_energy = np.sum(np.abs(measured) ** 2, axis=0)
    return SequenceResult(ChannelMatrix(measured, float(np.mean(column_energy))),
                          expected, complex(k_w), complex(k_r))


def verify_single_oscillator_reduction(params: CavityParams, grid: TimeGrid, u: UnitarySpec,
                                       row: int, base_coupling, a_in) -> float:
    """
    Largest deviation between the N-wave run with k_m = U[row, m] k and the
    single-wave run with k, measured on the addressed superposition and the
    cavity; the orthogonal superpositions must stay empty.
    """
    base = np.asarray(base_coupling, dtype=complex).reshape(-1)
    multi = simulate_dynamics(params, grid, CouplingSchedule.from_rows(u.matrix[row], base),
                              a_in, SimState.vacuum(u.n))
    single = simulate_dynamics(params, grid, CouplingSchedule(base), a_in, SimState.vacuum(1))
    rotated = multi.spins @ u.matrix.T  # column r is sum_m U[r, m] b_m
    addressed = np.max(np.abs(rotated[:, row] - single.spins[:, 0]))
    cavity = np.max(np.abs(multi.cavity - single.cavity))
    others = np.delete(rotated, row, axis=1)
    leak = np.max(np.abs(others)) if others.size else 0.0
    return float(max(addressed, cavity, leak))
