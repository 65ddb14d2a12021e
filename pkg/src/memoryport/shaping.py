"""
Inverse problem: coupling profiles that emit (or absorb) a prescribed pulse.

For readout the cavity amplitude is fixed by the target, a = sqrt(eta/C) g,
which leaves no freedom in the spin amplitude apart from its sign at the
points where it vanishes:

    s(t)   = da/dt + (C/2) a          (what the spin must supply)
    |b|^2  = 1 - eta int_0^t |g|^2 - |a|^2
    k(t)   = i s(t) / b(t)

Feasibility requires |b|^2 >= 0 on the whole window, which bounds eta from
above.  Where |b| touches zero the sign of b may flip, giving a discrete
family of couplings with the same efficiency.  Write-in couplings are the
conjugated time reversal of readout couplings for the reversed mode.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import (CavityParams, CouplingSchedule, TemporalMode, TimeGrid,
                       readout_profile)
from .errors import DimensionMismatch, InfeasibleTarget, InvalidBranch, SpinDepletion

SPIN_FLOOR = 1e-6
BRANCH_THRESHOLD = 1e-3
BOUNDARY_TOL = 1e-4


@dataclass(frozen=True)
class ShapingProblem:
    params: CavityParams
    grid: TimeGrid
    target: TemporalMode
    eta_target: float
    branch_spec: Sequence[int] = ()

    def __post_init__(self):
        if len(self.target) != self.grid.n_steps:
            raise DimensionMismatch("target mode length does not match the grid")
        if not 0 < self.eta_target <= 1:
            raise ValueError(f"eta_target must lie in (0, 1], got {self.eta_target}")
        if any(s not in (1, -1) for s in self.branch_spec):
            raise ValueError("branch_spec entries must be +1 or -1")


@dataclass(frozen=True)
class ShapingSolution:
    """
    A single-wave coupling and its simulated round trip.

    ``achieved_eta``, ``residual_spin`` and ``residual_cavity`` come from
    simulating the schedule, so they close the energy ledger of the
    readout window.  ``spin_energy`` is the construction's |b(t)|^2 on
    bin midpoints.
    """

    schedule: CouplingSchedule
    eta_target: float
    achieved_eta: float
    residual_spin: float
    residual_cavity: float
    coefficient: complex
    mode_overlap: float
    branch: tuple
    spin_energy: np.ndarray

    @property
    def coupling(self) -> np.ndarray:
        return self.schedule.samples[0]


def _cumulative_energy(g: TemporalMode) -> np.ndarray:
    """int_0^t |g|^2 evaluated at bin midpoints."""
    w = np.abs(g.samples) ** 2 * g.dt
    return np.cumsum(w) - w / 2


def _constraint(params: CavityParams, g: TemporalMode) -> np.ndarray:
    # |b|^2 = 1 - eta * h(t)
    return _cumulative_energy(g) + np.abs(g.samples) ** 2 / params.decay_rate


def spin_energy(params: CavityParams, g: TemporalMode, eta: float) -> np.ndarray:
    return 1.0 - eta * _constraint(params, g)


def max_readout_efficiency(params: CavityParams, grid: TimeGrid, g: TemporalMode) -> float:
    """Largest eta for which the spin energy stays non-negative over the window."""
    if len(g) != grid.n_steps:
        raise DimensionMismatch("mode length does not match the grid")
    return float(min(1.0, 1.0 / np.max(_constraint(params, g))))


def branch_candidates(energy: np.ndarray, threshold: float = BRANCH_THRESHOLD) -> np.ndarray:
    """Interior local minima of the spin energy below ``threshold``."""
    e = energy
    inner = np.arange(1, e.size - 1)
    is_min = (e[inner] <= e[inner - 1]) & (e[inner] <= e[inner + 1]) & (e[inner] <= threshold)
    return inner[is_min]


def shape_readout_coupling(problem: ShapingProblem) -> ShapingSolution:
    params, grid, g = problem.params, problem.grid, problem.target
    c, dt, eta = params.decay_rate, grid.dt, problem.eta_target

    if abs(g.samples[0]) ** 2 * dt >= BOUNDARY_TOL:
        raise InfeasibleTarget(
            "target does not start near zero; an empty cavity cannot emit it from t=0")
    eta_max = max_readout_efficiency(params, grid, g)
    if eta > eta_max * (1 + 1e-12) or eta >= 1.0:
        raise InfeasibleTarget(f"eta_target={eta} exceeds the attainable {eta_max:.6f}")

    a = np.sqrt(eta / c) * g.samples
    s = np.gradient(a, dt, edge_order=2) + (c / 2) * a
    energy = np.clip(spin_energy(params, g, eta), 0.0, None)

    candidates = branch_candidates(energy)
    if len(problem.branch_spec) > candidates.size:
        raise InvalidBranch(
            f"{len(problem.branch_spec)} signs given but only {candidates.size} candidates exist")
    sign = np.ones(grid.n_steps)
    for idx, flip in zip(candidates, problem.branch_spec):
        if flip == -1:
            if energy[idx] > SPIN_FLOOR ** 2:
                raise InvalidBranch(
                    f"spin amplitude {np.sqrt(energy[idx]):.3g} at t={grid.midpoints[idx]:.4g} "
                    "does not vanish; a sign flip there is discontinuous")
            sign[idx + 1:] *= -1

    magnitude = np.sqrt(energy)
    # phase of b is fixed by Im(b* db/dt) = -Im(s* a); identically zero for real targets
    rate = np.zeros(grid.n_steps)
    ok = magnitude > SPIN_FLOOR
    rate[ok] = -np.imag(np.conj(s[ok]) * a[ok]) / energy[ok]
    phase = np.concatenate([[0.0], np.cumsum((rate[1:] + rate[:-1]) / 2) * dt])
    b = sign * magnitude * np.exp(1j * phase)

    k = np.zeros(grid.n_steps, dtype=complex)
    k[ok] = 1j * s[ok] / b[ok]
    s_floor = SPIN_FLOOR * c
    for i in np.flatnonzero(~ok):
        isolated = 0 < i < grid.n_steps - 1 and ok[i - 1] and ok[i + 1]
        if isolated:
            k[i] = (k[i - 1] + k[i + 1]) / 2
        elif abs(s[i]) <= s_floor:
            k[i] = 0.0
        else:
            raise SpinDepletion(
                f"spin amplitude vanishes at t={grid.midpoints[i]:.4g} "
                f"while the cavity still needs |s|={abs(s[i]):.3g}")

    schedule = CouplingSchedule(k[None, :])
    result = readout_profile(params, grid, schedule, g)
    final = result.trajectory.final
    overlap = abs(result.coefficient) ** 2 / result.efficiency if result.efficiency > 0 else 0.0
    return ShapingSolution(
        schedule=schedule,
        eta_target=eta,
        achieved_eta=result.efficiency,
        residual_spin=float(np.abs(final.spins[0]) ** 2),
        residual_cavity=float(abs(final.cavity) ** 2),
        coefficient=result.coefficient,
        mode_overlap=float(overlap),
        branch=tuple(problem.branch_spec),
        spin_energy=energy,
    )


def readout_branches(params: CavityParams, grid: TimeGrid, g: TemporalMode,
                     eta_targets: Optional[Sequence[float]] = None) -> list:
    """
    Every valid sign branch for each efficiency in ``eta_targets``.

    The default efficiencies are the attainable maximum (where the spin
    amplitude touches zero, so two sign branches exist) and two slightly
    lower values with a single branch each.
    """
    eta_max = max_readout_efficiency(params, grid, g)
    if eta_targets is None:
        eta_targets = (eta_max, eta_max - 0.005, eta_max - 0.01)
    solutions = []
    for eta in eta_targets:
        energy = np.clip(spin_energy(params, g, eta), 0.0, None)
        cands = branch_candidates(energy)
        zeros = [i for i, idx in enumerate(cands) if energy[idx] <= SPIN_FLOOR ** 2]
        for flips in itertools.product((1, -1), repeat=len(zeros)):
            spec = [1] * (max(zeros) + 1 if zeros else 0)
            for pos, f in zip(zeros, flips):
                spec[pos] = f
            solutions.append(shape_readout_coupling(
                ShapingProblem(params, grid, g, eta, tuple(spec))))
    return solutions


def shape_writein_coupling(params: CavityParams, grid: TimeGrid, f: TemporalMode,
                           eta_target: float, branch_spec: Sequence[int] = ()) -> ShapingSolution:
    """
    Write-in coupling for input mode ``f``: conj(k_r(T - t)) with k_r the
    readout coupling for conj(f(T - t)).  Efficiency figures are those of
    the dual readout, which equal the write-in ones by reciprocity.
    """
    readout = shape_readout_coupling(
        ShapingProblem(params, grid, f.reversed(), eta_target, tuple(branch_spec)))
    return replace(readout, schedule=readout.schedule.reversed())
