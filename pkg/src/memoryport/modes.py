"""Analytic temporal modes sampled at bin midpoints."""

import numpy as np

from .dynamics import TemporalMode, TimeGrid


def gaussian_mode(grid: TimeGrid, center: float, width: float) -> TemporalMode:
    """
    Gaussian pulse whose intensity |g|^2 has standard deviation ``width``.

    The amplitude is exp(-(t - center)^2 / (4 width^2)).
    """
    t = grid.midpoints
    return TemporalMode.normalized(np.exp(-((t - center) ** 2) / (4 * width ** 2)), grid.dt)


def exponential_mode(grid: TimeGrid, rate: float, rising: bool = False) -> TemporalMode:
    """
    sqrt(rate) exp(-rate (t - t0) / 2) on the window, or its mirror image
    sqrt(rate) exp(rate (t - T) / 2) when ``rising``.  Renormalized on the
    grid, so the truncated tail is absorbed.
    """
    t = grid.midpoints
    if rising:
        s = np.exp(rate * (t - grid.edges[-1]) / 2)
    else:
        s = np.exp(-rate * (t - grid.t_start) / 2)
    return TemporalMode.normalized(np.sqrt(rate) * s, grid.dt)


def first_bin_mode(grid: TimeGrid) -> TemporalMode:
    """All energy in the first bin."""
    s = np.zeros(grid.n_steps, dtype=complex)
    s[0] = 1.0
    return TemporalMode.normalized(s, grid.dt)


def orthogonal_complement(mode: TemporalMode, seed_shape: np.ndarray) -> TemporalMode:
    """Gram-Schmidt: the part of ``seed_shape`` orthogonal to ``mode``, normalized."""
    seed = np.asarray(seed_shape, dtype=complex)
    seed = seed - mode.samples * np.vdot(mode.samples, seed) * mode.dt
    return TemporalMode.normalized(seed, mode.dt)
