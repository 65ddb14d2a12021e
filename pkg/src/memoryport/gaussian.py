"""
Gaussian states of the signal sequence and their passage through the memory.

Quadratures are ordered (x_1, p_1, ..., x_N, p_N) with a = (x + i p) / 2,
so the vacuum covariance is the identity.  A complex transfer entry m acts
on (x, p) as the block [[Re m, -Im m], [Im m, Re m]]; the memory's vacuum
contributions complete this to a physical channel with noise I - S S^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelMatrix
from .errors import DimensionMismatch, NonPassive, NonPhysicalState, UnsupportedPartition

PHYSICAL_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Sorted symplectic eigenvalues (moduli of the eigenvalues of i Omega V)."""
    cov = np.asarray(cov, dtype=float)
    omega = symplectic_form(cov.shape[0] // 2)
    w, q = np.linalg.eigh((cov + cov.T) / 2)
    if w.min(initial=1.0) <= 0:
        ev = np.abs(np.linalg.eigvals(1j * omega @ cov))
    else:
        # V^1/2 (i Omega) V^1/2 is Hermitian and has the same spectrum
        half = (q * np.sqrt(w)) @ q.T
        ev = np.abs(np.linalg.eigvalsh(half @ (1j * omega) @ half))
    return np.sort(ev)[::2]


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size) or mean.size % 2:
            raise DimensionMismatch(f"mean {mean.shape} and covariance {cov.shape} disagree")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise NonPhysicalState("covariance is not symmetric")
        nu = symplectic_eigenvalues(cov)
        if nu.size and nu.min() < 1 - PHYSICAL_TOL:
            raise NonPhysicalState(f"symplectic eigenvalue {nu.min():.6g} violates the uncertainty relation")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    @classmethod
    def vacuum(cls, n_modes: int) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), np.eye(2 * n_modes))

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        idx = np.ravel([[2 * m, 2 * m + 1] for m in modes])
        return GaussianState(self.mean[idx], self.covariance[np.ix_(idx, idx)])


def _rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def make_squeezed_inputs(r, angles) -> GaussianState:
    """
    Product of squeezed vacua.  Mode n has variance exp(-2 r_n) along the
    phase-space direction at ``angles[n]`` (0 means x) and exp(2 r_n)
    orthogonal to it.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    angles = np.broadcast_to(np.asarray(angles, dtype=float), r.shape)
    if np.any(r < 0):
        raise ValueError("squeezing parameters must be non-negative")
    cov = np.zeros((2 * r.size, 2 * r.size))
    for n, (rn, th) in enumerate(zip(r, angles)):
        rot = _rotation(th)
        cov[2 * n:2 * n + 2, 2 * n:2 * n + 2] = rot @ np.diag([np.exp(-2 * rn), np.exp(2 * rn)]) @ rot.T
    return GaussianState(np.zeros(2 * r.size), (cov + cov.T) / 2)


@dataclass(frozen=True, eq=False)
class QuadratureChannel:
    S: np.ndarray
    G: np.ndarray


def transfer_to_symplectic(transfer: np.ndarray) -> np.ndarray:
    m = np.atleast_2d(np.asarray(transfer, dtype=complex))
    n_out, n_in = m.shape
    s = np.zeros((2 * n_out, 2 * n_in))
    s[0::2, 0::2] = m.real
    s[0::2, 1::2] = -m.imag
    s[1::2, 0::2] = m.imag
    s[1::2, 1::2] = m.real
    return s


def channel_to_quadratures(channel) -> QuadratureChannel:
    """Accepts a :class:`ChannelMatrix` or a bare complex transfer matrix."""
    transfer = channel.transfer if isinstance(channel, ChannelMatrix) else channel
    s = transfer_to_symplectic(transfer)
    g = np.eye(s.shape[0]) - s @ s.T
    g = (g + g.T) / 2
    lowest = np.linalg.eigvalsh(g).min()
    if lowest < -PHYSICAL_TOL:
        raise NonPassive(f"transfer amplifies: I - S S^T has eigenvalue {lowest:.3g}")
    return QuadratureChannel(s, g)


def lossy_channel(unitary: np.ndarray, efficiency: float) -> QuadratureChannel:
    """sqrt(efficiency) * unitary, completed with vacuum noise."""
    return channel_to_quadratures(np.sqrt(efficiency) * np.asarray(unitary, dtype=complex))


def apply_channel(state: GaussianState, qc: QuadratureChannel) -> GaussianState:
    if qc.S.shape[1] != state.mean.size:
        raise DimensionMismatch(
            f"channel acts on {qc.S.shape[1] // 2} modes, state has {state.n_modes}")
    cov = qc.S @ state.covariance @ qc.S.T + qc.G
    return GaussianState(qc.S @ state.mean, (cov + cov.T) / 2)


def log_negativity(state: GaussianState, partition=((0,), (1,))) -> float:
    """
    Logarithmic negativity (natural log) between two single modes.

    Other modes are traced out.  Only 1|1 splits are supported.
    """
    try:
        left, right = partition
        left, right = tuple(left), tuple(right)
    except (TypeError, ValueError):
        raise UnsupportedPartition(f"cannot interpret partition {partition!r}") from None
    if len(left) != 1 or len(right) != 1 or left == right:
        raise UnsupportedPartition("only splits of one mode against one other mode are supported")
    if max(left[0], right[0]) >= state.n_modes or min(left[0], right[0]) < 0:
        raise UnsupportedPartition("partition refers to a mode outside the state")
    cov = state.reduced([left[0], right[0]]).covariance
    flip = np.diag([1.0, 1.0, 1.0, -1.0])  # p -> -p on the second mode
    nu_min = symplectic_eigenvalues(flip @ cov @ flip).min()
    return float(max(0.0, -np.log(nu_min)))


def duan_value(state: GaussianState) -> float:
    """Var(x1 - x2) + Var(p1 + p2); below 4 witnesses entanglement."""
    if state.n_modes != 2:
        raise DimensionMismatch("the Duan value is defined here for two modes")
    v = state.covariance
    var_x = v[0, 0] + v[2, 2] - 2 * v[0, 2]
    var_p = v[1, 1] + v[3, 3] + 2 * v[1, 3]
    return float(var_x + var_p)


def two_mode_squeezed_covariance(r: float) -> np.ndarray:
    """Reference covariance with x1 - x2 and p1 + p2 squeezed by exp(-2r)."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    return np.array([[c, 0, s, 0],
                     [0, c, 0, -s],
                     [s, 0, c, 0],
                     [0, -s, 0, c]])


def entangling_inputs(r: float) -> GaussianState:
    """Two signals squeezed in orthogonal quadratures; a 1:1 beamsplitter
    turns them into :func:`two_mode_squeezed_covariance`."""
    return make_squeezed_inputs([r, r], [np.pi / 2, 0.0])
