"""
Overlaps of longitudinal spin-wave profiles.

Spin wave m varies along the cavity axis as exp(-i dk_m z), where dk_m is
the offset of its pump's axial wave-vector from the cavity's.  Transverse
factors are common to all waves and drop out, so the overlap reduces to a
1-D density-weighted Fourier integral

    G[n, m] = int n(z) exp(i (dk_n - dk_m) z) dz.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import erf

from .errors import QuadratureFailure

QUAD_TOL = 1e-10
DEFAULT_TRUNCATION = 8.0  # sigmas; the Gaussian tail beyond is ~1e-15


@dataclass(frozen=True)
class DensityProfile:
    kind: str
    length: Optional[float] = None
    sigma: Optional[float] = None
    half_width: Optional[float] = None

    def __post_init__(self):
        if self.kind == "uniform":
            if not (self.length and self.length > 0):
                raise ValueError("uniform density needs a positive length")
        elif self.kind == "gaussian":
            if not (self.sigma and self.sigma > 0):
                raise ValueError("gaussian density needs a positive sigma")
            if self.half_width is None:
                object.__setattr__(self, "half_width", DEFAULT_TRUNCATION * self.sigma)
            elif self.half_width <= 0:
                raise ValueError("truncation half-width must be positive")
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")

    @classmethod
    def uniform(cls, length: float) -> "DensityProfile":
        return cls("uniform", length=length)

    @classmethod
    def gaussian(cls, sigma: float, half_width: Optional[float] = None) -> "DensityProfile":
        return cls("gaussian", sigma=sigma, half_width=half_width)

    @property
    def support(self):
        if self.kind == "uniform":
            return 0.0, self.length
        return -self.half_width, self.half_width

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.support
        inside = (z >= lo) & (z <= hi)
        if self.kind == "uniform":
            return np.where(inside, 1.0 / self.length, 0.0)
        mass = erf(self.half_width / (self.sigma * np.sqrt(2)))
        val = np.exp(-z ** 2 / (2 * self.sigma ** 2)) / (self.sigma * np.sqrt(2 * np.pi) * mass)
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class SpinWaveBasis:
    offsets: tuple

    def __post_init__(self):
        off = tuple(float(k) for k in self.offsets)
        if not off:
            raise ValueError("basis needs at least one wave")
        if len(set(off)) != len(off):
            raise ValueError("wave-vector offsets must be distinct")
        object.__setattr__(self, "offsets", off)

    @property
    def n_waves(self) -> int:
        return len(self.offsets)

    @classmethod
    def evenly_spaced(cls, n_waves: int, increment: float) -> "SpinWaveBasis":
        return cls(tuple(increment * m for m in range(n_waves)))

    @classmethod
    def commensurate(cls, n_waves: int, length: float) -> "SpinWaveBasis":
        """Offsets 2 pi m / L, orthogonal over a uniform medium of length L."""
        return cls.evenly_spaced(n_waves, 2 * np.pi / length)


def _fourier_weight(profile: DensityProfile, q: float) -> complex:
    lo, hi = profile.support
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for weight in ("cos", "sin"):
                val, err = integrate.quad(profile, lo, hi, weight=weight, wvar=q,
                                          epsabs=QUAD_TOL / 10, epsrel=1e-12, limit=500)
                if err > QUAD_TOL:
                    raise QuadratureFailure(f"quadrature error {err:.3g} exceeds {QUAD_TOL}")
                parts.append(val)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    return complex(parts[0], parts[1])


def gram_matrix(profile: DensityProfile, basis: SpinWaveBasis) -> np.ndarray:
    k = np.asarray(basis.offsets)
    n = k.size
    gram = np.eye(n, dtype=complex)
    for a in range(n):
        for b in range(a + 1, n):
            gram[a, b] = _fourier_weight(profile, k[a] - k[b])
            gram[b, a] = np.conj(gram[a, b])
    return gram


def crosstalk_metric(gram: np.ndarray) -> float:
    """Largest off-diagonal overlap magnitude."""
    g = np.asarray(gram)
    if g.shape[0] < 2:
        return 0.0
    off = np.abs(g - np.diag(np.diag(g)))
    return float(off.max())
