"""Gaussian random waves over a spectral window.

Coefficients are drawn from numpy's Philox counter-based generator, keyed by
``(master_seed, trial)``, so every trial owns an independent stream and no
trial depends on how many others ran before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .domain import (DomainLike, Disk, EigenMode, SpectralWindow, TrigPolynomial,
                     enumerate_modes, mode_basis)

PRNG_ALGORITHM = "numpy.random.Philox-4x64-10 (key = [master_seed, trial], counter from 0)"
GAUSSIAN_TRANSFORM = "numpy.random.Generator.standard_normal (ziggurat)"

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class CoefficientVector:
    values: np.ndarray
    master_seed: int
    trial: int

    def __len__(self) -> int:
        return self.values.size


def trial_generator(master_seed: int, trial: int) -> np.random.Generator:
    if trial < 0:
        raise ValueError("trial index must be nonnegative")
    key = [int(master_seed) & _SEED_MASK, int(trial) & _SEED_MASK]
    return np.random.Generator(np.random.Philox(key=key))


def sample_coefficients(n: int, master_seed: int, trial: int) -> CoefficientVector:
    """``n`` i.i.d. standard normal deviates from the stream of ``(master_seed, trial)``."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    values = trial_generator(master_seed, trial).standard_normal(n)
    values.flags.writeable = False
    return CoefficientVector(values, int(master_seed), int(trial))


class WaveModel:
    """Modes of one window together with their precomputed trace basis.

    Shared by every realization drawn from the same ensemble.
    """

    def __init__(self, domain: DomainLike, window: Optional[SpectralWindow],
                 modes: Optional[Sequence[EigenMode]] = None):
        self.domain = domain
        self.window = window
        self.modes = tuple(enumerate_modes(domain, window) if modes is None else modes)
        self.basis = mode_basis(domain, self.modes) if self.modes else None

    @property
    def size(self) -> int:
        return len(self.modes)

    @property
    def boundary_length(self) -> float:
        return self.domain.boundary_length

    @property
    def top_frequency(self) -> float:
        """Largest trace frequency per unit arclength, used for grid floors."""
        if isinstance(self.domain, TrigPolynomial):
            return float(max(self.domain.orders))
        return float(self.window.bounds[1]) if self.window is not None else 0.0

    def min_grid(self) -> int:
        """Smallest grid allowed for sign-change scanning."""
        lam = self.top_frequency
        if isinstance(self.domain, TrigPolynomial):
            return int(math.ceil(8 * (lam + 1)))
        return int(math.ceil(8 * (lam + 1) * self.boundary_length / (2 * math.pi)))

    def wave(self, coefficients: CoefficientVector) -> "RandomWave":
        return RandomWave(self, coefficients)

    def draw(self, master_seed: int, trial: int) -> "RandomWave":
        return RandomWave(self, sample_coefficients(self.size, master_seed, trial))


@dataclass(frozen=True)
class RandomWave:
    model: WaveModel
    coefficients: CoefficientVector
    series: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.coefficients) != self.model.size:
            raise ValueError(f"expected {self.model.size} coefficients, got {len(self.coefficients)}")
        series = self.model.basis.reduce(self.coefficients.values) if self.model.size else None
        object.__setattr__(self, "series", series)

    @property
    def domain(self) -> DomainLike:
        return self.model.domain

    @property
    def boundary_length(self) -> float:
        return self.model.boundary_length

    def trace_at(self, theta):
        """Boundary trace ``sum_j a_j v_j(theta)``; ``theta`` is reduced mod the boundary length."""
        if self.series is None:
            return np.zeros(np.shape(theta)) if np.ndim(theta) else 0.0
        out = self.series.value(theta)
        return float(out) if np.ndim(theta) == 0 else out

    def trace_derivative_at(self, theta):
        if self.series is None:
            return np.zeros(np.shape(theta)) if np.ndim(theta) else 0.0
        out = self.series.derivative(theta)
        return float(out) if np.ndim(theta) == 0 else out

    def trace_second_derivative_at(self, theta):
        if self.series is None:
            return np.zeros(np.shape(theta)) if np.ndim(theta) else 0.0
        out = self.series.second_derivative(theta)
        return float(out) if np.ndim(theta) == 0 else out

    def trace_on_grid(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and trace values on the half-offset grid with ``n`` cells."""
        if self.series is None:
            nodes = (np.arange(n) + 0.5) * (self.boundary_length / n)
            return nodes, np.zeros(n)
        return self.series.on_grid(n)

    def interior_value(self, point):
        """``sum_j a_j phi_j(point)`` for one point ``(x, y)`` or an array of points."""
        pts = np.asarray(point, dtype=float)
        if self.series is None:
            return 0.0 if pts.ndim == 1 else np.zeros(pts.reshape(-1, 2).shape[0])
        vals = self.coefficients.values @ self.model.basis.eigen_matrix(pts.reshape(-1, 2))
        return float(vals[0]) if pts.ndim == 1 else vals

    def offset_series(self, delta: float):
        """Interior values along the inward offset circle, as a series in boundary arclength.

        Only available on the disk; other domains go through :meth:`interior_value`.
        """
        if not isinstance(self.domain, Disk):
            raise TypeError("offset series is only available on the disk")
        return self.model.basis.offset_reduce(self.coefficients.values, delta)
