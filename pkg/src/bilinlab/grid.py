"""Periodic 1-D grids, the DFT convention, and (quasi)norms on sampled functions.

Conventions
-----------
A :class:`Grid` has ``N`` sites ``x_j = j*h`` on a circle of length ``L = N*h``.
The forward transform is

    F[k] = sum_j f[j] * exp(-2*pi*i*j*k/N)

and the inverse divides by ``N`` and flips the sign, i.e. exactly
``numpy.fft.fft`` / ``numpy.fft.ifft``.  Spectra are stored in FFT order
(index ``i`` holds the frequency ``grid.frequencies()[i]``); the frequency
labels are the centered residues ``-N//2, ..., ceil(N/2) - 1``.  The physical
frequency of label ``k`` is ``k / L`` cycles per unit length.

Norms include the cell width: ``||f||_p = (h * sum |f_j|^p)^(1/p)``, so ratios
scale like their continuum counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Grid",
    "SampledFn",
    "Spectrum",
    "VectorSampledFn",
    "dft",
    "idft",
    "lp_norm",
    "lp_l2_norm",
    "wrap_frequency",
    "check_exponent",
]


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=complex)
    values.setflags(write=False)
    return values


def wrap_frequency(k, n: int):
    """Reduce integer frequencies modulo ``n`` into the centered residue system."""
    k = np.asarray(k)
    return (k + n // 2) % n - n // 2


def check_exponent(p: float) -> float:
    p = float(p)
    if not p > 0:
        raise ValueError(f"exponent must lie in (0, inf], got {p}")
    return p


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n_points`` sites of width ``spacing``."""

    n_points: int
    spacing: float = 1.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"need an integer n_points >= 2, got {self.n_points}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def length(self) -> float:
        return self.n_points * self.spacing

    @property
    def frequency_spacing(self) -> float:
        """Physical width of one frequency cell, ``1/L``."""
        return 1.0 / self.length

    def sites(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing

    def frequencies(self) -> np.ndarray:
        """Centered integer frequency labels in FFT storage order."""
        return np.rint(np.fft.fftfreq(self.n_points) * self.n_points).astype(np.int64)

    def physical_frequencies(self) -> np.ndarray:
        return self.frequencies() / self.length

    def index_of(self, k) -> np.ndarray:
        """FFT storage index of centered frequency label(s) ``k``."""
        return np.asarray(k) % self.n_points


@dataclass(frozen=True, eq=False)
class SampledFn:
    """Complex samples of a function on ``grid``; ``values[j]`` sits at ``j*h``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, func) -> "SampledFn":
        return cls(grid, func(grid.sites()))

    def __add__(self, other: "SampledFn") -> "SampledFn":
        _same_grid(self.grid, other.grid)
        return SampledFn(self.grid, self.values + other.values)

    def __mul__(self, other) -> "SampledFn":
        if isinstance(other, SampledFn):
            _same_grid(self.grid, other.grid)
            return SampledFn(self.grid, self.values * other.values)
        return SampledFn(self.grid, self.values * other)

    __rmul__ = __mul__

    def conj(self) -> "SampledFn":
        return SampledFn(self.grid, np.conj(self.values))

    def roll(self, sites: int) -> "SampledFn":
        """``x -> f(x + sites*h)`` on the circle."""
        return SampledFn(self.grid, np.roll(self.values, -int(sites)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} coefficients, got shape {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def at(self, k) -> np.ndarray:
        """Coefficient(s) at centered frequency label(s) ``k``."""
        return self.coeffs[self.grid.index_of(k)]

    def centered(self) -> tuple[np.ndarray, np.ndarray]:
        """``(labels, coeffs)`` sorted by increasing frequency."""
        return np.fft.fftshift(self.grid.frequencies()), np.fft.fftshift(self.coeffs)


@dataclass(frozen=True, eq=False)
class VectorSampledFn:
    """``K`` sampled functions on one grid, stored as a ``(K, N)`` array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[1] != self.grid.n_points:
            raise ValueError(
                f"expected shape (K, {self.grid.n_points}), got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_components(cls, components: Sequence[SampledFn]) -> "VectorSampledFn":
        if not components:
            raise ValueError("need at least one component")
        grid = components[0].grid
        for c in components[1:]:
            _same_grid(grid, c.grid)
        return cls(grid, np.stack([c.values for c in components]))

    @property
    def n_components(self) -> int:
        return self.values.shape[0]

    @property
    def components(self) -> list[SampledFn]:
        return [SampledFn(self.grid, row) for row in self.values]

    def pointwise_l2(self) -> np.ndarray:
        """``x -> (sum_k |f_k(x)|^2)^(1/2)``."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def dft(f: SampledFn) -> Spectrum:
    return Spectrum(f.grid, np.fft.fft(f.values))


def idft(s: Spectrum) -> SampledFn:
    return SampledFn(s.grid, np.fft.ifft(s.coeffs))


def _lp(values: np.ndarray, p: float, h: float) -> float:
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    peak = a.max() if a.size else 0.0
    if peak == 0:
        return 0.0
    # factor out the peak so large p does not overflow
    return float(peak * (h * np.sum((a / peak) ** p)) ** (1.0 / p))


def lp_norm(f: SampledFn, p: float) -> float:
    """``(h * sum_j |f_j|^p)^(1/p)``, or ``max |f_j|`` for ``p = inf``.

    For ``0 < p < 1`` this is only a quasinorm.
    """
    return _lp(f.values, check_exponent(p), f.grid.spacing)


def lp_l2_norm(F: VectorSampledFn, p: float) -> float:
    """L^p norm of the pointwise l^2 aggregate of the components."""
    return _lp(F.pointwise_l2(), check_exponent(p), F.grid.spacing)
