"""Uniform periodic grids, the unitary DFT and Fourier multipliers.

Conventions
-----------
``forward_dft`` uses the kernel ``exp(-2*pi*i*j*k/M)/sqrt(M)`` and
``inverse_dft`` the conjugate kernel, so the position-space values are
recovered from Fourier coefficients with a positive exponent.  Frequencies are
stored in the signed layout produced by ``numpy.fft.fftfreq``: index ``k`` maps
to ``2*pi*k/L`` for ``k < M/2`` and ``2*pi*(k - M)/L`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft

MAX_QUBITS = 26


@dataclass(frozen=True)
class Grid1D:
    """Periodic grid of ``M = 2**m`` nodes on ``[x0, x0 + L)``."""

    L: float
    m: int
    x0: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        if not (isinstance(self.m, (int, np.integer)) and 1 <= self.m <= MAX_QUBITS):
            raise ValueError(f"m must be an integer in [1, {MAX_QUBITS}], got {self.m}")

    @property
    def M(self) -> int:
        return 1 << int(self.m)

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.arange(self.M) * self.dx

    def refine(self, levels: int) -> "Grid1D":
        """Same domain with ``2**levels`` times as many nodes."""
        return Grid1D(self.L, self.m + levels, self.x0)


@dataclass(frozen=True)
class WaveFunction:
    """Complex grid samples of a wave function together with its grid and hbar."""

    grid: Grid1D
    hbar: float
    values: np.ndarray

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.M,):
            raise ValueError(f"expected {self.grid.M} samples, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        """Discrete L2 norm ``sqrt(sum |psi_j|^2 dx)``."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def normalized(self) -> "WaveFunction":
        nrm = self.norm()
        if nrm == 0.0 or not np.isfinite(nrm):
            raise ValueError("cannot normalize a wave function with zero or non-finite norm")
        return self.with_values(self.values / nrm)

    def with_values(self, values: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, self.hbar, values)


def build_grid(L: float, m: int, x0: float = 0.0) -> Grid1D:
    return Grid1D(float(L), int(m), float(x0))


def _check_length(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"transform length must be a power of two >= 2, got {n}")


def forward_dft(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    _check_length(values.shape[-1])
    return scipy.fft.fft(values, norm="ortho")


def inverse_dft(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    _check_length(values.shape[-1])
    return scipy.fft.ifft(values, norm="ortho")


def frequency_table(grid: Grid1D) -> np.ndarray:
    """Angular frequencies ``mu_k`` aligned with ``forward_dft`` output indices."""
    M = grid.M
    k = np.arange(M)
    signed = np.where(k < M // 2, k, k - M)
    # same evaluation order as 2*pi*(k - M/2)/L so the two enumerations agree bit for bit
    return 2.0 * np.pi * signed / grid.L


def apply_multiplier(psi: WaveFunction, g: Callable[[np.ndarray], np.ndarray]) -> WaveFunction:
    """Return ``inverse_dft(g(mu) * forward_dft(psi))``."""
    symbol = np.asarray(g(frequency_table(psi.grid)))
    if not np.all(np.isfinite(symbol)):
        raise ValueError("multiplier symbol must be finite on the frequency table")
    return psi.with_values(inverse_dft(symbol * forward_dft(psi.values)))


def spectral_derivative_values(values: np.ndarray, grid: Grid1D, order: int) -> np.ndarray:
    """Spectral ``d^order/dx^order`` of raw grid samples."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be in 1..4, got {order}")
    mu = frequency_table(grid)
    return inverse_dft((1j * mu) ** order * forward_dft(values))


def spatial_derivative(psi: WaveFunction, order: int) -> np.ndarray:
    return spectral_derivative_values(psi.values, psi.grid, order)
