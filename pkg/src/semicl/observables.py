"""Density, current, expectation values and Fourier-basis observable operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import Grid1D, WaveFunction, forward_dft, frequency_table, inverse_dft, spectral_derivative_values

DENSE_LIMIT = 64


@dataclass(frozen=True)
class ObservableField:
    grid: Grid1D
    values: np.ndarray
    kind: str  # "density" or "current"

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)


@dataclass(frozen=True)
class HbarSobolevNorm:
    q: int
    value: float


def density(psi: WaveFunction) -> ObservableField:
    return ObservableField(psi.grid, np.abs(psi.values) ** 2, "density")


def current(psi: WaveFunction) -> ObservableField:
    """``J = hbar * Im(conj(psi) * dpsi/dx)`` with a spectral derivative."""
    dpsi = spectral_derivative_values(psi.values, psi.grid, 1)
    return ObservableField(psi.grid, psi.hbar * np.imag(np.conj(psi.values) * dpsi), "current")


def hbar_sobolev_norm(psi: WaveFunction, q: int, weight_power: int = 1) -> HbarSobolevNorm:
    """``sqrt(sum_{a <= q} hbar^(weight_power * a) ||d^a psi||^2)`` with dx-weighted discrete norms.

    The default weight ``hbar^a`` follows the textbook statement of the bound;
    ``weight_power=2`` gives ``||(hbar d)^a psi||``, which stays O(1) on WKB states.
    """
    if not (isinstance(q, (int, np.integer)) and 0 <= q <= 4):
        raise ValueError(f"q must be an integer in 0..4, got {q}")
    dx = psi.grid.dx
    total = np.sum(np.abs(psi.values) ** 2) * dx
    for a in range(1, q + 1):
        da = spectral_derivative_values(psi.values, psi.grid, a)
        total += psi.hbar ** (weight_power * a) * np.sum(np.abs(da) ** 2) * dx
    return HbarSobolevNorm(q, float(np.sqrt(total)))


def expectation(
    psi: WaveFunction,
    position: Callable[[np.ndarray], np.ndarray] | None = None,
    symbol: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-11,
) -> float:
    """``<psi|A|psi>`` for a multiplication operator ``position(x)`` or a Fourier symbol ``symbol(mu)``.

    Exactly one of the two must be given.  A non-negligible imaginary part means the
    operator was not Hermitian and raises ``ValueError``.
    """
    if (position is None) == (symbol is None):
        raise ValueError("give exactly one of position= or symbol=")
    if position is not None:
        a_psi = np.asarray(position(psi.grid.x)) * psi.values
    else:
        mu = frequency_table(psi.grid)
        a_psi = inverse_dft(np.asarray(symbol(mu)) * forward_dft(psi.values))
    value = np.vdot(psi.values, a_psi) * psi.grid.dx
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > tol * scale:
        raise ValueError(f"operator is not Hermitian: imaginary part {value.imag:.3e}")
    return float(value.real)


def _check_index(name: str, value: int, M: int) -> None:
    if not 0 <= value < M:
        raise IndexError(f"{name}={value} outside [0, {M})")


def fourier_operator_element(kind: str, j: int, k: int, kp: int, grid: Grid1D, hbar: float) -> complex:
    """Matrix element ``O[k', k]`` of the site-``j`` density or current operator.

    The quadratic form ``sum_{k,k'} conj(psi_hat[k']) O[k', k] psi_hat[k]`` over the
    Fourier amplitudes ``psi_hat = forward_dft(psi)`` reproduces ``|psi_j|^2`` and
    ``hbar * Im(conj(psi_j) dpsi_j)`` of the grid samples.  With ``p = exp(2 pi i j (k - k') / M)``::

        density:  p / M
        current:  hbar / (2 i M) * (p * (i mu_k) - p * conj(i mu_k'))  =  hbar p (mu_k + mu_k') / (2M)
    """
    M = grid.M
    for name, v in (("j", j), ("k", k), ("k'", kp)):
        _check_index(name, v, M)
    phase = np.exp(2j * np.pi * j * (k - kp) / M)
    if kind == "density":
        return complex(phase / M)
    if kind == "current":
        mu = frequency_table(grid)
        return complex(hbar / (2 * M) * phase * (mu[k] + mu[kp]))
    raise ValueError(f"unknown operator kind {kind!r}")


def fourier_operator_matrix(kind: str, j: int, grid: Grid1D, hbar: float) -> np.ndarray:
    """Dense ``O[k', k]`` for small grids (``M <= 64``)."""
    M = grid.M
    if M > DENSE_LIMIT:
        raise ValueError(f"dense operator matrices are limited to M <= {DENSE_LIMIT}")
    _check_index("j", j, M)
    k = np.arange(M)
    phase = np.exp(2j * np.pi * j * (k[None, :] - k[:, None]) / M)
    if kind == "density":
        return phase / M
    if kind == "current":
        mu = frequency_table(grid)
        return hbar / (2 * M) * phase * (mu[None, :] + mu[:, None])
    raise ValueError(f"unknown operator kind {kind!r}")


def fourier_expectation(kind: str, j: int, psi: WaveFunction) -> float:
    """Matrix-free ``<psi_hat| O_j |psi_hat>`` for the operators of :func:`fourier_operator_element`."""
    M = psi.grid.M
    _check_index("j", j, M)
    psi_hat = forward_dft(psi.values)
    w = np.exp(2j * np.pi * j * np.arange(M) / M)
    a = np.sum(w * psi_hat)  # sum_k e^{i2pi jk/M} psi_hat_k
    if kind == "density":
        return float(abs(a) ** 2 / M)
    if kind == "current":
        mu = frequency_table(psi.grid)
        b = np.sum(w * mu * psi_hat)
        return float(psi.hbar / M * np.real(np.conj(a) * b))
    raise ValueError(f"unknown operator kind {kind!r}")
