"""Initial wave functions and potentials with analytic derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .spectral import Grid1D, WaveFunction

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PotentialSpec:
    """Potential ``V`` and its first four derivatives, all vectorised over ``x``."""

    name: str
    V: Func
    dV: Func
    d2V: Func
    d3V: Func
    d4V: Func
    is_zero: bool = False

    def derivative(self, k: int) -> Func:
        return (self.V, self.dV, self.d2V, self.d3V, self.d4V)[k]

    def probe_derivatives(self, points: np.ndarray, h: float = 1e-4, rtol: float = 1e-6) -> bool:
        """Check each analytic derivative against a 4th-order central difference of the previous one."""
        points = np.asarray(points, dtype=float)
        for k in range(1, 5):
            f = self.derivative(k - 1)
            fd = (-f(points + 2 * h) + 8 * f(points + h) - 8 * f(points - h) + f(points - 2 * h)) / (12 * h)
            exact = np.asarray(self.derivative(k)(points), dtype=float) * np.ones_like(points)
            scale = max(1.0, float(np.max(np.abs(exact))))
            if np.max(np.abs(fd - exact)) > rtol * scale:
                return False
        return True


def polynomial_potential(coefficients: Sequence[float], name: str = "custom-polynomial") -> PotentialSpec:
    """``V(x) = sum_k coefficients[k] * x**k``."""
    coef = np.asarray(coefficients, dtype=float)
    if coef.ndim != 1 or coef.size == 0:
        raise ValueError("polynomial potential needs a non-empty coefficient list")
    derivs = [coef]
    for _ in range(4):
        derivs.append(P.polyder(derivs[-1]) if derivs[-1].size > 1 else np.zeros(1))

    def make(c):
        return lambda x: P.polyval(np.asarray(x, dtype=float), c) * np.ones_like(x, dtype=float)

    return PotentialSpec(name, *(make(c) for c in derivs), is_zero=not np.any(coef))


def harmonic_potential() -> PotentialSpec:
    return polynomial_potential([0.0, 0.0, 0.5], name="harmonic")


def zero_potential() -> PotentialSpec:
    return polynomial_potential([0.0], name="zero")


def potential_from_config(spec) -> PotentialSpec:
    """``"harmonic"``, ``"zero"`` or ``{"custom-polynomial": [c0, c1, ...]}``."""
    if spec == "harmonic":
        return harmonic_potential()
    if spec == "zero":
        return zero_potential()
    if isinstance(spec, dict) and set(spec) == {"custom-polynomial"}:
        return polynomial_potential(spec["custom-polynomial"])
    raise ValueError(f"unknown potential {spec!r}")


@dataclass(frozen=True)
class WKBData:
    """Amplitude ``A0`` and phase ``S0`` of ``A0(x) exp(i S0(x) / hbar)``."""

    A0: Func
    S0: Func
    hbar: float
    dS0: Func | None = None

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")


def wkb_state(data: WKBData, grid: Grid1D) -> WaveFunction:
    x = grid.x
    amp = np.asarray(data.A0(x), dtype=float)
    if not np.any(amp):
        raise ValueError("WKB amplitude vanishes on the grid")
    # phase reduced before the exponential; S0/hbar can be large
    phase = np.asarray(data.S0(x), dtype=float) / data.hbar
    return WaveFunction(grid, data.hbar, amp * np.exp(1j * phase)).normalized()


def boundary_mass_fraction(values: np.ndarray, fraction: float = 0.05) -> float:
    """Share of ``sum |psi|^2`` that sits in the outer ``fraction`` of the grid on each side."""
    dens = np.abs(np.asarray(values)) ** 2
    edge = max(1, int(round(fraction * dens.size)))
    return float((dens[:edge].sum() + dens[-edge:].sum()) / dens.sum())


PAPER_DOMAIN = (-2.0, 4.0)  # (x0, L)


def paper_amplitude(x):
    return np.exp(-25.0 * (np.asarray(x) - 0.5) ** 2)


def paper_phase(x):
    # -(1/5) ln(e^{5y} + e^{-5y}) written to avoid overflow for large |y|
    y = 5.0 * (np.asarray(x, dtype=float) - 0.5)
    return -0.2 * (np.logaddexp(y, -y))


def paper_phase_derivative(x):
    return -np.tanh(5.0 * (np.asarray(x, dtype=float) - 0.5))


def paper_wkb_data(hbar: float) -> WKBData:
    return WKBData(paper_amplitude, paper_phase, hbar, dS0=paper_phase_derivative)


def paper_test_problem(hbar: float, grid: Grid1D) -> tuple[WaveFunction, PotentialSpec]:
    """WKB data centred at x = 0.5 on [-2, 2] in the harmonic potential ``x^2/2``."""
    x0, L = PAPER_DOMAIN
    if not (np.isclose(grid.x0, x0) and np.isclose(grid.L, L)):
        raise ValueError(f"the test problem lives on [-2, 2]; got x0={grid.x0}, L={grid.L}")
    return wkb_state(paper_wkb_data(hbar), grid), harmonic_potential()


def gaussian_packet(center: float, gamma: float, k0: float, hbar: float, grid: Grid1D) -> WaveFunction:
    """Normalised ``exp(-(x - center)^2 / gamma - i k0 x / hbar)``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    x = grid.x
    values = np.exp(-((x - center) ** 2) / gamma - 1j * (k0 * x / hbar))
    return WaveFunction(grid, hbar, values).normalized()


def free_gaussian_exact(center: float, gamma: float, k0: float, hbar: float, t: float, x: np.ndarray) -> np.ndarray:
    """Closed-form solution of ``i psi_t = -(hbar/2) psi_xx`` from :func:`gaussian_packet` data on R.

    Not normalised; the initial datum is ``exp(-(x - center)^2 / gamma - i k0 x / hbar)``.
    """
    # write psi0 = exp(-a (x - c)^2 + i q x) with a = 1/gamma, q = -k0/hbar
    a = 1.0 / gamma
    q = -k0 / hbar
    denom = 1.0 + 2j * a * hbar * t
    xc = x - center - hbar * q * t
    return (
        np.exp(-a * xc**2 / denom)
        * np.exp(1j * q * (x - center) - 0.5j * hbar * q**2 * t)
        * np.exp(1j * q * center)
        / np.sqrt(denom)
    )
