"""Split-step Fourier time evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft

from .spectral import WaveFunction, forward_dft, frequency_table, inverse_dft
from .splitting import KINETIC, POTENTIAL, SplittingScheme
from .states import PotentialSpec


@dataclass(frozen=True)
class EvolutionSpec:
    scheme: SplittingScheme
    dt: float
    steps: int
    potential: PotentialSpec
    reverse: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


class EvolutionError(RuntimeError):
    """Raised when an observer fails; carries the state reached so far."""

    def __init__(self, message: str, partial: WaveFunction, steps_done: int):
        super().__init__(message)
        self.partial = partial
        self.steps_done = steps_done


class _Kernel:
    """Precomputed grid quantities for repeated phase application on one grid."""

    def __init__(self, psi: WaveFunction, potential: PotentialSpec):
        self.hbar = psi.hbar
        self.V = None if potential.is_zero else np.asarray(potential.V(psi.grid.x), dtype=float)
        self.mu2 = frequency_table(psi.grid) ** 2
        self._phases: dict[tuple[str, float], np.ndarray] = {}

    def _phase(self, kind: str, tau: float) -> np.ndarray:
        key = (kind, tau)
        factor = self._phases.get(key)
        if factor is None:
            if kind == KINETIC:
                factor = np.exp(-1j * ((0.5 * tau * self.hbar) * self.mu2))
            else:
                factor = np.exp(-1j * ((tau / self.hbar) * self.V))
            if len(self._phases) < 16:
                self._phases[key] = factor
        return factor

    def potential(self, values: np.ndarray, tau: float) -> np.ndarray:
        if self.V is None or tau == 0.0:
            return values
        return values * self._phase(POTENTIAL, tau)

    def kinetic(self, values: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0.0:
            return values
        spectrum = scipy.fft.fft(values, norm="ortho")
        spectrum *= self._phase(KINETIC, tau)
        return scipy.fft.ifft(spectrum, norm="ortho", overwrite_x=True)

    def apply(self, values: np.ndarray, kind: str, tau: float) -> np.ndarray:
        return self.kinetic(values, tau) if kind == KINETIC else self.potential(values, tau)


def apply_potential_phase(psi: WaveFunction, V: PotentialSpec, tau: float) -> WaveFunction:
    """``psi_j <- exp(-i tau V(x_j) / hbar) psi_j``."""
    return psi.with_values(_Kernel(psi, V).potential(psi.values, tau))


def apply_kinetic_phase(psi: WaveFunction, tau: float) -> WaveFunction:
    """Exact flow of ``i psi_t = -(hbar/2) psi_xx`` over time ``tau`` on the periodic grid."""
    mu2 = frequency_table(psi.grid) ** 2
    if tau == 0.0:
        return psi.with_values(psi.values.copy())
    return psi.with_values(inverse_dft(np.exp(-1j * ((0.5 * tau * psi.hbar) * mu2)) * forward_dft(psi.values)))


def step_operators(spec: EvolutionSpec, n_steps: int, merge: bool, skip_zero_potential: bool = True) -> list[tuple[str, float]]:
    """Flat list of ``(kind, tau)`` in application order for ``n_steps`` steps.

    With ``merge`` adjacent operators of the same kind are fused (``U(a) U(b) = U(a + b)``).
    """
    per_step = [(kind, coef * spec.dt) for kind, coef in spec.scheme.operator_sequence(spec.reverse)]
    if skip_zero_potential and spec.potential.is_zero:
        per_step = [op for op in per_step if op[0] != POTENTIAL]
    ops: list[tuple[str, float]] = []
    for _ in range(n_steps):
        for kind, tau in per_step:
            if merge and ops and ops[-1][0] == kind:
                ops[-1] = (kind, ops[-1][1] + tau)
            else:
                ops.append((kind, tau))
    return ops


def step(psi: WaveFunction, spec: EvolutionSpec) -> WaveFunction:
    kernel = _Kernel(psi, spec.potential)
    values = psi.values
    for kind, coef in spec.scheme.operator_sequence(spec.reverse):
        values = kernel.apply(values, kind, coef * spec.dt)
    return psi.with_values(values)


@dataclass
class EvolutionResult:
    psi: WaveFunction
    steps_done: int
    operators_applied: int = 0
    transforms: int = 0
    snapshots: list = field(default_factory=list)


def evolve(
    psi0: WaveFunction,
    spec: EvolutionSpec,
    observer: Callable[[int, WaveFunction], object] | None = None,
    every: int = 1,
    merge: bool = True,
) -> EvolutionResult:
    """Run ``spec.steps`` steps, calling ``observer(n, psi)`` at ``n = 0, every, 2*every, ...`` and at the end.

    Adjacent same-kind operators are fused between observation points when ``merge``
    is set; a Strang K-V-K run of ``n`` steps then applies ``2n + 1`` operators.
    """
    if every < 1:
        raise ValueError("observer cadence must be >= 1")
    kernel = _Kernel(psi0, spec.potential)
    values = psi0.values.copy()
    result = EvolutionResult(psi0, 0)

    def notify(n: int):
        if observer is None:
            return
        try:
            observer(n, psi0.with_values(values))
        except Exception as exc:
            raise EvolutionError(f"observer failed at step {n}: {exc}", psi0.with_values(values), n) from exc

    notify(0)
    done = 0
    while done < spec.steps:
        chunk = min(every, spec.steps - done) if observer is not None else spec.steps
        for kind, tau in step_operators(spec, chunk, merge):
            values = kernel.apply(values, kind, tau)
            result.operators_applied += 1
            result.transforms += 2 if kind == KINETIC else 0
        done += chunk
        if done % every == 0 or done == spec.steps:
            notify(done)
    result.psi = psi0.with_values(values)
    result.steps_done = done
    return result
