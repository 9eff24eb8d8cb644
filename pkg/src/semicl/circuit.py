"""Gate-level statevector emulation of the split-step algorithm.

Basis index ``j = sum_q b_q 2**q``: qubit ``q`` carries bit ``q`` of the grid
index, so amplitude ``j`` is the (scaled) wave function at node ``x_j``.

``qft`` is built from Hadamards, controlled phases and a final swap network and
maps amplitudes exactly like :func:`semicl.spectral.inverse_dft` (positive
exponent).  A kinetic factor therefore reads ``qft . diag . inverse_qft``.

Shot sampling uses NumPy's ``Generator`` over the PCG64 bit generator.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields

import numpy as np

from .estimator import diagonal_cost, parse_cost_model
from .propagator import EvolutionSpec, step_operators
from .spectral import MAX_QUBITS, Grid1D, WaveFunction, frequency_table
from .splitting import KINETIC, POTENTIAL, SplittingScheme
from .states import PotentialSpec


@dataclass
class GateLedger:
    one_qubit: int = 0
    two_qubit: int = 0
    diagonal_gates: float = 0
    diagonals: int = 0
    queries: int = 0
    qft: int = 0

    @property
    def total_gates(self) -> float:
        return self.one_qubit + self.two_qubit + self.diagonal_gates

    def as_rows(self) -> list[tuple[str, float]]:
        rows = [(f.name, getattr(self, f.name)) for f in fields(self)]
        rows.append(("total_gates", self.total_gates))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("counter", "value"))
        for name, value in self.as_rows():
            writer.writerow((name, repr(value) if isinstance(value, float) else value))
        return buf.getvalue()


@dataclass
class QubitState:
    """``2**m`` amplitudes with a gate ledger; gates act in place."""

    m: int
    amplitudes: np.ndarray
    ledger: GateLedger = field(default_factory=GateLedger)

    def __post_init__(self):
        if not 1 <= self.m <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}]")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.m,):
            raise ValueError(f"expected {1 << self.m} amplitudes, got {amps.shape}")
        self.amplitudes = amps

    @classmethod
    def basis(cls, m: int, index: int) -> "QubitState":
        amps = np.zeros(1 << m, dtype=complex)
        amps[index] = 1.0
        return cls(m, amps)

    @classmethod
    def from_wavefunction(cls, psi: WaveFunction) -> "QubitState":
        return cls(psi.grid.m, psi.values * np.sqrt(psi.grid.dx))

    def to_wavefunction(self, grid: Grid1D, hbar: float) -> WaveFunction:
        if grid.m != self.m:
            raise ValueError("grid size does not match the register")
        return WaveFunction(grid, hbar, self.amplitudes / np.sqrt(grid.dx))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def _tensor(self) -> np.ndarray:
        # axis a holds bit (m - 1 - a) with C ordering
        return self.amplitudes.reshape((2,) * self.m)

    def _axis(self, qubit: int) -> int:
        if not 0 <= qubit < self.m:
            raise IndexError(f"qubit {qubit} outside register of {self.m}")
        return self.m - 1 - qubit


_SQRT_HALF = np.sqrt(0.5)


def hadamard(state: QubitState, q: int) -> QubitState:
    t = state._tensor()
    ax = state._axis(q)
    lo = np.take(t, 0, axis=ax)
    hi = np.take(t, 1, axis=ax)
    state.amplitudes = (np.stack(((lo + hi) * _SQRT_HALF, (lo - hi) * _SQRT_HALF), axis=ax)).reshape(-1)
    state.ledger.one_qubit += 1
    return state


def _bit_mask(m: int, q: int) -> np.ndarray:
    return ((np.arange(1 << m) >> q) & 1).astype(bool)


def controlled_phase(state: QubitState, control: int, target: int, theta: float) -> QubitState:
    if control == target:
        raise ValueError("control and target must differ")
    sel = _bit_mask(state.m, control) & _bit_mask(state.m, target)
    state.amplitudes[sel] *= np.exp(1j * theta)
    state.ledger.two_qubit += 1
    return state


def swap(state: QubitState, a: int, b: int) -> QubitState:
    t = state._tensor()
    state.amplitudes = np.ascontiguousarray(np.swapaxes(t, state._axis(a), state._axis(b))).reshape(-1)
    state.ledger.two_qubit += 1
    return state


def qft_gate_count(m: int) -> int:
    return m * (m + 1) // 2 + m // 2


def _qft(state: QubitState, sign: float) -> QubitState:
    m = state.m
    if sign > 0:
        for b in range(m - 1, -1, -1):
            hadamard(state, b)
            for c in range(b - 1, -1, -1):
                controlled_phase(state, c, b, 2.0 * np.pi / 2 ** (b - c + 1))
        for i in range(m // 2):
            swap(state, i, m - 1 - i)
    else:
        # exact adjoint: reversed gate order with conjugated phases
        for i in range(m // 2):
            swap(state, i, m - 1 - i)
        for b in range(m):
            for c in range(b):
                controlled_phase(state, c, b, -2.0 * np.pi / 2 ** (b - c + 1))
            hadamard(state, b)
    state.ledger.qft += 1
    return state


def qft(state: QubitState) -> QubitState:
    """``|j> -> 2^{-m/2} sum_k exp(+2 pi i j k / 2^m) |k>``."""
    return _qft(state, +1.0)


def inverse_qft(state: QubitState) -> QubitState:
    return _qft(state, -1.0)


def diagonal_unitary(state: QubitState, phases: np.ndarray, cost_model="full") -> QubitState:
    """Multiply amplitude ``j`` by ``exp(i phases[j])`` and charge ``J(m)`` gates."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != state.amplitudes.shape:
        raise ValueError(f"expected {state.amplitudes.size} phases, got {phases.shape}")
    kind, _ = parse_cost_model(cost_model)
    state.amplitudes *= np.exp(1j * phases)
    state.ledger.diagonals += 1
    state.ledger.diagonal_gates += diagonal_cost(cost_model, state.m)
    if kind == "oracle":
        state.ledger.queries += 1
    return state


def _apply_block(state, kind, tau, grid, hbar, Vx, mu2, cost_model):
    if kind == POTENTIAL:
        diagonal_unitary(state, -(tau / hbar) * Vx, cost_model)
    else:
        inverse_qft(state)
        diagonal_unitary(state, -(0.5 * tau * hbar) * mu2, cost_model)
        qft(state)


def trotter_circuit_run(
    state: QubitState,
    spec: EvolutionSpec,
    grid: Grid1D,
    hbar: float,
    cost_model="full",
    merge: bool = False,
) -> QubitState:
    """``spec.steps`` splitting steps built only from qft / diagonal_unitary / inverse_qft."""
    if grid.m != state.m:
        raise ValueError("grid size does not match the register")
    Vx = np.asarray(spec.potential.V(grid.x), dtype=float)
    mu2 = frequency_table(grid) ** 2
    for kind, tau in step_operators(spec, spec.steps, merge):
        _apply_block(state, kind, tau, grid, hbar, Vx, mu2, cost_model)
    return state


def trotter_circuit_step(
    state: QubitState,
    scheme: SplittingScheme,
    dt: float,
    potential: PotentialSpec,
    grid: Grid1D,
    hbar: float,
    cost_model="full",
) -> QubitState:
    return trotter_circuit_run(state, EvolutionSpec(scheme, dt, 1, potential), grid, hbar, cost_model)


@dataclass
class ShotHistogram:
    shots: int
    counts: np.ndarray
    seed: int

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_csv(self, grid: Grid1D | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("index", "x", "count", "frequency"))
        xs = grid.x if grid is not None else np.full(self.counts.size, np.nan)
        for j, (x, c) in enumerate(zip(xs, self.counts)):
            writer.writerow((j, repr(float(x)), int(c), repr(float(c) / self.shots)))
        return buf.getvalue()


def measure_shots(state: QubitState, shots: int, seed: int | np.random.SeedSequence) -> ShotHistogram:
    """Multinomial sample of ``shots`` computational-basis measurements."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(shots, state.probabilities())
    label = seed if isinstance(seed, int) else int(seed.entropy)
    return ShotHistogram(int(shots), counts, label)


@dataclass
class ShotSweep:
    shots: list[int]
    errors: list[float]
    slope: float


def shot_error_sweep(state: QubitState, shots_list=(400, 4000, 40000), seed: int = 0, repeats: int = 8) -> ShotSweep:
    """Mean sup-norm gap between sampled frequencies and ``|amplitude|^2`` per shot count, with log-log slope."""
    p = state.probabilities()
    children = np.random.SeedSequence(seed).spawn(len(shots_list) * repeats)
    errors = []
    for i, shots in enumerate(shots_list):
        errs = [
            np.max(np.abs(measure_shots(state, shots, children[i * repeats + r]).frequencies() - p))
            for r in range(repeats)
        ]
        errors.append(float(np.mean(errs)))
    slope = float(np.polyfit(np.log(shots_list), np.log(errors), 1)[0]) if len(shots_list) > 1 else float("nan")
    return ShotSweep(list(shots_list), errors, slope)
