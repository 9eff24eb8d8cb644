"""Matrix-free nested commutators of ``A = -(hbar/2) d^2/dx^2`` and ``B = V/hbar``.

Closed forms (with ``[X, Y] = XY - YX``)::

    [A, B] psi       = -(psi V''/2 + V' psi')
    [B, [B, A]] psi  = -(V')^2 psi / hbar
    [A, [A, B]] psi  = hbar (psi V''''/4 + V''' psi' + V'' psi'')
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spectral import Grid1D, WaveFunction, build_grid, spectral_derivative_values
from .states import PotentialSpec, paper_wkb_data, wkb_state


@dataclass(frozen=True)
class CommutatorWord:
    """Right-nested commutator ``[w1, [w2, ... [w_{r-1}, w_r]...]]``."""

    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        if len(letters) < 2:
            raise ValueError("a commutator word needs at least two letters")
        if any(ch not in ("A", "B") for ch in letters):
            raise ValueError(f"letters must be 'A' or 'B', got {letters}")
        if letters[-1] == letters[-2]:
            raise ValueError("innermost bracket of identical letters vanishes identically")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "CommutatorWord":
        """``"AAB"`` means ``[A, [A, B]]``; brackets, commas and spaces are ignored."""
        return cls(tuple(ch for ch in text.upper() if ch in "AB" or ch.isalpha()))

    @property
    def r(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        inner = self.letters[-1]
        for ch in reversed(self.letters[:-1]):
            inner = f"[{ch},{inner}]"
        return inner


def apply_A_values(values: np.ndarray, grid: Grid1D, hbar: float) -> np.ndarray:
    return -0.5 * hbar * spectral_derivative_values(values, grid, 2)


def apply_B_values(values: np.ndarray, Vx: np.ndarray, hbar: float) -> np.ndarray:
    return (Vx / hbar) * values


def apply_A(psi: WaveFunction) -> np.ndarray:
    return apply_A_values(psi.values, psi.grid, psi.hbar)


def apply_B(psi: WaveFunction, V: PotentialSpec) -> np.ndarray:
    return apply_B_values(psi.values, V.V(psi.grid.x), psi.hbar)


def _letter_op(letter: str, grid: Grid1D, hbar: float, Vx: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    if letter == "A":
        return lambda v: apply_A_values(v, grid, hbar)
    return lambda v: apply_B_values(v, Vx, hbar)


def _word_op(letters: Sequence[str], grid: Grid1D, hbar: float, Vx: np.ndarray):
    if len(letters) == 1:
        return _letter_op(letters[0], grid, hbar, Vx)
    X = _letter_op(letters[0], grid, hbar, Vx)
    Y = _word_op(letters[1:], grid, hbar, Vx)
    return lambda v: X(Y(v)) - Y(X(v))


def apply_commutator(word: CommutatorWord | str, psi: WaveFunction, V: PotentialSpec) -> np.ndarray:
    if isinstance(word, str):
        word = CommutatorWord.parse(word)
    op = _word_op(word.letters, psi.grid, psi.hbar, np.asarray(V.V(psi.grid.x), dtype=float))
    return op(psi.values)


def commutator_residual(word: CommutatorWord | str, psi: WaveFunction, V: PotentialSpec) -> float:
    """``||[X, Y] psi|| / (||X Y psi|| + ||Y X psi||)`` for the outermost bracket.

    Measures how completely a commutator that should vanish cancels, relative to
    the size of the two terms that cancel; absolute norms are dominated by
    round-off amplified by high-order spectral derivatives.
    """
    if isinstance(word, str):
        word = CommutatorWord.parse(word)
    Vx = np.asarray(V.V(psi.grid.x), dtype=float)
    X = _letter_op(word.letters[0], psi.grid, psi.hbar, Vx)
    Y = _word_op(word.letters[1:], psi.grid, psi.hbar, Vx)
    xy = X(Y(psi.values))
    yx = Y(X(psi.values))
    scale = np.linalg.norm(xy) + np.linalg.norm(yx)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(xy - yx) / scale)


CLOSED_FORM_WORDS = ("AB", "BA", "BBA", "AAB")


def closed_form(word: CommutatorWord | str, psi: WaveFunction, V: PotentialSpec) -> np.ndarray:
    key = "".join(word.letters) if isinstance(word, CommutatorWord) else "".join(CommutatorWord.parse(word).letters)
    if key not in CLOSED_FORM_WORDS:
        raise ValueError(f"no closed form for {key!r}; supported: {', '.join(CLOSED_FORM_WORDS)}")
    x, hbar, f = psi.grid.x, psi.hbar, psi.values
    dV = V.dV(x)
    if key == "BBA":
        return -(dV**2) * f / hbar
    df = spectral_derivative_values(f, psi.grid, 1)
    if key in ("AB", "BA"):
        ba = 0.5 * V.d2V(x) * f + dV * df
        return ba if key == "BA" else -ba
    d2f = spectral_derivative_values(f, psi.grid, 2)
    return hbar * (0.25 * V.d4V(x) * f + V.d3V(x) * df + V.d2V(x) * d2f)


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a - b) / nb)


def resolved_wkb_state(hbar: float, points_per_hbar: int = 8) -> WaveFunction:
    """Test-problem WKB state on [-2, 2] with ``dx <= hbar / points_per_hbar``."""
    m = int(np.ceil(np.log2(4.0 * points_per_hbar / hbar)))
    return wkb_state(paper_wkb_data(hbar), build_grid(4.0, m, -2.0))


@dataclass
class ScalingFit:
    word: str
    hbars: np.ndarray
    norms: np.ndarray
    exponent: float


def scaling_probe(
    word: CommutatorWord | str,
    hbars: Sequence[float],
    V: PotentialSpec,
    family: Callable[[float], WaveFunction] = resolved_wkb_state,
) -> ScalingFit:
    """Least-squares slope of ``log ||word psi_hbar||`` against ``log hbar``."""
    if isinstance(word, str):
        word = CommutatorWord.parse(word)
    h = np.asarray(hbars, dtype=float)
    if h.size < 4 or np.any(h <= 0) or np.unique(h).size != h.size:
        raise ValueError("scaling probe needs at least four distinct positive hbar values")
    norms = []
    for hb in h:
        psi = family(float(hb))
        out = apply_commutator(word, psi, V)
        norms.append(np.sqrt(np.sum(np.abs(out) ** 2) * psi.grid.dx))
    norms = np.asarray(norms)
    if np.any(norms <= 0):
        raise ValueError("commutator vanished on part of the sweep; exponent undefined")
    slope = np.polyfit(np.log(h), np.log(norms), 1)[0]
    return ScalingFit(str(word), h, norms, float(slope))
