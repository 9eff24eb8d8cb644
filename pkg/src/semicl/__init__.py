"""Split-step Fourier workbench for semiclassical Schrödinger dynamics.

Spectral propagation, a gate-level circuit emulator and closed-form quantum
resource estimates share one grid and transform convention.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .spectral import Grid1D, WaveFunction, build_grid, forward_dft, frequency_table, inverse_dft
from .splitting import SplittingScheme, builtin_scheme, validate_scheme
from .states import PotentialSpec, gaussian_packet, harmonic_potential, paper_test_problem, wkb_state
from .propagator import EvolutionSpec, evolve, step
from .estimator import EstimateRequest, estimate

__all__ = [
    "Grid1D",
    "WaveFunction",
    "build_grid",
    "forward_dft",
    "inverse_dft",
    "frequency_table",
    "SplittingScheme",
    "builtin_scheme",
    "validate_scheme",
    "PotentialSpec",
    "gaussian_packet",
    "harmonic_potential",
    "paper_test_problem",
    "wkb_state",
    "EvolutionSpec",
    "evolve",
    "step",
    "EstimateRequest",
    "estimate",
]
