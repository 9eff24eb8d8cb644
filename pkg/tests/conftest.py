from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from semicl.spectral import WaveFunction, build_grid

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, grid, hbar=0.01) -> WaveFunction:
    v = rng.normal(size=grid.M) + 1j * rng.normal(size=grid.M)
    return WaveFunction(grid, hbar, v).normalized()


def plane_wave(grid, k_index: int, hbar: float = 0.01) -> tuple[WaveFunction, float]:
    """Normalized ``exp(i mu x) / sqrt(L)`` for the signed mode ``k_index``; returns (psi, mu)."""
    mu = 2 * np.pi * k_index / grid.L
    return WaveFunction(grid, hbar, np.exp(1j * mu * grid.x) / np.sqrt(grid.L)), mu


@pytest.fixture
def test_grid():
    return build_grid(4.0, 10, -2.0)


ACCEPTANCE: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{criterion:2d}] {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
