from __future__ import annotations

import numpy as np
import pytest

from semicl.observables import (
    current,
    density,
    expectation,
    fourier_expectation,
    fourier_operator_element,
    fourier_operator_matrix,
    hbar_sobolev_norm,
)
from semicl.propagator import EvolutionSpec, evolve
from semicl.spectral import WaveFunction, build_grid, forward_dft, spatial_derivative
from semicl.splitting import builtin_scheme
from semicl.states import gaussian_packet, paper_test_problem, paper_wkb_data, wkb_state

from conftest import plane_wave, random_state


def test_density_constant_state():
    g = build_grid(4.0, 6, -2.0)
    psi = WaveFunction(g, 0.1, np.ones(g.M)).normalized()
    np.testing.assert_allclose(density(psi).values, 0.25, atol=1e-15)
    assert density(psi).integral() == pytest.approx(1.0, abs=1e-12)


def test_current_real_and_plane_wave():
    g = build_grid(4.0, 7, -2.0)
    real = WaveFunction(g, 0.1, np.exp(-25 * g.x**2)).normalized()
    assert np.abs(current(real).values).max() < 1e-13
    psi, mu = plane_wave(g, 5, hbar=0.02)
    np.testing.assert_allclose(current(psi).values, 0.02 * mu / g.L, atol=1e-13)


def test_wkb_current_semiclassical_limit():
    # J -> A0^2 S0' / Z + O(hbar)
    hbar = 1e-3
    g = build_grid(4.0, 15, -2.0)
    data = paper_wkb_data(hbar)
    psi = wkb_state(data, g)
    x = g.x
    Z = np.sum(data.A0(x) ** 2) * g.dx
    oracle = data.A0(x) ** 2 * data.dS0(x) / Z
    assert np.abs(current(psi).values - oracle).max() < 1e-4


def test_sobolev_norm():
    g = build_grid(4.0, 8, -2.0)
    psi, mu = plane_wave(g, 3, hbar=0.05)
    assert hbar_sobolev_norm(psi, 0).value == pytest.approx(1.0, abs=1e-12)
    for q in range(5):
        expected = sum(0.05**a * mu ** (2 * a) for a in range(q + 1))
        assert hbar_sobolev_norm(psi, q).value ** 2 == pytest.approx(expected, rel=1e-11)
    with pytest.raises(ValueError):
        hbar_sobolev_norm(psi, 5)


def test_sobolev_norm_uniform_in_hbar_for_wkb():
    g = build_grid(4.0, 14, -2.0)
    hs = (1e-2, 5e-3, 2.5e-3)
    scaled = [hbar_sobolev_norm(wkb_state(paper_wkb_data(h), g), 2, weight_power=2).value for h in hs]
    assert max(scaled) / min(scaled) < 1.1
    # the hbar^a weighting grows like hbar^(-q/2)
    plain = [hbar_sobolev_norm(wkb_state(paper_wkb_data(h), g), 2).value for h in hs]
    assert np.polyfit(np.log(hs), np.log(plain), 1)[0] == pytest.approx(-1.0, abs=0.1)


def test_fourier_elements(rng):
    g = build_grid(4.0, 4, -2.0)
    assert fourier_operator_element("density", 3, 5, 5, g, 0.1) == pytest.approx(1 / 16)
    with pytest.raises(IndexError):
        fourier_operator_element("density", 16, 0, 0, g, 0.1)
    with pytest.raises(ValueError):
        fourier_operator_element("spin", 0, 0, 0, g, 0.1)
    M = fourier_operator_matrix("current", 2, g, 0.1)
    assert M[3, 7] == pytest.approx(fourier_operator_element("current", 2, 7, 3, g, 0.1))
    np.testing.assert_allclose(M, M.conj().T, atol=1e-15)


def test_fourier_quadratic_forms_brute_force(rng):
    g = build_grid(4.0, 4, -2.0)
    psi = random_state(rng, g, hbar=0.07)
    psi_hat = forward_dft(psi.values)
    n = density(psi).values
    J = current(psi).values
    for j in range(g.M):
        for kind, target in (("density", n[j]), ("current", J[j])):
            O = fourier_operator_matrix(kind, j, g, psi.hbar)
            # quadratic form built element by element from the dense matrix
            brute = np.vdot(psi_hat, O @ psi_hat)
            assert abs(brute.imag) < 1e-12
            assert brute.real == pytest.approx(target, abs=1e-11)
            assert fourier_expectation(kind, j, psi) == pytest.approx(target, abs=1e-11)


def test_dense_limit():
    with pytest.raises(ValueError):
        fourier_operator_matrix("density", 0, build_grid(1.0, 7), 0.1)


def test_expectation_examples():
    g = build_grid(4.0, 9, -2.0)
    psi = gaussian_packet(0.0, 0.2, 0.0, 0.01, g)
    assert abs(expectation(psi, position=lambda x: x)) < g.dx
    assert expectation(psi, position=np.ones_like) == pytest.approx(1.0, abs=1e-12)
    pw, mu = plane_wave(g, 9, hbar=0.03)
    assert expectation(pw, symbol=lambda k: 0.03 * k**2 / 2) == pytest.approx(0.03 * mu**2 / 2, rel=1e-12)
    with pytest.raises(ValueError):
        expectation(pw, symbol=lambda k: 1j * k)
    with pytest.raises(ValueError):
        expectation(pw)


def test_mass_conservation_along_evolution():
    g = build_grid(4.0, 11, -2.0)
    psi, V = paper_test_problem(0.01, g)
    masses = []
    evolve(psi, EvolutionSpec(builtin_scheme("yoshida4"), 0.01, 60, V), observer=lambda n, p: masses.append(density(p).integral()), every=1)
    assert max(abs(m - 1.0) for m in masses) < 1e-11


def test_continuity_residual_decreases_with_dt():
    g = build_grid(4.0, 11, -2.0)
    psi, V = paper_test_problem(0.02, g)
    t_mid = 0.2
    residuals, dts = [], [0.01, 0.005, 0.0025]
    for dt in dts:
        spec = lambda n: EvolutionSpec(builtin_scheme("strang_kvk"), dt, n, V)
        n_mid = round(t_mid / dt)
        before = evolve(psi, spec(n_mid - 1)).psi
        mid = evolve(before, spec(1)).psi
        after = evolve(mid, spec(1)).psi
        dn_dt = (density(after).values - density(before).values) / (2 * dt)
        dJ_dx = spatial_derivative(mid.with_values(current(mid).values.astype(complex)), 1).real
        residuals.append(np.abs(dn_dt + dJ_dx).max())
    slope = np.polyfit(np.log(dts), np.log(residuals), 1)[0]
    assert slope >= 1.0
