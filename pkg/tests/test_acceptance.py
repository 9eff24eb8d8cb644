"""Acceptance criteria, one test per criterion, each recording a PASS/FAIL line."""

from __future__ import annotations

import json
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from semicl.circuit import qft_gate_count
from semicl.cli import DEFAULT_CONFIG, main
from semicl.commutators import apply_commutator, closed_form, commutator_residual, relative_l2, scaling_probe
from semicl.config import ProblemConfig, RunConfig
from semicl.estimator import OBSERVABLE, EstimateRequest, gate_count, measurement_overhead, meshing, qubit_count
from semicl.experiments import circuit_verify, convergence, observable_robustness
from semicl.io import decode_dump, encode_dump, read_dump
from semicl.propagator import EvolutionSpec, apply_kinetic_phase, evolve
from semicl.spectral import (
    WaveFunction,
    build_grid,
    forward_dft,
    frequency_table,
    inverse_dft,
    spatial_derivative,
)
from semicl.splitting import builtin_scheme
from semicl.states import (
    free_gaussian_exact,
    gaussian_packet,
    harmonic_potential,
    paper_test_problem,
    paper_wkb_data,
    wkb_state,
    zero_potential,
)

from conftest import plane_wave, record

PAPER = ProblemConfig(hbar=0.01)


def _l2(a, dx):
    return float(np.sqrt(np.sum(np.abs(a) ** 2) * dx))


def test_01_spectral_correctness(rng):
    t0 = time.perf_counter()
    worst_rt = worst_parseval = 0.0
    for m in range(1, 17):
        v = rng.standard_normal(1 << m) + 1j * rng.standard_normal(1 << m)
        scale = np.abs(v).max()
        worst_rt = max(worst_rt, np.abs(inverse_dft(forward_dft(v)) - v).max() / scale)
        worst_rt = max(worst_rt, np.abs(forward_dft(inverse_dft(v)) - v).max() / scale)
        n2 = np.vdot(v, v).real
        worst_parseval = max(worst_parseval, abs(np.vdot(forward_dft(v), forward_dft(v)).real - n2) / n2)
    worst_pw = 0.0
    g = build_grid(4.0, 10, -2.0)
    mu_max = np.abs(frequency_table(g)).max()
    for k in (-511, -37, -1, 0, 1, 12, 200, 511):
        psi, mu = plane_wave(g, k, hbar=0.02)
        for order in (1, 2, 3):
            ref = (1j * mu) ** order * psi.values
            # round-off in the empty modes is amplified by mu_max^order, so scale by the operator norm
            worst_pw = max(worst_pw, np.abs(spatial_derivative(psi, order) - ref).max() / mu_max**order)
        kin = apply_kinetic_phase(psi, 0.7).values
        worst_pw = max(worst_pw, np.abs(kin - np.exp(-0.35j * 0.02 * mu**2) * psi.values).max())
    elapsed = time.perf_counter() - t0
    ok = worst_rt < 1e-13 and worst_parseval < 1e-13 and worst_pw < 1e-12 and elapsed < 10
    record(1, "spectral correctness", ok,
           f"round trip {worst_rt:.1e}, Parseval {worst_parseval:.1e}, plane waves {worst_pw:.1e}, {elapsed:.1f}s")
    assert ok


def test_02_unitarity():
    t0 = time.perf_counter()
    g = build_grid(4.0, 12, -2.0)
    psi0, V = paper_test_problem(0.01, g)
    n0 = psi0.norm()
    drift = [0.0]

    def watch(n, psi):
        drift[0] = max(drift[0], abs(psi.norm() - n0))

    evolve(psi0, EvolutionSpec(builtin_scheme("strang_kvk"), 0.01, 1000, V), observer=watch, every=1)
    elapsed = time.perf_counter() - t0
    ok = drift[0] < 1e-12 and elapsed < 30
    record(2, "unitarity", ok, f"max norm drift {drift[0]:.1e} over 1000 Strang steps, {elapsed:.1f}s")
    assert ok


def test_03_free_gaussian_oracle():
    g = build_grid(8.0, 12, -4.0)
    hbar, t, c, gamma, k0 = 0.01, 1.0, -0.5, 0.1, -0.4
    psi0 = gaussian_packet(c, gamma, k0, hbar, g)
    out = evolve(psi0, EvolutionSpec(builtin_scheme("strang_kvk"), 0.1, 10, zero_potential())).psi
    raw0 = free_gaussian_exact(c, gamma, k0, hbar, 0.0, g.x)
    scale = np.vdot(raw0, psi0.values) / np.vdot(raw0, raw0)
    exact = scale * free_gaussian_exact(c, gamma, k0, hbar, t, g.x)
    err = _l2(out.values - exact, g.dx)
    ok = err < 1e-8
    record(3, "free Gaussian oracle", ok, f"l2 error {err:.1e} at t=1, m=12")
    assert ok


def test_04_temporal_order():
    t0 = time.perf_counter()
    rep = convergence(PAPER, 11, ["lie", "strang_kvk", "yoshida4"], [0.02, 0.01, 0.005, 0.0025], 0.5)
    elapsed = time.perf_counter() - t0
    fits = {name: f.wavefunction for name, f in rep.fits.items()}
    target = {"lie": 1.0, "strang_kvk": 2.0, "yoshida4": 4.0}
    ok = all(abs(fits[k] - v) <= 0.3 for k, v in target.items()) and elapsed < 600
    detail = ", ".join(f"{k} {fits[k]:.3f}" for k in target)
    record(4, "temporal order recovery", ok, f"{detail} (dx = hbar/5.12, T=0.5), {elapsed:.0f}s")
    assert ok


def test_05_observable_robustness():
    t0 = time.perf_counter()
    rep = observable_robustness(PAPER, [4e-3, 2e-3, 1e-3], 0.05, 5.0)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and not rep.degenerate and elapsed < 1200
    record(5, "observable hbar-robustness", ok,
           f"density growth {rep.density_growth:.2f}, current growth {rep.current_growth:.2f}, "
           f"wf error at hbar=1e-3 {rep.wf_error_smallest:.3f}, {elapsed:.0f}s")
    assert ok


def test_06_commutator_closed_forms():
    t0 = time.perf_counter()
    V = harmonic_potential()
    psi = wkb_state(paper_wkb_data(0.01), build_grid(4.0, 8, -2.0))
    errs = {w: relative_l2(apply_commutator(w, psi, V), closed_form(w, psi, V)) for w in ("AB", "BBA", "AAB")}
    resid = {w: commutator_residual(w, psi, V) for w in ("BBBA", "AAAB")}
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) < 1e-8 and max(resid.values()) < 1e-10 and elapsed < 30
    record(6, "commutator closed forms", ok,
           ", ".join(f"{w} {e:.1e}" for w, e in errs.items())
           + "; vanishing (relative cancellation) " + ", ".join(f"{w} {r:.1e}" for w, r in resid.items()))
    assert ok


def test_07_hbar_scaling():
    hbars = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    V = harmonic_potential()
    exps = {w: scaling_probe(w, hbars, V).exponent for w in ("AB", "BBA", "AAB")}
    ok = all(abs(e + 1.0) <= 0.2 for e in exps.values())
    record(7, "hbar-scaling probes", ok, ", ".join(f"{w} {e:.3f}" for w, e in exps.items()))
    assert ok


def test_08_circuit_equivalence():
    cfg = RunConfig.from_dict(DEFAULT_CONFIG)
    assert (cfg.discretization.m, cfg.discretization.steps, cfg.discretization.dt) == (10, 72, 0.05)
    rep = circuit_verify(cfg, shots=())
    m, n = 10, 72
    led = dict(rep.ledger_rows)
    closed = (
        qft_gate_count(m) == m * (m + 1) // 2 + m // 2
        and led["diagonals"] == 2 * n + 1
        and led["diagonal_gates"] == (2 * n + 1) * (2 ** (m + 1) - 3)
        and led["qft"] == 2 * (n + 1)
        and led["one_qubit"] + led["two_qubit"] == 2 * (n + 1) * qft_gate_count(m)
    )
    ok = rep.max_divergence < 1e-12 and rep.merged_divergence < 1e-12 and rep.ledger_ok and closed
    record(8, "circuit equivalence", ok,
           f"per-step divergence {rep.max_divergence:.1e}, merged {rep.merged_divergence:.1e}, "
           f"{int(led['diagonals'])} diagonal blocks, {int(led['qft'])} QFTs")
    assert ok


def test_09_shot_statistics():
    cfg = RunConfig.from_dict(DEFAULT_CONFIG)
    a = circuit_verify(cfg, shots=(400, 4000, 40000))
    b = circuit_verify(cfg, shots=(400, 4000, 40000))
    ok = abs(a.shot_slope + 0.5) <= 0.15 and a.shot_errors == b.shot_errors
    record(9, "shot statistics", ok,
           f"slope {a.shot_slope:.3f}, errors " + ", ".join(f"{e:.2e}" for e in a.shot_errors) + ", reproducible")
    assert ok


def test_10_estimator_fidelity():
    t0 = time.perf_counter()
    rel = []

    def close(a, b):
        rel.append(abs(a - b) / abs(b))

    # first order: dt = hbar eps / t, dx = hbar eps dt / t, m from L t^2 / (eps hbar)^2
    r = EstimateRequest(eps=0.1, hbar=0.1, p=1)
    dt, dx, _ = meshing(r)
    close(dt, 0.01)
    close(dx, 1e-4)
    m1 = math.ceil(math.log2(1.0 / (0.1 * 0.1) ** 2))
    ok_m = qubit_count(r) == m1
    close(gate_count(r)[0], 2 * m1 / (0.1 * 0.1))
    # second order: dt = sqrt(hbar eps / t), dx from L^{3/4} t^{3/2} / (eps hbar)^{3/2}
    r = EstimateRequest(eps=2e-3, hbar=5e-3, p=2, L=4.0, t=3.0)
    dt, dx, _ = meshing(r)
    close(dt, math.sqrt(2e-3 * 5e-3 / (2.0 * 3.0)))
    close(4.0 / dx, 4.0**0.75 * 3.0**1.5 / (2e-3 * 5e-3) ** 1.5)
    close(gate_count(r, m=15)[0], 2 * 15 * 4.0**0.25 * 3.0**1.5 / (2e-3 * 5e-3) ** 0.5)
    # observable: dt = sqrt(eps / t), 2 J L^{1/4} t^{3/2} / sqrt(eps)
    r = EstimateRequest(eps=1e-2, hbar=1e-3, target=OBSERVABLE, L=4.0, t=3.0)
    close(meshing(r)[0], math.sqrt(1e-2 / (2.0 * 3.0)))
    close(gate_count(r, m=20)[0], 2 * 20 * 4.0**0.25 * 3.0**1.5 / 1e-2**0.5)
    # d dimensions: qubits d log(L^{3d/4l} t^{3/2l} / (eps^{3/2l} hbar)), gates 2 J L^{d/4} t^{3/2} / sqrt(eps)
    r = EstimateRequest(eps=1e-2, hbar=1e-2, target=OBSERVABLE, L=10.0, t=100.0, d=3, ell=2)
    arg = 10.0 ** (9 / 8) * 100.0 ** 0.75 / (1e-2**0.75 * 1e-2)
    ok_m = ok_m and qubit_count(r) == 3 * math.ceil(math.log2(arg))
    close(gate_count(r, m=30)[0], 2 * 30 * 10.0**0.75 * 100.0**1.5 / 0.1)
    # measurement: 2 J sqrt(M) L^{1/4} t^{3/2} / eps^{3/2} ln(1/delta)
    r = EstimateRequest(eps=1e-2, hbar=1e-3, target=OBSERVABLE, L=4.0, t=3.0, M_obs=9, delta=0.05)
    close(measurement_overhead(r, m=20), 2 * 20 * 3 * 4.0**0.25 * 3.0**1.5 / 1e-2**1.5 * math.log(20))
    # exponent recovery by finite differences at fixed m
    slopes = []
    for p in (1, 2, 3, 4):
        a, b = (gate_count(EstimateRequest(eps=e, hbar=1e-2, p=p), m=16)[0] for e in (1e-3, 1e-4))
        slopes.append(abs(math.log(b / a) / math.log(0.1) + 1 / p))
    a, b = (gate_count(EstimateRequest(eps=e, hbar=1e-3, target=OBSERVABLE), m=16)[0] for e in (1e-3, 1e-4))
    slopes.append(abs(math.log(b / a) / math.log(0.1) + 0.5))
    base = EstimateRequest(eps=1e-2, hbar=1e-3, target=OBSERVABLE)
    ms = [qubit_count(replace(base, d=d)) for d in range(1, 6)]
    linear = ms == [d * ms[0] for d in range(1, 6)]
    elapsed = time.perf_counter() - t0
    ok = max(rel) < 1e-12 and ok_m and max(slopes) < 1e-9 and linear and elapsed < 1
    record(10, "estimator fidelity", ok,
           f"max rel err {max(rel):.1e} over {len(rel)} instances, exponent error {max(slopes):.1e}, "
           f"qubits linear in d {linear}, {elapsed * 1e3:.0f}ms")
    assert ok


def test_11_determinism_and_formats(tmp_path):
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    cfg["outputs"] = {"cadence": 24, "formats": ["csv", "dump"]}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["simulate", "--config", str(path), "--out", str(d)]) for d in dirs]
    files = sorted(p.name for p in dirs[0].iterdir() if p.name != "manifest.json")
    same = all((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in files)
    lossless = True
    for f in files:
        if f.endswith(".scwf"):
            blob = (dirs[0] / f).read_bytes()
            header, psi = decode_dump(blob)
            lossless = lossless and encode_dump(psi, header.t) == blob
    _, last = read_dump(dirs[0] / "psi_00000072.scwf")
    ok = codes == [0, 0] and same and lossless and len(files) == 5 and np.isfinite(last.values).all()
    record(11, "determinism and formats", ok, f"{len(files)} files byte-identical {same}, dumps lossless {lossless}")
    assert ok
