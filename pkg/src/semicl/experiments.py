"""Experiment drivers shared by the CLI and the acceptance suite.

Reference solutions use the policy ``dx_ref <= min(hbar/8, dx/4)``,
``dt_ref <= min(hbar/10, dt/100)`` with the fourth-order scheme, and are cached
on disk (``$SEMICL_CACHE_DIR``, default ``~/.cache/semicl``) keyed by a hash of
problem, hbar, final time and resolution.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuit import QubitState, diagonal_cost, qft_gate_count, shot_error_sweep, trotter_circuit_run
from .commutators import CLOSED_FORM_WORDS, CommutatorWord, apply_commutator, closed_form, commutator_residual, relative_l2, scaling_probe
from .config import ProblemConfig, RunConfig
from .io import read_dump, rows_to_csv, write_dump
from .observables import current, density
from .propagator import EvolutionSpec, evolve, step, step_operators
from .spectral import WaveFunction
from .splitting import KINETIC, builtin_scheme, scheme_from_config
from .states import boundary_mass_fraction


class ResolutionError(ValueError):
    """Requested reference or coarse resolution cannot resolve hbar."""


def cache_dir() -> Path:
    env = os.environ.get("SEMICL_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "semicl"


def write_manifest(outdir: Path, command: str, params: dict, outputs: Sequence[str]) -> Path:
    manifest = {
        "command": command,
        "code_version": __version__,
        "parameters": params,
        "outputs": sorted(outputs),
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _steps_for(t: float, dt: float) -> int:
    ratio = t / dt
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"final time {t} is not a positive integer multiple of dt={dt}")
    return n


# -- simulate -----------------------------------------------------------------


def simulate(cfg: RunConfig, outdir: str | Path | None = None) -> dict:
    """Run the configured evolution; writes ``observables.csv`` (t,x,n,J), optional dumps and a manifest."""
    out = Path(outdir if outdir is not None else cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    disc = cfg.discretization
    grid = cfg.problem.grid(disc.m)
    psi0 = cfg.problem.initial_state(grid)
    spec = EvolutionSpec(cfg.scheme_spec(), disc.dt, disc.steps, cfg.problem.potential_spec())
    rows: list[tuple] = []
    written: list[str] = []

    def observer(n: int, psi: WaveFunction):
        t = n * disc.dt
        if "csv" in cfg.outputs.formats:
            n_vals = density(psi).values
            j_vals = current(psi).values
            rows.extend(zip([t] * grid.M, grid.x, n_vals, j_vals))
        if "dump" in cfg.outputs.formats:
            name = f"psi_{n:08d}.scwf"
            write_dump(out / name, psi, t)
            written.append(name)

    result = evolve(psi0, spec, observer=observer, every=cfg.outputs.cadence)
    if "csv" in cfg.outputs.formats:
        (out / "observables.csv").write_text(rows_to_csv(("t", "x", "n", "J"), rows))
        written.append("observables.csv")
    params = cfg.to_dict()
    write_manifest(out, "simulate", params, written + ["manifest.json"])
    return {
        "steps": result.steps_done,
        "norm": result.psi.norm(),
        "boundary_mass": boundary_mass_fraction(result.psi.values),
        "outputs": written,
    }


# -- references ---------------------------------------------------------------


@dataclass(frozen=True)
class ReferencePolicy:
    points_per_hbar: float = 8.0
    dx_refine: float = 4.0
    dt_per_hbar: float = 10.0
    dt_refine: float = 100.0
    scheme: str = "yoshida4"
    max_m: int = 20


def reference_resolution(problem: ProblemConfig, m_coarse: int, dt_coarse: float, t: float, policy: ReferencePolicy = ReferencePolicy()) -> tuple[int, int]:
    """``(m_ref, steps_ref)`` for a reference on the same domain as the coarse grid."""
    dx_target = min(problem.hbar / policy.points_per_hbar, problem.L / 2**m_coarse / policy.dx_refine)
    m_ref = max(m_coarse, math.ceil(math.log2(problem.L / dx_target) - 1e-9))
    if m_ref > policy.max_m:
        raise ResolutionError(
            f"reference needs m={m_ref} > {policy.max_m}; raise hbar, lower the coarse m or increase max_m"
        )
    dt_target = min(problem.hbar / policy.dt_per_hbar, dt_coarse / policy.dt_refine)
    steps = max(1, math.ceil(t / dt_target - 1e-9)) if t > 0 else 0
    return m_ref, steps


def _reference_key(problem: ProblemConfig, t: float, m_ref: int, steps: int, scheme: str) -> str:
    payload = json.dumps(
        {"problem": asdict(problem), "t": repr(float(t)), "m": m_ref, "steps": steps, "scheme": scheme, "v": 1},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def reference_solution(
    problem: ProblemConfig,
    m_coarse: int,
    dt_coarse: float,
    t: float,
    policy: ReferencePolicy = ReferencePolicy(),
    use_cache: bool = True,
) -> WaveFunction:
    m_ref, steps = reference_resolution(problem, m_coarse, dt_coarse, t, policy)
    key = _reference_key(problem, t, m_ref, steps, policy.scheme)
    path = cache_dir() / f"ref_{key}.scwf"
    if use_cache and path.exists():
        return read_dump(path)[1]
    grid = problem.grid(m_ref)
    psi0 = problem.initial_state(grid)
    dt = t / steps if steps else 1.0
    spec = EvolutionSpec(builtin_scheme(policy.scheme), dt, steps, problem.potential_spec())
    psi = evolve(psi0, spec).psi
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        write_dump(tmp, psi, t)
        tmp.replace(path)
    return psi


def restrict(psi_fine: WaveFunction, m: int) -> np.ndarray:
    """Fine-grid samples at the nodes of the coarser grid with ``2**m`` points."""
    stride = 1 << (psi_fine.grid.m - m)
    if stride < 1:
        raise ValueError("target grid is finer than the source")
    return psi_fine.values[::stride]


@dataclass
class ErrorTriple:
    wavefunction: float
    density: float
    current: float


def compare_to_reference(psi: WaveFunction, ref: WaveFunction) -> ErrorTriple:
    m = psi.grid.m
    dx = psi.grid.dx
    wf = float(np.sqrt(np.sum(np.abs(psi.values - restrict(ref, m)) ** 2) * dx))
    n_err = float(np.max(np.abs(density(psi).values - density(ref).values[:: 1 << (ref.grid.m - m)])))
    j_err = float(np.max(np.abs(current(psi).values - current(ref).values[:: 1 << (ref.grid.m - m)])))
    return ErrorTriple(wf, n_err, j_err)


def _run(problem: ProblemConfig, m: int, scheme, dt: float, t: float) -> WaveFunction:
    grid = problem.grid(m)
    spec = EvolutionSpec(scheme_from_config(scheme), dt, _steps_for(t, dt), problem.potential_spec())
    return evolve(problem.initial_state(grid), spec).psi


def _fit(dts: Sequence[float], errs: Sequence[float]) -> float:
    if len(dts) < 2:
        return float("nan")
    return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


# -- convergence --------------------------------------------------------------


@dataclass
class ConvergenceReport:
    rows: list[tuple[str, float, int, float, float, float]]
    fits: dict[str, ErrorTriple] = field(default_factory=dict)

    def rows_csv(self) -> str:
        return rows_to_csv(("scheme", "dt", "steps", "wf_error", "density_error", "current_error"), self.rows)

    def fits_csv(self) -> str:
        return rows_to_csv(
            ("scheme", "order_wf", "order_density", "order_current"),
            [(k, v.wavefunction, v.density, v.current) for k, v in self.fits.items()],
        )


def convergence(
    problem: ProblemConfig,
    m: int,
    schemes: Sequence,
    dts: Sequence[float],
    t: float,
    policy: ReferencePolicy = ReferencePolicy(),
    min_points_per_hbar: float = 2.0,
) -> ConvergenceReport:
    """Errors at ``t`` against a cached reference for every (scheme, dt) pair, plus log-log order fits."""
    if not dts:
        raise ValueError("need at least one dt")
    if problem.L / 2**m > problem.hbar / min_points_per_hbar:
        raise ResolutionError(
            f"coarse grid dx={problem.L / 2**m:.3g} does not resolve hbar={problem.hbar:g}; "
            f"use m >= {math.ceil(math.log2(problem.L * min_points_per_hbar / problem.hbar))}"
        )
    for dt in dts:
        _steps_for(t, dt)
    ref = reference_solution(problem, m, min(dts), t, policy)
    report = ConvergenceReport([])
    for scheme in schemes:
        name = scheme if isinstance(scheme, str) else scheme.get("name", "custom")
        errs = []
        for dt in dts:
            e = compare_to_reference(_run(problem, m, scheme, dt, t), ref)
            errs.append(e)
            report.rows.append((name, float(dt), _steps_for(t, dt), e.wavefunction, e.density, e.current))
        report.fits[name] = ErrorTriple(
            _fit(dts, [e.wavefunction for e in errs]),
            _fit(dts, [e.density for e in errs]),
            _fit(dts, [e.current for e in errs]),
        )
    return report


# -- observable robustness ----------------------------------------------------


def resolving_m(L: float, hbar: float, points_per_hbar: float = 4.0) -> int:
    return math.ceil(math.log2(L * points_per_hbar / hbar) - 1e-9)


@dataclass
class RobustnessReport:
    rows: list[tuple[str, float, int, float, float, float]]
    degenerate: bool
    density_growth: float
    current_growth: float
    wf_error_smallest: float
    passed: bool

    def rows_csv(self) -> str:
        return rows_to_csv(("scheme", "hbar", "m", "wf_error", "density_error", "current_error"), self.rows)


def observable_robustness(
    base: ProblemConfig,
    hbars: Sequence[float],
    dt: float,
    t: float,
    scheme="strang_kvk",
    points_per_hbar: float = 4.0,
    growth_limit: float = 2.0,
    wf_floor: float = 0.1,
    extra_schemes: Sequence = (),
    policy: ReferencePolicy = ReferencePolicy(),
) -> RobustnessReport:
    """Per-hbar errors at fixed ``dt``; passes when observable errors grow by at most ``growth_limit``
    relative to the largest hbar while the wave-function error at the smallest hbar exceeds ``wf_floor``."""
    hbars = [float(h) for h in hbars]
    if not hbars:
        raise ValueError("need at least one hbar")
    if any(b >= a for a, b in zip(hbars, hbars[1:])):
        raise ValueError("hbar values must be sorted strictly descending")
    rows = []
    main = []
    for hbar in hbars:
        problem = ProblemConfig(base.state, base.potential, base.domain, hbar)
        m = resolving_m(problem.L, hbar, points_per_hbar)
        ref = reference_solution(problem, m, dt, t, policy)
        for sch in (scheme, *extra_schemes):
            e = compare_to_reference(_run(problem, m, sch, dt, t), ref)
            name = sch if isinstance(sch, str) else sch.get("name", "custom")
            rows.append((name, hbar, m, e.wavefunction, e.density, e.current))
            if sch is scheme:
                main.append(e)
    degenerate = len(hbars) == 1
    dg = max(e.density for e in main) / main[0].density
    cg = max(e.current for e in main) / main[0].current
    wf_small = main[-1].wavefunction
    passed = degenerate or (dg <= growth_limit and cg <= growth_limit and wf_small > wf_floor)
    return RobustnessReport(rows, degenerate, dg, cg, wf_small, passed)


# -- circuit verification -----------------------------------------------------


@dataclass
class CircuitReport:
    m: int
    steps: int
    max_divergence: float
    merged_divergence: float
    ledger_rows: list[tuple[str, float]]
    expected: dict
    ledger_ok: bool
    shots: list[int]
    shot_errors: list[float]
    shot_slope: float

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_divergence < tol and self.merged_divergence < tol and self.ledger_ok


def circuit_verify(
    cfg: RunConfig,
    cost_model: str = "full",
    shots: Sequence[int] = (400, 4000, 40000),
    repeats: int = 8,
    max_m: int = 12,
) -> CircuitReport:
    """Spectral vs gate-level evolution step by step, ledger check on a merged run, and a shot sweep."""
    disc = cfg.discretization
    if disc.m > max_m:
        raise ResolutionError(f"circuit verification is limited to m <= {max_m}")
    grid = cfg.problem.grid(disc.m)
    psi = cfg.problem.initial_state(grid)
    hbar = cfg.problem.hbar
    scheme = cfg.scheme_spec()
    V = cfg.problem.potential_spec()
    one = EvolutionSpec(scheme, disc.dt, 1, V)
    scale = np.sqrt(grid.dx)

    state = QubitState.from_wavefunction(psi)
    ref = psi
    worst = 0.0
    for _ in range(disc.steps):
        ref = step(ref, one)
        trotter_circuit_run(state, one, grid, hbar, cost_model)
        worst = max(worst, float(np.linalg.norm(state.amplitudes - ref.values * scale)))

    full = EvolutionSpec(scheme, disc.dt, disc.steps, V)
    merged = QubitState.from_wavefunction(psi)
    trotter_circuit_run(merged, full, grid, hbar, cost_model, merge=True)
    merged_div = float(np.linalg.norm(merged.amplitudes - ref.values * scale))

    ops = step_operators(full, disc.steps, merge=True)
    n_kin = sum(1 for k, _ in ops if k == KINETIC)
    J = diagonal_cost(cost_model, disc.m)
    qg = qft_gate_count(disc.m)
    expected = {
        "diagonals": len(ops),
        "qft": 2 * n_kin,
        "qft_gates": 2 * n_kin * qg,
        "diagonal_gates": len(ops) * J,
    }
    led = merged.ledger
    ledger_ok = (
        led.diagonals == expected["diagonals"]
        and led.qft == expected["qft"]
        and led.one_qubit + led.two_qubit == expected["qft_gates"]
        and led.diagonal_gates == expected["diagonal_gates"]
    )
    sweep = shot_error_sweep(merged, tuple(shots), seed=cfg.seed, repeats=repeats) if shots else None
    return CircuitReport(
        disc.m,
        disc.steps,
        worst,
        merged_div,
        merged.ledger.as_rows(),
        expected,
        ledger_ok,
        list(shots),
        sweep.errors if sweep else [],
        sweep.slope if sweep else float("nan"),
    )


# -- commutators --------------------------------------------------------------


@dataclass
class CommutatorReport:
    closed_form_errors: dict[str, float]
    exponents: dict[str, float]
    norms: dict[str, float]
    residuals: dict[str, float]


def commutator_check(
    words: Sequence[str],
    problem: ProblemConfig,
    m: int = 12,
    hbars: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3),
) -> CommutatorReport:
    V = problem.potential_spec()
    psi = problem.initial_state(problem.grid(m))
    errs, exps, norms, resid = {}, {}, {}, {}
    for text in words:
        w = CommutatorWord.parse(text)
        key = "".join(w.letters)
        out = apply_commutator(w, psi, V)
        norms[str(w)] = float(np.sqrt(np.sum(np.abs(out) ** 2) * psi.grid.dx))
        resid[str(w)] = commutator_residual(w, psi, V)
        if key in CLOSED_FORM_WORDS:
            errs[str(w)] = relative_l2(out, closed_form(w, psi, V))
        # identically vanishing words (e.g. [B,[B,[B,A]]] for quadratic V) have no exponent
        if len(hbars) >= 4 and resid[str(w)] > 1e-6:
            exps[str(w)] = scaling_probe(w, hbars, V).exponent
    return CommutatorReport(errs, exps, norms, resid)

