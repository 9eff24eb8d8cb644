"""``semicl`` command-line entry point.

Exit codes: 0 success, 1 failed check or divergence, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig
from .estimator import (
    OBSERVABLE,
    SCATTERING_PRESET,
    SWEEP_AXES,
    WAVEFUNCTION,
    EstimateRequest,
    estimate,
    measurement_overhead,
    reports_to_csv,
    sweep,
)
from .experiments import (
    circuit_verify,
    commutator_check,
    convergence,
    observable_robustness,
    simulate,
    write_manifest,
)
from .io import rows_to_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_CONFIG = {
    "problem": {"state": "paper-test", "potential": "harmonic", "domain": [-2.0, 2.0], "hbar": 0.01},
    "discretization": {"m": 10, "dt": 0.05, "steps": 72},
    "scheme": "strang_kvk",
    "outputs": {"directory": "out", "cadence": 1, "formats": ["csv"]},
    "seed": 0,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _load(args) -> RunConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
    else:
        data = json.loads(json.dumps(DEFAULT_CONFIG))
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    prob = data.setdefault("problem", {})
    disc = data.setdefault("discretization", {})
    outs = data.setdefault("outputs", {})
    if getattr(args, "hbar", None) is not None:
        prob["hbar"] = args.hbar
    if getattr(args, "m", None) is not None:
        disc["m"] = args.m
    if getattr(args, "dt", None) is not None:
        disc["dt"] = args.dt
    if getattr(args, "steps", None) is not None:
        disc.pop("t", None)
        disc["steps"] = args.steps
    if getattr(args, "t", None) is not None and args.command == "simulate":
        disc.pop("steps", None)
        disc["t"] = args.t
    if getattr(args, "scheme", None) is not None:
        data["scheme"] = args.scheme
    if getattr(args, "out", None) is not None:
        outs["directory"] = args.out
    if getattr(args, "cadence", None) is not None:
        outs["cadence"] = args.cadence
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return RunConfig.from_dict(data)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.outputs.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    info = simulate(cfg, out)
    print(f"steps={info['steps']} norm={info['norm']!r} boundary_mass={info['boundary_mass']:.3e} -> {out}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _load(args)
    t = args.t if args.t is not None else cfg.discretization.t
    report = convergence(cfg.problem, cfg.discretization.m, args.schemes, args.dts, t)
    out = _outdir(cfg)
    (out / "convergence.csv").write_text(report.rows_csv())
    (out / "convergence_fit.csv").write_text(report.fits_csv())
    params = dict(cfg.to_dict(), schemes=args.schemes, dts=args.dts, t=t)
    write_manifest(out, "convergence", params, ["convergence.csv", "convergence_fit.csv", "manifest.json"])
    sys.stdout.write(report.rows_csv())
    sys.stdout.write(report.fits_csv())
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg = _load(args)
    report = observable_robustness(
        cfg.problem, args.hbars, args.dt_fixed, args.t, cfg.scheme, extra_schemes=args.extra_schemes
    )
    out = _outdir(cfg)
    (out / "robustness.csv").write_text(report.rows_csv())
    params = dict(cfg.to_dict(), hbars=args.hbars, dt=args.dt_fixed, t=args.t, extra_schemes=args.extra_schemes)
    write_manifest(out, "observable-robustness", params, ["robustness.csv", "manifest.json"])
    sys.stdout.write(report.rows_csv())
    if report.degenerate:
        print("degenerate sweep: single hbar, no growth check")
        return EXIT_OK
    verdict = "PASS" if report.passed else "FAIL"
    print(
        f"{verdict}: density growth {report.density_growth:.3f}, current growth {report.current_growth:.3f}, "
        f"wavefunction error at smallest hbar {report.wf_error_smallest:.3f}"
    )
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_circuit_verify(args) -> int:
    cfg = _load(args)
    report = circuit_verify(cfg, cost_model=args.cost_model, shots=args.shots)
    out = _outdir(cfg)
    (out / "ledger.csv").write_text(rows_to_csv(("counter", "value"), report.ledger_rows))
    shot_rows = list(zip(report.shots, report.shot_errors))
    (out / "shots.csv").write_text(rows_to_csv(("shots", "sup_error"), shot_rows))
    params = dict(cfg.to_dict(), cost_model=args.cost_model, shots=list(args.shots))
    write_manifest(out, "circuit-verify", params, ["ledger.csv", "shots.csv", "manifest.json"])
    print(f"max step divergence {report.max_divergence:.3e}, merged-run divergence {report.merged_divergence:.3e}")
    print(f"ledger {'matches' if report.ledger_ok else 'DOES NOT match'} closed forms: {report.expected}")
    print(f"shot-error slope {report.shot_slope:.3f}")
    return EXIT_OK if report.passed() else EXIT_FAIL


def cmd_commutator_check(args) -> int:
    cfg = _load(args)
    report = commutator_check(args.words, cfg.problem, cfg.discretization.m)
    for word, norm in report.norms.items():
        parts = [f"{word}: norm {norm:.6e}", f"cancellation residual {report.residuals[word]:.2e}"]
        if word in report.closed_form_errors:
            parts.append(f"closed-form rel err {report.closed_form_errors[word]:.3e}")
        if word in report.exponents:
            parts.append(f"hbar exponent {report.exponents[word]:.3f}")
        print(", ".join(parts))
    bad = [w for w, e in report.closed_form_errors.items() if not e < args.tol]
    if bad:
        print(f"closed-form mismatch for {', '.join(bad)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _parse_sweep(text: str) -> tuple[str, list[float]]:
    axis, sep, values = text.partition("=")
    axis = axis.strip()
    if not sep or axis not in SWEEP_AXES:
        raise ConfigError(f"--sweep expects axis=v1,v2,... with axis in {', '.join(SWEEP_AXES)}")
    vals = _floats(values)
    if not vals:
        raise ConfigError("--sweep needs at least one value")
    return axis, vals


def cmd_estimate(args, parser) -> int:
    axis, values = _parse_sweep(args.sweep) if args.sweep else (None, None)
    if args.hbar is None and axis != "hbar":
        parser.error("--hbar is required" + (" for --target observable" if args.target == OBSERVABLE else ""))
    if args.eps is None and axis != "eps":
        parser.error("--eps is required")
    base = dict(SCATTERING_PRESET) if args.preset == "scattering" else {}
    for name in ("L", "t", "d", "p", "ell", "cost_model"):
        value = getattr(args, name)
        if value is not None:
            base[name] = value
    req = EstimateRequest(
        eps=args.eps if args.eps is not None else values[0],
        hbar=args.hbar if args.hbar is not None else values[0],
        target=args.target,
        M_obs=args.M_obs,
        delta=args.delta,
        v_max=args.v_max,
        **base,
    )
    if axis is None:
        axis, values = "eps", [req.eps]
    rows = sweep(req, axis, values)
    text = reports_to_csv(axis, rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        notes = estimate(req).notes
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    if args.M_obs is not None and args.delta is not None:
        print(f"note: gates with measurement overhead = {measurement_overhead(replace(req, target=OBSERVABLE))!r}", file=sys.stderr)
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser, time_flag: bool = True):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--hbar", type=float)
    p.add_argument("--m", type=int, help="log2 of the grid size")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    if time_flag:
        p.add_argument("--t", type=float, help="final time")
    p.add_argument("--scheme")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cadence", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semicl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve a configured problem and write observables")
    _add_run_flags(p)

    p = sub.add_parser("convergence", help="errors and fitted orders against a resolved reference")
    _add_run_flags(p)
    p.add_argument("--schemes", type=_names, default=["lie", "strang_kvk", "yoshida4"])
    p.add_argument("--dts", type=_floats, default=[0.02, 0.01, 0.005, 0.0025])

    p = sub.add_parser("observable-robustness", help="observable vs wave-function error over an hbar sweep")
    _add_run_flags(p, time_flag=False)
    p.add_argument("--hbars", type=_floats, default=[4e-3, 2e-3, 1e-3])
    p.add_argument("--dt-fixed", type=float, default=0.05)
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--extra-schemes", type=_names, default=[])

    p = sub.add_parser("circuit-verify", help="compare gate-level and spectral evolution")
    _add_run_flags(p)
    p.add_argument("--cost-model", default="full")
    p.add_argument("--shots", type=lambda s: [int(v) for v in _floats(s)], default=[400, 4000, 40000])

    p = sub.add_parser("commutator-check", help="nested commutators vs closed forms and hbar scaling")
    _add_run_flags(p)
    p.add_argument("--words", type=_names, default=["AB", "BBA", "AAB", "BBBA", "AAAB"])
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("estimate", help="qubit, gate and query estimates")
    p.add_argument("--eps", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--target", choices=[WAVEFUNCTION, OBSERVABLE], default=WAVEFUNCTION)
    p.add_argument("--cost-model", dest="cost_model")
    p.add_argument("--M-obs", dest="M_obs", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--v-max", dest="v_max", type=float)
    p.add_argument("--sweep", help="axis=v1,v2,... with axis in " + ",".join(SWEEP_AXES))
    p.add_argument("--preset", choices=["scattering"])
    p.add_argument("--out", help="write the CSV table here as well")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "convergence": cmd_convergence,
    "observable-robustness": cmd_robustness,
    "circuit-verify": cmd_circuit_verify,
    "commutator-check": cmd_commutator_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return cmd_estimate(args, parser)
        return _COMMANDS[args.command](args)
    except ValueError as exc:  # ConfigError and ResolutionError included
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
