"""Closed-form qubit, gate and query estimates for split-step simulation.

Every hidden constant is set to one, so the numbers are order-of-magnitude
figures whose value lies in how they scale with eps, hbar, L, t, d, p and ell.

Wave-function target (splitting order ``p``, smoothness ``ell``, dimension ``d``)::

    dt^p / hbar          = eps / (L^(d/2) t)
    (dx / (hbar L))^ell  = eps dt / (L^(d/2) t)
    N_gates              = 2 p' J(m) L^(d/(2p)) t^(1 + 1/p) / (eps hbar)^(1/p)

with ``p' = 1`` for ``p <= 2`` (Strang merges its half steps) and ``p' = p`` above.

Observable target (Strang splitting)::

    dt                   = (eps / (L^(d/2) t))^(1/2)
    (dx / (hbar L))^ell  = eps / (L^(d/2) n)
    N_gates              = 2 J(m) L^(d/4) t^(3/2) / eps^(1/2)

Qubits are ``m = d * ceil(log2(L / dx))``; queries are ``N_gates / (2 J(m))``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

WAVEFUNCTION = "wavefunction"
OBSERVABLE = "observable"
SWEEP_AXES = ("eps", "hbar", "t", "d", "p", "ell")


def parse_cost_model(model) -> tuple[str, float]:
    """``"full"``, ``"linear"``, ``"oracle"``, ``"poly:a"`` or ``("poly", a)``."""
    if isinstance(model, tuple):
        kind, a = model
        return str(kind), float(a)
    text = str(model).strip().lower()
    if text in ("full", "linear", "oracle"):
        return text, 0.0
    if text.startswith("poly"):
        arg = text[4:].strip("():= ")
        if not arg:
            raise ValueError("poly cost model needs an exponent, e.g. 'poly:2'")
        return "poly", float(arg)
    raise ValueError(f"unknown cost model {model!r}")


def diagonal_cost(model, m: int) -> float:
    """Gate count ``J(m)`` charged for one diagonal unitary on ``m`` qubits."""
    kind, a = parse_cost_model(model)
    if kind == "full":
        return float(2 ** (m + 1) - 3)
    if kind == "linear":
        return float(m)
    if kind == "poly":
        return float(m) ** a
    return 1.0


@dataclass(frozen=True)
class EstimateRequest:
    eps: float
    hbar: float
    L: float = 1.0
    t: float = 1.0
    d: int = 1
    p: int = 2
    ell: int = 1
    target: str = WAVEFUNCTION
    cost_model: str = "linear"
    M_obs: int | None = None
    delta: float | None = None
    v_max: float | None = None

    def __post_init__(self):
        for name in ("eps", "hbar", "L", "t"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not self.eps < 1:
            raise ValueError("eps must be below 1")
        for name in ("d", "p", "ell"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.target not in (WAVEFUNCTION, OBSERVABLE):
            raise ValueError(f"target must be {WAVEFUNCTION!r} or {OBSERVABLE!r}")
        parse_cost_model(self.cost_model)
        if self.v_max is not None and not self.v_max > 0:
            raise ValueError("v_max must be positive")

    @property
    def effective_eps(self) -> float:
        return self.eps / self.v_max if self.v_max else self.eps


@dataclass
class EstimateReport:
    dt: float
    dx: float
    n_steps: int
    m_qubits: int
    n_gates: float
    n_queries: float
    J_of_m: float
    notes: list[str] = field(default_factory=list)
    points_per_dim: float = 0.0


def meshing(req: EstimateRequest) -> tuple[float, float, int]:
    """``(dt, dx, n_steps)`` balancing interpolation and splitting error against ``eps``."""
    eps, hbar, L, t = req.effective_eps, req.hbar, req.L, req.t
    Ld = L ** (req.d / 2.0)
    if req.target == OBSERVABLE:
        dt = (eps / (Ld * t)) ** 0.5
        n = t / dt
        dx = hbar * L * (eps / (Ld * n)) ** (1.0 / req.ell)
    else:
        dt = (hbar * eps / (Ld * t)) ** (1.0 / req.p)
        dx = hbar * L * (eps * dt / (Ld * t)) ** (1.0 / req.ell)
    n_steps = max(1, math.ceil(t / dt - 1e-9))
    return dt, dx, n_steps


def _points_per_dim(req: EstimateRequest) -> float:
    return req.L / meshing(req)[1]


def qubit_count(req: EstimateRequest) -> int:
    m, _ = _qubits_with_note(req)
    return m


def _qubits_with_note(req: EstimateRequest) -> tuple[int, str | None]:
    points = _points_per_dim(req)
    if points <= 1.0:
        return req.d, f"per-dimension point count {points:.3g} <= 1; using one qubit per dimension"
    # tolerance keeps exact powers of two from rounding up
    return req.d * max(1, math.ceil(math.log2(points) - 1e-9)), None


def _stage_factor(p: int) -> int:
    return 1 if p <= 2 else p


def gate_count(req: EstimateRequest, m: int | None = None) -> tuple[float, float]:
    """``(n_gates, n_queries)``; ``m`` defaults to :func:`qubit_count`."""
    if m is None:
        m = qubit_count(req)
    J = diagonal_cost(req.cost_model, m)
    eps, hbar, L, t, d = req.effective_eps, req.hbar, req.L, req.t, req.d
    if req.target == OBSERVABLE:
        steps = L ** (d / 4.0) * t**1.5 / eps**0.5
        n_gates = 2.0 * J * steps
    else:
        p = req.p
        steps = L ** (d / (2.0 * p)) * t ** (1.0 + 1.0 / p) / (eps * hbar) ** (1.0 / p)
        n_gates = 2.0 * _stage_factor(p) * J * steps
    return n_gates, n_gates / (2.0 * J)


def measurement_overhead(req: EstimateRequest, m: int | None = None) -> float:
    """Observable gate count including amplitude-estimation readout of ``M_obs`` observables."""
    if req.M_obs is None or req.delta is None:
        raise ValueError("measurement overhead needs M_obs and delta")
    if req.M_obs < 1:
        raise ValueError("M_obs must be >= 1")
    if not 0 < req.delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if m is None:
        m = qubit_count(replace(req, target=OBSERVABLE))
    J = diagonal_cost(req.cost_model, m)
    eps = req.effective_eps
    return 2.0 * J * math.sqrt(req.M_obs) * req.L ** (req.d / 4.0) * req.t**1.5 / eps**1.5 * math.log(1.0 / req.delta)


def estimate(req: EstimateRequest) -> EstimateReport:
    notes = ["order-of-magnitude: all hidden constants set to 1"]
    dt, dx, n = meshing(req)
    if dt >= req.t:
        notes.append("single step regime: dt >= t")
    m, note = _qubits_with_note(req)
    if note:
        notes.append(note)
    if req.target == OBSERVABLE:
        bound = math.sqrt(req.eps / req.t)
        if not req.hbar < bound:
            msg = f"hbar={req.hbar:g} violates hbar < sqrt(eps/t) = {bound:g}; observable estimate outside its validity range"
            notes.append(msg)
            warnings.warn(msg, stacklevel=2)
        if req.p != 2:
            notes.append("observable estimate assumes Strang splitting; p ignored")
    gates, queries = gate_count(req, m)
    J = diagonal_cost(req.cost_model, m)
    return EstimateReport(dt, dx, n, m, gates, queries, J, notes, req.L / dx)


def error_bound(req: EstimateRequest, dt: float, dx: float) -> float:
    """Constant-one error bound evaluated at ``(dt, dx)`` with ``n = t / dt``.

    For the observable target the ``dt hbar^2`` term is returned separately by
    :func:`observable_hbar_term` since the mesh is not chosen to balance it.
    """
    Ld = req.L ** (req.d / 2.0)
    n = req.t / dt
    interp = (dx / (req.hbar * req.L)) ** req.ell
    if req.target == OBSERVABLE:
        return Ld * n * (interp + dt**3)
    return Ld * n * (interp + dt ** (req.p + 1) / req.hbar)


def observable_hbar_term(req: EstimateRequest, dt: float) -> float:
    return req.L ** (req.d / 2.0) * (req.t / dt) * dt * req.hbar**2


SCATTERING_PRESET = dict(L=10.0, d=3, t=1000.0, p=2, ell=2, cost_model="linear")


def _coerce(axis: str, value):
    return int(value) if axis in ("d", "p", "ell") else float(value)


def sweep(template: EstimateRequest, axis: str, values: Sequence) -> list[tuple[float, EstimateReport]]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    if len(values) == 0:
        raise ValueError("sweep needs at least one value")
    rows = []
    for v in values:
        req = replace(template, **{axis: _coerce(axis, v)})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows.append((_coerce(axis, v), estimate(req)))
    return rows


CSV_COLUMNS = ("axis", "value", "dt", "dx", "n", "m", "J", "gates", "queries")


def _fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x)) if math.isfinite(x) else str(x)


def reports_to_csv(axis: str, rows: Sequence[tuple[float, EstimateReport]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for value, r in rows:
        writer.writerow([axis, _fmt(value), _fmt(r.dt), _fmt(r.dx), r.n_steps, r.m_qubits, _fmt(r.J_of_m), _fmt(r.n_gates), _fmt(r.n_queries)])
    return buf.getvalue()
