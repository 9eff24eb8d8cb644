"""Operator-splitting coefficient sets.

A scheme with stages ``(c_i, d_i)``, ``i = 1..s`` advances one step as

    psi <- U_V(c_1 dt) U_K(d_1 dt) U_V(c_2 dt) U_K(d_2 dt) ... U_V(c_s dt) U_K(d_s dt) psi

read right to left: ``U_K(d_s dt)`` acts first and ``U_V(c_1 dt)`` acts last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

POTENTIAL = "V"
KINETIC = "K"

_CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class SplittingScheme:
    name: str
    c: tuple[float, ...]
    d: tuple[float, ...]
    p: int
    symmetric: bool = False

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        d = tuple(float(v) for v in self.d)
        if len(c) == 0 or len(c) != len(d):
            raise ValueError("c and d must be non-empty and of equal length")
        if self.p < 1:
            raise ValueError("declared order must be >= 1")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def s(self) -> int:
        return len(self.c)

    def operator_sequence(self, reverse: bool = False) -> list[tuple[str, float]]:
        """Operators in application order as ``(kind, coefficient)``; zero stages dropped.

        ``reverse=True`` applies the product left to right instead (``U_V(c_1 dt)`` first).
        """
        seq: list[tuple[str, float]] = []
        for ci, di in zip(reversed(self.c), reversed(self.d)):
            seq.append((KINETIC, di))
            seq.append((POTENTIAL, ci))
        if reverse:
            seq.reverse()
        return [(kind, coef) for kind, coef in seq if coef != 0.0]

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.operator_sequence())


def _yoshida4() -> SplittingScheme:
    w = 2.0 - 2.0 ** (1.0 / 3.0)
    c1 = 1.0 / (2.0 * w)
    c2 = 0.5 - c1
    d1 = 1.0 / w
    d2 = 1.0 - 2.0 * d1
    return SplittingScheme("yoshida4", (c1, c2, c2, c1), (d1, d2, d1, 0.0), p=4, symmetric=True)


def _triple3() -> SplittingScheme:
    c1, c2 = 0.26833, 0.9197
    d1, d2 = 0.63506, -0.1880
    return SplittingScheme("triple3", (c1, c2, 1.0 - c1 - c2), (d1, d2, 1.0 - d1 - d2), p=3)


_BUILTIN = {
    "lie": lambda: SplittingScheme("lie", (1.0,), (1.0,), p=1),
    "strang_vkv": lambda: SplittingScheme("strang_vkv", (0.5, 0.5), (1.0, 0.0), p=2, symmetric=True),
    # c_1 = 0 drops the leading potential stage, leaving U_K(dt/2) U_V(dt) U_K(dt/2).
    "strang_kvk": lambda: SplittingScheme("strang_kvk", (0.0, 1.0), (0.5, 0.5), p=2, symmetric=True),
    "triple3": _triple3,
    "yoshida4": _yoshida4,
}

BUILTIN_SCHEMES = tuple(_BUILTIN)


def builtin_scheme(name: str) -> SplittingScheme:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; expected one of {', '.join(BUILTIN_SCHEMES)}") from None


def scheme_from_config(spec) -> SplittingScheme:
    """Accept a builtin id or a mapping ``{"c": [...], "d": [...], "p": int, "name": str}``."""
    if isinstance(spec, str):
        return builtin_scheme(spec)
    if isinstance(spec, dict):
        unknown = set(spec) - {"name", "c", "d", "p"}
        if unknown:
            raise ValueError(f"unknown scheme keys: {sorted(unknown)}")
        if "c" not in spec or "d" not in spec:
            raise ValueError("custom scheme needs both 'c' and 'd'")
        scheme = SplittingScheme(spec.get("name", "custom"), tuple(spec["c"]), tuple(spec["d"]), int(spec.get("p", 1)))
        seq = scheme.operator_sequence()
        return SplittingScheme(scheme.name, scheme.c, scheme.d, scheme.p, symmetric=_is_palindrome(seq))
    raise ValueError(f"cannot build a scheme from {spec!r}")


def _is_palindrome(seq: list[tuple[str, float]], tol: float = 1e-12) -> bool:
    n = len(seq)
    for i in range(n // 2):
        (ka, a), (kb, b) = seq[i], seq[n - 1 - i]
        if ka != kb or abs(a - b) > tol:
            return False
    return True


@dataclass
class ValidationReport:
    scheme: str
    sum_c: float
    sum_d: float
    second_order_sum: float
    consistent: bool
    order2: bool
    palindrome: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def second_order_sum(scheme: SplittingScheme) -> float:
    """``sum_i d_i * (c_1 + ... + c_i)``; equals 1/2 for second-order schemes."""
    return float(np.dot(scheme.d, np.cumsum(scheme.c)))


def validate_scheme(scheme: SplittingScheme, tol: float = _CONSISTENCY_TOL) -> ValidationReport:
    sum_c = float(np.sum(scheme.c))
    sum_d = float(np.sum(scheme.d))
    second = second_order_sum(scheme)
    failures = []
    consistent = abs(sum_c - 1.0) <= tol and abs(sum_d - 1.0) <= tol
    if abs(sum_c - 1.0) > tol:
        failures.append(f"sum(c) = {sum_c!r} != 1")
    if abs(sum_d - 1.0) > tol:
        failures.append(f"sum(d) = {sum_d!r} != 1")
    order2 = abs(second - 0.5) <= tol
    if scheme.p >= 2 and not order2:
        failures.append(f"second-order condition gives {second!r}, expected 0.5")
    palindrome = _is_palindrome(scheme.operator_sequence())
    if scheme.symmetric and not palindrome:
        failures.append("declared symmetric but the operator sequence is not a palindrome")
    return ValidationReport(scheme.name, sum_c, sum_d, second, consistent, order2, palindrome, failures)
