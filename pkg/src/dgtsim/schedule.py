"""Stepsize and coupling-factor schedules of the polynomial family.

Two global sequences drive a run: the coupling factor
``gamma_k = c1 / (1 + c2 * k**iota)`` that attenuates inter-agent mixing (and
with it the injected sharing noise), and the stepsize
``lambda_k = c3 / (1 + c4 * k**b)``.  Decaying-mode specs must satisfy the
exponent conditions 0.5 < iota < b <= 1 and 2b - iota > 1, which make
``sum(gamma)`` and ``sum(lambda)`` diverge while ``sum(gamma**2)`` and
``sum(lambda**2 / gamma)`` stay finite and ``lambda/gamma -> 0``.  Constant
mode (c2 = c4 = 0) is allowed for baselines only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import WeightPair


@dataclass(frozen=True)
class ScheduleSpec:
    c1: float
    c2: float
    iota: float
    c3: float
    c4: float
    b: float
    mode: str = "decaying"

    def __post_init__(self):
        if self.mode not in ("decaying", "constant"):
            raise ValueError(f"mode must be 'decaying' or 'constant', got {self.mode!r}")

    def gamma(self, k: int) -> float:
        return self.c1 / (1.0 + self.c2 * k ** self.iota)

    def lam(self, k: int) -> float:
        return self.c3 / (1.0 + self.c4 * k ** self.b)


@dataclass(frozen=True)
class SchedulePoint:
    gamma_k: float
    lambda_k: float


@dataclass(frozen=True)
class ScheduleCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    mode: str
    checks: tuple[ScheduleCheck, ...]
    flags: tuple[str, ...] = field(default_factory=tuple)

    def failures(self) -> list[ScheduleCheck]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = [f"schedule mode: {self.mode} -> {'valid' if self.ok else 'INVALID'}"]
        lines += [f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in self.checks]
        lines += [f"  note: {f}" for f in self.flags]
        return "\n".join(lines)


def evaluate(spec: ScheduleSpec, k: int) -> SchedulePoint:
    """Exact formula evaluation at iteration k >= 0."""
    if k < 0:
        raise ValueError(f"iteration index must be nonnegative, got {k}")
    return SchedulePoint(gamma_k=spec.gamma(k), lambda_k=spec.lam(k))


def gamma_max(wp: WeightPair) -> float:
    """Largest admissible coupling factor: below it all mixing diagonals stay positive.

    Zero diagonal entries impose no constraint; an all-zero diagonal yields
    an infinite bound.
    """
    diags = [abs(d) for d in list(wp.R.diagonal()) + list(wp.C.diagonal()) if d != 0.0]
    if not diags:
        return math.inf
    return 1.0 / max(diags)


def validate(spec: ScheduleSpec, gamma_bound: float) -> ValidationReport:
    """Check a spec against the summability conditions; reports, never raises."""
    checks: list[ScheduleCheck] = []
    flags: list[str] = []

    def add(name: str, passed: bool, detail: str):
        checks.append(ScheduleCheck(name, bool(passed), detail))

    add("coefficients", spec.c1 > 0 and spec.c3 > 0 and spec.c2 >= 0 and spec.c4 >= 0,
        f"c1={spec.c1:g}, c2={spec.c2:g}, c3={spec.c3:g}, c4={spec.c4:g} (c1,c3>0; c2,c4>=0)")
    add("exponent range", 0.0 < spec.iota <= 1.0 and 0.0 < spec.b <= 1.0,
        f"iota={spec.iota:g}, b={spec.b:g} must lie in (0,1]")
    add("gamma0 below bound", spec.gamma(0) < gamma_bound,
        f"gamma(0)={spec.gamma(0):g} vs bound {gamma_bound:g} (keeps mixing diagonals positive)")

    if spec.mode == "constant":
        add("constant coefficients", spec.c2 == 0.0 and spec.c4 == 0.0,
            "constant mode requires c2 = c4 = 0")
        flags.append("baseline only: constant schedules do not satisfy the decay conditions")
    else:
        a, b = spec.iota, spec.b
        add("sum(gamma) diverges", a <= 1.0, f"iota={a:g} <= 1")
        add("sum(gamma^2) finite", a > 0.5, f"iota={a:g} > 0.5")
        add("sum(lambda) diverges", b <= 1.0, f"b={b:g} <= 1")
        add("sum(lambda^2/gamma) finite", 2 * b - a > 1.0, f"2b-iota={2 * b - a:g} > 1")
        add("lambda/gamma -> 0", b > a and spec.c4 > 0, f"b={b:g} > iota={a:g} with c4={spec.c4:g} > 0")

    return ValidationReport(ok=all(c.passed for c in checks), mode=spec.mode,
                            checks=tuple(checks), flags=tuple(flags))
