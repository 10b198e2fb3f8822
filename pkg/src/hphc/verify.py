"""Exact cross-checks between the closed formulas, the sum forms and the oracles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .exact import (
    central_return_1d,
    finite_identity_sum,
    infinite_identity_sum,
    p2n,
    p2n2r_closed,
    p2n2r_sum,
)
from .localtime import InvariantMeasure, invariant_residual
from .oracle import MAX_DP_RETURN_N, dp_return_prob, dp_site_distribution, enumerate_1d_joint
from .profiles import PJProfile
from .returnprob import exact_return_prob

MAX_ENUM_VERIFY = 10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    checked: int
    failures: int
    detail: str = ""


class _Tally:
    def __init__(self, name: str, fault: bool):
        self.name = name
        self.fault = fault
        self.checked = 0
        self.failures = 0
        self.first = ""

    def eq(self, lhs, rhs, where: str) -> None:
        if self.fault and self.checked == 0:
            lhs = lhs + Fraction(1, 2**20)  # negative control: corrupt one coefficient
        self.checked += 1
        if lhs != rhs:
            self.failures += 1
            if not self.first:
                self.first = f"{where}: {lhs} != {rhs}"

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.failures == 0, self.checked, self.failures, self.first)


def _closed_vs_sum(t: _Tally, max_n: int):
    for n in range(1, 25):
        for r in range(1, n + 1):
            t.eq(p2n2r_closed(n, r), p2n2r_sum(n, r), f"n={n} r={r}")


def _marginal(t: _Tally, max_n: int):
    for n in range(1, 25):
        t.eq(sum((p2n(n, g) for g in range(1, 2 * n + 1)), Fraction(0)), central_return_1d(n), f"n={n}")


def _tables(max_n: int):
    return [enumerate_1d_joint(n) for n in range(1, min(max_n, MAX_ENUM_VERIFY) + 1)]


def _enumeration(t: _Tally, max_n: int):
    for tab in _tables(max_n):
        for g in range(0, 2 * tab.n + 1):
            t.eq(tab.prob("G", g), p2n(tab.n, g), f"n={tab.n} G={g}")


def _parity(t: _Tally, max_n: int):
    for tab in _tables(max_n):
        for r in range(1, tab.n + 1):
            t.eq(tab.prob("G", 2 * r - 1), tab.prob("G", 2 * r), f"n={tab.n} r={r}")


def _sparre_andersen(t: _Tally, max_n: int):
    for tab in _tables(max_n):
        for r in range(0, tab.n):
            t.eq(tab.prob("K", 2 * r), tab.prob("K", 2 * r + 1), f"n={tab.n} r={r}")


def _event_identity(t: _Tally, max_n: int):
    for tab in _tables(max_n):
        for r in range(0, 2 * tab.n + 1):
            t.eq(tab.prob("M", r), tab.prob("K", 2 * tab.n - r), f"n={tab.n} r={r}")
            t.eq(tab.prob("M", r), tab.prob("G", r), f"n={tab.n} r={r} (M~G)")


def _oracle_return(t: _Tally, max_n: int):
    for N in range(1, min(max_n, MAX_DP_RETURN_N) + 1):
        t.eq(exact_return_prob(N), dp_return_prob(N), f"N={N}")


def _negbin_finite(t: _Tally, max_n: int):
    for a in range(0, 65):
        t.eq(finite_identity_sum(a), Fraction(1), f"a={a}")


def _negbin_infinite(t: _Tally, max_n: int):
    for a in range(0, 65):
        partial, bound, _ = infinite_identity_sum(a)
        gap = 2 - partial
        t.eq(Fraction(0 <= gap <= bound and bound < Fraction(1, 2**64)), Fraction(1), f"a={a}")


def _profiles():
    return [
        PJProfile.hphc(),
        PJProfile.simple(),
        PJProfile.comb(),
        PJProfile.periodic([Fraction(1, 4), Fraction(1, 3)]),
        PJProfile.periodic([Fraction(1, 8), Fraction(1, 2), Fraction(3, 8)]),
        PJProfile.periodic([Fraction(1, 5), Fraction(1, 4), Fraction(1, 2), Fraction(1, 3)]),
    ]


def _residual(t: _Tally, max_n: int):
    for prof in _profiles():
        res = invariant_residual(prof, InvariantMeasure.from_profile(prof), 20)
        for site, v in res.items():
            t.eq(v, Fraction(0), f"{prof.label()} {tuple(site)}")


def _mass(t: _Tally, max_n: int):
    for prof in _profiles():
        for steps in (0, 1, 5, 12):
            t.eq(dp_site_distribution(steps, prof).total(), Fraction(1), f"{prof.label()} steps={steps}")


CHECKS: dict[str, Callable[[_Tally, int], None]] = {
    "closed_vs_sum": _closed_vs_sum,
    "marginal": _marginal,
    "enumeration": _enumeration,
    "parity": _parity,
    "sparre_andersen": _sparre_andersen,
    "event_identity": _event_identity,
    "oracle_return": _oracle_return,
    "negbin_finite": _negbin_finite,
    "negbin_infinite": _negbin_infinite,
    "invariant_residual": _residual,
    "mass_conservation": _mass,
}


def run_checks(max_n: int = 12, inject_fault: str | None = None) -> list[CheckResult]:
    """Run every exact identity; ``inject_fault`` corrupts one value of the named check."""
    if inject_fault is not None and inject_fault not in CHECKS:
        raise ValueError(f"unknown check {inject_fault!r}")
    out = []
    for name, fn in CHECKS.items():
        tally = _Tally(name, name == inject_fault)
        fn(tally, max_n)
        out.append(tally.result())
    return out
