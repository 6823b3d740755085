"""Embedded worked examples with their expected outcomes.

Each example rebuilds its data from :mod:`hamops.library` (or a shipped
script), runs the computation and compares against the expected result.
A failed check carries a mismatch note naming the first differing
component.
"""

from __future__ import annotations

import importlib.resources
import time
from dataclasses import dataclass, field
from typing import Callable

from .. import library as lib
from ..dn import check_dn3_conditions, check_gamma_linear, christoffel_lc, riemann_is_flat
from ..errors import UnknownName
from ..schouten import is_skew_adjoint, iszero_schouten_bracket, lie_derivative, transform_operator_point
from ..varcalc import euler_df
from .script import run_script
from .serialize import to_text

__all__ = ["Check", "ExampleReport", "ExampleSpec", "EXAMPLES", "run_example", "list_examples", "COMPAT3_TABLE"]


@dataclass
class Check:
    name: str
    expected: object
    got: object
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.expected == self.got

    def to_jsonable(self) -> dict:
        d = {"name": self.name, "expected": self.expected, "got": self.got, "passed": self.passed}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class ExampleReport:
    id: str
    checks: list = field(default_factory=list)
    elapsed: float = 0.0
    output: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_mismatch(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def to_text(self) -> str:
        lines = [f"example {self.id}"]
        lines.extend(self.output)
        for c in self.checks:
            mark = "ok" if c.passed else "MISMATCH"
            lines.append(f"  {mark}: {c.name} (expected {c.expected}, got {c.got})")
            if c.detail and not c.passed:
                lines.append(f"    {c.detail}")
        lines.append(f"  result: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines)

    def to_jsonable(self) -> dict:
        # elapsed time is left out so reports are byte-identical across runs
        return {
            "type": "example_report",
            "id": self.id,
            "ok": self.ok,
            "checks": [c.to_jsonable() for c in self.checks],
            "output": list(self.output),
        }


@dataclass(frozen=True)
class ExampleSpec:
    id: str
    description: str
    run: Callable
    long: bool = False


def _witness_note(witness) -> str:
    for k, comp in enumerate(witness.components()):
        if not comp.is_zero():
            text = to_text(comp)
            if len(text) > 160:
                text = text[:157] + "..."
            return f"first nonzero Euler component #{k}: {text}"
    return ""


def _bracket_check(name, F, H, expected: bool, jobs: int) -> Check:
    res = iszero_schouten_bracket(F, H, jobs=jobs)
    note = "" if res.is_zero else _witness_note(res.witness)
    return Check(name, expected, res.is_zero, note)


def _script(name: str) -> str:
    return importlib.resources.files("hamops.scripts").joinpath(name).read_text()


def _from_script(report: ExampleReport, name: str, jobs: int):
    tr = run_script(_script(name), jobs=jobs)
    report.output.extend(line for line in tr.lines if not line.startswith("expect "))
    for rec in tr.records:
        if rec["kind"] == "expect":
            report.checks.append(Check(rec["command"][7:], True, rec["passed"]))


def _kdv(report, jobs, long):
    _from_script(report, "kdv_lieder.ham", jobs)


def _wdvv4(report, jobs, long):
    A1, A2 = lib.wdvv4_operators()
    report.checks.append(Check("A1 skew-adjoint", True, is_skew_adjoint(A1)))
    report.checks.append(Check("A2 skew-adjoint", True, is_skew_adjoint(A2)))
    b1, b2 = A1.to_bivector(), A2.to_bivector()
    for name, F, H in (("[A1,A1] = 0", b1, b1), ("[A1,A2] = 0", b1, b2), ("[A2,A2] = 0", b2, b2)):
        report.checks.append(_bracket_check(name, F, H, True, jobs))


def _darboux(report, jobs, long):
    _from_script(report, "casimir.ham", jobs)


# rows and columns g1..g6; True for compatible ("y" and "y*" entries)
COMPAT3_TABLE = [
    [True, False, False, False, False, False],
    [False, True, False, False, False, False],
    [False, False, True, True, False, False],
    [False, False, True, True, False, False],
    [False, False, False, False, True, False],
    [False, False, False, False, False, True],
]


def _compat3(report, jobs, long):
    s = lib.compat3_space()
    ops = {k: lib.compat3_operator(k, s).to_bivector() for k in range(1, 7)}
    for k in range(1, 7):
        report.checks.append(Check(f"g{k} satisfies the third-order conditions", True, check_dn3_conditions(lib.compat3_metric(k, s)).holds))
    for a in range(1, 7):
        for b in range(a, 7):
            report.checks.append(
                _bracket_check(f"[g{a}, g{b}] compatible", ops[a], ops[b], COMPAT3_TABLE[a - 1][b - 1], jobs)
            )
    other = lib.compat3_operator(1, s, c="cc").to_bivector()
    report.checks.append(_bracket_check("[g1(c), g1(cc)] compatible", ops[1], other, False, jobs))


def _compat13(report, jobs, long):
    s = lib.compat13_space()
    h = lib.compat13_metric(s)
    report.output.append("branch: c5 = -2*c1*c3/c2, c6 = 2*c3*c4/c2 (c2 != 0)")
    report.checks.append(Check("metric of P1 is flat", True, riemann_is_flat(h)))
    report.checks.append(Check("Levi-Civita symbols satisfy the linear conditions", True, check_gamma_linear(h, christoffel_lc(h)).holds))
    P1, R3 = lib.compat13_operators(s)
    b1, b2 = P1.to_bivector(), R3.to_bivector()
    report.checks.append(_bracket_check("[P1,P1] = 0", b1, b1, True, jobs))
    report.checks.append(_bracket_check("[R3,R3] = 0", b2, b2, True, jobs))
    report.checks.append(_bracket_check("[P1,R3] = 0", b1, b2, True, jobs))


def _wdvv3(report, jobs, long):
    s = lib.wdvv3_abc_space()
    A1, A2 = lib.wdvv3_abc_operators(s)
    b1, b2 = A1.to_bivector(), A2.to_bivector()
    report.checks.append(_bracket_check("[A1,A1] = 0 in a, b, c", b1, b1, True, jobs))
    report.checks.append(_bracket_check("[A2,A2] = 0 in a, b, c", b2, b2, True, jobs))
    report.checks.append(_bracket_check("[A1,A2] = 0 in a, b, c", b1, b2, True, jobs))
    if not long:
        report.output.append("flat-coordinate Lie derivative skipped (pass --long)")
        return
    f = lib.wdvv3_flat_space()
    fmap = lib.wdvv3_flat_map(f)
    T1 = transform_operator_point(A1, fmap, f)
    T2 = transform_operator_point(A2, fmap, f)
    K = lib.wdvv3_K(f)
    const = all(T1.coeff(i, j, (1,)) == K[i][j] and T1.coeff(i, j, (0,)).is_zero() for i in range(3) for j in range(3))
    report.checks.append(Check("A1 = K D_x in flat coordinates", True, const))
    res = euler_df(lie_derivative(lib.wdvv3_tau(f), T1.to_bivector(), jobs=jobs) - T2.to_bivector(), jobs=jobs)
    report.checks.append(Check("L_tau A1 = A2 in flat coordinates", True, res.is_zero(), _witness_note(res)))


EXAMPLES = {
    e.id: e
    for e in (
        ExampleSpec("kdv-lieder", "KdV operators, brackets and the Lie derivative", _kdv),
        ExampleSpec("wdvv4-biham", "WDVV N=4 bi-Hamiltonian pair", _wdvv4),
        ExampleSpec("darboux-g5", "Casimirs of the g5 potential operator as Darboux coordinates", _darboux),
        ExampleSpec("compat3-table", "compatibility table of the six third-order metrics", _compat3),
        ExampleSpec("compat13-verify", "first-order operators compatible with R3", _compat13),
        ExampleSpec("wdvv3-lagrep", "WDVV N=3 pair and the flat-coordinate Lie derivative", _wdvv3, long=True),
    )
}


def list_examples() -> list[tuple[str, str, bool]]:
    return [(e.id, e.description, e.long) for e in EXAMPLES.values()]


def run_example(example_id: str, *, jobs: int = 1, long: bool = False) -> ExampleReport:
    spec = EXAMPLES.get(example_id)
    if spec is None:
        raise UnknownName(f"unknown example {example_id!r}; choose from {', '.join(EXAMPLES)}")
    report = ExampleReport(example_id)
    t0 = time.perf_counter()
    spec.run(report, jobs, long)
    report.elapsed = time.perf_counter() - t0
    return report
