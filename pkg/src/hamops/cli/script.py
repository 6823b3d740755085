"""A small line-oriented script language over the hamops API.

Statements (one per line; a line continues while brackets are open)::

    space indep=x dep=u odd=p order=8 params=c1,c2
    A2 := op(td(psi, x, 3) + 2*u*td(psi, x) + u_x*psi)
    print euler(lie(tau, biv(A1)) - biv(A2))
    expect iszero_bracket(biv(A2), biv(A2))
    expect sf(transform(A, C)) == {-p3_x, -p2_x, -p1_x}
    # comment

``op`` takes a single entry or a ``{{...}, ...}`` matrix of entries written
in the reserved placeholder ``psi``.  ``expect X`` passes when ``X`` is true
or zero (an Expr, superfunction, operator, Euler result or list of them);
``expect X == Y`` compares values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import HamopsError, OrderExceeded, ShapeMismatch, UnknownName
from ..jetspace import SpaceSpec, total_derivative
from ..kernel import Expr
from .parser import ExprSyntaxError, evaluate_expr_ast, parse
from .serialize import to_jsonable, value_text

__all__ = ["ScriptError", "Transcript", "run_script", "ScriptRunner", "is_zero_value"]


class ScriptError(HamopsError):
    """A command failed; ``index`` is the 1-based command number."""

    def __init__(self, index: int, command: str, cause: Exception):
        self.index = index
        self.command = command
        self.cause = cause
        super().__init__(f"command {index} ({command!r}): {type(cause).__name__}: {cause}")


@dataclass
class Transcript:
    lines: list = field(default_factory=list)
    records: list = field(default_factory=list)
    expectations: int = 0
    failures: int = 0
    total_order: int | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def to_jsonable(self) -> dict:
        return {
            "type": "transcript",
            "ok": self.ok,
            "expectations": self.expectations,
            "failures": self.failures,
            "total_order": self.total_order,
            "records": self.records,
        }


def is_zero_value(v) -> bool:
    from ..schouten import BracketCheck, CDiffOp, Superfun
    from ..varcalc import EulerResult

    if isinstance(v, bool):
        return False
    if isinstance(v, BracketCheck):
        return v.is_zero
    if isinstance(v, (Expr, Superfun, EulerResult, CDiffOp)):
        return v.is_zero()
    if isinstance(v, (list, tuple)):
        return all(is_zero_value(x) for x in v)
    if hasattr(v, "holds"):
        return False
    return v == 0


def _truthy(v) -> bool:
    from ..schouten import BracketCheck

    if isinstance(v, bool):
        return v
    if isinstance(v, BracketCheck):
        return v.is_zero
    if hasattr(v, "holds"):
        return bool(v.holds)
    return is_zero_value(v)


def _values_equal(a, b) -> bool:
    from ..schouten import CDiffOp, Superfun

    if isinstance(a, Superfun) or isinstance(b, Superfun):
        a = list(a) if isinstance(a, Superfun) else a
        b = list(b) if isinstance(b, Superfun) else b
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, CDiffOp) and isinstance(b, CDiffOp):
        return a == b
    if isinstance(a, Expr) and isinstance(b, Expr):
        return (a - b).is_zero()
    return a == b


def _split_statements(text: str):
    """Yield (line number, statement) with bracket-aware continuation."""
    buf, start, depth = [], None, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip() and not buf:
            continue
        if not buf:
            start = lineno
        buf.append(line.strip())
        depth += sum(line.count(c) for c in "({[") - sum(line.count(c) for c in ")}]")
        if depth <= 0:
            stmt = " ".join(x for x in buf if x)
            if stmt:
                yield start, stmt
            buf, depth = [], 0
    if buf:
        yield start, " ".join(buf)


_ASSIGN = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)\s*:=\s*(.+)$")


class ScriptRunner:
    """Executes statements against one space and a name table."""

    def __init__(self, order_override: int | None = None, jobs: int = 1, space: SpaceSpec | None = None):
        self.order_override = order_override
        self.jobs = jobs
        self.space = space
        if space is not None and order_override is not None:
            self.space = space.with_order(order_override)
        self.names: dict = {}

    # statements -------------------------------------------------------------
    def declare_space(self, args: str):
        opts = {}
        for part in args.split():
            if "=" not in part:
                raise ExprSyntaxError(f"space option {part!r} is not key=value", 0, args)
            k, v = part.split("=", 1)
            opts[k] = [x for x in v.strip("{}").split(",") if x]
        unknown = set(opts) - {"indep", "dep", "odd", "order", "params"}
        if unknown:
            raise UnknownName(f"unknown space option(s) {sorted(unknown)}")
        order = int(opts.get("order", ["5"])[0])
        if self.order_override is not None:
            order = max(order, self.order_override)
        self.space = SpaceSpec(
            opts.get("indep", []), opts.get("dep", []), opts.get("odd", []), order, opts.get("params", [])
        )
        self.names = {}

    def _need_space(self):
        if self.space is None:
            raise ShapeMismatch("declare a space before using expressions")
        return self.space

    def evaluate(self, text: str):
        self._need_space()
        return self.eval_node(parse(text, allow_calls=True))

    # evaluation ---------------------------------------------------------------
    def _lookup(self, name):
        return self.names.get(name)

    def eval_node(self, node):
        sp = self._need_space()
        kind = node[0]
        if kind == "call":
            return self.call(node)
        if kind == "list":
            return [self.eval_node(n) for n in node[1]]
        if kind == "name" and node[1] in self.names:
            return self.names[node[1]]
        if kind in ("bin", "neg", "pow"):
            return self._arith(node)
        return evaluate_expr_ast(node, sp, self._lookup)

    def _arith(self, node):
        kind = node[0]
        if kind == "neg":
            return -self.eval_node(node[1])
        if kind == "pow":
            return self.eval_node(node[1]) ** node[2]
        a = self.eval_node(node[2])
        b = self.eval_node(node[3])
        op = node[1]
        if isinstance(a, list) and isinstance(b, list) and op in "+-":
            if len(a) != len(b):
                raise ShapeMismatch("list lengths differ")
            return [x + y if op == "+" else x - y for x, y in zip(a, b)]
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return a / b

    def _raw_name(self, node):
        if node[0] != "name":
            raise ExprSyntaxError("expected a name", node[-1])
        return node[1]

    def _indep(self, node):
        sp = self.space
        if node[0] == "name" and node[1] in sp.indep:
            return sp.indep.index(node[1])
        if node[0] == "num":
            return int(node[1]) - 1
        raise UnknownName(f"expected an independent variable at position {node[-1]}")

    def _op_entry(self, node):
        sp = self.space
        if not sp.odd:
            raise ShapeMismatch("operators need at least one odd variable")
        psi = sp.odd_vars()[0]
        saved = self.names.get("psi")
        self.names["psi"] = psi
        try:
            return self.eval_node(node)
        finally:
            if saved is None:
                self.names.pop("psi", None)
            else:
                self.names["psi"] = saved

    def _make_op(self, node):
        from ..schouten import CDiffOp, _collect_linear

        sp = self.space
        if node[0] == "list":
            rows = node[1]
            mat = [r[1] if r[0] == "list" else [r] for r in rows]
        else:
            mat = [[node]]
        nrows, ncols = len(mat), len(mat[0])
        if any(len(r) != ncols for r in mat):
            raise ShapeMismatch("operator rows have different lengths")
        comps = {}
        for i, r in enumerate(mat):
            for j, entry in enumerate(r):
                val = sp.expr(self._op_entry(entry))
                comps[(i, j)] = _collect_linear(val, 0, "operator entry")
        return CDiffOp(sp, nrows, ncols, comps)

    def call(self, node):
        from .. import dn, schouten, varcalc
        from ..superfun import Superfun

        _, name, args, kwargs, pos = node
        sp = self.space
        jobs = self.jobs

        if name == "op":
            if len(args) != 1:
                raise ShapeMismatch("op takes one entry or one matrix of entries")
            return self._make_op(args[0])
        if name == "td":
            if not args:
                raise ShapeMismatch("td needs an argument")
            e = self.eval_node(args[0])
            lam = self._indep(args[1]) if len(args) > 1 else 0
            k = int(args[2][1]) if len(args) > 2 else 1
            if isinstance(e, list):
                return [total_derivative(sp.expr(x), lam, k) for x in e]
            return total_derivative(sp.expr(e), lam, k)
        if name in ("metric",):
            index = self._raw_name(kwargs["index"]) if "index" in kwargs else "lower"
            potential = self._flag(kwargs.get("potential"))
            mat = self.eval_node(args[0])
            return dn.MetricField(mat, sp, index=index, potential=potential)
        if name == "dn3":
            form = self._raw_name(kwargs["form"]) if "form" in kwargs else "hydrodynamic"
            return dn.dn3_operator(self._metric(self.eval_node(args[0])), form=form)

        vals = [self.eval_node(a) for a in args]

        def one():
            if len(vals) != 1:
                raise ShapeMismatch(f"{name} takes one argument")
            return vals[0]

        def two():
            if len(vals) != 2:
                raise ShapeMismatch(f"{name} takes two arguments")
            return vals

        if name == "sf":
            v = one()
            if isinstance(v, schouten.CDiffOp):
                return schouten.op_to_superfun(v)
            return Superfun([sp.expr(x) for x in (v if isinstance(v, list) else [v])], space=sp)
        if name == "cdiff":
            v = one()
            return schouten.superfun_to_op(v if isinstance(v, Superfun) else Superfun(v, space=sp))
        if name == "biv":
            return schouten.superfun_to_multivector(self._sf(one()))
        if name == "bracket":
            a, b = two()
            return schouten.schouten_bracket(self._scalar(a), self._scalar(b), jobs=jobs)
        if name == "iszero_bracket":
            a, b = two()
            return schouten.iszero_schouten_bracket(self._scalar(a), self._scalar(b), jobs=jobs)
        if name == "euler":
            return varcalc.euler_df(sp.expr(one()), jobs=jobs)
        if name == "vd":
            a, b = two()
            return varcalc.variational_derivative(sp.expr(a), b)
        if name == "isdiv":
            return varcalc.is_total_divergence(sp.expr(one()))
        if name == "linearize":
            v = one()
            return varcalc.linearize(v if isinstance(v, list) else [v])
        if name == "adjoint":
            v = one()
            if isinstance(v, schouten.CDiffOp):
                return v.adjoint()
            return varcalc.adjoint(self._sf(v))
        if name == "skew":
            return schouten.is_skew_adjoint(one())
        if name == "compose":
            if len(vals) < 2:
                raise ShapeMismatch("compose takes at least two operators")
            out = vals[0]
            for v in vals[1:]:
                out = schouten.op_compose(out, v)
            return out
        if name == "apply":
            A, psi = two()
            return schouten.op_apply(A, psi if isinstance(psi, list) else [psi])
        if name == "lie":
            tau, A = two()
            if isinstance(tau, list):
                tau = [sp.expr(x) for x in tau]
            return schouten.lie_derivative(tau, self._scalar(A), jobs=jobs)
        if name == "transform":
            A, C = two()
            return schouten.transform_operator_differential(A, C if isinstance(C, list) else [C])
        if name == "flow":
            A, h = two()
            return schouten.hamiltonian_flow(A, h)
        if name == "poisson":
            if len(vals) != 3:
                raise ShapeMismatch("poisson takes h, f and an operator")
            return schouten.poisson_bracket(*vals)
        if name == "opeq":
            F, A = two()
            return schouten.check_operator_equation(F if isinstance(F, list) else [F], A)
        if name == "inverse":
            v = one()
            if isinstance(v, dn.MetricField):
                return v.inverse_matrix()
            return dn.matrix_inverse(v, sp)
        if name == "dn1":
            return dn.dn1_from_metric(self._metric(one()))
        if name == "flat":
            return dn.riemann_is_flat(self._metric(one()))
        if name == "dn3_conditions":
            return dn.check_dn3_conditions(self._metric(one()))
        if name == "casimir_check":
            A, C = two()
            return schouten_list(dn.casimir_check(A, C if isinstance(C, list) else [C]))
        if name == "splitext":
            return [[m, c] for m, c in varcalc.splitext(sp.expr(one()))]
        if name == "iszero":
            return is_zero_value(one())
        raise UnknownName(f"unknown function {name!r} at position {pos}")

    def _flag(self, node) -> bool:
        if node is None:
            return False
        if node[0] == "num":
            return node[1] != 0
        return self._raw_name(node) in ("true", "yes")

    def _metric(self, v):
        from ..dn import MetricField

        return v if isinstance(v, MetricField) else MetricField(v, self.space)

    def _sf(self, v):
        from ..schouten import CDiffOp, op_to_superfun
        from ..superfun import Superfun

        if isinstance(v, CDiffOp):
            return op_to_superfun(v)
        if isinstance(v, Superfun):
            return v
        return Superfun([self.space.expr(x) for x in (v if isinstance(v, list) else [v])], space=self.space)

    def _scalar(self, v):
        from ..schouten import CDiffOp, superfun_to_multivector
        from ..superfun import Superfun

        if isinstance(v, CDiffOp):
            return superfun_to_multivector(v)
        if isinstance(v, Superfun):
            if len(v) == 1:
                return v.comps[0]
            return superfun_to_multivector(v)
        if isinstance(v, list):
            if len(v) == 1:
                return self.space.expr(v[0])
            return superfun_to_multivector(self._sf(v))
        return self.space.expr(v)


def schouten_list(rows):
    return [list(r) for r in rows]


def _execute(text: str, runner: ScriptRunner, transcript: Transcript):
    for index, (lineno, stmt) in enumerate(_split_statements(text), 1):
        try:
            if stmt.startswith("space ") or stmt == "space":
                runner.declare_space(stmt[5:])
                transcript.total_order = runner.space.total_order
                transcript.records.append({"index": index, "kind": "space", "command": stmt})
                continue
            m = _ASSIGN.match(stmt)
            if m:
                name, rhs = m.groups()
                if name in runner.names:
                    raise ShapeMismatch(f"name {name!r} is already bound")
                sp = runner._need_space()
                if name in sp.gen_names or name in sp.odd_names or name in sp.indep:
                    raise ShapeMismatch(f"name {name!r} shadows a coordinate")
                runner.names[name] = runner.evaluate(rhs)
                transcript.records.append({"index": index, "kind": "assign", "command": stmt, "name": name})
                continue
            if stmt.startswith("print "):
                val = runner.evaluate(stmt[6:])
                transcript.lines.append(value_text(val))
                transcript.records.append(
                    {"index": index, "kind": "print", "command": stmt, "value": to_jsonable(val, False)}
                )
                continue
            if stmt.startswith("expect "):
                body = stmt[7:]
                transcript.expectations += 1
                if "==" in body:
                    lhs, rhs = body.split("==", 1)
                    a, b = runner.evaluate(lhs), runner.evaluate(rhs)
                    passed = _values_equal(a, b)
                    shown = a
                else:
                    shown = runner.evaluate(body)
                    passed = _truthy(shown)
                if not passed:
                    transcript.failures += 1
                status = "ok" if passed else "FAILED"
                transcript.lines.append(f"expect {transcript.expectations}: {status}: {body}")
                rec = {"index": index, "kind": "expect", "command": stmt, "passed": passed}
                if not passed:
                    rec["value"] = to_jsonable(shown, False)
                    transcript.lines.append(f"  got {value_text(shown)}")
                transcript.records.append(rec)
                continue
            raise ExprSyntaxError("expected 'space', 'name := ...', 'print ...' or 'expect ...'", 0, stmt)
        except OrderExceeded:
            raise
        except ExprSyntaxError as exc:
            raise ScriptError(index, stmt, exc) from exc
        except HamopsError as exc:
            if isinstance(exc, ScriptError):
                raise
            raise ScriptError(index, stmt, exc) from exc
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ScriptError(index, stmt, exc) from exc


def run_script(source, *, auto_raise: bool = False, max_order: int = 40, order: int | None = None,
               jobs: int = 1, space: SpaceSpec | None = None) -> Transcript:
    """Run a script given as text or a path.

    With ``auto_raise`` an :class:`OrderExceeded` restarts the script with
    the total order grown geometrically (at least to the reported
    requirement) until ``max_order``; past the cap the last error is raised.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        text = Path(source).read_text()
    else:
        text = source
    current = order
    while True:
        transcript = Transcript()
        runner = ScriptRunner(order_override=current, jobs=jobs, space=space)
        if space is not None:
            transcript.total_order = runner.space.total_order
        try:
            _execute(text, runner, transcript)
            return transcript
        except OrderExceeded as exc:
            if not auto_raise:
                raise
            now = runner.space.total_order if runner.space is not None else (current or 1)
            nxt = max(exc.required_order, 2 * now)
            if now >= max_order:
                raise
            current = min(nxt, max_order)
