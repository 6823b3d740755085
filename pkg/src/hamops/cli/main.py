"""Command-line entry point: ``hamops run|example|list-examples|eval``."""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import HamopsError, OrderExceeded
from .examples import EXAMPLES, list_examples, run_example
from .script import ScriptRunner, run_script
from .serialize import to_jsonable, value_text


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for bracket and Euler components")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hamops", description="Variational Schouten brackets and Hamiltonian operators")
    ap.add_argument("--example", metavar="ID", help="shortcut for 'hamops example ID'")
    ap.add_argument("--long", action="store_true", help="include long-running checks")
    _common(ap)
    sub = ap.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a script file ('-' reads stdin)")
    run.add_argument("script")
    run.add_argument("--order", type=int, help="total order to use (at least the declared one)")
    run.add_argument("--auto-raise", action="store_true", help="rerun with a larger total order when needed")
    run.add_argument("--max-order", type=int, default=40)
    _common(run)

    ex = sub.add_parser("example", help="run an embedded example")
    ex.add_argument("id", choices=sorted(EXAMPLES))
    ex.add_argument("--long", action="store_true")
    _common(ex)

    sub.add_parser("list-examples", help="list embedded examples")

    ev = sub.add_parser("eval", help="evaluate one expression")
    ev.add_argument("expr")
    ev.add_argument("--space", required=True, help="e.g. 'indep=x dep=u odd=p order=6'")
    ev.add_argument("--order", type=int)
    _common(ev)
    return ap


def _emit(value, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n")
    else:
        out.write(value_text(value) + "\n")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.example or args.command == "example":
            ex_id = args.example or args.id
            report = run_example(ex_id, jobs=args.jobs, long=args.long)
            if args.format == "json":
                _emit(report, "json", out)
            else:
                out.write(report.to_text() + "\n")
            return 0 if report.ok else 1
        if args.command == "list-examples":
            for ex_id, desc, long in list_examples():
                out.write(f"{ex_id:18s} {desc}{' (long)' if long else ''}\n")
            return 0
        if args.command == "run":
            text = sys.stdin.read() if args.script == "-" else open(args.script).read()
            tr = run_script(text, auto_raise=args.auto_raise, max_order=args.max_order, order=args.order, jobs=args.jobs)
            if args.format == "json":
                _emit(tr, "json", out)
            else:
                out.write(tr.text())
            return 0 if tr.ok else 1
        if args.command == "eval":
            runner = ScriptRunner(order_override=args.order, jobs=args.jobs)
            runner.declare_space(args.space)
            _emit(runner.evaluate(args.expr), args.format, out)
            return 0
        build_parser().print_help(out)
        return 2
    except OrderExceeded as exc:
        sys.stderr.write(f"error: {exc} (required order {exc.required_order})\n")
        return 3
    except HamopsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
