"""Independent reference computations in sympy.

Jet coordinates are mapped to derivatives of undefined functions of x, so
total and variational derivatives come from sympy's own calculus rather
than from the code under test.
"""

import re

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr as sym_parse, standard_transformations

from hamops.cli.parser import parse_expr
from hamops.cli.serialize import to_text

X = sp.Symbol("x")
_JET = re.compile(r"^([A-Za-z][A-Za-z0-9]*)_(\d*)x$")


def _names(space):
    return {n: sp.Symbol(n) for n in space.gen_names}


def to_sympy(e):
    """Even Expr -> sympy expression in plain symbols named like the atoms."""
    return sym_parse(to_text(e), local_dict=_names(e.space), transformations=standard_transformations + (convert_xor,))


def from_sympy(x, space):
    return parse_expr(str(sp.together(sp.expand(x))), space)


def functions(space):
    return {d: sp.Function(d)(X) for d in space.dep}


def to_functions(x, space):
    """Replace jet symbols by derivatives of u(x), v(x), ..."""
    F = functions(space)
    sub = {}
    for s in x.free_symbols:
        if s.name in F:
            sub[s] = F[s.name]
            continue
        m = _JET.match(s.name)
        if m and m.group(1) in F:
            sub[s] = sp.diff(F[m.group(1)], X, int(m.group(2) or 1))
    return x.subs(sub)


def from_functions(x, space):
    F = functions(space)
    for d, f in F.items():
        for k in range(space.total_order + 2, 0, -1):
            name = f"{d}_x" if k == 1 else f"{d}_{k}x"
            x = x.subs(sp.diff(f, X, k), sp.Symbol(name))
        x = x.subs(f, sp.Symbol(d))
    return x


def total_derivative(x, space, k=1):
    return from_functions(sp.diff(to_functions(x, space), X, k), space)


def euler(x, space, dep):
    """Euler-Lagrange expression from sympy.calculus.euler."""
    from sympy.calculus.euler import euler_equations

    f = functions(space)[dep]
    eq = euler_equations(to_functions(x, space), [f], [X])[0]
    return from_functions(eq.lhs, space)


def sym_matrix(M):
    return sp.Matrix([[to_sympy(c) for c in row] for row in M])
