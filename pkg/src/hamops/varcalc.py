"""Variational derivatives, linearization, formal adjoints and coefficient
splitting."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import DegreeViolation, NotPolynomial, ParityViolation, ShapeMismatch, UnknownName
from .jetspace import total_derivative
from .kernel import EvenJet, Expr, OddJet
from .ratfunc import RationalFunction
from .superfun import Superfun

__all__ = [
    "EulerResult",
    "variational_derivative",
    "euler_df",
    "is_total_divergence",
    "linearize",
    "adjoint",
    "alternating_sum",
    "splitext",
    "splitvars",
    "split_system",
]


@dataclass(frozen=True)
class EulerResult:
    """All variational derivatives of a density: even variables, then odd."""

    even_part: tuple
    odd_part: tuple

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.even_part) and all(e.is_zero() for e in self.odd_part)

    def components(self) -> list[Expr]:
        return list(self.even_part) + list(self.odd_part)

    def __iter__(self):
        yield list(self.even_part)
        yield list(self.odd_part)

    def __str__(self):
        from .cli.serialize import value_text

        return value_text(self)


def _resolve_var(space, var):
    """Return ('even'|'odd', index) for a dependent or odd variable."""
    if isinstance(var, EvenJet):
        return "even", var.dep
    if isinstance(var, OddJet):
        return "odd", var.odd
    if isinstance(var, Expr):
        atoms = var.atoms()
        if len(atoms) == 1 and len(var.terms) == 1:
            return _resolve_var(space, atoms.pop())
    if isinstance(var, str):
        if var in space.dep:
            return "even", space.dep.index(var)
        if var in space.odd:
            return "odd", space.odd.index(var)
    raise UnknownName(f"{var!r} is not a dependent or odd variable of the space")


def _partials_by_sigma(f: Expr, kind: str, idx: int) -> dict:
    """Map multi-index sigma -> dF/dw_sigma (left derivative for odd w)."""
    sp = f.space
    groups: dict = {}

    def acc(sigma, mon, c):
        g = groups.setdefault(sigma, {})
        prev = g.get(mon)
        g[mon] = c if prev is None else prev + c

    if kind == "even":
        for mon, c in f.terms.items():
            for gi in c.used_gens():
                atom = sp.gen_atoms[gi]
                if isinstance(atom, EvenJet) and atom.dep == idx:
                    d = c.derivative(gi)
                    if not d.is_zero():
                        acc(atom.sigma, mon, d)
    else:
        for mon, c in f.terms.items():
            for k, oid in enumerate(mon):
                atom = sp.odd_atoms[oid]
                if atom.odd == idx:
                    acc(atom.sigma, mon[:k] + mon[k + 1 :], -c if k & 1 else c)
    return {
        s: Expr(sp, {m: c for m, c in g.items() if not c.is_zero()}) for s, g in groups.items()
    }


def alternating_sum(space, groups: dict) -> Expr:
    """Compute sum over sigma of (-1)^|sigma| D_sigma(groups[sigma]).

    Uses a nested Horner scheme, one independent variable at a time, so each
    total derivative is applied to partial sums instead of to every term.
    """
    groups = {s: e for s, e in groups.items() if not e.is_zero()}
    if not groups:
        return Expr(space)
    return _alt(space, groups, 0)


def _alt(space, groups, lam):
    by_k: dict = {}
    for s, e in groups.items():
        by_k.setdefault(s[lam], {})[s] = e
    if lam == space.m - 1:
        inner = {k: sum(d.values(), Expr(space)) for k, d in by_k.items()}
    else:
        inner = {k: _alt(space, d, lam + 1) for k, d in by_k.items()}
    top = max(inner)
    acc = inner[top]
    for k in range(top - 1, -1, -1):
        acc = inner.get(k, Expr(space)) - total_derivative(acc, lam)
    return acc


def variational_derivative(f: Expr, var) -> Expr:
    """delta f / delta w = sum_sigma (-1)^|sigma| D_sigma(df/dw_sigma)."""
    kind, idx = _resolve_var(f.space, var)
    return alternating_sum(f.space, _partials_by_sigma(f, kind, idx))


def _vd_worker(args):
    f, kind, idx = args
    return alternating_sum(f.space, _partials_by_sigma(f, kind, idx))


def euler_df(f: Expr, jobs: int = 1) -> EulerResult:
    """All even and odd variational derivatives of ``f``, in declaration order.

    With ``jobs > 1`` the components are computed in a process pool.
    """
    sp = f.space
    tasks = [(f, "even", i) for i in range(len(sp.dep))] + [(f, "odd", j) for j in range(len(sp.odd))]
    if jobs and jobs > 1 and len(tasks) > 1 and len(f.terms) > 50:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks), os.cpu_count() or 1)) as pool:
            results = list(pool.map(_vd_worker, tasks))
    else:
        results = [_vd_worker(t) for t in tasks]
    n = len(sp.dep)
    return EulerResult(tuple(results[:n]), tuple(results[n:]))


def is_total_divergence(f: Expr) -> bool:
    """True iff every variational derivative of ``f`` vanishes."""
    return euler_df(f).is_zero()


def linearize(F: Sequence[Expr]) -> Superfun:
    """Frechet derivative of an even vector function, as a degree-1 superfunction."""
    F = list(F)
    if not F:
        raise ShapeMismatch("empty function list")
    sp = F[0].space
    if len(sp.odd) != len(sp.dep):
        raise ShapeMismatch("linearization pairs each dependent variable with an odd one")
    comps = []
    for Fk in F:
        Fk = sp.expr(Fk)
        if not Fk.is_even_function():
            raise ParityViolation("linearize needs even functions without odd factors")
        out = Expr(sp)
        if Fk.terms:
            c = Fk.terms[()]
            acc: dict = {}
            for g in c.used_gens():
                atom = sp.gen_atoms[g]
                if not isinstance(atom, EvenJet):
                    continue
                d = c.derivative(g)
                if d.is_zero():
                    continue
                oid = sp.odd_index(OddJet(atom.dep, atom.sigma))
                acc[(oid,)] = d
            out = Expr(sp, acc)
        comps.append(out)
    return Superfun(comps, 1, space=sp)


def adjoint(L: Superfun) -> Superfun:
    """Formal adjoint of the operator encoded by a degree-1 superfunction.

    Component i is sum_{k,sigma} (-1)^|sigma| D_sigma(C_k^(i,sigma) p_k) where
    C_k^(i,sigma) is the coefficient of p_{i,sigma} in component k of L.
    """
    if not isinstance(L, Superfun):
        L = Superfun(L)
    sp = L.space
    if L.degree != 1 and not L.is_zero():
        raise DegreeViolation("adjoint needs a degree-1 superfunction")
    if len(L) > len(sp.odd):
        raise ShapeMismatch("more components than odd variables")
    pk = sp.odd_vars()
    per_i: list[dict] = [dict() for _ in sp.odd]
    for k, comp in enumerate(L.comps):
        for mon, c in comp.terms.items():
            if len(mon) != 1:
                raise DegreeViolation("adjoint needs terms with exactly one odd factor")
            atom = sp.odd_atoms[mon[0]]
            g = per_i[atom.odd]
            term = Expr(sp, {(): c}) * pk[k]
            prev = g.get(atom.sigma)
            g[atom.sigma] = term if prev is None else prev + term
    return Superfun([alternating_sum(sp, g) for g in per_i], 1, space=sp)


def splitext(f: Expr) -> list[tuple[Expr, Expr]]:
    """Group ``f`` by odd monomial: ``[(monomial, even coefficient), ...]``."""
    sp = f.space
    one = sp.ctx.constant(1)
    out = []
    for mon in sorted(f.terms, key=lambda m: (len(m), m)):
        out.append((Expr(sp, {mon: RationalFunction(one)}), Expr(sp, {(): f.terms[mon]})))
    return out


def splitvars(f: Expr, coords) -> list[tuple[Expr, Expr]]:
    """Split the numerator of an even ``f`` by monomials in ``coords``.

    Returns ``[(monomial in coords, coefficient), ...]``; setting every
    coefficient to zero is equivalent to the numerator vanishing identically
    in ``coords``.
    """
    sp = f.space
    if not f.is_even_function():
        raise NotPolynomial("splitvars needs an even function without odd factors")
    if f.is_zero():
        return []
    coord_gens = {sp.gen_index(sp.atom(a) if not isinstance(a, Expr) else next(iter(a.atoms()))) for a in coords}
    num = f.terms[()].num
    groups: dict = {}
    nv = len(sp.gen_atoms)
    for exps, coeff in num.terms():
        key = tuple(e if g in coord_gens else 0 for g, e in enumerate(exps))
        rest = tuple(0 if g in coord_gens else e for g, e in enumerate(exps))
        groups.setdefault(key, {})
        groups[key][rest] = groups[key].get(rest, 0) + coeff
    out = []
    for key in sorted(groups, reverse=True):
        mono = sp.ctx.from_dict({key: 1})
        coeff = sp.ctx.from_dict(groups[key])
        out.append((Expr(sp, {(): RationalFunction(mono)}), Expr.from_coefficient(sp, RationalFunction(coeff))))
    return out


def split_system(exprs: Sequence[Expr], coords) -> tuple[list[Expr], list[Expr]]:
    """Equations from splitting a list of (possibly odd) expressions.

    Each expression is split by odd monomial, each coefficient's numerator by
    monomials in ``coords``.  Returns ``(equations, denominators)``; the
    denominators are the factors that were cleared and must not vanish.
    """
    eqs: list[Expr] = []
    dens: list[Expr] = []
    for e in exprs:
        for _, coeff in splitext(e):
            c = coeff.terms[()]
            if not c.den.is_one():
                d = Expr(e.space, {(): RationalFunction(c.den)})
                if d not in dens:
                    dens.append(d)
            eqs.extend(cf for _, cf in splitvars(coeff, coords))
    return eqs, dens
