"""Canonical graded expressions over jet atoms.

An :class:`Expr` is a finite sum of terms ``coeff * oddmon`` where ``coeff``
is an exact rational function of the even atoms (independent variables,
parameters, even jet coordinates) and ``oddmon`` is a strictly increasing
tuple of odd-coordinate ids.  The ids are assigned by the space in canonical
order, so sorting ids sorts the odd factors; a repeated id kills the term.

Expressions are immutable values.  They are built through a space
(see :mod:`hamops.jetspace`), e.g. ``s.expr("u*u_x")`` or ``s.var("u")``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Union

import flint

from .errors import ParityViolation, SpaceMismatch, UnknownAtom
from .ratfunc import RationalFunction, to_fmpq

__all__ = [
    "MultiIndex",
    "mi_order",
    "mi_key",
    "mi_unit",
    "mi_add",
    "IndepVar",
    "Parameter",
    "EvenJet",
    "OddJet",
    "Atom",
    "Expr",
    "add",
    "neg",
    "mul",
    "partial",
    "substitute",
    "parity",
]

# multi-indices ---------------------------------------------------------------
# A multi-index is a tuple of nonnegative counts, one per independent variable.
MultiIndex = tuple


def mi_order(sigma: MultiIndex) -> int:
    return sum(sigma)


def mi_key(sigma: MultiIndex):
    """Canonical multi-index order: graded, then first-variable-heavy first."""
    return (sum(sigma), tuple(-c for c in sigma))


def mi_unit(m: int, lam: int) -> MultiIndex:
    return tuple(1 if k == lam else 0 for k in range(m))


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


# atoms -----------------------------------------------------------------------
@dataclass(frozen=True)
class IndepVar:
    index: int


@dataclass(frozen=True)
class Parameter:
    name: str


@dataclass(frozen=True)
class EvenJet:
    dep: int
    sigma: MultiIndex


@dataclass(frozen=True)
class OddJet:
    odd: int
    sigma: MultiIndex


Atom = Union[IndepVar, Parameter, EvenJet, OddJet]


# odd monomial products ---------------------------------------------------------
@lru_cache(maxsize=1 << 17)
def merge_odd(a: tuple, b: tuple):
    """Graded product of two sorted odd monomials.

    Returns ``(sign, merged)`` or ``None`` if an odd atom repeats.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    la, lb = len(a), len(b)
    i = j = 0
    out = []
    sign = 1
    while i < la and j < lb:
        x = a[i]
        y = b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
            if (la - i) & 1:
                sign = -sign
        else:
            return None
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def sort_odd(ids: Iterable[int]):
    """Sort a sequence of odd ids, returning ``(sign, tuple)`` or ``None``."""
    seq = list(ids)
    if len(set(seq)) != len(seq):
        return None
    sign = 1
    # insertion sort; monomials are short
    for k in range(1, len(seq)):
        x = seq[k]
        j = k - 1
        while j >= 0 and seq[j] > x:
            seq[j + 1] = seq[j]
            j -= 1
            sign = -sign
        seq[j + 1] = x
    return sign, tuple(seq)


# expressions -------------------------------------------------------------------
Scalar = Union[int, Fraction, flint.fmpq]


class Expr:
    """Immutable graded expression.  ``terms`` maps odd monomial -> coefficient."""

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space, terms: Mapping[tuple, RationalFunction] | None = None):
        self.space = space
        self.terms = dict(terms) if terms else {}
        self._hash = None

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, space) -> "Expr":
        return cls(space)

    @classmethod
    def constant(cls, space, value: Scalar) -> "Expr":
        v = to_fmpq(value)
        if v == 0:
            return cls(space)
        return cls(space, {(): RationalFunction(space.ctx.constant(v))})

    @classmethod
    def from_coefficient(cls, space, coeff: RationalFunction, oddmon: tuple = ()) -> "Expr":
        if coeff.is_zero():
            return cls(space)
        return cls(space, {oddmon: coeff})

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.space != self.space:
                raise SpaceMismatch("expressions live on different spaces")
            return other
        if isinstance(other, (int, Fraction, flint.fmpq)) or isinstance(other, Rational):
            return Expr.constant(self.space, Fraction(other) if not isinstance(other, flint.fmpq) else other)
        raise TypeError(f"cannot combine Expr with {type(other).__name__}")

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def odd_degrees(self) -> set[int]:
        return {len(m) for m in self.terms}

    def is_even_function(self) -> bool:
        """True when no term carries odd factors."""
        return all(not m for m in self.terms)

    def parity(self) -> str:
        return parity(self)

    def coefficient(self, oddmon: tuple = ()) -> RationalFunction:
        c = self.terms.get(oddmon)
        return c if c is not None else RationalFunction(self.space.ctx.constant(0))

    def even_part(self) -> RationalFunction:
        return self.coefficient(())

    def atoms(self) -> set:
        """All atoms the expression depends on."""
        out = set()
        sp = self.space
        for mon, c in self.terms.items():
            for g in c.used_gens():
                out.add(sp.gen_atoms[g])
            for oid in mon:
                out.add(sp.odd_atoms[oid])
        return out

    def is_constant(self) -> bool:
        if not self.terms:
            return True
        return len(self.terms) == 1 and () in self.terms and self.terms[()].is_constant()

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return Expr(self.space, {m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            prev = out.get(m)
            if prev is None:
                out[m] = c
            else:
                s = prev + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Expr(self.space, out)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return self.scale(other)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return self.scale(other)
        return NotImplemented

    def scale(self, value) -> "Expr":
        v = to_fmpq(value)
        if v == 0:
            return Expr(self.space)
        return Expr(self.space, {m: c.scale(v) for m, c in self.terms.items()})

    def times_coefficient(self, coeff: RationalFunction) -> "Expr":
        if coeff.is_zero():
            return Expr(self.space)
        out = {}
        for m, c in self.terms.items():
            p = c * coeff
            if not p.is_zero():
                out[m] = p
        return Expr(self.space, out)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            v = to_fmpq(other)
            if v == 0:
                raise ZeroDivisionError("division by zero")
            return self.scale(1 / v)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other.is_even_function():
            raise ParityViolation("cannot divide by an expression with odd factors")
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return self.times_coefficient(other.terms[()].inverse())

    def __rtruediv__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if self.is_even_function():
            if not self.terms:
                if k < 0:
                    raise ZeroDivisionError("zero to a negative power")
                return Expr.constant(self.space, 1 if k == 0 else 0)
            return Expr(self.space, {(): self.terms[()] ** k})
        if k < 0:
            raise ParityViolation("negative power of an expression with odd factors")
        out = Expr.constant(self.space, 1)
        for _ in range(k):
            out = out * self
        return out

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            other = Expr.constant(self.space, other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset((m, hash(c)) for m, c in self.terms.items())))
        return self._hash

    # calculus -------------------------------------------------------------
    def partial(self, atom) -> "Expr":
        return partial(self, atom)

    def substitute(self, bindings) -> "Expr":
        return substitute(self, bindings)

    def __repr__(self):
        from .cli.serialize import to_text

        return f"Expr({to_text(self)})"

    def __str__(self):
        from .cli.serialize import to_text

        return to_text(self)

    def __reduce__(self):
        terms = [
            (m, _poly_state(c.num), _poly_state(c.den)) for m, c in self.terms.items()
        ]
        return (_rebuild_expr, (self.space, terms))


def _poly_state(p):
    return [(e, int(c.p), int(c.q)) for e, c in p.to_dict().items()]


def _rebuild_expr(space, terms):
    ctx = space.ctx
    out = {}
    for m, num, den in terms:
        n = ctx.from_dict({e: flint.fmpq(p, q) for e, p, q in num})
        d = ctx.from_dict({e: flint.fmpq(p, q) for e, p, q in den})
        out[m] = RationalFunction(n, d, reduced=True)
    return Expr(space, out)


# module-level operations -------------------------------------------------------
def add(a: Expr, b: Expr) -> Expr:
    return a + b


def neg(a: Expr) -> Expr:
    return -a


def mul(a: Expr, b: Expr) -> Expr:
    """Graded product: odd monomials concatenate and re-sort with sign."""
    if a.space != b.space:
        raise SpaceMismatch("expressions live on different spaces")
    if not a.terms or not b.terms:
        return Expr(a.space)
    out: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            r = merge_odd(ma, mb)
            if r is None:
                continue
            sign, m = r
            c = ca * cb
            if sign < 0:
                c = -c
            prev = out.get(m)
            out[m] = c if prev is None else prev + c
    return Expr(a.space, {m: c for m, c in out.items() if not c.is_zero()})


def partial(a: Expr, atom) -> Expr:
    """Partial derivative by an atom; the odd case is the left derivative."""
    sp = a.space
    if isinstance(atom, OddJet):
        oid = sp.odd_index(atom)
        out = {}
        for m, c in a.terms.items():
            try:
                k = m.index(oid)
            except ValueError:
                continue
            nm = m[:k] + m[k + 1 :]
            out[nm] = -c if k & 1 else c
        return Expr(sp, out)
    g = sp.gen_index(atom)
    out = {}
    for m, c in a.terms.items():
        d = c.derivative(g)
        if not d.is_zero():
            out[m] = d
    return Expr(sp, out)


def parity(a: Expr) -> str:
    degs = {len(m) & 1 for m in a.terms}
    if not degs or degs == {0}:
        return "even"
    if degs == {1}:
        return "odd"
    return "mixed"


def _eval_poly(poly, values, target_ctx):
    """Evaluate a polynomial at rational-function values (slow path)."""
    result = RationalFunction(target_ctx.constant(0))
    cache: dict = {}
    for exps, coeff in poly.terms():
        term = RationalFunction(target_ctx.constant(coeff))
        for g, e in enumerate(exps):
            if e:
                key = (g, e)
                pw = cache.get(key)
                if pw is None:
                    pw = values[g] ** e
                    cache[key] = pw
                term = term * pw
        result = result + term
    return result


def substitute(a: Expr, bindings: Mapping) -> Expr:
    """Simultaneous, non-prolonging substitution of atoms by expressions.

    Keys are atoms (or coordinate names); values are Exprs or numbers.  When the
    values live on another space, every jet atom of ``a`` must be bound;
    independent variables and parameters carry over by name.
    """
    src = a.space
    norm: dict = {}
    target = src
    for key, val in bindings.items():
        atom = src.atom(key) if isinstance(key, str) else key
        norm[atom] = val
        if isinstance(val, Expr):
            target = val.space
    for atom, val in list(norm.items()):
        if not isinstance(val, Expr):
            val = Expr.constant(target, val)
            norm[atom] = val
        elif val.space != target:
            raise SpaceMismatch("substitution values live on different spaces")
        if isinstance(atom, OddJet):
            if not val.is_zero() and parity(val) != "odd":
                raise ParityViolation(f"odd atom bound to non-odd expression")
        elif not val.is_even_function():
            raise ParityViolation("even atom bound to an expression with odd factors")
    same = target == src
    tctx = target.ctx

    # even generator values
    values: list = []
    all_poly = True
    for g, atom in enumerate(src.gen_atoms):
        v = norm.get(atom)
        if v is not None:
            rf = v.coefficient(())
        elif same:
            rf = RationalFunction(tctx.gens()[g])
        else:
            rf = _carry_over(atom, src, target)
        values.append(rf)
        if rf is not None and not rf.is_polynomial():
            all_poly = False

    def used_ok(c):
        for g in c.used_gens():
            if values[g] is None:
                raise SpaceMismatch(
                    f"atom {src.gen_names[g]} is not bound and has no counterpart in the target space"
                )

    identity = same and not any(isinstance(k, (IndepVar, Parameter, EvenJet)) for k in norm)

    def sub_coeff(c: RationalFunction) -> RationalFunction:
        if identity:
            return c
        used_ok(c)
        vals = [v if v is not None else RationalFunction(tctx.constant(0)) for v in values]
        if all_poly:
            polys = [v.num for v in vals]
            n = c.num.compose(*polys, ctx=tctx)
            if c.den.is_one():
                return RationalFunction(n)
            return RationalFunction(n, c.den.compose(*polys, ctx=tctx))
        n = _eval_poly(c.num, vals, tctx)
        if c.den.is_one():
            return n
        return n / _eval_poly(c.den, vals, tctx)

    out = Expr(target)
    for m, c in a.terms.items():
        coeff = Expr.from_coefficient(target, sub_coeff(c))
        if coeff.is_zero():
            continue
        if not m:
            out = out + coeff
            continue
        prod = coeff
        if not any(src.odd_atoms[oid] in norm for oid in m):
            if same:
                out = out + prod * Expr(target, {m: RationalFunction(tctx.constant(1))})
                continue
        for oid in m:
            atom = src.odd_atoms[oid]
            v = norm.get(atom)
            if v is None:
                if not same:
                    raise SpaceMismatch(f"odd atom {src.odd_names[oid]} is not bound")
                v = Expr(target, {(oid,): RationalFunction(tctx.constant(1))})
            prod = prod * v
        out = out + prod
    return out


def _carry_over(atom, src, target):
    if isinstance(atom, IndepVar):
        name = src.indep[atom.index]
        if name in target.indep:
            return RationalFunction(target.ctx.gens()[target.gen_index(IndepVar(target.indep.index(name)))])
        return None
    if isinstance(atom, Parameter):
        if atom.name in target.params:
            return RationalFunction(target.ctx.gens()[target.gen_index(atom)])
        return None
    return None
