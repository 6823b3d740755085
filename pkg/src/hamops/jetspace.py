"""Jet spaces with even and odd dependent variables, and total derivatives.

Coordinates are named the way the Reduce CDE package names them: a count
prefix before each independent variable, variables in declaration order,
e.g. ``u_t2x`` is once by ``t`` and twice by ``x``.  Mixed orderings such as
``v_xt`` do not exist.
"""

from __future__ import annotations

import itertools
import re
from math import comb
from typing import Iterable, Mapping, Sequence

import flint

from .errors import OrderExceeded, UnknownAtom, UnknownName
from .kernel import (
    EvenJet,
    Expr,
    IndepVar,
    OddJet,
    Parameter,
    mi_key,
    mi_order,
)
from .ratfunc import RationalFunction

__all__ = [
    "SpaceSpec",
    "enumerate_coords",
    "total_derivative",
    "prolong",
    "coordinate_count",
]

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")
_RESERVED = {"psi", "td"}


def _split_names(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(v for v in re.split(r"[\s,]+", value.strip()) if v)
    return tuple(value)


class SpaceSpec:
    """Declaration of a jet space truncated at ``total_order``.

    >>> s = SpaceSpec("x", "u", "p", total_order=3)
    >>> s.expr("u*u_x")
    Expr(u*u_x)
    """

    def __init__(
        self,
        indep: Sequence[str] | str,
        dep: Sequence[str] | str,
        odd: Sequence[str] | str = (),
        total_order: int = 5,
        params: Iterable[str] | str = (),
    ):
        self.indep = _split_names(indep)
        self.dep = _split_names(dep)
        self.odd = _split_names(odd)
        self.params = tuple(sorted(set(_split_names(params))))
        self.total_order = int(total_order)
        if self.total_order < 1:
            raise ValueError("total_order must be a positive integer")
        if not self.indep:
            raise ValueError("at least one independent variable is required")
        names = self.indep + self.dep + self.odd + self.params
        for nm in names:
            if not _NAME_RE.match(nm) or nm in _RESERVED:
                raise ValueError(f"invalid variable name {nm!r}")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be pairwise distinct")
        self.m = len(self.indep)
        self._build()

    # identity -------------------------------------------------------------
    def _key(self):
        return (self.indep, self.dep, self.odd, self.params, self.total_order)

    def __eq__(self, other):
        return isinstance(other, SpaceSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __reduce__(self):
        return (SpaceSpec, (self.indep, self.dep, self.odd, self.total_order, self.params))

    def __repr__(self):
        return (
            f"SpaceSpec(indep={list(self.indep)}, dep={list(self.dep)}, odd={list(self.odd)}, "
            f"total_order={self.total_order}, params={list(self.params)})"
        )

    def with_order(self, total_order: int) -> "SpaceSpec":
        return SpaceSpec(self.indep, self.dep, self.odd, total_order, self.params)

    def with_params(self, params: Iterable[str]) -> "SpaceSpec":
        return SpaceSpec(self.indep, self.dep, self.odd, self.total_order, tuple(self.params) + tuple(params))

    # construction ---------------------------------------------------------
    def _build(self):
        m, T = self.m, self.total_order
        sigmas = [s for s in itertools.product(range(T + 1), repeat=m) if sum(s) <= T]
        sigmas.sort(key=mi_key)
        self.sigmas = sigmas
        self._sigma_pos = {s: k for k, s in enumerate(sigmas)}

        gen_atoms: list = [IndepVar(k) for k in range(m)]
        gen_atoms += [Parameter(p) for p in self.params]
        gen_atoms += [EvenJet(i, s) for i in range(len(self.dep)) for s in sigmas]
        self.gen_atoms = gen_atoms
        self.gen_names = [self.atom_name(a) for a in gen_atoms]
        self._gen_index = {a: k for k, a in enumerate(gen_atoms)}
        self.ctx = flint.fmpq_mpoly_ctx.get(tuple(self.gen_names), "degrevlex")
        self._gens = self.ctx.gens()

        # odd ids in canonical order: odd-variable index, then multi-index
        self.odd_atoms = [OddJet(j, s) for j in range(len(self.odd)) for s in sigmas]
        self.odd_names = [self.atom_name(a) for a in self.odd_atoms]
        self._odd_index = {a: k for k, a in enumerate(self.odd_atoms)}

        self._by_name = {}
        for a, nm in zip(self.gen_atoms, self.gen_names):
            self._by_name[nm] = a
        for a, nm in zip(self.odd_atoms, self.odd_names):
            self._by_name[nm] = a

        nvars = len(gen_atoms)
        n_indep_params = m + len(self.params)
        self.gen_order = [0] * nvars
        self.gen_var_name = [""] * nvars
        self.even_next = []
        self.odd_next = []
        for lam in range(m):
            nxt = [None] * nvars
            for g in range(n_indep_params, nvars):
                a = gen_atoms[g]
                s2 = tuple(c + (1 if k == lam else 0) for k, c in enumerate(a.sigma))
                nxt[g] = self._gen_index.get(EvenJet(a.dep, s2), -1)
            self.even_next.append(nxt)
            onxt = []
            for a in self.odd_atoms:
                s2 = tuple(c + (1 if k == lam else 0) for k, c in enumerate(a.sigma))
                onxt.append(self._odd_index.get(OddJet(a.odd, s2), -1))
            self.odd_next.append(onxt)
        for g in range(n_indep_params, nvars):
            a = gen_atoms[g]
            self.gen_order[g] = mi_order(a.sigma)
            self.gen_var_name[g] = self.dep[a.dep]

    # naming ---------------------------------------------------------------
    def sigma_suffix(self, sigma) -> str:
        parts = []
        for c, nm in zip(sigma, self.indep):
            if c == 1:
                parts.append(nm)
            elif c > 1:
                parts.append(f"{c}{nm}")
        return "".join(parts)

    def jet_name(self, base: str, sigma) -> str:
        suf = self.sigma_suffix(sigma)
        return f"{base}_{suf}" if suf else base

    def atom_name(self, atom) -> str:
        if isinstance(atom, IndepVar):
            return self.indep[atom.index]
        if isinstance(atom, Parameter):
            return atom.name
        if isinstance(atom, EvenJet):
            return self.jet_name(self.dep[atom.dep], atom.sigma)
        if isinstance(atom, OddJet):
            return self.jet_name(self.odd[atom.odd], atom.sigma)
        raise UnknownAtom(repr(atom))

    def parse_sigma(self, suffix: str):
        """Parse a derivative suffix such as ``t2x`` into a multi-index."""
        alts = "|".join(re.escape(n) for n in sorted(self.indep, key=len, reverse=True))
        pat = re.compile(rf"(\d*)({alts})")
        counts = [0] * self.m
        pos = 0
        last = -1
        while pos < len(suffix):
            mt = pat.match(suffix, pos)
            if not mt:
                raise UnknownName(f"malformed derivative suffix {suffix!r}")
            k = self.indep.index(mt.group(2))
            if k <= last:
                canonical = None
                raise UnknownName(
                    f"derivative suffix {suffix!r} is not in declaration order "
                    f"(independent variables must appear as {', '.join(self.indep)}); "
                    f"write it as {self._canonical_hint(suffix)!r}"
                )
            cnt = int(mt.group(1)) if mt.group(1) else 1
            if cnt < 1:
                raise UnknownName(f"zero count in derivative suffix {suffix!r}")
            counts[k] = cnt
            last = k
            pos = mt.end()
        return tuple(counts)

    def _canonical_hint(self, suffix: str) -> str:
        alts = "|".join(re.escape(n) for n in sorted(self.indep, key=len, reverse=True))
        counts = [0] * self.m
        for c, nm in re.findall(rf"(\d*)({alts})", suffix):
            counts[self.indep.index(nm)] += int(c) if c else 1
        return self.sigma_suffix(counts)

    def atom(self, name):
        """Resolve a coordinate name (or pass through an atom)."""
        if not isinstance(name, str):
            return name
        a = self._by_name.get(name)
        if a is not None:
            return a
        base, sep, suffix = name.partition("_")
        if sep and suffix:
            sigma = self.parse_sigma(suffix)
            if base in self.dep or base in self.odd:
                order = mi_order(sigma)
                if order > self.total_order:
                    raise OrderExceeded(base, order)
                a = self._by_name.get(self.jet_name(base, sigma))
                if a is not None:
                    return a
        raise UnknownName(f"unknown coordinate {name!r}")

    # lookups --------------------------------------------------------------
    def gen_index(self, atom) -> int:
        try:
            return self._gen_index[atom]
        except KeyError:
            raise UnknownAtom(f"{atom!r} is not an even coordinate of this space") from None

    def odd_index(self, atom) -> int:
        try:
            return self._odd_index[atom]
        except KeyError:
            raise UnknownAtom(f"{atom!r} is not an odd coordinate of this space") from None

    def is_odd_name(self, name: str) -> bool:
        return isinstance(self._by_name.get(name), OddJet)

    # expression builders ----------------------------------------------------
    def var(self, name) -> Expr:
        """The expression consisting of a single coordinate."""
        a = self.atom(name)
        return self.atom_expr(a)

    def atom_expr(self, atom) -> Expr:
        one = self.ctx.constant(1)
        if isinstance(atom, OddJet):
            return Expr(self, {(self.odd_index(atom),): RationalFunction(one)})
        return Expr(self, {(): RationalFunction(self._gens[self.gen_index(atom)])})

    def const(self, value) -> Expr:
        return Expr.constant(self, value)

    def zero(self) -> Expr:
        return Expr(self)

    def expr(self, text) -> Expr:
        """Parse ``text`` in this space (numbers and Exprs pass through)."""
        if isinstance(text, Expr):
            return text
        if not isinstance(text, str):
            return Expr.constant(self, text)
        from .cli.parser import parse_expr

        return parse_expr(text, self)

    def odd_vars(self) -> list[Expr]:
        """Order-zero odd coordinates ``p_1, ..., p_n'`` as expressions."""
        zero = (0,) * self.m
        return [self.atom_expr(OddJet(j, zero)) for j in range(len(self.odd))]

    def dep_vars(self) -> list[Expr]:
        zero = (0,) * self.m
        return [self.atom_expr(EvenJet(i, zero)) for i in range(len(self.dep))]

    def indep_index(self, lam) -> int:
        if isinstance(lam, int):
            if not 0 <= lam < self.m:
                raise UnknownName(f"independent variable index {lam} out of range")
            return lam
        if isinstance(lam, IndepVar):
            return lam.index
        try:
            return self.indep.index(lam)
        except ValueError:
            raise UnknownName(f"{lam!r} is not an independent variable") from None


def coordinate_count(s: SpaceSpec) -> int:
    """Number of jet coordinates predicted by the binomial formula."""
    per_var = comb(s.total_order + s.m, s.m)
    return (len(s.dep) + len(s.odd)) * per_var


def enumerate_coords(s: SpaceSpec) -> list:
    """All jet coordinates: even ones first, each graded by order, then
    variable index, then multi-index order."""
    even = [EvenJet(i, sg) for i in range(len(s.dep)) for sg in s.sigmas]
    odd = [OddJet(j, sg) for j in range(len(s.odd)) for sg in s.sigmas]
    even.sort(key=lambda a: (mi_order(a.sigma), a.dep, mi_key(a.sigma)))
    odd.sort(key=lambda a: (mi_order(a.sigma), a.odd, mi_key(a.sigma)))
    return even + odd


# total derivatives -------------------------------------------------------------
def _td_poly(s: SpaceSpec, poly, lam: int):
    zero = s.ctx.constant(0)
    result = zero
    nxt = s.even_next[lam]
    gens = s._gens
    degs = poly.degrees()
    for g, d in enumerate(degs):
        if not d:
            continue
        ng = nxt[g]
        if ng is None:
            if g == lam:
                result = result + poly.derivative(g)
            continue
        if ng < 0:
            raise OrderExceeded(s.gen_var_name[g], s.gen_order[g] + 1)
        result = result + poly.derivative(g) * gens[ng]
    return result


def td_coefficient(s: SpaceSpec, c: RationalFunction, lam: int) -> RationalFunction:
    dn = _td_poly(s, c.num, lam)
    if c.den.is_one():
        return RationalFunction(dn)
    dd = _td_poly(s, c.den, lam)
    if dd.is_zero():
        return RationalFunction(dn, c.den)
    return RationalFunction(dn * c.den - c.num * dd, c.den * c.den)


def _td_once(a: Expr, lam: int) -> Expr:
    s = a.space
    onext = s.odd_next[lam]
    out: dict = {}

    def acc(m, c):
        prev = out.get(m)
        out[m] = c if prev is None else prev + c

    for mon, c in a.terms.items():
        dc = td_coefficient(s, c, lam)
        if not dc.is_zero():
            acc(mon, dc)
        for k, oid in enumerate(mon):
            nid = onext[oid]
            if nid < 0:
                atom = s.odd_atoms[oid]
                raise OrderExceeded(s.odd[atom.odd], mi_order(atom.sigma) + 1)
            # nid > oid: move it right past smaller successors
            if nid in mon:
                continue
            j = k + 1
            n = len(mon)
            while j < n and mon[j] < nid:
                j += 1
            new = mon[:k] + mon[k + 1 : j] + (nid,) + mon[j:]
            acc(new, -c if (j - k - 1) & 1 else c)
    return Expr(s, {m: c for m, c in out.items() if not c.is_zero()})


def total_derivative(a: Expr, lam=0, k: int = 1) -> Expr:
    """``k``-fold total derivative by the independent variable ``lam``.

    Raises :class:`OrderExceeded` when a needed coordinate lies beyond the
    truncation order of the space.
    """
    if isinstance(a, (int,)):
        raise TypeError("total_derivative needs an Expr")
    lam = a.space.indep_index(lam)
    if k < 0:
        raise ValueError("derivative count must be nonnegative")
    for _ in range(k):
        if not a.terms:
            break
        a = _td_once(a, lam)
    return a


def td_multi(a: Expr, sigma) -> Expr:
    """Total derivative by a multi-index."""
    for lam, c in enumerate(sigma):
        if c:
            a = total_derivative(a, lam, c)
    return a


def prolong(bindings: Mapping, order: int, space: SpaceSpec | None = None, source: SpaceSpec | None = None) -> dict:
    """Extend a binding of dependent variables to their jets up to ``order``.

    ``bindings`` maps dependent-variable names (or order-zero atoms of
    ``source``) to Exprs.  The result maps every jet atom of the bound
    variables with order <= ``order`` to its total derivative, ready for
    :func:`hamops.kernel.substitute`.
    """
    out = {}
    for key, val in bindings.items():
        if space is None:
            space = val.space
        src = source
        if isinstance(key, str):
            if src is None:
                src = space
            base = key
        else:
            if src is None:
                src = space
            base = src.dep[key.dep]
        dep_idx = src.dep.index(base)
        cache = {(0,) * src.m: val}
        for sigma in src.sigmas:
            if mi_order(sigma) > order:
                continue
            if sigma not in cache:
                lam = next(k for k, c in enumerate(sigma) if c)
                prev = tuple(c - (1 if k == lam else 0) for k, c in enumerate(sigma))
                cache[sigma] = total_derivative(cache[prev], lam)
            out[EvenJet(dep_idx, sigma)] = cache[sigma]
    return out
