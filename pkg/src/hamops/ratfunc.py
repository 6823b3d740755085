"""Exact multivariate rational functions over QQ.

Numerator and denominator are ``flint.fmpq_mpoly`` values in a shared
context.  Every instance is kept reduced: ``gcd(num, den) == 1`` and the
denominator is monic with respect to the context's monomial order, so two
equal rational functions always have identical fields.
"""

from __future__ import annotations

from fractions import Fraction

import flint

__all__ = ["RationalFunction", "to_fmpq"]


def to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return flint.fmpq(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, reduced: bool = False):
        if den is None:
            self.num = num
            self.den = num.context().constant(1)
            return
        if not reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, ctx, value) -> "RationalFunction":
        return cls(ctx.constant(to_fmpq(value)))

    @property
    def ctx(self):
        return self.num.context()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.is_constant()

    def constant_value(self) -> flint.fmpq:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.leading_coefficient() if not self.num.is_zero() else flint.fmpq(0)

    def used_gens(self) -> list[int]:
        """Indices of the generators this function actually depends on."""
        nd = self.num.degrees()
        if self.den.is_one():
            return [k for k, d in enumerate(nd) if d]
        dd = self.den.degrees()
        return [k for k in range(len(nd)) if nd[k] or dd[k]]

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduced=True)

    def __add__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        a, b = self, other
        if a.den.is_one() and b.den.is_one():
            return RationalFunction(a.num + b.num)
        if a.den == b.den:
            return RationalFunction(a.num + b.num, a.den)
        g = a.den.gcd(b.den)
        if g.is_one():
            return RationalFunction(a.num * b.den + b.num * a.den, a.den * b.den)
        ad = a.den / g
        bd = b.den / g
        return RationalFunction(a.num * bd + b.num * ad, a.den * bd)

    def __sub__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        a, b = self, other
        if a.den.is_one() and b.den.is_one():
            return RationalFunction(a.num * b.num)
        # cross-cancel before multiplying so the result needs no further gcd
        g1 = a.num.gcd(b.den)
        g2 = b.num.gcd(a.den)
        n1 = a.num / g1 if not g1.is_one() else a.num
        d2 = b.den / g1 if not g1.is_one() else b.den
        n2 = b.num / g2 if not g2.is_one() else b.num
        d1 = a.den / g2 if not g2.is_one() else a.den
        num = n1 * n2
        den = d1 * d2
        if num.is_zero():
            return RationalFunction(num)
        return RationalFunction(*_monic(num, den), reduced=True)

    def scale(self, c) -> "RationalFunction":
        c = to_fmpq(c)
        if c == 0:
            return RationalFunction(self.num * 0)
        return RationalFunction(self.num * c, self.den, reduced=True)

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("rational function division by zero")
        return RationalFunction(*_monic(self.den, self.num), reduced=True)

    def __truediv__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction(self.num**k, self.den**k, reduced=True)

    def derivative(self, gen: int) -> "RationalFunction":
        dn = self.num.derivative(gen)
        if self.den.is_one():
            return RationalFunction(dn)
        dd = self.den.derivative(gen)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __repr__(self):
        if self.den.is_one():
            return f"RationalFunction({self.num})"
        return f"RationalFunction(({self.num})/({self.den}))"


def _monic(num, den):
    lc = den.leading_coefficient()
    if lc != 1:
        inv = 1 / lc
        return num * inv, den * inv
    return num, den


def _reduce(num, den):
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return num, den.context().constant(1)
    if den.is_constant():
        return num * (1 / den.leading_coefficient()), den.context().constant(1)
    g = num.gcd(den)
    if not g.is_one():
        num = num / g
        den = den / g
    return _monic(num, den)
