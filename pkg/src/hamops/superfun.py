"""Vector-valued superfunctions of fixed Grassmann degree."""

from __future__ import annotations

from typing import Sequence

from .errors import DegreeViolation, ShapeMismatch, SpaceMismatch
from .kernel import Expr

__all__ = ["Superfun"]


class Superfun:
    """A list of Exprs whose terms all carry exactly ``degree`` odd factors.

    Degree-1 superfunctions encode operators (one component per row);
    a length-1 superfunction of degree ``k`` encodes a ``k``-vector.
    """

    __slots__ = ("space", "degree", "comps")

    def __init__(self, comps: Sequence[Expr], degree: int | None = None, space=None):
        comps = list(comps)
        if space is None:
            if not comps:
                raise ShapeMismatch("empty superfunction needs an explicit space")
            space = comps[0].space
        comps = [space.expr(c) for c in comps]
        for c in comps:
            if c.space != space:
                raise SpaceMismatch("superfunction components live on different spaces")
        degs = set().union(*(c.odd_degrees() for c in comps)) if comps else set()
        if degree is None:
            if len(degs) > 1:
                raise DegreeViolation(f"components have mixed odd degrees {sorted(degs)}")
            degree = degs.pop() if degs else 0
        elif degs - {degree}:
            raise DegreeViolation(
                f"declared degree {degree} but components have odd degrees {sorted(degs)}"
            )
        self.space = space
        self.degree = degree
        self.comps = tuple(comps)

    def __len__(self):
        return len(self.comps)

    def __getitem__(self, k):
        return self.comps[k]

    def __iter__(self):
        return iter(self.comps)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def __eq__(self, other):
        if isinstance(other, Superfun):
            return self.space == other.space and self.comps == other.comps
        if isinstance(other, (list, tuple)):
            return len(other) == len(self.comps) and all(a == b for a, b in zip(self.comps, other))
        return NotImplemented

    __hash__ = None

    def _check(self, other):
        if not isinstance(other, Superfun):
            raise TypeError("expected a Superfun")
        if len(other) != len(self):
            raise ShapeMismatch("superfunctions of different lengths")

    def __add__(self, other):
        self._check(other)
        return Superfun([a + b for a, b in zip(self.comps, other.comps)], space=self.space)

    def __sub__(self, other):
        self._check(other)
        return Superfun([a - b for a, b in zip(self.comps, other.comps)], space=self.space)

    def __neg__(self):
        return Superfun([-a for a in self.comps], self.degree, space=self.space)

    def __repr__(self):
        return f"Superfun(degree={self.degree}, comps={list(self.comps)!r})"
