"""Exact linear algebra over the field of even rational functions."""

from __future__ import annotations

from typing import Sequence

from .errors import ShapeMismatch, SingularMatrix
from .kernel import Expr
from .ratfunc import RationalFunction

__all__ = ["matrix_inverse", "determinant", "matmul", "transpose", "identity_matrix"]


def _coeffs(M, space):
    n = len(M)
    rows = []
    for row in M:
        if len(row) != n:
            raise ShapeMismatch("matrix must be square")
        r = []
        for e in row:
            e = space.expr(e)
            if not e.is_even_function():
                raise ShapeMismatch("matrix entries must be even functions")
            r.append(e.coefficient(()))
        rows.append(r)
    return rows


def _space_of(M):
    for row in M:
        for e in row:
            if isinstance(e, Expr):
                return e.space
    raise ShapeMismatch("cannot infer the space of a matrix of plain numbers")


def _eliminate(A, space, want_inverse: bool):
    n = len(A)
    zero = RationalFunction(space.ctx.constant(0))
    one = RationalFunction(space.ctx.constant(1))
    A = [list(r) for r in A]
    inv = [[one if i == j else zero for j in range(n)] for i in range(n)] if want_inverse else None
    det = one
    for col in range(n):
        # prefer the simplest nonzero pivot
        candidates = [r for r in range(col, n) if not A[r][col].is_zero()]
        if not candidates:
            return zero, None
        piv = min(candidates, key=lambda r: (len(A[r][col].num) + len(A[r][col].den), r))
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            if inv is not None:
                inv[col], inv[piv] = inv[piv], inv[col]
            det = -det
        p = A[col][col]
        det = det * p
        pinv = p.inverse()
        A[col] = [x * pinv for x in A[col]]
        if inv is not None:
            inv[col] = [x * pinv for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            f = A[r][col]
            if f.is_zero():
                continue
            A[r] = [a - f * b for a, b in zip(A[r], A[col])]
            if inv is not None:
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    return det, inv


def determinant(M: Sequence[Sequence[Expr]], space=None) -> Expr:
    space = space or _space_of(M)
    det, _ = _eliminate(_coeffs(M, space), space, False)
    return Expr.from_coefficient(space, det)


def matrix_inverse(M: Sequence[Sequence[Expr]], space=None) -> list[list[Expr]]:
    """Exact inverse over the rational-function field.

    Raises :class:`SingularMatrix` when the determinant is identically zero.
    """
    space = space or _space_of(M)
    det, inv = _eliminate(_coeffs(M, space), space, True)
    if inv is None or det.is_zero():
        raise SingularMatrix("matrix is singular")
    return [[Expr.from_coefficient(space, c) for c in row] for row in inv]


def matmul(A, B):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    if A and len(A[0]) != k:
        raise ShapeMismatch("inner dimensions differ")
    space = _space_of(A) if any(isinstance(e, Expr) for r in A for e in r) else _space_of(B)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = Expr(space)
            for t in range(k):
                s = s + A[i][t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


def transpose(A):
    return [list(r) for r in zip(*A)]


def identity_matrix(space, n: int) -> list[list[Expr]]:
    return [[space.const(1 if i == j else 0) for j in range(n)] for i in range(n)]
