"""Matrix differential operators in total derivatives and the variational
Schouten bracket.

Operators are stored as coefficient maps ``(i, j) -> {sigma: a}`` meaning
``A(psi)^i = sum_{j,sigma} a^{i(sigma j)} D_sigma psi_j``.  They convert to
degree-1 superfunctions by evaluating on the odd coordinates, and to
bivectors by pairing with ``p_i``.  Bracket results are representatives of
classes modulo total divergences; compare them through ``euler_df``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from math import comb
from typing import Callable, Mapping, NamedTuple, Sequence

from .errors import DegreeViolation, ParityViolation, ShapeMismatch, SingularJacobian, SingularMatrix, SpaceMismatch
from .jetspace import SpaceSpec, prolong, td_multi, total_derivative
from .kernel import EvenJet, Expr, OddJet, mi_add, mi_key, mi_order, substitute
from .linalg import matrix_inverse
from .ratfunc import RationalFunction
from .superfun import Superfun
from .varcalc import EulerResult, adjoint, euler_df, linearize, variational_derivative

__all__ = [
    "CDiffOp",
    "Superfun",
    "op_apply",
    "op_compose",
    "op_to_superfun",
    "superfun_to_op",
    "superfun_to_multivector",
    "schouten_bracket",
    "iszero_schouten_bracket",
    "BracketCheck",
    "lie_derivative",
    "transform_operator_differential",
    "transform_operator_point",
    "hamiltonian_flow",
    "poisson_bracket",
    "check_operator_equation",
    "is_skew_adjoint",
]


def _mi_leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mi_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mi_binom(a, b) -> int:
    out = 1
    for x, y in zip(a, b):
        out *= comb(x, y)
    return out


def _sub_multiindices(sigma):
    """All rho <= sigma."""
    out = [()]
    for c in sigma:
        out = [r + (k,) for r in out for k in range(c + 1)]
    return out


class CDiffOp:
    """Single-argument matrix C-differential operator."""

    __slots__ = ("space", "rows", "cols", "comps")

    def __init__(self, space: SpaceSpec, rows: int, cols: int, comps: Mapping | None = None):
        self.space = space
        self.rows = rows
        self.cols = cols
        clean: dict = {}
        for (i, j), col in (comps or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise ShapeMismatch(f"entry ({i}, {j}) outside a {rows}x{cols} operator")
            entry = {}
            for sigma, a in col.items():
                a = space.expr(a)
                if a.space != space:
                    raise SpaceMismatch("operator coefficient on a different space")
                if not a.is_even_function():
                    raise ParityViolation("operator coefficients must be even functions")
                if a.terms:
                    entry[tuple(sigma)] = a
            if entry:
                clean[(i, j)] = entry
        self.comps = clean

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, space, rows, cols=None):
        return cls(space, rows, rows if cols is None else cols)

    @classmethod
    def identity(cls, space, n):
        z = (0,) * space.m
        return cls(space, n, n, {(i, i): {z: space.const(1)} for i in range(n)})

    @classmethod
    def multiplication(cls, matrix: Sequence[Sequence], space=None):
        """Order-zero operator ``psi -> M psi``."""
        rows = len(matrix)
        cols = len(matrix[0]) if rows else 0
        if space is None:
            space = next(e.space for r in matrix for e in r if isinstance(e, Expr))
        z = (0,) * space.m
        comps = {}
        for i, r in enumerate(matrix):
            for j, e in enumerate(r):
                comps[(i, j)] = {z: space.expr(e)}
        return cls(space, rows, cols, comps)

    @classmethod
    def derivative(cls, space, n: int = 1, lam=0, k: int = 1):
        """Diagonal operator ``D_lam^k``."""
        lam = space.indep_index(lam)
        sigma = tuple(k if l == lam else 0 for l in range(space.m))
        return cls(space, n, n, {(i, i): {sigma: space.const(1)} for i in range(n)})

    @classmethod
    def from_function(cls, space, rows: int, cols: int, fn: Callable):
        """Build an operator from ``fn(i, j, psi)``, linear in ``psi``.

        ``psi`` is a formal odd placeholder; ``fn`` may take total derivatives
        of it and multiply it by even coefficients, as in::

            CDiffOp.from_function(s, 1, 1, lambda i, j, psi: td(psi, "x", 3) + 2 * u * td(psi, "x"))
        """
        if not space.odd:
            raise ShapeMismatch("operators are built on spaces with at least one odd variable")
        psi = space.odd_vars()[0]
        comps = {}
        for i in range(rows):
            for j in range(cols):
                val = space.expr(fn(i, j, psi))
                comps[(i, j)] = _collect_linear(val, 0, "operator entry")
        return cls(space, rows, cols, comps)

    # inspection -----------------------------------------------------------
    def coeff(self, i: int, j: int, sigma) -> Expr:
        return self.comps.get((i, j), {}).get(tuple(sigma), Expr(self.space))

    def entry(self, i: int, j: int) -> dict:
        return dict(self.comps.get((i, j), {}))

    def order(self) -> int:
        return max((mi_order(s) for col in self.comps.values() for s in col), default=0)

    def is_zero(self) -> bool:
        return not self.comps

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, other):
        if not isinstance(other, CDiffOp):
            return NotImplemented
        return (
            self.space == other.space
            and self.rows == other.rows
            and self.cols == other.cols
            and self.comps == other.comps
        )

    __hash__ = None

    # algebra --------------------------------------------------------------
    def _same_shape(self, other):
        if not isinstance(other, CDiffOp):
            raise TypeError("expected a CDiffOp")
        if other.space != self.space:
            raise SpaceMismatch("operators live on different spaces")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("operators have different shapes")

    def __add__(self, other):
        self._same_shape(other)
        comps = {k: dict(v) for k, v in self.comps.items()}
        for key, col in other.comps.items():
            tgt = comps.setdefault(key, {})
            for s, a in col.items():
                tgt[s] = tgt[s] + a if s in tgt else a
        return CDiffOp(self.space, self.rows, self.cols, comps)

    def __neg__(self):
        return CDiffOp(
            self.space,
            self.rows,
            self.cols,
            {k: {s: -a for s, a in col.items()} for k, col in self.comps.items()},
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, CDiffOp):
            return NotImplemented
        return CDiffOp(
            self.space,
            self.rows,
            self.cols,
            {k: {s: a * scalar for s, a in col.items()} for k, col in self.comps.items()},
        )

    __rmul__ = __mul__

    def __matmul__(self, other):
        return op_compose(self, other)

    def __call__(self, psi):
        return op_apply(self, psi)

    def adjoint(self) -> "CDiffOp":
        """Formal adjoint (A*)^{ij} psi_j = sum (-1)^|sigma| D_sigma(a^{j(sigma i)} psi_j)."""
        sp = self.space
        comps: dict = {}
        for (j, i), col in self.comps.items():
            tgt = comps.setdefault((i, j), {})
            for sigma, a in col.items():
                sign = -1 if mi_order(sigma) & 1 else 1
                for rho in _sub_multiindices(sigma):
                    c = td_multi(a, _mi_sub(sigma, rho)) * (sign * _mi_binom(sigma, rho))
                    tgt[rho] = tgt[rho] + c if rho in tgt else c
        return CDiffOp(sp, self.cols, self.rows, comps)

    def to_superfun(self) -> Superfun:
        return op_to_superfun(self)

    def to_bivector(self) -> Expr:
        return superfun_to_multivector(op_to_superfun(self))

    def to_text(self) -> str:
        from .cli.serialize import to_text

        rows = []
        for i in range(self.rows):
            entries = []
            for j in range(self.cols):
                col = self.comps.get((i, j), {})
                parts = []
                for sigma in sorted(col, key=mi_key):
                    d = self.space.sigma_suffix(sigma)
                    c = to_text(col[sigma])
                    if not d:
                        parts.append(f"({c})")
                    else:
                        parts.append(f"({c})*D_{d}")
                entries.append(" + ".join(parts) if parts else "0")
            rows.append("{" + ", ".join(entries) + "}")
        return "{" + ", ".join(rows) + "}"

    def __repr__(self):
        return f"CDiffOp({self.rows}x{self.cols}, {self.to_text()})"


def _collect_linear(val: Expr, odd_var: int | None, what: str) -> dict:
    """Coefficients of p_{j,sigma} in a degree-1 expression -> {(j, sigma): coeff}."""
    sp = val.space
    out: dict = {}
    for mon, c in val.terms.items():
        if len(mon) != 1:
            raise DegreeViolation(f"{what} is not linear in the odd argument")
        atom = sp.odd_atoms[mon[0]]
        if odd_var is not None:
            if atom.odd != odd_var:
                raise DegreeViolation(f"{what} involves an odd variable other than the argument")
            out[atom.sigma] = Expr(sp, {(): c})
        else:
            out[(atom.odd, atom.sigma)] = Expr(sp, {(): c})
    return out


def _deriv_cache(expr: Expr):
    cache = {(0,) * expr.space.m: expr}

    def get(sigma):
        sigma = tuple(sigma)
        v = cache.get(sigma)
        if v is None:
            lam = next(k for k, c in enumerate(sigma) if c)
            prev = tuple(c - (1 if k == lam else 0) for k, c in enumerate(sigma))
            v = total_derivative(get(prev), lam)
            cache[sigma] = v
        return v

    return get


def op_apply(A: CDiffOp, psi: Sequence) -> list[Expr]:
    """A(psi)^i = sum_{j,sigma} a^{i(sigma j)} D_sigma psi_j."""
    psi = [A.space.expr(x) for x in psi]
    if len(psi) != A.cols:
        raise ShapeMismatch(f"operator takes {A.cols} components, got {len(psi)}")
    derivs = [_deriv_cache(x) for x in psi]
    out = []
    for i in range(A.rows):
        acc = Expr(A.space)
        for j in range(A.cols):
            for sigma, a in A.comps.get((i, j), {}).items():
                acc = acc + a * derivs[j](sigma)
        out.append(acc)
    return out


def op_compose(A: CDiffOp, B: CDiffOp) -> CDiffOp:
    """Composition A o B via the Leibniz rule."""
    if A.space != B.space:
        raise SpaceMismatch("operators live on different spaces")
    if A.cols != B.rows:
        raise ShapeMismatch(f"cannot compose {A.rows}x{A.cols} with {B.rows}x{B.cols}")
    sp = A.space
    bcache: dict = {}

    def dB(j, k, tau, rho):
        key = (j, k, tau)
        get = bcache.get(key)
        if get is None:
            get = _deriv_cache(B.comps[(j, k)][tau])
            bcache[key] = get
        return get(rho)

    comps: dict = {}
    for (i, j), acol in A.comps.items():
        for k in range(B.cols):
            bcol = B.comps.get((j, k))
            if not bcol:
                continue
            tgt = comps.setdefault((i, k), {})
            for sigma, a in acol.items():
                subs = _sub_multiindices(sigma)
                for tau in bcol:
                    for rho in subs:
                        c = a * dB(j, k, tau, rho)
                        if not c.terms:
                            continue
                        bn = _mi_binom(sigma, rho)
                        if bn != 1:
                            c = c * bn
                        out_sigma = mi_add(_mi_sub(sigma, rho), tau)
                        tgt[out_sigma] = tgt[out_sigma] + c if out_sigma in tgt else c
    return CDiffOp(sp, A.rows, B.cols, comps)


def op_to_superfun(A: CDiffOp) -> Superfun:
    """Evaluate the operator on the odd coordinates: component i = a^{i(sigma j)} p_{j sigma}."""
    sp = A.space
    if A.cols != len(sp.odd):
        raise ShapeMismatch("operator columns must match the number of odd variables")
    one = sp.ctx.constant(1)
    comps = []
    for i in range(A.rows):
        acc = Expr(sp)
        for j in range(A.cols):
            for sigma, a in A.comps.get((i, j), {}).items():
                oid = sp.odd_index(OddJet(j, sigma))
                acc = acc + a * Expr(sp, {(oid,): RationalFunction(one)})
        comps.append(acc)
    return Superfun(comps, 1, space=sp)


def superfun_to_op(F: Superfun) -> CDiffOp:
    """Collect the coefficients of p_{j sigma} in each component."""
    if not isinstance(F, Superfun):
        F = Superfun(F)
    if F.degree != 1 and not F.is_zero():
        raise DegreeViolation("only degree-1 superfunctions encode operators")
    sp = F.space
    comps: dict = {}
    for i, comp in enumerate(F.comps):
        for (j, sigma), c in _collect_linear(comp, None, "superfunction component").items():
            comps.setdefault((i, j), {})[sigma] = c
    return CDiffOp(sp, len(F), len(sp.odd), comps)


def superfun_to_multivector(F) -> Expr:
    """Scalar multivector sum_i F^i p_i (the bivector of an operator)."""
    if isinstance(F, CDiffOp):
        F = op_to_superfun(F)
    if not isinstance(F, Superfun):
        F = Superfun(F)
    sp = F.space
    if len(F) != len(sp.odd):
        raise ShapeMismatch("superfunction length must match the number of odd variables")
    out = Expr(sp)
    for comp, p in zip(F.comps, sp.odd_vars()):
        out = out + comp * p
    return out


def _scalar(F) -> Expr:
    if isinstance(F, Superfun):
        if len(F) != 1:
            raise ShapeMismatch("expected a scalar multivector")
        return F.comps[0]
    if isinstance(F, CDiffOp):
        return superfun_to_multivector(F)
    return F


def _grassmann_parity(F: Expr) -> int:
    if F.is_zero():
        return 0
    p = F.parity()
    if p == "mixed":
        raise ParityViolation("the bracket needs parity-homogeneous arguments")
    return 0 if p == "even" else 1


def _var_derivs(F: Expr, jobs: int):
    sp = F.space
    vars_ = list(sp.dep) + list(sp.odd)
    if jobs and jobs > 1 and len(F.terms) > 50:
        with ProcessPoolExecutor(max_workers=min(jobs, len(vars_), os.cpu_count() or 1)) as pool:
            res = list(pool.map(_vd_task, [(F, v) for v in vars_]))
    else:
        res = [variational_derivative(F, v) for v in vars_]
    n = len(sp.dep)
    return res[:n], res[n:]


def _vd_task(args):
    F, v = args
    return variational_derivative(F, v)


def schouten_bracket(F, H, jobs: int = 1) -> Expr:
    """Representative of [F, H] for scalar multivectors F, H.

    [F, H] = sum_i dH/du^i dF/dp_i - (-1)^{(|F|+1)(|H|+1)} dF/du^i dH/dp_i
    with variational derivatives and graded products.
    """
    F = _scalar(F)
    H = _scalar(H)
    if F.space != H.space:
        raise SpaceMismatch("multivectors live on different spaces")
    sp = F.space
    if len(sp.odd) != len(sp.dep):
        raise ShapeMismatch("the bracket pairs each dependent variable with an odd one")
    pF = _grassmann_parity(F)
    pH = _grassmann_parity(H)
    sign = -1 if ((pF + 1) * (pH + 1)) & 1 else 1
    dFu, dFp = _var_derivs(F, jobs)
    if H is F or H == F:
        dHu, dHp = dFu, dFp
    else:
        dHu, dHp = _var_derivs(H, jobs)
    out = Expr(sp)
    for i in range(len(sp.dep)):
        out = out + dHu[i] * dFp[i]
        t = dFu[i] * dHp[i]
        out = out - t if sign > 0 else out + t
    return out


class BracketCheck(NamedTuple):
    is_zero: bool
    witness: EulerResult
    bracket: Expr

    def __bool__(self):
        return self.is_zero


def iszero_schouten_bracket(F, H, jobs: int = 1) -> BracketCheck:
    """Whether [F, H] vanishes modulo total divergences, with the Euler witness."""
    br = schouten_bracket(F, H, jobs=jobs)
    w = euler_df(br, jobs=jobs)
    return BracketCheck(w.is_zero(), w, br)


def vector_field_multivector(tau) -> Expr:
    """Scalar degree-1 superfunction for a vector field."""
    if isinstance(tau, Expr):
        return tau
    if isinstance(tau, Superfun):
        if len(tau) == 1 and tau.degree == 1:
            return tau.comps[0]
        if tau.degree == 0:
            tau = list(tau.comps)
        else:
            raise DegreeViolation("vector field must be degree-0 components or a scalar degree-1 superfunction")
    comps = list(tau)
    sp = comps[0].space
    if len(comps) != len(sp.odd):
        raise ShapeMismatch("vector field needs one component per odd variable")
    out = Expr(sp)
    for c, p in zip(comps, sp.odd_vars()):
        c = sp.expr(c)
        if not c.is_even_function():
            raise ParityViolation("vector field components must be even")
        out = out + c * p
    return out


def lie_derivative(tau, A_biv, jobs: int = 1) -> Expr:
    """Representative of L_tau A = [tau, A]."""
    return schouten_bracket(vector_field_multivector(tau), _scalar(A_biv), jobs=jobs)


def transform_operator_differential(A: CDiffOp, C: Sequence[Expr]) -> CDiffOp:
    """l_C o A o l*_C for a (possibly differential) change of variables C."""
    C = [A.space.expr(c) for c in C]
    if not (len(C) == A.rows == A.cols):
        raise ShapeMismatch("need one new variable per operator row")
    lC = linearize(C)
    l_op = superfun_to_op(lC)
    ls_op = superfun_to_op(adjoint(lC))
    return op_compose(op_compose(l_op, A), ls_op)


def _needed_order(A: CDiffOp) -> int:
    order = 0
    for col in A.comps.values():
        for a in col.values():
            for atom in a.atoms():
                if isinstance(atom, EvenJet):
                    order = max(order, mi_order(atom.sigma))
    return order


def transform_operator_point(A: CDiffOp, forward: Mapping, target: SpaceSpec | None = None) -> CDiffOp:
    """Rewrite A in new coordinates u, given the old ones as functions a(u).

    ``forward`` maps each old dependent variable (name) to an Expr on the
    target space.  The result is J^{-1} A(a(u)) J^{-T} with J = da/du.
    """
    src = A.space
    vals = {k: v for k, v in forward.items()}
    if target is None:
        target = next(iter(vals.values())).space
    if A.rows != A.cols or A.rows != len(src.dep):
        raise ShapeMismatch("point transformations act on square operators over all dependent variables")
    names = [k if isinstance(k, str) else src.dep[k.dep] for k in vals]
    if sorted(names) != sorted(src.dep):
        raise ShapeMismatch("forward map must give every old dependent variable")
    by_name = dict(zip(names, vals.values()))
    old = [target.expr(by_name[nm]) for nm in src.dep]
    new_vars = target.dep_vars()
    zero = (0,) * target.m
    J = [[o.partial(EvenJet(j, zero)) for j in range(len(target.dep))] for o in old]
    try:
        Jinv = matrix_inverse(J, target)
    except SingularMatrix:
        raise SingularJacobian("the coordinate change has a singular Jacobian") from None
    order = _needed_order(A)
    bindings = prolong(dict(zip(src.dep, old)), order, source=src)
    comps = {}
    for key, col in A.comps.items():
        comps[key] = {s: substitute(a, bindings) for s, a in col.items()}
    moved = CDiffOp(target, A.rows, A.cols, comps)
    M = CDiffOp.multiplication(Jinv, target)
    MT = CDiffOp.multiplication([list(r) for r in zip(*Jinv)], target)
    return op_compose(op_compose(M, moved), MT)


def hamiltonian_flow(A: CDiffOp, h: Expr) -> list[Expr]:
    """Right-hand sides A(delta h / delta u)."""
    if not A.is_square():
        raise ShapeMismatch("Hamiltonian operators are square")
    return op_apply(A, list(euler_df(A.space.expr(h)).even_part))


def poisson_bracket(h: Expr, f: Expr, A: CDiffOp) -> Expr:
    """Density representative of {H, F}_A = [dh/du^i A^{ij} df/du^j]."""
    if not A.is_square():
        raise ShapeMismatch("Hamiltonian operators are square")
    sp = A.space
    dh = euler_df(sp.expr(h)).even_part
    Af = op_apply(A, list(euler_df(sp.expr(f)).even_part))
    out = Expr(sp)
    for a, b in zip(dh, Af):
        out = out + a * b
    return out


def check_operator_equation(F: Sequence[Expr], A: CDiffOp) -> CDiffOp:
    """Residual l_F o A + A o l*_F; zero certifies the Hamiltonian condition."""
    F = [A.space.expr(f) for f in F]
    if not A.is_square() or len(F) != A.rows:
        raise ShapeMismatch("need a square operator and one equation per component")
    lF = linearize(F)
    l_op = superfun_to_op(lF)
    ls_op = superfun_to_op(adjoint(lF))
    return op_compose(l_op, A) + op_compose(A, ls_op)


def is_skew_adjoint(A: CDiffOp) -> bool:
    """A* = -A, compared coefficient by coefficient."""
    if not A.is_square():
        raise ShapeMismatch("skew-adjointness needs a square operator")
    return (A + A.adjoint()).is_zero()
