"""Dubrovin-Novikov homogeneous operators: metrics, connections, flatness,
first- and third-order operators and Casimirs.

Index conventions: ``christoffel_lc`` returns ``lower[i][j][k] = Gamma^i_{jk}``
and ``upper[i][j][k] = Gamma^{ij}_k = -g^{is} Gamma^j_{sk}``.  Derivatives
``g_{ij,k}`` are partials by the metric's coordinates, which are the order-0
dependent variables in the hydrodynamic setting and ``b^k_x`` in potential
form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import AntisymmetryViolation, AsymmetricMetric, ShapeMismatch, SingularMatrix
from .jetspace import SpaceSpec, total_derivative
from .kernel import EvenJet, Expr, Parameter
from .linalg import determinant, matrix_inverse
from .schouten import CDiffOp, op_apply, op_compose
from .varcalc import euler_df

__all__ = [
    "MetricField",
    "ConnectionField",
    "matrix_inverse",
    "christoffel_lc",
    "riemann_tensor",
    "riemann_is_flat",
    "dn1_operator",
    "dn1_from_metric",
    "dn3_c_from_g",
    "dn3_operator",
    "check_dn3_conditions",
    "check_gamma_linear",
    "casimir_check",
    "casimir_construct",
]


def _zeros(space, *shape):
    if len(shape) == 1:
        return [Expr(space) for _ in range(shape[0])]
    return [_zeros(space, *shape[1:]) for _ in range(shape[0])]


class MetricField:
    """Symmetric nondegenerate matrix of even functions of ``coords``.

    ``index`` records whether the entries are ``g_{ij}`` ("lower") or
    ``g^{ij}`` ("upper"); :meth:`lower` and :meth:`upper` convert.
    ``coords`` defaults to the order-0 dependent variables; pass
    ``potential=True`` to use ``b^k_x`` instead.
    """

    def __init__(self, matrix, space: SpaceSpec | None = None, *, index: str = "lower",
                 coords: Sequence | None = None, potential: bool = False, check: bool = True):
        if space is None:
            space = next((e.space for r in matrix for e in r if isinstance(e, Expr)), None)
            if space is None:
                raise ShapeMismatch("cannot infer the space of a matrix of plain numbers")
        n = len(matrix)
        if any(len(r) != n for r in matrix):
            raise ShapeMismatch("metric must be square")
        if index not in ("lower", "upper"):
            raise ValueError("index must be 'lower' or 'upper'")
        if coords is None:
            sigma = tuple(1 if (potential and l == 0) else 0 for l in range(space.m))
            coords = [EvenJet(i, sigma) for i in range(len(space.dep))]
        coords = [space.atom(c) if isinstance(c, str) else c for c in coords]
        if len(coords) != n:
            raise ShapeMismatch(f"{n}x{n} metric needs {n} coordinates, got {len(coords)}")
        self.space = space
        self.n = n
        self.index = index
        self.coords = tuple(coords)
        self.matrix = [[space.expr(e) for e in r] for r in matrix]
        self._inverse = None
        if check:
            allowed = set(self.coords)
            for i in range(n):
                for j in range(n):
                    e = self.matrix[i][j]
                    if not e.is_even_function():
                        raise ShapeMismatch("metric entries must be even functions")
                    if j > i and e != self.matrix[j][i]:
                        raise AsymmetricMetric(f"entries ({i},{j}) and ({j},{i}) differ")
                    for a in e.atoms():
                        if not (a in allowed or isinstance(a, Parameter)):
                            raise ShapeMismatch(
                                f"metric entry ({i},{j}) depends on {space.atom_name(a)}, not a metric coordinate"
                            )
            if determinant(self.matrix, space).is_zero():
                raise SingularMatrix("metric is degenerate")

    def __getitem__(self, ij):
        i, j = ij
        return self.matrix[i][j]

    def inverse_matrix(self) -> list[list[Expr]]:
        if self._inverse is None:
            self._inverse = matrix_inverse(self.matrix, self.space)
        return self._inverse

    def _other(self, index):
        return MetricField(self.inverse_matrix(), self.space, index=index, coords=self.coords, check=False)

    def lower(self) -> "MetricField":
        return self if self.index == "lower" else self._other("lower")

    def upper(self) -> "MetricField":
        return self if self.index == "upper" else self._other("upper")

    def partial(self, i: int, j: int, k: int) -> Expr:
        """g_{ij,k} for the stored index position."""
        return self.matrix[i][j].partial(self.coords[k])

    def velocities(self) -> list[Expr]:
        """Total x-derivatives of the coordinates (``u^k_x`` or ``b^k_xx``)."""
        return [total_derivative(self.space.atom_expr(c), 0) for c in self.coords]


@dataclass
class ConnectionField:
    """Connection coefficients in both index positions."""

    lower: list  # lower[i][j][k] = Gamma^i_{jk}
    upper: list  # upper[i][j][k] = Gamma^{ij}_k
    metric: MetricField | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.upper)

    def is_symmetric(self) -> bool:
        n = self.n
        return all(self.lower[i][j][k] == self.lower[i][k][j] for i in range(n) for j in range(n) for k in range(j))


def christoffel_lc(g: MetricField) -> ConnectionField:
    """Levi-Civita symbols of ``g`` (either index position is accepted)."""
    gl = g.lower()
    gu = g.upper().matrix
    n, sp = g.n, g.space
    dg = [[[gl.partial(i, j, k) for k in range(n)] for j in range(n)] for i in range(n)]
    # first kind: [jk, s] = 1/2 (g_{sk,j} + g_{sj,k} - g_{jk,s})
    first = [
        [[(dg[s][k][j] + dg[s][j][k] - dg[j][k][s]) * sp.const(Fraction(1, 2)) for s in range(n)] for k in range(n)]
        for j in range(n)
    ]
    lower = _zeros(sp, n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = Expr(sp)
                for s in range(n):
                    if gu[i][s].terms and first[j][k][s].terms:
                        acc = acc + gu[i][s] * first[j][k][s]
                lower[i][j][k] = acc
                lower[i][k][j] = acc
    upper = _zeros(sp, n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = Expr(sp)
                for s in range(n):
                    if gu[i][s].terms and lower[j][s][k].terms:
                        acc = acc - gu[i][s] * lower[j][s][k]
                upper[i][j][k] = acc
    return ConnectionField(lower, upper, gl)


def riemann_tensor(g: MetricField) -> list:
    """R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{kp} G^p_{lj} - G^i_{lp} G^p_{kj}."""
    G = christoffel_lc(g).lower
    n, sp, coords = g.n, g.space, g.coords
    dG = [[[[G[i][j][k].partial(coords[l]) for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)]
    R = _zeros(sp, n, n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(k + 1, n):
                    acc = dG[i][l][j][k] - dG[i][k][j][l]
                    for p in range(n):
                        acc = acc + G[i][k][p] * G[p][l][j] - G[i][l][p] * G[p][k][j]
                    R[i][j][k][l] = acc
                    R[i][j][l][k] = -acc
    return R


def riemann_is_flat(g: MetricField) -> bool:
    R = riemann_tensor(g)
    return all(c.is_zero() for a in R for b in a for r in b for c in r)


def _check_single_x(space):
    if space.m != 1:
        raise ShapeMismatch("homogeneous operators are defined for one independent variable")


def dn1_operator(h_upper, gamma_upper, velocities: Sequence[Expr] | None = None) -> CDiffOp:
    """First-order operator h^{ij} D_x + Gamma^{ij}_k u^k_x."""
    if not isinstance(h_upper, MetricField):
        h_upper = MetricField(h_upper, index="upper", check=False)
    if isinstance(gamma_upper, ConnectionField):
        gamma_upper = gamma_upper.upper
    sp, n = h_upper.space, h_upper.n
    _check_single_x(sp)
    h = h_upper.upper().matrix
    if len(gamma_upper) != n or any(len(r) != n or any(len(c) != n for c in r) for r in gamma_upper):
        raise ShapeMismatch("connection shape does not match the metric")
    vel = list(velocities) if velocities is not None else h_upper.velocities()
    comps = {}
    for i in range(n):
        for j in range(n):
            zero_term = Expr(sp)
            for k in range(n):
                c = sp.expr(gamma_upper[i][j][k])
                if c.terms:
                    zero_term = zero_term + c * vel[k]
            comps[(i, j)] = {(0,): zero_term, (1,): h[i][j]}
    return CDiffOp(sp, n, n, comps)


def dn1_from_metric(h: MetricField) -> CDiffOp:
    """First-order operator of a metric with its Levi-Civita connection."""
    return dn1_operator(h.upper(), christoffel_lc(h))


@dataclass
class DN3Coefficients:
    lower: list  # lower[s][k][m] = c_{skm}
    upper: list  # upper[p][q][k] = c^{pq}_k


def dn3_c_from_g(g: MetricField) -> DN3Coefficients:
    """c_{skm} = 1/3 (g_{sm,k} - g_{sk,m}) and c^{pq}_k = g^{pj} g^{qi} c_{ijk}."""
    gl = g.lower()
    gu = g.upper().matrix
    n, sp = g.n, g.space
    third = sp.const(Fraction(1, 3))
    dg = [[[gl.partial(i, j, k) for k in range(n)] for j in range(n)] for i in range(n)]
    low = _zeros(sp, n, n, n)
    for s in range(n):
        for k in range(n):
            for m in range(n):
                low[s][k][m] = (dg[s][m][k] - dg[s][k][m]) * third
    # half[p][i][k] = sum_j g^{pj} c_{ijk}
    half = _zeros(sp, n, n, n)
    for p in range(n):
        for i in range(n):
            for k in range(n):
                acc = Expr(sp)
                for j in range(n):
                    if gu[p][j].terms and low[i][j][k].terms:
                        acc = acc + gu[p][j] * low[i][j][k]
                half[p][i][k] = acc
    up = _zeros(sp, n, n, n)
    for p in range(n):
        for q in range(n):
            for k in range(n):
                acc = Expr(sp)
                for i in range(n):
                    if gu[q][i].terms and half[p][i][k].terms:
                        acc = acc + gu[q][i] * half[p][i][k]
                up[p][q][k] = acc
    return DN3Coefficients(low, up)


def dn3_operator(g: MetricField, form: str = "hydrodynamic") -> CDiffOp:
    """Third-order operator of a metric.

    ``form="hydrodynamic"``: D_x (g^{ij} D_x + c^{ij}_k u^k_x) D_x.
    ``form="potential"``: -(g^{ij} D_x + c^{ij}_k b^k_xx), for a metric whose
    coordinates are ``b^k_x``.
    """
    sp, n = g.space, g.n
    _check_single_x(sp)
    if form not in ("hydrodynamic", "potential"):
        raise ValueError("form must be 'hydrodynamic' or 'potential'")
    gu = g.upper().matrix
    c = dn3_c_from_g(g).upper
    vel = g.velocities()
    comps = {}
    for i in range(n):
        for j in range(n):
            zero_term = Expr(sp)
            for k in range(n):
                if c[i][j][k].terms:
                    zero_term = zero_term + c[i][j][k] * vel[k]
            comps[(i, j)] = {(0,): zero_term, (1,): gu[i][j]}
    inner = CDiffOp(sp, n, n, comps)
    if form == "potential":
        return -inner
    D = CDiffOp.derivative(sp, n)
    return op_compose(op_compose(D, inner), D)


@dataclass
class DN3Report:
    """Residuals of the third-order Hamiltonian conditions.

    ``cyclic[m][k][s] = g_{mk,s} + g_{ks,m} + g_{ms,k}`` and
    ``quadratic[m][s][k][l] = c_{msk,l} + g^{pq} c_{pml} c_{qsk}``.
    """

    cyclic: list
    quadratic: list

    @property
    def cyclic_holds(self) -> bool:
        return all(e.is_zero() for a in self.cyclic for b in a for e in b)

    @property
    def quadratic_holds(self) -> bool:
        return all(e.is_zero() for a in self.quadratic for b in a for c in b for e in c)

    @property
    def holds(self) -> bool:
        return self.cyclic_holds and self.quadratic_holds

    def __bool__(self):
        return self.holds


def check_dn3_conditions(g: MetricField) -> DN3Report:
    gl = g.lower()
    gu = g.upper().matrix
    n, sp = g.n, g.space
    dg = [[[gl.partial(i, j, k) for k in range(n)] for j in range(n)] for i in range(n)]
    cyc = [[[dg[m][k][s] + dg[k][s][m] + dg[m][s][k] for s in range(n)] for k in range(n)] for m in range(n)]
    c = dn3_c_from_g(gl).lower
    quad = _zeros(sp, n, n, n, n)
    for m in range(n):
        for s in range(n):
            for k in range(n):
                for l in range(n):
                    acc = c[m][s][k].partial(g.coords[l])
                    for p in range(n):
                        if not c[p][m][l].terms:
                            continue
                        for q in range(n):
                            if gu[p][q].terms and c[q][s][k].terms:
                                acc = acc + gu[p][q] * c[p][m][l] * c[q][s][k]
                    quad[m][s][k][l] = acc
    return DN3Report(cyc, quad)


@dataclass
class GammaReport:
    """Residuals of the linear first-order conditions.

    ``symmetrisation[i][j][k] = Gamma^{ij}_k + Gamma^{ji}_k - d_k h^{ij}`` and
    ``compatibility[i][j][k] = h^{is} Gamma^{jk}_s - h^{js} Gamma^{ik}_s``.
    """

    symmetrisation: list
    compatibility: list

    @property
    def holds(self) -> bool:
        return all(e.is_zero() for t in (self.symmetrisation, self.compatibility) for a in t for b in a for e in b)

    def __bool__(self):
        return self.holds


def check_gamma_linear(h_upper: MetricField, gamma_upper) -> GammaReport:
    if isinstance(gamma_upper, ConnectionField):
        gamma_upper = gamma_upper.upper
    h = h_upper.upper()
    n, sp = h.n, h.space
    G = [[[sp.expr(e) for e in r] for r in m] for m in gamma_upper]
    sym = [
        [[G[i][j][k] + G[j][i][k] - h.partial(i, j, k) for k in range(n)] for j in range(n)]
        for i in range(n)
    ]
    comp = _zeros(sp, n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = Expr(sp)
                for s in range(n):
                    acc = acc + h.matrix[i][s] * G[j][k][s] - h.matrix[j][s] * G[i][k][s]
                comp[i][j][k] = acc
    return GammaReport(sym, comp)


def casimir_check(A: CDiffOp, C: Sequence) -> list[list[Expr]]:
    """A(delta C^alpha / delta u) for each density; all zero certifies Casimirs."""
    if not A.is_square():
        raise ShapeMismatch("Casimirs are defined for square operators")
    sp = A.space
    return [op_apply(A, list(euler_df(sp.expr(c)).even_part)) for c in C]


def casimir_construct(psi, omega, space: SpaceSpec) -> list[Expr]:
    """C^alpha = (1/2 psi^alpha_{mk} b^k_x + omega^alpha_m) b^m.

    ``psi[alpha]`` must be antisymmetric constant matrices and ``omega[alpha]``
    constant vectors.
    """
    _check_single_x(space)
    n = len(space.dep)
    b = space.dep_vars()
    bx = [total_derivative(v, 0) for v in b]
    if len(psi) != len(omega):
        raise ShapeMismatch("psi and omega must list the same number of Casimirs")
    half = space.const(Fraction(1, 2))
    out = []
    for P, w in zip(psi, omega):
        if len(P) != n or any(len(r) != n for r in P) or len(w) != n:
            raise ShapeMismatch(f"psi entries must be {n}x{n} and omega entries of length {n}")
        P = [[space.expr(e) for e in r] for r in P]
        for i in range(n):
            for j in range(i, n):
                if P[i][j] != -P[j][i]:
                    raise AntisymmetryViolation(f"psi[{i}][{j}] != -psi[{j}][{i}]")
        acc = Expr(space)
        for m in range(n):
            coeff = space.expr(w[m])
            for k in range(n):
                if P[m][k].terms:
                    coeff = coeff + half * P[m][k] * bx[k]
            acc = acc + coeff * b[m]
        out.append(acc)
    return out
