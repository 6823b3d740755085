"""Vendored example data: KdV and WDVV operators, the classified third-order
metrics in three components, the potential-form Darboux example and the
first-order/third-order compatibility family in two components.

Every constructor builds its own space, so the data never depends on
external files.
"""

from __future__ import annotations

from fractions import Fraction

from .dn import MetricField, dn1_from_metric, dn3_operator
from .jetspace import SpaceSpec, total_derivative as td
from .schouten import CDiffOp

__all__ = [
    "kdv_space",
    "kdv_operators",
    "kdv_tau",
    "wdvv4_space",
    "wdvv4_a1",
    "wdvv4_metric",
    "wdvv4_operators",
    "compat3_space",
    "compat3_metric",
    "compat3_operator",
    "darboux_space",
    "darboux_metric",
    "darboux_operator",
    "darboux_casimirs",
    "compat13_space",
    "compat13_metric",
    "compat13_branch",
    "compat13_r3_metric",
    "compat13_operators",
    "wdvv3_abc_space",
    "wdvv3_abc_operators",
    "wdvv3_flat_space",
    "wdvv3_flat_map",
    "wdvv3_K",
    "wdvv3_tau",
]


# KdV -----------------------------------------------------------------------
def kdv_space(total_order: int = 8) -> SpaceSpec:
    return SpaceSpec("x", "u", "p", total_order)


def kdv_operators(space: SpaceSpec | None = None):
    """A1 = D_x and A2 = D_x^3 + 2u D_x + u_x."""
    s = space or kdv_space()
    u = s.var("u")
    A1 = CDiffOp.derivative(s)
    A2 = CDiffOp.from_function(s, 1, 1, lambda i, j, psi: td(psi, 0, 3) + 2 * u * td(psi, 0) + td(u, 0) * psi)
    return A1, A2


def kdv_tau(space: SpaceSpec | None = None):
    """Vector field whose Lie derivative maps A1 to A2: (-u^2/2 - u_2x/2) p."""
    s = space or kdv_space()
    return [s.expr("-1/2*u^2 - 1/2*u_2x")]


# WDVV, N = 4 ---------------------------------------------------------------
def wdvv4_space(total_order: int = 10) -> SpaceSpec:
    return SpaceSpec("x", "a1 a2 a3 a4 a5 a6", "p1 p2 p3 p4 p5 p6", total_order)


def _wdvv4_prsq(s):
    e = s.expr
    P = e("(a3*a4 + a6)/a1")
    R = e("(2*a5 + a2*a4)/a1")
    S = e("(2*a3*a5 - a2*a6)/a1")
    Q = e("a5^2 - a4*a6 + (a3^2*a4 + a3*a6 - 2*a2*a3*a5 + a2^2*a6)/a1")
    return P, R, S, Q


def wdvv4_a1(space: SpaceSpec | None = None) -> CDiffOp:
    """First-order operator M1 D_x + D_x o M2 with M1 = M2^T."""
    s = space or wdvv4_space()
    a1, a2, a3, a4, a5, a6 = s.dep_vars()
    P, R, S, Q = _wdvv4_prsq(s)
    M2 = [
        [0, 0, a1, -1, a2, 2 * a3],
        [0, -1, a2, 0, a4, 2 * a5],
        [0, 0, a3, 0, a5, 2 * a6],
        [-1, 0, a4, 0, R, 2 * P],
        [0, 0, a5, 0, P, 2 * S],
        [0, 0, a6, 0, S, 2 * Q],
    ]
    M2 = [[s.expr(e) for e in r] for r in M2]
    M1 = [list(r) for r in zip(*M2)]
    D = CDiffOp.derivative(s, 6)
    return CDiffOp.multiplication(M1, s) @ D + D @ CDiffOp.multiplication(M2, s)


def wdvv4_metric(space: SpaceSpec | None = None) -> MetricField:
    """Lower-index metric of the third-order operator."""
    s = space or wdvv4_space()
    rows = [
        ["a4^2", "-2*a5", "2*a4", "-(a1*a4 + a3)", "a2", 1],
        ["-2*a5", "-2*a3", "a2", 0, "a1", 0],
        ["2*a4", "a2", 2, "-a1", 0, 0],
        ["-(a1*a4 + a3)", 0, "-a1", "a1^2", 0, 0],
        ["a2", "a1", 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
    ]
    return MetricField([[s.expr(e) for e in r] for r in rows], s)


def wdvv4_operators(space: SpaceSpec | None = None):
    s = space or wdvv4_space()
    return wdvv4_a1(s), dn3_operator(wdvv4_metric(s))


# classified third-order metrics, n = 3 --------------------------------------
def compat3_space(total_order: int = 10, params=("c", "cc")) -> SpaceSpec:
    return SpaceSpec("x", "u1 u2 u3", "p1 p2 p3", total_order, params)


_G3 = {
    1: [
        ["u2^2 + {c}", "-u1*u2 - u3", "2*u2"],
        ["-u1*u2 - u3", "u1^2 + {c}*u3^2", "-{c}*u2*u3 - u1"],
        ["2*u2", "-{c}*u2*u3 - u1", "{c}*u2^2 + 1"],
    ],
    2: [
        ["u2^2 + 1", "-u1*u2 - u3", "2*u2"],
        ["-u1*u2 - u3", "u1^2", "-u1"],
        ["2*u2", "-u1", "1"],
    ],
    3: [["u2^2 + 1", "-u1*u2", "0"], ["-u1*u2", "u1^2", "0"], ["0", "0", "1"]],
    4: [["-2*u2", "u1", "0"], ["u1", "0", "0"], ["0", "0", "1"]],
    5: [["-2*u2", "u1", "1"], ["u1", "1", "0"], ["1", "0", "0"]],
    6: [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
}


def compat3_metric(k: int, space: SpaceSpec | None = None, c: str = "c") -> MetricField:
    """Lower-index metric g^(k), k = 1..6; ``c`` names the constant of g^(1)."""
    s = space or compat3_space()
    if k not in _G3:
        raise ValueError("metric index must be in 1..6")
    rows = [[s.expr(e.replace("{c}", f"({c})")) for e in r] for r in _G3[k]]
    return MetricField(rows, s)


def compat3_operator(k: int, space: SpaceSpec | None = None, c: str = "c") -> CDiffOp:
    s = space or compat3_space()
    return dn3_operator(compat3_metric(k, s, c))


# potential form and Darboux coordinates -----------------------------------
def darboux_space(total_order: int = 6) -> SpaceSpec:
    return SpaceSpec("x", "b1 b2 b3", "p1 p2 p3", total_order)


def darboux_metric(space: SpaceSpec | None = None) -> MetricField:
    s = space or darboux_space()
    rows = [["-2*b2_x", "b1_x", 1], ["b1_x", 1, 0], [1, 0, 0]]
    return MetricField([[s.expr(e) for e in r] for r in rows], s, potential=True)


def darboux_operator(space: SpaceSpec | None = None) -> CDiffOp:
    s = space or darboux_space()
    return dn3_operator(darboux_metric(s), form="potential")


def darboux_casimirs(space: SpaceSpec | None = None):
    s = space or darboux_space()
    return [s.expr("b1"), s.expr("b2"), s.expr("b3 + b1_x*b2")]


# first-order operators compatible with R3, n = 2 ----------------------------
def compat13_space(total_order: int = 8) -> SpaceSpec:
    return SpaceSpec("x", "u1 u2", "p1 p2", total_order, "c1 c2 c3 c4 c5 c6")


def compat13_metric(space: SpaceSpec | None = None, branch: bool = True) -> MetricField:
    """Upper-index metric of P1; with ``branch`` the quadratic constraints on
    the constants are imposed by c5 = -2 c1 c3 / c2, c6 = 2 c3 c4 / c2."""
    s = space or compat13_space()
    e = s.expr
    g11 = e("c1*u1 + c2*u2 + c3")
    g12 = e("c4*u1 - c2/(2*u1) + c3*u2/u1 + c2*u2^2/(2*u1)")
    g22 = e("2*c4*u2 + c1/u1 + c5*u2/u1 - c1*u2^2/u1 + c6")
    rows = [[g11, g12], [g12, g22]]
    if branch:
        sub = compat13_branch(s)
        rows = [[x.substitute(sub) for x in r] for r in rows]
    return MetricField(rows, s, index="upper")


def compat13_branch(space: SpaceSpec | None = None) -> dict:
    """Parameter bindings of the chosen nondegenerate branch (c2 != 0)."""
    s = space or compat13_space()
    return {"c5": s.expr("-2*c1*c3/c2"), "c6": s.expr("2*c3*c4/c2")}


def compat13_r3_metric(space: SpaceSpec | None = None) -> MetricField:
    s = space or compat13_space()
    rows = [["u2^2 + 1", "-u1*u2"], ["-u1*u2", "u1^2"]]
    return MetricField([[s.expr(e) for e in r] for r in rows], s)


def compat13_operators(space: SpaceSpec | None = None):
    s = space or compat13_space()
    return dn1_from_metric(compat13_metric(s)), dn3_operator(compat13_r3_metric(s))


# WDVV, N = 3 ---------------------------------------------------------------
def wdvv3_abc_space(total_order: int = 10) -> SpaceSpec:
    return SpaceSpec("x", "a b c", "p1 p2 p3", total_order)


def wdvv3_abc_operators(space: SpaceSpec | None = None):
    """The first- and third-order operators of the a, b, c system."""
    s = space or wdvv3_abc_space()
    a, b, c = s.dep_vars()
    h = Fraction(1, 2)
    w = b * b - a * c
    D = lambda f, k=1: td(f, 0, k)  # noqa: E731
    A1_entries = {
        (0, 0): lambda q: D(q) * Fraction(-3, 2),
        (0, 1): lambda q: D(a * q) * h,
        (0, 2): lambda q: D(b * q),
        (1, 0): lambda q: a * D(q) * h,
        (1, 1): lambda q: (D(b * q) + b * D(q)) * h,
        (1, 2): lambda q: c * D(q) * Fraction(3, 2) + D(c) * q,
        (2, 0): lambda q: b * D(q),
        (2, 1): lambda q: D(c * q) * Fraction(3, 2) - D(c) * q,
        (2, 2): lambda q: w * D(q) + D(w * q),
    }
    A2_entries = {
        (0, 2): lambda q: D(q, 3),
        (1, 1): lambda q: D(q, 3),
        (2, 0): lambda q: D(q, 3),
        (1, 2): lambda q: -D(a * D(q), 2),
        (2, 1): lambda q: -D(a * D(q, 2)),
        (2, 2): lambda q: D(b * D(q), 2) + D(b * D(q, 2)) + D(a * D(a * D(q))),
    }

    def build(entries):
        return CDiffOp.from_function(
            s, 3, 3, lambda i, j, psi: entries[(i, j)](psi) if (i, j) in entries else s.zero()
        )

    return build(A1_entries), build(A2_entries)


def wdvv3_flat_space(total_order: int = 10) -> SpaceSpec:
    return SpaceSpec("x", "u1 u2 u3", "p1 p2 p3", total_order)


def wdvv3_flat_map(space: SpaceSpec | None = None) -> dict:
    """a, b, c as functions of the flat coordinates."""
    s = space or wdvv3_flat_space()
    return {
        "a": s.expr("u1 + u2 + u3"),
        "b": s.expr("-1/2*(u1*u2 + u2*u3 + u3*u1)"),
        "c": s.expr("u1*u2*u3"),
    }


def wdvv3_K(space: SpaceSpec | None = None):
    s = space or wdvv3_flat_space()
    sign = [[1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
    return [[s.const(Fraction(v, 2)) for v in r] for r in sign]


def wdvv3_G(space: SpaceSpec | None = None) -> MetricField:
    """The upper-index metric G^{ij} attached to the second operator (not flat)."""
    s = space or wdvv3_flat_space()
    u = s.dep_vars()
    Gup = [[None] * 3 for _ in range(3)]
    for i in range(3):
        j, k = _others(i)
        Gup[i][i] = -(u[i] - u[j]) * (u[i] - u[k]) / 4
        for jj in _others(i):
            Gup[i][jj] = -((u[i] - u[jj]) ** 2) / 4
    return MetricField(Gup, s, index="upper")


def _others(i):
    return [k for k in range(3) if k != i]


def _L1(s, j, k):
    """L_{1jk} in 0-based indices for the first component."""
    u = s.dep_vars()
    d12 = u[0] - u[1]
    d13 = u[0] - u[2]
    if (j != 0 and k != 0) or (j == 0 and k == 0):
        def diff(idx):
            a, b = [t for t in range(3) if t != idx]
            return u[a] - u[b]

        return (d12 + d13) * diff(j) * diff(k) / (2 * d12**3 * d13**3)
    # exponents 3 and 2 as below make every density conserved; the other
    # assignment does not
    kk = k if j == 0 else j
    jj = next(t for t in range(1, 3) if t != kk)
    d1k = u[0] - u[kk]
    d1j = u[0] - u[jj]
    return -(d1k**2 + d1j**2) / (2 * d1k**3 * d1j**2)


def _L(s, i, j, k):
    """L_{ijk} via the cyclic shift i -> 0."""
    if i == 0:
        return _L1(s, j, k)
    shift = i
    u = s.dep_vars()
    # relabel so that component i plays the role of the first one
    perm = [(t + shift) % 3 for t in range(3)]
    base = _L1(s, (j - shift) % 3, (k - shift) % 3)
    return base.substitute({s.dep[t]: u[perm[t]] for t in range(3)})


# Weight of L_{nsm} u^s_x u^m_x in L_n.  The published normalisation is -1/2;
# solving the Lie-derivative identity for the weights of the three parts of
# tau gives 1 with the tabulated L_{ijk}, i.e. the table is off by -2.
L_SCALE = 1


def wdvv3_tau(space: SpaceSpec | None = None, l_scale=None):
    """Components tau^i = -K^{in} L_n of the vector field in flat coordinates,
    L_n = (1/2 G_{nm} u^m_x + R_{nm} u^m_x)_x + w L_{nsm} u^s_x u^m_x with
    ``w = L_SCALE`` unless ``l_scale`` is given."""
    s = space or wdvv3_flat_space()
    u = s.dep_vars()
    ux = [td(v, 0) for v in u]
    K = wdvv3_K(s)
    n = 3
    G = wdvv3_G(s).lower().matrix
    R = [[s.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k = next(t for t in range(3) if t not in (i, j))
            R[i][j] = -(1 / ((u[i] - u[j]) * (u[i] - u[k])) - 1 / ((u[j] - u[i]) * (u[j] - u[k]))) / 3
    L = []
    for m in range(n):
        first = s.zero()
        for q in range(n):
            first = first + (G[m][q] / 2 + R[m][q]) * ux[q]
        quad = s.zero()
        for a in range(n):
            for b in range(n):
                quad = quad + _L(s, m, a, b) * ux[a] * ux[b]
        L.append(td(first, 0) + quad * (L_SCALE if l_scale is None else l_scale))
    return [sum((-K[i][m] * L[m] for m in range(n)), s.zero()) for i in range(n)]
