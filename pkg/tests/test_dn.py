import pytest
import sympy as sp

from hamops import AntisymmetryViolation, AsymmetricMetric, SingularMatrix, SpaceSpec
from hamops.dn import (
    MetricField,
    casimir_check,
    casimir_construct,
    check_dn3_conditions,
    check_gamma_linear,
    christoffel_lc,
    dn1_from_metric,
    dn1_operator,
    dn3_c_from_g,
    dn3_operator,
    riemann_is_flat,
    riemann_tensor,
)
from hamops.library import compat3_metric, compat3_space, darboux_metric, darboux_operator, darboux_space
from hamops.linalg import matmul, matrix_inverse
from hamops.schouten import CDiffOp, is_skew_adjoint
from oracle import from_sympy, sym_matrix

S2 = SpaceSpec("x", "u1,u2", "p1,p2", total_order=6)


def metric(rows, space=S2, **kw):
    return MetricField([[space.expr(e) for e in r] for r in rows], space, **kw)


def sym_christoffel(g, coords):
    ginv = g.inv()
    n = g.shape[0]
    return [[[sp.simplify(sum(ginv[i, l] * (sp.diff(g[l, k], coords[j]) + sp.diff(g[l, j], coords[k]) - sp.diff(g[j, k], coords[l])) for l in range(n)) / 2)
              for k in range(n)] for j in range(n)] for i in range(n)]


def sym_riemann_zero(g, coords):
    n = g.shape[0]
    G = sym_christoffel(g, coords)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    r = sp.diff(G[i][l][j], coords[k]) - sp.diff(G[i][k][j], coords[l])
                    r += sum(G[i][k][p] * G[p][l][j] - G[i][l][p] * G[p][k][j] for p in range(n))
                    if sp.simplify(r) != 0:
                        return False
    return True


SAMPLE_METRICS = [
    [["u1", "0"], ["0", "1"]],
    [["1", "0"], ["0", "u1^2"]],
    [["u2^2 + 1", "u1"], ["u1", "u2"]],
    [["4/(1+u1^2+u2^2)^2", "0"], ["0", "4/(1+u1^2+u2^2)^2"]],
]


@pytest.mark.parametrize("rows", SAMPLE_METRICS)
def test_christoffel_matches_sympy(rows):
    g = metric(rows)
    coords = sp.symbols("u1 u2")
    ref = sym_christoffel(sym_matrix(g.matrix), coords)
    got = christoffel_lc(g).lower
    for i in range(2):
        for j in range(2):
            for k in range(2):
                assert got[i][j][k] == from_sympy(ref[i][j][k], S2)


@pytest.mark.parametrize("rows", SAMPLE_METRICS)
def test_flatness_matches_sympy(rows):
    g = metric(rows)
    assert riemann_is_flat(g) == sym_riemann_zero(sym_matrix(g.matrix), sp.symbols("u1 u2"))


def test_christoffel_examples():
    assert all(c.is_zero() for a in christoffel_lc(compat3_metric(6)).lower for b in a for c in b)
    G = christoffel_lc(metric(SAMPLE_METRICS[0])).lower
    assert G[0][0][0] == S2.expr("1/(2*u1)")
    assert christoffel_lc(metric(SAMPLE_METRICS[0])).is_symmetric()


def test_polar_metric_is_flat_and_round_metric_is_not():
    assert riemann_is_flat(metric([["1", "0"], ["0", "u1^2"]]))
    assert not riemann_is_flat(metric(SAMPLE_METRICS[3]))
    assert riemann_is_flat(compat3_metric(6))
    R = riemann_tensor(metric(SAMPLE_METRICS[3]))
    assert not R[0][1][0][1].is_zero()


def test_metric_validation():
    with pytest.raises(AsymmetricMetric):
        metric([["1", "u1"], ["0", "1"]])
    with pytest.raises(SingularMatrix):
        metric([["u1", "u1"], ["u1", "u1"]])


def test_inverse_of_potential_metric():
    g = darboux_metric()
    s = g.space
    inv = matrix_inverse(g.matrix, s)
    eye = matmul(g.matrix, inv)
    assert all(eye[i][j] == s.const(int(i == j)) for i in range(3) for j in range(3))
    ref = sym_matrix(g.matrix).inv()
    assert all(inv[i][j] == from_sympy(ref[i, j], s) for i in range(3) for j in range(3))
    one = SpaceSpec("x", "u", "p", total_order=2)
    assert matrix_inverse([[one.expr("u")]], one) == [[one.expr("1/u")]]


def test_dn1_identity():
    eye = metric([["1", "0"], ["0", "1"]], index="upper")
    gamma = [[[S2.zero()] * 2 for _ in range(2)] for _ in range(2)]
    assert dn1_operator(eye, gamma) == CDiffOp.derivative(S2, 2)


def test_dn1_of_flat_metric_is_skew():
    g = metric([["1", "0"], ["0", "u1^2"]])
    assert is_skew_adjoint(dn1_from_metric(g))


def test_dn3_coefficients():
    s = compat3_space()
    const = metric([["2", "1"], ["1", "3"]])
    assert all(c.is_zero() for a in dn3_c_from_g(const).lower for b in a for c in b)
    c = dn3_c_from_g(compat3_metric(4, s)).lower
    assert c[0][0][1] == s.const(1)


def test_dn3_identity_is_third_derivative():
    eye = metric([["1", "0"], ["0", "1"]])
    assert dn3_operator(eye) == CDiffOp.derivative(S2, 2, k=3)


def test_dn3_potential_form_of_g5():
    A = darboux_operator()
    s = A.space
    assert A.coeff(0, 2, (1,)) == -s.const(1)
    assert is_skew_adjoint(A)


@pytest.mark.parametrize("k", range(1, 7))
def test_dn3_conditions_hold_on_listed_metrics(k):
    assert check_dn3_conditions(compat3_metric(k)).holds


def test_dn3_conditions_fail_off_list():
    rep = check_dn3_conditions(metric([["u1", "0"], ["0", "1"]]))
    assert not rep.cyclic_holds
    assert check_dn3_conditions(metric([["2", "1"], ["1", "3"]])).holds


def test_gamma_conditions():
    h = metric([["u1", "u2"], ["u2", "1"]], index="upper")
    assert check_gamma_linear(h, christoffel_lc(h)).holds
    zero = [[[S2.zero()] * 2 for _ in range(2)] for _ in range(2)]
    assert not check_gamma_linear(h, zero).holds


def test_casimirs():
    one = SpaceSpec("x", "u", "p", total_order=4)
    D = CDiffOp.derivative(one)
    assert casimir_check(D, [one.expr("u")]) == [[one.zero()]]
    assert casimir_check(D, [one.expr("u^2")]) == [[one.expr("2*u_x")]]


def test_casimir_construct():
    s = darboux_space()
    zero3 = [[0] * 3 for _ in range(3)]
    eye = [[int(a == m) for m in range(3)] for a in range(3)]
    assert casimir_construct([zero3] * 3, eye, s) == s.dep_vars()
    assert casimir_construct([zero3] * 3, [[0] * 3] * 3, s) == [s.zero()] * 3
    bad = [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
    with pytest.raises(AntisymmetryViolation):
        casimir_construct([bad, zero3, zero3], eye, s)


def test_third_casimir_modulo_divergence():
    from hamops.varcalc import is_total_divergence

    s = darboux_space()
    zero3 = [[0] * 3 for _ in range(3)]
    psi3 = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]  # psi^3_{21} = 1
    omega = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    C3 = casimir_construct([zero3, zero3, psi3], omega, s)[2]
    assert is_total_divergence(C3 - s.expr("b3 + b1_x*b2"))
    assert all(r.is_zero() for rows in casimir_check(darboux_operator(s), [C3]) for r in rows)
