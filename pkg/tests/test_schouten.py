import pytest
import sympy as sp

from hamops import ParityViolation, ShapeMismatch, SingularJacobian, SpaceSpec, total_derivative
from hamops.library import kdv_operators, kdv_space, kdv_tau
from hamops.schouten import (
    BracketCheck,
    CDiffOp,
    check_operator_equation,
    hamiltonian_flow,
    is_skew_adjoint,
    iszero_schouten_bracket,
    lie_derivative,
    op_apply,
    op_to_superfun,
    poisson_bracket,
    schouten_bracket,
    superfun_to_multivector,
    superfun_to_op,
    transform_operator_differential,
    transform_operator_point,
)
from hamops.superfun import Superfun
from hamops.varcalc import euler_df, is_total_divergence
from oracle import from_functions, from_sympy, sym_matrix, to_functions, to_sympy, X

S = kdv_space()
A1, A2 = kdv_operators(S)
D = CDiffOp.derivative(S)


def E(text, space=S):
    return space.expr(text)


def kdv_a2_text():
    return "u_x*p + 2*u*p_x + p_3x"


# operator algebra ---------------------------------------------------------------


def test_apply_examples():
    assert op_apply(D, [E("u")]) == [E("u_x")]
    assert op_apply(A2, [S.const(1)]) == [E("u_x")]
    psi = [E("u^2*u_x")]
    assert op_apply(CDiffOp.identity(S, 1), psi) == psi


def test_compose_examples():
    assert D @ D == CDiffOp.derivative(S, k=2)
    U = CDiffOp.multiplication([[E("u")]])
    assert U @ D == CDiffOp(S, 1, 1, {(0, 0): {(1,): E("u")}})
    assert D @ U == CDiffOp(S, 1, 1, {(0, 0): {(0,): E("u_x"), (1,): E("u")}})


def test_compose_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        CDiffOp.zero(S, 1, 2) @ CDiffOp.zero(S, 1, 1)


def test_coefficients_must_be_even():
    with pytest.raises(ParityViolation):
        CDiffOp(S, 1, 1, {(0, 0): {(0,): E("p")}})


def _sym_apply(A, f):
    """Apply a 1x1 operator to a sympy expression using sympy's own diff."""
    out = 0
    for (k,), a in A.comps.get((0, 0), {}).items():
        out += to_functions(to_sympy(a), A.space) * sp.diff(f, X, k)
    return out


@pytest.mark.parametrize(
    "a, b",
    [("u_x", "u^2"), ("1/(1+u^2)", "u_2x"), ("u*u_x", "x")],
)
def test_compose_matches_sympy(a, b):
    s = SpaceSpec("x", "u,w", "p,q", total_order=12)
    A = CDiffOp(s, 1, 1, {(0, 0): {(0,): s.expr(a), (2,): s.const(1)}})
    B = CDiffOp(s, 1, 1, {(0, 0): {(1,): s.expr(b), (3,): s.expr(a)}})
    w = sp.Function("w")(X)
    ref = from_functions(_sym_apply(A, _sym_apply(B, w)), s)
    assert op_apply(A @ B, [s.expr("w")]) == [from_sympy(ref, s)]


def test_superfunction_encoding():
    assert op_to_superfun(D) == Superfun([E("p_x")])
    assert op_to_superfun(A2) == Superfun([E(kdv_a2_text())])
    assert op_to_superfun(CDiffOp.zero(S, 1)) == Superfun([S.zero()], 1)
    assert superfun_to_op(Superfun([E("p_x")])) == D
    assert superfun_to_op(Superfun([E(kdv_a2_text())])) == A2


def test_multivector_encoding():
    assert superfun_to_multivector(Superfun([E("p_x")])) == E("p_x*p")
    assert superfun_to_multivector(Superfun([E("p_x")])) == -E("p*p_x")
    assert superfun_to_multivector(Superfun([S.zero()], 1)) == S.zero()
    assert superfun_to_multivector(Superfun([E(kdv_a2_text())])) == E("2*u*p_x*p + p_3x*p")


def test_adjoint_of_operators():
    assert D.adjoint() == -D
    assert A2.adjoint() == -A2
    assert is_skew_adjoint(D)
    assert is_skew_adjoint(A2)
    assert not is_skew_adjoint(CDiffOp.multiplication([[E("u")]]))


# brackets -----------------------------------------------------------------------------


def test_constant_bivector_brackets_to_zero_identically():
    B1 = A1.to_bivector()
    assert schouten_bracket(B1, B1).is_zero()


def test_kdv_second_operator_is_hamiltonian():
    B2 = A2.to_bivector()
    r = schouten_bracket(B2, B2)
    assert not r.is_zero()
    assert euler_df(r).is_zero()


def test_zero_bracket_check():
    res = iszero_schouten_bracket(S.zero(), A2.to_bivector())
    assert isinstance(res, BracketCheck) and res and res.is_zero


def test_nonzero_bracket_has_witness():
    U = CDiffOp(S, 1, 1, {(0, 0): {(1,): E("u^2")}})
    B = (U - U.adjoint()).to_bivector()
    res = iszero_schouten_bracket(B, A2.to_bivector())
    assert not res
    assert not res.witness.is_zero()


def test_kdv_lie_derivative():
    tau = kdv_tau(S)
    assert tau == Superfun([E("-1/2*u^2 - 1/2*u_2x")])
    rep = lie_derivative(tau, A1.to_bivector()) - A2.to_bivector()
    assert euler_df(rep).is_zero()
    assert lie_derivative([S.zero()], A1.to_bivector()).is_zero()


def test_parallel_bracket_agrees():
    B2 = A2.to_bivector()
    assert schouten_bracket(B2, B2, jobs=2) == schouten_bracket(B2, B2)


# coordinate changes ---------------------------------------------------------------------


def test_differential_transform_identity_and_scaling():
    assert transform_operator_differential(A2, [E("u")]) == A2
    assert transform_operator_differential(D, [E("2*u")]) == 4 * D


def test_point_transform_identity():
    assert transform_operator_point(A2, {"u": E("u")}) == A2


def test_point_transform_constant_linear_map():
    s = SpaceSpec("x", "a1,a2", "p1,p2", total_order=4)
    t = SpaceSpec("x", "u1,u2", "p1,p2", total_order=4)
    h = [[s.expr("a1"), s.const(1)], [s.const(1), s.expr("a2^2")]]
    A = CDiffOp(s, 2, 2, {(i, j): {(1,): h[i][j]} for i in range(2) for j in range(2)})
    M = sp.Matrix([[2, 1], [1, 1]])
    fwd = {"a1": t.expr("2*u1 + u2"), "a2": t.expr("u1 + u2")}
    got = transform_operator_point(A, fwd)
    a1, a2, u1, u2 = sp.symbols("a1 a2 u1 u2")
    hs = sp.Matrix([[a1, 1], [1, a2**2]]).subs({a1: 2 * u1 + u2, a2: u1 + u2})
    ref = M.inv() * hs * M.inv().T
    for i in range(2):
        for j in range(2):
            assert got.coeff(i, j, (1,)) == from_sympy(ref[i, j], t)
            assert got.coeff(i, j, (0,)).is_zero()


def test_point_transform_singular():
    s = SpaceSpec("x", "a1,a2", "p1,p2", total_order=4)
    t = SpaceSpec("x", "u1,u2", "p1,p2", total_order=4)
    with pytest.raises(SingularJacobian):
        transform_operator_point(CDiffOp.derivative(s, 2), {"a1": t.expr("u1+u2"), "a2": t.expr("2*u1+2*u2")})


# flows and brackets of functionals ---------------------------------------------------------


def test_hamiltonian_flows():
    assert hamiltonian_flow(D, E("1/2*u^2")) == [E("u_x")]
    assert hamiltonian_flow(D, E("u^3/6 - 1/2*u_x^2")) == [E("u*u_x + u_3x")]
    assert hamiltonian_flow(D, S.const(5)) == [S.zero()]


def test_poisson_brackets():
    assert is_total_divergence(poisson_bracket(E("u^3 + u_x^2"), E("u^3 + u_x^2"), A2))
    pb = poisson_bracket(E("1/2*u^2"), E("u^3/6"), D)
    assert pb == E("u^2*u_x") and is_total_divergence(pb)
    assert poisson_bracket(E("u^2"), S.const(3), D).is_zero()


def test_operator_equation_residual():
    F = [E("u*u_x + u_3x")]
    assert check_operator_equation(F, D).is_zero()
    assert not check_operator_equation(F, CDiffOp(S, 1, 1, {(0, 0): {(1,): E("u")}})).is_zero()


def test_operator_equation_constant_linear_case():
    # F = u_3x: l_F = D^3 commutes with D, residual D^3 D + D (-D^3) = 0
    assert check_operator_equation([E("u_3x")], D).is_zero()
    # F = u: l_F = id, residual = A + A = 2 D
    assert check_operator_equation([E("u")], D) == 2 * D


def test_text_form():
    assert A2.to_text() == "{{(u_x) + (2*u)*D_x + (1)*D_3x}}"
