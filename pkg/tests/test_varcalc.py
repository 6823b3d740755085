import pytest

from hamops import SpaceSpec, total_derivative
from hamops.superfun import Superfun
from hamops.varcalc import (
    adjoint,
    euler_df,
    is_total_divergence,
    linearize,
    splitext,
    splitvars,
    variational_derivative,
)
from oracle import euler as sym_euler, from_sympy, to_sympy

S = SpaceSpec("x", "u", "p", total_order=6, params="c")


def E(text, space=S):
    return space.expr(text)


def test_dirichlet_density():
    assert variational_derivative(E("1/2*u_x^2"), "u") == -E("u_2x")


def test_no_derivatives():
    assert variational_derivative(E("u^3"), "u") == 3 * E("u^2")


def test_kernel_contains_divergences():
    assert variational_derivative(total_derivative(E("u*u_x*p"), "x"), "u").is_zero()
    assert euler_df(E("u*u_2x + u_x^2")).is_zero()


def test_euler_df_components():
    r = euler_df(E("u^2"))
    assert r.even_part == (2 * E("u"),)
    assert r.odd_part == (S.zero(),)


def test_odd_variational_derivative():
    # left derivative, with the sign from moving D_x across the odd slot
    assert variational_derivative(E("u*p*p_x"), "p") == E("2*u*p_x + u_x*p")


def test_divergence_detection():
    assert is_total_divergence(E("u_x"))
    assert not is_total_divergence(E("u^2"))


@pytest.mark.parametrize(
    "text",
    ["u^3*u_x^2", "u_2x^2/(1+u^2)", "c*u*u_x*u_3x - u_x^4", "u_x^2/u + u^5", "x*u*u_x^2"],
)
def test_variational_derivative_matches_sympy(text):
    s = SpaceSpec("x", "u", (), total_order=8, params="c")
    e = s.expr(text)
    assert variational_derivative(e, "u") == from_sympy(sym_euler(to_sympy(e), s, "u"), s)


def test_two_component_variational_derivative_matches_sympy():
    s = SpaceSpec("x", "u,v", (), total_order=6)
    e = s.expr("u*v_x^2 + u_x*v^3 - v_2x*u^2/(1+v^2)")
    for dep in ("u", "v"):
        assert variational_derivative(e, dep) == from_sympy(sym_euler(to_sympy(e), s, dep), s)


def test_linearize_examples():
    assert linearize([E("u_x")]) == Superfun([E("p_x")])
    assert linearize([E("u*u_x")]) == Superfun([E("u_x*p + u*p_x")])
    s = SpaceSpec("t,x", "u", "p", total_order=4)
    got = linearize([s.expr("u_t - u*u_x - u_3x")])
    assert got == Superfun([s.expr("p_t - u_x*p - u*p_x - p_3x")])


def test_adjoint_examples():
    assert adjoint(Superfun([E("p_x")])) == Superfun([-E("p_x")])
    kdv = Superfun([E("u_x*p + 2*u*p_x + p_3x")])
    assert adjoint(kdv) == Superfun([-E("u_x*p + 2*u*p_x + p_3x")])


def test_splitext():
    got = splitext(E("u*p + u_x*p_x"))
    assert got == [(E("p"), E("u")), (E("p_x"), E("u_x"))]
    assert splitext(E("u^2")) == [(S.const(1), E("u^2"))]
    assert splitext(S.zero()) == []


def test_splitvars():
    assert splitvars(E("u_x^2 + u*u_x"), ["u_x"]) == [(E("u_x^2"), S.const(1)), (E("u_x"), E("u"))]
    assert splitvars(E("c*u_x"), ["u_x"]) == [(E("u_x"), E("c"))]
    assert splitvars(S.zero(), ["u_x"]) == []
