import pytest
from hamops import OrderExceeded, SpaceSpec, enumerate_coords, prolong, total_derivative
from hamops.kernel import EvenJet
from hamops.jetspace import td_multi
from oracle import from_sympy, to_sympy, total_derivative as sym_td

S = SpaceSpec("x", "u", "p", total_order=4)


def test_enumerate_one_variable():
    s = SpaceSpec("x", "u", "p", total_order=2)
    names = [s.atom_name(a) for a in enumerate_coords(s)]
    assert names == ["u", "u_x", "u_2x", "p", "p_x", "p_2x"]


def test_enumerate_two_variables():
    s = SpaceSpec("t,x", "u", (), total_order=1)
    assert [s.atom_name(a) for a in enumerate_coords(s)] == ["u", "u_t", "u_x"]


def test_coordinate_names_put_counts_first():
    s = SpaceSpec("t,x", "u", (), total_order=3)
    assert s.atom("u_t2x") == EvenJet(0, (1, 2))
    assert s.atom_name(EvenJet(0, (2, 1))) == "u_2tx"


def test_leibniz_example():
    assert total_derivative(S.expr("u*u_x"), "x") == S.expr("u_x^2 + u*u_2x")


def test_odd_shift():
    s = SpaceSpec("t,x", "u", "p", total_order=2)
    assert total_derivative(s.expr("p"), "t") == s.expr("p_t")


def test_truncation_raises_with_required_order():
    with pytest.raises(OrderExceeded) as info:
        total_derivative(S.expr("u_4x"), "x")
    assert info.value.required_order == 5
    assert info.value.variable == "u"


def test_odd_leibniz_kills_square():
    assert total_derivative(S.expr("p*p_x"), "x") == S.expr("p*p_2x")


def test_iterated_derivative():
    assert total_derivative(S.expr("u^2"), "x", 2) == S.expr("2*u_x^2 + 2*u*u_2x")
    assert td_multi(S.expr("u"), (3,)) == S.expr("u_3x")


def test_prolong_simple():
    A = SpaceSpec("x", "a", (), total_order=2)
    U = SpaceSpec("x", "u1,u2", (), total_order=2)
    out = prolong({"a": U.expr("u1+u2")}, 1, source=A)
    assert out[A.atom("a_x")] == U.expr("u1_x+u2_x")


def test_prolong_explicit_x():
    out = prolong({S.atom("u"): S.expr("x")}, 1, S)
    assert out[S.atom("u_x")] == S.const(1)


def test_prolong_wdvv_change_of_variables():
    A = SpaceSpec("x", "a,b,c", (), total_order=3)
    U = SpaceSpec("x", "u1,u2,u3", (), total_order=3)
    b = U.expr("-1/2*(u1*u2 + u2*u3 + u3*u1)")
    out = prolong({"b": b}, 3, source=A)
    for k, name in ((1, "b_x"), (2, "b_2x"), (3, "b_3x")):
        assert out[A.atom(name)] == from_sympy(sym_td(to_sympy(b), U, k), U)


@pytest.mark.parametrize("text", ["u^3*u_x", "u_x/(1+u^2)", "u*u_2x - u_x^3/u", "x*u^2"])
def test_total_derivative_matches_sympy(text):
    s = SpaceSpec("x", "u", (), total_order=6)
    e = s.expr(text)
    for k in (1, 2, 3):
        assert total_derivative(e, "x", k) == from_sympy(sym_td(to_sympy(e), s, k), s)
