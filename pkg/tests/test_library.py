from fractions import Fraction

import pytest

from hamops.dn import check_gamma_linear, christoffel_lc, riemann_is_flat
from hamops import library as lib
from hamops.schouten import is_skew_adjoint, lie_derivative, transform_operator_point
from hamops.varcalc import euler_df


@pytest.fixture(scope="module")
def flat():
    f = lib.wdvv3_flat_space()
    A1, A2 = lib.wdvv3_abc_operators(lib.wdvv3_abc_space())
    fmap = lib.wdvv3_flat_map(f)
    return f, transform_operator_point(A1, fmap, f), transform_operator_point(A2, fmap, f)


def test_wdvv3_pair_is_skew():
    A1, A2 = lib.wdvv3_abc_operators()
    assert is_skew_adjoint(A1) and is_skew_adjoint(A2)


def test_first_operator_is_constant_in_flat_coordinates(flat):
    f, T1, _ = flat
    K = lib.wdvv3_K(f)
    for i in range(3):
        for j in range(3):
            assert T1.coeff(i, j, (1,)) == K[i][j]
            assert T1.coeff(i, j, (0,)).is_zero()


def test_leading_metric_is_curved():
    # recorded outcome: the metric G^{ij} of the second operator is not flat
    assert not riemann_is_flat(lib.wdvv3_G())


def _residual(flat, scale):
    f, T1, T2 = flat
    tau = lib.wdvv3_tau(f, l_scale=scale)
    return euler_df(lie_derivative(tau, T1.to_bivector()) - T2.to_bivector())


def test_lie_derivative_in_flat_coordinates(flat):
    assert lib.L_SCALE == 1
    assert _residual(flat, None).is_zero()


def test_published_cubic_weight_leaves_a_residual(flat):
    assert not _residual(flat, Fraction(-1, 2)).is_zero()


def test_wdvv4_pair_is_skew():
    A1, A2 = lib.wdvv4_operators()
    assert is_skew_adjoint(A1) and is_skew_adjoint(A2)


def test_compat13_branch_and_flatness():
    s = lib.compat13_space()
    br = lib.compat13_branch(s)
    assert br["c5"] == s.expr("-2*c1*c3/c2")
    assert br["c6"] == s.expr("2*c3*c4/c2")
    h = lib.compat13_metric(s)
    assert riemann_is_flat(h)
    assert check_gamma_linear(h, christoffel_lc(h)).holds
