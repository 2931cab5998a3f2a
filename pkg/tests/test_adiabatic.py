import logging

import pytest
from numpy.testing import assert_allclose

from core.adiabatic import (ExpansionOrder, Kinematics, evaluated_index, experimental_g22_e2,
                            g02_stack, moment, moment_00, moment_01, moment_02, moment_10,
                            moment_11, moment_22_fourth, moment_value, second_moment_block, theta,
                            uncertainty_reduced, uncertainty_value, uncertainty_violated,
                            zero_point, zero_point_closed_form)
from core.coefficients import d_tilde_coeff
from core.errors import DomainError, RangeError, UnsupportedOrderError
from core.model import Jet, OscillatorModel, stiffness, u_derivative

JET = Jet(0.6, 0.4, -0.3, 0.2, 0.1)


def stiffness_of(q):
    return 1.0 + q * q / 2.0


def test_zeroth_order_moments(quartic):
    q = 0.8
    x = stiffness_of(q)
    assert_allclose(moment_00(quartic, 2, 0, q), 0.5 * x**-0.5)
    assert_allclose(moment_00(quartic, 2, 2, q), 0.5 * x**0.5)
    assert_allclose(moment_00(quartic, 4, 2, q), 0.25)
    assert moment_00(quartic, 3, 0, q) == 0.0
    assert moment_00(quartic, 4, 1, q) == 0.0


def test_first_order_covariance(quartic):
    """G^(1,2) = -Ẋ/(8ω) X^(-3/2) with Ẋ = U''' q̇/mω²."""
    q, v = 0.8, 0.5
    x = stiffness_of(q)
    assert_allclose(moment_01(quartic, 2, 1, Jet(q, v)), -q * v / 8.0 * x**-1.5)
    assert moment_01(quartic, 2, 0, Jet(q, v)) == 0.0


def test_sqrt_hbar_moments(quartic):
    q = 0.5
    x = stiffness_of(q)
    assert_allclose(moment_10(quartic, 3, 2, q), q / 12.0 / x)
    assert_allclose(moment_10(quartic, 3, 0, q), -q / 12.0 * x**-2)
    assert moment_10(quartic, 2, 0, q) == 0.0


def test_moment_11_is_keyed_by_odd_index(quartic):
    q = 0.5
    x = stiffness_of(q)
    expected = float(d_tilde_coeff(3, 2)) * q * x**-1.0
    assert_allclose(moment_11(quartic, 3, 3, Jet(q, 0.1)), expected)
    assert moment_11(quartic, 4, 1, Jet(q, 0.1)) == 0.0
    with pytest.raises(UnsupportedOrderError):
        moment_11(quartic, 3, 0, Jet(q, 0.1))


def test_harmonic_block_saturates_uncertainty(harmonic):
    block = second_moment_block(harmonic, Jet(0.3, 0.2, -0.3))
    assert_allclose([block.g02, block.g22, block.g12], [0.5, 0.5, 0.0])
    assert_allclose(uncertainty_value(block), 0.25)
    assert_allclose(zero_point(harmonic, Jet(0.3, 0.2, -0.3)), 1.0)


def test_uncertainty_reduced_form(quartic):
    block = second_moment_block(quartic, JET)
    assert_allclose(uncertainty_value(block), uncertainty_reduced(block, quartic, JET),
                    rtol=1e-13)


def test_zero_point_closed_form(quartic):
    assert_allclose(zero_point(quartic, JET), zero_point_closed_form(quartic, JET), rtol=1e-13)


def test_uncertainty_violated():
    assert uncertainty_violated(0.2499)
    assert not uncertainty_violated(0.25 - 1e-7)


def test_g02_stack_orders(quartic, harmonic):
    assert_allclose(g02_stack(harmonic, JET), 0.5)
    x = stiffness_of(JET.q)
    assert_allclose(g02_stack(quartic, JET, adiabatic_order=0), 0.5 * x**-0.5)
    second = g02_stack(quartic, JET, adiabatic_order=2)
    assert_allclose(second, moment_00(quartic, 2, 0, JET.q) + moment_02(quartic, 2, 0, JET))
    assert_allclose(g02_stack(quartic.with_hbar(0.1), JET, hbar_order=2, adiabatic_order=0,
                              g02_e2=2.0), 0.5 * x**-0.5 + 0.2)


def test_g02_stack_range_checks(quartic):
    with pytest.raises(RangeError):
        g02_stack(quartic, JET, hbar_order=3)
    with pytest.raises(RangeError):
        g02_stack(quartic, Jet(0.1, 0.2), adiabatic_order=4)


def test_moment_value_sums_orders(quartic):
    q = 0.5
    x = stiffness_of(q)
    assert_allclose(moment_value(quartic, 2, 2, Jet(q)), 0.5 * x**0.5)
    assert_allclose(moment_value(quartic, 3, 0, Jet(q)), -q / 12.0 * x**-2)
    assert moment_value(quartic, 3, 0, Jet(q), hbar_order=0) == 0.0


def test_moment_value_limits(quartic):
    with pytest.raises(UnsupportedOrderError):
        moment_value(quartic, 2, 2, JET, adiabatic_order=4)
    with pytest.raises(UnsupportedOrderError):
        moment_value(quartic, 3, 1, Jet(0.5, 0.1), hbar_order=1, adiabatic_order=1)


def test_expansion_order_parsing():
    assert ExpansionOrder.parse("0,2") == ExpansionOrder(0, 2)
    assert str(ExpansionOrder(1, 1)) == "(1,1)"
    with pytest.raises(UnsupportedOrderError):
        ExpansionOrder(2, 0)
    with pytest.raises(RangeError):
        ExpansionOrder.parse("two")


def test_moment_dispatch(quartic, harmonic):
    assert_allclose(moment(quartic, ExpansionOrder(0, 0), 2, 0, Jet(0.8)),
                    moment_00(quartic, 2, 0, 0.8))
    assert moment(harmonic, ExpansionOrder(0, 4), 2, 0, JET) == 0.0
    with pytest.raises(UnsupportedOrderError):
        moment(quartic, ExpansionOrder(0, 4), 2, 2, JET)
    assert moment(quartic, ExpansionOrder(0, 3), 2, 0, JET) == 0.0
    with pytest.raises(UnsupportedOrderError):
        moment(quartic, ExpansionOrder(0, 3), 2, 1, JET)
    with pytest.raises(RangeError):
        moment(quartic, ExpansionOrder(0, 2), 2, 0, Jet(0.1, 0.2))


def test_index_checks(quartic):
    with pytest.raises(RangeError):
        moment_00(quartic, 1, 0, 0.1)
    with pytest.raises(RangeError):
        moment_00(quartic, 2, 3, 0.1)


def test_fourth_order_vanishes_for_harmonic(harmonic):
    assert theta(harmonic, JET) == 0.0
    assert moment_22_fourth(harmonic, JET) == 0.0


def test_domain_error_propagates():
    model = OscillatorModel.from_powers({4: -1 / 24})
    with pytest.raises(DomainError):
        moment_00(model, 2, 0, 2.0)


def test_series_kinematics_match_pointwise(quartic):
    """Derivatives of X along the jet's polynomial trajectory equal the chain-rule values."""
    at = Kinematics.at(quartic, JET)
    along = Kinematics.along(quartic, JET)
    assert_allclose([along.x.value, along.x1.value, along.x2.value, along.x3.value,
                     along.x4.value],
                    [at.x, at.x1, at.x2, at.x3, at.x4], rtol=1e-13)


def test_experimental_relation_warns(quartic, caplog):
    with caplog.at_level(logging.WARNING, logger="qmoments.adiabatic"):
        experimental_g22_e2(quartic, 0.3, 0.1)
    assert "in place of X" in caplog.text


def test_experimental_relation_harmonic(harmonic):
    assert_allclose(experimental_g22_e2(harmonic, 0.3, 0.7, verbatim=False), 0.7)


def _vanishes(e, i, n, a):
    return {
        (0, 0): n % 2 or a % 2,
        (0, 1): n % 2 or a % 2 == 0,
        (0, 2): n % 2 or a % 2,
        (0, 3): True,
        (1, 0): n % 2 == 0 or a % 2,
        (1, 1): n % 2 == 0,
    }[(e, i)]


@pytest.mark.parametrize("e,i", [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1)])
def test_parity_ladder(quartic, e, i):
    order = ExpansionOrder(e, i)
    for n in range(2, 9):
        for a in range(n + 1):
            unsupported = ((e, i) == (1, 1) and n % 2 and a % 2 == 0
                           or (e, i) == (0, 3) and n % 2 == 0 and a % 2)
            if unsupported:
                with pytest.raises(UnsupportedOrderError):
                    moment(quartic, order, n, a, JET)
            elif _vanishes(e, i, n, a):
                assert moment(quartic, order, n, a, JET) == 0.0, (n, a)


def test_sqrt_hbar_moments_follow_the_next_even_order():
    """G^(a,n)_(1,0) m^(3/2) ω^(5/2) / U''' over X⁻¹ G^(a,n+1)_(0,0) does not depend on q."""
    model = OscillatorModel.from_powers({3: 0.3, 4: 1 / 24}, m=2.0, omega=0.7)
    scale = model.m**1.5 * model.omega**2.5
    for n in (3, 5, 7):
        for a in range(0, n + 1, 2):
            ratios = []
            for q in (0.2, 0.5, 0.9, 1.4):
                x = stiffness(model, q)
                ratios.append(moment_10(model, n, a, q) * scale / u_derivative(model, q, 3)
                              / (moment_00(model, n + 1, a, q) / x))
            assert_allclose(ratios, ratios[0], rtol=1e-12, atol=1e-15)


def test_evaluated_index_names_the_returned_moment():
    assert evaluated_index(ExpansionOrder(1, 1), 3, 3) == (2, 3)
    assert evaluated_index(ExpansionOrder(1, 1), 4, 1) == (1, 4)
    assert evaluated_index(ExpansionOrder(1, 0), 3, 2) == (2, 3)
