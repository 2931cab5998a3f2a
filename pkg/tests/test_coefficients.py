from fractions import Fraction

import pytest

from core.coefficients import (N_MAX, ab_coeffs, ap_bp, c_coeff, c_coeff_closed_form,
                               coeff_table, d_coeff, d_coeff_closed_form, d_source,
                               d_source_from_moments, d_tilde_coeff, format_table,
                               gamma_half, ground_prefactor, identity_report, pochhammer)
from core.errors import RangeError

EVEN_N = list(range(2, N_MAX + 1, 2))
ODD_N = list(range(3, 10, 2))


def test_ground_prefactor_values():
    assert ground_prefactor(0, 0) == 1
    assert ground_prefactor(2, 0) == Fraction(1, 2)
    assert ground_prefactor(2, 2) == Fraction(1, 2)
    assert ground_prefactor(4, 0) == Fraction(3, 4)
    assert ground_prefactor(4, 2) == Fraction(1, 4)
    assert ground_prefactor(3, 1) == 0


def test_top_c_coefficient():
    """C_{n-1,n} = -2^-(n+2) n!/(n/2)!"""
    assert c_coeff(2, 1) == Fraction(-1, 8)
    assert c_coeff(4, 3) == Fraction(-24, 64 * 2)


@pytest.mark.parametrize("n", EVEN_N)
def test_c_recurrence_matches_closed_form(n):
    for a in range(1, n, 2):
        assert c_coeff(n, a) == c_coeff_closed_form(n, a)


@pytest.mark.parametrize("n,a", [(3, 1), (18, 1), (4, 2), (4, 5)])
def test_c_index_checks(n, a):
    with pytest.raises(RangeError):
        c_coeff(n, a)


def test_second_order_seed():
    a_tab, b_tab = ab_coeffs(4)
    assert a_tab[0] == 0 and b_tab[0] == 0
    assert set(a_tab) == {0, 2, 4}


def test_ap_bp_at_n2():
    assert ap_bp(2) == (Fraction(1, 16), Fraction(-5, 16))


@pytest.mark.parametrize("n", EVEN_N)
def test_vanishing_sums(n):
    report = identity_report(n)
    assert report.binomial_sum == 0
    assert report.ab_sum == 0
    assert report.vanishes


@pytest.mark.parametrize("n,a,expected", [
    (3, 2, Fraction(1, 12)),
    (3, 0, Fraction(-1, 12)),
    (5, 4, Fraction(1, 4)),
    (5, 2, Fraction(1, 12)),
    (5, 0, Fraction(-5, 12)),
    (7, 6, Fraction(15, 16)),
    (7, 4, Fraction(5, 16)),
    (7, 2, Fraction(5, 48)),
    (7, 0, Fraction(-35, 16)),
])
def test_d_table(n, a, expected):
    assert d_coeff(n, a) == expected


@pytest.mark.parametrize("n", ODD_N)
def test_d_recurrence_matches_closed_form(n):
    for a in range(0, n, 2):
        assert d_coeff(n, a) == d_coeff_closed_form(n, a)


@pytest.mark.parametrize("n", ODD_N)
def test_d_source_forms_agree(n):
    for a in range(1, n + 1, 2):
        assert d_source(n, a) == d_source_from_moments(n, a)
        assert d_source(n, a, shift=2) == d_source_from_moments(n, a, doubled=True)


def test_d_tilde_sources():
    assert d_source(5, 1, shift=2) == Fraction(-9, 16)
    assert d_source(3, 3, shift=2) == Fraction(5, 8)


def test_d_tilde_differs_from_d():
    assert d_tilde_coeff(3, 2) != d_coeff(3, 2)


def test_d_index_checks():
    with pytest.raises(RangeError):
        d_coeff(4, 0)
    with pytest.raises(RangeError):
        d_coeff(5, 1)


def test_gamma_half_values():
    """Γ(1/2) = √π, Γ(3/2) = √π/2, Γ(2) = 1."""
    assert gamma_half(1).coefficient == 1 and gamma_half(1).half_powers == 1
    assert gamma_half(3).coefficient == Fraction(1, 2)
    assert gamma_half(4).rational() == 1


def test_pochhammer():
    assert pochhammer(Fraction(1), 4) == 24
    assert pochhammer(Fraction(-2), 3) == 0
    assert pochhammer(Fraction(1, 2), 2) == Fraction(3, 4)


def test_format_table_lines():
    lines = format_table(coeff_table(2))
    assert "C[1,2]=-1/8" in lines
    assert "A'[2]=1/16" in lines
    assert "B'[2]=-5/16" in lines
    assert lines[0].startswith("C[")
