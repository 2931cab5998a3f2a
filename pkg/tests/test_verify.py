import pytest

from core.errors import RangeError
from core.verify import adiabatic_checks, coefficient_checks, verify_all


def test_coefficient_checks_pass():
    checks = coefficient_checks()
    assert all(c.passed for c in checks)
    names = [c.name for c in checks]
    assert names[:2] == ["A'[2]", "B'[2]"]
    assert "ab_sum[16]" in names
    assert "d_closed_form" in names


def test_adiabatic_checks_pass():
    checks = adiabatic_checks(samples=10)
    failed = [c.line() for c in checks if not c.passed]
    assert failed == []
    assert {"residual(0,0)", "residual(2,0)", "uncertainty_reduced",
            "zero_point_closed_form"} <= {c.name for c in checks}


def test_suite_selection():
    assert {c.name for c in verify_all(which="coefficients")} == \
        {c.name for c in coefficient_checks()}
    with pytest.raises(RangeError):
        verify_all(which="everything")
