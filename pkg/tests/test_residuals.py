import pytest

from core.errors import RangeError
from core.residuals import (RESIDUAL_FAMILIES, RESIDUAL_LIMIT, residual_model,
                            residual_report, residual_suite, sample_jets)
from core.model import stiffness


@pytest.fixture(scope="module")
def model():
    return residual_model()


@pytest.fixture(scope="module")
def jets(model):
    return sample_jets(model, count=25, seed=42)


def test_sample_jets_are_seeded(model):
    first = sample_jets(model, count=5, seed=7)
    second = sample_jets(model, count=5, seed=7)
    assert first == second
    assert first != sample_jets(model, count=5, seed=8)


def test_sample_jets_have_positive_stiffness(model, jets):
    assert len(jets) == 25
    assert all(jet.order == 4 for jet in jets)
    assert all(stiffness(model, jet.q) > 0.0 for jet in jets)


@pytest.mark.parametrize("order", list(RESIDUAL_FAMILIES))
def test_closed_forms_satisfy_their_equations(model, jets, order):
    summary = residual_suite(model, order, jets)
    assert summary.checked == len(jets)
    assert summary.skipped == 0
    assert summary.max_residual <= RESIDUAL_LIMIT
    assert summary.passed


def test_residual_report_covers_every_family(model, jets):
    report = residual_report(model, jets[:3], n_max=4)
    assert [s.order for s in report] == list(RESIDUAL_FAMILIES)
    assert report[0].label == "(0,0)"


def test_unknown_family(model, jets):
    with pytest.raises(RangeError):
        residual_suite(model, (3, 0), jets)
