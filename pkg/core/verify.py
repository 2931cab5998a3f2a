"""Identity and residual checks collected into CHECK lines."""

from __future__ import annotations

import logging
from fractions import Fraction

from core.adiabatic import (second_moment_block, uncertainty_reduced, uncertainty_value,
                            zero_point, zero_point_closed_form)
from core.coefficients import (N_MAX, ap_bp, c_coeff, c_coeff_closed_form, d_coeff,
                               d_coeff_closed_form, d_source, d_source_from_moments,
                               identity_report)
from core.errors import DomainError, QMomentsError, RangeError
from core.model import OscillatorModel
from core.reports import Check
from core.residuals import (DEFAULT_SEED, RESIDUAL_LIMIT, residual_model, residual_report,
                            sample_jets)

log = logging.getLogger("qmoments.verify")

SUITES = ("all", "coefficients", "adiabatic")
D_TABLE_MAX = 9
FLOAT_LIMIT = 1e-12
EXACT = Fraction(0)


def coefficient_checks() -> list[Check]:
    """Exact-arithmetic checks of the coefficient tables."""
    checks = []

    a2, b2 = ap_bp(2)
    checks.append(Check("A'[2]", a2 == Fraction(1, 16), a2, Fraction(1, 16)))
    checks.append(Check("B'[2]", b2 == Fraction(-5, 16), b2, Fraction(-5, 16)))

    for n in range(2, N_MAX + 1, 2):
        report = identity_report(n)
        checks.append(Check(f"binomial_sum[{n}]", report.binomial_sum == 0,
                            abs(report.binomial_sum), EXACT))
        checks.append(Check(f"ab_sum[{n}]", report.ab_sum == 0, abs(report.ab_sum), EXACT))

    worst = max(abs(c_coeff(n, a) - c_coeff_closed_form(n, a))
                for n in range(2, N_MAX + 1, 2) for a in range(1, n, 2))
    checks.append(Check("c_closed_form", worst == 0, worst, EXACT))

    worst = max(abs(d_coeff(n, a) - d_coeff_closed_form(n, a))
                for n in range(3, D_TABLE_MAX + 1, 2) for a in range(0, n, 2))
    checks.append(Check("d_closed_form", worst == 0, worst, EXACT))

    worst = Fraction(0)
    for n in range(3, D_TABLE_MAX + 1, 2):
        for a in range(1, n + 1, 2):
            worst = max(worst, abs(d_source(n, a) - d_source_from_moments(n, a)),
                        abs(d_source(n, a, shift=2) - d_source_from_moments(n, a, doubled=True)))
    checks.append(Check("d_source_forms", worst == 0, worst, EXACT))
    return checks


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def adiabatic_checks(model: OscillatorModel | None = None, seed: int = DEFAULT_SEED,
                     samples: int = 100) -> list[Check]:
    """Residual families and block identities over seeded jets."""
    model = model or residual_model()
    jets = sample_jets(model, samples, seed)
    checks = []

    for summary in residual_report(model, jets):
        checks.append(Check(f"residual{summary.label}", summary.passed and summary.checked > 0,
                            summary.max_residual, RESIDUAL_LIMIT))

    worst_uncertainty = worst_zero_point = 0.0
    for jet in jets:
        try:
            block = second_moment_block(model, jet)
            worst_uncertainty = max(worst_uncertainty, _relative(
                uncertainty_value(block), uncertainty_reduced(block, model, jet)))
            worst_zero_point = max(worst_zero_point, _relative(
                zero_point(model, jet), zero_point_closed_form(model, jet)))
        except DomainError as exc:
            log.warning("skipping jet at q=%.6g: %s", jet.q, exc)
    checks.append(Check("uncertainty_reduced", worst_uncertainty <= FLOAT_LIMIT,
                        worst_uncertainty, FLOAT_LIMIT))
    checks.append(Check("zero_point_closed_form", worst_zero_point <= FLOAT_LIMIT,
                        worst_zero_point, FLOAT_LIMIT))
    return checks


def verify_all(model: OscillatorModel | None = None, seed: int = DEFAULT_SEED,
               samples: int = 100, which: str = "all") -> list[Check]:
    """Run the selected suites; failures, including internal errors, become FAIL lines."""
    if which not in SUITES:
        raise RangeError(f"unknown verification suite {which!r}")
    checks: list[Check] = []
    if which in ("all", "coefficients"):
        checks += _guarded("coefficients", coefficient_checks)
    if which in ("all", "adiabatic"):
        checks += _guarded("adiabatic", lambda: adiabatic_checks(model, seed, samples))

    failed = sum(not c.passed for c in checks)
    log.info("verification: %d checks, %d failed", len(checks), failed)
    return checks


def _guarded(name: str, run) -> list[Check]:
    try:
        return run()
    except QMomentsError as exc:
        log.error("%s suite aborted: %s", name, exc)
        return [Check(f"{name}_suite", False, type(exc).__name__, "no error")]
