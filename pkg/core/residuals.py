"""Substitute the closed-form moments back into the equations that define them.

Time derivatives are taken on truncated Taylor series along the polynomial
trajectory through each jet. That trajectory is a legitimate q(t), so every
identity holds exactly for it and the residuals measure roundoff only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np

from core.adiabatic import (Kinematics, Scalar, experimental_g22_e2, g00, g01,
                            g02, g10, g4, theta_of)
from core.errors import DomainError, RangeError
from core.model import Jet, OscillatorModel, stiffness

log = logging.getLogger("qmoments.residuals")

RESIDUAL_LIMIT = 1e-10
SERIES_LENGTH = 8
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ResidualSummary:
    order: tuple[int, int]
    max_residual: float
    checked: int
    skipped: int

    @property
    def label(self) -> str:
        return f"({self.order[0]},{self.order[1]})"

    @property
    def passed(self) -> bool:
        return self.max_residual <= RESIDUAL_LIMIT


def residual_model() -> OscillatorModel:
    """Degree-7 anharmonicity with X > 0 on [-1, 1]; exercises U''' through U''''''."""
    return OscillatorModel.from_powers(
        {3: 0.05, 4: 1.0 / 24.0, 5: 0.01, 6: 0.002, 7: 0.0005},
        m=1.3, omega=0.8, hbar=1.0)


def sample_jets(model: OscillatorModel, count: int = 100, seed: int = DEFAULT_SEED,
                q_span: float = 1.0) -> list[Jet]:
    """Seeded jets of order 4 with X(q) > 0."""
    rng = np.random.default_rng(seed)
    jets: list[Jet] = []
    attempts = 0
    while len(jets) < count:
        attempts += 1
        if attempts > 100 * max(count, 1):
            raise DomainError(f"no jets with X > 0 found in [-{q_span}, {q_span}]")
        q = float(rng.uniform(-q_span, q_span))
        derivatives = rng.normal(size=4)
        try:
            stiffness(model, q)
        except DomainError:
            continue
        jets.append(Jet.from_sequence([q, *derivatives]))
    return jets


def _value(s: Scalar) -> float:
    return s if isinstance(s, float) else s.value


def _rate(s: Scalar) -> float:
    return 0.0 if isinstance(s, float) else s.derivative_at_origin(1)


def _relative(terms: Sequence[float]) -> float:
    scale = sum(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


# Families. Each yields term lists whose sums must vanish.

def _zeroth_order(model, k: Kinematics, jet: Jet, n_max: int):
    w, x = k.omega, _value(k.x)
    for n in range(2, n_max + 1, 2):
        for a in range(1, n, 2):
            yield [-a * w * x * _value(g00(k, n, a - 1)), (n - a) * w * _value(g00(k, n, a + 1))]


def _first_order(model, k: Kinematics, jet: Jet, n_max: int):
    w, x = k.omega, _value(k.x)
    for n in range(2, n_max + 1, 2):
        for a in range(0, n + 1, 2):
            yield [_rate(g00(k, n, a)),
                   a * w * x * _value(g01(k, n, a - 1)),
                   -(n - a) * w * _value(g01(k, n, a + 1))]


def _second_order(model, k: Kinematics, jet: Jet, n_max: int):
    w, x = k.omega, _value(k.x)
    for n in range(2, n_max + 1, 2):
        for a in range(1, n, 2):
            yield [_rate(g01(k, n, a)),
                   a * w * x * _value(g02(k, n, a - 1)),
                   -(n - a) * w * _value(g02(k, n, a + 1))]
        # Third-order constraint fixing G^{0,n}
        yield [comb(n // 2, a // 2) * x**((n - a) / 2) * _rate(g02(k, n, a))
               for a in range(0, n + 1, 2)]


def _sqrt_hbar_order(model, k: Kinematics, jet: Jet, n_max: int):
    w, x = k.omega, _value(k.x)
    coupling = _value(k.u3) / (2.0 * (k.m * w)**1.5)
    g02_ground = _value(g00(k, 2, 0))
    for n in range(2, n_max + 1):
        for a in range(n + 1):
            s = coupling * a
            yield [-a * w * x * _value(g10(k, n, a - 1)),
                   (n - a) * w * _value(g10(k, n, a + 1)),
                   s * g02_ground * _value(g00(k, n - 1, a - 1)),
                   -s * _value(g00(k, n + 1, a - 1)),
                   s * (a - 1) * (a - 2) / 12.0 * _value(g00(k, n - 3, a - 3))]


def _fourth_order(model, k: Kinematics, jet: Jet, n_max: int):
    moment = g4(k)
    yield [2.0 * _value(k.x) * _rate(moment),
           _value(k.x1) * _value(moment),
           _rate(theta_of(k)) / k.omega]


def _hbar_order(model, k: Kinematics, jet: Jet, n_max: int):
    w, m = k.omega, k.m
    g02_e2 = 0.25 + 0.1 * jet.q
    g22_e2 = experimental_g22_e2(model, jet.q, g02_e2, verbatim=False)
    yield [w * g22_e2,
           -w * _value(k.x) * g02_e2,
           -_value(k.u3) / (2.0 * (m * w)**1.5) * _value(g10(k, 3, 0)),
           -_value(k.u4) / (6.0 * (m * w)**2) * _value(g00(k, 4, 0))]


RESIDUAL_FAMILIES: dict[tuple[int, int], Callable] = {
    (0, 0): _zeroth_order,
    (0, 1): _first_order,
    (0, 2): _second_order,
    (1, 0): _sqrt_hbar_order,
    (0, 4): _fourth_order,
    (2, 0): _hbar_order,
}


def residual_suite(model: OscillatorModel, order: tuple[int, int], jets: Iterable[Jet],
                   n_max: int = 8) -> ResidualSummary:
    """Maximum relative residual of one family over the sample jets."""
    order = tuple(order)
    if order not in RESIDUAL_FAMILIES:
        raise RangeError(f"no residual family for order {order}")
    family = RESIDUAL_FAMILIES[order]

    worst = 0.0
    checked = skipped = 0
    for jet in jets:
        try:
            k = Kinematics.along(model, jet.require(4), SERIES_LENGTH)
            for terms in family(model, k, jet, n_max):
                worst = max(worst, _relative(terms))
        except DomainError as exc:
            skipped += 1
            log.warning("skipping jet at q=%.6g: %s", jet.q, exc)
            continue
        checked += 1

    log.debug("residual family %s: max %.3e over %d jets", order, worst, checked)
    return ResidualSummary(order, worst, checked, skipped)


def residual_report(model: OscillatorModel, jets: Sequence[Jet],
                    n_max: int = 8) -> list[ResidualSummary]:
    return [residual_suite(model, order, jets, n_max) for order in RESIDUAL_FAMILIES]
