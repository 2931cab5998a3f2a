"""Closed-form adiabatic moments of the anharmonic vacuum.

Every closed form is written once over `Kinematics`, which holds the stiffness
X = 1 + U''/mω² with its time derivatives. Built at a jet the fields are floats;
built along a jet they are truncated Taylor series, so the same formulas can be
differentiated in time without finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

from core.coefficients import (ab_coeffs, ap_bp, binomial_weight, c_coeff,
                               d_coeff, d_tilde_coeff, ground_prefactor)
from core.errors import RangeError, UnsupportedOrderError
from core.model import Jet, OscillatorModel, stiffness, u_derivative
from core.series import TaylorSeries

log = logging.getLogger("qmoments.adiabatic")

Scalar = Union[float, TaylorSeries]

UNCERTAINTY_FLOOR = 0.25
UNCERTAINTY_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class ExpansionOrder:
    """(e, i): power of √ħ and adiabatic order of a moment contribution."""

    e: int
    i: int

    def __post_init__(self):
        if (self.e, self.i) not in SUPPORTED_ORDERS:
            raise UnsupportedOrderError(f"expansion order ({self.e},{self.i}) is not supported")

    @classmethod
    def parse(cls, text: str) -> "ExpansionOrder":
        try:
            e, i = (int(part) for part in text.split(","))
        except ValueError as exc:
            raise RangeError(f"expansion order must read 'e,i', got {text!r}") from exc
        return cls(e, i)

    def __str__(self) -> str:
        return f"({self.e},{self.i})"


SUPPORTED_ORDERS = frozenset({(0, 0), (0, 1), (0, 2), (0, 3), (0, 4), (1, 0), (1, 1)})


@dataclass(frozen=True, slots=True)
class Kinematics:
    """X and its first four time derivatives, with U''' and U'''' at q."""

    m: float
    omega: float
    x: Scalar
    u3: Scalar
    u4: Scalar
    x1: Scalar | None = None
    x2: Scalar | None = None
    x3: Scalar | None = None
    x4: Scalar | None = None

    @classmethod
    def at(cls, model: OscillatorModel, jet: Jet) -> "Kinematics":
        q = jet.q
        x = stiffness(model, q)
        scale = model.m * model.omega**2
        u3, u4, u5, u6 = (u_derivative(model, q, k) for k in (3, 4, 5, 6))

        d = jet.values()
        x1 = x2 = x3 = x4 = None
        if len(d) > 1:
            x1 = u3 * d[1] / scale
        if len(d) > 2:
            x2 = (u3 * d[2] + u4 * d[1]**2) / scale
        if len(d) > 3:
            x3 = (u3 * d[3] + 3.0 * u4 * d[1] * d[2] + u5 * d[1]**3) / scale
        if len(d) > 4:
            x4 = (u3 * d[4] + 4.0 * u4 * d[3] * d[1] + 3.0 * u4 * d[2]**2
                  + 6.0 * u5 * d[1]**2 * d[2] + u6 * d[1]**4) / scale
        return cls(model.m, model.omega, x, u3, u4, x1, x2, x3, x4)

    @classmethod
    def along(cls, model: OscillatorModel, jet: Jet, length: int = 8) -> "Kinematics":
        """Series along the polynomial trajectory through the jet."""
        stiffness(model, jet.q)
        q = TaylorSeries.from_derivatives(jet.values(), length)
        x = 1.0 + q.compose(model.derivative_poly(2)) / (model.m * model.omega**2)
        x1 = x.derivative()
        x2 = x1.derivative()
        x3 = x2.derivative()
        x4 = x3.derivative()
        return cls(model.m, model.omega, x,
                   q.compose(model.derivative_poly(3)),
                   q.compose(model.derivative_poly(4)),
                   x1, x2, x3, x4)

    def need(self, order: int) -> "Kinematics":
        available = (self.x1, self.x2, self.x3, self.x4)
        if order > 0 and any(v is None for v in available[:order]):
            raise RangeError(f"closed form needs a jet of order {order}")
        return self


def _in_range(n: int, a: int) -> bool:
    return n >= 0 and 0 <= a <= n


def _check_index(n: int, a: int):
    if not isinstance(n, int) or not isinstance(a, int) or n < 2 or not 0 <= a <= n:
        raise RangeError(f"moment index needs n >= 2 and 0 <= a <= n, got a={a}, n={n}")


# Closed forms over Kinematics. Out-of-range indices read as zero.

def g00(k: Kinematics, n: int, a: int) -> Scalar:
    if not _in_range(n, a) or n % 2 or a % 2:
        return 0.0
    return float(ground_prefactor(n, a)) * k.x**((2 * a - n) / 4)


def g01(k: Kinematics, n: int, a: int) -> Scalar:
    if not _in_range(n, a) or n % 2 or a % 2 == 0:
        return 0.0
    k.need(1)
    return float(c_coeff(n, a)) * k.x1 / k.omega * k.x**((2 * a - n - 6) / 4)


def _g0n(k: Kinematics, n: int) -> Scalar:
    a_prime, b_prime = ap_bp(n)
    w2 = k.omega**2
    return (float(a_prime) * k.x2 / w2 * k.x**(-(n + 8) / 4)
            + float(b_prime) * (k.x1 * k.x1) / (4.0 * w2) * k.x**(-(n + 12) / 4))


def g02(k: Kinematics, n: int, a: int) -> Scalar:
    if not _in_range(n, a) or n % 2 or a % 2 or n == 0:
        return 0.0
    k.need(2)
    a_tab, b_tab = ab_coeffs(n)
    w2 = k.omega**2
    value = _g0n(k, n)
    if a == 0:
        return value
    return (float(a_tab[a]) * k.x2 / w2 * k.x**((2 * a - n - 8) / 4)
            + float(b_tab[a]) * (k.x1 * k.x1) / (4.0 * w2) * k.x**((2 * a - n - 12) / 4)
            + float(binomial_weight(n, a)) * k.x**(a / 2) * value)


def _d_scale(k: Kinematics) -> Scalar:
    return k.u3 / (k.m**1.5 * k.omega**2.5)


def g10(k: Kinematics, n: int, a: int) -> Scalar:
    if not _in_range(n, a) or n % 2 == 0 or a % 2 or n < 3:
        return 0.0
    return float(d_coeff(n, a)) * _d_scale(k) * k.x**((2 * a - n - 5) / 4)


def g11(k: Kinematics, n: int, a: int) -> Scalar:
    if not _in_range(n, a) or n % 2 == 0 or n < 3:
        return 0.0
    if a % 2 == 0:
        raise UnsupportedOrderError(
            f"G^({a},{n}) at order (1,1) has no closed form for even a and odd n")
    # Keyed by the odd index of the balance it solves; the moment itself sits at a-1
    return float(d_tilde_coeff(n, a - 1)) * _d_scale(k) * k.x**((2 * a - n - 7) / 4)


def g03(k: Kinematics, n: int, a: int) -> Scalar:
    if _in_range(n, a) and n % 2 == 0 and a % 2:
        raise UnsupportedOrderError(
            f"G^({a},{n}) at order (0,3) is only known for even a or odd n")
    return 0.0


def g4(k: Kinematics) -> Scalar:
    """G^(0,2) at order (0,4)."""
    k.need(4)
    x, x1, x2, x3, x4 = k.x, k.x1, k.x2, k.x3, k.x4
    return (-x4 / 64.0 * x**-3.5
            + (21.0 / 256.0 * x2 * x2 + 7.0 / 64.0 * x1 * x3) * x**-4.5
            - 231.0 / 512.0 * x1 * x1 * x2 * x**-5.5
            + 1155.0 / 4096.0 * x1 * x1 * x1 * x1 * x**-6.5) / k.omega**4


def theta_of(k: Kinematics) -> Scalar:
    k.need(4)
    x, x1, x2, x3, x4 = k.x, k.x1, k.x2, k.x3, k.x4
    # Last power is X^(-11/2); the positive exponent does not balance the fourth-order constraint
    return (x4 / 32.0 * x**-2.5
            - (5.0 / 32.0 * x2 * x2 + 15.0 / 64.0 * x1 * x3) * x**-3.5
            + 245.0 / 256.0 * x1 * x1 * x2 * x**-4.5
            - 315.0 / 512.0 * x1 * x1 * x1 * x1 * x**-5.5) / k.omega**3


_ORDER_TABLE = {
    (0, 0): g00,
    (0, 1): g01,
    (0, 2): g02,
    (0, 3): g03,
    (1, 0): g10,
    (1, 1): g11,
}


# Pointwise evaluation at a jet

def moment_00(model: OscillatorModel, n: int, a: int, q: float) -> float:
    _check_index(n, a)
    return g00(Kinematics.at(model, Jet(q)), n, a)


def moment_01(model: OscillatorModel, n: int, a: int, jet: Jet) -> float:
    _check_index(n, a)
    return g01(Kinematics.at(model, jet.require(1)), n, a)


def moment_02(model: OscillatorModel, n: int, a: int, jet: Jet) -> float:
    _check_index(n, a)
    return g02(Kinematics.at(model, jet.require(2)), n, a)


def moment_10(model: OscillatorModel, n: int, a: int, q: float) -> float:
    _check_index(n, a)
    return g10(Kinematics.at(model, Jet(q)), n, a)


def moment_11(model: OscillatorModel, n: int, a: int, jet: Jet) -> float:
    """Order (1,1) solution of the balance with odd index a.

    For odd n the value returned is G^{a-1,n}_(1,1), the even-index moment that balance
    determines; see evaluated_index. Even n gives 0, even a with odd n is unsupported.
    """
    _check_index(n, a)
    return g11(Kinematics.at(model, jet.require(1)), n, a)


def evaluated_index(order: ExpansionOrder, n: int, a: int) -> tuple[int, int]:
    """(a, n) of the moment that moment(order, n, a) actually returns."""
    if (order.e, order.i) == (1, 1) and n % 2 and a % 2:
        return a - 1, n
    return a, n


def moment(model: OscillatorModel, order: ExpansionOrder, n: int, a: int, jet: Jet) -> float:
    """G^{a,n}_{e,i} for any supported order, at the moment named by evaluated_index."""
    _check_index(n, a)
    if (order.e, order.i) == (0, 4):
        if (a, n) != (0, 2):
            raise UnsupportedOrderError("order (0,4) is only available for G^(0,2)")
        return g4(Kinematics.at(model, jet.require(4)))
    jet.require(min(order.i, 2))
    return _ORDER_TABLE[(order.e, order.i)](Kinematics.at(model, jet), n, a)


def theta(model: OscillatorModel, jet: Jet) -> float:
    return theta_of(Kinematics.at(model, jet.require(4)))


def moment_22_fourth(model: OscillatorModel, jet: Jet) -> float:
    """G^(2,2) at order (0,4): X G^(0,2)_(0,4) + Θ/ω."""
    k = Kinematics.at(model, jet.require(4))
    return k.x * g4(k) + theta_of(k) / k.omega


def g02_stack(model: OscillatorModel, jet: Jet, hbar_order: int = 1,
              adiabatic_order: int = 4, g02_e2: float = 0.0) -> float:
    """G^(0,2) summed over the supported orders, with λ = 1.

    The √ħ contributions G^(0,2)_(1,i) vanish for i <= 4, as do the odd adiabatic
    orders at ħ⁰. At hbar_order 2 the user value g02_e2 enters multiplied by ħ.
    """
    if hbar_order not in (0, 1, 2):
        raise RangeError(f"hbar_order must be 0, 1 or 2, got {hbar_order}")
    if adiabatic_order not in range(5):
        raise RangeError(f"adiabatic_order must be within 0..4, got {adiabatic_order}")
    k = Kinematics.at(model, jet.require(adiabatic_order))

    value = g00(k, 2, 0)
    if adiabatic_order >= 2:
        value += g02(k, 2, 0)
    if adiabatic_order >= 4:
        value += g4(k)
    if hbar_order >= 2:
        value += model.hbar * g02_e2
    return value


def moment_value(model: OscillatorModel, n: int, a: int, jet: Jet,
                 hbar_order: int = 1, adiabatic_order: int = 0) -> float:
    """Σ ħ^(e/2) G^{a,n}_{e,i} over the supported grid; used for initial data and closure.

    Beyond G^(0,2) no closed form exists at O(ħ), so e is capped at 1 here.
    """
    _check_index(n, a)
    if (a, n) == (0, 2):
        return g02_stack(model, jet, hbar_order, adiabatic_order)
    if adiabatic_order > 3:
        raise UnsupportedOrderError(
            f"G^({a},{n}) is only known through adiabatic order 3")

    k = Kinematics.at(model, jet.require(min(adiabatic_order, 2)))
    sqrt_hbar = model.hbar**0.5
    value = 0.0
    for e in range(min(hbar_order, 1) + 1):
        for i in range(adiabatic_order + 1):
            if (e, i) not in _ORDER_TABLE:
                continue
            if (e, i) == (1, 1) and n % 2:
                raise UnsupportedOrderError(
                    f"G^({a},{n}) at order (1,1) is not available as a moment value")
            value += sqrt_hbar**e * _ORDER_TABLE[(e, i)](k, n, a)
    return value


# Second-moment block

@dataclass(frozen=True, slots=True)
class SecondMomentBlock:
    g02: float
    g22: float
    g12: float
    x: float
    y: float


def _y_of(k: Kinematics) -> Scalar:
    w2 = k.omega**2
    return k.x2 / (16.0 * w2) * k.x**-2.5 - 5.0 * k.x1 * k.x1 / (64.0 * w2) * k.x**-3.5


def second_moment_block(model: OscillatorModel, jet: Jet) -> SecondMomentBlock:
    """G^(0,2), G^(2,2) and G^(1,2) through orders (0,0)+(0,1)+(1,0)+(1,1)+(0,2)."""
    k = Kinematics.at(model, jet.require(2))
    w2 = k.omega**2
    x = k.x
    y = _y_of(k)
    g02_value = 0.5 * x**-0.5 + y
    g22_value = (0.5 * x**0.5 - k.x2 / (16.0 * w2) * x**-1.5
                 + 7.0 * k.x1**2 / (64.0 * w2) * x**-2.5)
    g12_value = -k.x1 / (8.0 * k.omega) * x**-1.5
    return SecondMomentBlock(g02_value, g22_value, g12_value, x, y)


def uncertainty_value(block: SecondMomentBlock, model: OscillatorModel | None = None) -> float:
    return block.g02 * block.g22 - block.g12**2


def uncertainty_reduced(block: SecondMomentBlock, model: OscillatorModel, jet: Jet) -> float:
    """1/4 - XY² + (U'''q̇)²/(32m²ω⁶) X^(-5/2) Y."""
    k = Kinematics.at(model, jet.require(1))
    kinetic = k.x1**2 / (32.0 * k.omega**2)
    return 0.25 - block.x * block.y**2 + kinetic * block.x**-2.5 * block.y


def uncertainty_violated(value: float, tol: float = UNCERTAINTY_TOL) -> bool:
    return value < UNCERTAINTY_FLOOR - tol


def zero_point(model: OscillatorModel, jet: Jet) -> float:
    """Z' = G^(0,2) + G^(2,2); the zero-point energy is ħωZ'/2."""
    block = second_moment_block(model, jet)
    return block.g02 + block.g22


def zero_point_closed_form(model: OscillatorModel, jet: Jet) -> float:
    k = Kinematics.at(model, jet.require(2))
    x = k.x
    y = _y_of(k)
    return 0.5 * x**-0.5 * (1.0 + x) + y * (1.0 - x) + k.x1**2 / (32.0 * k.omega**2) * x**-2.5


# O(ħ), n = 2

def experimental_g22_e2(model: OscillatorModel, q: float, g02_e2: float,
                        verbatim: bool = True) -> float:
    """G^(2,2)_(2,0) in terms of a supplied G^(0,2)_(2,0).

    verbatim keeps the factor (1 - U''/mω²) as first written; otherwise X is used, which
    is what the a = 1 balance at O(ħ) produces.
    """
    scale = model.m * model.omega**2
    u2 = u_derivative(model, q, 2)
    if verbatim:
        log.warning("using the factor (1 - U''/mω²) in place of X for G22 at O(ħ)")
        factor = 1.0 - u2 / scale
    else:
        factor = stiffness(model, q)
    u3 = u_derivative(model, q, 3)
    u4 = u_derivative(model, q, 4)
    m, w = model.m, model.omega
    return (factor * g02_e2
            - u3**2 / (24.0 * m**3 * w**5) * factor**-2
            + u4 / (8.0 * m**2 * w**3) / factor)
