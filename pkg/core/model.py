"""Oscillator parameters, the polynomial anharmonicity and the stiffness X(q)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from numpy.polynomial import Polynomial

from core.errors import DomainError, ModelError, RangeError

MAX_DEGREE = 12


@dataclass(frozen=True, slots=True)
class OscillatorModel:
    """Anharmonic oscillator H = p²/2m + mω²q²/2 + U(q).

    Attributes:
        m: mass
        omega: harmonic angular frequency
        hbar: action quantum, free so that ħ-sweeps can rescale it
        u_coeffs: c_k of U(q) = Σ c_k q^k, indexed by power; entries 0..2 must vanish
    """

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    u_coeffs: tuple[float, ...] = ()
    _poly: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.u_coeffs)
        # Trailing zeros carry no information
        while coeffs and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "u_coeffs", coeffs)

        for name in ("m", "omega", "hbar"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ModelError(f"{name} must be positive and finite, got {value}")
        if not all(math.isfinite(c) for c in coeffs):
            raise ModelError("u_coeffs must be finite")
        if len(coeffs) - 1 > MAX_DEGREE:
            raise ModelError(
                f"degree {len(coeffs) - 1} exceeds the cap of {MAX_DEGREE}")
        for power in range(min(3, len(coeffs))):
            if coeffs[power] != 0.0:
                raise ModelError(
                    f"u_coeffs[{power}] must be zero: U(q) starts at q^3 "
                    "(constant, linear and quadratic parts belong to the harmonic term)")

        object.__setattr__(self, "_poly", Polynomial(coeffs or (0.0,)))

    @classmethod
    def from_powers(cls, powers: dict[int, float], **kwargs) -> "OscillatorModel":
        """Build a model from a {power: coefficient} mapping."""
        if not powers:
            return cls(u_coeffs=(), **kwargs)
        coeffs = [0.0] * (max(powers) + 1)
        for power, value in powers.items():
            if power < 0:
                raise ModelError(f"negative power {power} in u_coeffs")
            coeffs[power] = float(value)
        return cls(u_coeffs=tuple(coeffs), **kwargs)

    @property
    def degree(self) -> int:
        return max(len(self.u_coeffs) - 1, 0)

    @property
    def is_harmonic(self) -> bool:
        return not self.u_coeffs

    def derivative_poly(self, k: int) -> Polynomial:
        """U^(k) as a numpy Polynomial (the zero polynomial past the degree)."""
        if k < 0:
            raise RangeError(f"derivative order must be non-negative, got {k}")
        if k > self.degree or self.is_harmonic:
            return Polynomial((0.0,))
        return self._poly.deriv(k) if k else self._poly

    def with_hbar(self, hbar: float) -> "OscillatorModel":
        return OscillatorModel(self.m, self.omega, hbar, self.u_coeffs)


@dataclass(frozen=True, slots=True)
class Jet:
    """Position with its first few time derivatives.

    Missing derivatives are None; the order of a jet is the highest k such that
    derivatives 0..k are all present.
    """

    q: float
    dq: float | None = None
    ddq: float | None = None
    dddq: float | None = None
    ddddq: float | None = None

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "Jet":
        if not 1 <= len(values) <= 5:
            raise RangeError(f"a jet carries 1 to 5 values, got {len(values)}")
        return cls(*(float(v) for v in values))

    def values(self) -> tuple[float, ...]:
        out = []
        for value in (self.q, self.dq, self.ddq, self.dddq, self.ddddq):
            if value is None:
                break
            out.append(value)
        return tuple(out)

    @property
    def order(self) -> int:
        return len(self.values()) - 1

    def require(self, order: int) -> "Jet":
        """Return self, raising RangeError when the jet is shorter than order."""
        if self.order < order:
            raise RangeError(f"jet of order {self.order} is too short, need {order}")
        values = self.values()
        if not all(math.isfinite(v) for v in values):
            raise RangeError("jet values must be finite")
        return self


def u_derivative(model: OscillatorModel, q: float, k: int) -> float:
    """Evaluate U^(k)(q); exactly 0.0 past the polynomial degree."""
    return float(model.derivative_poly(k)(q))


def potential(model: OscillatorModel, q: float) -> float:
    return u_derivative(model, q, 0)


def stiffness(model: OscillatorModel, q: float) -> float:
    """X(q) = 1 + U''(q)/(mω²); raises DomainError when X <= 0."""
    if model.is_harmonic:
        return 1.0
    x = 1.0 + u_derivative(model, q, 2) / (model.m * model.omega**2)
    if not x > 0.0:
        raise DomainError(f"stiffness X = {x:.6g} <= 0 at q = {q:.6g}", x=x, q=q)
    return x


def classical_force(model: OscillatorModel, q: float) -> float:
    return -model.m * model.omega**2 * q - u_derivative(model, q, 1)


def classical_acceleration(model: OscillatorModel, q: float) -> float:
    return classical_force(model, q) / model.m


def classical_jet(model: OscillatorModel, q: float, qdot: float) -> Jet:
    """Jet of the classical trajectory through (q, q̇), up to the fourth derivative."""
    m, w2 = model.m, model.omega**2
    u2 = u_derivative(model, q, 2)
    u3 = u_derivative(model, q, 3)
    ddq = classical_acceleration(model, q)
    dddq = (-w2 - u2 / m) * qdot
    ddddq = (-w2 - u2 / m) * ddq - u3 / m * qdot**2
    return Jet(q, qdot, ddq, dddq, ddddq)


def quartic_model(coupling: float = 1.0 / 24.0, **kwargs) -> OscillatorModel:
    """U(q) = coupling · q⁴, the reference anharmonicity used by the CLI defaults."""
    return OscillatorModel.from_powers({4: coupling}, **kwargs)
