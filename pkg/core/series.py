"""Truncated Taylor series in time, used to differentiate closed forms along a jet.

A series stores normalized coefficients c_k = f^(k)(t0)/k!. Arithmetic keeps the
shortest length of its operands, so a derivative (which loses the top
coefficient) never pretends to know more than it does.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from core.errors import DomainError, RangeError


class TaylorSeries:
    __slots__ = ("coeffs",)
    __array_ufunc__ = None  # keep numpy scalars from swallowing series operands

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = np.asarray(coeffs, dtype=np.float64)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise RangeError("a series needs at least one coefficient")

    @classmethod
    def from_derivatives(cls, derivatives: Sequence[float], length: int) -> "TaylorSeries":
        """Series of a trajectory whose derivatives at t0 are given; the rest are zero."""
        coeffs = np.zeros(length)
        for k, value in enumerate(derivatives[:length]):
            coeffs[k] = value / math.factorial(k)
        return cls(coeffs)

    @classmethod
    def constant(cls, value: float, length: int) -> "TaylorSeries":
        coeffs = np.zeros(length)
        coeffs[0] = value
        return cls(coeffs)

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def derivative_at_origin(self, k: int) -> float:
        if k >= len(self):
            raise RangeError(f"series of length {len(self)} has no derivative {k}")
        return float(self.coeffs[k] * math.factorial(k))

    def derivative(self) -> "TaylorSeries":
        if len(self) < 2:
            raise RangeError("cannot differentiate a series of length 1")
        k = np.arange(1, len(self))
        return TaylorSeries(self.coeffs[1:] * k)

    # Arithmetic

    def _coerce(self, other):
        if isinstance(other, TaylorSeries):
            n = min(len(self), len(other))
            return self.coeffs[:n], other.coeffs[:n]
        if isinstance(other, (int, float, np.floating, np.integer)):
            rhs = np.zeros(len(self))
            rhs[0] = float(other)
            return self.coeffs, rhs
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return TaylorSeries(pair[0] + pair[1])

    __radd__ = __add__

    def __neg__(self):
        return TaylorSeries(-self.coeffs)

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return TaylorSeries(pair[0] - pair[1])

    def __rsub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return TaylorSeries(pair[1] - pair[0])

    def __mul__(self, other):
        if isinstance(other, TaylorSeries):
            n = min(len(self), len(other))
            return TaylorSeries(np.convolve(self.coeffs[:n], other.coeffs[:n])[:n])
        if isinstance(other, (int, float, np.floating, np.integer)):
            return TaylorSeries(self.coeffs * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return TaylorSeries(self.coeffs / float(other))
        return NotImplemented

    def __pow__(self, exponent):
        """Real power of a series with positive constant term."""
        if not isinstance(exponent, (int, float, np.floating, np.integer)):
            return NotImplemented
        alpha = float(exponent)
        f = self.coeffs
        f0 = f[0]
        if not f0 > 0.0:
            raise DomainError(f"series power needs a positive constant term, got {f0:.6g}",
                              x=float(f0))
        g = np.zeros_like(f)
        g[0] = f0**alpha
        for k in range(1, len(f)):
            j = np.arange(1, k + 1)
            g[k] = np.sum(((alpha + 1.0) * j - k) * f[j] * g[k - j]) / (k * f0)
        return TaylorSeries(g)

    def compose(self, poly: Polynomial) -> "TaylorSeries":
        """poly(self) by Horner's rule."""
        out = TaylorSeries.constant(0.0, len(self))
        for c in reversed(poly.coef):
            out = out * self + float(c)
        return out

    def __repr__(self) -> str:
        return f"TaylorSeries({self.coeffs.tolist()})"
