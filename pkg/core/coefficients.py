"""Exact-rational expansion coefficients for the anharmonic vacuum (C_n = 2⁻ⁿ).

Recurrences are the definitions; the summed closed forms are kept as validators
and any disagreement is logged, never patched over. No floating point is used
in this module.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from core.errors import ConsistencyError, RangeError

log = logging.getLogger("qmoments.coefficients")

N_MAX = 16


# Range checks

def _check_even_n(n: int, n_max: int = N_MAX):
    if not isinstance(n, int) or n % 2 or not 2 <= n <= n_max:
        raise RangeError(f"n must be even with 2 <= n <= {n_max}, got {n}")


def _check_odd_n(n: int, n_max: int = N_MAX):
    if not isinstance(n, int) or n % 2 == 0 or not 3 <= n <= n_max - 1:
        raise RangeError(f"n must be odd with 3 <= n <= {n_max - 1}, got {n}")


# Exact Gamma bookkeeping

@dataclass(frozen=True, slots=True)
class PiRational:
    """coefficient · π^(half_powers/2), closed under multiplication and division."""

    coefficient: Fraction
    half_powers: int = 0

    def __mul__(self, other):
        if isinstance(other, PiRational):
            return PiRational(self.coefficient * other.coefficient,
                              self.half_powers + other.half_powers)
        return PiRational(self.coefficient * Fraction(other), self.half_powers)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiRational):
            return PiRational(self.coefficient / other.coefficient,
                              self.half_powers - other.half_powers)
        return PiRational(self.coefficient / Fraction(other), self.half_powers)

    def __add__(self, other: "PiRational") -> "PiRational":
        if self.coefficient == 0:
            return other
        if other.coefficient == 0:
            return self
        if self.half_powers != other.half_powers:
            raise ConsistencyError("cannot add terms with different powers of π")
        return PiRational(self.coefficient + other.coefficient, self.half_powers)

    def __neg__(self):
        return PiRational(-self.coefficient, self.half_powers)

    def __sub__(self, other: "PiRational") -> "PiRational":
        return self + (-other)

    def rational(self) -> Fraction:
        if self.coefficient != 0 and self.half_powers != 0:
            raise ConsistencyError(
                f"expected a rational, found a factor π^({self.half_powers}/2)")
        return self.coefficient


PI = PiRational(Fraction(1), 2)
SQRT_PI = PiRational(Fraction(1), 1)


def double_factorial(k: int) -> int:
    """k!! with (-1)!! = 0!! = 1."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def gamma_half(twice_x: int) -> PiRational:
    """Γ(x) for x = twice_x/2 > 0, exact: Γ(k+1/2) = √π (2k-1)!!/2^k."""
    if twice_x <= 0:
        raise RangeError(f"Γ is evaluated at positive (half-)integers only, got {twice_x}/2")
    if twice_x % 2 == 0:
        return PiRational(Fraction(factorial(twice_x // 2 - 1)))
    k = (twice_x - 1) // 2
    return PiRational(Fraction(double_factorial(2 * k - 1), 2**k), 1)


def pochhammer(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= x + i
    return out


# Zeroth order

@lru_cache(maxsize=None)
def ground_prefactor(n: int, a: int) -> Fraction:
    """(n-a)! a! / (2ⁿ ((n-a)/2)! (a/2)!) for even a, n; zero for odd a or n."""
    if n < 0 or a < 0 or a > n or n % 2 or a % 2:
        return Fraction(0)
    return Fraction(factorial(n - a) * factorial(a),
                    2**n * factorial((n - a) // 2) * factorial(a // 2))


# First adiabatic order

@lru_cache(maxsize=None)
def _c_column(n: int) -> tuple[tuple[int, Fraction], ...]:
    c: dict[int, Fraction] = {}
    upper = Fraction(0)
    for a in range(n, 1, -2):
        c[a - 1] = ((n - a) * upper - ground_prefactor(n, a) * (2 * a - n) / 4) / a
        upper = c[a - 1]

    for a, value in c.items():
        closed = c_coeff_closed_form(n, a)
        if closed != value:
            log.warning("C[%d,%d]: recurrence %s differs from closed form %s",
                        a, n, value, closed)
    return tuple(sorted(c.items()))


def c_coeff(n: int, a: int) -> Fraction:
    """C_{a,n} by descending recurrence from C_{n-1,n} = -2^-(n+2) n!/(n/2)!."""
    _check_even_n(n)
    if a % 2 == 0 or not 1 <= a <= n - 1:
        raise RangeError(f"a must be odd with 1 <= a <= n-1, got a={a}, n={n}")
    return dict(_c_column(n))[a]


def _shifted_prefactor(n: int, a: int) -> Fraction:
    return Fraction(factorial(n - a) * factorial(a - 1),
                    2**(n + 2) * factorial((n - a) // 2) * factorial(a // 2))


def c_coeff_closed_form(n: int, a: int) -> Fraction:
    """Summed closed form of C_{a,n} (odd a), used to validate the recurrence."""
    if n % 2 or a % 2 == 0 or not 1 <= a <= n - 1:
        raise RangeError(f"closed form needs even n and odd a < n, got a={a}, n={n}")
    top = a + 1
    value = -_shifted_prefactor(n, top) * (2 * top - n)
    for b in range((n - top - 2) // 2 + 1):
        product = Fraction(1)
        for c in range(b + 1):
            product *= Fraction(n - (top + 2 * c), top + 2 * c)
        shifted = top + 2 * (b + 1)
        value -= product * _shifted_prefactor(n, shifted) * (2 * shifted - n)
    return value


# Second adiabatic order

@lru_cache(maxsize=None)
def _ab_columns(n: int):
    a_tab = {0: Fraction(0)}
    b_tab = {0: Fraction(0)}
    for a in range(1, n, 2):
        c = c_coeff(n, a)
        a_tab[a + 1] = c / (n - a) + Fraction(a, n - a) * a_tab[a - 1]
        b_tab[a + 1] = c * (2 * a - n - 6) / (n - a) + Fraction(a, n - a) * b_tab[a - 1]
    return tuple(a_tab.items()), tuple(b_tab.items())


def ab_coeffs(n: int) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
    """A_{a,n} and B_{a,n} for even a in [0, n], seeded by A_{0,n} = B_{0,n} = 0."""
    _check_even_n(n)
    a_items, b_items = _ab_columns(n)
    return dict(a_items), dict(b_items)


def binomial_weight(n: int, a: int) -> Fraction:
    """binom(n/2, a/2) / binom(n, a), the weight of G^{0,n} inside G^{a,n}."""
    return Fraction(comb(n // 2, a // 2), comb(n, a))


@lru_cache(maxsize=None)
def _ap_bp(n: int) -> tuple[Fraction, Fraction]:
    a_tab, b_tab = ab_coeffs(n)
    evens = range(0, n + 1, 2)

    a_num = sum(comb(n // 2, a // 2) * a_tab[a] for a in evens)
    a_den = sum(Fraction(comb(n // 2, a // 2)**2, comb(n, a)) for a in evens)
    b_num = sum(comb(n // 2, a // 2) * b_tab[a] * (2 * a - n - 12) for a in evens)
    b_den = sum(Fraction(comb(n // 2, a // 2)**2, comb(n, a)) * (2 * a - n - 12)
                for a in evens)
    if a_den == 0 or b_den == 0:
        raise ConsistencyError(f"vanishing normalisation for A'/B' at n={n}")
    return -a_num / a_den, -b_num / b_den


def ap_bp(n: int) -> tuple[Fraction, Fraction]:
    """A'_n and B'_n fixing G^{0,n} at second adiabatic order."""
    _check_even_n(n)
    return _ap_bp(n)


@dataclass(frozen=True)
class IdentityReport:
    n: int
    binomial_sum: Fraction
    ab_sum: Fraction

    @property
    def vanishes(self) -> bool:
        return self.binomial_sum == 0 and self.ab_sum == 0


def identity_report(n: int) -> IdentityReport:
    """The two sums that must vanish for the second-order solution to close."""
    _check_even_n(n)
    a_tab, b_tab = ab_coeffs(n)
    evens = range(0, n + 1, 2)
    binomial_sum = sum((Fraction(comb(n // 2, a // 2)**2, comb(n, a)) * (2 * a - n)
                        for a in evens), Fraction(0))
    ab_sum = sum((comb(n // 2, a // 2) * (2 * a - n) * (6 * a_tab[a] + b_tab[a])
                  for a in evens), Fraction(0))
    return IdentityReport(n, binomial_sum, ab_sum)


# O(√ħ), zeroth adiabatic order

def d_source(n: int, a: int, shift: int = -1) -> Fraction:
    """Inhomogeneity a(4a-3n+shift)/(12π) Γ(a/2) Γ((n-a+1)/2) for odd a, odd n."""
    value = (PiRational(Fraction(a * (4 * a - 3 * n + shift), 12))
             * gamma_half(a) * gamma_half(n - a + 1) / PI)
    return value.rational()


def d_source_from_moments(n: int, a: int, doubled: bool = False) -> Fraction:
    """The same inhomogeneity read off the zeroth-order moment products."""
    product = ground_prefactor(n - 1, a - 1) * (1 if doubled else Fraction(1, 2))
    return Fraction(a, 2) * (product
                             - ground_prefactor(n + 1, a - 1)
                             + Fraction((a - 1) * (a - 2), 12) * ground_prefactor(n - 3, a - 3))


@lru_cache(maxsize=None)
def _d_column(n: int, shift: int) -> tuple[tuple[int, Fraction], ...]:
    d: dict[int, Fraction] = {}
    upper = Fraction(0)
    for a in range(n, 0, -2):
        d[a - 1] = ((n - a) * upper + d_source(n, a, shift)) / a
        upper = d[a - 1]

    if shift == -1:
        for a, value in d.items():
            closed = d_coeff_closed_form(n, a)
            if closed != value:
                log.warning("D[%d,%d]: recurrence %s differs from closed form %s",
                            a, n, value, closed)
    return tuple(sorted(d.items()))


def _check_d_index(n: int, a: int):
    _check_odd_n(n)
    if a % 2 or not 0 <= a <= n - 1:
        raise RangeError(f"a must be even with 0 <= a <= n-1, got a={a}, n={n}")


def d_coeff(n: int, a: int) -> Fraction:
    """D_{a,n} (even a, odd n) by descending recurrence from a = n."""
    _check_d_index(n, a)
    return dict(_d_column(n, -1))[a]


def d_tilde_coeff(n: int, a: int) -> Fraction:
    """The first-adiabatic-order variant of D_{a,n}: 4a-3n-1 becomes 4a-3n+2."""
    _check_d_index(n, a)
    return dict(_d_column(n, 2))[a]


def d_coeff_closed_form(n: int, a: int) -> Fraction:
    """Closed form of D_{a,n} with the b = 0, b = 1 and b >= 2 branches."""
    if n % 2 == 0 or a % 2 or not 0 <= a <= n - 1:
        raise RangeError(f"closed form needs odd n and even a < n, got a={a}, n={n}")
    b = (n - a - 1) // 2
    gamma_n = gamma_half(n)
    if b == 0:
        value = PiRational(Fraction(n - 1, 12)) * gamma_n * SQRT_PI / PI
    elif b == 1:
        value = PiRational(Fraction(3 * n - 11, 12 * (n - 2))) * gamma_n * SQRT_PI / PI
    else:
        bracket = (PiRational(Fraction((n - 1) * factorial(b))) * SQRT_PI
                   + PiRational(Fraction(n - 8 * b - 1)) * gamma_half(2 * b + 1))
        for c in range(b - 1):
            term = (PiRational(Fraction((-1)**c * (n - 8 * (b - c - 1) - 1)))
                    * gamma_half(2 * (b - c) - 1)
                    * pochhammer(Fraction(-b), c + 1))
            bracket = bracket - term
        denominator = 12 * pochhammer(1 - Fraction(n, 2), b)
        value = PiRational(Fraction((-1)**b) / denominator) * gamma_n * bracket / PI
    return value.rational()


# Tables

@dataclass(frozen=True)
class CoeffTable:
    n: int
    c: dict[int, Fraction]
    a_tab: dict[int, Fraction]
    b_tab: dict[int, Fraction]
    a_prime: Fraction
    b_prime: Fraction


def coeff_table(n: int) -> CoeffTable:
    _check_even_n(n)
    a_tab, b_tab = ab_coeffs(n)
    a_prime, b_prime = ap_bp(n)
    c = {a: c_coeff(n, a) for a in range(1, n, 2)}
    return CoeffTable(n, c, a_tab, b_tab, a_prime, b_prime)


def format_table(table: CoeffTable) -> list[str]:
    """Stable text rendering, one `NAME[index]=p/q` per line."""
    n = table.n
    lines = [f"C[{a},{n}]={value}" for a, value in sorted(table.c.items())]
    lines += [f"A[{a},{n}]={value}" for a, value in sorted(table.a_tab.items())]
    lines += [f"B[{a},{n}]={value}" for a, value in sorted(table.b_tab.items())]
    lines.append(f"A'[{n}]={table.a_prime}")
    lines.append(f"B'[{n}]={table.b_prime}")
    return lines
