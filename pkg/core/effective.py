"""Higher-derivative effective equation of motion for ⟨q̂⟩ and its reductions.

The bracket f + f₁q̈ + f₂q̈² + f₃q⃛ + f₄q⃜ is G^(0,2) through the fourth adiabatic
order inserted into q̈ = -ω²q - U'/m - (ħ/2m²ω) U''' G^(0,2). The reduced form
substitutes the classical jet for the higher derivatives; the fourth-order form
solves the same equation for q⃜ and carries runaway solutions.

The low-energy action

    L = ½ M(q) q̇² - ½ mω²q² - U(q) - (ħω/2) X(q)^(1/2),
    M(q) = m + ħ U'''² / (32 m² ω⁵ X^(5/2)),

gives, through its Euler–Lagrange equation, the acceleration

    q̈ = [∂L/∂q - q̇ ∂²L/∂q̇∂q] / ∂²L/∂q̇²,

derived once with sympy and compiled with lambdify.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
import sympy as sp
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from core.adiabatic import g02_stack, second_moment_block, uncertainty_value
from core.errors import (DomainError, EmptyOverlap, IntegrationFailure, RangeError,
                         SingularLeadingTerm)
from core.hierarchy import (Controls, MomentState, Sample, Trajectory,
                            stiffness_value)
from core.integrator import dopri5
from core.model import (Jet, OscillatorModel, classical_acceleration, classical_jet,
                        potential, stiffness, u_derivative)

log = logging.getLogger("qmoments.effective")

Form = Literal["reduced", "fourth"]
FORMS = ("reduced", "fourth")
METRICS = ("sup", "l2")
LEADING_FLOOR = 1e-12

__all__ = ["EffectiveCoeffs", "eff_coeffs", "rhs_reduced", "rhs_fourth",
           "gamma_eff_rhs", "integrate_effective", "compare"]


@dataclass(frozen=True, slots=True)
class EffectiveCoeffs:
    f: float
    f1: float
    f2: float
    f3: float
    f4: float

    def bracket(self, ddq: float, dddq: float, ddddq: float) -> float:
        return self.f + self.f1 * ddq + self.f2 * ddq**2 + self.f3 * dddq + self.f4 * ddddq


def eff_coeffs(model: OscillatorModel, q: float, qdot: float) -> EffectiveCoeffs:
    """The coefficient functions f, f₁, f₂, f₃, f₄ at (q, q̇)."""
    x = stiffness(model, q)
    m, w = model.m, model.omega
    u3, u4, u5, u6 = (u_derivative(model, q, k) for k in (3, 4, 5, 6))
    v2 = qdot**2
    v4 = v2**2

    f = (0.5 * x**-0.5
         + u4 * v2 / (16 * m * w**4) * x**-2.5
         - 5 * u3**2 * v2 / (64 * m**2 * w**6) * x**-3.5
         - u6 * v4 / (64 * m * w**6) * x**-3.5
         + 21 * u4**2 * v4 / (256 * m**2 * w**8) * x**-4.5
         + 7 * u5 * u3 * v4 / (64 * m**2 * w**8) * x**-4.5
         - 231 * u4 * u3**2 * v4 / (512 * m**3 * w**10) * x**-5.5
         + 1155 * u3**4 * v4 / (4096 * m**4 * w**12) * x**-6.5)
    f1 = (u3 / (16 * m * w**4) * x**-2.5
          - 3 * u5 * v2 / (32 * m * w**6) * x**-3.5
          + 63 * u4 * u3 * v2 / (128 * m**2 * w**8) * x**-4.5
          - 231 * u3**3 * v2 / (512 * m**3 * w**10) * x**-5.5)
    f2 = (-3 * u4 / (64 * m * w**6) * x**-3.5
          + 21 * u3**2 / (256 * m**2 * w**8) * x**-4.5)
    f3 = (-u4 * qdot / (16 * m * w**6) * x**-3.5
          + 7 * u3**2 * qdot / (64 * m**2 * w**8) * x**-4.5)
    f4 = -u3 / (64 * m * w**6) * x**-3.5
    return EffectiveCoeffs(f, f1, f2, f3, f4)


def _coupling(model: OscillatorModel, q: float) -> float:
    """(ħ/2m²ω) U'''(q)"""
    return model.hbar / (2 * model.m**2 * model.omega) * u_derivative(model, q, 3)


def _bracket(model: OscillatorModel, jet: Jet, adiabatic_order: int) -> float:
    if adiabatic_order == 4:
        return eff_coeffs(model, jet.q, jet.dq).bracket(jet.ddq, jet.dddq, jet.ddddq)
    return g02_stack(model, jet, hbar_order=1, adiabatic_order=adiabatic_order)


def rhs_reduced(model: OscillatorModel, q: float, qdot: float, adiabatic_order: int = 4,
                iterate: bool = False) -> float:
    """q̈ with the classical jet substituted for every higher derivative."""
    if adiabatic_order not in (0, 2, 4):
        raise RangeError(f"reduced form supports adiabatic orders 0, 2 and 4, got {adiabatic_order}")
    jet = classical_jet(model, q, qdot)
    coupling = _coupling(model, q)
    ddq = jet.ddq - coupling * _bracket(model, jet, adiabatic_order)
    if iterate and coupling != 0.0:
        corrected = Jet(q, qdot, ddq, jet.dddq, jet.ddddq)
        ddq = jet.ddq - coupling * _bracket(model, corrected, adiabatic_order)
    return ddq


def rhs_fourth(model: OscillatorModel, state4: tuple[float, float, float, float],
               floor: float = LEADING_FLOOR) -> float:
    """Solve the effective equation, linear in q⃜, for q⃜ given (q, q̇, q̈, q⃛)."""
    q, qdot, ddq, dddq = state4
    coeffs = eff_coeffs(model, q, qdot)
    u3 = u_derivative(model, q, 3)
    if abs(u3 * coeffs.f4) < floor:
        raise SingularLeadingTerm(
            f"|U''' f4| = {abs(u3 * coeffs.f4):.3e} below {floor:.1e} at q = {q:.6g}")
    coupling = _coupling(model, q)
    lower = coeffs.f + coeffs.f1 * ddq + coeffs.f2 * ddq**2 + coeffs.f3 * dddq
    return ((classical_acceleration(model, q) - ddq) / coupling - lower) / coeffs.f4


# Low-energy effective action

@lru_cache(maxsize=1)
def _gamma_eff_acceleration():
    q, qd = sp.symbols("q qdot", real=True)
    m, w, hbar = sp.symbols("m omega hbar", positive=True)
    U = sp.Function("U")
    x = 1 + U(q).diff(q, 2) / (m * w**2)
    mass = m + hbar * U(q).diff(q, 3)**2 / (32 * m**2 * w**5 * x**sp.Rational(5, 2))
    lagrangian = (sp.Rational(1, 2) * mass * qd**2 - sp.Rational(1, 2) * m * w**2 * q**2
                  - U(q) - hbar * w / 2 * sp.sqrt(x))

    ddq = (lagrangian.diff(q) - qd * lagrangian.diff(qd).diff(q)) / lagrangian.diff(qd, 2)
    u = sp.symbols("u1:5", real=True)
    for k in range(4, 0, -1):
        ddq = ddq.subs(U(q).diff(q, k), u[k - 1])
    log.debug("Euler-Lagrange acceleration: %s", ddq)
    return sp.lambdify((q, qd, m, w, hbar, *u), ddq, "math")


def gamma_eff_rhs(model: OscillatorModel, q: float, qdot: float) -> float:
    """q̈ from the Euler–Lagrange equation of the low-energy effective action."""
    stiffness(model, q)
    u = [u_derivative(model, q, k) for k in range(1, 5)]
    return float(_gamma_eff_acceleration()(q, qdot, model.m, model.omega, model.hbar, *u))


# Trajectories

def _effective_sample(model: OscillatorModel, t: float, jet: Jet, adiabatic_order: int) -> Sample:
    m, w = model.m, model.omega
    g02 = g02_stack(model, jet, hbar_order=1, adiabatic_order=adiabatic_order)
    block = second_moment_block(model, jet)
    energy = (0.5 * m * jet.dq**2 + 0.5 * m * w**2 * jet.q**2 + potential(model, jet.q)
              + 0.5 * model.hbar * w * (block.g02 + block.g22))
    state = MomentState(t, jet.q, m * jet.dq, {(0, 2): g02})
    return Sample(state, energy, uncertainty_value(block), block.x)


def integrate_effective(model: OscillatorModel, q0: float, p0: float, t_end: float,
                        controls: Controls = Controls(), form: Form = "reduced",
                        adiabatic_order: int = 4, iterate: bool = False,
                        initial: tuple[float, float] | None = None, t0: float = 0.0) -> Trajectory:
    """Integrate the reduced (q, q̇) or fourth-order (q, q̇, q̈, q⃛) effective equation.

    The fourth-order form starts from the classical q̈, q⃛ unless `initial` is given.
    """
    if form not in FORMS:
        raise RangeError(f"unknown effective form {form!r}")
    qdot0 = p0 / model.m

    if form == "reduced":
        def f(t, y):
            return np.array([y[1], rhs_reduced(model, y[0], y[1], adiabatic_order, iterate)])

        def jet_of(y):
            return classical_jet(model, y[0], y[1])

        y0 = np.array([q0, qdot0])
    else:
        def f(t, y):
            return np.array([y[1], y[2], y[3], rhs_fourth(model, tuple(y))])

        def jet_of(y):
            return Jet(y[0], y[1], y[2], y[3], rhs_fourth(model, tuple(y)))

        cl = classical_jet(model, q0, qdot0)
        ddq0, dddq0 = initial if initial is not None else (cl.ddq, cl.dddq)
        y0 = np.array([q0, qdot0, ddq0, dddq0])
        adiabatic_order = 4

    trajectory = Trajectory(moment_keys=((0, 2),))
    trajectory.samples.append(_effective_sample(model, t0, jet_of(y0), adiabatic_order))
    log.info("effective: form=%s order=%d t=[%g, %g]", form, adiabatic_order, t0, t_end)

    previous = trajectory.samples[0]
    try:
        for t, y in dopri5(f, t0, y0, t_end, controls.step_settings()):
            if not np.all(np.isfinite(y)):
                raise IntegrationFailure(f"non-finite state at t = {t:.6g}", t, "nan", trajectory)
            x = stiffness_value(model, float(y[0]))
            if x <= 0.0:
                t_cross = previous.state.t + (t - previous.state.t) * previous.x / (previous.x - x)
                raise IntegrationFailure(f"stiffness X crossed zero at t = {t_cross:.6g}",
                                         t_cross, "domain", trajectory)
            sample = _effective_sample(model, t, jet_of(y), adiabatic_order)
            trajectory.samples.append(sample)
            previous = sample
    except DomainError as exc:
        t_fail = trajectory.final.state.t
        raise IntegrationFailure(f"stiffness X <= 0 near t = {t_fail:.6g}: {exc}",
                                 t_fail, "domain", trajectory) from exc
    return trajectory


def _positions_at(trajectory: Trajectory, grid: np.ndarray) -> np.ndarray:
    order = np.argsort(trajectory.times())
    t, q = trajectory.times()[order], trajectory.positions()[order]
    if t.size < 2:
        return np.full(grid.size, q[0])
    return CubicSpline(t, q)(grid)


def _gap_on(coarse: Trajectory, fine: Trajectory, lo: float, hi: float, metric: str) -> float:
    tc = coarse.times()
    # Window ends always sit on the grid
    grid = np.unique(np.concatenate(([lo, hi], tc[(tc >= lo) & (tc <= hi)])))
    delta = _positions_at(coarse, grid) - _positions_at(fine, grid)
    if metric == "sup" or grid.size < 2:
        return float(np.max(np.abs(delta)))
    return float(np.sqrt(trapezoid(delta**2, grid) / (grid[-1] - grid[0])))


def compare(traj_a: Trajectory, traj_b: Trajectory, metric: str = "sup") -> float:
    """Norm of q_A - q_B over the common time range, on the coarser grid."""
    if metric not in METRICS:
        raise RangeError(f"unknown metric {metric!r}")
    ta, tb = traj_a.times(), traj_b.times()
    if ta.size == 0 or tb.size == 0:
        raise EmptyOverlap("cannot compare an empty trajectory")
    lo = max(ta.min(), tb.min())
    hi = min(ta.max(), tb.max())
    if hi < lo:
        raise EmptyOverlap(f"no common time range: [{ta.min():g}, {ta.max():g}] "
                           f"vs [{tb.min():g}, {tb.max():g}]")

    count_a = int(np.count_nonzero((ta >= lo) & (ta <= hi)))
    count_b = int(np.count_nonzero((tb >= lo) & (tb <= hi)))
    if count_a < count_b:
        return _gap_on(traj_a, traj_b, lo, hi, metric)
    if count_b < count_a:
        return _gap_on(traj_b, traj_a, lo, hi, metric)
    return max(_gap_on(traj_a, traj_b, lo, hi, metric), _gap_on(traj_b, traj_a, lo, hi, metric))
