"""Truncated moment hierarchy: expectation values coupled to dimensionless moments."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from math import factorial
from typing import Literal

import numpy as np

from core.adiabatic import moment_value, uncertainty_violated
from core.coefficients import ground_prefactor
from core.errors import DomainError, IntegrationFailure, RangeError
from core.integrator import StepSettings, dopri5
from core.model import Jet, OscillatorModel, classical_jet

log = logging.getLogger("qmoments.hierarchy")

Closure = Literal["truncate", "adiabatic_closure"]
CLOSURES = ("truncate", "adiabatic_closure")
MOMENT_MODES = ("harmonic_vacuum", "adiabatic_vacuum")


@dataclass(frozen=True)
class MomentLayout:
    """Slots of a packed state: [q, p, G^{0,2}, G^{1,2}, G^{2,2}, G^{0,3}, ...]."""

    order: int
    keys: tuple[tuple[int, int], ...] = field(init=False)
    index: dict[tuple[int, int], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 2:
            raise RangeError(f"truncation order must be at least 2, got {self.order}")
        keys = tuple((a, n) for n in range(2, self.order + 1) for a in range(n + 1))
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "index", {key: 2 + i for i, key in enumerate(keys)})

    @property
    def size(self) -> int:
        return 2 + len(self.keys)

    def pack(self, q: float, p: float, g: dict[tuple[int, int], float]) -> np.ndarray:
        y = np.zeros(self.size)
        y[0], y[1] = q, p
        for key in self.keys:
            y[self.index[key]] = g.get(key, 0.0)
        return y

    def unpack(self, y: np.ndarray) -> dict[tuple[int, int], float]:
        return {key: float(y[self.index[key]]) for key in self.keys}


@dataclass(frozen=True)
class MomentState:
    """Expectation values and moments G^{a,n} (dimensionless unless stated)."""

    t: float
    q: float
    p: float
    g: dict[tuple[int, int], float]
    dimensionful: bool = False

    @property
    def order(self) -> int:
        return max((n for _, n in self.g), default=0)

    def get(self, a: int, n: int) -> float:
        return self.g.get((a, n), 0.0)


@dataclass(frozen=True)
class Sample:
    state: MomentState
    hq: float
    uncertainty: float
    x: float


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    value: float


@dataclass
class Trajectory:
    samples: list[Sample] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    moment_keys: tuple[tuple[int, int], ...] = ()

    def times(self) -> np.ndarray:
        return np.array([s.state.t for s in self.samples])

    def positions(self) -> np.ndarray:
        return np.array([s.state.q for s in self.samples])

    @property
    def final(self) -> Sample:
        return self.samples[-1]


@dataclass(frozen=True)
class Controls:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    fixed_step: float | None = None
    hbar_order: int = 1
    N: int = 2
    closure: Closure = "truncate"
    uncertainty_tol: float = 1e-6
    stop_on_violation: bool = False

    def step_settings(self) -> StepSettings:
        return StepSettings(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                            max_step=self.max_step, fixed_step=self.fixed_step)


def convert(model: OscillatorModel, state: MomentState,
            direction: Literal["to_dimensionful", "to_dimensionless"]) -> MomentState:
    """Apply G^{a,n} = ħ^(-n/2) (mω)^(n/2-a) G̃^{a,n} entrywise."""
    mw = model.m * model.omega
    if direction == "to_dimensionless":
        if not state.dimensionful:
            return state
        g = {(a, n): v * model.hbar**(-n / 2) * mw**(n / 2 - a) for (a, n), v in state.g.items()}
        return MomentState(state.t, state.q, state.p, g, dimensionful=False)
    if direction == "to_dimensionful":
        if state.dimensionful:
            return state
        g = {(a, n): v * model.hbar**(n / 2) * mw**(a - n / 2) for (a, n), v in state.g.items()}
        return MomentState(state.t, state.q, state.p, g, dimensionful=True)
    raise RangeError(f"unknown conversion direction {direction!r}")


def init_state(model: OscillatorModel, q0: float, p0: float, mode: str = "harmonic_vacuum",
               N: int = 2, order: int = 0, hbar_order: int = 1, t0: float = 0.0) -> MomentState:
    """Initial moments of the harmonic ground state or of the adiabatic vacuum at (q0, p0)."""
    layout = MomentLayout(N)
    if mode == "harmonic_vacuum":
        g = {(a, n): float(ground_prefactor(n, a)) for a, n in layout.keys}
    elif mode == "adiabatic_vacuum":
        jet = classical_jet(model, q0, p0 / model.m)
        g = {(a, n): moment_value(model, n, a, jet, hbar_order, order) for a, n in layout.keys}
    else:
        raise RangeError(f"unknown moment mode {mode!r}")
    return MomentState(t0, q0, p0, g)


def hq(model: OscillatorModel, state: MomentState) -> float:
    """Quantum Hamiltonian H_Q truncated at the state's moment order."""
    state = convert(model, state, "to_dimensionless")
    m, w, hbar = model.m, model.omega, model.hbar
    q, p = state.q, state.p
    value = (p * p / (2 * m) + 0.5 * m * w * w * q * q + float(model.derivative_poly(0)(q))
             + 0.5 * hbar * w * (state.get(0, 2) + state.get(2, 2)))
    for n in range(2, state.order + 1):
        value += ((hbar / (m * w))**(n / 2) / factorial(n)
                  * float(model.derivative_poly(n)(q)) * state.get(0, n))
    return value


def uncertainty(state: MomentState) -> float:
    return state.get(0, 2) * state.get(2, 2) - state.get(1, 2)**2


def stiffness_value(model: OscillatorModel, q: float) -> float:
    """X(q) without the domain check."""
    return 1.0 + float(model.derivative_poly(2)(q)) / (model.m * model.omega**2)


class _Rhs:
    """Right-hand side of the packed system for fixed model, truncation and closure."""

    def __init__(self, model: OscillatorModel, layout: MomentLayout, hbar_order: int,
                 closure: Closure):
        if hbar_order not in (0, 1, 2):
            raise RangeError(f"hbar_order must be 0, 1 or 2, got {hbar_order}")
        if closure not in CLOSURES:
            raise RangeError(f"unknown closure {closure!r}")
        self.model = model
        self.layout = layout
        self.hbar_order = hbar_order
        self.closure = closure
        self.polys = [model.derivative_poly(k) for k in range(max(layout.order + 2, 5))]

    def _lookup(self, g, q, a, n):
        if n == 0:
            return 1.0 if a == 0 else 0.0
        if n == 1 or a < 0 or a > n:
            return 0.0
        if n <= self.layout.order:
            return g[(a, n)]
        if self.closure == "truncate":
            return 0.0
        return moment_value(self.model, n, a, Jet(q),
                            hbar_order=min(self.hbar_order, 1), adiabatic_order=0)

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        model = self.model
        m, w, hbar = model.m, model.omega, model.hbar
        mw = m * w
        q, p = y[0], y[1]
        g = self.layout.unpack(y)
        u = [float(poly(q)) for poly in self.polys]

        def moment(a, n):
            return self._lookup(g, q, a, n)

        dy = np.empty_like(y)
        dy[0] = p / m
        force = -m * w * w * q - u[1]
        for n in range(2, self.layout.order + 1):
            force -= (hbar / mw)**(n / 2) / factorial(n) * u[n + 1] * g[(0, n)]
        dy[1] = force

        sqrt_hbar = math.sqrt(hbar)
        for (a, n), slot in self.layout.index.items():
            rate = w * ((n - a) * moment(a + 1, n) - a * moment(a - 1, n))
            rate -= u[2] * a / mw * moment(a - 1, n)
            if a and self.hbar_order >= 1 and u[3] != 0.0:
                rate += sqrt_hbar * u[3] * a / (2.0 * mw**1.5) * (
                    moment(0, 2) * moment(a - 1, n - 1)
                    - moment(a - 1, n + 1)
                    + (a - 1) * (a - 2) / 12.0 * moment(a - 3, n - 3))
            if a and self.hbar_order >= 2 and u[4] != 0.0:
                rate += hbar * u[4] * a / (6.0 * mw**2) * (
                    moment(0, 3) * moment(a - 1, n - 1)
                    - moment(a - 1, n + 2)
                    + (a - 1) * (a - 2) / 4.0 * moment(a - 3, n - 2))
            dy[slot] = rate
        return dy


def rhs(model: OscillatorModel, state: MomentState, hbar_order: int = 1,
        closure: Closure = "truncate") -> MomentState:
    """Time derivative of a state; returned as a MomentState of rates."""
    state = convert(model, state, "to_dimensionless")
    layout = MomentLayout(max(state.order, 2))
    f = _Rhs(model, layout, hbar_order, closure)
    dy = f(state.t, layout.pack(state.q, state.p, state.g))
    return MomentState(state.t, float(dy[0]), float(dy[1]), layout.unpack(dy))


def _sample(model: OscillatorModel, state: MomentState) -> Sample:
    return Sample(state, hq(model, state), uncertainty(state), stiffness_value(model, state.q))


def integrate(model: OscillatorModel, state0: MomentState, t_end: float,
              controls: Controls = Controls()) -> Trajectory:
    """Integrate the truncated hierarchy, recording diagnostics at every accepted step."""
    state0 = convert(model, state0, "to_dimensionless")
    layout = MomentLayout(controls.N)
    f = _Rhs(model, layout, controls.hbar_order, controls.closure)
    y0 = layout.pack(state0.q, state0.p, state0.g)

    trajectory = Trajectory(moment_keys=layout.keys)
    trajectory.samples.append(_sample(model, MomentState(state0.t, state0.q, state0.p,
                                                         layout.unpack(y0))))
    log.info("hierarchy: N=%d hbar_order=%d closure=%s t=[%g, %g]", controls.N,
             controls.hbar_order, controls.closure, state0.t, t_end)

    previous = trajectory.samples[0]
    try:
        for t, y in dopri5(f, state0.t, y0, t_end, controls.step_settings()):
            if not np.all(np.isfinite(y)):
                raise IntegrationFailure(f"non-finite state at t = {t:.6g}", t, "nan", trajectory)
            sample = _sample(model, MomentState(t, float(y[0]), float(y[1]), layout.unpack(y)))

            if sample.x <= 0.0:
                t_cross = previous.state.t + (t - previous.state.t) * previous.x / (previous.x - sample.x)
                raise IntegrationFailure(f"stiffness X crossed zero at t = {t_cross:.6g}",
                                         t_cross, "domain", trajectory)
            if uncertainty_violated(sample.uncertainty, controls.uncertainty_tol):
                trajectory.events.append(Event(t, "uncertainty", sample.uncertainty))
                log.warning("uncertainty %.9g below 1/4 at t = %.6g", sample.uncertainty, t)
                if controls.stop_on_violation:
                    trajectory.samples.append(sample)
                    raise IntegrationFailure(f"uncertainty relation violated at t = {t:.6g}",
                                             t, "uncertainty", trajectory)

            trajectory.samples.append(sample)
            previous = sample
    except DomainError as exc:
        t_fail = trajectory.final.state.t
        raise IntegrationFailure(f"stiffness X <= 0 near t = {t_fail:.6g}: {exc}",
                                 t_fail, "domain", trajectory) from exc
    except IntegrationFailure as exc:
        if exc.trajectory is None:
            exc.trajectory = trajectory
        raise

    log.info("hierarchy: %d samples, %d events", len(trajectory.samples), len(trajectory.events))
    return trajectory
