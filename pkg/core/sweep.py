"""ħ-sweeps: hierarchy against effective trajectories, action against reduced EOM."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from core.effective import compare, gamma_eff_rhs, integrate_effective, rhs_reduced
from core.errors import DomainError, IntegrationFailure, RangeError
from core.hierarchy import Controls, init_state, integrate
from core.model import OscillatorModel

log = logging.getLogger("qmoments.sweep")

PHASE_POINTS = 50


@dataclass(frozen=True)
class SweepPoint:
    hbar: float
    gap: float
    violations: int = 0
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _model_args(model: OscillatorModel) -> tuple:
    return model.m, model.omega, model.hbar, model.u_coeffs


def _trajectory_gap(args: tuple) -> SweepPoint:
    """One ħ of the sweep; top level so worker processes can unpickle it."""
    (m, omega, _, u_coeffs), hbar, q0, p0, t_end, controls, adiabatic_order, metric = args
    model = OscillatorModel(m, omega, hbar, u_coeffs)
    try:
        state0 = init_state(model, q0, p0, "harmonic_vacuum", N=controls.N,
                            hbar_order=controls.hbar_order)
        moments = integrate(model, state0, t_end, controls)
        effective = integrate_effective(model, q0, p0, t_end, controls, form="reduced",
                                        adiabatic_order=adiabatic_order)
    except IntegrationFailure as exc:
        return SweepPoint(hbar, float("nan"), failure=f"{exc.reason} at t = {exc.time:.6g}")
    return SweepPoint(hbar, compare(moments, effective, metric), len(moments.events))


def hbar_sweep(model: OscillatorModel, hbars: Sequence[float], q0: float, p0: float,
               t_end: float, controls: Controls = Controls(), workers: int = 1,
               adiabatic_order: int = 4, metric: str = "sup") -> list[SweepPoint]:
    """Gap in q between the hierarchy and the reduced effective EOM for each ħ."""
    if not hbars:
        raise RangeError("hbar sweep needs at least one value")
    jobs = [(_model_args(model), float(h), q0, p0, t_end, controls, adiabatic_order, metric)
            for h in hbars]
    log.info("hbar sweep: %d values, %d worker(s)", len(jobs), workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_trajectory_gap, jobs))
    else:
        points = [_trajectory_gap(job) for job in jobs]

    for point in points:
        if point.ok:
            log.info("hbar=%.3e gap=%.6e", point.hbar, point.gap)
        else:
            log.warning("hbar=%.3e failed: %s", point.hbar, point.failure)
    return points


def phase_points(count: int = PHASE_POINTS, seed: int = 42,
                 span: float = 1.0) -> np.ndarray:
    """Seeded (q, q̇) pairs uniform in [-span, span]²."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-span, span, size=(count, 2))


def action_gap(model: OscillatorModel, points: np.ndarray) -> float:
    """Largest |q̈_action - q̈_reduced| with the reduced form at second adiabatic order."""
    worst = 0.0
    for q, qdot in points:
        try:
            gap = abs(gamma_eff_rhs(model, q, qdot) - rhs_reduced(model, q, qdot, adiabatic_order=2))
        except DomainError:
            continue
        worst = max(worst, gap)
    return worst


def action_gap_sweep(model: OscillatorModel, hbars: Sequence[float],
                     count: int = PHASE_POINTS, seed: int = 42) -> list[SweepPoint]:
    points = phase_points(count, seed)
    return [SweepPoint(float(h), action_gap(model.with_hbar(float(h)), points)) for h in hbars]


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    keep = np.isfinite(y) & (y > 0.0) & (x > 0.0)
    if np.count_nonzero(keep) < 2:
        raise RangeError("a slope fit needs at least two positive finite points")
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)
