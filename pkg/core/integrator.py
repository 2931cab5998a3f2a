"""Dormand–Prince 5(4) with first-same-as-last stages and PI step control."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from core.errors import IntegrationFailure

log = logging.getLogger("qmoments.integrator")

Rhs = Callable[[float, np.ndarray], np.ndarray]

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                  -92097 / 339200, 187 / 2100, 1 / 40])
E = B - B_LOW

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ALPHA = 0.7 / ORDER
BETA = 0.4 / ORDER


@dataclass(frozen=True)
class StepSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    first_step: float | None = None
    fixed_step: float | None = None
    max_steps: int = 1_000_000


def _stages(f: Rhs, t: float, y: np.ndarray, h: float, k1: np.ndarray):
    k = np.empty((7, y.size))
    k[0] = k1
    for s in range(1, 7):
        k[s] = f(t + C[s] * h, y + h * (A[s] @ k[:s]))
    y_new = y + h * (B[:6] @ k[:6])
    return y_new, k


def _error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray,
                settings: StepSettings) -> float:
    scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale)**2)))


def initial_step(f: Rhs, t0: float, y0: np.ndarray, f0: np.ndarray, direction: float,
                 settings: StepSettings) -> float:
    """Starting step from the local derivative scale."""
    scale = settings.abs_tol + settings.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale)**2))
    d1 = np.sqrt(np.mean((f0 / scale)**2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, settings.max_step)

    f1 = f(t0 + direction * h0, y0 + direction * h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale)**2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2))**(1.0 / ORDER)
    return min(100 * h0, h1, settings.max_step)


def dopri5(f: Rhs, t0: float, y0: np.ndarray, t_end: float,
           settings: StepSettings = StepSettings()) -> Iterator[tuple[float, np.ndarray]]:
    """Yield accepted (t, y) from t0 to t_end; t_end < t0 integrates backwards."""
    y = np.asarray(y0, dtype=np.float64).copy()
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0
    k1 = f(t, y)

    if settings.fixed_step is not None:
        yield from _fixed(f, t, y, t_end, direction, k1, settings)
        return

    h = settings.first_step or initial_step(f, t, y, k1, direction, settings)
    previous_error = 1.0
    rejected = False

    for _ in range(settings.max_steps):
        remaining = (t_end - t) * direction
        tiny = 16.0 * np.finfo(float).eps * max(abs(t), 1.0)
        if remaining <= tiny:
            return
        h = min(h, settings.max_step, remaining)
        if h <= tiny:
            raise IntegrationFailure(f"step size underflow at t = {t:.6g}", t, "step_underflow")

        y_new, k = _stages(f, t, y, direction * h, k1)
        k7 = f(t + direction * h, y_new)
        k[6] = k7
        if not np.all(np.isfinite(y_new)):
            log.debug("non-finite stage at t=%.6g, h=%.3e; shrinking", t, h)
            h *= MIN_FACTOR
            rejected = True
            continue

        error = _error_norm(direction * h * (E @ k), y, y_new, settings)
        if error <= 1.0:
            if error == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * error**-ALPHA * previous_error**BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if rejected:
                factor = min(factor, 1.0)
            t = t_end if h == remaining else t + direction * h
            y = y_new
            k1 = k7
            previous_error = max(error, 1e-4)
            rejected = False
            yield t, y
            h *= factor
        else:
            factor = max(MIN_FACTOR, SAFETY * error**-ALPHA)
            log.debug("rejected step at t=%.6g, h=%.3e, err=%.3e", t, h, error)
            h *= factor
            rejected = True

    raise IntegrationFailure(f"exceeded {settings.max_steps} steps before t = {t_end}",
                             t, "max_steps")


def _fixed(f: Rhs, t: float, y: np.ndarray, t_end: float, direction: float,
           k1: np.ndarray, settings: StepSettings):
    h = abs(settings.fixed_step)
    steps = max(1, int(round(abs(t_end - t) / h)))
    h = abs(t_end - t) / steps
    t0 = t
    for i in range(1, steps + 1):
        y, k = _stages(f, t, y, direction * h, k1)
        t = t0 + direction * h * i
        k1 = f(t, y)
        yield t, y
