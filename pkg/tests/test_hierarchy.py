import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import IntegrationFailure, RangeError
from core.hierarchy import (Controls, MomentLayout, MomentState, convert, hq, init_state,
                            integrate, rhs, uncertainty)
from core.model import OscillatorModel


def test_layout_order_two():
    layout = MomentLayout(2)
    assert layout.keys == ((0, 2), (1, 2), (2, 2))
    assert layout.size == 5
    y = layout.pack(1.0, 2.0, {(1, 2): 3.0})
    assert_allclose(y, [1.0, 2.0, 0.0, 3.0, 0.0])
    assert layout.unpack(y) == {(0, 2): 0.0, (1, 2): 3.0, (2, 2): 0.0}


def test_layout_order_four():
    assert MomentLayout(4).size == 2 + 3 + 4 + 5
    with pytest.raises(RangeError):
        MomentLayout(1)


def test_harmonic_vacuum(quartic):
    state = init_state(quartic, 1.0, 0.0, N=4)
    assert state.get(0, 2) == 0.5
    assert state.get(1, 2) == 0.0
    assert state.get(2, 2) == 0.5
    assert state.get(0, 4) == 0.75
    assert state.get(2, 4) == 0.25
    assert state.get(1, 3) == 0.0
    assert uncertainty(state) == 0.25


def test_adiabatic_vacuum_reduces_to_harmonic_ground_state(harmonic):
    state = init_state(harmonic, 0.3, 0.2, mode="adiabatic_vacuum", order=2)
    assert_allclose([state.get(0, 2), state.get(1, 2), state.get(2, 2)], [0.5, 0.0, 0.5])


def test_unknown_initial_mode(harmonic):
    with pytest.raises(RangeError):
        init_state(harmonic, 0.0, 0.0, mode="squeezed")


def test_convert_scales_by_hbar():
    model = OscillatorModel(m=2.0, omega=0.5, hbar=0.01)
    state = MomentState(0.0, 0.0, 0.0, {(0, 2): 0.5, (2, 2): 0.5, (1, 2): 0.1})
    full = convert(model, state, "to_dimensionful")
    assert full.dimensionful
    # Δq² = ħ/(mω) G̃^(0,2), Δp² = ħmω G̃^(2,2)
    assert_allclose(full.get(0, 2), 0.01 / 1.0 * 0.5)
    assert_allclose(full.get(2, 2), 0.01 * 1.0 * 0.5)
    back = convert(model, full, "to_dimensionless")
    assert_allclose([back.get(a, 2) for a in range(3)], [0.5, 0.1, 0.5])
    with pytest.raises(RangeError):
        convert(model, state, "sideways")


def test_harmonic_vacuum_is_stationary(harmonic):
    rates = rhs(harmonic, init_state(harmonic, 1.0, 0.5))
    assert rates.q == 0.5
    assert rates.p == -1.0
    assert_allclose([rates.get(a, 2) for a in range(3)], [0.0, 0.0, 0.0], atol=1e-15)


def test_hq_includes_zero_point(harmonic):
    state = init_state(harmonic, 1.0, 0.0)
    assert_allclose(hq(harmonic, state), 0.5 + 0.5)


def test_harmonic_regression():
    """U = 0 over 100 periods: exact cosine, frozen moments, saturated uncertainty."""
    model = OscillatorModel()
    t_end = 200 * math.pi
    trajectory = integrate(model, init_state(model, 1.0, 0.0), t_end,
                           Controls(rel_tol=1e-12, abs_tol=1e-14))
    t = trajectory.times()
    q = trajectory.positions()
    assert t[-1] == t_end
    assert np.max(np.abs(q - np.cos(t))) <= 1e-8
    g = np.array([[s.state.get(a, 2) for a in range(3)] for s in trajectory.samples])
    assert np.max(np.abs(g - [0.5, 0.0, 0.5])) <= 1e-9
    u = np.array([s.uncertainty for s in trajectory.samples])
    assert np.max(np.abs(u - 0.25)) <= 1e-9
    assert not trajectory.events


def test_energy_conserved_without_back_reaction(quartic):
    model = quartic.with_hbar(0.01)
    trajectory = integrate(model, init_state(model, 1.0, 0.0), 4 * math.pi,
                           Controls(hbar_order=0))
    energies = np.array([s.hq for s in trajectory.samples])
    assert np.max(np.abs(energies - energies[0])) <= 1e-7 * abs(energies[0])


def test_adiabatic_closure_runs(quartic):
    model = quartic.with_hbar(0.01)
    state0 = init_state(model, 1.0, 0.0)
    closed = integrate(model, state0, 2.0, Controls(closure="adiabatic_closure"))
    truncated = integrate(model, state0, 2.0)
    assert closed.final.state.t == 2.0
    assert closed.final.state.q != truncated.final.state.q


def test_unknown_closure(quartic):
    with pytest.raises(RangeError):
        integrate(quartic, init_state(quartic, 1.0, 0.0), 1.0, Controls(closure="gaussian"))


def test_stiffness_crossing_reports_time():
    """X = 1 - q²/2 vanishes at q = √2, which this orbit reaches."""
    model = OscillatorModel.from_powers({4: -1 / 24}, hbar=0.01)
    with pytest.raises(IntegrationFailure) as info:
        integrate(model, init_state(model, 1.0, 1.5), 20.0)
    failure = info.value
    assert failure.reason == "domain"
    assert 0.0 < failure.time < 20.0
    assert failure.trajectory.samples
    assert failure.trajectory.final.state.q < math.sqrt(2.0)


def test_uncertainty_violation_is_recorded(harmonic):
    squeezed = MomentState(0.0, 1.0, 0.0, {(0, 2): 0.4, (1, 2): 0.0, (2, 2): 0.4})
    trajectory = integrate(harmonic, squeezed, 1.0)
    assert trajectory.events
    assert all(e.kind == "uncertainty" for e in trajectory.events)
    assert_allclose(trajectory.events[0].value, 0.16)


def test_uncertainty_violation_can_abort(harmonic):
    squeezed = MomentState(0.0, 1.0, 0.0, {(0, 2): 0.4, (1, 2): 0.0, (2, 2): 0.4})
    with pytest.raises(IntegrationFailure) as info:
        integrate(harmonic, squeezed, 1.0, Controls(stop_on_violation=True))
    assert info.value.reason == "uncertainty"


def test_backward_in_time(harmonic):
    trajectory = integrate(harmonic, init_state(harmonic, 1.0, 0.0), -1.0)
    assert trajectory.final.state.t == -1.0
    assert_allclose(trajectory.final.state.q, math.cos(1.0), rtol=1e-8)


def test_integration_is_time_reversible(quartic):
    """Forward over a period and back lands on the initial state within 10× rel_tol."""
    model = quartic.with_hbar(0.01)
    controls = Controls()
    start = init_state(model, 1.0, 0.0)
    forward = integrate(model, start, 2 * math.pi, controls)
    back = integrate(model, forward.final.state, 0.0, controls).final.state
    assert back.t == 0.0
    assert_allclose([back.q, back.p], [start.q, start.p], atol=10 * controls.rel_tol)
    assert_allclose([back.get(a, 2) for a in range(3)], [start.get(a, 2) for a in range(3)],
                    atol=10 * controls.rel_tol)


def test_classical_moment_equations_stay_within_each_order(quartic):
    """At ħ⁰ each moment rate is linear in the moments and reads only its own order n."""
    model = quartic.with_hbar(0.1)
    base = init_state(model, 0.7, 0.2, N=4)
    rates0 = rhs(model, base, hbar_order=0)
    for a, n in MomentLayout(4).keys:
        shifts = []
        for step in (0.1, 0.2):
            g = dict(base.g)
            g[(a, n)] += step
            rates = rhs(model, MomentState(base.t, base.q, base.p, g), hbar_order=0)
            shifts.append({key: rates.g[key] - rates0.g[key] for key in rates0.g})
        for (b, k), shift in shifts[0].items():
            if k != n:
                assert shift == 0.0, ((a, n), (b, k))
            assert_allclose(shifts[1][(b, k)], 2 * shift, rtol=1e-9, atol=1e-14)
