import math

import numpy as np
import pytest

from predmmo.errors import MaxStepsExceeded
from predmmo.integrator import (Direction, EventSpec, IntegrationSettings, integrate,
                                local_extrema, local_maxima)
from predmmo.model import ModelParams

TIGHT = IntegrationSettings(rtol=1e-12, atol=1e-14)


def decay(t, y):
    return -y


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_linear_decay():
    traj = integrate(decay, [1.0], (0.0, 1.0), TIGHT)
    assert abs(traj.final_state[0] - math.exp(-1)) < 1e-10


def test_harmonic_period_and_energy():
    traj = integrate(oscillator, [1.0, 0.0], (0.0, 2 * math.pi), TIGHT)
    assert np.max(np.abs(traj.final_state - [1.0, 0.0])) < 1e-8
    energy = np.sum(traj.states**2, axis=1)
    assert np.max(np.abs(energy - 1.0)) < 1e-9


def test_backward_integration():
    traj = integrate(decay, [1.0], (0.0, -1.0), TIGHT)
    assert abs(traj.final_state[0] - math.e) < 1e-9


def _fixed_step_error(h):
    st = IntegrationSettings(rtol=1.0, atol=1.0, max_step=h, min_step=1e-14)
    traj = integrate(decay, [1.0], (0.0, 2.0), st)
    return abs(traj.final_state[0] - math.exp(-2))


def test_order_at_least_four_and_a_half():
    hs = [0.2, 0.1, 0.05]
    errs = [_fixed_step_error(h) for h in hs]
    orders = [math.log(errs[i] / errs[i + 1], 2) for i in range(2)]
    assert min(orders) >= 4.5


def test_dense_output_matches_nodes():
    traj = integrate(oscillator, [1.0, 0.0], (0.0, 10.0), TIGHT)
    t = np.linspace(0.0, 10.0, 101)
    assert np.max(np.abs(traj(t)[:, 0] - np.cos(t))) < 1e-9
    assert np.allclose(traj(traj.times), traj.states, atol=1e-12)


def test_compiled_and_python_paths_agree():
    p = ModelParams(h=0.785)
    f = p.slow_field()
    a = integrate(f, (0.3, 0.1, 0.3), (0.0, 5.0))
    b = integrate(lambda t, y: f(t, y), (0.3, 0.1, 0.3), (0.0, 5.0))
    assert np.allclose(a.final_state, b.final_state, rtol=1e-12, atol=1e-14)


def test_plane_event_on_model():
    p = ModelParams(h=0.785)
    ev = EventSpec.level(0, 0.5, 3, Direction.FALLING)
    traj = integrate(p.slow_field(), (0.01, 0.01, 0.12), (0.0, 300.0), events=[ev])
    assert traj.events
    for e in traj.events:
        assert abs(e.state[0] - 0.5) < 1e-10
        assert p.slow_field()(e.time, e.state)[0] < 0
        before, after = traj(e.time - 1e-8)[0], traj(e.time + 1e-8)[0]
        assert before > 0.5 > after


def test_callable_event_matches_linear_event():
    p = ModelParams(h=0.785)
    lin = EventSpec.level(0, 0.5, 3, Direction.FALLING)
    fun = EventSpec(g=lambda t, y: y[0] - 0.5, direction=Direction.FALLING)
    a = integrate(p.slow_field(), (0.01, 0.01, 0.12), (0.0, 200.0), events=[lin])
    b = integrate(p.slow_field(), (0.01, 0.01, 0.12), (0.0, 200.0), events=[fun])
    assert len(a.events) == len(b.events) > 0
    assert np.allclose([e.time for e in a.events], [e.time for e in b.events], atol=1e-9)


def test_terminal_count():
    ev = EventSpec.level(1, 0.0, 2, Direction.RISING, terminal=3)
    traj = integrate(oscillator, [1.0, 0.0], (0.0, 100.0), TIGHT, [ev], store="none")
    assert traj.status == "terminated"
    assert len(traj.events) == 3
    # v rises through zero at u = -1, once per period
    times = [e.time for e in traj.events]
    assert np.allclose(np.diff(times), 2 * math.pi, atol=1e-9)
    assert all(abs(e.state[0] + 1) < 1e-9 for e in traj.events)


def test_sin_maxima():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 4 * math.pi), TIGHT)
    peaks = local_maxima(traj, 0, after=0.0)
    assert len(peaks) == 2
    assert np.allclose([t for t, _ in peaks], [math.pi / 2, 5 * math.pi / 2], atol=1e-8)
    assert all(abs(v - 1) < 1e-8 for _, v in peaks)


def test_monotone_has_no_extrema():
    traj = integrate(decay, [1.0], (0.0, 5.0))
    assert local_maxima(traj, 0) == []
    assert local_extrema(traj, 0)[0].size == 0


def test_inline_extrema_match_dense():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 20.0), TIGHT, extrema_component=0)
    t, v, k = traj.extrema
    t2, v2, k2 = local_extrema(traj, 0)
    assert np.allclose(t, t2, atol=1e-9) and np.array_equal(k, k2)
    lean = integrate(oscillator, [0.0, 1.0], (0.0, 20.0), TIGHT, store="none",
                     extrema_component=0)
    assert np.allclose(lean.extrema[0], t, atol=1e-12)


def test_relaxation_maxima_are_large():
    p = ModelParams(h=0.99)
    traj = integrate(p.slow_field(), (0.01, 0.01, 0.12), (0.0, 1500.0), store="none",
                     extrema_component=0, extrema_after=500.0)
    t, v, k = traj.extrema
    assert np.sum(k == 1) > 5
    assert np.all(v[k == 1] > 0.7)


def test_max_steps_attaches_partial():
    st = IntegrationSettings(max_steps=5)
    with pytest.raises(MaxStepsExceeded) as info:
        integrate(oscillator, [1.0, 0.0], (0.0, 100.0), st)
    assert info.value.trajectory is not None


def test_settings_validation():
    with pytest.raises(ValueError):
        IntegrationSettings(rtol=0)
    assert IntegrationSettings.from_dict(IntegrationSettings().to_dict()) == IntegrationSettings()


def test_csv_is_deterministic(tmp_path):
    p = ModelParams(h=0.8)
    paths = []
    for i in range(2):
        traj = integrate(p.slow_field(), (0.3, 0.1, 0.3), (0.0, 20.0))
        paths.append(traj.to_csv(tmp_path / f"t{i}.csv"))
    assert paths[0].read_bytes() == paths[1].read_bytes()
