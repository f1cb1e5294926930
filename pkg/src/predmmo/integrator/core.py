"""Adaptive Dormand-Prince 5(4) integration with dense output and events."""

from __future__ import annotations

import enum
import importlib.util
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .. import _kernel as _kj
from ..errors import Diverged, MaxStepsExceeded, StepSizeUnderflow
from ..io import fmt, write_csv


def _load_python_kernel():
    spec = importlib.util.spec_from_file_location("predmmo._kernel_py", _kj.__file__)
    mod = importlib.util.module_from_spec(spec)
    mod.NOJIT = True
    spec.loader.exec_module(mod)
    return mod


_kp = _load_python_kernel()

DIVERGENCE_BOUND = 1e6


class Direction(enum.IntEnum):
    RISING = 1
    FALLING = -1
    ANY = 0


@dataclass(frozen=True)
class IntegrationSettings:
    rtol: float = 1e-11
    atol: float = 1e-12
    max_step: float = math.inf
    min_step: float = 1e-14
    max_steps: int = 100_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not (0 < self.min_step < self.max_step):
            raise ValueError("need 0 < min_step < max_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: (math.inf if v is None else v) for k, v in d.items()})

    def to_dict(self):
        return {"rtol": self.rtol, "atol": self.atol,
                "max_step": None if math.isinf(self.max_step) else self.max_step,
                "min_step": self.min_step, "max_steps": self.max_steps}


@dataclass(frozen=True)
class VectorField:
    """A compiled vector field: kernel kind plus its parameter array.

    ``lower`` is the most negative value any component may take before the
    run is aborted as diverged (``-inf`` disables the check).
    """

    kind: int
    params: np.ndarray
    dim: int
    lower: float = -math.inf
    name: str = ""

    def __call__(self, t, y):
        return _KINDS[self.kind](float(t), np.asarray(y, dtype=float), self.params)


_KINDS = {
    _kj.MODEL_SLOW: _kj.model_slow,
    _kj.MODEL_FAST: _kj.model_fast,
    _kj.PLANE_DELAY: _kj.plane_delay,
    _kj.NORMAL_FORM: _kj.normal_form,
    _kj.DESING: _kj.desing,
}


@dataclass(frozen=True)
class EventSpec:
    """Zero crossing of a scalar function along the solution.

    Either ``g(t, y)`` (arbitrary callable, located on the stored dense
    output) or a linear functional ``normal . y - offset`` (located inside
    the stepping loop, usable without storage).  ``filter_component`` and
    ``filter_sign`` keep only crossings where that component's derivative
    has the given sign.  ``terminal`` may be a count: stop at the n-th
    accepted crossing.
    """

    g: Callable | None = None
    normal: tuple | None = None
    offset: float = 0.0
    direction: Direction = Direction.ANY
    terminal: int = 0
    filter_component: int | None = None
    filter_sign: int = 0

    def __post_init__(self):
        if (self.g is None) == (self.normal is None):
            raise ValueError("give exactly one of g or normal")
        if self.normal is not None and not np.any(np.asarray(self.normal, float)):
            raise ValueError("event normal must be nonzero")
        object.__setattr__(self, "terminal", int(self.terminal))

    @classmethod
    def plane(cls, normal, offset, direction=Direction.ANY, terminal=0, **kw):
        return cls(normal=tuple(float(v) for v in normal), offset=float(offset),
                   direction=Direction(direction), terminal=terminal, **kw)

    @classmethod
    def level(cls, component, value, dim, direction=Direction.ANY, terminal=0, **kw):
        n = [0.0] * dim
        n[component] = 1.0
        return cls.plane(n, value, direction, terminal, **kw)

    @property
    def is_linear(self):
        return self.normal is not None

    def value(self, t, y):
        if self.g is not None:
            return float(self.g(t, y))
        return float(np.dot(self.normal, y) - self.offset)


class Event(NamedTuple):
    time: float
    state: np.ndarray
    event_id: int


@dataclass(frozen=True)
class Trajectory:
    """Solution record.

    ``seg_h[i]`` and ``seg_k[i]`` hold the step size and the seven stage
    derivatives of the step that starts at ``times[i]``; they define the
    continuous extension on ``[times[i], times[i+1]]``.  Runs without dense
    storage keep only the nodes (or only the endpoints).
    """

    times: np.ndarray
    states: np.ndarray
    seg_h: np.ndarray
    seg_k: np.ndarray
    events: tuple = ()
    extrema: tuple = (np.empty(0), np.empty(0), np.empty(0, dtype=int))
    status: str = "ok"
    nsteps: int = 0
    nrejected: int = 0
    final_time: float = 0.0
    final_state: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def has_dense(self):
        return self.seg_h.size > 0

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return self.final_time

    def _locate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        nseg = self.seg_h.size
        if self.times[-1] >= self.times[0]:
            idx = np.searchsorted(self.times, t, side="right") - 1
        else:
            idx = np.searchsorted(-self.times, -t, side="right") - 1
        idx = np.clip(idx, 0, nseg - 1)
        theta = (t - self.times[idx]) / self.seg_h[idx]
        return idx, theta

    def __call__(self, t):
        """Dense output at time(s) ``t``."""
        if not self.has_dense:
            raise ValueError("trajectory was integrated without dense storage")
        scalar = np.ndim(t) == 0
        idx, th = self._locate(t)
        powers = np.stack([th, th**2, th**3, th**4], axis=1)
        q = powers @ _kj.P.T
        y = self.states[idx] + self.seg_h[idx, None] * np.einsum("mi,min->mn", q, self.seg_k[idx])
        return y[0] if scalar else y

    def derivative(self, t, component):
        """Derivative of the continuous extension of one component."""
        idx, th = self._locate(t)
        return np.array([_kp.dense_deriv(self.seg_k[i], s, component) for i, s in zip(idx, th)])

    def to_csv(self, path, columns=("t", "x", "y", "z")):
        return write_csv(path, columns, ([t, *y] for t, y in zip(self.times, self.states)))

    def events_to_csv(self, path, columns=("t", "x", "y", "z")):
        rows = ([e.time, *e.state, e.event_id] for e in self.events)
        return write_csv(path, (*columns, "event_id"), rows)


_STORE = {"none": _kj.STORE_NONE, "nodes": _kj.STORE_NODES, "dense": _kj.STORE_DENSE}
_STATUS = {_kj.OK: "ok", _kj.TERMINATED: "terminated", _kj.STEP_UNDERFLOW: "step_underflow",
           _kj.MAX_STEPS: "max_steps", _kj.DIVERGED: "diverged"}


def _event_tables(linear, dim):
    m = len(linear)
    ev_n = np.zeros((m, dim))
    ev_b = np.zeros(m)
    ev_dir = np.zeros(m, dtype=np.int64)
    ev_fc = np.full(m, -1, dtype=np.int64)
    ev_fs = np.zeros(m)
    ev_term = np.zeros(m, dtype=np.int64)
    for i, ev in enumerate(linear):
        ev_n[i] = ev.normal
        ev_b[i] = ev.offset
        ev_dir[i] = int(ev.direction)
        if ev.filter_component is not None:
            ev_fc[i] = ev.filter_component
            ev_fs[i] = ev.filter_sign
        ev_term[i] = ev.terminal
    return ev_n, ev_b, ev_dir, ev_fc, ev_fs, ev_term


def integrate(f, y0, span, settings=None, events: Sequence[EventSpec] = (), *,
              store="dense", extrema_component=None, extrema_after=-math.inf,
              lower=None, h0=0.0):
    """Integrate ``y' = f(t, y)`` over ``span = (t0, t1)``.

    ``f`` is a :class:`VectorField` (compiled path, GIL released) or any
    callable ``f(t, y)``.  Local extrema of ``extrema_component`` after
    ``extrema_after`` are recorded during the run in ``Trajectory.extrema``
    as ``(times, values, kinds)`` with kind +1 for maxima, -1 for minima.

    Raises StepSizeUnderflow, MaxStepsExceeded or Diverged with the partial
    trajectory attached.
    """
    settings = settings or IntegrationSettings()
    y0 = np.array(y0, dtype=float)
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise ValueError("empty integration span")
    dim = y0.size
    linear = [e for e in events if e.is_linear]
    general = [(i, e) for i, e in enumerate(events) if not e.is_linear]
    lin_ids = [i for i, e in enumerate(events) if e.is_linear]
    if general and store != "dense":
        raise ValueError("events with a callable g need dense storage")
    tables = _event_tables(linear, dim)

    if isinstance(f, VectorField):
        drive, rhs, params = _kj.drive, f.kind, f.params
        floor = f.lower if lower is None else lower
    else:
        drive, params = _kp.drive, np.empty(0)

        def rhs(t, y, p):
            return np.asarray(f(t, y), dtype=float)

        floor = -math.inf if lower is None else lower
    if not np.all(np.isfinite(rhs(t0, y0, params) if not isinstance(f, VectorField) else f(t0, y0))):
        raise ValueError("vector field is not finite at the initial state")

    ext = -1 if extrema_component is None else int(extrema_component)
    out = drive(rhs, params, t0, y0, t1, settings.rtol, settings.atol, float(h0),
                float(settings.max_step), settings.min_step, int(settings.max_steps),
                _STORE[store], *tables, ext, float(extrema_after), float(floor), DIVERGENCE_BOUND)
    (status, t_end, y_end, nsteps, nrej, times, states, seg_h, seg_k,
     ev_t, ev_y, ev_id, ex_t, ex_v, ex_kind) = out
    if store == "none":
        times = np.array([t0, t_end])
        states = np.vstack([y0, y_end])
    evs = [Event(float(t), y.copy(), lin_ids[int(i)]) for t, y, i in zip(ev_t, ev_y, ev_id)]
    traj = Trajectory(np.asarray(times), np.asarray(states), np.asarray(seg_h), np.asarray(seg_k),
                      tuple(evs), (np.asarray(ex_t), np.asarray(ex_v), np.asarray(ex_kind)),
                      _STATUS[status], int(nsteps), int(nrej), float(t_end), np.asarray(y_end))
    if general and traj.seg_h.size:
        traj = _general_events(traj, general, evs)
    if status < 0 and traj.status != "terminated":
        exc = {_kj.STEP_UNDERFLOW: StepSizeUnderflow, _kj.MAX_STEPS: MaxStepsExceeded,
               _kj.DIVERGED: Diverged}[status]
        raise exc(f"integration stopped at t={t_end:.17g}: {_STATUS[status]}", traj)
    return traj


def _bisect_event(traj, i, ev, g0):
    """Locate a crossing inside segment ``i`` on the continuous extension."""
    h = traj.seg_h[i]
    lo, hi = 0.0, 1.0
    y0, K = traj.states[i], traj.seg_k[i]
    t0 = traj.times[i]
    for _ in range(_kj.MAX_BISECT):
        if (hi - lo) * abs(h) <= _kj.EVENT_TTOL:
            break
        mid = 0.5 * (lo + hi)
        gm = ev.value(t0 + mid * h, _kp.dense_eval(y0, K, h, mid))
        if _kp.g_after(gm, g0, int(ev.direction)):
            hi = mid
        else:
            lo = mid
    return t0 + hi * h, _kp.dense_eval(y0, K, h, hi)


def _general_events(traj, general, linear_events):
    found = []
    n_nodes = traj.times.size
    for eid, ev in general:
        g = np.array([ev.value(t, y) for t, y in zip(traj.times, traj.states)])
        count = 0
        for i in range(n_nodes - 1):
            if not _kp.crossed(g[i], g[i + 1], int(ev.direction)):
                continue
            te, ye = _bisect_event(traj, i, ev, g[i])
            if ev.filter_component is not None:
                # derivative of the extension at the crossing
                th = (te - traj.times[i]) / traj.seg_h[i]
                d = _kp.dense_deriv(traj.seg_k[i], th, ev.filter_component)
                if d * ev.filter_sign <= 0:
                    continue
            found.append(Event(float(te), ye, eid))
            count += 1
            if ev.terminal and count >= ev.terminal:
                break
    all_events = sorted([*linear_events, *found], key=lambda e: e.time * np.sign(traj.seg_h[0]))
    # first terminal crossing of a general event truncates the run
    t_stop = None
    counts = {}
    for e in all_events:
        counts[e.event_id] = counts.get(e.event_id, 0) + 1
        spec_terminal = dict(general).get(e.event_id)
        if spec_terminal is not None and spec_terminal.terminal and counts[e.event_id] >= spec_terminal.terminal:
            t_stop = e
            break
    if t_stop is None:
        return Trajectory(traj.times, traj.states, traj.seg_h, traj.seg_k, tuple(all_events),
                          traj.extrema, traj.status, traj.nsteps, traj.nrejected,
                          traj.final_time, traj.final_state)
    sgn = np.sign(traj.seg_h[0])
    keep = np.nonzero(sgn * traj.times < sgn * t_stop.time)[0]
    last = keep[-1]
    times = np.append(traj.times[: last + 1], t_stop.time)
    states = np.vstack([traj.states[: last + 1], t_stop.state])
    ex_t, ex_v, ex_k = traj.extrema
    m = sgn * ex_t <= sgn * t_stop.time
    evs = tuple(e for e in all_events if sgn * e.time <= sgn * t_stop.time)
    return Trajectory(times, states, traj.seg_h[: last + 1], traj.seg_k[: last + 1], evs,
                      (ex_t[m], ex_v[m], ex_k[m]), "terminated", traj.nsteps, traj.nrejected,
                      float(t_stop.time), t_stop.state)


def local_maxima(traj: Trajectory, component: int, after: float = -math.inf):
    """Strict local maxima ``[(t, value), ...]`` of one component after ``after``,
    refined on the continuous extension to 1e-10 in time."""
    return [(t, v) for t, v, k in _local_extrema(traj, component, after) if k == 1]


def local_extrema(traj: Trajectory, component: int, after: float = -math.inf):
    """Local maxima (kind +1) and minima (kind -1) as ``(times, values, kinds)`` arrays."""
    ext = _local_extrema(traj, component, after)
    if not ext:
        return np.empty(0), np.empty(0), np.empty(0, dtype=int)
    t, v, k = zip(*ext)
    return np.array(t), np.array(v), np.array(k, dtype=int)


def _local_extrema(traj, component, after):
    if not traj.has_dense:
        raise ValueError("trajectory was integrated without dense storage")
    k = traj.seg_k
    d0 = k[:, 0, component]
    d1 = k[:, 6, component]
    is_max = (d0 > 0) & (d1 <= 0)
    is_min = (d0 < 0) & (d1 >= 0)
    out = []
    t_end = traj.times[-1]
    for i in np.nonzero(is_max | is_min)[0]:
        h = traj.seg_h[i]
        th = _kp.refine_extremum(k[i], h, component, d0[i])
        t = traj.times[i] + th * h
        if t <= after or t > t_end:
            continue
        v = _kp.dense_eval(traj.states[i], k[i], h, th)[component]
        out.append((float(t), float(v), 1 if is_max[i] else -1))
    return out
