"""Poincaré sections, return sequences and a no-short-period check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InsufficientReturns
from ..integrator import Direction, Event, EventSpec, IntegrationSettings, integrate
from ..io import write_csv

SIGMA_H_NORMAL = (2.94, 1.3, -1.52)
SIGMA_H_OFFSET = 0.588


@dataclass(frozen=True)
class PoincarePlane:
    """The plane ``normal . X = offset``.

    ``direction`` constrains the sign of ``d(n.X)/dt`` at a crossing, or,
    when ``component`` is given, the sign of that component's derivative.
    """

    normal: tuple
    offset: float
    direction: Direction = Direction.ANY
    component: int | None = None

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.ndim != 1 or not np.all(np.isfinite(n)) or np.linalg.norm(n) == 0:
            raise ValueError("plane normal must be a finite nonzero vector")
        object.__setattr__(self, "normal", tuple(float(v) for v in n))
        object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def sigma_h(cls) -> "PoincarePlane":
        """The section through the Γ_h cycle, crossed with ``x`` decreasing."""
        return cls(SIGMA_H_NORMAL, SIGMA_H_OFFSET, Direction.FALLING, component=0)

    def residual(self, state) -> float:
        return float(np.dot(self.normal, state) - self.offset)

    def event(self, terminal=0) -> EventSpec:
        if self.component is None:
            return EventSpec.plane(self.normal, self.offset, self.direction, terminal)
        return EventSpec.plane(self.normal, self.offset, Direction.ANY, terminal,
                               filter_component=self.component,
                               filter_sign=int(self.direction))

    def to_dict(self):
        return {"normal": list(self.normal), "offset": self.offset,
                "direction": self.direction.name.lower(), "component": self.component}


def poincare_map(f, y0, plane: PoincarePlane, n_returns: int, settings=None, *,
                 transient: float = 0.0, t_max: float = 1e7) -> list:
    """First ``n_returns`` crossings of ``plane`` after ``transient``.

    Returns a time-ordered list of :class:`Event`.  Raises
    InsufficientReturns, carrying the crossings found, if ``t_max`` is
    reached first.
    """
    if n_returns < 1:
        raise ValueError("n_returns must be >= 1")
    settings = settings or IntegrationSettings()
    t0, state = 0.0, np.asarray(y0, dtype=float)
    if transient > 0:
        pre = integrate(f, state, (0.0, transient), settings, store="none")
        t0, state = pre.final_time, pre.final_state
    if t_max <= t0:
        raise ValueError("t_max must exceed the transient")
    traj = integrate(f, state, (t0, t_max), settings, [plane.event(terminal=n_returns)],
                     store="none")
    found = list(traj.events)
    if len(found) < n_returns:
        raise InsufficientReturns(
            f"{len(found)} of {n_returns} returns before t={t_max}", found)
    return found


def crossings_array(events) -> np.ndarray:
    return np.array([e.state for e in events]).reshape(len(events), -1)


def write_crossings(path, events, columns=("t", "x", "y", "z")):
    return write_csv(path, columns, ([e.time, *e.state] for e in events))


@dataclass(frozen=True)
class AperiodicityCheck:
    """Pairs of returns that coincide (with coinciding successors) within ``tol``.

    ``longest_match`` is the longest run of consecutive coinciding returns
    over all close pairs; an exact period shows up as a run reaching the
    end of the sequence.
    """

    n_returns: int
    tol: float
    close_pairs: int
    min_distance: float
    longest_match: int

    @property
    def passed(self) -> bool:
        return self.close_pairs == 0

    def to_dict(self):
        return {"n_returns": self.n_returns, "tol": self.tol,
                "close_pairs": self.close_pairs, "min_distance": self.min_distance,
                "longest_match": self.longest_match, "passed": self.passed}


def aperiodicity_check(points, tol: float = 1e-6) -> AperiodicityCheck:
    """Look for an exact short period in a return sequence.

    A pair ``(i, j)`` counts when both ``|X_i - X_j|`` and
    ``|X_{i+1} - X_{j+1}|`` are below ``tol``.  No such pair is evidence,
    not proof, of an aperiodic orbit.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 3:
        raise ValueError("need at least three returns")
    tree = cKDTree(pts[:-1])
    d, _ = tree.query(pts[:-1], k=2)
    close, longest = 0, 0
    for i, j in tree.query_pairs(tol, output_type="ndarray"):
        m = 1
        while j + m < n and np.linalg.norm(pts[i + m] - pts[j + m]) < tol:
            m += 1
        if m > 1:
            close += 1
        longest = max(longest, m)
    return AperiodicityCheck(n, float(tol), close, float(np.min(d[:, 1])), longest)


def converged_point(events, tail: int = 10) -> np.ndarray:
    """Mean of the last ``tail`` crossings (a fixed point estimate)."""
    pts = crossings_array(events)
    return pts[-min(tail, len(pts)):].mean(axis=0)


def spread(events, tail: int = 10) -> float:
    pts = crossings_array(events)[-min(tail, len(events)):]
    return float(np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1))) if len(pts) else math.nan


__all__ = ["PoincarePlane", "poincare_map", "aperiodicity_check", "AperiodicityCheck",
           "crossings_array", "write_crossings", "converged_point", "spread", "Event"]
