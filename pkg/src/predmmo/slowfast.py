"""Fast-slow decomposition of the model.

The critical manifold is ``T = {x = 0}`` together with the prey nullsurface
``S = {u = 0}``, written as the graph ``z = phi(x, y)``.  The fold ``F+``
is where ``u_x = 0`` on ``S``.  On the chart ``(x, y)`` the reduced flow,
rescaled by ``-u_x``, is the desingularized system

    x' = u_y y v + u_z z w,    y' = -u_x y v.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernel
from .errors import EmptyFold, NoCrossing, NoInteriorEquilibrium, NoReturn
from .integrator import Direction, EventSpec, IntegrationSettings, VectorField, integrate
from .model import ModelParams, interior_equilibria, u_x, uvw

DISC_TOL = 1e-10
FSN_RATIO = 1e-8
SCAN_POINTS = 1000


def manifold_z(x, y, p: ModelParams):
    """Height of ``S`` over the chart: the ``z`` solving ``u(x, y, z) = 0``."""
    return (p.beta2 + x) * (1.0 - x - y / (p.beta1 + x))


# fold curve

def fold_point(x, p: ModelParams):
    """``(y, z)`` on ``F+`` above a given ``x`` (requires beta1 != beta2).

    ``u = 0`` and ``u_x = 0`` are linear in ``(y, z)`` for fixed ``x``;
    eliminating gives the closed forms below.
    """
    b1, b2 = p.beta1, p.beta2
    y = (1.0 - b2 - 2.0 * x) * (b1 + x) ** 2 / (b1 - b2)
    z = (1.0 - b1 - 2.0 * x) * (b2 + x) ** 2 / (b2 - b1)
    return y, z


def fold_x_range(p: ModelParams):
    """Admissible ``x`` interval of ``F+`` in the closed positive octant."""
    lo = (1.0 - max(p.beta1, p.beta2)) / 2.0
    hi = (1.0 - min(p.beta1, p.beta2)) / 2.0
    return lo, hi


@dataclass(frozen=True)
class FoldCurve:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def points(self):
        return np.column_stack([self.x, self.y, self.z])


def fold_curve(p: ModelParams, n_points: int = 200) -> FoldCurve:
    """Sample ``F+`` in the nonnegative octant.

    Parameterized by ``x`` when ``beta1 != beta2``.  For equal
    efficiencies the fold is the segment ``x = (1 - beta)/2``,
    ``y + z = (beta + x)^2`` and is parameterized by ``y``.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    lo, hi = fold_x_range(p)
    if hi <= 0:
        raise EmptyFold("fold curve has no points with x > 0")
    if p.beta1 == p.beta2:
        x0 = (1.0 - p.beta1) / 2.0
        total = (p.beta1 + x0) ** 2
        y = np.linspace(0.0, total, n_points)
        return FoldCurve(np.full(n_points, x0), y, total - y)
    x = np.linspace(max(lo, 0.0), hi, n_points)
    y, z = fold_point(x, p)
    # endpoints are exact zeros that roundoff may push slightly negative
    return FoldCurve(x, np.maximum(y, 0.0), np.maximum(z, 0.0))


# desingularized reduced flow

def desing_rhs(r, p: ModelParams) -> np.ndarray:
    """Desingularized reduced vector field on the chart ``z = phi(x, y)``."""
    x, y = float(r[0]), float(r[1])
    z = manifold_z(x, y, p)
    _, v, w = uvw((x, y, z), p)
    ux = u_x((x, y, z), p)
    return np.array([-y * v / (p.beta1 + x) - z * w / (p.beta2 + x), -ux * y * v])


def desing_jacobian(r, p: ModelParams) -> np.ndarray:
    """Analytic Jacobian of :func:`desing_rhs`."""
    x, y = float(r[0]), float(r[1])
    b1x, b2x = p.beta1 + x, p.beta2 + x
    z = manifold_z(x, y, p)
    phi_x = (1.0 - x - y / b1x) + b2x * (-1.0 + y / b1x**2)
    phi_y = -b2x / b1x
    _, v, w = uvw((x, y, z), p)
    ux = u_x((x, y, z), p)
    v_x = p.beta1 / b1x**2 - p.a12 * phi_x
    v_y = -p.a12 * phi_y
    w_x = p.beta2 / b2x**2 - p.h * phi_x
    w_y = -p.a21 - p.h * phi_y
    ux_x = -2.0 * y / b1x**3 - 2.0 * z / b2x**3 + phi_x / b2x**2
    ux_y = 1.0 / b1x**2 + phi_y / b2x**2
    f1_x = y * v / b1x**2 - y * v_x / b1x - (phi_x * w + z * w_x) / b2x + z * w / b2x**2
    f1_y = -v / b1x - y * v_y / b1x - (phi_y * w + z * w_y) / b2x
    f2_x = -ux_x * y * v - ux * y * v_x
    f2_y = -ux_y * y * v - ux * (v + y * v_y)
    return np.array([[f1_x, f1_y], [f2_x, f2_y]])


def desing_field(p: ModelParams) -> VectorField:
    return VectorField(_kernel.DESING, p.as_array(), 2, -math.inf, "desing")


# folded singularities

class FoldedClass(str, enum.Enum):
    FOLDED_NODE = "FoldedNode"
    FOLDED_SADDLE = "FoldedSaddle"
    FOLDED_FOCUS = "FoldedFocus"
    DEGENERATE_NODE = "DegenerateNode"
    FSN = "FSN"


@dataclass(frozen=True)
class FoldedSingularity:
    location: tuple
    lambda_s: complex
    lambda_w: complex
    v_s: tuple
    v_w: tuple
    kind: FoldedClass
    mu: float | None
    s_max: float | None

    def to_dict(self):
        def num(c):
            return c.real if c.imag == 0 else [c.real, c.imag]

        return {"location": list(self.location), "class": self.kind.value,
                "lambda_s": num(self.lambda_s), "lambda_w": num(self.lambda_w),
                "v_s": list(self.v_s), "v_w": list(self.v_w), "mu": self.mu, "s_max": self.s_max}


def s_max_bound(mu: float) -> float:
    """Maximal number of small rotations near a folded node, ``(mu + 1)/(2 mu)``."""
    return (mu + 1.0) / (2.0 * mu)


def _eig2(j):
    tr = j[0, 0] + j[1, 1]
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0:
        s = complex(0.0, math.sqrt(-disc))
    else:
        s = math.sqrt(disc)
    l1 = (tr + s) / 2.0
    l2 = (tr - s) / 2.0
    return complex(l1), complex(l2), disc


def _eigvec(j, lam):
    # null vector of j - lam I from whichever row is better conditioned
    a, b = j[0, 0] - lam, j[0, 1]
    c, d = j[1, 0], j[1, 1] - lam
    if abs(a) + abs(b) >= abs(c) + abs(d):
        v = np.array([-b, a])
    else:
        v = np.array([-d, c])
    n = np.linalg.norm(v)
    if n == 0:
        return (1.0, 0.0)
    v = v / n
    return tuple(float(t.real) for t in v)


def classify_folded(j) -> tuple:
    """Classify a folded singularity from the 2x2 desingularized Jacobian.

    Returns ``(kind, lambda_s, lambda_w, v_s, v_w, mu, s_max)``.
    """
    l1, l2, disc = _eig2(j)
    if abs(l1) < abs(l2):
        l1, l2 = l2, l1
    lam_s, lam_w = l1, l2
    if disc < -DISC_TOL:
        return FoldedClass.FOLDED_FOCUS, lam_s, lam_w, (math.nan,) * 2, (math.nan,) * 2, None, None
    v_s = _eigvec(j, lam_s.real)
    v_w = _eigvec(j, lam_w.real)
    if abs(disc) <= DISC_TOL:
        mu = 1.0
        return FoldedClass.DEGENERATE_NODE, lam_s, lam_w, v_s, v_w, mu, s_max_bound(mu)
    if lam_s.real * lam_w.real < 0:
        return FoldedClass.FOLDED_SADDLE, lam_s, lam_w, v_s, v_w, lam_w.real / lam_s.real, None
    if abs(lam_w) < FSN_RATIO * abs(lam_s):
        return FoldedClass.FSN, lam_s, lam_w, v_s, v_w, lam_w.real / lam_s.real, None
    mu = lam_w.real / lam_s.real
    return FoldedClass.FOLDED_NODE, lam_s, lam_w, v_s, v_w, mu, s_max_bound(mu)


def _fold_param(p):
    """Map from a scalar parameter to points of ``F+`` and its range."""
    if p.beta1 == p.beta2:
        x0 = (1.0 - p.beta1) / 2.0
        total = (p.beta1 + x0) ** 2

        def point(t):
            return x0, t, total - t

        return point, 0.0, total

    def point(t):
        y, z = fold_point(t, p)
        return t, y, z

    lo, hi = fold_x_range(p)
    return point, max(lo, 0.0), hi


def find_folded_singularities(p: ModelParams) -> list:
    """Equilibria of the desingularized flow on ``F+``.

    On the fold the second component vanishes identically, so the problem
    is a one-dimensional root of the first component along the curve.
    """
    point, lo, hi = _fold_param(p)

    def g(t):
        x, y, _ = point(t)
        return desing_rhs((x, y), p)[0]

    ts = np.linspace(lo, hi, SCAN_POINTS + 1)
    gs = np.array([g(t) for t in ts])
    roots = []
    for i in range(ts.size - 1):
        if gs[i] == 0:
            roots.append(ts[i])
        elif gs[i] * gs[i + 1] < 0:
            roots.append(brentq(g, ts[i], ts[i + 1], xtol=1e-15, maxiter=200))
    if gs[-1] == 0:
        roots.append(ts[-1])
    out = []
    for t in roots:
        x, y, z = point(t)
        if min(x, y, z) < 0:
            continue
        kind, ls, lw, vs, vw, mu, smax = classify_folded(desing_jacobian((x, y), p))
        out.append(FoldedSingularity((x, y, z), ls, lw, vs, vw, kind, mu, smax))
    return out


def folded_node(p: ModelParams) -> FoldedSingularity | None:
    """The folded node, if exactly one is present (else the first)."""
    nodes = [f for f in find_folded_singularities(p) if f.kind == FoldedClass.FOLDED_NODE]
    return nodes[0] if nodes else None


def converges_to_folded_node(r0, fs: FoldedSingularity, p: ModelParams, T=100.0, tol=1e-3,
                             settings=None) -> bool:
    """Practical funnel test: does the desingularized flow, run in the
    direction in which the node attracts, reach ``tol`` of it by time ``T``?"""
    direction = -1.0 if fs.lambda_s.real > 0 else 1.0
    target = np.array(fs.location[:2])
    settings = settings or IntegrationSettings(rtol=1e-9, atol=1e-12)
    ev = EventSpec(g=lambda t, r: float(np.hypot(*(r - target)) - tol),
                   direction=Direction.FALLING, terminal=1)
    try:
        traj = integrate(desing_field(p), r0, (0.0, direction * T), settings, [ev])
    except Exception:
        return False
    return traj.status == "terminated"


# FSN II

def _fold_distance(p):
    """``u_x`` at the interior equilibrium nearest the fold (nan if none)."""
    eqs = interior_equilibria(p)
    if not eqs:
        return math.nan
    return min((u_x(e, p) for e in eqs), key=abs)


def detect_fsn2(p: ModelParams, h_bracket=(0.745, 0.9), n_scan: int = 40) -> float:
    """Parameter ``h`` at which the interior equilibrium crosses ``F+``.

    Samples ``u_x(p_e(h))`` across the bracket, then refines the first
    sign change with Brent's method.
    """
    lo, hi = h_bracket
    if not lo < hi:
        raise ValueError("h_bracket must be increasing")
    hs = np.linspace(lo, hi, n_scan + 1)
    gs = np.array([_fold_distance(p.replace(h=h)) for h in hs])

    def g(h):
        return _fold_distance(p.replace(h=h))

    for i in range(hs.size - 1):
        a, b = gs[i], gs[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            return float(hs[i])
        if a * b < 0:
            return float(brentq(g, hs[i], hs[i + 1], xtol=1e-14, maxiter=200))
    if np.all(~np.isfinite(gs)):
        raise NoCrossing("no interior equilibrium anywhere in the bracket")
    raise NoCrossing(f"u_x at the interior equilibrium keeps one sign on [{lo}, {hi}]")


# Pontryagin delay on T

def delay_field(p: ModelParams) -> VectorField:
    """The planar flow on ``x = 0`` augmented with ``I' = u(0, y, z)``."""
    return VectorField(_kernel.PLANE_DELAY, p.as_array(), 3, -math.inf, "plane-delay")


@dataclass(frozen=True)
class DelayResult:
    y: float
    z: float
    tau0: float


def pontryagin_delay(y0, z0, p: ModelParams, settings=None, t_max=1e5, floor=1e-12) -> DelayResult:
    """Exit point on ``T^r`` of the slow flow entering at ``(0, y0, z0)`` on ``T^a``.

    The exit is the first ``tau0 > 0`` with ``int_0^tau0 u(0, y, z) ds = 0``.
    """
    u0 = uvw((0.0, y0, z0), p)[0]
    if u0 == 0:
        return DelayResult(float(y0), float(z0), 0.0)
    if u0 > 0:
        raise ValueError("start is not on the attracting part of x = 0 (u > 0)")
    settings = settings or IntegrationSettings()
    events = [
        EventSpec.level(2, 0.0, 3, Direction.RISING, terminal=1),
        EventSpec.plane((1.0, 1.0, 0.0), 2 * floor, Direction.FALLING, terminal=1),
    ]
    traj = integrate(delay_field(p), (y0, z0, 0.0), (0.0, t_max), settings, events, store="none")
    hits = [e for e in traj.events if e.event_id == 0]
    if not hits:
        raise NoReturn(f"running integral of u never returns to zero from ({y0}, {z0})")
    e = hits[0]
    return DelayResult(float(e.state[0]), float(e.state[1]), float(e.time))
