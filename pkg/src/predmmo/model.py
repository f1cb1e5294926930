"""Dimensionless two-predator, one-prey model.

State ``(x, y, z)``: prey and the two predators.  In slow time ``s``::

    zeta x' = x u,   y' = y v,   z' = z w

    u = 1 - x - y/(beta1 + x) - z/(beta2 + x)
    v = x/(beta1 + x) - c - a12 z
    w = x/(beta2 + x) - d - a21 y - h z

The fast-time field is the same vector field multiplied by ``zeta``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernel
from .errors import InvalidParameters, NoInteriorEquilibrium
from .integrator import VectorField

NONHYPERBOLIC_TOL = 1e-8
EQUILIBRIUM_TOL = 1e-12
SCAN_POINTS = 1000
NEGATIVE_FLOOR = -1e-12


@dataclass(frozen=True)
class ModelParams:
    """The eight dimensionless parameters.

    Defaults are the reference set used throughout (``h`` defaults to
    0.785, the bistable regime).  The interspecific rates may be zero,
    which is the no-competition special case.
    """

    zeta: float = 0.01
    beta1: float = 0.25
    beta2: float = 0.35
    c: float = 0.4
    d: float = 0.21
    a12: float = 0.5
    a21: float = 0.1
    h: float = 0.785

    def __post_init__(self):
        for name in FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidParameters(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        checks = [
            (0 < self.zeta < 1, "0 < zeta < 1"),
            (0 < self.c < 1, "0 < c < 1"),
            (0 < self.d < 1, "0 < d < 1"),
            (0 < self.beta1 < 1, "0 < beta1 < 1"),
            (0 < self.beta2 < 1, "0 < beta2 < 1"),
            (0 <= self.a12 < 1, "0 <= a12 < 1"),
            (0 <= self.a21 < 1, "0 <= a21 < 1"),
            (self.h > 0, "h > 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise InvalidParameters(f"parameter constraint violated: {rule}")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in FIELDS])

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in FIELDS}

    @classmethod
    def from_dict(cls, d) -> "ModelParams":
        unknown = set(d) - set(FIELDS)
        if unknown:
            raise InvalidParameters(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**d)

    def slow_field(self) -> VectorField:
        """Compiled slow-time field for :func:`predmmo.integrator.integrate`."""
        return VectorField(_kernel.MODEL_SLOW, self.as_array(), 3, NEGATIVE_FLOOR, "model-slow")

    def fast_field(self) -> VectorField:
        return VectorField(_kernel.MODEL_FAST, self.as_array(), 3, NEGATIVE_FLOOR, "model-fast")


FIELDS = ("zeta", "beta1", "beta2", "c", "d", "a12", "a21", "h")


def uvw(s, p: ModelParams):
    """Per-capita rates ``(u, v, w)``."""
    x, y, z = s
    b1x = p.beta1 + x
    b2x = p.beta2 + x
    u = 1.0 - x - y / b1x - z / b2x
    v = x / b1x - p.c - p.a12 * z
    w = x / b2x - p.d - p.a21 * y - p.h * z
    return u, v, w


def u_x(s, p: ModelParams):
    """Partial derivative of ``u`` in ``x``; zero on the fold."""
    x, y, z = s
    return -1.0 + y / (p.beta1 + x) ** 2 + z / (p.beta2 + x) ** 2


def rhs_fast(s, p: ModelParams) -> np.ndarray:
    """Fast-time vector field ``(x u, zeta y v, zeta z w)``."""
    u, v, w = uvw(s, p)
    return np.array([s[0] * u, p.zeta * s[1] * v, p.zeta * s[2] * w])


def rhs_slow(s, p: ModelParams) -> np.ndarray:
    """Slow-time vector field ``(x u / zeta, y v, z w)``."""
    if p.zeta == 0:
        raise InvalidParameters("rhs_slow is singular at zeta = 0")
    u, v, w = uvw(s, p)
    return np.array([s[0] * u / p.zeta, s[1] * v, s[2] * w])


def f_jacobian(s, p: ModelParams) -> np.ndarray:
    """Jacobian of ``(x u, y v, z w)``, the unscaled right-hand side."""
    x, y, z = (float(c) for c in s)
    b1x = p.beta1 + x
    b2x = p.beta2 + x
    u, v, w = uvw((x, y, z), p)
    return np.array([
        [u + x * u_x((x, y, z), p), -x / b1x, -x / b2x],
        [y * p.beta1 / b1x**2, v, -p.a12 * y],
        [z * p.beta2 / b2x**2, -p.a21 * z, w - p.h * z],
    ])


def jacobian(s, p: ModelParams) -> np.ndarray:
    """Analytic Jacobian of :func:`rhs_slow`."""
    j = f_jacobian(s, p)
    j[0] /= p.zeta
    return j


def rates_jacobian(s, p: ModelParams) -> np.ndarray:
    """Jacobian of ``(u, v, w)``, used to polish interior equilibria."""
    x, y, z = s
    b1x = p.beta1 + x
    b2x = p.beta2 + x
    return np.array([
        [u_x(s, p), -1.0 / b1x, -1.0 / b2x],
        [p.beta1 / b1x**2, 0.0, -p.a12],
        [p.beta2 / b2x**2, -p.a21, -p.h],
    ])


# eigenvalues

def char_poly(m):
    """Coefficients ``(1, a2, a1, a0)`` of ``det(lambda I - m)``."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
              + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
              + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    det = (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
           - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
           + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
    return 1.0, -tr, minors, -det


def _polish(lam, a2, a1, a0, iters=3):
    for _ in range(iters):
        f = ((lam + a2) * lam + a1) * lam + a0
        df = (3 * lam + 2 * a2) * lam + a1
        if df == 0:
            break
        step = f / df
        if not np.isfinite(step):
            break
        new = lam - step
        f_new = ((new + a2) * new + a1) * new + a0
        if abs(f_new) >= abs(f):
            break
        lam = new
    return lam


def cubic_roots(a2, a1, a0):
    """Roots of the monic cubic ``l^3 + a2 l^2 + a1 l + a0``.

    Closed form (Cardano for one real root, trigonometric for three),
    then a guarded Newton polish.  A complex pair is returned as exact
    conjugates.
    """
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        sq = math.sqrt(disc)
        a = np.cbrt(-q / 2.0 + sq)
        b = np.cbrt(-q / 2.0 - sq)
        r = _polish(a + b - shift, a2, a1, a0)
        pair = complex(-(a + b) / 2.0 - shift, math.sqrt(3.0) / 2.0 * (a - b))
        pair = _polish(pair, a2, a1, a0)
        if pair.imag < 0:
            pair = pair.conjugate()
        return [complex(r), pair, pair.conjugate()]
    if p == 0:
        roots = [-shift] * 3
    else:
        rad = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * rad)))
        phi = math.acos(arg) / 3.0
        roots = [rad * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
    return [complex(_polish(r, a2, a1, a0)) for r in sorted(roots, reverse=True)]


def eigenvalues3(m) -> tuple:
    """Eigenvalues of a real 3x3 matrix from its characteristic cubic."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ValueError("need a finite 3x3 matrix")
    _, a2, a1, a0 = char_poly(m)
    return tuple(cubic_roots(a2, a1, a0))


class Stability(str, enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    SADDLE_FOCUS_U2 = "SaddleFocusU2"
    SADDLE_FOCUS_U1 = "SaddleFocusU1"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    SADDLE = "Saddle"
    NONHYPERBOLIC = "NonHyperbolic"


def classify(eigs, tol=NONHYPERBOLIC_TOL) -> Stability:
    """Stability class from three eigenvalues (real parts within ``tol`` of
    zero are reported as nonhyperbolic)."""
    re = [e.real for e in eigs]
    if any(abs(r) < tol for r in re):
        return Stability.NONHYPERBOLIC
    has_pair = any(e.imag != 0 for e in eigs)
    n_unstable = sum(r > 0 for r in re)
    if has_pair:
        real_root = next(e for e in eigs if e.imag == 0)
        if n_unstable == 0:
            return Stability.STABLE_FOCUS
        if n_unstable == 3:
            return Stability.UNSTABLE_FOCUS
        return Stability.SADDLE_FOCUS_U2 if real_root.real < 0 else Stability.SADDLE_FOCUS_U1
    if n_unstable == 0:
        return Stability.STABLE_NODE
    if n_unstable == 3:
        return Stability.UNSTABLE_NODE
    return Stability.SADDLE


@dataclass(frozen=True)
class Equilibrium:
    state: tuple
    eigenvalues: tuple
    stability: Stability
    kind: str

    @property
    def is_interior(self):
        return self.kind == "interior"

    def to_dict(self):
        return {"kind": self.kind, "state": list(self.state), "stability": self.stability.value,
                "eigenvalues": [[e.real, e.imag] for e in self.eigenvalues]}


def _make(state, p, kind):
    j = jacobian(state, p)
    eigs = eigenvalues3(j)
    return Equilibrium(tuple(float(v) for v in state), eigs, classify(eigs), kind)


def _roots_on(g, lo, hi, n=SCAN_POINTS):
    # stay off the endpoints where eliminations may blow up
    xs = np.linspace(lo, hi, n + 1)[1:-1]
    with np.errstate(all="ignore"):
        gs = np.asarray(g(xs), dtype=float)
    out = []
    for i in range(xs.size - 1):
        a, b = gs[i], gs[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            out.append(xs[i])
        elif a * b < 0:
            out.append(brentq(g, xs[i], xs[i + 1], xtol=1e-15, maxiter=200))
    return out


def _newton_rates(s, p, iters=20):
    s = np.array(s, dtype=float)
    for _ in range(iters):
        r = np.array(uvw(s, p))
        if np.max(np.abs(r)) < 1e-15:
            break
        s = s - np.linalg.solve(rates_jacobian(s, p), r)
    return s


def _interior_candidates(p):
    """x-coordinates solving u = v = w = 0, by elimination onto one variable."""
    b1, b2 = p.beta1, p.beta2
    if p.a12 == 0:
        # v = 0 fixes x; u = w = 0 is then linear in (y, z)
        x = p.c * b1 / (1 - p.c)
        m = np.array([[1 / (b1 + x), 1 / (b2 + x)], [p.a21, p.h]])
        rhs = np.array([1 - x, x / (b2 + x) - p.d])
        if abs(np.linalg.det(m)) < 1e-300:
            return []
        y, z = np.linalg.solve(m, rhs)
        return [(x, y, z)]

    def z_of(x):
        return (x / (b1 + x) - p.c) / p.a12

    if p.a21 == 0:
        # w = 0 no longer carries y; solve it for x, then u = 0 for y
        def g(x):
            return x / (b2 + x) - p.d - p.h * z_of(x)

        pts = []
        for x in _roots_on(g, 0.0, 1.0):
            z = z_of(x)
            pts.append((x, (b1 + x) * (1 - x - z / (b2 + x)), z))
        return pts

    def y_of(x):
        return (x / (b2 + x) - p.d - p.h * z_of(x)) / p.a21

    def g(x):
        return uvw((x, y_of(x), z_of(x)), p)[0]

    return [(x, y_of(x), z_of(x)) for x in _roots_on(g, 0.0, 1.0)]


def interior_equilibria(p: ModelParams) -> list:
    """Positive solutions of ``u = v = w = 0``, polished to 1e-12."""
    out = []
    for cand in _interior_candidates(p):
        s = _newton_rates(cand, p)
        if not np.all(np.isfinite(s)) or np.min(s) <= 0:
            continue
        if np.max(np.abs(uvw(s, p))) > EQUILIBRIUM_TOL:
            continue
        if any(np.max(np.abs(s - np.array(e))) < 1e-9 for e in out):
            continue
        out.append(tuple(s))
    return out


def boundary_equilibria(p: ModelParams) -> list:
    b1, b2 = p.beta1, p.beta2
    eq = [_make((0.0, 0.0, 0.0), p, "trivial"), _make((1.0, 0.0, 0.0), p, "prey-only")]
    # z = 0: v = 0 and u = 0
    x = p.c * b1 / (1 - p.c)
    if x < 1:
        eq.append(_make((x, (b1 + x) * (1 - x), 0.0), p, "no-z"))
    # y = 0: w = 0 and u = 0, with z = (b2 + x)(1 - x)

    def g(x):
        return x / (b2 + x) - p.d - p.h * (b2 + x) * (1 - x)

    for x in _roots_on(g, 0.0, 1.0):
        eq.append(_make((x, 0.0, (b2 + x) * (1 - x)), p, "no-y"))
    return eq


def find_equilibria(p: ModelParams) -> list:
    """All boundary equilibria plus the interior ones.

    Raises NoInteriorEquilibrium (carrying the boundary list) when the
    scan finds no positive interior solution.
    """
    boundary = boundary_equilibria(p)
    interior = [_make(s, p, "interior") for s in interior_equilibria(p)]
    if not interior:
        raise NoInteriorEquilibrium(f"no interior equilibrium at h={p.h}", boundary)
    return boundary + interior
