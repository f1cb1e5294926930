"""FSN II point, normal-form coefficients and the local Hopf analysis.

Near the folded saddle-node of type II at ``(xbar, ybar, zbar, hbar)`` the
model reduces, with ``tau = s / delta``, to

    u' = v + u^2/2 + delta (alpha u + F_uw u w + F_uuu u^3 / 6)
    v' = -u
    w' = delta (H_w w + H_uu u^2 / 2)

The coefficient expressions as typeset contain four slips that the
reference values for all three efficiency cases expose:

* the ``a21`` term of the block shared by ``alpha`` and ``F_uuu`` carries
  ``beta1``, not ``beta2``: ``a21 beta1 x y z / ((beta1 + x)^2 (beta2 + x))``;
* the ``a21`` term in the denominator of the ``alpha`` slope is
  ``a21 beta1 / (beta1 + x)``, the same bracket as in ``det J``;
* the second ``F_uuu`` term divides by the square of
  ``y/(beta1 + x)^3 + z/(beta2 + x)^3``;
* the ``h`` term of ``H_uu`` has ``(beta2 + x)^2`` in the denominator.

With these the published coefficients are reproduced to four or more
significant figures; ``printed=True`` evaluates the expressions as typeset.
Where the expressions use ``h`` rather than ``hbar`` that is kept.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernel
from .errors import (
    DegenerateHopf,
    FeasibilityViolated,
    InfeasiblePoint,
    MultipleRoots,
    NoRootInBracket,
    NotSaddleFocus,
    OmegaComplex,
)
from .integrator import VectorField
from .model import ModelParams, f_jacobian, u_x, uvw
from .slowfast import fold_point

DIAGNOSTIC_TOL = 1e-10
DEGENERATE_TOL = 1e-10


@dataclass(frozen=True)
class FsnPoint:
    xbar: float
    ybar: float
    zbar: float
    hbar: float
    omega: float
    branch: str = "general"

    @property
    def state(self):
        return (self.xbar, self.ybar, self.zbar)

    def params(self, p: ModelParams) -> ModelParams:
        return p.replace(h=self.hbar)

    def residuals(self, p: ModelParams):
        """Max-norm of ``(u, v, w)`` and ``|u_x|`` at the point."""
        q = self.params(p)
        return max(abs(r) for r in uvw(self.state, q)), abs(u_x(self.state, q))

    def to_dict(self):
        return asdict(self)


def omega_of(x, y, z, p: ModelParams) -> float:
    return math.sqrt(p.beta1 * x * y / (p.beta1 + x) ** 3 + p.beta2 * x * z / (p.beta2 + x) ** 3)


def hbar_of(x, p: ModelParams) -> float:
    b1, b2 = p.beta1, p.beta2
    num = (b2 - b1) * (x / (b2 + x) - p.d) + p.a21 * (1 - b2 - 2 * x) * (b1 + x) ** 2
    return num / ((1 - b1 - 2 * x) * (b2 + x) ** 2)


def xbar_polynomial(p: ModelParams, printed: bool = False) -> np.polynomial.Polynomial:
    """Quartic whose root in the admissible bracket is ``xbar``.

    ``a12 (1 - b1 - 2x)(b1 + x)(b2 + x)^2 - (b2 - b1)(1 - c) x + (b2 - b1) c b1``.
    With ``printed=True`` the middle term carries a plus sign instead; that
    variant contradicts the reference coordinates and the no-competition
    limit and is kept only for comparison.
    """
    P = np.polynomial.Polynomial
    b1, b2 = p.beta1, p.beta2
    sign = 1.0 if printed else -1.0
    quartic = p.a12 * P([1 - b1, -2]) * P([b1, 1]) * P([b2, 1]) ** 2
    return quartic + P([(b2 - b1) * p.c * b1, sign * (b2 - b1) * (1 - p.c)])


def _bracket(p):
    lo = (1 - max(p.beta1, p.beta2)) / 2
    hi = (1 - min(p.beta1, p.beta2)) / 2
    return lo, hi


def xbar_roots(p: ModelParams, printed: bool = False) -> list:
    """Real roots of :func:`xbar_polynomial` strictly inside the bracket."""
    poly = xbar_polynomial(p, printed)
    dpoly = poly.deriv()
    lo, hi = _bracket(p)
    out = []
    for r in poly.roots():
        if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)):
            continue
        x = r.real
        for _ in range(5):
            d = dpoly(x)
            if d == 0:
                break
            x -= poly(x) / d
        if lo < x < hi and all(abs(x - o) > 1e-12 for o in out):
            out.append(float(x))
    return sorted(out)


def solve_fsn(p: ModelParams) -> FsnPoint:
    """FSN II point for the parameter set (``h`` is ignored).

    Equal efficiencies and the no-competition case go to their closed
    forms.
    """
    if p.beta1 == p.beta2:
        return solve_fsn_equal_beta(p)
    if p.a12 == 0 and p.a21 == 0:
        return solve_fsn_no_competition(p)
    roots = xbar_roots(p)
    if not roots:
        lo, hi = _bracket(p)
        raise NoRootInBracket(f"no root of the xbar quartic in ({lo}, {hi})")
    if len(roots) > 1:
        raise MultipleRoots(f"{len(roots)} roots of the xbar quartic in the bracket", roots)
    x = roots[0]
    if p.a12 > 0:
        z = (x / (p.beta1 + x) - p.c) / p.a12
        y = (p.beta1 + x) * (1 - x - z / (p.beta2 + x))
    else:
        y, z = fold_point(x, p)
    return FsnPoint(x, y, z, hbar_of(x, p), omega_of(x, y, z, p), "general")


def solve_fsn_equal_beta(p: ModelParams) -> FsnPoint:
    """Closed-form FSN II point when ``beta1 == beta2``."""
    if p.beta1 != p.beta2:
        raise ValueError("requires beta1 == beta2")
    b, a12, a21, c, d = p.beta1, p.a12, p.a21, p.c, p.d
    mid = 4 * ((1 - b) / (1 + b) - c)
    if not mid > 0:
        raise FeasibilityViolated("4((1 - beta1)/(1 + beta1) - c) > 0 fails")
    if not a12 * (1 + b) ** 2 > mid:
        raise FeasibilityViolated("a12 (1 + beta1)^2 > 4((1 - beta1)/(1 + beta1) - c) fails")
    if abs(a21 * (1 + b) ** 2 - 4 * (c - d)) <= 1e-12:
        raise FeasibilityViolated("a21 (1 + beta1)^2 - 4(c - d) != 0 fails")
    num = 4 * ((a12 + a21) * (1 - b) - (c * a21 + d * a12) * (1 + b)) - a12 * a21 * (1 + b) ** 3
    if not num > 0:
        raise FeasibilityViolated("numerator of hbar must be positive")
    x = (1 - b) / 2
    y = (a12 * (1 + b) ** 3 - 4 * (1 - b) + 4 * c * (1 + b)) / (4 * a12 * (1 + b))
    z = (1 - b - c * (1 + b)) / (a12 * (1 + b))
    h = num / (4 * (1 - b - c * (1 + b)))
    return FsnPoint(x, y, z, h, omega_of(x, y, z, p), "equal-beta")


def solve_fsn_no_competition(p: ModelParams) -> FsnPoint:
    """Closed-form FSN II point when ``a12 = a21 = 0``."""
    if p.a12 != 0 or p.a21 != 0:
        raise ValueError("requires a12 = a21 = 0")
    b1, b2, c = p.beta1, p.beta2, p.c
    if b1 == b2:
        raise InfeasiblePoint("closed forms are singular for beta1 == beta2")
    x = c * b1 / (1 - c)
    y = b1**2 / ((1 - c) ** 3 * (b1 - b2)) * ((1 - c) * (1 - b2) - 2 * c * b1)
    z = (c * b1 + b2 * (1 - c)) ** 2 / ((1 - c) ** 3 * (b2 - b1)) * ((1 - c) - b1 * (1 + c))
    if y <= 0 or z <= 0:
        raise InfeasiblePoint(f"FSN II point is not positive: ybar={y:.6g}, zbar={z:.6g}")
    h = (b2 - b1) * (x / (b2 + x) - p.d) / ((1 - b1 - 2 * x) * (b2 + x) ** 2)
    if h <= 0:
        raise InfeasiblePoint(f"hbar={h:.6g} is not positive")
    return FsnPoint(x, y, z, h, omega_of(x, y, z, p), "no-competition")


def newton_fsn(p: ModelParams, seed, iters=50) -> FsnPoint:
    """Solve ``u = v = w = u_x = 0`` for ``(x, y, z, h)`` by Newton's method."""
    s = np.array(seed, dtype=float)
    b1, b2 = p.beta1, p.beta2
    for _ in range(iters):
        x, y, z, h = s
        B1, B2 = b1 + x, b2 + x
        u = 1 - x - y / B1 - z / B2
        v = x / B1 - p.c - p.a12 * z
        w = x / B2 - p.d - p.a21 * y - h * z
        ux = -1 + y / B1**2 + z / B2**2
        F = np.array([u, v, w, ux])
        J = np.array([
            [ux, -1 / B1, -1 / B2, 0.0],
            [b1 / B1**2, 0.0, -p.a12, 0.0],
            [b2 / B2**2, -p.a21, -h, -z],
            [-2 * y / B1**3 - 2 * z / B2**3, 1 / B1**2, 1 / B2**2, 0.0],
        ])
        step = np.linalg.solve(J, F)
        s = s - step
        if np.max(np.abs(step)) < 1e-15:
            break
    x, y, z, h = s
    return FsnPoint(x, y, z, h, omega_of(x, y, z, p), "newton")


# coefficients

@dataclass(frozen=True)
class NormalFormCoeffs:
    delta: float
    alpha: float
    f_uw: float
    f_uuu: float
    h_w: float
    h_uu: float
    zeta: float
    h: float
    alpha_slope: float
    alpha_intercept: float

    @property
    def delta_over_sqrt_zeta(self):
        return self.delta / math.sqrt(self.zeta)

    def with_alpha(self, alpha: float) -> "NormalFormCoeffs":
        d = asdict(self)
        d["alpha"] = float(alpha)
        return NormalFormCoeffs(**d)

    def as_array(self):
        return np.array([self.delta, self.alpha, self.f_uw, self.f_uuu, self.h_w, self.h_uu])

    def field(self) -> VectorField:
        return VectorField(_kernel.NORMAL_FORM, self.as_array(), 3, -math.inf, "normal-form")

    def to_dict(self):
        d = asdict(self)
        d["delta_over_sqrt_zeta"] = self.delta_over_sqrt_zeta
        return d


def _k_block(fsn: FsnPoint, p: ModelParams, h: float, printed: bool):
    X, Y, Z = fsn.state
    b1, b2 = p.beta1, p.beta2
    B1, B2 = b1 + X, b2 + X
    b_a21 = b2 if printed else b1
    return (p.a12 * b2 * X * Y * Z / (B1 * B2**2) + p.a21 * b_a21 * X * Y * Z / (B1**2 * B2)
            + h * b2 * X * Z**2 / B2**3)


def _alpha_parts(fsn: FsnPoint, p: ModelParams, h: float, printed: bool = False):
    """``(slope, offset)`` with ``alpha = slope (h - hbar)/zeta - offset``."""
    X, Y, Z, hb, om = fsn.xbar, fsn.ybar, fsn.zbar, fsn.hbar, fsn.omega
    b1, b2, a12, a21 = p.beta1, p.beta2, p.a12, p.a21
    B1, B2 = b1 + X, b2 + X
    num = X * Z * B2 * (-2 * a12 * (Y / B1**3 + Z / B2**3) + b1 * (b1 - b2) / (B2**2 * B1**3))
    den = a12 * b2 / B2 + a21 * b1 / (B2 if printed else B1) - b1 * hb * B2 / B1**2
    return num / den, _k_block(fsn, p, h, printed) / om**2


def coeffs(fsn: FsnPoint, p: ModelParams, zeta: float | None = None,
           h: float | None = None, printed: bool = False) -> NormalFormCoeffs:
    """Evaluate ``delta, alpha, F_uw, F_uuu, H_w, H_uu`` at the FSN point.

    ``zeta`` and ``h`` default to ``p.zeta`` and ``hbar``.  ``alpha_slope``
    and ``alpha_intercept`` describe ``alpha`` as an affine function of
    ``(h - hbar)/zeta`` with the ``h``-dependent offset frozen at ``hbar``.
    """
    zeta = p.zeta if zeta is None else float(zeta)
    h = fsn.hbar if h is None else float(h)
    X, Y, Z, hb, om = fsn.xbar, fsn.ybar, fsn.zbar, fsn.hbar, fsn.omega
    b1, b2, a12, a21 = p.beta1, p.beta2, p.a12, p.a21
    B1, B2 = b1 + X, b2 + X
    om2 = om * om
    S = Y / B1**3 + Z / B2**3
    delta = math.sqrt(zeta) / om
    f_uw = (hb * X * Z / B2 + X * (a12 * Y / B1 - a21 * Z * B1 / B2**2)
            + (b2 - b1) * om2 / (2 * B1 * B2**2 * S))
    f_uuu = (_k_block(fsn, p, h, printed) / om2
             - 3 * om2 / (2 * X**2) * (b1 * Y / B1**4 + b2 * Z / B2**4) / (S if printed else S * S)
             - (2 * b1 * X * Y / B1**4 + 2 * b2 * X * Z / B2**4
                - b1**2 * Y / B1**4 - b2**2 * Z / B2**4) / (2 * X * S))
    g = 1 - b2 * X * Z / (om2 * B2**3)
    h_w = a12 * b2 * X * Y * Z / (om2 * B1 * B2**2) + (a21 * Z * B1 / B2 - hb * Z) * g
    h_pow = 3 if printed else 2
    h_uu = (g * (b2 * Z / (X * B2**3 * S) - (a21 * b1 * Y * Z / B1**2 + h * b2 * Z**2 / B2**h_pow) / om2)
            - b2 * X * Z / (om2 * B1 * B2**2) * (b1 * Y / (X * B1**3 * S) - a12 * b2 * Y * Z / (om2 * B2**2)))
    slope, offset = _alpha_parts(fsn, p, h, printed)
    _, offset_bar = _alpha_parts(fsn, p, hb, printed)
    alpha = slope * (h - hb) / zeta - offset
    return NormalFormCoeffs(delta, alpha, f_uw, f_uuu, h_w, h_uu, zeta, h, slope, -offset_bar)


def alpha_at(fsn: FsnPoint, p: ModelParams, zeta: float, h: float, printed: bool = False) -> float:
    slope, offset = _alpha_parts(fsn, p, h, printed)
    return slope * (h - fsn.hbar) / zeta - offset


def h_for_alpha(fsn: FsnPoint, p: ModelParams, zeta: float, alpha: float,
                printed: bool = False) -> float:
    """Invert the (affine in ``h``) alpha relation."""
    h0, h1 = fsn.hbar, fsn.hbar + zeta
    a0 = alpha_at(fsn, p, zeta, h0, printed)
    a1 = alpha_at(fsn, p, zeta, h1, printed)
    return h0 + (alpha - a0) * (h1 - h0) / (a1 - a0)


# diagnostics

def det_j(fsn: FsnPoint, p: ModelParams) -> float:
    """Determinant of the Jacobian of ``(x u, y v, z w)`` at the FSN point."""
    return float(np.linalg.det(f_jacobian(fsn.state, fsn.params(p))))


def p3_closed_form(fsn: FsnPoint, p: ModelParams) -> float:
    """``det J`` written in the FSN coordinates."""
    X, Y, Z, hb = fsn.xbar, fsn.ybar, fsn.zbar, fsn.hbar
    B1, B2 = p.beta1 + X, p.beta2 + X
    return X * Y * Z / (B1 * B2) * (p.a21 * p.beta1 / B1 + p.a12 * p.beta2 / B2
                                    - p.beta1 * hb * B2 / B1**2)


def diagnostics(fsn: FsnPoint, p: ModelParams) -> dict:
    """Conditions (P1)-(P6) evaluated numerically (reported, not enforced)."""
    q = fsn.params(p)
    X, Y, Z = fsn.state
    B1, B2 = p.beta1 + X, p.beta2 + X
    J = f_jacobian(fsn.state, q)
    res_uvw, res_ux = fsn.residuals(p)
    detj = float(np.linalg.det(J))
    p4 = J[0, 1] * J[1, 0] + J[0, 2] * J[2, 0]
    u_xx = -2 * Y / B1**3 - 2 * Z / B2**3
    ux = u_x(fsn.state, q)
    f1_xx = 2 * ux + X * u_xx
    f1_xy = -1 / B1 + X / B1**2
    f1_xz = -1 / B2 + X / B2**2
    f_h = np.array([0.0, 0.0, -Z * Z])
    p6 = float(-np.array([f1_xx, f1_xy, f1_xz]) @ np.linalg.solve(J, f_h))
    return {
        "P1": {"value": res_uvw, "ok": res_uvw < DIAGNOSTIC_TOL},
        "P2": {"value": res_ux, "ok": res_ux < DIAGNOSTIC_TOL},
        "P3": {"value": detj, "ok": abs(detj) > DIAGNOSTIC_TOL},
        "P4": {"value": float(p4), "ok": p4 < -DIAGNOSTIC_TOL},
        "P5": {"value": u_xx, "ok": abs(u_xx) > DIAGNOSTIC_TOL},
        "P6": {"value": p6, "ok": abs(p6) > DIAGNOSTIC_TOL},
    }


# normal-form dynamics

def nf_rhs(s, c: NormalFormCoeffs) -> np.ndarray:
    u, v, w = s
    d = c.delta
    return np.array([
        v + u * u / 2 + d * (c.alpha * u + c.f_uw * u * w + c.f_uuu * u**3 / 6),
        -u,
        d * (c.h_w * w + c.h_uu * u * u / 2),
    ])


def nf_jacobian(s, c: NormalFormCoeffs) -> np.ndarray:
    u, v, w = s
    d = c.delta
    return np.array([
        [u + d * (c.alpha + c.f_uw * w + c.f_uuu * u * u / 2), 1.0, d * c.f_uw * u],
        [-1.0, 0.0, 0.0],
        [d * c.h_uu * u, 0.0, d * c.h_w],
    ])


def layer_invariant(u, v):
    """First integral ``k = -(u^2 + 2v - 2) e^v`` of the unperturbed layer flow."""
    return -(u * u + 2 * v - 2) * np.exp(v)


def origin_eigenvalues(c: NormalFormCoeffs):
    ad = c.alpha * c.delta
    root = cmath.sqrt(ad * ad - 4)
    return complex(c.delta * c.h_w), (ad + root) / 2, (ad - root) / 2


def saddle_focus_band(c: NormalFormCoeffs):
    """``alpha`` interval where the origin is a saddle-focus (for ``H_w < 0``)."""
    return 0.0, 2.0 / c.delta


def _omega_lin(c):
    ad = c.alpha * c.delta
    if ad * ad >= 4:
        raise OmegaComplex(f"alpha delta = {ad:.6g}: spiral frequency is not real")
    return math.sqrt(1 - ad * ad / 4)


def _spiral(u0, v0, dt, c, om):
    ad = c.alpha * c.delta
    e = np.exp(ad * dt / 2)
    cs, sn = np.cos(om * dt), np.sin(om * dt)
    u = e * (u0 * cs + (v0 / om + ad * u0 / (2 * om)) * sn)
    v = -ad / 2 * u + e * ((v0 + ad * u0 / 2) * cs - om * u0 * sn)
    return u, v


def linearized_flow_in(s0, tau, c: NormalFormCoeffs):
    """Flow of the linearization at the origin, started at ``s0`` at ``tau = 0``."""
    om = _omega_lin(c)
    u0, v0, w0 = s0
    tau = np.asarray(tau, dtype=float)
    u, v = _spiral(u0, v0, tau, c, om)
    return np.array([u, v, w0 * np.exp(c.delta * c.h_w * tau)])


def linearized_flow_out(s1, tau1, tau, c: NormalFormCoeffs):
    """Outward spiral for ``tau >= tau1``.

    ``s1 = (u1, v1, w0)``: the ``(u, v)`` values at ``tau1`` and the ``w``
    value at the original entry time, so that ``w(tau1) = w0 exp(delta H_w tau1)``.
    The ``w`` equation is forced by the growing envelope ``exp(alpha delta tau)``.
    """
    om = _omega_lin(c)
    u1, v1, w0 = s1
    tau = np.asarray(tau, dtype=float)
    u, v = _spiral(u1, v1, tau - tau1, c, om)
    d = c.delta
    lam = d * c.h_w
    k = c.alpha * d - lam
    w = w0 * np.exp(lam * tau) + d * c.h_uu * np.exp(lam * tau) / (2 * k) * (
        np.exp(k * tau) - np.exp(k * tau1))
    return np.array([u, v, w])


# Hopf

class Criticality(str, enum.Enum):
    SUPERCRITICAL = "Supercritical"
    SUBCRITICAL = "Subcritical"


@dataclass(frozen=True)
class HopfResult:
    h_hopf: float
    A: float
    l1: float
    criticality: Criticality
    criticality_quantity: float

    def to_dict(self):
        d = asdict(self)
        d["criticality"] = self.criticality.value
        return d


def hopf(fsn: FsnPoint, p: ModelParams, zeta: float | None = None,
         printed: bool = False) -> HopfResult:
    """Hopf point ``hbar + zeta A`` (where ``alpha = 0``) and its first Lyapunov coefficient."""
    zeta = p.zeta if zeta is None else float(zeta)
    h_h = h_for_alpha(fsn, p, zeta, 0.0, printed)
    c = coeffs(fsn, p, zeta, h_h, printed)
    if c.h_w == 0:
        raise DegenerateHopf("H_w = 0")
    q = c.f_uuu / 2 - c.f_uw * c.h_uu / c.h_w
    if abs(q) < DEGENERATE_TOL:
        raise DegenerateHopf(f"criticality quantity {q:.3g} is zero to tolerance")
    crit = Criticality.SUPERCRITICAL if q < 0 else Criticality.SUBCRITICAL
    return HopfResult(h_h, (h_h - fsn.hbar) / zeta, c.delta / 4 * q, crit, q)


@dataclass(frozen=True)
class CenterManifold:
    phi: float
    u3: float
    uv2: float


def center_manifold_coeff(c: NormalFormCoeffs) -> CenterManifold:
    """``w = phi (u^2 + v^2)`` with ``phi = -H_uu/(4 H_w)`` and the cubic
    coefficients of the reduced planar ``u`` equation."""
    if c.h_w == 0:
        raise DegenerateHopf("H_w = 0")
    cross = -c.f_uw * c.h_uu / (4 * c.h_w)
    return CenterManifold(-c.h_uu / (4 * c.h_w), cross + c.f_uuu / 6, cross)


@dataclass(frozen=True)
class Shilnikov:
    nu0: float
    satisfied: bool
    alpha_band: tuple


def shilnikov(c: NormalFormCoeffs) -> Shilnikov:
    """Saddle-focus ratio ``nu0 = |Re lambda_{2,3} / lambda_1|``; the
    condition holds when ``nu0 < 1``."""
    lo, hi = saddle_focus_band(c)
    if not (c.h_w < 0 and lo < c.alpha < hi):
        raise NotSaddleFocus(f"origin is not a saddle-focus (alpha={c.alpha:.6g}, H_w={c.h_w:.6g})")
    nu0 = abs(c.alpha * c.delta / 2) / abs(c.delta * c.h_w)
    return Shilnikov(nu0, nu0 < 1, (0.0, -2 * c.h_w))


def report(p: ModelParams, zeta: float | None = None, h: float | None = None,
           printed: bool = False) -> dict:
    """Everything about the FSN II point of one parameter set, JSON-ready."""
    fsn = solve_fsn(p)
    zeta = p.zeta if zeta is None else zeta
    c = coeffs(fsn, p, zeta, h, printed)
    out = {"params": p.to_dict(), "zeta": zeta, "printed_expressions": printed, "fsn": fsn.to_dict(),
           "diagnostics": diagnostics(fsn, p), "coefficients": c.to_dict()}
    try:
        out["hopf"] = hopf(fsn, p, zeta, printed).to_dict()
    except DegenerateHopf as e:
        out["hopf"] = {"error": str(e)}
    out["center_manifold"] = asdict(center_manifold_coeff(c))
    out["saddle_focus_band"] = list(saddle_focus_band(c))
    out["shilnikov_band"] = [0.0, -2 * c.h_w]
    return out
