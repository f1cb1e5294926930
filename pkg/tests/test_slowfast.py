import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from predmmo.errors import NoCrossing
from predmmo.integrator import IntegrationSettings, integrate
from predmmo.model import ModelParams, interior_equilibria, u_x, uvw
from predmmo.slowfast import (FoldedClass, converges_to_folded_node, delay_field, desing_jacobian,
                              desing_rhs, detect_fsn2, find_folded_singularities, fold_curve,
                              fold_x_range, folded_node, manifold_z, pontryagin_delay,
                              s_max_bound)


def test_manifold_inverts_u(base):
    rng = np.random.default_rng(7)
    for x, y in rng.uniform(0.0, 1.0, size=(1000, 2)):
        z = manifold_z(x, y, base)
        assert abs(uvw((x, y, z), base)[0]) < 1e-13 * max(1.0, abs(z))


def test_manifold_corner_and_node(base):
    assert manifold_z(1.0, 0.0, base) == 0
    assert abs(manifold_z(0.3383, 0.0923, base) - 0.3474) < 1e-3


def test_fold_curve_residuals(base):
    fc = fold_curve(base, 100)
    for s in fc.points():
        assert abs(uvw(s, base)[0]) < 1e-12
        assert abs(u_x(s, base)) < 1e-12
        assert min(s) >= 0


def test_fold_curve_endpoint_on_y_zero(base):
    fc = fold_curve(base, 400)
    i = np.argmin(fc.y)
    assert fc.y[i] < 1e-9
    assert abs(fc.x[i] - (1 - base.beta2) / 2) < 1e-9
    lo, hi = fold_x_range(base)
    assert lo <= fc.x.min() and fc.x.max() <= hi


def test_desing_vanishes_at_equilibrium(base):
    e = interior_equilibria(base)[0]
    assert np.max(np.abs(desing_rhs(e[:2], base))) < 1e-10


def test_desing_second_component_orientation(base):
    rng = np.random.default_rng(3)
    for x, y in rng.uniform(0.05, 0.6, size=(50, 2)):
        s = (x, y, manifold_z(x, y, base))
        _, v, _ = uvw(s, base)
        assert np.isclose(desing_rhs((x, y), base)[1], -u_x(s, base) * y * v, rtol=1e-12,
                          atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.6), st.floats(0.02, 0.5))
def test_desing_jacobian_finite_differences(x, y):
    p = ModelParams(h=0.785)
    eps = 1e-6
    num = np.column_stack([
        (desing_rhs((x + eps, y), p) - desing_rhs((x - eps, y), p)) / (2 * eps),
        (desing_rhs((x, y + eps), p) - desing_rhs((x, y - eps), p)) / (2 * eps),
    ])
    ana = desing_jacobian((x, y), p)
    assert np.allclose(ana, num, rtol=1e-6, atol=1e-8)


def test_folded_node_location(base):
    fs = folded_node(base)
    assert fs is not None
    assert np.allclose(fs.location, (0.3383, 0.0923, 0.3474), atol=1e-3)


def test_folded_singularity_residuals_and_class(base):
    for fs in find_folded_singularities(base):
        x, y, z = fs.location
        assert abs(uvw(fs.location, base)[0]) < 1e-12
        assert abs(u_x(fs.location, base)) < 1e-12
        assert np.max(np.abs(desing_rhs((x, y), base))) < 1e-12
        eig = np.linalg.eigvals(desing_jacobian((x, y), base))
        if fs.kind == FoldedClass.FOLDED_NODE:
            assert np.all(np.abs(eig.imag) < 1e-12) and eig.real[0] * eig.real[1] > 0


def test_mu_and_s_max():
    fs = folded_node(ModelParams(h=0.819))
    assert abs(fs.mu - 0.0066) < 5e-4
    assert math.floor(fs.s_max) == 76
    assert fs.s_max == pytest.approx(s_max_bound(fs.mu))


def test_s_max_decreases_with_mu():
    mus = []
    for h in np.linspace(0.78, 0.95, 12):
        fs = folded_node(ModelParams(h=h))
        if fs is not None and 0 < fs.mu <= 1:
            mus.append((fs.mu, fs.s_max))
    mus.sort()
    assert len(mus) > 5
    assert all(b[1] < a[1] for a, b in zip(mus, mus[1:]))


def test_fig1_folded_node(fig1):
    assert folded_node(fig1) is not None


def test_funnel_predicate(base):
    fs = folded_node(base)
    x, y, _ = fs.location
    # the strong direction contracts fast; the weak one needs a longer horizon
    vx, vy = fs.v_s
    assert converges_to_folded_node((x + 0.01 * vx, y + 0.01 * vy), fs, base)
    vx, vy = fs.v_w
    start = (x + 0.002 * vx, y + 0.002 * vy)
    assert not converges_to_folded_node(start, fs, base, T=1.0)
    assert converges_to_folded_node(start, fs, base, T=1e4)


@pytest.mark.parametrize("kw, target, tol", [({}, 0.7785, 5e-4),
                                             ({"beta1": 0.4}, 3.36351, 1e-3),
                                             ({"beta1": 0.35}, 1.48632, 1e-3)])
def test_detect_fsn2(kw, target, tol):
    p = ModelParams(**kw)
    bracket = (0.745, 0.9) if not kw else (target - 0.2, target + 0.2)
    h = detect_fsn2(p, bracket)
    assert abs(h - target) < tol
    e = min(interior_equilibria(p.replace(h=h)), key=lambda e: abs(u_x(e, p.replace(h=h))))
    assert abs(u_x(e, p.replace(h=h))) < 1e-10


def test_transcritical_exchange():
    p = ModelParams()
    h = detect_fsn2(p)
    signs = []
    for dh in (-1e-3, 1e-3):
        q = p.replace(h=h + dh)
        e = min(interior_equilibria(q), key=lambda e: abs(u_x(e, q)))
        signs.append(np.sign(u_x(e, q)))
    assert signs[0] == -signs[1]


def test_no_crossing():
    with pytest.raises(NoCrossing):
        detect_fsn2(ModelParams(), (0.85, 0.95))


def test_delay_on_fold_is_immediate(base):
    z0 = base.beta2 * (1 - 0.1 / base.beta1)
    r = pontryagin_delay(0.1, z0, base)
    assert r.tau0 == 0 and (r.y, r.z) == (0.1, z0)


def test_delay_integral_vanishes(base):
    y0, z0 = 0.3, 0.2
    r = pontryagin_delay(y0, z0, base)
    assert r.tau0 > 0
    traj = integrate(delay_field(base), (y0, z0, 0.0), (0.0, r.tau0),
                     IntegrationSettings(rtol=1e-12, atol=1e-14))

    def u(t):
        y, z, _ = traj(t)
        return uvw((0.0, y, z), base)[0]

    early = u(1e-3 * r.tau0)
    assert early < 0
    val, _ = quad(u, 0.0, r.tau0, limit=500, epsabs=1e-13, epsrel=1e-13)
    assert abs(val) < 1e-9


def test_delay_rejects_repelling_start(base):
    with pytest.raises(ValueError):
        pontryagin_delay(0.01, 0.01, base)
