import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from predmmo.errors import InvalidParameters, NoInteriorEquilibrium
from predmmo.model import (ModelParams, Stability, char_poly, classify, eigenvalues3,
                           f_jacobian, find_equilibria, interior_equilibria, jacobian,
                           rhs_fast, rhs_slow, uvw)

# direct evaluation of the three rate expressions at (0.5, 0.1, 0.1), h = 0.785
FROZEN_RHS = (12.450980392156863, 0.021666666666666664, 0.02897352941176471)

octant = st.tuples(*(st.floats(0.0, 2.0) for _ in range(3)))


def fd_jacobian(f, s, eps=1e-6):
    s = np.asarray(s, float)
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = eps
        cols.append((f(s + e) - f(s - e)) / (2 * eps))
    return np.column_stack(cols)


def test_origin_is_fixed(base):
    assert np.all(rhs_slow((0, 0, 0), base) == 0)


def test_carrying_capacity_is_fixed(base):
    assert np.allclose(rhs_slow((1, 0, 0), base), 0, atol=1e-15)


def test_quoted_equilibrium_residual(base):
    assert np.max(np.abs(rhs_fast((0.3299, 0.1004, 0.3378), base))) < 1e-3


def test_frozen_rhs_value(base):
    assert np.allclose(rhs_slow((0.5, 0.1, 0.1), base), FROZEN_RHS, rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(octant)
def test_fast_and_slow_share_zero_set(s):
    p = ModelParams(h=0.785)
    # the two time scalings differ by the constant factor zeta
    assert np.allclose(rhs_fast(s, p), p.zeta * rhs_slow(s, p), rtol=1e-12, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.tuples(*(st.floats(0.05, 1.0) for _ in range(3))))
def test_jacobians_match_finite_differences(s):
    p = ModelParams(h=0.785)
    num = fd_jacobian(lambda q: rhs_slow(q, p), s)
    assert np.allclose(jacobian(s, p), num, atol=1e-6 * max(1, np.abs(num).max()))
    num = fd_jacobian(lambda q: rhs_fast(q, p) / p.zeta * np.array([p.zeta, 1, 1]), s)
    assert np.allclose(f_jacobian(s, p), num, atol=1e-6 * max(1, np.abs(num).max()))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_coordinate_planes_invariant(a, b):
    p = ModelParams(h=0.785)
    for s, i in (((0.0, a, b), 0), ((a, 0.0, b), 1), ((a, b, 0.0), 2)):
        assert abs(rhs_slow(s, p)[i]) < 1e-10


def test_uvw_shape(base):
    assert len(uvw((0.3, 0.1, 0.3), base)) == 3


def test_interior_equilibrium_saddle_focus(base):
    inner = [e for e in find_equilibria(base) if e.is_interior]
    assert len(inner) == 1
    e = inner[0]
    assert np.allclose(e.state, (0.3299, 0.1004, 0.3378), atol=1e-3)
    assert e.stability == Stability.SADDLE_FOCUS_U2
    real = [l for l in e.eigenvalues if abs(complex(l).imag) < 1e-12]
    pair = [l for l in e.eigenvalues if abs(complex(l).imag) >= 1e-12]
    assert len(real) == 1 and complex(real[0]).real < 0
    assert len(pair) == 2 and all(complex(l).real > 0 for l in pair)


def test_no_interior_equilibrium_below_threshold():
    with pytest.raises(NoInteriorEquilibrium) as info:
        find_equilibria(ModelParams(h=0.70))
    assert info.value.boundary


def test_interior_exists_above_threshold():
    assert interior_equilibria(ModelParams(h=0.745))
    assert not interior_equilibria(ModelParams(h=0.740))


def test_equilibria_are_zeros(base):
    for e in find_equilibria(base):
        assert np.max(np.abs(rhs_fast(e.state, base))) < 1e-10
        assert min(e.state) >= 0


def test_char_poly_identity():
    assert np.allclose(char_poly(np.eye(3)), (1, -3, 3, -1))
    assert np.allclose(sorted(np.real(eigenvalues3(np.eye(3)))), (1, 1, 1))


def test_companion_roots():
    m = np.array([[0, 0, 6], [1, 0, -11], [0, 1, 6]], float)
    assert np.allclose(sorted(np.real(eigenvalues3(m))), (1, 2, 3), atol=1e-10)


def test_rotation_block():
    a, r, th = -0.5, 1.3, 0.7
    m = np.zeros((3, 3))
    m[0, 0] = a
    m[1:, 1:] = r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    tr, det = 2 * r * np.cos(th), r * r
    pair = (tr + np.sqrt(complex(tr * tr - 4 * det))) / 2
    eig = sorted(eigenvalues3(m), key=lambda z: (complex(z).imag, complex(z).real))
    assert np.allclose(eig, sorted([a, pair, pair.conjugate()], key=lambda z: (z.imag, z.real)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=9, max_size=9))
def test_eigenvalues_match_numpy(vals):
    m = np.array(vals).reshape(3, 3)
    ours = np.sort_complex(np.asarray(eigenvalues3(m), complex))
    ref = np.sort_complex(np.linalg.eigvals(m))
    scale = max(1.0, np.abs(ref).max())
    # defective matrices lose digits; the product of roots stays well conditioned
    assert np.isclose(np.prod(ours), np.linalg.det(m), atol=1e-8 * scale**3)
    assert np.isclose(np.sum(ours), np.trace(m), atol=1e-8 * scale)


def test_classify_nonhyperbolic():
    assert classify([0.0, -1.0, -2.0]) == Stability.NONHYPERBOLIC


def test_invalid_parameters():
    with pytest.raises(InvalidParameters):
        ModelParams(zeta=-1.0)
    with pytest.raises(InvalidParameters):
        ModelParams(a12=1.5)


def test_params_round_trip(base):
    assert ModelParams.from_dict(base.to_dict()) == base
    assert np.allclose(base.as_array(), [0.01, 0.25, 0.35, 0.4, 0.21, 0.5, 0.1, 0.785])
