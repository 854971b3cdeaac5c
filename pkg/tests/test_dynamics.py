import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from braidforce import dynamics as dy
from braidforce.errors import DomainError, InputError

from conftest import FIXTURES


def wobble(a: float = 0.3) -> dy.GeneratingFunction:
    """Twist map with non-constant mixed derivative: h = -xx' - a sin x sin x' + ½x² + ½x'²."""
    return dy.GeneratingFunction(
        h=lambda x, z: -x * z - a * np.sin(x) * np.sin(z) + 0.5 * x * x + 0.5 * z * z,
        h1=lambda x, z: -z - a * np.cos(x) * np.sin(z) + x,
        h2=lambda x, z: -x - a * np.sin(x) * np.cos(z) + z,
        h11=lambda x, z: a * np.sin(x) * np.sin(z) + 1,
        h12=lambda x, z: -1 - a * np.cos(x) * np.cos(z),
        h22=lambda x, z: a * np.sin(x) * np.sin(z) + 1,
        name='wobble',
    )


def jacobian_det(f, x: float, y: float, eps: float = 1e-6) -> float:
    ax = (np.array(f(x + eps, y)) - np.array(f(x - eps, y))) / (2 * eps)
    ay = (np.array(f(x, y + eps)) - np.array(f(x, y - eps))) / (2 * eps)
    return float(ax[0] * ay[1] - ax[1] * ay[0])


def test_rotation_is_clockwise():
    x, y = dy.rotation_gf(math.pi / 2).forward(1.0, 0.0)
    assert x == pytest.approx(0.0, abs=1e-15) and y == pytest.approx(-1.0)


def test_rotation_angle_range():
    with pytest.raises(InputError):
        dy.rotation_gf(0.0)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
@settings(max_examples=40, deadline=None)
def test_maps_are_area_preserving(x, y):
    for gf in (wobble(), dy.psi_rotation(4), dy.upsilon_rotation(3)):
        assert jacobian_det(gf.forward, x, y) == pytest.approx(1.0, abs=1e-6)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.1, 0.9))
@settings(max_examples=25, deadline=None)
def test_moser_isotopy_is_symplectic(x, y, t):
    flow = dy.moser_interpolate(wobble())
    assert jacobian_det(lambda a, b: flow(t, a, b), x, y, 1e-5) == pytest.approx(1.0, abs=1e-5)


def test_moser_endpoints_for_wobble():
    gf = wobble()
    flow = dy.moser_interpolate(gf)
    for x, y in [(0.3, -0.2), (-1.0, 0.7), (0.0, 0.0)]:
        assert flow(0.0, x, y) == pytest.approx((x, y), abs=1e-9)
        assert flow(1.0, x, y) == pytest.approx(gf.forward(x, y), abs=1e-8)


def test_twist_violation():
    bad = dy.GeneratingFunction(lambda a, b: a * b, lambda a, b: b, lambda a, b: a,
                                lambda a, b: 0 * a, lambda a, b: 1 + 0 * a, lambda a, b: 0 * a, 'bad')
    with pytest.raises(DomainError):
        dy.moser_interpolate(bad)


def test_potential_interpolates():
    pts = [(-0.5, 0.2), (0.0, 0.1), (0.4, -0.3)]
    v = dy.Potential.through(pts)
    for s, val in pts:
        assert v.f(s) == pytest.approx(val, abs=1e-12)
    s = np.linspace(-2, 2, 41)
    eps = 1e-6
    assert np.allclose((v.V(s + eps) - v.V(s - eps)) / (2 * eps), v.f(s), atol=1e-6)
    assert np.allclose((v.f(s + eps) - v.f(s - eps)) / (2 * eps), v.df(s), atol=1e-5)
    # compact support
    assert v.f(np.array([5.0, -5.0])) == pytest.approx([0.0, 0.0])


def test_gauss_legendre():
    assert dy.gauss_legendre(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert dy.gauss_legendre(lambda s: np.exp(-s * s), -3.0, 3.0) == pytest.approx(math.sqrt(math.pi) * math.erf(3), abs=1e-12)


def test_chain_parameters_and_marked_points():
    ci = dy.build_chained_isotopy([None, None], 4, 1)
    assert ci.d == 8 and ci.params['ell_kappa'] == 4
    assert ci.check_marked_points() < 1e-12
    with pytest.raises(InputError):
        dy.build_chained_isotopy([None], ell=2)


def test_chain_with_blocks():
    ci = dy.build_chained_isotopy([None], 4, 1, r=1, ell_r=3, rho=1, ell_rho=4)
    assert ci.d == 4 + 3 + 4
    x, y = ci.orbit(0.5, 0.2)[-1]
    assert math.isfinite(x) and math.isfinite(y)


def test_system_file_skeleton():
    spec = dy.load_system((FIXTURES / 'twist_pair_system.txt').read_text())
    X, perm = spec.skeleton()
    assert X.shape == (4, 8) and perm == [0, 1, 2, 3]
    rs = dy.recurrence_from(spec.chain)
    assert np.max(np.abs(rs.residual(X, perm))) < 1e-10
    orbit = dy.lift_orbit(X[0], rs)
    assert orbit[0] == pytest.approx(orbit[-1])


def test_system_file_errors():
    with pytest.raises(InputError):
        dy.load_system('bogus 1 2\n')
    with pytest.raises(InputError):
        dy.load_system('maps psi:4\nchain 4 1 1\n')
    with pytest.raises(InputError):
        dy.load_system('orbit 1\nmaps psi:4\n')


def test_quarter_turn_move_directions():
    a = np.array([[0.1, 0.2], [0.5, -0.2]])
    with pytest.raises(InputError):
        dy.quarter_turn_chain([a, a + [0.0, 0.1]])
    chain = dy.quarter_turn_chain([a, a + [0.1, 0.0]])
    assert chain.d == 1


def test_jacobian_matches_finite_differences():
    rs = dy.recurrence_from([wobble(), dy.psi_rotation(4), dy.rotation_gf(1.0)])
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, (2, 3))
    perm = [1, 0]
    J = rs.jacobian(X, perm)
    eps = 1e-6
    for k in range(X.size):
        e = np.zeros(X.size)
        e[k] = eps
        col = (rs.residual(X + e.reshape(X.shape), perm) - rs.residual(X - e.reshape(X.shape), perm)) / (2 * eps)
        assert np.allclose(col.ravel(), J[:, k], atol=1e-6)


def test_recurrence_is_parabolic():
    assert dy.recurrence_from([wobble()] * 3).parabolicity() > 0
    assert dy.recurrence_from([dy.psi_rotation(4)] * 4).parabolicity() > 0


def test_lift_orbit_rejects_non_orbits():
    rs = dy.recurrence_from([dy.rotation_gf(1.0)] * 3)
    with pytest.raises(DomainError):
        dy.lift_orbit([0.3, -0.1, 0.9], rs)
