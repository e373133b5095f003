import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinodal import GreenKernel, GridSpec, build_clifford_rep, synth_field
from spinodal.errors import DomainError, HypothesisError, SingularityError
from spinodal.green import decompose, laplace_fundamental, newton_represent
from spinodal.harmonic import HomogeneousSpinorPoly, random_dirac_harmonic

coord = st.floats(-1, 1, allow_nan=False)


@pytest.fixture(scope="module")
def K3():
    return GreenKernel(build_clifford_rep(3))


def _fd_grad(fn, x, h=1e-4):
    out = []
    for j in range(len(x)):
        e = np.zeros(len(x))
        e[j] = h
        out.append((-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * h))
    return out


def test_dirac_kernel_unit_offset(K3):
    e1 = np.array([1.0, 0, 0])
    assert np.allclose(K3.dirac_fundamental(e1, np.zeros(3)), -K3.rep.gamma(e1) / (4 * math.pi), atol=1e-16)


@given(st.lists(coord, min_size=6, max_size=6))
def test_dirac_kernel_antisymmetric(v):
    K = GreenKernel(build_clifford_rep(3))
    x, y = np.array(v[:3]), np.array(v[3:])
    if np.linalg.norm(x - y) < 1e-3:
        return
    assert np.allclose(K.dirac_fundamental(x, y), -K.dirac_fundamental(y, x), rtol=1e-12, atol=1e-12)


def test_dirac_kernel_diagonal_raises(K3):
    with pytest.raises(SingularityError):
        K3.dirac_fundamental(np.ones(3), np.ones(3))


def test_laplace_values():
    assert laplace_fundamental(3, np.array([1.0, 0, 0]), np.zeros(3)) == pytest.approx(0.0795774715459476678844418816863, rel=1e-14)
    assert laplace_fundamental(2, np.array([0.6, 0.8]), np.zeros(2)) == 0.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dirac_kernel_is_dirac_of_laplace_kernel_and_monogenic(n):
    rep = build_clifford_rep(n)
    K = GreenKernel(rep)
    y = np.zeros(n)
    x = np.linspace(0.3, 0.7, n)
    grads = _fd_grad(lambda p: laplace_fundamental(n, p, y), x)
    composed = sum(g * gam for g, gam in zip(grads, rep.gammas))
    assert np.allclose(composed, K.dirac_fundamental(x, y), atol=1e-9)
    # D_x applied to the kernel columns vanishes away from the diagonal
    dk = _fd_grad(lambda p: K.dirac_fundamental(p, y), x)
    assert np.max(np.abs(sum(gam @ d for gam, d in zip(rep.gammas, dk)))) <= 1e-8


def test_taylor_zeroth_term(K3):
    y = np.array([0.3, -0.5, 0.8])
    assert np.allclose(K3.green_taylor_term(0, np.zeros(3), y), K3.dirac_fundamental(np.zeros(3), y), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_taylor_partial_sums_converge_geometrically(n):
    K = GreenKernel(build_clifford_rep(n))
    rng = np.random.default_rng(n)
    y = rng.standard_normal(n)
    y /= np.linalg.norm(y)
    x = rng.standard_normal(n)
    x *= 0.3 / np.linalg.norm(x)
    exact = K.dirac_fundamental(x, y)
    partial = np.zeros_like(exact)
    errs = []
    for k in range(10):
        partial = partial + K.green_taylor_term(k, x, y)
        errs.append(np.max(np.abs(partial - exact)))
    # error after K terms is O(0.3^(K+1)) up to a polynomial factor in K
    assert errs[-1] <= 50 * 0.3**10 * np.max(np.abs(exact))
    assert errs[-1] < errs[4] < errs[0]


@given(st.integers(0, 5), st.floats(0.1, 0.9))
def test_taylor_term_homogeneous_and_monogenic(k, t):
    K = GreenKernel(build_clifford_rep(3))
    y = np.array([0.2, 1.0, -0.4])
    x = np.array([0.1, -0.2, 0.15])
    a = K.green_taylor_term(k, t * x, y)
    assert np.allclose(a, t**k * K.green_taylor_term(k, x, y), rtol=1e-9, atol=1e-13)
    if k >= 1:
        d = _fd_grad(lambda p: K.green_taylor_term(k, p, y), x, h=1e-3)
        assert np.max(np.abs(sum(g @ dd for g, dd in zip(K.rep.gammas, d)))) <= 1e-7


def test_taylor_outside_convergence_raises(K3):
    with pytest.raises(DomainError):
        K3.green_taylor_term(1, np.array([1.0, 0, 0]), np.array([0.5, 0, 0]))


def test_newton_constant_at_center(K3):
    u = np.array([1.0, -0.5j])
    f = synth_field(K3.rep, GridSpec(3, 1.0, 1 / 16), "harmonic_poly", poly=HomogeneousSpinorPoly(3, 2, 0, u[None, :]))
    got = newton_represent(K3, f, np.zeros(3), 0.8, np.zeros(3))
    assert np.linalg.norm(got - u) / np.linalg.norm(u) <= 1e-3


def test_newton_degree_one(K3, rng):
    f = synth_field(K3.rep, GridSpec(3, 1.0, 1 / 16), "harmonic_poly", poly=random_dirac_harmonic(K3.rep, 1, rng))
    y = np.array([0.3 * 0.8, 0, 0])
    exact = f.evaluate(y[None])[0]
    assert np.linalg.norm(newton_represent(K3, f, np.zeros(3), 0.8, y) - exact) / np.linalg.norm(exact) <= 1e-3


def test_newton_sampled_plane_wave_converges(K3):
    y = np.array([0.2, 0.1, 0.0])
    errs = []
    for h, order, radial in ((1 / 8, 12, 16), (1 / 16, 24, 32)):
        f = synth_field(K3.rep, GridSpec(3, 1.0, h), "plane_wave", xi=[1.0, 2.0, 0.0])
        exact = f.evaluate(y[None])[0]
        got = newton_represent(K3, f.as_sampled(), np.zeros(3), 0.6, y, radial_nodes=radial, sphere_order=order)
        errs.append(np.linalg.norm(got - exact))
    assert errs[1] <= 0.5 * errs[0]


@pytest.fixture(scope="module")
def planted_setup():
    rep = build_clifford_rep(3)
    rng = np.random.default_rng(99)
    return rep, GreenKernel(rep), GridSpec(3, 1.0, 1 / 16), rng


def test_decompose_pure_p2(planted_setup):
    rep, K, grid, rng = planted_setup
    P = random_dirac_harmonic(rep, 2, rng)
    f = synth_field(rep, grid, "harmonic_poly", poly=P)
    dec = decompose(K, f, np.zeros(3), 1.5)
    assert np.linalg.norm(dec.leading().coeffs - P.coeffs) <= 1e-10
    pts = 0.25 * dec.radius * np.eye(3)
    assert np.max(np.abs(dec.Q.evaluate(pts))) <= 1e-3 * np.max(np.abs(f.evaluate(pts)))


def test_decompose_planted_p2(planted_setup):
    rep, K, grid, rng = planted_setup
    P = random_dirac_harmonic(rep, 2, rng)
    f = synth_field(rep, grid, "planted", poly=P, u=np.array([0.6, 0.8j]), power=2.5)
    dec = decompose(K, f, np.zeros(3), 1.5)
    assert np.linalg.norm(dec.leading().coeffs - P.coeffs) / np.linalg.norm(P.coeffs) <= 1e-2
    assert dec.q_exponent >= 2.3
    assert dec.degrees[-1] == 2


def test_decompose_planted_p1_half(planted_setup):
    rep, K, grid, rng = planted_setup
    P = random_dirac_harmonic(rep, 1, rng)
    f = synth_field(rep, grid, "planted", poly=P, u=np.array([1.0, 0.0]), power=1.5)
    dec = decompose(K, f, np.zeros(3), 0.5)
    assert dec.degrees == [0, 1]
    p0 = dec.polys[0]
    assert p0.coefficient_norm() <= 1e-8
    assert np.linalg.norm(dec.leading().coeffs - P.coeffs) / np.linalg.norm(P.coeffs) <= 1e-2


def test_decompose_rejects_nonvanishing_center(planted_setup):
    rep, K, grid, _ = planted_setup
    f = synth_field(rep, grid, "plane_wave", xi=[1.0, 0, 0])
    with pytest.raises(HypothesisError):
        decompose(K, f, np.zeros(3), 0.5)


def test_decompose_rejects_integer_sigma(planted_setup):
    rep, K, grid, rng = planted_setup
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, 2, rng))
    with pytest.raises(DomainError):
        decompose(K, f, np.zeros(3), 2.0)
