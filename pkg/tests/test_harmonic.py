import json
import math

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from spinodal import GridSpec, build_clifford_rep, synth_field
from spinodal.errors import DegenerateFieldError, InvalidDimensionError, WrongOrderError
from spinodal.harmonic import (
    HomogeneousSpinorPoly,
    dirac_harmonic_basis,
    eval_monomials,
    fit_leading_term,
    harmonic_basis,
    harmonic_dimension,
    monomial_exponents,
    random_dirac_harmonic,
)


def _dim_oracle(n, k):
    # homogeneous degree-k polynomials minus the image of |x|^2 times degree k-2
    return math.comb(n + k - 1, k) - (math.comb(n + k - 3, k - 2) if k >= 2 else 0)


@pytest.mark.parametrize("n, k, dim", [(2, 3, 2), (3, 2, 5), (2, 0, 1), (3, 0, 1), (4, 0, 1), (4, 3, 16)])
def test_harmonic_dimensions(n, k, dim):
    assert harmonic_dimension(n, k) == dim == _dim_oracle(n, k)
    assert harmonic_basis(n, k).shape[0] == dim


def test_n2_k3_basis_spans_re_im_z_cubed():
    basis = harmonic_basis(2, 3)
    x, y = sympy.symbols("x y")
    target = sympy.Poly(sympy.expand((x + sympy.I * y) ** 3), x, y)
    exps = monomial_exponents(2, 3)
    vec = np.array([complex(target.coeff_monomial(x ** int(e[0]) * y ** int(e[1]))) for e in exps])
    coef, *_ = np.linalg.lstsq(basis.T.astype(complex), vec, rcond=None)
    assert np.allclose(basis.T @ coef, vec, atol=1e-12)


@given(st.integers(2, 4), st.integers(0, 4))
def test_basis_is_harmonic_and_orthonormal(n, k):
    b = harmonic_basis(n, k)
    rng = np.random.default_rng(n * 10 + k)
    pts = rng.standard_normal((5, n))
    h = 1e-3
    # five-point Laplacian of each basis function as an independent check
    lap = np.zeros((5, b.shape[0]))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        f = lambda p: eval_monomials(n, k, p) @ b.T  # noqa: E731
        lap += (-f(pts + 2 * e) + 16 * f(pts + e) - 30 * f(pts) + 16 * f(pts - e) - f(pts - 2 * e)) / (12 * h * h)
    scale = np.max(np.abs(eval_monomials(n, k, pts) @ b.T)) + 1
    assert np.max(np.abs(lap)) <= 1e-5 * scale
    assert np.allclose(b @ b.T, np.eye(b.shape[0]), atol=1e-10)


def test_harmonic_basis_rejects_bad_dimension():
    with pytest.raises(InvalidDimensionError):
        harmonic_basis(1, 2)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_dirac_harmonic_dimension(n, k):
    # monogenic dimension: N times the count of degree-k monomials in n - 1 variables
    rep = build_clifford_rep(n)
    basis = dirac_harmonic_basis(rep, k)
    assert len(basis) == rep.fiber_dim * math.comb(n - 2 + k, k)
    for p in basis:
        assert p.dirac_residual(rep) <= 1e-10


@given(st.integers(2, 4), st.integers(0, 3), st.floats(0.1, 3.0), st.integers(0, 100))
def test_homogeneity(n, k, t, seed):
    rep = build_clifford_rep(n)
    rng = np.random.default_rng(seed)
    p = random_dirac_harmonic(rep, k, rng)
    x = rng.standard_normal((4, n))
    assert np.allclose(p.evaluate(t * x), t**k * p.evaluate(x), rtol=1e-10, atol=1e-12)


@given(st.integers(2, 4), st.integers(0, 3), st.integers(0, 100))
def test_json_round_trip(n, k, seed):
    rep = build_clifford_rep(n)
    p = random_dirac_harmonic(rep, k, np.random.default_rng(seed))
    q = HomogeneousSpinorPoly.from_json(p.to_json())
    assert np.array_equal(p.coeffs, q.coeffs)
    assert json.loads(p.to_json())["k"] == k


def test_translation_invariance_examples():
    pair = HomogeneousSpinorPoly.from_terms(3, 2, 1, {(0, (1, 0, 0)): 1.0, (1, (0, 1, 0)): 1.0})
    assert pair.translation_invariance_dim() == 1
    const = HomogeneousSpinorPoly.from_terms(3, 2, 0, {(0, (0, 0, 0)): 1.0})
    assert const.translation_invariance_dim() == 3


def test_fit_recovers_pure_p2(rep3, grid3, rng):
    P = random_dirac_harmonic(rep3, 2, rng)
    f = synth_field(rep3, grid3, "harmonic_poly", poly=P)
    fit = fit_leading_term(f, np.zeros(3), 2)
    assert np.linalg.norm(fit.coeffs - P.coeffs) / np.linalg.norm(P.coeffs) <= 1e-10


def test_fit_planted_p2(rep3, grid3, rng):
    P = random_dirac_harmonic(rep3, 2, rng)
    u = np.array([1.0, 1j]) / math.sqrt(2)
    f = synth_field(rep3, grid3, "planted", poly=P, u=u, power=3.0)
    fit = fit_leading_term(f, np.zeros(3), 2, fit_radius=0.1)
    assert np.linalg.norm(fit.coeffs - P.coeffs) / np.linalg.norm(P.coeffs) <= 1e-2


def test_fit_pure_q_has_small_degree2_part(rep3, grid3):
    u = np.array([1.0, 0.0])
    f = synth_field(rep3, grid3, "custom", value=lambda p: np.sum(p**2, axis=1)[:, None] ** 1.5 * u[None, :])
    fit = fit_leading_term(f, np.zeros(3), 2, fit_radius=0.1)
    # sup of |x|^3 on the fit sphere is 1e-3
    from spinodal.quadrature import sphere_rule

    s, _ = sphere_rule(3)
    assert np.max(np.abs(fit.evaluate(0.1 * s))) <= 1e-3 * 1e-3


def test_fit_wrong_order_and_zero(rep3, grid3, rng):
    P = random_dirac_harmonic(rep3, 1, rng)
    f = synth_field(rep3, grid3, "harmonic_poly", poly=P)
    with pytest.raises(WrongOrderError):
        fit_leading_term(f, np.zeros(3), 3)
    z = synth_field(rep3, grid3, "custom", value=lambda p: np.where(np.linalg.norm(p, axis=1)[:, None] < 0.5, 0.0, 1.0) * np.ones((1, 2)))
    with pytest.raises(DegenerateFieldError):
        fit_leading_term(z, np.zeros(3), 1)
