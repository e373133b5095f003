import math

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from spinodal import GridSpec, build_clifford_rep, synth_field
from spinodal.errors import InvalidDimensionError
from spinodal.geometry import ModelMetric
from spinodal.harmonic import HomogeneousSpinorPoly, random_dirac_harmonic
from spinodal.identities import (
    ScalarFunction,
    hardy_constant,
    hardy_radius,
    hardy_slack,
    lichnerowicz_residual,
    pohozaev_residual,
    vf_boundary_term,
)


def _radial_oracle(u_expr, n, r_val):
    """LHS and RHS of the Hardy inequality for radial u(rho), in closed form with sympy."""
    rho, r = sympy.symbols("rho r", positive=True)
    area = 2 * sympy.pi ** sympy.Rational(n, 2) / sympy.gamma(sympy.Rational(n, 2))
    u = u_expr(rho)
    ch = sympy.Rational(2, n - 2)
    lhs = area * sympy.integrate(u**2 / rho**2 * rho ** (n - 1), (rho, 0, r))
    boundary = area * r ** (n - 1) * u.subs(rho, r) ** 2
    energy = area * sympy.integrate(sympy.diff(u, rho) ** 2 * rho ** (n - 1), (rho, 0, r))
    rhs = ch / r * boundary + ch**2 * energy
    return float(lhs.subs(r, r_val)), float(rhs.subs(r, r_val))


def test_hardy_constant():
    assert hardy_constant(3) == 2.0 and hardy_constant(4) == 1.0
    with pytest.raises(InvalidDimensionError):
        hardy_constant(2)


@pytest.mark.parametrize("c", [1.0, 2.5])
def test_hardy_constant_function(c):
    u = ScalarFunction(lambda p: np.full(len(p), c), lambda p: np.zeros_like(p))
    rep = hardy_slack(u, ModelMetric.flat(3), 0.3)
    lhs, rhs = _radial_oracle(lambda rho: c + 0 * rho, 3, 0.3)
    assert rep.lhs == pytest.approx(lhs, rel=1e-10) == pytest.approx(c * c * 4 * math.pi * 0.3, rel=1e-10)
    assert rep.rhs == pytest.approx(rhs, rel=1e-10)
    assert rep.slack == pytest.approx(c * c * 4 * math.pi * 0.3, rel=1e-10)


def test_hardy_radial_norm():
    u = ScalarFunction(lambda p: np.linalg.norm(p, axis=1), lambda p: p / np.linalg.norm(p, axis=1)[:, None])
    rep = hardy_slack(u, ModelMetric.flat(3), 0.3)
    lhs, rhs = _radial_oracle(lambda rho: rho, 3, 0.3)
    assert rep.lhs == pytest.approx(lhs, rel=1e-10) == pytest.approx(4 * math.pi / 3 * 0.027, rel=1e-10)
    assert rep.rhs == pytest.approx(rhs, rel=1e-10) == pytest.approx(8 * math.pi * 0.027 + 4 * 4 * math.pi / 3 * 0.027, rel=1e-10)


def test_hardy_spinor_constant_matches_scalar():
    rep3 = build_clifford_rep(3)
    u = np.array([0.6, 0.8j])
    f = synth_field(rep3, GridSpec(3, 1.0, 0.125), "harmonic_poly", poly=HomogeneousSpinorPoly(3, 2, 0, u[None, :]))
    s = hardy_slack(f, ModelMetric.flat(3), 0.3)
    assert s.slack == pytest.approx(4 * math.pi * 0.3, rel=1e-10)


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
def test_hardy_holds_on_random_fields(seed, n):
    rep = build_clifford_rep(n)
    f = synth_field(rep, GridSpec(n, 1.0, 0.125), "custom", generator="random_smooth", seed=seed)
    metric = ModelMetric.flat(n)
    assert hardy_slack(f, metric, hardy_radius(metric, 1.0)).slack >= -1e-10


def test_hardy_on_round_sphere():
    rep = build_clifford_rep(3)
    metric = ModelMetric.sphere(3, 4.0)
    r = hardy_radius(metric, 1.0)
    assert r <= metric.r_coord
    for seed in range(5):
        f = synth_field(rep, GridSpec(3, 1.0, 0.125), "custom", generator="random_smooth", seed=seed)
        assert hardy_slack(f, metric, r).slack >= -1e-10


def test_pohozaev_constant_exact():
    rep = build_clifford_rep(3)
    f = synth_field(rep, GridSpec(3, 1.0, 0.125), "harmonic_poly", poly=HomogeneousSpinorPoly(3, 2, 0, np.array([[1.0, 2j]])))
    r = pohozaev_residual(f, 0.5)
    assert r.lhs == 0.0 and r.rhs == 0.0


def test_pohozaev_degree_one():
    rep = build_clifford_rep(3)
    f = synth_field(rep, GridSpec(3, 1.0, 0.125), "harmonic_poly", poly=random_dirac_harmonic(rep, 1, np.random.default_rng(2)))
    r = pohozaev_residual(f, 0.5)
    assert r.rhs == 0.0
    assert r.slack <= 1e-8


def test_pohozaev_plane_wave_converges():
    rep = build_clifford_rep(3)
    res = [
        pohozaev_residual(synth_field(rep, GridSpec(3, 1.0, h), "plane_wave", xi=[3.0, 4.0, 0.0]), 0.5, method="grid").slack
        for h in (1 / 8, 1 / 16)
    ]
    assert res[1] <= 0.5 * res[0]
    analytic = pohozaev_residual(synth_field(rep, GridSpec(3, 1.0, 1 / 8), "plane_wave", xi=[3.0, 4.0, 0.0]), 0.5)
    assert analytic.slack <= 1e-10 * max(1.0, abs(analytic.lhs))


def test_lichnerowicz_quadratic_exact():
    rep = build_clifford_rep(3)
    u = np.array([1.0, 0.5j])
    f = synth_field(rep, GridSpec(3, 1.0, 0.125), "custom", value=lambda p: np.sum(p**2, axis=1)[:, None] * u[None, :])
    assert lichnerowicz_residual(f).slack <= 1e-10


def test_lichnerowicz_plane_wave_eigen_residual():
    rep = build_clifford_rep(3)
    vals = []
    for h in (1 / 8, 1 / 16):
        r = lichnerowicz_residual(synth_field(rep, GridSpec(3, 1.0, h), "plane_wave", xi=[2.4, 3.2, 0.0]))
        vals.append(r.meta["eigen_residual"])
    assert math.log2(vals[0] / vals[1]) == pytest.approx(4.0, abs=0.3)


def test_lichnerowicz_random_smooth_ratio():
    rep = build_clifford_rep(3)
    vals = [
        lichnerowicz_residual(synth_field(rep, GridSpec(3, 1.0, h), "custom", generator="random_smooth", seed=11)).slack
        for h in (1 / 16, 1 / 32)
    ]
    assert math.log2(vals[0] / vals[1]) == pytest.approx(4.0, abs=0.5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_vf_cancellation(n):
    rep = build_clifford_rep(n)
    xi = np.zeros(n)
    xi[0], xi[-1] = 2.0, -1.5
    f = synth_field(rep, GridSpec(n, 1.0, 0.125), "plane_wave", xi=xi, sign=-1)
    assert vf_boundary_term(f, 0.4, np.full(n, 0.05)).slack <= 1e-8


def test_vf_term_nonzero_for_generic_field():
    rep = build_clifford_rep(3)
    f = synth_field(rep, GridSpec(3, 1.0, 0.125), "custom", generator="random_smooth", seed=3)
    assert vf_boundary_term(f, 0.4).slack > 1e-6
