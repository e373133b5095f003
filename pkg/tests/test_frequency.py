import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinodal import GridSpec, build_clifford_rep, synth_field
from spinodal.errors import DegenerateFieldError, NoLimitError
from spinodal.frequency import (
    FrequencyProfile,
    almost_positivity,
    boundary_flux,
    boundary_height,
    doubling_check,
    dyadic_radii,
    frequency_profile,
    h_prime_residual,
    monotonicity_audit,
    uniform_order_scan,
    vanishing_order,
)
from spinodal.geometry import ModelMetric
from spinodal.harmonic import HomogeneousSpinorPoly, random_dirac_harmonic
from spinodal.quadrature import ball_rule


@pytest.fixture(scope="module")
def rep():
    return build_clifford_rep(3)


@pytest.fixture(scope="module")
def grid():
    return GridSpec(3, 1.0, 1 / 16)


def _const(rep, grid, u):
    return synth_field(rep, grid, "harmonic_poly", poly=HomogeneousSpinorPoly(3, 2, 0, np.asarray(u)[None, :]))


def _planted(rep, grid, k=2, power=3.0, seed=5):
    P = random_dirac_harmonic(rep, k, np.random.default_rng(seed))
    return synth_field(rep, grid, "planted", poly=P, u=np.array([0.6, 0.8j]), power=power)


def test_height_of_constant(rep, grid):
    f = _const(rep, grid, [1.0, 1j])
    for r in (0.1, 0.4):
        assert boundary_height(f, None, np.zeros(3), r) == pytest.approx(2.0 * 4 * math.pi * r * r, rel=1e-12)
        assert boundary_flux(f, None, np.zeros(3), r) == 0.0


def test_height_on_round_sphere(rep, grid):
    # geodesic spheres of the unit 3-sphere have area 4 pi sin^2 r
    f = _const(rep, grid, [1.0, 0.0])
    m = ModelMetric.sphere(3)
    assert boundary_height(f, m, np.zeros(3), 0.3) == pytest.approx(4 * math.pi * math.sin(0.3) ** 2, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_homogeneous_scaling_and_euler(rep, grid, k):
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, k, np.random.default_rng(k)))
    radii = dyadic_radii(0.4, 5)
    H = np.array([boundary_height(f, None, np.zeros(3), r) for r in radii])
    slope = np.polyfit(np.log(radii), np.log(H), 1)[0]
    assert slope == pytest.approx(2 + 2 * k, abs=1e-9)
    for r, h in zip(radii, H):
        assert boundary_flux(f, None, np.zeros(3), r) == pytest.approx(k / r * h, rel=1e-10)


def test_height_nondecreasing_on_manufactured(rep, grid):
    radii = np.linspace(0.02, 0.3, 12)
    for f in (_planted(rep, grid), synth_field(rep, grid, "dirac_bubble", u=np.array([1.0, 0]))):
        H = [boundary_height(f, None, np.zeros(3), r) for r in radii]
        assert np.all(np.diff(H) > 0)


@pytest.mark.parametrize("kind", ["plane_wave", "planted"])
def test_gauss_green_consistency(rep, grid, kind):
    f = synth_field(rep, grid, "plane_wave", xi=[1.0, 2.0, 0.5]) if kind == "plane_wave" else _planted(rep, grid, power=4.0)
    r = 0.4
    pts, w = ball_rule(3, r, radial_nodes=24)
    grad2 = np.sum(np.abs(f.jacobian(pts)) ** 2, axis=(1, 2))
    pair = np.real(np.sum(f.laplacian(pts) * np.conj(f.evaluate(pts)), axis=1))
    volume = np.sum(w * (grad2 + pair))
    assert boundary_flux(f, None, np.zeros(3), r) == pytest.approx(volume, rel=1e-8)


def test_degree3_frequency_constant(rep, grid):
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, 3, np.random.default_rng(0)))
    prof = frequency_profile(f, None, np.zeros(3), [0.1, 0.2, 0.3, 0.4, 0.5])
    assert np.max(np.abs(prof.N - 3)) <= 1e-6


def test_planted_frequency_limit(rep, grid):
    prof = frequency_profile(_planted(rep, grid), None, np.zeros(3), dyadic_radii(0.3, 8))
    assert np.all(np.diff(prof.N) > 0)  # N decreases toward the limit as r -> 0
    est = vanishing_order(prof)
    assert est.value == pytest.approx(2.0, abs=1e-2)
    assert est.snapped == 2


def test_nonvanishing_point_has_order_zero(rep, grid):
    f = synth_field(rep, grid, "plane_wave", xi=[3.0, 4.0, 0.0])
    prof = frequency_profile(f, None, np.array([0.2, 0.1, 0.0]), dyadic_radii(0.3, 8))
    est = vanishing_order(prof)
    assert est.value == pytest.approx(0.0, abs=0.02)
    assert est.snapped == 0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_vanishing_order_exact(rep, grid, k):
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, k, np.random.default_rng(10 + k)))
    est = frequency_profile(f, None, np.zeros(3), dyadic_radii(0.4, 6)).order_estimate
    assert est.snapped == k


def test_vanishing_order_detects_oscillation():
    r = dyadic_radii(0.4, 6)
    N = np.array([1.0, 1.5, 1.0, 1.5, 1.0, 1.5])
    prof = FrequencyProfile(np.zeros(3), r, np.ones(6), np.ones(6), N, ModelMetric.flat(3))
    with pytest.raises(NoLimitError):
        vanishing_order(prof)


def test_vanishing_order_needs_geometric_radii():
    r = np.array([0.1, 0.2, 0.25, 0.4])
    prof = FrequencyProfile(np.zeros(3), r, np.ones(4), np.ones(4), np.ones(4), ModelMetric.flat(3))
    with pytest.raises(ValueError):
        vanishing_order(prof)


def test_zero_field_near_center_is_degenerate(rep, grid):
    f = synth_field(rep, grid, "custom", value=lambda p: np.where(np.linalg.norm(p, axis=1)[:, None] < 0.5, 0.0, 1.0) * np.ones((1, 2)))
    with pytest.raises(DegenerateFieldError):
        frequency_profile(f, None, np.zeros(3), dyadic_radii(0.2, 4))


@given(st.floats(0.01, 100.0), st.integers(0, 20))
def test_frequency_scale_invariant(c, seed):
    rep = build_clifford_rep(3)
    f = synth_field(rep, GridSpec(3, 1.0, 0.125), "custom", generator="random_smooth", seed=seed)
    radii = dyadic_radii(0.3, 4)
    a = frequency_profile(f, None, np.zeros(3), radii).N
    b = frequency_profile(f.scaled(c), None, np.zeros(3), radii).N
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_audit_harmonic_and_plane_wave(rep, grid):
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, 2, np.random.default_rng(3)))
    audit = monotonicity_audit(frequency_profile(f, None, np.zeros(3), dyadic_radii(0.3, 8)))
    assert audit.C_AM_fit == 0.0 and audit.passed
    pw = synth_field(rep, grid, "plane_wave", xi=[3.0, 4.0, 0.0])
    audit = monotonicity_audit(frequency_profile(pw, None, np.array([0.2, 0.1, 0.0]), dyadic_radii(0.3, 8)))
    assert audit.passed and audit.C_AM_fit <= 1e3
    assert set(audit.to_dict()) == {"beta", "C_N", "C_AM_fit", "violations"}


def test_audit_reports_on_random_field(rep, grid):
    f = synth_field(rep, grid, "custom", generator="random_smooth", seed=4)
    audit = monotonicity_audit(frequency_profile(f, None, np.zeros(3), dyadic_radii(0.3, 8)))
    assert audit.C_AM_fit is None or audit.C_AM_fit >= 0.0


def test_audit_rejects_bad_constants(rep, grid):
    prof = frequency_profile(_planted(rep, grid), None, np.zeros(3), dyadic_radii(0.3, 4))
    with pytest.raises(ValueError):
        monotonicity_audit(prof, beta=1.5)
    with pytest.raises(ValueError):
        monotonicity_audit(prof, C_N=0.0)


def test_doubling(rep, grid):
    f = synth_field(rep, grid, "harmonic_poly", poly=random_dirac_harmonic(rep, 2, np.random.default_rng(8)))
    prof = frequency_profile(f, None, np.zeros(3), dyadic_radii(0.4, 5))
    r = prof.radii
    assert abs(doubling_check(prof, r[0], r[3])) <= 1e-9
    assert doubling_check(prof, r[2], r[2]) == 0.0
    planted = frequency_profile(_planted(rep, grid), None, np.zeros(3), dyadic_radii(0.3, 6))
    assert doubling_check(planted, planted.radii[0], planted.radii[-1]) <= 1e-6


def test_almost_positivity(rep, grid):
    prof = frequency_profile(_planted(rep, grid), None, np.zeros(3), dyadic_radii(0.3, 6))
    assert np.all(almost_positivity(prof) > 0)


@pytest.mark.parametrize("metric", [None, ModelMetric.sphere(3), ModelMetric.hyperbolic(3)])
def test_h_prime_identity(rep, grid, metric):
    assert h_prime_residual(_planted(rep, grid), metric, np.zeros(3), 0.2) <= 1e-8


def test_uniform_scan_degree_one():
    rep = build_clifford_rep(3)
    P = HomogeneousSpinorPoly.from_terms(3, 2, 1, {(0, (1, 0, 0)): 1.0, (0, (0, 1, 0)): 1j})
    f = synth_field(rep, GridSpec(3, 1.0, 1 / 16), "harmonic_poly", poly=P)
    on_axis = np.array([[0, 0, t] for t in (-0.2, 0.0, 0.2)])
    off_axis = np.array([[0.2, 0.0, 0.0], [0.1, -0.1, 0.1]])
    scan = uniform_order_scan(f, None, np.vstack([on_axis, off_axis]), 0.2)
    assert [o.snapped for o in scan.orders] == [1, 1, 1, 0, 0]
    assert scan.max_order == 1


def test_uniform_scan_planted_and_constant():
    rep = build_clifford_rep(2)
    grid = GridSpec(2, 1.0, 1 / 32)
    P = HomogeneousSpinorPoly.from_terms(2, 2, 2, {(0, (2, 0)): 1.0, (0, (1, 1)): 2j, (0, (0, 2)): -1.0})
    f = synth_field(rep, grid, "planted", poly=P, u=np.array([0.6, 0.8]), power=3.0, scale=0.5)
    centers = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, -0.15]])
    scan = uniform_order_scan(f, None, centers, 0.2)
    assert scan.max_order == 2 and scan.orders[0].snapped == 2
    c = synth_field(rep, grid, "harmonic_poly", poly=HomogeneousSpinorPoly(2, 2, 0, np.array([[1.0, 0]])))
    assert uniform_order_scan(c, None, centers, 0.2).max_order == 0


def test_threads_give_identical_results(rep, grid, monkeypatch):
    f = _planted(rep, grid)
    radii = dyadic_radii(0.3, 6)
    a = frequency_profile(f, None, np.zeros(3), radii)
    monkeypatch.setenv("SPINODAL_THREADS", "4")
    b = frequency_profile(f, None, np.zeros(3), radii)
    assert np.array_equal(a.N, b.N) and np.array_equal(a.H, b.H)
