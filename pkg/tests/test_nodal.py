import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinodal import GridSpec, build_clifford_rep, synth_field
from spinodal.errors import EstimatorError
from spinodal.harmonic import HomogeneousSpinorPoly
from spinodal.nodal import (
    Z1,
    Z2,
    blowup,
    box_dimension,
    classify_point,
    classify_set,
    covering_iteration,
    cube_count_bound,
    cusp_cone_audit,
    extract_nodal,
    gradient_rank,
    normalized_poly_distance,
    plane_cube_cover,
    sphere_mean_square,
)
from spinodal.fields import polynomial_field
from spinodal.verification import coordinate_pair, symbolic_invariance_dim, z_power


@pytest.fixture(scope="module")
def rep3():
    return build_clifford_rep(3)


@pytest.fixture(scope="module")
def axis_field(rep3):
    return polynomial_field(rep3, GridSpec(3, 1.0, 1 / 16), coordinate_pair(3))


@pytest.fixture(scope="module")
def planted2d():
    rep = build_clifford_rep(2)
    return synth_field(rep, GridSpec(2, 1.0, 1 / 32), "planted", poly=z_power(2, 2), u=np.array([0.6, 0.8]), power=3.0, scale=0.5)


def test_plane_wave_and_constant_have_no_zeros(rep3):
    grid = GridSpec(3, 1.0, 1 / 8)
    assert len(extract_nodal(synth_field(rep3, grid, "plane_wave", xi=[3.0, 4.0, 0.0]))) == 0
    const = synth_field(rep3, grid, "harmonic_poly", poly=HomogeneousSpinorPoly(3, 2, 0, np.array([[1.0, 0.0]])))
    assert len(extract_nodal(const)) == 0


def test_axis_samples_lie_on_axis(axis_field):
    ns = extract_nodal(axis_field)
    h = axis_field.grid.h
    assert len(ns) > 100
    assert np.max(np.linalg.norm(ns.points[:, :2], axis=1)) <= h / 4
    # samples cover the admissible part of the axis
    assert np.ptp(ns.points[:, 2]) >= 2 * (1.0 - 4 * h)
    order = np.lexsort(ns.points.T[::-1])
    assert np.array_equal(order, np.arange(len(ns)))


def test_classify_axis_origin(axis_field):
    lab = classify_point(axis_field, np.zeros(3))
    assert (lab.k, lab.stratum, lab.gradient_rank, lab.blowup_dim) == (1, Z1, 2, 1)


def test_classify_z_squared_pair(rep3):
    f = polynomial_field(rep3, GridSpec(3, 1.0, 1 / 16), z_power(3, 2, pair=True))
    lab = classify_point(f, np.zeros(3))
    assert (lab.k, lab.stratum, lab.blowup_dim) == (2, Z2, 1)
    assert symbolic_invariance_dim(z_power(3, 2, pair=True)) == 1


def test_classify_planted_isolated(planted2d):
    lab = classify_point(planted2d, np.zeros(2))
    assert (lab.k, lab.stratum, lab.blowup_dim) == (2, Z2, 0)
    ns = extract_nodal(planted2d)
    assert len(ns) == 1 and np.linalg.norm(ns.points[0]) <= 1e-8


def test_classify_set_labels_every_point(axis_field):
    ns = extract_nodal(axis_field)
    sub = classify_set(axis_field, ns, [0, len(ns) // 2])
    assert len(sub.labels) == 2
    assert sub.strata()[Z1] == 2


def test_gradient_rank_of_nonvanishing_field(rep3):
    f = synth_field(rep3, GridSpec(3, 1.0, 1 / 8), "plane_wave", xi=[1.0, 0, 0])
    assert gradient_rank(f, np.zeros(3)) == 1


def test_symbolic_oracle_agrees_with_numeric():
    for poly in (coordinate_pair(3), coordinate_pair(4), z_power(3, 3), z_power(2, 2), z_power(3, 2, pair=True)):
        assert poly.translation_invariance_dim() == symbolic_invariance_dim(poly)


def test_blowup_of_homogeneous_is_its_normalization(rep3):
    P = z_power(3, 2)
    f = synth_field(rep3, GridSpec(3, 1.0, 1 / 16), "harmonic_poly", poly=P)
    for r in (0.2, 0.1):
        b = blowup(f, np.zeros(3), r)
        assert normalized_poly_distance(b, P) <= 1e-12
        assert sphere_mean_square(b.evaluate, np.zeros(3), 1.0, 3) == pytest.approx(1.0, rel=1e-12)


def test_blowup_of_planted_converges(rep3):
    P = z_power(3, 2)
    f = synth_field(rep3, GridSpec(3, 1.0, 1 / 16), "planted", poly=P, u=np.array([0.6, 0.8j]), power=3.0, scale=0.02)
    d = [normalized_poly_distance(blowup(f, np.zeros(3), r), P) for r in (0.2, 0.1, 0.05)]
    assert d[0] > d[1] > d[2]
    assert d[2] <= 5e-2
    # the perturbation is one degree above P, so the distance is O(r)
    assert np.log2(d[1] / d[2]) == pytest.approx(1.0, abs=0.05)


def test_box_dimension_line_and_points():
    t = np.linspace(-0.5, 0.5, 400)
    line = np.stack([np.zeros_like(t), np.zeros_like(t), t], axis=1)
    assert box_dimension(line).dimension == pytest.approx(1.0, abs=0.15)
    rng = np.random.default_rng(0)
    centers = np.array([[0.0, 0.0], [0.5, 0.1], [-0.3, 0.4], [0.2, -0.6]])
    pts = np.repeat(centers, 30, axis=0) + 1e-9 * rng.standard_normal((120, 2))
    assert box_dimension(pts).dimension == pytest.approx(0.0, abs=0.15)


def test_box_dimension_of_extracted_z_squared(rep3):
    f = synth_field(rep3, GridSpec(3, 1.0, 1 / 16), "harmonic_poly", poly=z_power(3, 2))
    assert box_dimension(extract_nodal(f).points).dimension <= 1.15


def test_box_dimension_needs_samples():
    with pytest.raises(EstimatorError):
        box_dimension(np.zeros((10, 3)))
    with pytest.raises(EstimatorError):
        box_dimension(np.random.default_rng(0).random((200, 3)), scales=[0.5, 0.25])


@given(st.floats(0.1, 10.0), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_box_dimension_similarity_invariant(scale, shift):
    t = np.linspace(0, 1, 300)
    curve = np.stack([t, t**2, 0 * t], axis=1)
    a = box_dimension(curve).dimension
    b = box_dimension(scale * curve + np.array(shift)).dimension
    assert a == pytest.approx(b, abs=1e-9)


def test_cusp_audit_axis_and_perturbed():
    t = np.concatenate([-np.geomspace(1e-3, 0.5, 40), np.geomspace(1e-3, 0.5, 40)])
    axis = np.stack([0 * t, 0 * t, t], axis=1)
    a = cusp_cone_audit(axis, np.zeros(3), 1)
    assert a.C_fit <= 1e-12 and not a.violations
    bent = np.stack([np.abs(t) ** 1.6, 0 * t, t], axis=1)
    b = cusp_cone_audit(bent, np.zeros(3), 1)
    assert b.C_fit is not None and math.isfinite(b.C_fit) and not b.violations


def test_cusp_audit_half_plane_negative_control():
    s = np.geomspace(1e-9, 0.5, 30)
    a, b = np.meshgrid(s, np.linspace(-0.5, 0.5, 21))
    half_plane = np.stack([a.ravel(), b.ravel(), np.zeros(a.size)], axis=1)
    res = cusp_cone_audit(half_plane, np.zeros(3), 1)
    assert res.violations


def test_cusp_audit_skips_small_sets():
    assert cusp_cone_audit(np.ones((5, 3)), np.zeros(3), 1).skipped


def test_plane_cube_cover_instance():
    assert cube_count_bound(3, 0.25) == pytest.approx((math.sqrt(3) + 1) / 0.5)
    # segment along the main diagonal of the unit cube, cubes of side 0.5
    count = plane_cube_cover(3, 0.25, np.zeros(3), np.ones((3, 1)))
    assert count <= 4 <= cube_count_bound(3, 0.25)


def _closed_form_log2(n, eps, gamma, steps):
    """Summing the recursion: log2 premeasure_k = -gamma m_k + (n-2)(k (log2(sqrt(n)+1) - 1) - 1)."""
    c = math.log2(math.sqrt(n) + 1)
    k = np.arange(steps + 1)
    return -gamma * (1 + eps) ** k + (n - 2) * (k * (c - 1) - 1)


def test_covering_gamma_positive_vanishes():
    steps = covering_iteration(3, 0.5, 0.1, 25)
    oracle = _closed_form_log2(3, 0.5, 0.1, 25)
    assert [s.log2_premeasure for s in steps] == pytest.approx(oracle, rel=1e-9, abs=1e-9)
    assert steps[-1].premeasure < 1e-6
    tail = [s.log2_premeasure for s in steps[10:]]
    assert np.all(np.diff(tail) < 0)


def test_covering_gamma_zero_grows_linearly():
    # with gamma = 0 the doubly exponential parts cancel and each step
    # multiplies the premeasure by ((sqrt(n) + 1) / 2)^(n - 2)
    steps = covering_iteration(3, 0.5, 0.0, 25)
    oracle = _closed_form_log2(3, 0.5, 0.0, 25)
    assert [s.log2_premeasure for s in steps] == pytest.approx(oracle, rel=1e-9, abs=1e-9)
    rate = np.diff([s.log2_premeasure for s in steps])
    assert np.allclose(rate, math.log2((math.sqrt(3) + 1) / 2), atol=1e-9)


def test_covering_rejects_bad_parameters():
    with pytest.raises(ValueError):
        covering_iteration(2, 0.5, 0.1, 5)
    with pytest.raises(ValueError):
        covering_iteration(3, 1.5, 0.1, 5)
