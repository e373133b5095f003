"""Nodal sets of spinor fields: extraction, stratification and dimension.

Extraction flags grid nodes with ``|psi| < c0 h (|grad psi| + h)``,
bisects the surrounding cells three times with the same rule at the
child scale, and polishes the surviving centres by Gauss-Newton on the
2N real equations ``Re psi = Im psi = 0`` (minimum-norm steps, so points
move orthogonally to the zero set).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from spinodal.errors import (
    DegenerateFieldError,
    EstimatorError,
    GeometryError,
    NoLimitError,
    WrongOrderError,
)
from spinodal.fields import Analytic, GridSpec, SpinorField, stencil_gradient
from spinodal.frequency import dyadic_radii, frequency_profile, parallel_map, vanishing_order
from spinodal.harmonic import HomogeneousSpinorPoly, fit_leading_term, loglog_slope
from spinodal.quadrature import ball_rule, pairwise_sum, sphere_rule

Z1 = "Z1"
Z2 = "Z>=2"
UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class PointLabel:
    order: float | None
    k: int | None
    stratum: str
    gradient_rank: int
    blowup_dim: int | None
    uncertainty: float | None = None


@dataclass(frozen=True, eq=False)
class StratifiedNodalSet:
    points: np.ndarray  # (P, n)
    abs_psi: np.ndarray
    abs_grad: np.ndarray
    labels: list | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def with_labels(self, labels: list) -> "StratifiedNodalSet":
        return StratifiedNodalSet(self.points, self.abs_psi, self.abs_grad, list(labels), dict(self.meta))

    def strata(self) -> dict:
        """Counts per stratum and per (k, l) pair."""
        out: dict = {}
        for lab in self.labels or []:
            out[lab.stratum] = out.get(lab.stratum, 0) + 1
            key = f"Z_{lab.k}^{lab.blowup_dim}"
            out[key] = out.get(key, 0) + 1
        return out


# ---------------------------------------------------------------------------
# extraction


def _node_gradient_norm(f: SpinorField) -> np.ndarray:
    if f.has_analytic and f.analytic.jacobian is not None:
        pts = f.grid.points().reshape(-1, f.n)
        jac = f.jacobian(pts)
        return np.sqrt(np.sum(np.abs(jac) ** 2, axis=(1, 2))).reshape(f.grid.shape)
    g = stencil_gradient(f)
    return np.sqrt(np.sum(np.abs(g) ** 2, axis=(-2, -1)))


def _flag(absv, absg, size, c0):
    return absv < c0 * size * (absg + size)


def _gauss_newton(f: SpinorField, x: np.ndarray, max_step: float, iters: int) -> np.ndarray:
    """Vectorised Gauss-Newton on F = (Re psi, Im psi) with min-norm steps."""
    x = x.copy()
    for _ in range(iters):
        v = f.evaluate(x)
        jac = f.jacobian(x)  # (P, n, N)
        F = np.concatenate([v.real, v.imag], axis=1)  # (P, 2N)
        J = np.concatenate([jac.real, jac.imag], axis=2).transpose(0, 2, 1)  # (P, 2N, n)
        step = np.einsum("pij,pj->pi", np.linalg.pinv(J, rcond=1e-10), F)
        norm = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
        x -= step * scale[:, None]
    return x


def extract_nodal(
    f: SpinorField,
    c0: float = 1.0,
    levels: int = 3,
    region_radius: float | None = None,
    polish_iters: int = 60,
    zero_tol: float = 1e-9,
) -> StratifiedNodalSet:
    """Approximate zero set of ``f`` inside B_region_radius(0)."""
    g = f.grid
    h = g.h
    n = f.n
    if region_radius is None:
        region_radius = g.radius - 3 * h
    absv = np.linalg.norm(f.values, axis=-1)
    absg = _node_gradient_norm(f)
    pts = g.points()
    inside = np.sum(pts**2, axis=-1) <= region_radius**2
    flagged = inside & _flag(absv, absg, h, c0) & np.isfinite(absv) & np.isfinite(absg)
    centers = pts[flagged].reshape(-1, n)
    size = h
    corners = np.array(list(itertools.product((-0.25, 0.25), repeat=n)))
    for _ in range(levels):
        if not len(centers):
            break
        size = size / 2
        kids = (centers[:, None, :] + corners[None, :, :] * 2 * size).reshape(-1, n)
        kids = kids[np.sum(kids**2, axis=1) <= (region_radius + size) ** 2]
        v = np.linalg.norm(f.evaluate(kids), axis=1)
        jg = np.sqrt(np.sum(np.abs(f.jacobian(kids)) ** 2, axis=(1, 2)))
        centers = kids[_flag(v, jg, size, c0)]
    scale = max(f.sup_norm(), 1e-300)
    if len(centers):
        polished = _gauss_newton(f, centers, max_step=h, iters=polish_iters)
        vals = np.linalg.norm(f.evaluate(polished), axis=1)
        ok = (vals <= zero_tol * scale) & (np.sum(polished**2, axis=1) <= region_radius**2)
        polished = polished[ok]
    else:
        polished = np.zeros((0, n))
    polished = _dedupe(polished, h / 16)
    if len(polished):
        order = np.lexsort(polished.T[::-1])
        polished = polished[order]
        absp = np.linalg.norm(f.evaluate(polished), axis=1)
        absgp = np.sqrt(np.sum(np.abs(f.jacobian(polished)) ** 2, axis=(1, 2)))
    else:
        absp = absgp = np.zeros(0)
    meta = {"rule": f"|psi| < {c0} h (|grad psi| + h)", "h": h, "levels": levels, "region_radius": region_radius}
    return StratifiedNodalSet(polished, absp, absgp, None, meta)


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    if len(points) < 2:
        return points
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    tree = cKDTree(pts)
    keep = np.ones(len(pts), dtype=bool)
    for i, j in sorted(tree.query_pairs(tol)):
        if keep[i] and keep[j]:
            keep[j] = False
    return pts[keep]


# ---------------------------------------------------------------------------
# classification


def gradient_rank(f: SpinorField, p, rtol: float = 1e-6) -> int:
    """Rank of the real gradients of the 2N real components at p."""
    jac = f.jacobian(np.asarray(p, dtype=float)[None, :])[0]  # (n, N)
    mat = np.concatenate([jac.real, jac.imag], axis=1).T  # (2N, n)
    s = np.linalg.svd(mat, compute_uv=False)
    tol = rtol * max(f.sup_norm() / f.grid.radius, 1e-300)
    return int(np.sum(s > tol))


def classify_point(
    f: SpinorField,
    p,
    r0: float | None = None,
    levels: int = 6,
    fit_radius: float | None = None,
    rank_tol: float = 1e-6,
) -> PointLabel:
    """Order, stratum, gradient-span rank and blow-up invariance dimension at p."""
    p = np.asarray(p, dtype=float)
    R = f.grid.radius
    if r0 is None:
        r0 = min(0.1 * R, 0.5 * (R - 2 * f.grid.h - np.linalg.norm(p)))
    rank = gradient_rank(f, p, rank_tol)
    try:
        prof = frequency_profile(f, None, p, dyadic_radii(r0, levels))
        est = vanishing_order(prof)
    except (NoLimitError, DegenerateFieldError, GeometryError, ValueError):
        return PointLabel(None, None, UNCLASSIFIED, rank, None)
    if est.snapped is None or est.snapped < 1:
        return PointLabel(est.value, est.snapped, UNCLASSIFIED, rank, None, est.uncertainty)
    k = est.snapped
    try:
        poly = fit_leading_term(f, p, k, fit_radius if fit_radius is not None else 0.5 * r0)
        l_dim = poly.translation_invariance_dim()
    except (WrongOrderError, DegenerateFieldError):
        l_dim = None
    stratum = Z1 if k == 1 else Z2
    return PointLabel(est.value, k, stratum, rank, l_dim, est.uncertainty)


def classify_set(f: SpinorField, nodal: StratifiedNodalSet, indices=None, **kw) -> StratifiedNodalSet:
    idx = range(len(nodal)) if indices is None else indices
    labels = parallel_map(lambda i: classify_point(f, nodal.points[i], **kw), list(idx))
    sub = nodal if indices is None else StratifiedNodalSet(
        nodal.points[list(idx)], nodal.abs_psi[list(idx)], nodal.abs_grad[list(idx)], None, dict(nodal.meta)
    )
    return sub.with_labels(labels)


# ---------------------------------------------------------------------------
# blow-ups


def sphere_mean_square(evaluate, center, r: float, n: int, order=None) -> float:
    u, w = sphere_rule(n, order)
    vals = evaluate(np.asarray(center) + r * u)
    return float(pairwise_sum(w * np.sum(np.abs(vals) ** 2, axis=1)) / np.sum(w))


def blowup(f: SpinorField, p, r: float, grid: GridSpec | None = None) -> SpinorField:
    """psi_{p,r}(x) = psi(p + r x) / (mean over dB_r(p) of |psi|^2)^(1/2), on B_2."""
    p = np.asarray(p, dtype=float)
    if not f.grid.trace_admissible(p, 2 * r):
        raise GeometryError("B_2r(p) leaves the grid domain")
    norm2 = sphere_mean_square(f.evaluate, p, r, f.n)
    if not norm2 > 0:
        raise DegenerateFieldError("field vanishes on the blow-up sphere")
    c = 1.0 / math.sqrt(norm2)
    grid = GridSpec(f.n, 2.5, 0.125) if grid is None else grid
    an = Analytic(
        lambda x: c * f.evaluate(p + r * np.asarray(x)),
        lambda x: c * r * f.jacobian(p + r * np.asarray(x)),
        lambda x: c * r * r * f.laplacian(p + r * np.asarray(x)),
    )
    return SpinorField(grid, f.rep, "custom", {"blowup_of": f.kind, "point": p.tolist(), "r": r}, an)


def normalized_poly_distance(blown: SpinorField, poly: HomogeneousSpinorPoly, radius: float = 2.0) -> float:
    """L^2(B_radius) distance between a blow-up and P / (mean over dB_1 of |P|^2)^(1/2)."""
    n = blown.n
    pn = math.sqrt(sphere_mean_square(poly.evaluate, np.zeros(n), 1.0, n))
    pts, w = ball_rule(n, radius, radial_nodes=16)
    diff = blown.evaluate(pts) - poly.evaluate(pts) / pn
    return float(math.sqrt(pairwise_sum(w * np.sum(np.abs(diff) ** 2, axis=1))))


# ---------------------------------------------------------------------------
# box-counting dimension


@dataclass(frozen=True)
class BoxDimension:
    dimension: float
    scales: np.ndarray
    counts: np.ndarray


def default_scales(samples: np.ndarray, count: int = 5) -> np.ndarray:
    diam = float(np.max(np.ptp(samples, axis=0)))
    return diam * 2.0 ** -np.arange(2, 2 + count)


def box_dimension(samples, scales=None, min_samples: int = 100, min_scales: int = 4) -> BoxDimension:
    """Slope of log(occupied boxes) against log(1/scale)."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or len(pts) < min_samples:
        raise EstimatorError(f"box counting needs at least {min_samples} samples")
    scales = default_scales(pts) if scales is None else np.asarray(scales, dtype=float)
    if len(scales) < min_scales:
        raise EstimatorError(f"box counting needs at least {min_scales} scales")
    lo = pts.min(axis=0)
    extent = np.ptp(pts, axis=0)

    def occupied(s):
        # boxes are closed on the top face so a set spanning exactly k boxes counts k
        top = np.maximum(np.ceil(extent / s - 1e-9).astype(np.int64) - 1, 0)
        idx = np.minimum(np.floor((pts - lo) / s).astype(np.int64), top)
        return len(np.unique(idx, axis=0))

    counts = np.array([occupied(s) for s in scales])
    slope = float(np.polyfit(np.log(1.0 / scales), np.log(counts), 1)[0])
    return BoxDimension(slope, scales, counts)


# ---------------------------------------------------------------------------
# cusp-cone audit


@dataclass(frozen=True)
class CuspAudit:
    plane: np.ndarray | None  # (n, d) orthonormal basis through x0
    C_fit: float | None
    eps: float
    eps_fit: float | None
    violations: list
    skipped: bool
    angle_trend: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "plane": None if self.plane is None else self.plane.tolist(),
            "C_fit": self.C_fit,
            "eps": self.eps,
            "eps_fit": self.eps_fit,
            "violations": len(self.violations),
            "skipped": self.skipped,
            "angle_trend": self.angle_trend,
        }


def cusp_cone_audit(
    samples,
    x0,
    plane_dim: int,
    eps: float = 0.5,
    cap: float = 1e3,
    min_samples: int = 30,
) -> CuspAudit:
    """Fit a plane through x0 by principal axes and the cone constant C.

    C_fit is the smallest C with d(x, plane) <= C |x - x0|^(1 + eps) on all
    samples; samples above ``cap |x - x0|^(1 + eps)`` are violations.
    """
    pts = np.asarray(samples, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    rel = pts - x0
    dist = np.linalg.norm(rel, axis=1)
    rel, dist = rel[dist > 1e-300], dist[dist > 1e-300]
    if len(rel) < min_samples:
        return CuspAudit(None, None, eps, None, [], True)
    cov = rel.T @ rel / len(rel)
    w, v = np.linalg.eigh(cov)
    basis = v[:, np.argsort(w)[::-1][:plane_dim]]
    off = rel - (rel @ basis) @ basis.T
    d = np.linalg.norm(off, axis=1)
    ratio = d / dist ** (1.0 + eps)
    C_fit = float(np.max(ratio))
    violations = [pts_i.tolist() for pts_i, bad in zip(rel + x0, ratio > cap) if bad] if C_fit > cap else []
    pos = d > 1e-300
    eps_fit = float(loglog_slope(dist[pos], d[pos]) - 1.0) if np.sum(pos) >= 3 else None
    # max angle between x - x0 and the plane on dyadic shells
    shells = np.floor(np.log2(dist)).astype(int)
    trend = []
    for s in sorted(set(shells.tolist()), reverse=True):
        sel = shells == s
        trend.append([float(2.0**s), float(np.max(np.arcsin(np.clip(d[sel] / dist[sel], 0, 1))))])
    return CuspAudit(basis, C_fit if C_fit <= cap else None, eps, eps_fit, violations, False, trend)


# ---------------------------------------------------------------------------
# covering iteration


@dataclass(frozen=True)
class CoveringStep:
    k: int
    m: float
    log2_N: float
    log2_premeasure: float

    @property
    def premeasure(self) -> float:
        return 2.0**self.log2_premeasure if self.log2_premeasure > -1070 else 0.0

    @property
    def N_bound(self) -> float:
        return 2.0**self.log2_N if self.log2_N < 1020 else math.inf


def covering_iteration(n: int, eps: float, gamma: float, steps: int, N0: float = 1.0, m0: float = 1.0) -> list[CoveringStep]:
    """Bounds of the iterated plane-neighbourhood covering.

    m_{k+1} = m_k (1 + eps),
    N_{k+1} <= N_k ((sqrt(n) + 1) / 2^(1 - m_k eps))^(n-2),
    premeasure_k = (2^-m_k)^(n-2+gamma) N_k.
    Everything is tracked in log2 to survive the doubly exponential m_k.
    """
    if n < 3 or not 0 < eps < 1 or gamma < 0 or steps < 1:
        raise ValueError("need n >= 3, eps in (0, 1), gamma >= 0, steps >= 1")
    m = float(m0)
    logN = math.log2(N0)
    out = [CoveringStep(0, m, logN, -m * (n - 2 + gamma) + logN)]
    c = math.log2(math.sqrt(n) + 1.0)
    for k in range(1, steps + 1):
        logN = logN + (n - 2) * (c + m * eps - 1.0)
        m = m * (1.0 + eps)
        out.append(CoveringStep(k, m, logN, -m * (n - 2 + gamma) + logN))
    return out


def cube_count_bound(n: int, delta: float) -> float:
    """((sqrt(n) + 1) / (2 delta))^(n-2)."""
    return ((math.sqrt(n) + 1.0) / (2.0 * delta)) ** (n - 2)


def _section_feasible(x0, V, lo, hi, bounds_t):
    """Is {x0 + V t : t in box bounds_t} meeting the cube [lo, hi]^n ?"""
    n, d = V.shape
    A = np.vstack([V, -V])
    b = np.concatenate([hi - x0, x0 - lo])
    res = linprog(np.zeros(d), A_ub=A, b_ub=b, bounds=bounds_t, method="highs")
    return res.status == 0


def plane_cube_cover(n: int, delta: float, x0, V) -> int:
    """Number of plane-aligned cubes of side 2 delta needed to cover pi cap [0, 1]^n.

    pi = {x0 + V t}; tiles of a lattice in the t coordinates start at the
    lower corner of the bounding box of pi cap K (found by linear
    programming) and are kept when they meet pi cap K.
    """
    x0 = np.asarray(x0, dtype=float)
    V = np.asarray(V, dtype=float)
    V, _ = np.linalg.qr(V)
    d = V.shape[1]
    lo_t, hi_t = np.zeros(d), np.zeros(d)
    A = np.vstack([V, -V])
    b = np.concatenate([1.0 - x0, x0])
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        r_lo = linprog(e, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
        r_hi = linprog(-e, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
        if r_lo.status != 0 or r_hi.status != 0:
            return 0
        lo_t[i], hi_t[i] = r_lo.x[i], r_hi.x[i]
    side = 2 * delta
    counts = [max(1, int(math.ceil((hi_t[i] - lo_t[i]) / side - 1e-12))) for i in range(d)]
    used = 0
    for cell in itertools.product(*[range(c) for c in counts]):
        bounds_t = [(lo_t[i] + cell[i] * side, lo_t[i] + (cell[i] + 1) * side) for i in range(d)]
        if _section_feasible(x0, V, np.zeros(n), np.ones(n), bounds_t):
            used += 1
    return used
