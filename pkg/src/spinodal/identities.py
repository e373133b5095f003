"""Integral identities checked numerically: Hardy, Pohozaev, Lichnerowicz.

All volume integrals use the polar ball rule about the centre; boundary
integrals use sphere traces.  On curved models the volume and area
elements carry sqrt(det w) and gradients are measured with the exact
normal-coordinate inverse metric.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from spinodal.errors import InvalidDimensionError
from spinodal.fields import SpinorField, apply_dirac, sphere_trace, stencil_jacobian, stencil_laplacian
from spinodal.geometry import ModelMetric
from spinodal.quadrature import ball_rule, pairwise_sum, sphere_rule


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    slack: float  # rhs - lhs for inequalities, |lhs - rhs| for identities
    inequality: bool
    meta: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        if self.inequality:
            return self.slack >= -tol
        return self.slack <= tol

    def to_dict(self) -> dict:
        return asdict(self)


class ScalarFunction(NamedTuple):
    """Real scalar u with gradient, both vectorised over (P, n) points."""

    value: Callable
    gradient: Callable


def hardy_constant(n: int) -> float:
    if n < 3:
        raise InvalidDimensionError("the Hardy constant 2/(n-2) needs n >= 3")
    return 2.0 / (n - 2)


def hardy_radius(metric: ModelMetric, R: float) -> float:
    """0.3 R on flat space; on curved models also C_coord r^2/(n-2) < 1/4."""
    r = 0.3 * R
    if not metric.is_flat:
        r = min(r, metric.r_coord)
        if metric.c_coord > 0:
            r = min(r, 0.999 * np.sqrt((metric.n - 2) / (4.0 * metric.c_coord)))
    return float(r)


def _inverse_metric_norm2(metric: ModelMetric, pts: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """g^{ij} <d_i, d_j> for gradients of shape (P, n) or (P, n, N)."""
    if metric.is_flat:
        return np.sum(np.abs(grads) ** 2, axis=tuple(range(1, grads.ndim)))
    r = np.linalg.norm(pts, axis=1)
    s = metric.warp_scale(r)
    xh = pts / np.where(r > 0, r, 1.0)[:, None]
    if grads.ndim == 2:
        grads = grads[:, :, None]
    radial = np.einsum("pj,pjb->pb", xh, grads)
    tangential = grads - xh[:, :, None] * radial[:, None, :]
    return np.sum(np.abs(radial) ** 2, axis=1) + np.sum(np.abs(tangential) ** 2, axis=(1, 2)) / s**2


def hardy_slack(
    u_or_field,
    metric: ModelMetric,
    r: float,
    center=None,
    radial_nodes: int = 24,
    sphere_order: int | None = None,
) -> IdentityReport:
    """RHS - LHS of the Hardy inequality with boundary term.

        int_{B_r} u^2 / rho^2  <=  C_H / r int_{dB_r} u^2  +  C_H^2 int_{B_r} |grad u|^2,

    C_H = 2/(n-2).  A spinor field enters through u = |psi| and Kato's
    inequality |grad |psi|| <= |grad psi|.
    """
    n = metric.n
    ch = hardy_constant(n)
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    pts, w = ball_rule(n, r, radial_nodes, sphere_order)
    rho = np.linalg.norm(pts, axis=1)
    if not metric.is_flat:
        w = w * metric.area_factor(rho)
        bfac = float(metric.area_factor(r))
    else:
        bfac = 1.0

    if isinstance(u_or_field, SpinorField):
        f = u_or_field
        u2 = np.sum(np.abs(f.evaluate(center + pts)) ** 2, axis=1)
        grad2 = _inverse_metric_norm2(metric, pts, f.jacobian(center + pts))
        tr = sphere_trace(f, center, r, sphere_order)
        b_u2 = np.sum(np.abs(tr.values) ** 2, axis=1)
        b_w = tr.weights
        label = "hardy-spinor"
    else:
        fn = u_or_field
        u2 = np.asarray(fn.value(center + pts), dtype=float) ** 2
        grad2 = _inverse_metric_norm2(metric, pts, np.asarray(fn.gradient(center + pts), dtype=float))
        uu, wu = sphere_rule(n, sphere_order)
        b_u2 = np.asarray(fn.value(center + r * uu), dtype=float) ** 2
        b_w = wu * r ** (n - 1)
        label = "hardy-scalar"

    lhs = float(pairwise_sum(w * u2 / rho**2))
    boundary = float(pairwise_sum(b_w * b_u2)) * bfac
    energy = float(pairwise_sum(w * grad2))
    rhs = ch / r * boundary + ch**2 * energy
    return IdentityReport(
        label,
        lhs,
        rhs,
        rhs - lhs,
        True,
        {"C_Hardy": ch, "r": r, "boundary": boundary, "energy": energy, "metric": metric.kind, "nodes": int(len(w))},
    )


def pohozaev_residual(
    f: SpinorField,
    r: float,
    center=None,
    method: str = "auto",
    radial_nodes: int = 24,
    sphere_order: int | None = None,
) -> IdentityReport:
    """Flat Pohozaev identity for spinors.

    Boundary side: int_{dB_r} r|grad psi|^2 - 2r|d_nu psi|^2 - (n-2) Re<psi, d_nu psi>.
    Volume side:   int_{B_r} Re<2 x.grad psi + (n-2) psi, -Delta psi>.
    ``method="grid"`` evaluates everything from grid samples (cubic
    interpolation of the samples and of their stencil gradient and
    Laplacian) to expose discretisation order.
    """
    n = f.n
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    grid_path = method == "grid" or not f.has_analytic
    tr = sphere_trace(f, center, r, sphere_order, method)
    jac_b = stencil_jacobian(f, tr.nodes) if grid_path else f.jacobian(tr.nodes)
    dnu = np.einsum("pj,pjb->pb", tr.normals, jac_b)
    grad2_b = np.sum(np.abs(jac_b) ** 2, axis=(1, 2))
    dnu2 = np.sum(np.abs(dnu) ** 2, axis=1)
    pairing = np.real(np.sum(tr.values * np.conj(dnu), axis=1))
    boundary = float(pairwise_sum(tr.weights * (r * grad2_b - 2 * r * dnu2 - (n - 2) * pairing)))

    pts, w = ball_rule(n, r, radial_nodes, sphere_order)
    x = center + pts
    if grid_path:
        vals = f.evaluate(x, "grid")
        jac = stencil_jacobian(f, x)
        lap = stencil_laplacian(f).evaluate(x, "grid")
    else:
        vals = f.evaluate(x)
        jac = f.jacobian(x)
        lap = f.laplacian(x)
    radial = np.einsum("pj,pjb->pb", pts, jac)
    integrand = np.real(np.sum((2 * radial + (n - 2) * vals) * np.conj(-lap), axis=1))
    volume = float(pairwise_sum(w * integrand))
    return IdentityReport(
        "pohozaev",
        boundary,
        volume,
        abs(boundary - volume),
        False,
        {"r": r, "method": tr.method, "h": f.grid.h},
    )


def lichnerowicz_residual(f: SpinorField) -> IdentityReport:
    """max |D(D psi) + Delta psi| over valid ball nodes, all by stencils."""
    dd = apply_dirac(apply_dirac(f)).values
    lap = stencil_laplacian(f).values
    res = dd + lap
    mask = f.grid.ball_mask() & np.all(np.isfinite(res), axis=-1)
    value = float(np.max(np.abs(res[mask]), initial=0.0))
    meta = {"h": f.grid.h, "nodes": int(np.sum(mask))}
    if f.kind == "plane_wave":
        lam = f.params["eigenvalue"]
        eig = dd - lam**2 * f.values
        meta["eigen_residual"] = float(np.max(np.abs(eig[mask]), initial=0.0))
    return IdentityReport("lichnerowicz", value, 0.0, value, False, meta)


def vf_boundary_term(f: SpinorField, r: float, center=None, sphere_order: int | None = None) -> IdentityReport:
    """int_{dB_r} Re<gamma(nu) D psi, psi> ds against H(r).

    For D psi = f(psi) psi with real f the integrand is Re of a skew
    pairing and vanishes pointwise.
    """
    n = f.n
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    tr = sphere_trace(f, center, r, sphere_order)
    dpsi = f.dirac(tr.nodes)
    g_dpsi = np.einsum("pi,iab,pb->pa", tr.normals, f.rep.gammas, dpsi)
    term = float(pairwise_sum(tr.weights * np.real(np.sum(g_dpsi * np.conj(tr.values), axis=1))))
    H = tr.mass()
    return IdentityReport("vf-boundary", abs(term), H, abs(term) / H, False, {"r": r})
