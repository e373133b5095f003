"""Euclidean Green kernels and the harmonic-polynomial decomposition.

Conventions: ``omega_n`` is the volume of the unit ball, so the unit
sphere has area ``n * omega_n``.  The Laplace kernel is

    G0(x, y) = 1 / ((n - 2) n omega_n |x - y|^(n - 2))      (n >= 3)
    G0(x, y) = log(1 / |x - y|) / (2 pi)                     (n = 2)

and the Dirac kernel is its Clifford gradient in x,

    GG0(x, y) = -gamma(x - y) / (n omega_n |x - y|^n).

The degree-k Taylor term of x -> GG0(x, y) about x = 0 is obtained in
closed form as gamma(grad_x T_{k+1}) where T_m is the degree-m term of the
Gegenbauer (n >= 3) or Chebyshev (n = 2) expansion of G0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, floor

import numpy as np
from scipy.special import gammaln

from spinodal.clifford import CliffordRep
from spinodal.errors import (
    DomainError,
    GeometryError,
    HypothesisError,
    ResolutionError,
    SingularityError,
)
from spinodal.fields import Analytic, SpinorField, STENCIL_BAND
from spinodal.harmonic import HomogeneousSpinorPoly, eval_monomials, loglog_slope, monomial_exponents
from spinodal.quadrature import graded_radial_rule, pairwise_sum, sphere_area, sphere_rule


@lru_cache(maxsize=None)
def _expansion_coeffs(n: int, m: int) -> tuple[tuple[int, float, float], ...]:
    """Terms (j, coefficient, power of |y|) of the degree-m part of G0.

    T_m(x, y) = sum_j coeff * (x.y)^(m-2j) |x|^(2j) |y|^power.
    """
    area = sphere_area(n)
    out = []
    if n == 2:
        if m == 0:
            return ()  # constant log(1/|y|) term has zero gradient
        for j in range(m // 2 + 1):
            c = 0.5 * ((-1) ** j) * factorial(m - j - 1) / (factorial(j) * factorial(m - 2 * j)) * 2.0 ** (m - 2 * j)
            out.append((j, c / (2 * np.pi), -2.0 * m + 2.0 * j))
        return tuple(out)
    lam = 0.5 * n - 1.0
    pref = 1.0 / ((n - 2) * area)
    for j in range(m // 2 + 1):
        a = ((-1) ** j) * np.exp(gammaln(m - j + lam) - gammaln(lam) - gammaln(j + 1) - gammaln(m - 2 * j + 1))
        a *= 2.0 ** (m - 2 * j)
        out.append((j, pref * a, -2.0 * m - 2.0 * lam + 2.0 * j))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class GreenKernel:
    rep: CliffordRep
    convention: dict = field(default_factory=lambda: {"omega_n": "unit-ball volume", "sphere_area": "n * omega_n"})

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def area(self) -> float:
        return sphere_area(self.n)

    def dirac_fundamental(self, x, y) -> np.ndarray:
        """-(1/(n omega_n)) gamma(x - y) / |x - y|^n; broadcasts over leading axes."""
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        r = np.linalg.norm(d, axis=-1)
        if np.any(r == 0):
            raise SingularityError("Dirac kernel evaluated on the diagonal")
        return -self.rep.gamma(d / (self.area * r[..., None] ** self.n))

    def laplace_fundamental(self, x, y):
        return laplace_fundamental(self.n, x, y)

    def taylor_gradient(self, k: int, x, y) -> np.ndarray:
        """grad_x T_{k+1}(x, y) for every pair, shape (S, P, n). No domain check."""
        X = np.asarray(x, dtype=float).reshape(-1, self.n)
        Y = np.asarray(y, dtype=float).reshape(-1, self.n)
        m = k + 1
        xy = X @ Y.T  # (S, P)
        x2 = np.sum(X * X, axis=1)[:, None]
        ny = np.linalg.norm(Y, axis=1)[None, :]
        grad = np.zeros((X.shape[0], Y.shape[0], self.n))
        for j, c, power in _expansion_coeffs(self.n, m):
            a = m - 2 * j
            ypow = c * ny**power
            if a > 0:
                grad += (ypow * a * xy ** (a - 1) * x2**j)[:, :, None] * Y[None, :, :]
            if j > 0:
                grad += (ypow * 2 * j * xy**a * x2 ** (j - 1))[:, :, None] * X[:, None, :]
        return grad

    def green_taylor_term(self, k: int, x, y) -> np.ndarray:
        """Degree-k Taylor term of x -> GG0(x, y) about 0 (an N x N matrix)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if k < 0:
            raise DomainError("Taylor degree must be >= 0")
        if np.linalg.norm(x) >= np.linalg.norm(y):
            raise DomainError("Taylor expansion of the kernel needs |x| < |y|")
        g = self.taylor_gradient(k, x, y)[0, 0]
        return self.rep.gamma(g)


def laplace_fundamental(n: int, x, y):
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise SingularityError("Laplace kernel evaluated on the diagonal")
    if n == 2:
        return np.log(1.0 / r) / (2 * np.pi)
    return 1.0 / ((n - 2) * sphere_area(n) * r ** (n - 2))


def dirac_fundamental(kernel: GreenKernel, x, y) -> np.ndarray:
    return kernel.dirac_fundamental(x, y)


def green_taylor_term(kernel: GreenKernel, k: int, x, y) -> np.ndarray:
    return kernel.green_taylor_term(k, x, y)


# ---------------------------------------------------------------------------
# Newton representation


def _chord_lengths(offset: np.ndarray, dirs: np.ndarray, R: float) -> np.ndarray:
    """Distance from ``offset`` (inside B_R(0)) to the sphere along each direction."""
    b = dirs @ offset
    c = offset @ offset - R * R
    return -b + np.sqrt(b * b - c)


def newton_represent(
    kernel: GreenKernel,
    f: SpinorField,
    center,
    R: float,
    y,
    radial_nodes: int = 24,
    sphere_order: int | None = None,
    dirac_harmonic: bool | None = None,
) -> np.ndarray:
    """Reconstruct psi(y) from the kernel representation on B_R(center).

    psi(y) = int_B GG0(y, x) D psi(x) dx - int_dB GG0(y, x) gamma(nu) psi(x) ds.

    The volume integral uses polar coordinates about y, in which the
    |x - y|^(1-n) kernel singularity is cancelled by the Jacobian, so no
    excision is needed.  It is skipped for D-harmonic fields.
    """
    n = kernel.n
    center = np.asarray(center, dtype=float)
    y = np.asarray(y, dtype=float)
    if not f.grid.trace_admissible(center, R):
        raise GeometryError("representation ball leaves the grid domain")
    off = y - center
    if np.linalg.norm(off) > R - f.grid.h:
        raise ResolutionError("evaluation point within one mesh width of the boundary")
    if dirac_harmonic is None:
        dirac_harmonic = f.kind == "harmonic_poly" and f.params.get("dirac_residual", 1.0) <= 1e-10

    u, wu = sphere_rule(n, sphere_order)
    xb = center + R * u
    psi_b = f.evaluate(xb)
    gpsi = np.einsum("pi,iab,pb->pa", u, kernel.rep.gammas, psi_b)
    kern_b = kernel.dirac_fundamental(y[None, :], xb)  # (P, N, N)
    boundary = pairwise_sum((wu * R ** (n - 1))[:, None] * np.einsum("pab,pb->pa", kern_b, gpsi))
    out = -boundary

    if not dirac_harmonic:
        s, ws = graded_radial_rule(1.0, radial_nodes)
        lengths = _chord_lengths(off, u, R)  # (M,)
        rho = lengths[:, None] * s[None, :]  # (M, Q)
        pts = y + rho[:, :, None] * u[:, None, :]
        dpsi = f.dirac(pts.reshape(-1, n)).reshape(len(u), len(s), -1)
        # GG0(y, x) rho^(n-1) = gamma(u) / (n omega_n), independent of rho
        weight = wu[:, None] * lengths[:, None] * ws[None, :] / kernel.area
        inner = pairwise_sum(weight[:, :, None] * dpsi, axis=1)  # (M, N)
        out = out + pairwise_sum(np.einsum("pi,iab,pb->pa", u, kernel.rep.gammas, inner))
    return out


# ---------------------------------------------------------------------------
# decomposition phi = P + Q


@dataclass(frozen=True, eq=False)
class Decomposition:
    sigma: float
    center: np.ndarray
    radius: float
    polys: list  # HomogeneousSpinorPoly per degree 0..K
    Q: SpinorField
    q_exponent: float
    grad_q_exponent: float
    growth_constant: float
    residuals: dict

    @property
    def degrees(self) -> list[int]:
        return [p.k for p in self.polys]

    def P_value(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float).reshape(-1, self.center.size) - self.center
        return sum(p.evaluate(x) for p in self.polys)

    def leading(self) -> HomogeneousSpinorPoly:
        return self.polys[-1]

    def report(self) -> dict:
        combined = {str(p.k): json.loads(p.to_json()) for p in self.polys}
        return {
            "sigma": self.sigma,
            "degrees": self.degrees,
            "P": combined,
            "Q_exponent_fit": self.q_exponent,
            "gradQ_exponent_fit": self.grad_q_exponent,
            "Q_growth_constant": self.growth_constant,
            "residuals": self.residuals,
        }


def _sample_directions(n: int, count: int) -> np.ndarray:
    x = np.random.default_rng(20240917).standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _shell_rms(evaluate, center, radii, n, order=None) -> np.ndarray:
    u, w = sphere_rule(n, order)
    out = []
    for r in radii:
        v = evaluate(center + r * u)
        v = v.reshape(len(u), -1)
        out.append(np.sqrt(np.sum(w * np.sum(np.abs(v) ** 2, axis=1)) / np.sum(w)))
    return np.array(out)


def decompose(
    kernel: GreenKernel,
    f: SpinorField,
    center,
    sigma: float,
    radius: float | None = None,
    radial_nodes: int = 32,
    sphere_order: int | None = None,
    slope_tol: float = 0.2,
) -> Decomposition:
    """Split ``f`` near ``center`` into D-harmonic polynomials and a remainder.

    P collects, for each degree k <= floor(sigma) + 1, the full-ball kernel
    integrals with the degree-k Taylor term of the Dirac kernel:

        P_k(x) = int_B GG_k(x, y) D phi(y) dy - int_dB GG_k(x, y) gamma(nu) phi(y) ds.

    The near-field part of the representation (where the Taylor series of
    the kernel does not converge) stays in Q = phi - P.
    """
    n, N = kernel.n, kernel.rep.fiber_dim
    center = np.asarray(center, dtype=float)
    sigma = float(sigma)
    frac = sigma - floor(sigma)
    if sigma <= 0 or frac < 1e-6 or frac > 1 - 1e-6:
        raise DomainError("sigma must be a positive non-integer")
    K = floor(sigma) + 1
    if radius is None:
        radius = 0.5 * (f.grid.radius - STENCIL_BAND * f.grid.h - np.linalg.norm(center))
    if not f.grid.trace_admissible(center, radius):
        raise GeometryError("decomposition ball leaves the grid domain")
    if not f.has_analytic and radius < 4 * f.grid.h:
        raise ResolutionError("decomposition radius below four mesh widths")

    scale = max(f.sup_norm(), 1e-300)
    if np.max(np.abs(f.evaluate(center[None, :]))) > 1e-8 * scale:
        raise HypothesisError("field does not vanish at the center")
    radii = 0.25 * radius * 2.0 ** -np.arange(4)
    d_rms = _shell_rms(f.dirac, center, radii, n)
    if np.max(d_rms) > 1e-12 * scale:
        slope = loglog_slope(radii, np.maximum(d_rms, 1e-300))
        if slope < sigma - slope_tol:
            raise HypothesisError(f"|D phi| grows like r^{slope:.3f}, below sigma = {sigma}")
    else:
        slope = float("inf")

    # quadrature: graded radial rule removes the rho^(sigma - K) endpoint singularity
    grading = 2.0 / frac
    rho, wr = graded_radial_rule(radius, radial_nodes, grading)
    u, wu = sphere_rule(n, sphere_order)
    ypts = (rho[:, None, None] * u[None, :, :]).reshape(-1, n)
    wvol = ((wr * rho ** (n - 1))[:, None] * wu[None, :]).ravel()
    dphi = f.dirac(center + ypts)
    yb = radius * u
    wb = wu * radius ** (n - 1)
    psi_b = f.evaluate(center + yb)
    gpsi = np.einsum("pi,iab,pb->pa", u, kernel.rep.gammas, psi_b)

    polys = []
    residuals = {}
    for k in range(K + 1):
        M = len(monomial_exponents(n, k))
        xs = _sample_directions(n, 2 * M + 4)
        vals = np.zeros((len(xs), N), dtype=complex)
        for sl in _chunks(len(ypts), 4096):
            g = kernel.taylor_gradient(k, xs, ypts[sl]) * wvol[sl][None, :, None]
            vals += np.einsum("jab,sjb->sa", kernel.rep.gammas, np.einsum("spj,pb->sjb", g, dphi[sl]))
        g = kernel.taylor_gradient(k, xs, yb) * wb[None, :, None]
        vals -= np.einsum("jab,sjb->sa", kernel.rep.gammas, np.einsum("spj,pb->sjb", g, gpsi))
        vand = eval_monomials(n, k, xs)
        coeffs = np.linalg.lstsq(vand, vals, rcond=None)[0]
        poly = HomogeneousSpinorPoly(n, N, k, coeffs)
        polys.append(poly)
        residuals[f"dirac_residual_k{k}"] = poly.dirac_residual(kernel.rep)
        residuals[f"fit_residual_k{k}"] = float(np.max(np.abs(vand @ coeffs - vals), initial=0.0))

    Q = _remainder_field(f, polys, center)
    q_rms = _shell_rms(Q.evaluate, center, radii, n)
    gq_rms = _shell_rms(Q.jacobian, center, radii, n)
    q_exp = loglog_slope(radii, np.maximum(q_rms, 1e-300))
    gq_exp = loglog_slope(radii, np.maximum(gq_rms, 1e-300))
    growth = float(np.max(q_rms / radii ** (sigma + 1)))
    residuals["dirac_growth_slope"] = slope
    return Decomposition(sigma, center, float(radius), polys, Q, q_exp, gq_exp, growth, residuals)


def _chunks(total: int, size: int):
    for start in range(0, total, size):
        yield slice(start, min(total, start + size))


def _remainder_field(f: SpinorField, polys, center) -> SpinorField:
    def pval(p):
        x = np.asarray(p) - center
        return sum(q.evaluate(x) for q in polys)

    def pjac(p):
        x = np.asarray(p) - center
        return sum(q.jacobian(x) for q in polys)

    def plap(p):
        x = np.asarray(p) - center
        return sum(q.laplacian(x) for q in polys)

    if f.has_analytic:
        an = Analytic(lambda p: f.evaluate(p) - pval(p), lambda p: f.jacobian(p) - pjac(p), lambda p: f.laplacian(p) - plap(p))
        return SpinorField(f.grid, f.rep, "custom", {"derived": "decomposition_remainder"}, an)
    pts = f.grid.points().reshape(-1, f.n)
    data = f.values - pval(pts).reshape(f.values.shape)
    return SpinorField(f.grid, f.rep, "custom", {"derived": "decomposition_remainder"}, None, data)
