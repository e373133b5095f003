"""Space-form model metrics in geodesic normal coordinates.

For curvature kappa the metric reads ``d rho^2 + rho^2 s(rho)^2 omega`` with
``s(rho) = sin(sqrt(kappa) rho) / (sqrt(kappa) rho)`` (sinh for kappa < 0),
so ``det w = s^(2(n-1))`` and ``W = (1/2) d/drho ln det w`` are closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from spinodal.errors import DomainError, InvalidDimensionError

KINDS = ("flat", "sphere", "hyperbolic")


@dataclass(frozen=True)
class ModelMetric:
    kind: str = "flat"
    curvature: float = 0.0
    n: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown metric kind {self.kind!r}")
        if self.n < 2:
            raise InvalidDimensionError("metric dimension must be >= 2")
        if self.kind == "flat" and self.curvature != 0.0:
            raise DomainError("flat metric must have curvature 0")
        if self.kind == "sphere" and not self.curvature > 0:
            raise DomainError("sphere metric needs positive curvature")
        if self.kind == "hyperbolic" and not self.curvature < 0:
            raise DomainError("hyperbolic metric needs negative curvature")

    @classmethod
    def flat(cls, n: int) -> "ModelMetric":
        return cls("flat", 0.0, n)

    @classmethod
    def sphere(cls, n: int, curvature: float = 1.0) -> "ModelMetric":
        return cls("sphere", float(curvature), n)

    @classmethod
    def hyperbolic(cls, n: int, curvature: float = -1.0) -> "ModelMetric":
        return cls("hyperbolic", float(curvature), n)

    @property
    def is_flat(self) -> bool:
        return self.kind == "flat"

    @property
    def guard(self) -> float:
        """Injectivity radius of the normal chart (pi / sqrt(kappa) on spheres)."""
        if self.kind == "sphere":
            return float(np.pi / np.sqrt(self.curvature))
        return float("inf")

    @property
    def scalar_curvature(self) -> float:
        return self.n * (self.n - 1) * self.curvature

    @property
    def r_coord(self) -> float:
        """Half the curvature radius; infinite for the flat model."""
        if self.is_flat:
            return float("inf")
        return 0.5 / np.sqrt(abs(self.curvature))

    def _check_rho(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0) or np.any(rho >= self.guard):
            raise DomainError(f"radius outside (0, {self.guard})")
        return rho

    def warp_scale(self, rho):
        """s(rho): ratio of geodesic-sphere radius to Euclidean radius."""
        rho = np.asarray(rho, dtype=float)
        k = self.curvature
        if self.is_flat:
            return np.ones_like(rho)
        a = np.sqrt(abs(k)) * rho
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.sin(a) / a if k > 0 else np.sinh(a) / a
        return np.where(a == 0, 1.0, s)

    def radial_warp(self, rho):
        """Return ``(det w(rho), W(rho))``; theta-independent for space forms."""
        rho = self._check_rho(rho)
        if self.is_flat:
            return np.ones_like(rho)[()], np.zeros_like(rho)[()]
        c = np.sqrt(abs(self.curvature))
        a = c * rho
        detw = self.warp_scale(rho) ** (2 * (self.n - 1))
        if self.curvature > 0:
            W = (self.n - 1) * (c / np.tan(a) - 1.0 / rho)
        else:
            W = (self.n - 1) * (c / np.tanh(a) - 1.0 / rho)
        return detw[()], W[()]

    def area_factor(self, rho):
        """sqrt(det w): ratio of metric to Euclidean sphere area element."""
        detw, _ = self.radial_warp(rho)
        return np.sqrt(detw)

    @cached_property
    def c_coord(self) -> float:
        """Envelope constant with |W(rho)| <= C_coord * rho on (0, r_coord)."""
        if self.is_flat:
            return 0.0
        rho = np.linspace(self.r_coord * 1e-3, self.r_coord, 400)
        _, W = self.radial_warp(rho)
        return float(np.max(np.abs(W) / rho))

    # exact normal-coordinate tensors ------------------------------------
    def normal_metric(self, x) -> np.ndarray:
        """Exact g_ij(x) in normal coordinates centred at the origin."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        eye = np.eye(self.n)
        if r == 0:
            return eye
        xh = np.outer(x, x) / r**2
        s2 = float(self.warp_scale(r)) ** 2
        return xh + s2 * (eye - xh)

    def b_matrix(self, x) -> np.ndarray:
        """Positive square root of the inverse metric, b g b = id."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        eye = np.eye(self.n)
        if r == 0:
            return eye
        xh = np.outer(x, x) / r**2
        s = float(self.warp_scale(r))
        return xh + (eye - xh) / s

    def curvature_quadratic(self, x) -> np.ndarray:
        """The tensor R_iklj x^k x^l for constant sectional curvature kappa."""
        x = np.asarray(x, dtype=float)
        return -self.curvature * (np.dot(x, x) * np.eye(self.n) - np.outer(x, x))


def metric_expansion_check(metric: ModelMetric, x) -> float:
    """Max residual of the second-order expansions of g_ij and b_i^j at ``x``.

    The expansions are ``g = I + (1/3) R x x`` and ``b = I - (1/6) R x x``
    with ``R x x`` the contracted curvature tensor.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (metric.n,):
        raise DomainError(f"point must have {metric.n} coordinates")
    r = float(np.linalg.norm(x))
    if not metric.is_flat and r >= 0.3 / np.sqrt(abs(metric.curvature)):
        raise DomainError("expansion check needs |x| < 0.3 curvature radii")
    if metric.is_flat:
        return 0.0
    rxx = metric.curvature_quadratic(x)
    eye = np.eye(metric.n)
    g_res = np.max(np.abs(metric.normal_metric(x) - (eye + rxx / 3.0)))
    b_res = np.max(np.abs(metric.b_matrix(x) - (eye - rxx / 6.0)))
    return float(max(g_res, b_res))
