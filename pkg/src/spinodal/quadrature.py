"""Sphere and ball quadrature rules.

Spheres use a recursive product rule: S^{d} is parametrised as
``(t, sqrt(1 - t^2) * omega)`` with ``omega`` on S^{d-1}, which turns the
surface measure into ``(1 - t^2)^((d - 2) / 2) dt d omega``.  The ``t``
factor is integrated with Gauss-Jacobi nodes and S^1 with the trapezoid
rule.  For n = 3 this is Gauss-Legendre in the polar cosine times a
trapezoid in azimuth.  All rules are deterministic and exact for
polynomials of degree below ``order``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_jacobi, roots_legendre


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^{n-1} in R^n, i.e. n * omega_n."""
    return float(2.0 * np.exp(0.5 * n * np.log(np.pi) - gammaln(0.5 * n)))


def default_sphere_order(n: int) -> int:
    return {2: 64, 3: 24, 4: 12}.get(n, 8)


@lru_cache(maxsize=64)
def _sphere_rule_cached(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    m = 2 * order
    theta = 2.0 * np.pi * np.arange(m) / m
    nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = np.full(m, 2.0 * np.pi / m)
    for d in range(2, n):
        # extend a rule on S^{d-1} (in R^d) to S^d (in R^{d+1})
        a = 0.5 * (d - 2)
        if a == 0.0:
            t, wt = roots_legendre(order)
        else:
            t, wt = roots_jacobi(order, a, a)
        s = np.sqrt(1.0 - t * t)
        new_nodes = np.concatenate(
            [
                np.repeat(t, len(weights))[:, None],
                (s[:, None, None] * nodes[None, :, :]).reshape(-1, d),
            ],
            axis=1,
        )
        weights = (wt[:, None] * weights[None, :]).ravel()
        nodes = new_nodes
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def sphere_rule(n: int, order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Unit-sphere nodes ``(M, n)`` and positive weights summing to |S^{n-1}|."""
    if order is None:
        order = default_sphere_order(n)
    return _sphere_rule_cached(int(n), int(order))


def gauss_interval(a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(m)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def graded_radial_rule(r: float, m: int, grading: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for integrals over (0, r) clustered at 0.

    Uses rho = r * s**grading with Gauss-Legendre in s, which removes
    algebraic endpoint singularities of order down to -1 + 1/grading.
    """
    s, ws = gauss_interval(0.0, 1.0, m)
    rho = r * s**grading
    w = r * grading * s ** (grading - 1.0) * ws
    return rho, w


def ball_rule(
    n: int,
    r: float,
    radial_nodes: int = 24,
    sphere_order: int | None = None,
    grading: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Polar product rule on the ball B_r(0): points ``(P, n)`` and weights."""
    rho, wr = graded_radial_rule(r, radial_nodes, grading)
    u, wu = sphere_rule(n, sphere_order)
    pts = (rho[:, None, None] * u[None, :, :]).reshape(-1, n)
    w = ((wr * rho ** (n - 1))[:, None] * wu[None, :]).ravel()
    return pts, w


def pairwise_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along ``axis`` with a fixed pairwise tree (order-independent of BLAS)."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate([v, np.zeros_like(v[:1])], axis=0)
        v = v[0::2] + v[1::2]
    return v[0] if v.shape[0] else np.zeros(v.shape[1:], dtype=v.dtype)
