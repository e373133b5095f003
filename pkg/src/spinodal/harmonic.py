"""Homogeneous harmonic polynomials, scalar and spinor valued.

Polynomials of degree k in n variables are stored as coefficient arrays over
the monomial basis returned by :func:`monomial_exponents`.  Derivatives and
the Laplacian act as integer matrices on these coefficient vectors, so
harmonicity and D-harmonicity are checked at coefficient level.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
import scipy.linalg
import sympy

from spinodal.errors import (
    DegenerateFieldError,
    FitError,
    InvalidDimensionError,
    ShapeError,
    WrongOrderError,
)
from spinodal.quadrature import gauss_interval, sphere_rule

EXACT_MAX_DEGREE = 4


@lru_cache(maxsize=None)
def monomial_exponents(n: int, k: int) -> np.ndarray:
    """Exponent vectors of all degree-k monomials in n variables, shape (M, n)."""
    if k < 0:
        return np.zeros((0, n), dtype=int)
    rows = []
    for combo in itertools.combinations_with_replacement(range(n), k):
        e = np.zeros(n, dtype=int)
        for i in combo:
            e[i] += 1
        rows.append(e)
    out = np.array(rows, dtype=int).reshape(-1, n)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {tuple(e): i for i, e in enumerate(monomial_exponents(n, k))}


def eval_monomials(n: int, k: int, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, n)
    exps = monomial_exponents(n, k)
    if k == 0:
        return np.ones((pts.shape[0], 1))
    out = np.ones((pts.shape[0], exps.shape[0]))
    for i in range(n):
        powers = pts[:, i : i + 1] ** np.arange(k + 1)[None, :]
        out *= powers[:, exps[:, i]]
    return out


@lru_cache(maxsize=None)
def derivative_matrix(n: int, k: int, j: int) -> np.ndarray:
    """Matrix of d/dx_j from degree-k to degree-(k-1) coefficients."""
    src = monomial_exponents(n, k)
    dst = _index(n, k - 1)
    mat = np.zeros((len(dst), len(src)))
    for col, e in enumerate(src):
        if e[j] > 0:
            t = list(e)
            t[j] -= 1
            mat[dst[tuple(t)], col] = e[j]
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def laplacian_matrix(n: int, k: int) -> np.ndarray:
    if k < 2:
        return np.zeros((0, len(monomial_exponents(n, k))))
    mat = sum(derivative_matrix(n, k - 1, j) @ derivative_matrix(n, k, j) for j in range(n))
    mat.setflags(write=False)
    return mat


def harmonic_dimension(n: int, k: int) -> int:
    return comb(n + k - 1, k) - (comb(n + k - 3, k - 2) if k >= 2 else 0)


@lru_cache(maxsize=None)
def _harmonic_basis_cached(n: int, k: int) -> np.ndarray:
    m = len(monomial_exponents(n, k))
    if k < 2:
        basis = np.eye(m)
    elif k <= EXACT_MAX_DEGREE:
        lap = sympy.Matrix(laplacian_matrix(n, k).astype(int))
        null = lap.nullspace()
        raw = np.array([[float(v) for v in vec] for vec in null])
        q, _ = np.linalg.qr(raw.T)
        basis = q.T
    else:
        basis = scipy.linalg.null_space(laplacian_matrix(n, k)).T
    basis = np.ascontiguousarray(basis)
    basis.setflags(write=False)
    return basis


def harmonic_basis(n: int, k: int) -> np.ndarray:
    """Orthonormal coefficient basis of degree-k homogeneous harmonic polynomials.

    Rows are coefficient vectors over ``monomial_exponents(n, k)``.  The
    Laplacian kernel is computed in exact rational arithmetic for
    k <= 4 and in floating point beyond; rows are then orthonormalised.
    """
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"need n >= 2, got {n!r}")
    if int(k) != k or k < 0:
        raise InvalidDimensionError(f"need integer degree k >= 0, got {k!r}")
    return _harmonic_basis_cached(int(n), int(k))


@dataclass(frozen=True, eq=False)
class HomogeneousSpinorPoly:
    """C^N-valued homogeneous polynomial of degree k in n variables."""

    n: int
    N: int
    k: int
    coeffs: np.ndarray  # (M_k, N) complex
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (len(monomial_exponents(self.n, self.k)), self.N):
            raise ShapeError(f"coefficient array has shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int, N: int, k: int) -> "HomogeneousSpinorPoly":
        return cls(n, N, k, np.zeros((len(monomial_exponents(n, k)), N), dtype=complex))

    @classmethod
    def from_terms(cls, n: int, N: int, k: int, terms: dict) -> "HomogeneousSpinorPoly":
        """Build from ``{(component, exponent_tuple): coefficient}``."""
        idx = _index(n, k)
        c = np.zeros((len(idx), N), dtype=complex)
        for (comp, exps), val in terms.items():
            c[idx[tuple(exps)], comp] += val
        return cls(n, N, k, c)

    def evaluate(self, points) -> np.ndarray:
        return eval_monomials(self.n, self.k, points) @ self.coeffs

    def derivative(self, j: int) -> "HomogeneousSpinorPoly":
        if self.k == 0:
            return HomogeneousSpinorPoly(self.n, self.N, 0, np.zeros((1, self.N), dtype=complex))
        return HomogeneousSpinorPoly(self.n, self.N, self.k - 1, derivative_matrix(self.n, self.k, j) @ self.coeffs)

    def jacobian(self, points) -> np.ndarray:
        """Array (P, n, N) of partial derivatives."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self.k == 0:
            return np.zeros((pts.shape[0], self.n, self.N), dtype=complex)
        mons = eval_monomials(self.n, self.k - 1, pts)
        return np.stack([mons @ (derivative_matrix(self.n, self.k, j) @ self.coeffs) for j in range(self.n)], axis=1)

    def laplacian_coeffs(self) -> np.ndarray:
        return laplacian_matrix(self.n, self.k) @ self.coeffs

    def laplacian(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self.k < 2:
            return np.zeros((pts.shape[0], self.N), dtype=complex)
        return eval_monomials(self.n, self.k - 2, pts) @ self.laplacian_coeffs()

    def dirac(self, rep) -> "HomogeneousSpinorPoly":
        """Coefficient-level D P = sum_j gamma_j d_j P."""
        if self.k == 0:
            return HomogeneousSpinorPoly(self.n, self.N, 0, np.zeros((1, self.N), dtype=complex))
        out = np.zeros((len(monomial_exponents(self.n, self.k - 1)), self.N), dtype=complex)
        for j in range(self.n):
            out += (derivative_matrix(self.n, self.k, j) @ self.coeffs) @ rep.gammas[j].T
        return HomogeneousSpinorPoly(self.n, self.N, self.k - 1, out)

    def coefficient_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def harmonic_residual(self) -> float:
        return float(np.max(np.abs(self.laplacian_coeffs()), initial=0.0))

    def dirac_residual(self, rep) -> float:
        return float(np.max(np.abs(self.dirac(rep).coeffs), initial=0.0))

    def scaled(self, c) -> "HomogeneousSpinorPoly":
        return HomogeneousSpinorPoly(self.n, self.N, self.k, c * self.coeffs, dict(self.meta))

    def __add__(self, other: "HomogeneousSpinorPoly") -> "HomogeneousSpinorPoly":
        if (self.n, self.N, self.k) != (other.n, other.N, other.k):
            raise ShapeError("cannot add polynomials of different shape")
        return HomogeneousSpinorPoly(self.n, self.N, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def translation_invariance_dim(self, rtol: float = 1e-6) -> int:
        """dim of {y : P(x + y) = P(x) for all x}.

        For homogeneous P this is the common kernel of the directional
        derivatives, computed from the coefficient vectors of d_j P.
        """
        if self.k == 0:
            return self.n
        cols = []
        for j in range(self.n):
            d = self.derivative(j).coeffs.ravel()
            cols.append(np.concatenate([d.real, d.imag]))
        a = np.stack(cols, axis=1)
        s = np.linalg.svd(a, compute_uv=False)
        if s[0] == 0:
            return self.n
        return int(self.n - np.sum(s > rtol * s[0]))

    def to_json(self) -> str:
        exps = monomial_exponents(self.n, self.k)
        comps = []
        for c in range(self.N):
            entry = {}
            for i, e in enumerate(exps):
                v = self.coeffs[i, c]
                if v != 0:
                    entry[",".join(str(int(a)) for a in e)] = [float(v.real), float(v.imag)]
            comps.append(entry)
        return json.dumps({"n": self.n, "N": self.N, "k": self.k, "components": comps}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HomogeneousSpinorPoly":
        obj = json.loads(text)
        terms = {}
        for comp, entry in enumerate(obj["components"]):
            for key, (re, im) in entry.items():
                exps = tuple(int(a) for a in key.split(",")) if key else ()
                terms[(comp, exps)] = complex(re, im)
        return cls.from_terms(obj["n"], obj["N"], obj["k"], terms)


def dirac_harmonic_basis(rep, k: int) -> list[HomogeneousSpinorPoly]:
    """Orthonormal basis of degree-k homogeneous spinor polynomials with D P = 0."""
    n, N = rep.n, rep.fiber_dim
    m = len(monomial_exponents(n, k))
    if k == 0:
        return [HomogeneousSpinorPoly(n, N, 0, np.eye(N, dtype=complex)[i : i + 1]) for i in range(N)]
    # operator on vec(C) with C of shape (m, N), row-major flattening
    op = sum(np.kron(derivative_matrix(n, k, j), rep.gammas[j]) for j in range(n))
    null = scipy.linalg.null_space(op)
    return [HomogeneousSpinorPoly(n, N, k, null[:, i].reshape(m, N)) for i in range(null.shape[1])]


def random_dirac_harmonic(rep, k: int, rng: np.random.Generator) -> HomogeneousSpinorPoly:
    """Seeded combination of the D-harmonic basis, normalised in coefficients."""
    basis = dirac_harmonic_basis(rep, k)
    w = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    c = sum(wi * b.coeffs for wi, b in zip(w, basis))
    c = c / np.linalg.norm(c)
    return HomogeneousSpinorPoly(rep.n, rep.fiber_dim, k, c)


def _sphere_rms(field, center, radii, sphere_order):
    u, w = sphere_rule(field.n, sphere_order)
    out = []
    for r in radii:
        vals = field.evaluate(center + r * u)
        out.append(np.sqrt(np.sum(w * np.sum(np.abs(vals) ** 2, axis=1)) / np.sum(w)))
    return np.array(out)


def loglog_slope(radii, values) -> float:
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


def fit_leading_term(
    field,
    center,
    k: int,
    fit_radius: float | None = None,
    radial_nodes: int = 8,
    sphere_order: int | None = None,
    slope_tol: float = 0.2,
    max_condition: float = 1e10,
) -> HomogeneousSpinorPoly:
    """Least-squares projection of ``field`` near ``center`` onto degree-k harmonics.

    Samples lie on Gauss-distributed spheres inside ``B_fit_radius(center)``;
    rows are weighted by the quadrature weight and by ``r**-k``.  The
    returned polynomial is in coordinates relative to ``center``.
    """
    n = field.n
    center = np.asarray(center, dtype=float)
    if fit_radius is None:
        fit_radius = 0.1 * field.grid.radius
    radii = fit_radius * 2.0 ** -np.arange(4)
    rms = _sphere_rms(field, center, radii, sphere_order)
    if not np.all(rms > 0):
        raise DegenerateFieldError("field vanishes on a fit sphere")
    slope = loglog_slope(radii, rms)
    if slope < k - slope_tol:
        raise WrongOrderError(f"field decays like r^{slope:.3f} near center, below order {k}")

    basis = harmonic_basis(n, k)
    rho, wr = gauss_interval(0.0, fit_radius, radial_nodes)
    u, wu = sphere_rule(n, sphere_order)
    pts = (rho[:, None, None] * u[None, :, :]).reshape(-1, n)
    wq = ((wr * rho ** (n - 1))[:, None] * wu[None, :]).ravel()
    rw = np.sqrt(wq) * np.repeat(rho ** (-float(k)), len(wu))
    design = (eval_monomials(n, k, pts) @ basis.T) * rw[:, None]
    rhs = field.evaluate(center + pts) * rw[:, None]
    cond = np.linalg.cond(design)
    if not np.isfinite(cond) or cond > max_condition:
        raise FitError(f"normal matrix ill-conditioned (cond = {cond:.3e})")
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    coeffs = basis.T @ sol
    return HomogeneousSpinorPoly(
        n,
        field.N,
        k,
        coeffs,
        meta={"fit_radius": float(fit_radius), "weight": f"r^-{k}", "slope": slope, "condition": float(cond)},
    )
