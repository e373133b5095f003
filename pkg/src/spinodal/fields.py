"""Spinor fields on Euclidean ball grids.

A field lives on the Cartesian grid ``h * Z^n`` restricted to the cube
``[-R, R]^n``; the ball ``|x| <= R`` is the nominal domain.  Fields built
from a closed form keep their analytic evaluator (value, Jacobian and
Laplacian) and only sample the grid when grid data is requested, which
keeps n = 4 cheap.

Numerical conventions
---------------------
* derivatives: 4th-order centred stencils, two-node band lost per side;
* off-grid values: tensor-product cubic Lagrange interpolation on the
  4^n surrounding nodes, derivatives taken from the same interpolant;
* sphere traces use the analytic evaluator when present and the
  interpolant otherwise (``method="grid"`` forces the latter).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from spinodal.clifford import CliffordRep
from spinodal.errors import (
    CalibrationError,
    ConstructionError,
    DegenerateFieldError,
    GeometryError,
    ShapeError,
    StencilError,
)
from spinodal.harmonic import HomogeneousSpinorPoly
from spinodal.quadrature import ball_rule, default_sphere_order, pairwise_sum, sphere_area, sphere_rule

FORMAT_HEADER = "spinodal-field v1"
DEGENERATE_SUP = 1e-14
STENCIL_BAND = 2


@dataclass(frozen=True)
class GridSpec:
    n: int
    radius: float
    h: float
    sphere_order: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ShapeError("grid dimension must be >= 2")
        if not (self.radius > 0 and self.h > 0):
            raise ShapeError("radius and mesh width must be positive")
        if self.h >= self.radius:
            raise StencilError("mesh width must be smaller than the radius")

    @cached_property
    def half_width(self) -> int:
        return int(np.floor(self.radius / self.h + 1e-9))

    @cached_property
    def axis(self) -> np.ndarray:
        a = self.h * np.arange(-self.half_width, self.half_width + 1)
        a.setflags(write=False)
        return a

    @property
    def m(self) -> int:
        return len(self.axis)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.n

    def points(self) -> np.ndarray:
        """All cube nodes, shape ``shape + (n,)``."""
        mesh = np.meshgrid(*([self.axis] * self.n), indexing="ij")
        return np.stack(mesh, axis=-1)

    def ball_mask(self) -> np.ndarray:
        return np.sum(self.points() ** 2, axis=-1) <= self.radius**2 * (1 + 1e-12)

    def refined(self, factor: int = 2) -> "GridSpec":
        return replace(self, h=self.h / factor)

    def trace_admissible(self, center, r: float) -> bool:
        """Whether B_r(center) stays inside the ball minus the stencil band."""
        c = np.asarray(center, dtype=float)
        return bool(np.linalg.norm(c) + r <= self.radius - STENCIL_BAND * self.h + 1e-12)


class Analytic(NamedTuple):
    value: Callable
    jacobian: Callable | None = None
    laplacian: Callable | None = None


@dataclass(frozen=True, eq=False)
class SpinorField:
    """C^N-valued field sampled on ``grid`` (lazily, if analytic)."""

    grid: GridSpec
    rep: CliffordRep
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    analytic: Analytic | None = None
    data: np.ndarray | None = None  # cube values, NaN where unavailable

    def __post_init__(self):
        if self.grid.n != self.rep.n:
            raise ShapeError("grid and representation dimensions differ")
        if self.analytic is None and self.data is None:
            raise ConstructionError("field needs an evaluator or sampled values")
        if self.data is not None:
            d = np.asarray(self.data, dtype=complex)
            if d.shape != self.grid.shape + (self.rep.fiber_dim,):
                raise ShapeError(f"sample array has shape {d.shape}")
            d.setflags(write=False)
            object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def N(self) -> int:
        return self.rep.fiber_dim

    @property
    def has_analytic(self) -> bool:
        return self.analytic is not None

    @cached_property
    def values(self) -> np.ndarray:
        """Samples on every cube node, shape ``grid.shape + (N,)``."""
        if self.data is not None:
            return self.data
        pts = self.grid.points().reshape(-1, self.n)
        vals = np.asarray(self.analytic.value(pts), dtype=complex).reshape(self.grid.shape + (self.N,))
        vals.setflags(write=False)
        return vals

    @cached_property
    def valid(self) -> np.ndarray:
        return np.all(np.isfinite(self.values), axis=-1)

    # point evaluation ---------------------------------------------------
    def evaluate(self, points, method: str = "auto") -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self._use_analytic(method):
            return np.asarray(self.analytic.value(pts), dtype=complex)
        return interpolate(self, pts)[0]

    def jacobian(self, points, method: str = "auto") -> np.ndarray:
        """Partial derivatives, shape (P, n, N)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self._use_analytic(method) and self.analytic.jacobian is not None:
            return np.asarray(self.analytic.jacobian(pts), dtype=complex)
        return interpolate(self, pts, derivatives=True)[1]

    def laplacian(self, points, method: str = "auto") -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self._use_analytic(method) and self.analytic.laplacian is not None:
            return np.asarray(self.analytic.laplacian(pts), dtype=complex)
        return interpolate(stencil_laplacian(self), pts)[0]

    def dirac(self, points, method: str = "auto") -> np.ndarray:
        """D psi = sum_j gamma_j d_j psi at off-grid points."""
        jac = self.jacobian(points, method)
        return np.einsum("jab,pjb->pa", self.rep.gammas, jac)

    def _use_analytic(self, method: str) -> bool:
        if method == "grid":
            return False
        if method == "analytic" and self.analytic is None:
            raise ConstructionError("field has no analytic evaluator")
        return self.analytic is not None

    # derived fields -----------------------------------------------------
    def as_sampled(self) -> "SpinorField":
        """Copy that forgets the closed form and works from grid samples only."""
        return SpinorField(self.grid, self.rep, self.kind, dict(self.params), None, self.values)

    def on_grid(self, grid: GridSpec) -> "SpinorField":
        if self.analytic is None:
            raise ConstructionError("only analytic fields can be resampled")
        return SpinorField(grid, self.rep, self.kind, dict(self.params), self.analytic)

    def scaled(self, c) -> "SpinorField":
        a = self.analytic
        an = None
        if a is not None:
            an = Analytic(
                lambda p: c * a.value(p),
                None if a.jacobian is None else (lambda p: c * a.jacobian(p)),
                None if a.laplacian is None else (lambda p: c * a.laplacian(p)),
            )
        data = None if self.data is None else c * self.data
        return SpinorField(self.grid, self.rep, self.kind, {**self.params, "scale_factor": complex(c)}, an, data)

    def shifted(self, a_vec) -> "SpinorField":
        """The translate x -> psi(x - a)."""
        if self.analytic is None:
            raise ConstructionError("only analytic fields can be translated")
        a_vec = np.asarray(a_vec, dtype=float)
        an = self.analytic
        return SpinorField(
            self.grid,
            self.rep,
            self.kind,
            {**self.params, "shift": a_vec.tolist()},
            Analytic(
                lambda p: an.value(np.asarray(p) - a_vec),
                None if an.jacobian is None else (lambda p: an.jacobian(np.asarray(p) - a_vec)),
                None if an.laplacian is None else (lambda p: an.laplacian(np.asarray(p) - a_vec)),
            ),
        )

    def __add__(self, other: "SpinorField") -> "SpinorField":
        if self.analytic is None or other.analytic is None:
            return SpinorField(self.grid, self.rep, "custom", {"sum": True}, None, self.values + other.values)
        a, b = self.analytic, other.analytic
        jac = None
        if a.jacobian is not None and b.jacobian is not None:
            jac = lambda p: a.jacobian(p) + b.jacobian(p)  # noqa: E731
        lap = None
        if a.laplacian is not None and b.laplacian is not None:
            lap = lambda p: a.laplacian(p) + b.laplacian(p)  # noqa: E731
        return SpinorField(
            self.grid, self.rep, "custom", {"sum": [self.kind, other.kind]}, Analytic(lambda p: a.value(p) + b.value(p), jac, lap)
        )

    def sup_norm(self) -> float:
        if self.analytic is None:
            return float(np.max(np.abs(self.values[self.valid]), initial=0.0))
        pts = _probe_points(self.grid)
        return float(np.max(np.abs(self.evaluate(pts))))

    # serialization ------------------------------------------------------
    def to_text(self) -> str:
        g = self.grid
        lines = [f"{FORMAT_HEADER}; {g.n}; {self.N}; {g.radius!r}; {g.h!r}"]
        mask = g.ball_mask()
        vals = self.values
        for idx in zip(*np.nonzero(mask)):
            v = vals[idx]
            nums = []
            for z in v:
                nums.append(repr(float(z.real)))
                nums.append(repr(float(z.imag)))
            lines.append(" ".join(str(int(i)) for i in idx) + " " + " ".join(nums))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, rep: CliffordRep) -> "SpinorField":
        rows = text.splitlines()
        head = [s.strip() for s in rows[0].split(";")]
        if head[0] != FORMAT_HEADER or len(head) != 5:
            raise ConstructionError("not a spinodal-field v1 document")
        n, N = int(head[1]), int(head[2])
        grid = GridSpec(n, float(head[3]), float(head[4]))
        if rep.n != n or rep.fiber_dim != N:
            raise ShapeError("representation does not match serialized field")
        data = np.full(grid.shape + (N,), np.nan + 0j, dtype=complex)
        for line in rows[1:]:
            if not line.strip():
                continue
            parts = line.split()
            idx = tuple(int(p) for p in parts[:n])
            nums = [float(p) for p in parts[n:]]
            data[idx] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
        return cls(grid, rep, "custom", {"source": "text"}, None, data)


def _probe_points(grid: GridSpec) -> np.ndarray:
    pts, _ = ball_rule(grid.n, grid.radius, radial_nodes=6, sphere_order=min(8, default_sphere_order(grid.n)))
    return np.vstack([np.zeros((1, grid.n)), pts])


def _check_nondegenerate(f: SpinorField) -> SpinorField:
    if not f.sup_norm() >= DEGENERATE_SUP:
        raise ConstructionError("field is numerically zero (sup norm below 1e-14)")
    return f


# ---------------------------------------------------------------------------
# manufactured fields


def plane_wave_eigenvector(rep: CliffordRep, xi, sign: int = 1) -> tuple[np.ndarray, float]:
    """Unit u with i gamma(xi) u = sign |xi| u, and the eigenvalue."""
    xi = np.asarray(xi, dtype=float)
    mat = 1j * rep.gamma(xi)
    w, v = np.linalg.eigh(mat)
    j = int(np.argmax(w)) if sign > 0 else int(np.argmin(w))
    return v[:, j], float(w[j])


def _radial_power(p: float):
    """Value, gradient factor and Laplacian factor of |x|^p (safe at 0)."""

    def val(x):
        r = np.linalg.norm(x, axis=-1)
        return r**p

    def grad_factor(x):  # d_j |x|^p = p |x|^(p-2) x_j
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = p * r ** (p - 2.0)
        return np.where(r > 0, out, 0.0)

    def lap_factor(x, n):
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = p * (p + n - 2.0) * r ** (p - 2.0)
        return np.where(r > 0, out, 0.0)

    return val, grad_factor, lap_factor


def _poly_analytic(poly: HomogeneousSpinorPoly, center) -> Analytic:
    c = np.asarray(center, dtype=float)
    return Analytic(
        lambda p: poly.evaluate(np.asarray(p) - c),
        lambda p: poly.jacobian(np.asarray(p) - c),
        lambda p: poly.laplacian(np.asarray(p) - c),
    )


def _random_smooth(rep: CliffordRep, seed: int, modes: int, max_wavenumber: float) -> Analytic:
    rng = np.random.default_rng(seed)
    n, N = rep.n, rep.fiber_dim
    k = rng.uniform(-max_wavenumber, max_wavenumber, size=(modes, n))
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    amp = (rng.standard_normal((modes, N)) + 1j * rng.standard_normal((modes, N))) / np.sqrt(2 * modes)
    offset = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * 0.5

    def value(p):
        e = np.exp(1j * (np.asarray(p) @ k.T + phase))
        return offset + e @ amp

    def jac(p):
        e = np.exp(1j * (np.asarray(p) @ k.T + phase))
        return np.einsum("pm,mj,mb->pjb", 1j * e, k, amp)

    def lap(p):
        e = np.exp(1j * (np.asarray(p) @ k.T + phase))
        return (e * -np.sum(k * k, axis=1)) @ amp

    return Analytic(value, jac, lap)


def _bubble_parts(rep: CliffordRep, u, center):
    """Unit-constant bubble (1+|x|^2)^(-n/2) (1 - gamma(x)) u with derivatives."""
    n = rep.n
    u = np.asarray(u, dtype=complex)
    c0 = np.asarray(center, dtype=float)
    gu = np.einsum("jab,b->ja", rep.gammas, u)  # gamma_j u, shape (n, N)

    def parts(p):
        x = np.asarray(p, dtype=float) - c0
        s = np.sum(x * x, axis=-1)
        f = (1.0 + s) ** (-0.5 * n)
        fp = -0.5 * n * (1.0 + s) ** (-0.5 * n - 1.0)
        fpp = 0.5 * n * (0.5 * n + 1.0) * (1.0 + s) ** (-0.5 * n - 2.0)
        spinor = u[None, :] - x @ gu  # (1 - gamma(x)) u
        return x, s, f, fp, fpp, spinor

    def value(p):
        _, _, f, _, _, spinor = parts(p)
        return f[:, None] * spinor

    def jac(p):
        x, _, f, fp, _, spinor = parts(p)
        da = 2.0 * x * fp[:, None]  # (P, n)
        return da[:, :, None] * spinor[:, None, :] - f[:, None, None] * gu[None, :, :]

    def lap(p):
        x, s, f, fp, fpp, spinor = parts(p)
        lap_a = 2.0 * n * fp + 4.0 * s * fpp
        da = 2.0 * x * fp[:, None]
        return lap_a[:, None] * spinor - 2.0 * (da @ gu)

    return value, jac, lap


def calibrate_bubble(rep: CliffordRep, u, grid: GridSpec, center=None) -> tuple[float, float]:
    """Fit c in c (1+|x|^2)^(-n/2) (1 - gamma(x)) u against D psi = |psi|^(2/(n-1)) psi.

    With psi = c * phi the equation reads c D phi = c^(1+q) |phi|^q phi,
    q = 2/(n-1), so t = c^q is the least-squares ratio of the two sides on a
    ball sample.  Returns ``(c, relative sup residual)``.
    """
    n = rep.n
    q = 2.0 / (n - 1)
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    value, jac, _ = _bubble_parts(rep, u, center)
    pts = center + _probe_points(grid)
    phi = value(pts)
    dphi = np.einsum("jab,pjb->pa", rep.gammas, jac(pts))
    rhs = np.linalg.norm(phi, axis=1)[:, None] ** q * phi
    t = float(np.real(np.vdot(rhs.ravel(), dphi.ravel())) / np.real(np.vdot(rhs.ravel(), rhs.ravel())))
    if not t > 0:
        raise CalibrationError(f"bubble calibration found non-positive scale ({t:.3e})")
    c = t ** (1.0 / q)
    psi = c * phi
    resid = c * dphi - np.linalg.norm(psi, axis=1)[:, None] ** q * psi
    rel = float(np.max(np.abs(resid)) / np.max(np.abs(psi)))
    return c, rel


def synth_field(rep: CliffordRep, grid: GridSpec, kind: str, **params) -> SpinorField:
    """Manufactured fields with known analytic structure.

    Kinds and parameters:

    ``harmonic_poly``
        ``poly`` (HomogeneousSpinorPoly), ``center``; ``require_dirac``
        (default True) insists on D P = 0 at coefficient level.
    ``plane_wave``
        ``xi``, ``u`` (or ``sign`` to pick the eigenvector); requires
        i gamma(xi) u = lambda u with lambda = +-|xi|.
    ``planted``
        ``poly`` P_k, ``u``, ``power`` p, ``scale``, ``center``:
        psi = P_k + scale |x|^p u.
    ``dirac_bubble``
        ``u``, ``center``, ``tol``; the constant is calibrated, never assumed.
    ``custom``
        ``value``/``jacobian``/``laplacian`` callables, or
        ``generator="random_smooth"`` with ``seed``, ``modes``, ``max_wavenumber``.
    """
    n, N = rep.n, rep.fiber_dim
    center = np.asarray(params.get("center", np.zeros(n)), dtype=float)
    meta = {"center": center.tolist()}

    if kind == "harmonic_poly":
        poly = params["poly"]
        if poly.n != n or poly.N != N:
            raise ShapeError("polynomial does not match representation")
        if poly.harmonic_residual() > 1e-10 * max(1.0, poly.coefficient_norm()):
            raise ConstructionError("polynomial components are not harmonic")
        d_res = poly.dirac_residual(rep)
        if params.get("require_dirac", True) and d_res > 1e-10 * max(1.0, poly.coefficient_norm()):
            raise ConstructionError(f"polynomial is not D-harmonic (residual {d_res:.2e})")
        meta.update(degree=poly.k, dirac_residual=d_res)
        f = SpinorField(grid, rep, kind, meta, _poly_analytic(poly, center))

    elif kind == "plane_wave":
        xi = np.asarray(params["xi"], dtype=float)
        if "u" in params:
            u = np.asarray(params["u"], dtype=complex)
            mat = 1j * rep.gamma(xi)
            lam = float(np.real(np.vdot(u, mat @ u)) / np.real(np.vdot(u, u)))
            if np.linalg.norm(mat @ u - lam * u) > 1e-10 * max(1.0, np.linalg.norm(xi)) * np.linalg.norm(u):
                raise ConstructionError("u is not an eigenvector of i gamma(xi)")
        else:
            u, lam = plane_wave_eigenvector(rep, xi, params.get("sign", 1))
        if abs(abs(lam) - np.linalg.norm(xi)) > 1e-10 * max(1.0, np.linalg.norm(xi)):
            raise ConstructionError("eigenvalue is not +-|xi|")
        meta.update(xi=xi.tolist(), eigenvalue=lam, u=[[z.real, z.imag] for z in u])

        def value(p, xi=xi, u=u):
            return np.exp(1j * (np.asarray(p) @ xi))[:, None] * u[None, :]

        def jac(p, xi=xi, u=u):
            return 1j * xi[None, :, None] * value(p)[:, None, :]

        def lap(p, xi=xi):
            return -float(xi @ xi) * value(p)

        f = SpinorField(grid, rep, kind, meta, Analytic(value, jac, lap))

    elif kind == "planted":
        poly = params["poly"]
        u = np.asarray(params["u"], dtype=complex)
        p_exp = float(params["power"])
        scale = float(params.get("scale", 1.0))
        pa = _poly_analytic(poly, center)
        rv, rg, rl = _radial_power(p_exp)

        def value(p):
            x = np.asarray(p) - center
            return pa.value(p) + scale * rv(x)[:, None] * u[None, :]

        def jac(p):
            x = np.asarray(p) - center
            return pa.jacobian(p) + scale * (rg(x)[:, None] * x)[:, :, None] * u[None, None, :]

        def lap(p):
            x = np.asarray(p) - center
            return pa.laplacian(p) + scale * rl(x, n)[:, None] * u[None, :]

        meta.update(degree=poly.k, power=p_exp, scale=scale)
        f = SpinorField(grid, rep, kind, meta, Analytic(value, jac, lap))

    elif kind == "dirac_bubble":
        u = np.asarray(params.get("u", np.eye(N)[0]), dtype=complex)
        tol = float(params.get("tol", 1e-8))
        c, rel = calibrate_bubble(rep, u, grid, center)
        if rel > tol:
            raise CalibrationError(f"bubble residual {rel:.3e} exceeds tolerance {tol:.1e}")
        value, jac, lap = _bubble_parts(rep, u, center)
        meta.update(constant=c, residual=rel)
        f = SpinorField(
            grid, rep, kind, meta, Analytic(lambda p: c * value(p), lambda p: c * jac(p), lambda p: c * lap(p))
        )

    elif kind == "custom":
        if params.get("generator") == "random_smooth":
            seed = int(params.get("seed", 0))
            modes = int(params.get("modes", 6))
            kmax = float(params.get("max_wavenumber", 3.0))
            meta.update(generator="random_smooth", seed=seed, modes=modes, max_wavenumber=kmax)
            f = SpinorField(grid, rep, kind, meta, _random_smooth(rep, seed, modes, kmax))
        elif "values" in params:
            f = SpinorField(grid, rep, kind, meta, None, params["values"])
        else:
            an = Analytic(params["value"], params.get("jacobian"), params.get("laplacian"))
            f = SpinorField(grid, rep, kind, meta, an)
    else:
        raise ConstructionError(f"unknown field kind {kind!r}")

    return _check_nondegenerate(f)


def polynomial_field(rep: CliffordRep, grid: GridSpec, poly: HomogeneousSpinorPoly, center=None) -> SpinorField:
    """Componentwise-harmonic polynomial field without the D-harmonic requirement."""
    return synth_field(rep, grid, "harmonic_poly", poly=poly, require_dirac=False, center=np.zeros(rep.n) if center is None else center)


# ---------------------------------------------------------------------------
# stencils


def _check_stencil(grid: GridSpec):
    if grid.m < 2 * STENCIL_BAND + 1:
        raise StencilError(f"grid with {grid.m} nodes per axis is too coarse for the 5-point stencil")


def _shift(a: np.ndarray, axis: int, k: int) -> np.ndarray:
    """a[i + k] along ``axis`` on the index range [2, m - 2)."""
    m = a.shape[axis]
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(STENCIL_BAND + k, m - STENCIL_BAND + k)
    return a[tuple(sl)]


def _pad_band(core: np.ndarray, axis: int) -> np.ndarray:
    pad = [(0, 0)] * core.ndim
    pad[axis] = (STENCIL_BAND, STENCIL_BAND)
    return np.pad(core, pad, constant_values=np.nan)


def stencil_derivative(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order centred first derivative; NaN on the two-node boundary band."""
    core = (-_shift(values, axis, 2) + 8 * _shift(values, axis, 1) - 8 * _shift(values, axis, -1) + _shift(values, axis, -2)) / (12.0 * h)
    return _pad_band(core, axis)


def stencil_second(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    core = (
        -_shift(values, axis, 2)
        + 16 * _shift(values, axis, 1)
        - 30 * _shift(values, axis, 0)
        + 16 * _shift(values, axis, -1)
        - _shift(values, axis, -2)
    ) / (12.0 * h * h)
    return _pad_band(core, axis)


def stencil_gradient(f: SpinorField) -> np.ndarray:
    """Grid partial derivatives, shape ``grid.shape + (n, N)``."""
    _check_stencil(f.grid)
    return np.stack([stencil_derivative(f.values, f.grid.h, j) for j in range(f.n)], axis=-2)


def apply_dirac(f: SpinorField) -> SpinorField:
    """Stencil Dirac operator sum_j gamma_j d_j psi on the grid.

    The result carries NaN (invalid) on the stencil band of every axis.
    """
    _check_stencil(f.grid)
    out = np.zeros(f.values.shape, dtype=complex)
    for j in range(f.n):
        d = stencil_derivative(f.values, f.grid.h, j)
        out = out + d @ f.rep.gammas[j].T
    return SpinorField(f.grid, f.rep, "custom", {"derived": "dirac_stencil", "source": f.kind}, None, out)


def stencil_laplacian(f: SpinorField) -> SpinorField:
    _check_stencil(f.grid)
    out = sum(stencil_second(f.values, f.grid.h, j) for j in range(f.n))
    return SpinorField(f.grid, f.rep, "custom", {"derived": "laplacian_stencil", "source": f.kind}, None, out)


# ---------------------------------------------------------------------------
# interpolation


def _cubic_weights(t: np.ndarray):
    """Lagrange weights for nodes -1, 0, 1, 2 at offset t, and their derivatives."""
    w = np.stack(
        [
            -t * (t - 1) * (t - 2) / 6.0,
            (t + 1) * (t - 1) * (t - 2) / 2.0,
            -(t + 1) * t * (t - 2) / 2.0,
            (t + 1) * t * (t - 1) / 6.0,
        ],
        axis=-1,
    )
    dw = np.stack(
        [
            -(3 * t * t - 6 * t + 2) / 6.0,
            (3 * t * t - 4 * t - 1) / 2.0,
            -(3 * t * t - 2 * t - 2) / 2.0,
            (3 * t * t - 1) / 6.0,
        ],
        axis=-1,
    )
    return w, dw


def interpolate(f: SpinorField, points: np.ndarray, derivatives: bool = False):
    """Tensor cubic interpolation of grid samples; optionally its gradient.

    Returns ``(values (P, N), jacobian (P, n, N) or None)``.
    """
    return interpolate_array(f.grid, f.values, points, derivatives)


def interpolate_array(g: GridSpec, vals: np.ndarray, points: np.ndarray, derivatives: bool = False):
    """Cubic interpolation of any array of shape ``grid.shape + (K,)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, g.n)
    s = (pts - g.axis[0]) / g.h
    base = np.floor(s).astype(int)
    base = np.clip(base, 1, g.m - 3)
    t = s - base
    lo = base - 1
    if np.any(s < 1 - 1e-9) or np.any(s > g.m - 2 + 1e-9):
        raise GeometryError("interpolation point too close to the grid boundary")
    w, dw = _cubic_weights(t)  # (P, n, 4)
    P = pts.shape[0]
    K = vals.shape[-1]
    out = np.zeros((P, K), dtype=complex)
    jac = np.zeros((P, g.n, K), dtype=complex) if derivatives else None
    for offs in itertools.product(range(4), repeat=g.n):
        idx = lo + np.array(offs)
        sample = vals[tuple(idx.T)]
        ws = np.stack([w[:, d, o] for d, o in enumerate(offs)], axis=1)  # (P, n)
        weight = np.prod(ws, axis=1)
        out += weight[:, None] * sample
        if derivatives:
            for d, o in enumerate(offs):
                wd = weight_except(ws, d) * dw[:, d, o]
                jac[:, d, :] += wd[:, None] * sample
    if not np.all(np.isfinite(out)):
        raise GeometryError("interpolation stencil touches invalid samples")
    if derivatives:
        jac /= g.h
    return out, jac


def stencil_jacobian(f: SpinorField, points: np.ndarray) -> np.ndarray:
    """Interpolated 4th-order stencil gradient, shape (P, n, N).

    Pointwise O(h^4) and continuous across cells, unlike the derivative of
    the interpolant, which is O(h^3) and jumps between cells.
    """
    grad = stencil_gradient(f)
    flat = grad.reshape(f.grid.shape + (f.n * f.N,))
    return interpolate_array(f.grid, flat, points)[0].reshape(-1, f.n, f.N)


def weight_except(ws: np.ndarray, d: int) -> np.ndarray:
    return np.prod(np.delete(ws, d, axis=1), axis=1)


# ---------------------------------------------------------------------------
# sphere traces


@dataclass(frozen=True)
class SphereTrace:
    center: np.ndarray
    r: float
    nodes: np.ndarray  # (M, n) points on the sphere
    normals: np.ndarray  # (M, n) outward unit normals
    weights: np.ndarray  # (M,) Euclidean surface weights
    values: np.ndarray  # (M, N)
    normal_derivative: np.ndarray  # (M, N)
    method: str

    def integrate(self, integrand: np.ndarray, extra_weight=None) -> float | complex:
        w = self.weights if extra_weight is None else self.weights * extra_weight
        return pairwise_sum(w * integrand)

    def mass(self) -> float:
        return float(self.integrate(np.sum(np.abs(self.values) ** 2, axis=1)))

    def flux(self) -> float:
        return float(self.integrate(np.real(np.sum(self.normal_derivative * np.conj(self.values), axis=1))))


def sphere_trace(f: SpinorField, center, r: float, order: int | None = None, method: str = "auto") -> SphereTrace:
    """Quadrature samples of psi and d_nu psi on the sphere |x - center| = r.

    Weights sum to the sphere area n omega_n r^(n-1).
    """
    center = np.asarray(center, dtype=float)
    if center.shape != (f.n,):
        raise ShapeError("center has wrong dimension")
    if not r > 0:
        raise GeometryError("sphere radius must be positive")
    if not f.grid.trace_admissible(center, r):
        raise GeometryError(f"sphere of radius {r} about {center.tolist()} leaves the grid domain")
    order = f.grid.sphere_order if order is None else order
    u, w = sphere_rule(f.n, order)
    nodes = center + r * u
    if method != "grid" and f.has_analytic:
        vals = f.evaluate(nodes)
        jac = f.jacobian(nodes)
        used = "analytic"
    else:
        vals, jac = interpolate(f, nodes, derivatives=True)
        used = "grid"
    dnu = np.einsum("pj,pjb->pb", u, jac)
    return SphereTrace(center, float(r), nodes, np.asarray(u), w * r ** (f.n - 1), vals, dnu, used)


def sphere_area_r(n: int, r: float) -> float:
    return sphere_area(n) * r ** (n - 1)


def require_nonzero(f: SpinorField):
    if f.sup_norm() < DEGENERATE_SUP:
        raise DegenerateFieldError("field is numerically zero")
