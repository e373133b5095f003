"""Almgren-type frequency function of spinor fields.

For a centre x and radius r,

    H(r) = int_{dB_r} |psi|^2 ds_r,
    D(r) = int_{dB_r} Re <d_nu psi, psi> ds_r,
    N(r) = r D(r) / H(r),

where ds_r carries the model-metric area factor sqrt(det w) on curved
space forms.  The r -> 0 limit of N is the vanishing order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from spinodal.errors import DegenerateFieldError, NoLimitError
from spinodal.fields import SpinorField, sphere_trace
from spinodal.geometry import ModelMetric

H_REJECT = 1e-20
SNAP_TOL = 0.1


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SPINODAL_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items) -> list:
    """Ordered map, threaded up to SPINODAL_THREADS workers."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _metric_factor(metric: ModelMetric | None, r: float) -> float:
    if metric is None or metric.is_flat:
        return 1.0
    return float(metric.area_factor(r))


def boundary_height(f: SpinorField, metric: ModelMetric | None, center, r: float, order=None, method="auto") -> float:
    tr = sphere_trace(f, center, r, order, method)
    return tr.mass() * _metric_factor(metric, r)


def boundary_flux(f: SpinorField, metric: ModelMetric | None, center, r: float, order=None, method="auto") -> float:
    tr = sphere_trace(f, center, r, order, method)
    return tr.flux() * _metric_factor(metric, r)


@dataclass(frozen=True)
class OrderEstimate:
    value: float  # extrapolated limit
    uncertainty: float
    snapped: int | None
    rate: float | None = None  # fitted exponent of N(r) - N(0) ~ r^rate

    def __float__(self):
        return float(self.snapped if self.snapped is not None else self.value)


@dataclass(frozen=True, eq=False)
class FrequencyProfile:
    center: np.ndarray
    radii: np.ndarray
    H: np.ndarray
    Dnum: np.ndarray
    N: np.ndarray
    metric: ModelMetric
    rejected: list = field(default_factory=list)
    order_estimate: OrderEstimate | None = None

    @property
    def n(self) -> int:
        return self.center.size

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [(float(r), float(h), float(d), float(nv)) for r, h, d, nv in zip(self.radii, self.H, self.Dnum, self.N)]


def frequency_profile(
    f: SpinorField,
    metric: ModelMetric | None,
    center,
    radii,
    order: int | None = None,
    method: str = "auto",
) -> FrequencyProfile:
    """H, D and N at each radius; radii with negligible H are dropped."""
    center = np.asarray(center, dtype=float)
    metric = ModelMetric.flat(f.n) if metric is None else metric
    radii = np.sort(np.asarray(radii, dtype=float))
    floor_h = H_REJECT * f.sup_norm() ** 2

    def one(r):
        tr = sphere_trace(f, center, float(r), order, method)
        fac = _metric_factor(metric, float(r))
        return tr.mass() * fac, tr.flux() * fac

    results = parallel_map(one, radii)
    keep_r, keep_h, keep_d, rejected = [], [], [], []
    for r, (h, d) in zip(radii, results):
        if not h > floor_h:
            rejected.append(float(r))
            continue
        keep_r.append(r)
        keep_h.append(h)
        keep_d.append(d)
    if not keep_r:
        raise DegenerateFieldError("H vanishes at every radius; field is zero near the center")
    r_arr = np.array(keep_r)
    h_arr = np.array(keep_h)
    d_arr = np.array(keep_d)
    prof = FrequencyProfile(center, r_arr, h_arr, d_arr, r_arr * d_arr / h_arr, metric, rejected)
    try:
        est = vanishing_order(prof)
    except (NoLimitError, ValueError):
        est = None
    object.__setattr__(prof, "order_estimate", est)
    return prof


def dyadic_radii(r0: float, count: int) -> np.ndarray:
    return r0 * 2.0 ** -np.arange(count)[::-1]


def vanishing_order(profile: FrequencyProfile) -> OrderEstimate:
    """Richardson extrapolation of N(r) to r = 0 over geometric radii.

    With N(r) ~ N0 + c r^a, three consecutive radii with ratio q give
    q^a = d1 / d2 from the successive differences; the limit is
    N(r_min) - d2 / (q^a - 1).  The same estimate from the next triple
    supplies the uncertainty.  A sign change in the differences that is
    larger than rounding is reported as non-convergence.
    """
    r = profile.radii
    Nv = profile.N
    if len(r) < 4:
        raise ValueError("vanishing order needs at least four radii")
    ratios = r[1:] / r[:-1]
    if np.ptp(ratios) > 1e-6 * ratios[0]:
        raise ValueError("vanishing order needs geometric radii")
    q = float(ratios[0])

    def estimate(n0, n1, n2):
        # n0 at the smallest radius
        d1 = n2 - n1
        d2 = n1 - n0
        floor_ = 1e-11 * (1.0 + abs(n0))
        if abs(d2) <= floor_ and abs(d1) <= floor_:
            return n0, None
        if d1 * d2 < 0 and min(abs(d1), abs(d2)) > 1e-6 * (1.0 + abs(n0)):
            raise NoLimitError(f"frequency oscillates near r = 0 (differences {d1:.3e}, {d2:.3e})")
        if d2 == 0 or d1 / d2 <= 1.0 + 1e-9:
            return n0, None
        rho = d1 / d2
        return n0 - d2 / (rho - 1.0), math.log(rho) / math.log(q)

    main, rate = estimate(Nv[0], Nv[1], Nv[2])
    alt, _ = estimate(Nv[1], Nv[2], Nv[3])
    unc = abs(main - alt) + 1e-12 * (1.0 + abs(main))
    if rate is None:
        unc = max(unc, abs(Nv[1] - Nv[0]))
        main = float(Nv[0])
    nearest = round(main)
    snapped = int(nearest) if abs(main - nearest) <= SNAP_TOL else None
    return OrderEstimate(float(main), float(unc), snapped, rate)


@dataclass(frozen=True)
class AuditResult:
    beta: float
    C_N: float
    C_AM_fit: float | None
    violations: list
    cap: float

    @property
    def passed(self) -> bool:
        return self.C_AM_fit is not None and not self.violations

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "C_N": self.C_N,
            "C_AM_fit": self.C_AM_fit,
            "violations": [list(v) for v in self.violations],
        }


def adjusted_frequency(profile: FrequencyProfile, C_AM: float, beta: float = 0.5, C_N: float = 1.0) -> np.ndarray:
    r = profile.radii
    return np.exp(C_AM / (beta + 1.0) * r ** (beta + 1.0)) * (profile.N + C_N)


def _monotone_violations(profile, C, beta, C_N, slack):
    a = adjusted_frequency(profile, C, beta, C_N)
    bad = []
    for i in range(len(a) - 1):
        if a[i + 1] - a[i] < -slack * max(1.0, abs(a[i])):
            bad.append((float(profile.radii[i]), float(profile.radii[i + 1])))
    return bad


def monotonicity_audit(
    profile: FrequencyProfile,
    beta: float = 0.5,
    C_N: float = 1.0,
    cap: float = 1e3,
    resolution: float = 1e-3,
    slack: float = 1e-9,
) -> AuditResult:
    """Smallest C_AM making exp(C_AM s^(beta+1)/(beta+1)) (N(s) + C_N) nondecreasing."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if not C_N > 0:
        raise ValueError("C_N must be positive")
    if not _monotone_violations(profile, 0.0, beta, C_N, slack):
        return AuditResult(beta, C_N, 0.0, [], cap)
    at_cap = _monotone_violations(profile, cap, beta, C_N, slack)
    if at_cap:
        return AuditResult(beta, C_N, None, at_cap, cap)
    lo, hi = 0.0, cap
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _monotone_violations(profile, mid, beta, C_N, slack):
            lo = mid
        else:
            hi = mid
    return AuditResult(beta, C_N, float(hi), [], cap)


def doubling_check(profile: FrequencyProfile, s: float, t: float, C: float | None = None) -> float:
    """log of e^{-C t^2/2} H(t) minus log of e^{-C s^2/2} (t/s)^{n-1+2 sup N} H(s).

    ``sup N`` is the maximum over stored radii in [s, t]; C defaults to the
    metric's C_coord.
    """
    r = profile.radii

    def locate(x):
        hits = np.nonzero(np.abs(r - x) <= 1e-12 * max(1.0, abs(x)))[0]
        if not len(hits):
            raise ValueError(f"radius {x} is not in the profile")
        return int(hits[0])

    i, j = locate(s), locate(t)
    if i == j:
        return 0.0
    if r[i] > r[j]:
        raise ValueError("doubling check needs s < t")
    C = profile.metric.c_coord if C is None else C
    supN = float(np.max(profile.N[i : j + 1]))
    n = profile.n
    lhs = math.log(profile.H[j]) - C * t * t / 2.0
    rhs = math.log(profile.H[i]) - C * s * s / 2.0 + (n - 1 + 2 * supN) * math.log(t / s)
    return lhs - rhs


def almost_positivity(profile: FrequencyProfile, C_N: float = 1.0) -> np.ndarray:
    """r D(r) + C_N H(r) at every stored radius."""
    return profile.radii * profile.Dnum + C_N * profile.H


def h_prime_residual(f: SpinorField, metric: ModelMetric | None, center, r: float, dr: float | None = None, order=None) -> float:
    """|H'(r) - [(n-1)/r H + 2 D + int |psi|^2 W ds]| relative to H/r.

    H' is a 4th-order central difference with step ``dr``.
    """
    metric = ModelMetric.flat(f.n) if metric is None else metric
    dr = 1e-3 * r if dr is None else dr

    def H(x):
        return boundary_height(f, metric, center, x, order)

    num = (-H(r + 2 * dr) + 8 * H(r + dr) - 8 * H(r - dr) + H(r - 2 * dr)) / (12 * dr)
    h = H(r)
    d = boundary_flux(f, metric, center, r, order)
    W = 0.0 if metric.is_flat else float(metric.radial_warp(r)[1])
    formula = (f.n - 1) / r * h + 2 * d + W * h
    return float(abs(num - formula) / (h / r))


@dataclass(frozen=True, eq=False)
class ScanResult:
    centers: np.ndarray
    orders: list  # OrderEstimate or None per centre
    max_order: float
    max_N: float
    N_at_r_am: np.ndarray

    def c4_ratio(self) -> float:
        return float(self.max_N / (np.max(self.N_at_r_am) + 1.0))


def uniform_order_scan(
    f: SpinorField,
    metric: ModelMetric | None,
    centers,
    r_am: float,
    levels: int = 8,
    order: int | None = None,
) -> ScanResult:
    """Vanishing order at each centre from dyadic radii r_am 2^-j, j < levels."""
    centers = np.asarray(centers, dtype=float).reshape(-1, f.n)
    radii = dyadic_radii(r_am, levels)

    def one(c):
        try:
            prof = frequency_profile(f, metric, c, radii, order)
        except DegenerateFieldError:
            return None, float("nan"), float("nan")
        return prof.order_estimate, float(np.max(prof.N)), float(prof.N[-1])

    results = parallel_map(one, centers)
    orders = [res[0] for res in results]
    vals = [float(o) for o in orders if o is not None]
    max_order = max(vals) if vals else float("nan")
    return ScanResult(
        centers,
        orders,
        max_order,
        float(np.nanmax([res[1] for res in results])),
        np.array([res[2] for res in results]),
    )
