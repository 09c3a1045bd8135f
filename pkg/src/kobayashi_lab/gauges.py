"""Boundary gauge calculus: the weight omega, its integral gauge g, and
derived quantities.

A gauge ``omega`` bounds the Kobayashi-Royden metric from below through
``kappa(x; v) >= c |v| / omega(delta(x))``.  Admissible gauges satisfy

* (a) ``omega(x)/x`` nonincreasing,
* (b) ``omega(x) log(omega(x)/x)`` nondecreasing (near zero),
* (c) ``integral_0^eps (omega(x)/x) log(omega(x)/x) dx`` finite,

and cannot fall below ``sqrt(x)`` near the boundary.  The induced gauge

    g(x) = integral_0^x (omega(t)/t) log(omega(t)/t) dt

is increasing on (0, t_max], where t_max is the crossover omega(t) = t, and
controls both the Euclidean length of near-geodesics and how deep they dive
into the domain.  Power-law gauges ``omega = C t^a`` admit the closed form

    g(x) = C x^a ( log(C)/a + (a - 1)(a log(x) - 1)/a^2 )

which for C = 1, a = 1/2 reduces to ``sqrt(x) (2 + log(1/x))``.

Everything here is pure and value-semantic; profiles tabulate g once at
construction and are safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .domains import Domain, as_point, _unit_vectors


class GaugeError(ValueError):
    """Invalid gauge specification or out-of-range evaluation."""


# ---------------------------------------------------------------------------
# Gauge specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaSpec:
    """A gauge: either a power law C*t^a or a monotone sample table.

    ``c_metric`` is the constant c in the metric lower bound
    ``kappa >= c |v| / omega(delta)``.  Power exponents above 1/2 violate the
    sqrt floor and are admitted only with ``allow_steep=True`` (useful for
    negative tests).
    """

    form: str = "power"  # "power" | "table"
    C: float = 1.0
    a: float = 0.5
    table_t: tuple = ()
    table_w: tuple = ()
    c_metric: float = 0.5
    allow_steep: bool = False

    def __post_init__(self):
        if self.form == "power":
            if self.C <= 0 or self.a <= 0:
                raise GaugeError("power gauge needs C > 0 and exponent > 0")
            if self.a > 0.5 and not self.allow_steep:
                raise GaugeError(
                    "power exponent above 1/2 breaks the sqrt floor; "
                    "pass allow_steep=True to override"
                )
        elif self.form == "table":
            t = np.asarray(self.table_t, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if t.size < 4 or t.size != w.size:
                raise GaugeError("table gauge needs >= 4 matching samples")
            if np.any(t <= 0) or np.any(w <= 0):
                raise GaugeError("table gauge must be positive on (0, t_max]")
            if np.any(np.diff(t) <= 0) or np.any(np.diff(w) < 0):
                raise GaugeError("table gauge samples must be sorted and monotone")
            object.__setattr__(self, "table_t", tuple(float(x) for x in t))
            object.__setattr__(self, "table_w", tuple(float(x) for x in w))
        else:
            raise GaugeError(f"unknown gauge form {self.form!r}")
        if self.c_metric <= 0:
            raise GaugeError("c_metric must be positive")

    # -- evaluation ---------------------------------------------------------

    def value(self, t) -> np.ndarray | float:
        scalar = np.isscalar(t)
        tt = np.asarray(t, dtype=float)
        if np.any(tt <= 0):
            raise GaugeError("omega is defined for t > 0 only")
        if self.form == "power":
            out = self.C * tt**self.a
        else:
            out = np.exp(self._log_interp()(np.log(tt)))
        return float(out) if scalar else out

    def _log_interp(self):
        # shape-preserving interpolation in log-log space keeps monotone
        # order properties; extrapolation continues the end slopes
        t = np.log(np.asarray(self.table_t))
        w = np.log(np.asarray(self.table_w))
        return PchipInterpolator(t, w, extrapolate=True)

    def t_max(self) -> float:
        """Crossover omega(t) = t, the right end of g's monotone range."""
        if self.form == "power":
            if self.a >= 1.0:
                return float(np.max(self.table_t)) if self.table_t else 1.0
            return self.C ** (1.0 / (1.0 - self.a))
        t = np.asarray(self.table_t)
        w = np.asarray(self.table_w)
        above = w > t
        if np.all(above):
            return float(t[-1])
        k = int(np.argmax(~above))
        if k == 0:
            return float(t[0])
        # linear crossover estimate in log space
        f = np.log(w / t)
        lt = np.log(t)
        x = lt[k - 1] + f[k - 1] * (lt[k] - lt[k - 1]) / (f[k - 1] - f[k])
        return float(np.exp(x))

    def head_power(self) -> tuple[float, float]:
        """A local power-law (C, a) matching omega near t = 0."""
        if self.form == "power":
            return self.C, self.a
        t0, t1 = self.table_t[0], self.table_t[1]
        w0, w1 = self.table_w[0], self.table_w[1]
        a = math.log(w1 / w0) / math.log(t1 / t0)
        C = w0 / t0**a
        return C, a

    def descriptor(self) -> dict:
        if self.form == "power":
            return {"omega": {"form": "power", "C": self.C, "a": self.a}, "c_metric": self.c_metric}
        return {
            "omega": {"form": "table", "t": list(self.table_t), "w": list(self.table_w)},
            "c_metric": self.c_metric,
        }


def omega_eval(spec: OmegaSpec, t: float) -> float:
    return float(spec.value(t))


def from_descriptor(desc: dict | str) -> OmegaSpec:
    if isinstance(desc, str):
        desc = json.loads(desc)
    om = desc.get("omega", {})
    form = om.get("form", "power")
    if form == "power":
        return OmegaSpec(
            form="power",
            C=float(om.get("C", 1.0)),
            a=float(om.get("a", 0.5)),
            c_metric=float(desc.get("c_metric", 0.5)),
            allow_steep=bool(om.get("allow_steep", False)),
        )
    return OmegaSpec(
        form="table",
        table_t=tuple(om["t"]),
        table_w=tuple(om["w"]),
        c_metric=float(desc.get("c_metric", 0.5)),
    )


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    ratio_nonincreasing: bool
    log_term_nondecreasing: bool
    integrable: bool
    sqrt_floor: bool
    degenerate_integrand: bool
    extrapolated: bool
    turning_point: float | None
    details: dict

    @property
    def admissible(self) -> bool:
        return (
            self.ratio_nonincreasing
            and self.log_term_nondecreasing
            and self.integrable
            and self.sqrt_floor
            and not self.degenerate_integrand
        )

    def to_json(self) -> str:
        payload = {
            "ratio_nonincreasing": self.ratio_nonincreasing,
            "log_term_nondecreasing": self.log_term_nondecreasing,
            "integrable": self.integrable,
            "sqrt_floor": self.sqrt_floor,
            "degenerate_integrand": self.degenerate_integrand,
            "extrapolated": self.extrapolated,
            "turning_point": self.turning_point,
            "admissible": self.admissible,
            "details": self.details,
        }
        return json.dumps(payload, sort_keys=True)


def natural_check_range(spec: OmegaSpec) -> float:
    """Upper end of the near-boundary range on which conditions are checked.

    For a power law the log-term condition holds exactly on
    (0, e^(-1/a) C^(1/(1-a))]; tables fall back to the crossover point.
    """
    if spec.form == "power" and spec.a < 1.0:
        return math.exp(-1.0 / spec.a) * spec.C ** (1.0 / (1.0 - spec.a))
    return spec.t_max()


def check_admissibility(spec: OmegaSpec, grid: np.ndarray | None = None) -> AdmissibilityReport:
    """Grid-check the gauge conditions; report-only, never raises."""
    if grid is None:
        hi = natural_check_range(spec)
        grid = np.geomspace(hi * 1e-8, hi, 128)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 64:
        raise GaugeError("admissibility grid needs at least 64 points")
    w = np.asarray(spec.value(grid), dtype=float)
    slack = 1e-12

    ratio = w / grid
    cond_a = bool(np.all(np.diff(ratio) <= slack * np.maximum(ratio[:-1], 1.0)))

    # the log-term condition is a near-boundary requirement: it must hold on
    # the small-t half of the grid; a turning point in the upper half is
    # reported but not a failure
    log_term = w * np.log(ratio)
    diffs = np.diff(log_term)
    ok_b = diffs >= -slack * np.maximum(np.abs(log_term[:-1]), 1.0)
    turning = None
    if np.all(ok_b):
        cond_b = True
    else:
        k = int(np.argmax(~ok_b))
        turning = float(grid[k])
        cond_b = k >= len(grid) // 2

    integrand = ratio * np.log(ratio)
    degenerate = bool(np.all(np.abs(integrand) <= 1e-14))
    # integrability by tail extrapolation: slope of log|f| vs log t must
    # exceed -1 on the smallest decade
    head = grid <= grid[0] * 10.0
    if degenerate or np.count_nonzero(head) < 4:
        slope = 0.0
        integrable = not degenerate
    else:
        x = np.log(grid[head])
        y = np.log(np.maximum(np.abs(integrand[head]), 1e-300))
        slope = float(np.polyfit(x, y, 1)[0])
        integrable = slope > -1.0 + 1e-6

    # omega must dominate sqrt near zero: the ratio omega/sqrt(t) must not
    # decay as t -> 0 (fitted log-slope <= 0 up to tolerance)
    rs = w / np.sqrt(grid)
    fit = np.polyfit(np.log(grid), np.log(rs), 1)
    sqrt_floor = bool(fit[0] <= 1e-6)

    return AdmissibilityReport(
        ratio_nonincreasing=cond_a,
        log_term_nondecreasing=cond_b,
        integrable=integrable,
        sqrt_floor=sqrt_floor,
        degenerate_integrand=degenerate,
        extrapolated=True,
        turning_point=turning,
        details={
            "grid_lo": float(grid[0]),
            "grid_hi": float(grid[-1]),
            "tail_slope": slope,
            "sqrt_ratio_slope": float(fit[0]),
        },
    )


# ---------------------------------------------------------------------------
# The g gauge
# ---------------------------------------------------------------------------


def g_power_closed_form(C: float, a: float, x) -> np.ndarray | float:
    """Antiderivative of (C t^a / t) log(C t^a / t) evaluated at x."""
    if np.isscalar(x):
        xf = float(x)
        if xf <= 0.0:
            return 0.0
        if a == 1.0:
            return C * math.log(C) * xf if C != 1.0 else 0.0
        return C * xf**a * (math.log(C) / a + (a - 1.0) * (a * math.log(xf) - 1.0) / a**2)
    xx = np.asarray(x, dtype=float)
    out = np.zeros_like(xx)
    pos = xx > 0
    xp = xx[pos]
    if a == 1.0:
        # integrand reduces to C log(C), linear in x
        out[pos] = C * math.log(C) * xp if C != 1.0 else 0.0
    else:
        out[pos] = C * xp**a * (math.log(C) / a + (a - 1.0) * (a * np.log(xp) - 1.0) / a**2)
    return out


def g_quadrature(spec: OmegaSpec, x: float, rel_tol: float = 1e-9) -> float:
    """Adaptive quadrature of the g integrand with an analytic singular head.

    The head [0, eps] with eps = 1e-6 x is integrated through the local
    power-law model of omega (exact for power gauges); the integrand there
    behaves like t^(a-1) log t, integrable but stiff.
    """
    if x <= 0:
        return 0.0
    eps = 1e-6 * x
    Ch, ah = spec.head_power()
    head = g_power_closed_form(Ch, ah, eps)

    def integrand(t):
        w = spec.value(t)
        r = w / t
        return r * math.log(r)

    bulk, err = quad(integrand, eps, x, epsabs=0.0, epsrel=min(rel_tol, 1e-10), limit=400)
    return head + bulk


@dataclass(frozen=True)
class GaugeProfile:
    """An omega gauge with its admissibility report and tabulated g.

    ``g`` uses the closed form for power gauges and head-corrected adaptive
    quadrature for tables.  Inversion bisects the strictly increasing branch
    on [0, t_max].
    """

    omega: OmegaSpec
    admissibility: AdmissibilityReport = field(repr=False, default=None)
    domain_link: str | None = None
    require_admissible: bool = True
    _g_grid: np.ndarray = field(repr=False, default=None)
    _g_vals: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.admissibility is None:
            object.__setattr__(self, "admissibility", check_admissibility(self.omega))
        if self.require_admissible and not self.admissibility.admissible:
            raise GaugeError("gauge failed admissibility; pass require_admissible=False to force")
        t_hi = self.t_max
        grid = np.geomspace(t_hi * 1e-10, t_hi, 256)
        vals = np.array([self._g_scalar(t) for t in grid])
        if np.any(np.diff(vals) <= 0):
            raise GaugeError("tabulated g is not strictly increasing on its grid")
        ratio = vals / grid
        if np.any(np.diff(ratio) > 1e-9 * np.maximum(ratio[:-1], 1.0)):
            raise GaugeError("g(x)/x fails to be nonincreasing on the grid")
        object.__setattr__(self, "_g_grid", grid)
        object.__setattr__(self, "_g_vals", vals)

    @property
    def t_max(self) -> float:
        return self.omega.t_max()

    @property
    def g_range(self) -> float:
        """Largest value the monotone branch of g attains."""
        return float(self._g_vals[-1]) if self._g_vals is not None else self._g_scalar(self.t_max)

    def _g_scalar(self, x: float) -> float:
        if x <= 0:
            return 0.0
        if self.omega.form == "power":
            return float(g_power_closed_form(self.omega.C, self.omega.a, x))
        return g_quadrature(self.omega, x)

    def g(self, x) -> float | np.ndarray:
        """The gauge integral; valid for any x > 0 (monotone up to t_max)."""
        if np.isscalar(x):
            if x < 0:
                raise GaugeError("g is defined for x >= 0")
            return self._g_scalar(float(x))
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0):
            raise GaugeError("g is defined for x >= 0")
        if self.omega.form == "power":
            return g_power_closed_form(self.omega.C, self.omega.a, xs)
        return np.array([self._g_scalar(float(t)) for t in xs])

    def g_inverse(self, y: float) -> float:
        """Bisection inverse on the increasing branch [0, t_max]."""
        if y < 0:
            raise GaugeError("g_inverse needs y >= 0")
        if y == 0.0:
            return 0.0
        hi = self.t_max
        if y > self.g_range * (1.0 + 1e-12):
            raise GaugeError(f"g_inverse: {y} exceeds g(t_max) = {self.g_range}")
        # run to x-convergence as well: near t_max the derivative of g
        # vanishes and the value tolerance alone leaves the abscissa loose
        tol = 1e-10 * max(1.0, y)
        lo = 0.0
        x = 0.5 * hi
        for _ in range(200):
            x = 0.5 * (lo + hi)
            gx = self._g_scalar(x)
            if abs(gx - y) <= tol and (hi - lo) <= 1e-12 * max(1.0, x):
                return x
            if gx < y:
                lo = x
            else:
                hi = x
        return x

    def g_inverse_clamped(self, y: float) -> tuple[float, bool]:
        """g_inverse with saturation at t_max instead of an error."""
        if y >= self.g_range:
            return self.t_max, y > self.g_range * (1.0 + 1e-12)
        return self.g_inverse(y), False

    def g_inverse_many(self, ys: np.ndarray, clamp: bool = True) -> np.ndarray:
        """Vectorised bisection inverse (saturating at t_max when ``clamp``)."""
        ys = np.asarray(ys, dtype=float)
        if np.any(ys < 0):
            raise GaugeError("g_inverse needs y >= 0")
        if not clamp and np.any(ys > self.g_range * (1.0 + 1e-12)):
            raise GaugeError("g_inverse: value exceeds g(t_max)")
        if self.omega.form != "power":
            return np.array([self.g_inverse(min(y, self.g_range)) for y in ys])
        lo = np.zeros_like(ys)
        hi = np.full_like(ys, self.t_max)
        C, a = self.omega.C, self.omega.a
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            below = g_power_closed_form(C, a, mid) < ys
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        out[ys == 0.0] = 0.0
        return out

    def descriptor(self) -> dict:
        d = self.omega.descriptor()
        if self.domain_link:
            d["domain_link"] = self.domain_link
        return d


def g_eval(profile: GaugeProfile, x: float) -> float:
    if x <= 0:
        raise GaugeError("g_eval needs x > 0")
    return float(profile.g(x))


def g_inverse(profile: GaugeProfile, y: float) -> float:
    return profile.g_inverse(y)


def sqrt_gauge(c_metric: float = 0.5) -> GaugeProfile:
    """The sqrt gauge, the natural choice for disc/ball-like boundaries."""
    return GaugeProfile(OmegaSpec(form="power", C=1.0, a=0.5, c_metric=c_metric))


def power_gauge(m: float, C: float = 1.0, c_metric: float = 0.5) -> GaugeProfile:
    """Gauge t^(1/m) for boundaries of contact order m (m >= 2)."""
    return GaugeProfile(OmegaSpec(form="power", C=C, a=1.0 / m, c_metric=c_metric))


# ---------------------------------------------------------------------------
# h functions (two-branch lower-bound gauge)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HValues:
    h1: float
    h2: float
    h: float
    branch: str  # which of h1/h2 attains the max
    saturated: bool


def h_eval(profile: GaugeProfile, x_pt, y_pt, c: float, domain: Domain) -> HValues:
    """The two lower-bound gauges h1 = c|x-y|/g(delta(x)) and
    h2 = g^{-1}(c|x-y|)/delta(x); h is their max.

    Both sit on the same side of 1, and because g(x)/x decreases the larger
    of the two flips at that point: h2 <= h1 <= 1 or h2 >= h1 >= 1.
    """
    if c <= 0:
        raise GaugeError("h_eval needs c > 0")
    x = as_point(x_pt, domain.dim)
    y = as_point(y_pt, domain.dim)
    dist = float(np.linalg.norm(x - y))
    if dist == 0.0:
        return HValues(0.0, 0.0, 0.0, "h1", False)
    dx = domain.boundary_distance(x)
    h1 = c * dist / profile.g(dx)
    inv, saturated = profile.g_inverse_clamped(c * dist)
    h2 = inv / dx
    if h1 >= h2:
        return HValues(h1, h2, h1, "h1", saturated)
    return HValues(h1, h2, h2, "h2", saturated)


# ---------------------------------------------------------------------------
# Estimators driven by domain/metric sampling
# ---------------------------------------------------------------------------


def m_sup_curve(domain, field, radii: Sequence[float], n_samples: int = 256, seed: int = 0) -> list[float]:
    """Running sup of 1/kappa over unit directions at boundary distance <= r.

    ``field`` must provide ``kappa_lower_batch(points, dirs)``; using the
    certified lower bound for kappa makes 1/kappa an upper-confidence value.
    Band-edge points are always included, and the running max over the sorted
    radii makes the output monotone by construction.
    """
    radii = sorted(float(r) for r in radii)
    if radii[0] <= 0 or radii[-1] >= domain.inradius():
        raise GaugeError("radii must lie in (0, inradius)")
    rng = np.random.default_rng(seed)
    out = []
    running = 0.0
    prev = 0.0
    for r in radii:
        band = (max(prev, 1e-6 * r), r)
        pts = domain.sample_in_band(rng, n_samples, (band[0], band[1]))
        edge = domain.sample_in_band(rng, max(8, n_samples // 8), (r * (1 - 1e-9), r))
        pts = np.vstack([pts, edge])
        dirs = _unit_vectors(rng, len(pts), domain.dim)
        kl = field.kappa_lower_batch(pts, dirs)
        if not np.all(kl > 0):
            raise GaugeError("kappa lower bound vanished; no usable samples")
        running = max(running, float(np.max(1.0 / kl)))
        out.append(running)
        prev = r
    return out


def m_sup_estimate(domain, field, r: float, n_samples: int = 256, seed: int = 0) -> float:
    """Sup of 1/kappa over sampled unit directions within distance r of the boundary."""
    return m_sup_curve(domain, field, [r], n_samples=n_samples, seed=seed)[0]


def _snap_exponent(a: float, tol: float = 0.05) -> float:
    best = a
    for m in range(2, 9):
        if abs(a - 1.0 / m) < tol:
            best = 1.0 / m
            break
    return best


@dataclass(frozen=True)
class CalibrationReport:
    C: float
    a_raw: float
    a_snapped: float
    per_band: list
    n_samples: int


def _sup_direction_candidates(domain: Domain, pts: np.ndarray, rng: np.random.Generator, n_random: int) -> np.ndarray:
    """Candidate unit directions per point for maximising delta(x; v).

    Random directions almost never align with the flat complex-tangential
    line (the alignment probability scales like delta itself), so the
    Hermitian-orthogonal complement of the boundary normal is probed
    explicitly alongside the random draws.
    """
    k, n = pts.shape
    cands = [_unit_vectors(rng, n_random, n)[None, :, :].repeat(k, axis=0)]
    if n > 1:
        normals = np.empty((k, n), dtype=np.complex128)
        for i, p in enumerate(pts):
            normals[i], _ = domain.nearest_boundary_direction(p)
        # complete each normal to a unitary frame; the non-normal columns
        # span the complex-tangential directions
        tang = np.empty((k, n - 1, n), dtype=np.complex128)
        for i in range(k):
            basis = np.eye(n, dtype=np.complex128)
            q, _ = np.linalg.qr(np.column_stack([normals[i]] + [basis[:, j] for j in range(n)])[:, : n])
            # first column is parallel to the normal; the rest are tangential
            for j in range(1, n):
                tang[i, j - 1] = q[:, j]
        cands.append(tang)
    return np.concatenate(cands, axis=1)  # (k, n_cand, n)


def calibrate_omega(
    domain: Domain,
    n_samples: int = 400,
    bands: Sequence[tuple[float, float]] = ((1e-4, 1e-3), (1e-3, 1e-2), (1e-2, 1e-1)),
    seed: int = 0,
    n_dirs: int = 16,
    c_metric: float = 0.5,
) -> tuple[OmegaSpec, CalibrationReport]:
    """Fit omega from the convex characterisation sup_v delta(x; v) <= omega(delta(x)).

    Least squares of log sup_v delta(x; v/|v|) against log delta(x) over the
    requested depth bands; the exponent snaps to the nearest 1/m (integer
    m <= 8) when within 0.05.
    """
    if not domain.convex:
        raise GaugeError("omega calibration uses the convex characterisation")
    rng = np.random.default_rng(seed)
    per_band = []
    all_ld, all_ls = [], []
    per = max(8, n_samples // len(bands))
    for band in bands:
        pts = domain.sample_in_band(rng, per, band)
        deltas = domain.boundary_distance_many(pts)
        cand = _sup_direction_candidates(domain, pts, rng, n_dirs)
        nc = cand.shape[1]
        Z = np.repeat(pts, nc, axis=0)
        V = cand.reshape(-1, pts.shape[1])
        vals = domain.directional_many(Z, V).reshape(len(pts), nc)
        sups = np.max(vals, axis=1)
        ld = np.log(deltas)
        ls = np.log(sups)
        if np.ptp(ld) < 1e-6:
            raise GaugeError("insufficient spread in delta within a band")
        slope, intercept = np.polyfit(ld, ls, 1)
        per_band.append({"band": list(band), "a": float(slope), "C": float(math.exp(intercept))})
        all_ld.append(ld)
        all_ls.append(ls)
    ld = np.concatenate(all_ld)
    ls = np.concatenate(all_ls)
    slope, intercept = np.polyfit(ld, ls, 1)
    a_raw = float(slope)
    a = _snap_exponent(a_raw)
    C = float(math.exp(intercept))
    spec = OmegaSpec(form="power", C=C, a=a, c_metric=c_metric, allow_steep=a > 0.5)
    return spec, CalibrationReport(C=C, a_raw=a_raw, a_snapped=a, per_band=per_band, n_samples=per * len(bands))


@dataclass(frozen=True)
class GrowthProbe:
    alpha: float
    intercept: float
    sup_residual: float
    finite: bool


def alpha_growth_probe(
    domain: Domain,
    base_point,
    n_samples: int = 256,
    seed: int = 0,
    k_upper: Callable | None = None,
) -> GrowthProbe:
    """Fit alpha in k(x0, z) ~ alpha log(1/delta(z)) from near-boundary samples.

    ``k_upper(domain, x, y)`` supplies distance upper estimates; the default
    is the smooth-boundary bound log(1 + 2|x-y|/sqrt(delta(x) delta(y))).
    """
    x0 = as_point(base_point, domain.dim)
    if k_upper is None:
        def k_upper(dom, x, y):
            dx = dom.boundary_distance(x)
            dy = dom.boundary_distance(y)
            return math.log1p(2.0 * float(np.linalg.norm(np.asarray(x) - np.asarray(y))) / math.sqrt(dx * dy))

    rng = np.random.default_rng(seed)
    pts = domain.sample_in_band(rng, n_samples, (1e-5, 1e-2))
    deltas = domain.boundary_distance_many(pts)
    ks = np.array([k_upper(domain, x0, p) for p in pts])
    lx = np.log(1.0 / deltas)
    slope, intercept = np.polyfit(lx, ks, 1)
    resid = ks - slope * lx - intercept
    return GrowthProbe(
        alpha=float(slope),
        intercept=float(intercept),
        sup_residual=float(np.max(np.abs(resid))),
        finite=bool(np.all(np.isfinite(resid))),
    )
