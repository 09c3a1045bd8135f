"""Kobayashi-Royden metric estimates, curve lengths, and distance bounds.

Exact infinitesimal oracles exist for the disc and the ball:

    disc:  kappa(z; v) = |v| / (1 - |z|^2)
    ball:  kappa(z; v) = sqrt((1 - |z|^2) |v|^2 + |<v, z>|^2) / (1 - |z|^2)

On convex domains the directional boundary distance sandwiches the metric,

    1 / (2 delta(z; v)) <= kappa(z; v) <= 1 / delta(z; v),

where the upper bound holds on any domain.  A gauge profile adds the lower
bound ``c |v| / omega(delta(z))``.  Curve lengths integrate a chosen side of
these estimates with one-sided composite rules, so reported upper lengths
are genuine upper bounds for the Kobayashi-Royden length up to quadrature
tolerance.

Exact distance oracles (pseudo-hyperbolic for the disc, its unitary-invariant
extension for the ball) provide independent references for every verifier.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import Domain, UnitBall, UnitDisc, as_direction, as_point
from .gauges import GaugeProfile


class MetricError(ValueError):
    """Invalid metric query."""


# ---------------------------------------------------------------------------
# Field and pointwise estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricEstimate:
    """Certified lower/upper pair for a metric value or a length."""

    lower: float
    upper: float
    provenance: str = ""

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise MetricError(f"estimate out of order: {self.lower} > {self.upper}")


@dataclass(frozen=True)
class MetricField:
    """A domain together with its best available metric estimator.

    ``estimator`` is one of ``exact-disc``, ``exact-ball`` or
    ``convex-sandwich``; exact fields also expose the sandwich so that the
    closed-form bounds can be tested against the oracle.
    """

    domain: Domain
    profile: GaugeProfile | None = None
    estimator: str = field(default="", init=True)

    def __post_init__(self):
        est = self.estimator
        if not est:
            if isinstance(self.domain, UnitDisc):
                est = "exact-disc"
            elif isinstance(self.domain, UnitBall):
                est = "exact-ball"
            else:
                est = "convex-sandwich"
            object.__setattr__(self, "estimator", est)
        if est == "exact-disc" and not isinstance(self.domain, UnitDisc):
            raise MetricError("exact-disc estimator needs the unit disc")
        if est == "exact-ball" and not isinstance(self.domain, (UnitDisc, UnitBall)):
            raise MetricError("exact-ball estimator needs the unit ball")

    @property
    def exact(self) -> bool:
        return self.estimator.startswith("exact")

    # -- batched evaluators (rows of Z paired with rows of V) --------------

    def kappa_exact_batch(self, Z: np.ndarray, V: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        if self.estimator == "exact-disc":
            return np.abs(V[:, 0]) / (1.0 - np.abs(Z[:, 0]) ** 2)
        if self.estimator == "exact-ball":
            nz2 = np.sum(np.abs(Z) ** 2, axis=1)
            nv2 = np.sum(np.abs(V) ** 2, axis=1)
            ip = np.abs(np.sum(V * Z.conj(), axis=1))  # |<v, z>|
            return np.sqrt((1.0 - nz2) * nv2 + ip * ip) / (1.0 - nz2)
        raise MetricError(f"estimator {self.estimator} has no exact oracle")

    def kappa_upper_batch(self, Z: np.ndarray, V: np.ndarray, coarse: bool = False) -> np.ndarray:
        """Certified upper values; ``coarse`` trades 1/delta(z; v) for the
        cheaper |v|/delta(z) (valid since delta(z; v/|v|) >= delta(z))."""
        if self.exact and not coarse:
            return self.kappa_exact_batch(Z, V)
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        if coarse:
            nv = np.linalg.norm(V, axis=1)
            return nv / self.domain.boundary_distance_many(Z)
        return 1.0 / self.domain.directional_many(Z, V)

    def kappa_lower_batch(self, Z: np.ndarray, V: np.ndarray) -> np.ndarray:
        if self.exact:
            return self.kappa_exact_batch(Z, V)
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        lower = np.zeros(len(Z))
        if self.domain.convex:
            lower = 0.5 / self.domain.directional_many(Z, V)
        if self.profile is not None:
            nv = np.linalg.norm(V, axis=1)
            d = self.domain.boundary_distance_many(Z)
            sg = self.profile.omega.c_metric * nv / self.profile.omega.value(d)
            lower = np.maximum(lower, sg)
        return lower


def kappa_exact(field: MetricField, z, v) -> float:
    """Oracle metric value; only exact estimators qualify."""
    zz = as_point(z, field.domain.dim)
    vv = as_direction(v, field.domain.dim)
    if not field.domain.contains(zz):
        raise MetricError("point must be interior")
    return float(field.kappa_exact_batch(zz[None, :], vv[None, :])[0])


def kappa_bounds(field: MetricField, z, v) -> MetricEstimate:
    """Closed-form sandwich (and gauge lower bound) at a point.

    Returns the convex sandwich even on exact fields so the oracle can be
    tested against it; use the field's batch evaluators for the tightest
    certified values.
    """
    zz = as_point(z, field.domain.dim)
    vv = as_direction(v, field.domain.dim)
    if not field.domain.contains(zz):
        raise MetricError("point must be interior")
    dd = field.domain.directional_many(zz[None, :], vv[None, :])[0]
    upper = 1.0 / dd
    provenance = "directional-upper"
    if field.domain.convex:
        lower = 0.5 / dd
        provenance = "convex-sandwich"
    else:  # pragma: no cover - all shipped models are convex
        lower = 0.0
        upper = math.inf
        provenance = "no-bound"
    if field.profile is not None:
        d = field.domain.boundary_distance(zz)
        sg = field.profile.omega.c_metric * float(np.linalg.norm(vv)) / field.profile.omega.value(d)
        if sg > lower:
            lower = sg
            provenance += "+gauge-lower"
    return MetricEstimate(lower=lower, upper=upper, provenance=provenance)


# ---------------------------------------------------------------------------
# Curve lengths
# ---------------------------------------------------------------------------


def _curve_vertices(curve) -> np.ndarray:
    verts = getattr(curve, "vertices", curve)
    return np.asarray(verts, dtype=np.complex128)


def curve_euclid_length(curve) -> float:
    verts = _curve_vertices(curve)
    if len(verts) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(verts, axis=0), axis=1)))


def _one_sided_segment_sums(vals: np.ndarray, h: np.ndarray, side: str) -> float:
    """Combine node/midpoint samples into a one-sided composite estimate.

    ``vals`` holds f at 2k+1 equispaced samples per segment (nodes and
    midpoints interleaved).  On each sub-interval the estimate takes
    max(trapezoid, midpoint) for the upper side and min for the lower side;
    either rule is one-sided whenever f is locally convex or concave, which
    holds for the metric integrands away from isolated inflections.
    """
    a = vals[..., 0:-2:2]
    m = vals[..., 1:-1:2]
    b = vals[..., 2::2]
    trap = 0.5 * (a + b)
    if side == "upper":
        est = np.maximum(trap, m)
    else:
        est = np.minimum(trap, m)
    return float(np.sum(est * h[:, None]))


def curve_kappa_length(
    field: MetricField,
    curve,
    side: str = "upper",
    rel_tol: float = 1e-6,
    coarse: bool = False,
    max_level: int = 12,
) -> float:
    """Composite one-sided quadrature of the chosen metric side along a curve.

    Doubles the per-segment resolution until two successive levels agree to
    ``rel_tol`` relative.  All sample points must be interior; the curve is
    rejected otherwise.
    """
    if side not in ("upper", "lower"):
        raise MetricError("side must be 'upper' or 'lower'")
    verts = _curve_vertices(curve)
    if len(verts) < 2:
        return 0.0
    seg_a = verts[:-1]
    seg_v = np.diff(verts, axis=0)
    seg_len = np.linalg.norm(seg_v, axis=1)
    keep = seg_len > 0
    seg_a, seg_v = seg_a[keep], seg_v[keep]
    if len(seg_a) == 0:
        return 0.0

    def evaluate(k: int) -> float:
        # 2k+1 samples per segment at t = 0, 1/(2k), ..., 1
        t = np.linspace(0.0, 1.0, 2 * k + 1)
        Z = seg_a[:, None, :] + t[None, :, None] * seg_v[:, None, :]
        Zf = Z.reshape(-1, Z.shape[-1])
        if not np.all(field.domain.contains_many(Zf)):
            raise MetricError("curve exits the domain")
        Vf = np.repeat(seg_v, len(t), axis=0)
        if side == "upper":
            vals = field.kappa_upper_batch(Zf, Vf, coarse=coarse)
        else:
            vals = field.kappa_lower_batch(Zf, Vf)
        vals = vals.reshape(len(seg_a), len(t))
        h = np.full(len(seg_a), 1.0 / k)
        return _one_sided_segment_sums(vals, h, side)

    prev = evaluate(4)
    k = 8
    for _ in range(max_level):
        cur = evaluate(k)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
        k *= 2
    return prev


# ---------------------------------------------------------------------------
# Distance oracles and closed-form distance bounds
# ---------------------------------------------------------------------------


def disc_distance_oracle(a: complex, b: complex) -> float:
    """Pseudo-hyperbolic distance on the unit disc."""
    a, b = complex(a), complex(b)
    if abs(a) >= 1.0 or abs(b) >= 1.0:
        raise MetricError("oracle needs interior points")
    return math.atanh(abs(a - b) / abs(1.0 - np.conj(a) * b))


def ball_distance_oracle(x, y) -> float:
    """Exact Kobayashi distance on the unit ball."""
    xx = np.asarray(x, dtype=np.complex128)
    yy = np.asarray(y, dtype=np.complex128)
    nx2 = float(np.sum(np.abs(xx) ** 2))
    ny2 = float(np.sum(np.abs(yy) ** 2))
    if nx2 >= 1.0 or ny2 >= 1.0:
        raise MetricError("oracle needs interior points")
    ip = complex(np.sum(xx * yy.conj()))  # <x, y>
    ratio = (1.0 - nx2) * (1.0 - ny2) / abs(1.0 - ip) ** 2
    return math.atanh(math.sqrt(max(0.0, 1.0 - ratio)))


def exact_distance(domain: Domain, x, y) -> float:
    """Exact Kobayashi distance where an oracle exists (disc and ball)."""
    if isinstance(domain, UnitDisc):
        return disc_distance_oracle(complex(as_point(x, 1)[0]), complex(as_point(y, 1)[0]))
    if isinstance(domain, UnitBall):
        return ball_distance_oracle(as_point(x, domain.dim), as_point(y, domain.dim))
    raise MetricError(f"no exact distance oracle for {domain.label}")


def exact_distance_batch(domain: Domain, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Vectorised oracle distances for arrays of pairs."""
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    if isinstance(domain, UnitDisc):
        a, b = X[:, 0], Y[:, 0]
        return np.arctanh(np.abs(a - b) / np.abs(1.0 - a.conj() * b))
    if isinstance(domain, UnitBall):
        nx2 = np.sum(np.abs(X) ** 2, axis=1)
        ny2 = np.sum(np.abs(Y) ** 2, axis=1)
        ip = np.sum(X * Y.conj(), axis=1)
        ratio = (1.0 - nx2) * (1.0 - ny2) / np.abs(1.0 - ip) ** 2
        return np.arctanh(np.sqrt(np.maximum(0.0, 1.0 - ratio)))
    raise MetricError(f"no exact distance oracle for {domain.label}")


def has_exact_distance(domain: Domain) -> bool:
    return isinstance(domain, (UnitDisc, UnitBall))


def dini_upper_distance(domain: Domain, x, y) -> float:
    """Distance upper bound log(1 + 2|x-y|/sqrt(delta(x) delta(y))) for
    smooth-boundary models."""
    if not domain.smooth:
        raise MetricError(f"{domain.label} is not smooth; upper bound unavailable")
    xx = as_point(x, domain.dim)
    yy = as_point(y, domain.dim)
    dist = float(np.linalg.norm(xx - yy))
    if dist == 0.0:
        return 0.0
    dx = domain.boundary_distance(xx)
    dy = domain.boundary_distance(yy)
    return math.log1p(2.0 * dist / math.sqrt(dx * dy))


@dataclass(frozen=True)
class BoundConstants:
    """Constants for the closed-form lower bounds.

    ``c_combined`` defaults to min(1, c_depth/4, c_gauge/2), the relation the
    combined bound's derivation imposes on its ingredients.
    """

    c_ntr: float = 1.0
    c_depth: float = 1.0  # constant in the g-inverse depth bound
    c_gauge: float = 1.0  # constant in the omega gauge bound
    c_combined: float | None = None

    def combined(self) -> float:
        if self.c_combined is not None:
            return self.c_combined
        return min(1.0, self.c_depth / 4.0, self.c_gauge / 2.0)


@dataclass(frozen=True)
class BoundBundle:
    """Labelled lower/upper distance bounds for one point pair."""

    lowers: dict
    uppers: dict
    skipped: dict
    notes: dict

    def best_lower(self, nonneg: bool = True) -> float:
        vals = list(self.lowers.values())
        if not vals:
            return 0.0
        best = max(vals)
        return max(best, 0.0) if nonneg else best

    def consistent(self, slack: float = 1e-9) -> bool:
        if not self.uppers:
            return True
        low = self.best_lower()
        return all(low <= up + slack for up in self.uppers.values())


def lower_distance_bundle(
    domain: Domain,
    profile: GaugeProfile | None,
    x,
    y,
    constants: BoundConstants = BoundConstants(),
) -> BoundBundle:
    """Evaluate every applicable closed-form lower bound (and the smooth
    upper bound) for the pair; inapplicable bounds are skipped with a reason."""
    xx = as_point(x, domain.dim)
    yy = as_point(y, domain.dim)
    dist = float(np.linalg.norm(xx - yy))
    lowers: dict[str, float] = {}
    uppers: dict[str, float] = {}
    skipped: dict[str, str] = {}
    notes: dict[str, str] = {}

    dx = domain.boundary_distance(xx)
    dy = domain.boundary_distance(yy)

    if dist == 0.0:
        zero = {k: 0.0 for k in ("convex_ratio", "ntr", "good1", "ugly1", "final_h")}
        return BoundBundle(lowers=zero, uppers={"dini": 0.0} if domain.smooth else {}, skipped={}, notes={"degenerate": "x == y"})

    if domain.convex:
        lowers["convex_ratio"] = 0.5 * abs(math.log(dx / dy))
        v = xx - yy
        dmin = min(
            domain.directional_boundary_distance(yy, v),
            domain.directional_boundary_distance(xx, v),
        )
        lowers["ntr"] = 0.5 * math.log1p(constants.c_ntr / dmin)
        notes["ntr"] = f"c={constants.c_ntr}"
    else:  # pragma: no cover - all shipped models are convex
        skipped["convex_ratio"] = "domain not convex"
        skipped["ntr"] = "domain not convex"

    if profile is None:
        skipped["good1"] = skipped["ugly1"] = skipped["final_h"] = "no gauge profile"
    else:
        inv, saturated = profile.g_inverse_clamped(dist)
        arg = constants.c_depth * inv / dx
        if arg > 0:
            lowers["good1"] = 0.5 * math.log(arg)
        notes["good1"] = f"c={constants.c_depth}" + (" saturated" if saturated else "")
        lowers["ugly1"] = 0.5 * math.log1p(constants.c_gauge * dist / profile.omega.value(dx))
        notes["ugly1"] = f"c={constants.c_gauge}"
        cpp = constants.combined()
        hx = _h_max(profile, dist, dx, cpp)
        hy = _h_max(profile, dist, dy, cpp)
        lowers["final_h"] = 0.5 * math.log((1.0 + hx) * (1.0 + hy))
        notes["final_h"] = f"c''={cpp}"

    if domain.smooth:
        uppers["dini"] = math.log1p(2.0 * dist / math.sqrt(dx * dy))
    else:
        skipped["dini"] = "boundary not smooth"

    return BoundBundle(lowers=lowers, uppers=uppers, skipped=skipped, notes=notes)


def _h_max(profile: GaugeProfile, dist: float, delta: float, c: float) -> float:
    h1 = c * dist / profile.g(delta)
    inv, _ = profile.g_inverse_clamped(c * dist)
    return max(h1, inv / delta)


def best_lower_batch(
    domain: Domain,
    profile: GaugeProfile | None,
    X: np.ndarray,
    Y: np.ndarray,
    constants: BoundConstants = BoundConstants(),
) -> np.ndarray:
    """Best (max, clamped at 0) closed-form lower bound per pair, batched.

    Mirrors lower_distance_bundle across arrays of pairs; used by the
    certifiers where per-pair construction would dominate the runtime.
    """
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    dist = np.linalg.norm(X - Y, axis=1)
    dx = domain.boundary_distance_many(X)
    dy = domain.boundary_distance_many(Y)
    best = np.zeros(len(X))
    live = dist > 0
    if domain.convex:
        best = np.maximum(best, 0.5 * np.abs(np.log(dx / dy)))
        V = X - Y
        d1 = domain.directional_many(np.vstack([Y[live], X[live]]), np.vstack([V[live], V[live]]))
        half = len(d1) // 2
        dmin = np.minimum(d1[:half], d1[half:])
        ntr = np.zeros(len(X))
        ntr[live] = 0.5 * np.log1p(constants.c_ntr / dmin)
        best = np.maximum(best, ntr)
    if profile is not None and np.any(live):
        cpp = constants.combined()
        inv_full = profile.g_inverse_many(constants.c_depth * dist[live])
        good1 = np.zeros(len(X))
        with np.errstate(divide="ignore"):
            ratio = inv_full / dx[live]
            good1[live] = np.where(ratio > 0, 0.5 * np.log(np.maximum(ratio, 1e-300)), 0.0)
        best = np.maximum(best, good1)
        ugly1 = np.zeros(len(X))
        ugly1[live] = 0.5 * np.log1p(
            constants.c_gauge * dist[live] / np.asarray(profile.omega.value(dx[live]))
        )
        best = np.maximum(best, ugly1)
        inv_c = profile.g_inverse_many(cpp * dist[live])
        hx = np.maximum(cpp * dist[live] / profile.g(dx[live]), inv_c / dx[live])
        hy = np.maximum(cpp * dist[live] / profile.g(dy[live]), inv_c / dy[live])
        fin = np.zeros(len(X))
        fin[live] = 0.5 * np.log((1.0 + hx) * (1.0 + hy))
        best = np.maximum(best, fin)
    return best


def finite_type_bound(domain: Domain, m: float, x, y, c: float = 1.0) -> float:
    """Comparison lower-bound formula for finite-type boundaries of order m:
    (m/2) log((1 + c|x-y|/delta(x)^(1/m)) (1 + c|x-y|/delta(y)^(1/m)))."""
    if m < 1:
        raise MetricError("type order m must be >= 1")
    xx = as_point(x, domain.dim)
    yy = as_point(y, domain.dim)
    dist = float(np.linalg.norm(xx - yy))
    if dist == 0.0:
        return 0.0
    dx = domain.boundary_distance(xx)
    dy = domain.boundary_distance(yy)
    return 0.5 * m * math.log(
        (1.0 + c * dist / dx ** (1.0 / m)) * (1.0 + c * dist / dy ** (1.0 / m))
    )


# ---------------------------------------------------------------------------
# Hyperbolicity estimation
# ---------------------------------------------------------------------------


def gromov_delta_estimate(
    distance_fn: Callable,
    points: Sequence,
    max_quadruples: int = 2000,
    seed: int = 0,
) -> float:
    """Four-point hyperbolicity defect over (sampled) quadruples.

    For each quadruple the three pairings of opposite pair-sums are formed;
    the defect is half the gap between the two largest, the amount by which
    the four-point condition can fail with the best base point.
    """
    pts = list(points)
    n = len(pts)
    if n < 4:
        return 0.0
    dmat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dmat[i, j] = dmat[j, i] = distance_fn(pts[i], pts[j])
    quads = list(itertools.combinations(range(n), 4))
    if len(quads) > max_quadruples:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(quads), size=max_quadruples, replace=False)
        quads = [quads[i] for i in idx]
    worst = 0.0
    for (i, j, k, l) in quads:
        s1 = dmat[i, j] + dmat[k, l]
        s2 = dmat[i, k] + dmat[j, l]
        s3 = dmat[i, l] + dmat[j, k]
        a, b, _ = sorted((s1, s2, s3), reverse=True)
        worst = max(worst, 0.5 * (a - b))
    return worst
