"""Shell decomposition of curves and the inequality verification harness.

A curve from x to y with penetration depth D (the max boundary distance along
it) splits into shells by boundary-distance levels D e^{-1}, D e^{-2}, ...:
walking from x, cut at the first point reaching each level until the deepest
level D, then cut at the last point sitting on each level back down toward y.
Every piece i carries the reference depth D_i = D e^{-|i|} and satisfies

    delta <= e * D_i on the piece,   D_i <= delta <= e * D_i at the cuts.

Each verifier turns one inequality instance into a VerificationRecord with
the measured constant, so sweeps report how sharp the bounds run in practice:

* shell records: Euclidean piece length against omega(D_i) log(omega(D_i)/D_i)
  and cumulative half-lengths against g(D_i);
* visibility: penetration depth against the inverse gauge of the separation;
* Gehring-Hayman: Euclidean curve length against g(separation), with the
  depth sub-check D <= C |x-y| + sqrt(delta(x) delta(y));
* distance lower bounds against an exact oracle or a certified upper length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domains import Domain
from .gauges import GaugeProfile
from .geodesics import Curve, GeodesicResult, penetration_depth
from .metrics import (
    BoundConstants,
    curve_euclid_length,
    dini_upper_distance,
    exact_distance,
    finite_type_bound,
    has_exact_distance,
    lower_distance_bundle,
)

PASS_SLACK = 1e-6  # pass means lhs <= rhs * (1 + PASS_SLACK)


class ShellError(ValueError):
    """Invalid decomposition input."""


# ---------------------------------------------------------------------------
# Verification records
# ---------------------------------------------------------------------------


@dataclass
class VerificationRecord:
    """One inequality instance: inputs, both sides, measured constant, verdict."""

    inequality: str
    domain: str
    m: float | None
    x: list | None
    y: list | None
    lhs: float
    rhs: float
    measured_constant: float
    passed: bool
    notes: str = ""
    extras: dict = field(default_factory=dict)

    @staticmethod
    def judge(lhs: float, rhs: float) -> bool:
        return lhs <= rhs * (1.0 + PASS_SLACK) + 1e-12

    def to_json(self) -> dict:
        return {
            "id": self.inequality,
            "domain": self.domain,
            "m": self.m,
            "x": self.x,
            "y": self.y,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.measured_constant,
            "pass": self.passed,
            "notes": self.notes,
            **({"extras": self.extras} if self.extras else {}),
        }


def _point_json(p: np.ndarray | None) -> list | None:
    if p is None:
        return None
    return [[float(c.real), float(c.imag)] for c in np.asarray(p).ravel()]


def _domain_order(domain: Domain) -> float | None:
    """Defining exponent reported in records: 1 for disc/ball, m for eggs."""
    return getattr(domain, "m", 1.0 if domain.smooth else None)


# ---------------------------------------------------------------------------
# Shell decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShellPiece:
    index: int
    depth: float  # D_i
    piece: Curve
    start_param: float
    end_param: float
    start_delta: float
    end_delta: float


@dataclass(frozen=True)
class ShellDecomposition:
    curve: Curve
    D: float
    N_x: int
    N_y: int
    pieces: tuple
    cut_tolerance: float

    def concatenated_length(self) -> float:
        return float(sum(curve_euclid_length(p.piece) for p in self.pieces))


def _level_index(D: float, delta: float) -> int:
    """Integer N with D e^{-N} <= delta < D e^{-N+1}.

    A relative slack of 1e-6 treats endpoints sitting within rounding of a
    level as on it, so discretised constant-depth curves index as expected.
    """
    if delta > D:
        raise ShellError("endpoint deeper than the computed max depth")
    r = math.log(D / delta) if delta > 0 else math.inf
    N = int(math.ceil(r - 1e-6))
    return max(N, 0)


def _interp_on_curve(curve: Curve, cum: np.ndarray, ss: np.ndarray) -> np.ndarray:
    """Vectorised points at arc-length parameters."""
    ss = np.clip(ss, 0.0, cum[-1])
    j = np.clip(np.searchsorted(cum, ss, side="right") - 1, 0, len(cum) - 2)
    seg = cum[j + 1] - cum[j]
    t = np.where(seg > 0, (ss - cum[j]) / np.where(seg == 0, 1.0, seg), 0.0)
    return (1 - t)[:, None] * curve.vertices[j] + t[:, None] * curve.vertices[j + 1]


def _densify(curve: Curve, domain: Domain, target: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arc-length params, points, and boundary distances on a fine sampling."""
    cum = curve.cum_param()
    L = cum[-1]
    n_extra = int(min(max(L / target, 1), 120_000))
    tt = np.unique(np.concatenate([cum, np.linspace(0.0, L, n_extra + 1)]))
    pts = _interp_on_curve(curve, cum, tt)
    deltas = domain.boundary_distance_many(pts)
    return tt, pts, deltas


def _bisect_crossing(curve: Curve, domain: Domain, s_lo: float, s_hi: float, target: float,
                     tol: float = 1e-9) -> float:
    """Parameter with |delta - target| <= tol inside a bracketing interval."""
    d_lo = domain.boundary_distance_many(curve.point_at(s_lo)[None, :])[0]
    rising = d_lo <= target
    for _ in range(200):
        mid = 0.5 * (s_lo + s_hi)
        d = domain.boundary_distance_many(curve.point_at(mid)[None, :])[0]
        if abs(d - target) <= tol:
            return mid
        if (d < target) == rising:
            s_lo = mid
        else:
            s_hi = mid
    return 0.5 * (s_lo + s_hi)


def shell_decompose(curve: Curve, domain: Domain, cut_tol: float = 1e-9) -> ShellDecomposition:
    """Split a curve into boundary-distance shells around its deepest point.

    Cut points are located by bisection along the polyline to within
    ``cut_tol`` in boundary distance.  Scanning resolution is fine enough
    (1e-4 of the depth) that missed level crossings would require
    sub-resolution excursions of the distance function.
    """
    if curve.degenerate:
        raise ShellError("cannot decompose a degenerate curve")
    D_pen, _ = penetration_depth(curve, domain)
    scan = max(1e-4 * D_pen, 1e-7)
    tt, pts, deltas = _densify(curve, domain, scan)
    D = max(D_pen, float(np.max(deltas)))
    L = float(tt[-1])
    delta_x = float(deltas[0])
    delta_y = float(deltas[-1])
    N_x = _level_index(D, delta_x)
    N_y = _level_index(D, delta_y)

    # forward scan: first crossing of D e^{i} for i = -N_x+1 .. 0; levels
    # increase with i, so the scan position never needs to back up
    cuts_x: list[float] = []
    k = 0
    for i in range(-N_x + 1, 1):
        target = D * math.exp(i)
        while k < len(tt) - 1 and not (
            min(deltas[k], deltas[k + 1]) <= target <= max(deltas[k], deltas[k + 1])
        ):
            k += 1
        if k >= len(tt) - 1 and not (
            min(deltas[-2], deltas[-1]) <= target <= max(deltas[-2], deltas[-1])
        ):
            raise ShellError(f"level {target} not reached on the forward scan")
        cuts_x.append(_bisect_crossing(curve, domain, tt[k], tt[k + 1], target, cut_tol))

    # backward scan: last crossing of D e^{-i} for i = N_y-1 .. 0
    cuts_y: list[float] = []
    k = len(tt) - 1
    for i in range(N_y - 1, -1, -1):
        target = D * math.exp(-i)
        while k > 0 and not (min(deltas[k - 1], deltas[k]) <= target <= max(deltas[k - 1], deltas[k])):
            k -= 1
        if k <= 0:
            raise ShellError(f"level {target} not reached on the backward scan")
        cuts_y.append(_bisect_crossing(curve, domain, tt[k], tt[k - 1], target, cut_tol))
    cuts_y.reverse()  # ascending parameters, i = 0 .. N_y-1

    params = [0.0] + cuts_x + cuts_y + [L]
    indices = list(range(-N_x, N_y + 1))
    if len(params) != len(indices) + 1:
        raise ShellError("cut bookkeeping mismatch")
    if any(params[j + 1] < params[j] - 1e-12 for j in range(len(params) - 1)):
        raise ShellError("cut parameters out of order")

    pieces = []
    for idx, (s0, s1) in zip(indices, zip(params[:-1], params[1:])):
        sub = curve.subcurve(s0, s1)
        d0 = float(domain.boundary_distance_many(sub.vertices[:1])[0])
        d1 = float(domain.boundary_distance_many(sub.vertices[-1:])[0])
        pieces.append(
            ShellPiece(
                index=idx,
                depth=D * math.exp(-abs(idx)),
                piece=sub,
                start_param=s0,
                end_param=s1,
                start_delta=d0,
                end_delta=d1,
            )
        )
    return ShellDecomposition(
        curve=curve, D=D, N_x=N_x, N_y=N_y, pieces=tuple(pieces), cut_tolerance=cut_tol
    )


def check_shell_invariants(decomp: ShellDecomposition, domain: Domain, subdivision: int = 10) -> dict:
    """Validate the shell invariants on a subdivided sample.

    Checks: on each piece delta <= e * D_i; at interior cuts
    D_i <= delta <= e * D_i; concatenated Euclidean lengths match the curve.
    """
    e = math.e
    worst_piece = 0.0
    cut_ok = True
    for p in decomp.pieces:
        verts = p.piece.vertices
        if len(verts) >= 2:
            t = np.linspace(0.0, 1.0, subdivision + 1)[1:-1]
            seg_a, seg_b = verts[:-1], verts[1:]
            samples = (seg_a[:, None, :] + t[None, :, None] * (seg_b - seg_a)[:, None, :]).reshape(-1, verts.shape[1])
            samples = np.vstack([verts, samples])
        else:
            samples = verts
        dmax = float(np.max(domain.boundary_distance_many(samples)))
        worst_piece = max(worst_piece, dmax / (e * p.depth))
        for d_end, param in ((p.start_delta, p.start_param), (p.end_delta, p.end_param)):
            lo_ok = d_end >= p.depth * (1.0 - 3e-6) - decomp.cut_tolerance
            hi_ok = d_end <= e * p.depth * (1.0 + 3e-6) + decomp.cut_tolerance
            if not (lo_ok and hi_ok):
                cut_ok = False
    concat = decomp.concatenated_length()
    total = decomp.curve.length()
    return {
        "piece_max_ratio": worst_piece,  # must be <= 1 up to tolerance
        "pieces_ok": worst_piece <= 1.0 + 1e-4,
        "cuts_ok": cut_ok,
        "length_gap": abs(concat - total),
        "lengths_ok": abs(concat - total) <= 1e-9 * max(1.0, total),
    }


def verify_shells(decomp: ShellDecomposition, profile: GaugeProfile, domain: Domain) -> list[VerificationRecord]:
    """Measured constants for the per-shell length bound and the cumulative
    half-length bound.

    Shells where omega(D_i)/D_i <= 1 make the log factor nonpositive (deep
    interior, out of the regime); they are flagged and excluded.
    """
    records: list[VerificationRecord] = []
    order = _domain_order(domain)
    x = decomp.curve.vertices[0]
    y = decomp.curve.vertices[-1]
    lengths = [curve_euclid_length(p.piece) for p in decomp.pieces]
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    for j, p in enumerate(decomp.pieces):
        w = float(profile.omega.value(p.depth))
        ratio = w / p.depth
        if ratio <= 1.0:
            records.append(
                VerificationRecord(
                    inequality="shell-piece-length",
                    domain=domain.label,
                    m=order,
                    x=_point_json(x),
                    y=_point_json(y),
                    lhs=lengths[j],
                    rhs=math.inf,
                    measured_constant=math.nan,
                    passed=True,
                    notes=f"log_degenerate shell i={p.index}",
                    extras={"shell_index": p.index, "depth": p.depth},
                )
            )
            continue
        denom = w * math.log(ratio)
        C = lengths[j] / denom
        records.append(
            VerificationRecord(
                inequality="shell-piece-length",
                domain=domain.label,
                m=order,
                x=_point_json(x),
                y=_point_json(y),
                lhs=lengths[j],
                rhs=C * denom,
                measured_constant=C,
                passed=True,
                notes=f"shell i={p.index}; report-only constant",
                extras={"shell_index": p.index, "depth": p.depth},
            )
        )
        # cumulative half-length against g(D_i) at the piece cut points
        gD = float(profile.g(p.depth))
        for param, tag in ((cum[j], "start"), (cum[j + 1], "end")):
            half = min(param, total - param)
            Cg = half / gD if gD > 0 else math.inf
            records.append(
                VerificationRecord(
                    inequality="shell-cumulative-half",
                    domain=domain.label,
                    m=order,
                    x=_point_json(x),
                    y=_point_json(y),
                    lhs=half,
                    rhs=Cg * gD if gD > 0 else math.inf,
                    measured_constant=Cg,
                    passed=True,
                    notes=f"shell i={p.index} {tag}; report-only constant",
                    extras={"shell_index": p.index, "depth": p.depth},
                )
            )
    return records


# ---------------------------------------------------------------------------
# Visibility and Gehring-Hayman verifiers
# ---------------------------------------------------------------------------


def _curve_of(result: GeodesicResult | Curve) -> Curve:
    return result.curve if isinstance(result, GeodesicResult) else result


def verify_visibility(
    result: GeodesicResult | Curve,
    profile: GaugeProfile,
    domain: Domain,
    c_floor: float = 1e-3,
) -> VerificationRecord | None:
    """Penetration-depth visibility check: D against g^{-1}(|x - y|).

    Returns None for degenerate pairs.  Saturation of the inverse gauge (the
    separation exceeding the monotone range of g) is propagated in the notes.
    """
    curve = _curve_of(result)
    if curve.degenerate:
        return None
    x = curve.vertices[0]
    y = curve.vertices[-1]
    dist = float(np.linalg.norm(x - y))
    if dist < 1e-9:
        return None
    D, _ = penetration_depth(curve, domain)
    inv, saturated = profile.g_inverse_clamped(dist)
    c_measured = D / inv if inv > 0 else math.inf
    dx = float(domain.boundary_distance_many(x[None, :])[0])
    dy = float(domain.boundary_distance_many(y[None, :])[0])
    lam = result.lambda_cert if isinstance(result, GeodesicResult) else None
    return VerificationRecord(
        inequality="visibility-depth",
        domain=domain.label,
        m=_domain_order(domain),
        x=_point_json(x),
        y=_point_json(y),
        lhs=c_floor * inv,
        rhs=D,
        measured_constant=c_measured,
        passed=VerificationRecord.judge(c_floor * inv, D),
        notes=("g-inverse saturated; " if saturated else "") + f"floor={c_floor}",
        extras={
            "dist_euclid": dist,
            "delta_x": dx,
            "delta_y": dy,
            "D": D,
            "L_e": curve.length(),
            "g_inv_dist": inv,
            "c_vis": c_measured,
            **({"lambda_cert": lam} if lam is not None else {}),
        },
    )


def verify_gehring_hayman(
    result: GeodesicResult | Curve,
    profile: GaugeProfile,
    domain: Domain,
    depth_constant_cap: float = 2.0,
) -> list[VerificationRecord]:
    """Length-vs-gauge check L_e <= C g(|x-y|) plus the depth sub-check
    D <= C |x-y| + sqrt(delta(x) delta(y))."""
    curve = _curve_of(result)
    if curve.degenerate:
        return []
    x = curve.vertices[0]
    y = curve.vertices[-1]
    dist = float(np.linalg.norm(x - y))
    if dist < 1e-9:
        return []
    L_e = curve.length()
    g_xy = float(profile.g(dist))
    C = L_e / g_xy if g_xy > 0 else math.inf
    dx = float(domain.boundary_distance_many(x[None, :])[0])
    dy = float(domain.boundary_distance_many(y[None, :])[0])
    D, _ = penetration_depth(curve, domain)
    lam = result.lambda_cert if isinstance(result, GeodesicResult) else None
    extras = {
        "dist_euclid": dist,
        "delta_x": dx,
        "delta_y": dy,
        "D": D,
        "L_e": L_e,
        "g_xy": g_xy,
        "C_gh": C,
        **({"lambda_cert": lam} if lam is not None else {}),
    }
    main = VerificationRecord(
        inequality="gehring-hayman-length",
        domain=domain.label,
        m=_domain_order(domain),
        x=_point_json(x),
        y=_point_json(y),
        lhs=L_e,
        rhs=C * g_xy if g_xy > 0 else math.inf,
        measured_constant=C,
        passed=True,
        notes="report-only constant; sweep summary judges divergence",
        extras=extras,
    )
    geo = math.sqrt(dx * dy)
    c_depth = max(0.0, (D - geo) / dist)
    sub = VerificationRecord(
        inequality="gehring-hayman-depth",
        domain=domain.label,
        m=_domain_order(domain),
        x=_point_json(x),
        y=_point_json(y),
        lhs=D,
        rhs=depth_constant_cap * dist + geo,
        measured_constant=c_depth,
        passed=VerificationRecord.judge(D, depth_constant_cap * dist + geo),
        notes=f"cap C={depth_constant_cap}",
        extras=extras,
    )
    return [main, sub]


# ---------------------------------------------------------------------------
# Lower-bound sweeps
# ---------------------------------------------------------------------------


def verify_lower_bounds(
    domain: Domain,
    profile: GaugeProfile | None,
    pairs: Sequence,
    k_reference: str = "auto",
    constants: BoundConstants = BoundConstants(),
    upper_lengths: Sequence[float] | None = None,
    finite_type_order: float | None = None,
) -> list[VerificationRecord]:
    """Check every closed-form lower bound against a distance reference.

    ``k_reference`` is "oracle" (exact distance; a true theorem check),
    "curve_upper" with ``upper_lengths`` supplied per pair (also a valid
    check, since lower <= k <= upper), or "auto" picking the oracle when one
    exists.  Degenerate pairs are skipped and counted in the notes.
    """
    if k_reference == "auto":
        k_reference = "oracle" if has_exact_distance(domain) else "curve_upper"
    if k_reference == "curve_upper" and upper_lengths is None:
        raise ShellError("curve_upper reference needs upper_lengths")
    records: list[VerificationRecord] = []
    order = _domain_order(domain)
    skipped = 0
    for idx, (x, y) in enumerate(pairs):
        dist = float(np.linalg.norm(np.asarray(x) - np.asarray(y)))
        if dist < 1e-9:
            skipped += 1
            continue
        if k_reference == "oracle":
            ref = exact_distance(domain, x, y)
            ref_label = "oracle"
        else:
            ref = float(upper_lengths[idx])
            ref_label = "curve_upper"
        bundle = lower_distance_bundle(domain, profile, x, y, constants)
        dini = bundle.uppers.get("dini")
        dx = domain.boundary_distance(x)
        dy = domain.boundary_distance(y)
        base_extras = {
            "dist_euclid": dist,
            "delta_x": dx,
            "delta_y": dy,
            "k_up": dini if dini is not None else math.nan,
            "k_low_best": bundle.best_lower(),
            "k_reference": ref,
        }
        for name, val in bundle.lowers.items():
            records.append(
                VerificationRecord(
                    inequality=f"lower-{name}",
                    domain=domain.label,
                    m=order,
                    x=_point_json(np.asarray(x)),
                    y=_point_json(np.asarray(y)),
                    lhs=max(val, 0.0),
                    rhs=ref,
                    measured_constant=val,
                    passed=VerificationRecord.judge(max(val, 0.0), ref),
                    notes=f"reference={ref_label}; {bundle.notes.get(name, '')}".strip(),
                    extras=base_extras,
                )
            )
        if dini is not None:
            records.append(
                VerificationRecord(
                    inequality="lower-vs-smooth-upper",
                    domain=domain.label,
                    m=order,
                    x=_point_json(np.asarray(x)),
                    y=_point_json(np.asarray(y)),
                    lhs=bundle.best_lower(),
                    rhs=dini,
                    measured_constant=bundle.best_lower() / dini if dini > 0 else 0.0,
                    passed=VerificationRecord.judge(bundle.best_lower(), dini),
                    notes="bundle consistency",
                    extras=base_extras,
                )
            )
        if finite_type_order is not None:
            ft = finite_type_bound(domain, finite_type_order, x, y, c=1.0)
            records.append(
                VerificationRecord(
                    inequality="finite-type-comparison",
                    domain=domain.label,
                    m=finite_type_order,
                    x=_point_json(np.asarray(x)),
                    y=_point_json(np.asarray(y)),
                    lhs=ft,
                    rhs=max(bundle.lowers.get("final_h", 0.0), 1e-300),
                    measured_constant=ft / max(bundle.lowers.get("final_h", 0.0), 1e-300),
                    passed=True,
                    notes="ratio statistics only",
                    extras=base_extras,
                )
            )
    if skipped:
        records.append(
            VerificationRecord(
                inequality="lower-bounds-skipped",
                domain=domain.label,
                m=order,
                x=None,
                y=None,
                lhs=float(skipped),
                rhs=float(skipped),
                measured_constant=float(skipped),
                passed=True,
                notes="degenerate pairs skipped",
            )
        )
    return records


def measure_max_c(
    domain: Domain,
    pairs: Sequence,
    bound: str = "ntr",
    profile: GaugeProfile | None = None,
    references: Sequence[float] | None = None,
) -> float:
    """Largest constant for which the named bound passes on the whole sweep.

    The bounds are monotone increasing in their constant, so bisection on a
    precomputed per-pair profile is exact up to the iteration budget.
    """
    X = np.array([np.asarray(x) for x, _ in pairs])
    Y = np.array([np.asarray(y) for _, y in pairs])
    dist = np.linalg.norm(X - Y, axis=1)
    live = dist > 1e-9
    if references is None:
        refs = np.array([exact_distance(domain, x, y) for x, y in pairs])
    else:
        refs = np.asarray(references, dtype=float)
    if bound == "ntr":
        V = X - Y
        d1 = domain.directional_many(np.vstack([Y, X]), np.vstack([V, V]))
        half = len(d1) // 2
        dmin = np.minimum(d1[:half], d1[half:])

        def passes(c: float) -> bool:
            vals = 0.5 * np.log1p(c / dmin[live])
            return bool(np.all(vals <= refs[live] * (1.0 + PASS_SLACK)))

    elif bound == "final_h":
        if profile is None:
            raise ShellError("final_h measurement needs a profile")
        dx = domain.boundary_distance_many(X)
        dy = domain.boundary_distance_many(Y)

        def passes(c: float) -> bool:
            inv = profile.g_inverse_many(c * dist[live])
            hx = np.maximum(c * dist[live] / profile.g(dx[live]), inv / dx[live])
            hy = np.maximum(c * dist[live] / profile.g(dy[live]), inv / dy[live])
            vals = 0.5 * np.log((1.0 + hx) * (1.0 + hy))
            return bool(np.all(vals <= refs[live] * (1.0 + PASS_SLACK)))

    else:
        raise ShellError(f"unknown bound {bound!r} for constant measurement")

    lo, hi = 0.0, 1.0
    if not passes(1e-9):
        return 0.0
    while passes(hi) and hi < 1e6:
        lo, hi = hi, hi * 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo
