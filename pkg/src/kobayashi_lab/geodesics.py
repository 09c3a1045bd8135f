"""Near-geodesic polylines with certified quasi-geodesic factors.

The Kobayashi distance is an infimum of metric lengths over curves, so any
concrete curve certifies an upper bound and closed-form estimates certify
lower bounds.  The solver discretises the domain with a boundary-refined
lattice whose edges carry certified upper lengths of straight segments, runs
a deterministic shortest path, and then shortens the polyline by local
descent.  The returned factor ``lambda_cert`` is the worst ratio of certified
upper sub-length to certified lower distance over sampled vertex pairs
(always including the endpoints and all dyadic split points), so the curve is
a lambda-geodesic for the reported lambda up to the quality of the lower
bounds.

Exact geodesics of the disc (circular arcs orthogonal to the unit circle) are
available as an oracle for tests and sweeps.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .domains import Domain, DomainError, as_point
from .gauges import GaugeProfile
from .metrics import (
    BoundBundle,
    BoundConstants,
    MetricField,
    best_lower_batch,
    curve_euclid_length,
    curve_kappa_length,
    exact_distance,
    exact_distance_batch,
    has_exact_distance,
    lower_distance_bundle,
)


class SolverError(ValueError):
    """Geodesic solver failure (bad configuration or disconnected query)."""


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """Ordered polyline; the universal geodesic/candidate representation."""

    vertices: np.ndarray  # (k, n) complex

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.complex128)
        if verts.ndim != 2:
            raise SolverError("curve vertices must be a (k, n) array")
        if len(verts) > 1:
            keep = np.ones(len(verts), dtype=bool)
            gaps = np.linalg.norm(np.diff(verts, axis=0), axis=1)
            keep[1:] = gaps > 0.0
            verts = verts[keep]
        object.__setattr__(self, "vertices", verts)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 2

    def cum_param(self) -> np.ndarray:
        if self.degenerate:
            return np.zeros(len(self.vertices))
        seg = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    def length(self) -> float:
        return float(self.cum_param()[-1]) if not self.degenerate else 0.0

    def point_at(self, s: float) -> np.ndarray:
        cum = self.cum_param()
        s = min(max(s, 0.0), cum[-1])
        j = int(np.searchsorted(cum, s, side="right")) - 1
        j = min(j, len(cum) - 2)
        seg = cum[j + 1] - cum[j]
        t = 0.0 if seg == 0 else (s - cum[j]) / seg
        return (1 - t) * self.vertices[j] + t * self.vertices[j + 1]

    def subcurve(self, s0: float, s1: float) -> "Curve":
        """Portion between two arc-length parameters (orientation preserved)."""
        if s1 < s0:
            s0, s1 = s1, s0
        cum = self.cum_param()
        a = self.point_at(s0)
        b = self.point_at(s1)
        inside = (cum > s0) & (cum < s1)
        verts = np.vstack([a[None, :], self.vertices[inside], b[None, :]])
        return Curve(verts)

    def reversed(self) -> "Curve":
        return Curve(self.vertices[::-1].copy())

    def to_json(self) -> list:
        return [[[float(c.real), float(c.imag)] for c in row] for row in self.vertices]

    @staticmethod
    def from_json(payload: list) -> "Curve":
        verts = np.array(
            [[complex(re, im) for re, im in row] for row in payload], dtype=np.complex128
        )
        return Curve(verts)


def penetration_depth(curve: Curve, domain: Domain, max_rounds: int = 9) -> tuple[float, np.ndarray]:
    """Max boundary distance along the curve and a point attaining it.

    Samples are subdivided until local spacing drops below a quarter of the
    local boundary distance, which pins the max to that resolution since the
    distance function is 1-Lipschitz along the curve.
    """
    pts = curve.vertices
    if len(pts) == 1:
        return float(domain.boundary_distance_many(pts)[0]), pts[0]
    for _ in range(max_rounds):
        d = domain.boundary_distance_many(pts)
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        limit = 0.25 * np.minimum(d[:-1], d[1:])
        split = gaps > np.maximum(limit, 1e-9)
        if not np.any(split) or len(pts) > 100_000:
            break
        mids = 0.5 * (pts[:-1][split] + pts[1:][split])
        merged = []
        k = 0
        for i in range(len(pts) - 1):
            merged.append(pts[i])
            if split[i]:
                merged.append(mids[k])
                k += 1
        merged.append(pts[-1])
        pts = np.array(merged)
    d = domain.boundary_distance_many(pts)
    j = int(np.argmax(d))
    return float(d[j]), pts[j]


# ---------------------------------------------------------------------------
# Solver configuration and lattice
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Lattice and refinement parameters.

    Spacing near the boundary shrinks like ``beta * delta`` down to ``h_min``;
    endpoints closer to the boundary than the lattice floor are reached
    through direct stitching edges.
    """

    h0: float = 0.08
    h_min: float = 0.01
    beta: float = 0.5
    edge_degree: int = 10
    stitch_degree: int = 16
    refine_iterations: int = 40
    max_vertices: int = 96
    cert_pairs: int = 24
    node_cap: int = 60_000
    seed: int = 0

    def __post_init__(self):
        if self.h_min <= 0 or self.h0 < self.h_min:
            raise SolverError("need 0 < h_min <= h0")
        if not (0.0 < self.beta <= 1.0):
            raise SolverError("beta must lie in (0, 1]")
        if self.refine_iterations < 0:
            raise SolverError("refine_iterations must be >= 0")


def default_config(domain: Domain, **overrides) -> SolverConfig:
    """Dimension-aware defaults; lattice sizes stay desk-scale."""
    if domain.dim == 1:
        base = dict(h0=0.08, h_min=0.01, beta=0.5, edge_degree=10, refine_iterations=50)
    elif domain.dim == 2:
        base = dict(h0=0.30, h_min=0.12, beta=0.6, edge_degree=14, stitch_degree=24,
                    refine_iterations=80, max_vertices=140)
    else:
        base = dict(h0=0.55, h_min=0.30, beta=0.7, edge_degree=18, stitch_degree=32,
                    refine_iterations=80, max_vertices=140)
    base.update(overrides)
    return SolverConfig(**base)


@dataclass
class Lattice:
    """Interior point graph with certified upper-length edge weights."""

    nodes: np.ndarray  # (N, n) complex
    deltas: np.ndarray  # boundary distance per node
    neighbors: list  # list of (index array, weight array)
    config: SolverConfig
    coarse: bool  # whether edge weights used the coarse metric upper
    warnings: list


def _real_embed(pts: np.ndarray) -> np.ndarray:
    return np.hstack([pts.real, pts.imag])


def _segment_upper_weights(field: MetricField, A: np.ndarray, B: np.ndarray, coarse: bool,
                           dA: np.ndarray | None = None, dB: np.ndarray | None = None) -> np.ndarray:
    """Certified upper lengths of straight segments A->B, batched.

    Exact fields use a fixed 5-point one-sided rule on the oracle; otherwise
    the concavity of the boundary distance on convex domains gives the bound
    |B - A| / min(delta(A), delta(B)).
    """
    V = B - A
    seg_len = np.linalg.norm(V, axis=1)
    if coarse:
        if dA is None:
            dA = field.domain.boundary_distance_many(A)
        if dB is None:
            dB = field.domain.boundary_distance_many(B)
        return seg_len / np.minimum(dA, dB)
    t = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    Z = A[:, None, :] + t[None, :, None] * V[:, None, :]
    Zf = Z.reshape(-1, A.shape[1])
    Vf = np.repeat(V, len(t), axis=0)
    vals = field.kappa_upper_batch(Zf, Vf).reshape(len(A), len(t))
    h = 0.5
    first = np.maximum(0.5 * (vals[:, 0] + vals[:, 2]), vals[:, 1])
    second = np.maximum(0.5 * (vals[:, 2] + vals[:, 4]), vals[:, 3])
    return h * (first + second)


def build_lattice(domain: Domain, config: SolverConfig, field: MetricField | None = None) -> Lattice:
    """Multi-level interior lattice with k-nearest certified edges.

    Level k has spacing h0/2^k; a point joins level k when that is the
    coarsest spacing not exceeding ``max(h_min, beta * delta)``.  The graph is
    made connected across components; exceeding the node cap coarsens the
    finest level away with a warning.
    """
    if field is None:
        field = MetricField(domain)
    warnings: list[str] = []
    lo, hi = domain._bounding_box()
    n = domain.dim
    levels = []
    h = config.h0
    while True:
        levels.append(h)
        if h / 2.0 < config.h_min:
            break
        h /= 2.0

    chunks = []
    for k, hk in enumerate(levels):
        axes = [np.arange(lo[d] + hk / 2.0, hi[d], hk) for d in range(2 * n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        reals = np.stack([m.ravel() for m in mesh], axis=1)
        pts = reals[:, :n] + 1j * reals[:, n:]
        inside = domain.contains_many(pts)
        pts = pts[inside]
        d = domain.boundary_distance_many(pts)
        want = np.maximum(config.h_min, config.beta * d)
        upper_ok = hk <= want
        lower_ok = want < 2.0 * hk if k > 0 else np.ones(len(pts), dtype=bool)
        if k == 0:
            sel = want >= hk  # coarse level keeps everything it can resolve
        else:
            sel = upper_ok & lower_ok
        chunks.append((pts[sel], d[sel]))
        if sum(len(c[0]) for c in chunks) > config.node_cap:
            warnings.append(f"node cap {config.node_cap} hit at level {k}; finer levels dropped")
            break
    nodes = np.vstack([c[0] for c in chunks])
    deltas = np.concatenate([c[1] for c in chunks])
    if len(nodes) < 2:
        raise SolverError("lattice came out empty; loosen h0/h_min")
    if len(nodes) > config.node_cap:
        order = np.argsort(-deltas)  # keep deepest nodes when over cap
        nodes = nodes[order[: config.node_cap]]
        deltas = deltas[order[: config.node_cap]]
        warnings.append("node cap enforced by depth-ordered truncation")

    tree = cKDTree(_real_embed(nodes))
    kq = min(config.edge_degree + 1, len(nodes))
    _, idx = tree.query(_real_embed(nodes), k=kq)
    pairs = set()
    for i in range(len(nodes)):
        for j in idx[i, 1:]:
            a, b = (i, int(j)) if i < j else (int(j), i)
            pairs.add((a, b))
    edges = np.array(sorted(pairs), dtype=int)

    coarse = not field.exact
    w = _segment_upper_weights(
        field, nodes[edges[:, 0]], nodes[edges[:, 1]], coarse,
        dA=deltas[edges[:, 0]], dB=deltas[edges[:, 1]],
    )

    # union-find connectivity; bridge components through nearest pairs
    parent = np.arange(len(nodes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    roots = np.array([find(i) for i in range(len(nodes))])
    comps = np.unique(roots)
    extra_edges = []
    while len(comps) > 1:
        main = comps[np.argmax([np.sum(roots == c) for c in comps])]
        main_idx = np.where(roots == main)[0]
        main_tree = cKDTree(_real_embed(nodes[main_idx]))
        for c in comps:
            if c == main:
                continue
            side = np.where(roots == c)[0]
            dist, jj = main_tree.query(_real_embed(nodes[side]), k=1)
            i_local = int(np.argmin(dist))
            a = int(side[i_local])
            b = int(main_idx[jj[i_local]])
            extra_edges.append((min(a, b), max(a, b)))
        ee = np.array(extra_edges[-(len(comps) - 1):], dtype=int)
        we = _segment_upper_weights(field, nodes[ee[:, 0]], nodes[ee[:, 1]], coarse,
                                    dA=deltas[ee[:, 0]], dB=deltas[ee[:, 1]])
        edges = np.vstack([edges, ee])
        w = np.concatenate([w, we])
        for a, b in ee:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        roots = np.array([find(i) for i in range(len(nodes))])
        comps = np.unique(roots)

    neighbors: list[list] = [[] for _ in range(len(nodes))]
    for (a, b), weight in zip(edges, w):
        neighbors[a].append((b, float(weight)))
        neighbors[b].append((a, float(weight)))
    packed = [
        (np.array([j for j, _ in lst], dtype=int), np.array([wt for _, wt in lst]))
        for lst in neighbors
    ]
    return Lattice(nodes=nodes, deltas=deltas, neighbors=packed, config=config, coarse=coarse, warnings=warnings)


def _dijkstra(neighbors, start: int, goal: int) -> list[int]:
    """Deterministic shortest path with (weight, hops, node) tie-breaking."""
    n = len(neighbors)
    dist = np.full(n, np.inf)
    hops = np.full(n, np.inf)
    prev = np.full(n, -1, dtype=int)
    dist[start] = 0.0
    hops[start] = 0
    heap = [(0.0, 0, start)]
    seen = np.zeros(n, dtype=bool)
    while heap:
        d, hp, i = heapq.heappop(heap)
        if seen[i]:
            continue
        seen[i] = True
        if i == goal:
            break
        idxs, ws = neighbors[i]
        for j, wij in zip(idxs, ws):
            if seen[j]:
                continue
            nd = d + wij
            nh = hp + 1
            if nd < dist[j] - 1e-15 or (
                abs(nd - dist[j]) <= 1e-15 and (nh < hops[j] or (nh == hops[j] and i < prev[j]))
            ):
                dist[j] = nd
                hops[j] = nh
                prev[j] = i
                heapq.heappush(heap, (nd, nh, int(j)))
    if not seen[goal]:
        raise SolverError("endpoints are disconnected in the lattice")
    path = [goal]
    while path[-1] != start:
        path.append(int(prev[path[-1]]))
    return path[::-1]


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------


class _UpperObjective:
    """Per-segment certified-upper costs used as the descent objective.

    In coarse mode the cost is |B - A| / min(delta(A), delta(B)), so boundary
    distances at the vertices are the only domain queries; callers pass cached
    values where they hold them.
    """

    def __init__(self, field: MetricField, coarse: bool):
        self.field = field
        self.coarse = coarse

    def delta(self, pts: np.ndarray) -> np.ndarray | None:
        if not self.coarse:
            return None
        return self.field.domain.boundary_distance_many(pts)

    def seg(self, A, B, dA=None, dB=None) -> np.ndarray:
        if self.coarse:
            if dA is None:
                dA = self.delta(A)
            if dB is None:
                dB = self.delta(B)
            return np.linalg.norm(B - A, axis=1) / np.minimum(dA, dB)
        return _segment_upper_weights(self.field, A, B, False)


def refine_curve(curve: Curve, field: MetricField, iterations: int = 40,
                 max_vertices: int = 96, coarse: bool | None = None) -> Curve:
    """Shorten the curve in the certified-upper objective.

    Each iteration splits expensive segments, then sweeps interior vertices in
    a red-black order proposing the neighbour midpoint, a blend toward it, and
    axis pattern moves; a proposal is accepted only on strict decrease with
    the vertex staying interior, so the objective never increases.  A final
    certified comparison guards the adaptive-quadrature length as well.
    """
    if curve.degenerate or iterations == 0:
        return curve
    if coarse is None:
        coarse = not field.exact
    domain = field.domain
    n = curve.dim
    verts = curve.vertices.copy()
    obj = _UpperObjective(field, coarse)

    length_in = curve_kappa_length(field, curve, "upper", coarse=coarse)

    dv = domain.boundary_distance_many(verts)  # cached per-vertex distances

    def all_costs():
        return obj.seg(verts[:-1], verts[1:], dv[:-1], dv[1:]) if coarse else obj.seg(verts[:-1], verts[1:])

    step_scale = 0.35
    for it in range(iterations):
        costs = all_costs()
        # split pass: halve segments that dominate the objective
        if len(verts) < max_vertices:
            med = float(np.median(costs))
            big = np.where(costs > 1.6 * med)[0]
            budget = max_vertices - len(verts)
            if len(big) > budget:
                big = big[np.argsort(-costs[big])[:budget]]
            if len(big):
                bigset = set(int(b) for b in big)
                out, out_d = [], []
                for i in range(len(verts) - 1):
                    out.append(verts[i])
                    out_d.append(dv[i])
                    if i in bigset:
                        out.append(0.5 * (verts[i] + verts[i + 1]))
                        out_d.append(np.nan)
                out.append(verts[-1])
                out_d.append(dv[-1])
                verts = np.array(out)
                dv = np.array(out_d)
                new = np.isnan(dv)
                if np.any(new):
                    dv[new] = domain.boundary_distance_many(verts[new])

        improved = False
        for parity in (1, 0):
            idx = np.arange(1 + parity, len(verts) - 1, 2)
            if len(idx) == 0:
                continue
            left, cur, right = verts[idx - 1], verts[idx], verts[idx + 1]
            dl, dc, dr = dv[idx - 1], dv[idx], dv[idx + 1]
            seg_here = np.minimum(
                np.linalg.norm(cur - left, axis=1), np.linalg.norm(right - cur, axis=1)
            )
            step = step_scale * np.minimum(dc, np.maximum(seg_here, 1e-12))
            mid = 0.5 * (left + right)
            props = [mid, 0.5 * (cur + mid)]
            for d_ax in range(n):
                for delta in (1.0, -1.0, 1.0j, -1.0j):
                    p = cur.copy()
                    p[:, d_ax] = p[:, d_ax] + delta * step
                    props.append(p)
            P = np.stack(props, axis=1)  # (m, nprop, n)
            m, nprop = P.shape[0], P.shape[1]
            flat = P.reshape(-1, n)
            ok = domain.contains_many(flat)
            d_flat = None
            if coarse:
                d_flat = np.full(len(flat), np.nan)
                d_flat[ok] = domain.boundary_distance_many(flat[ok])
            okm = ok.reshape(m, nprop)
            Lrep = np.repeat(left, nprop, axis=0)
            Rrep = np.repeat(right, nprop, axis=0)
            if coarse:
                c1 = obj.seg(Lrep, flat, np.repeat(dl, nprop), d_flat).reshape(m, nprop)
                c2 = obj.seg(flat, Rrep, d_flat, np.repeat(dr, nprop)).reshape(m, nprop)
                cur_cost = obj.seg(left, cur, dl, dc) + obj.seg(cur, right, dc, dr)
            else:
                c1 = obj.seg(Lrep, flat).reshape(m, nprop)
                c2 = obj.seg(flat, Rrep).reshape(m, nprop)
                cur_cost = obj.seg(left, cur) + obj.seg(cur, right)
            cand_cost = np.where(okm, c1 + c2, np.inf)
            best = np.argmin(cand_cost, axis=1)
            best_cost = cand_cost[np.arange(m), best]
            accept = best_cost < cur_cost - 1e-13
            if np.any(accept):
                improved = True
                verts[idx[accept]] = P[np.arange(m), best][accept]
                if coarse:
                    dv[idx[accept]] = d_flat.reshape(m, nprop)[np.arange(m), best][accept]
                else:
                    dv[idx[accept]] = domain.boundary_distance_many(verts[idx[accept]])

        # shortcut pass every few iterations: drop vertices that no longer pay
        if it % 5 == 4 and len(verts) > 3:
            costs = all_costs()
            inner = np.arange(1, len(verts) - 1)
            if coarse:
                direct = obj.seg(verts[inner - 1], verts[inner + 1], dv[inner - 1], dv[inner + 1])
            else:
                direct = obj.seg(verts[inner - 1], verts[inner + 1])
            gain = costs[inner - 1] + costs[inner] - direct
            drop = []
            last = -2
            for i_local, i in enumerate(inner):
                if gain[i_local] > 1e-13 and i > last + 1:
                    drop.append(i)
                    last = i
            if drop:
                keep = np.ones(len(verts), dtype=bool)
                keep[drop] = False
                verts = verts[keep]
                dv = dv[keep]

        if not improved:
            step_scale *= 0.6
            if step_scale < 1e-6:
                break

    refined = Curve(verts)
    length_out = curve_kappa_length(field, refined, "upper", coarse=coarse)
    if length_out > length_in + 1e-12:  # paranoid guard; descent is accept-only
        return curve
    return refined


# ---------------------------------------------------------------------------
# Certification and the full solve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicResult:
    curve: Curve
    upper_length: float
    lower_distance: float
    lambda_cert: float
    diagnostics: dict

    def __post_init__(self):
        if self.lambda_cert < 1.0 - 1e-6:
            raise SolverError("certified lambda below 1")
        if self.upper_length < self.lower_distance - 1e-6:
            raise SolverError("upper length below lower distance")

    def to_json(self) -> dict:
        return {
            "curve": self.curve.to_json(),
            "upper_length": self.upper_length,
            "lower_distance": self.lower_distance,
            "lambda_cert": self.lambda_cert,
            "diagnostics": self.diagnostics,
        }


def _segment_certified_uppers(field: MetricField, curve: Curve, coarse: bool,
                              rel_tol: float = 1e-6) -> np.ndarray:
    """Per-segment certified upper lengths, level-doubled in one batch."""
    verts = curve.vertices
    A = verts[:-1]
    V = np.diff(verts, axis=0)
    n = verts.shape[1]

    def level(k: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, 2 * k + 1)
        Z = (A[:, None, :] + t[None, :, None] * V[:, None, :]).reshape(-1, n)
        Vf = np.repeat(V, len(t), axis=0)
        vals = field.kappa_upper_batch(Z, Vf, coarse=coarse).reshape(len(A), len(t))
        a, m, b = vals[:, 0:-2:2], vals[:, 1:-1:2], vals[:, 2::2]
        est = np.maximum(0.5 * (a + b), m)
        return np.sum(est, axis=1) / k

    prev = level(8)
    k = 16
    for _ in range(8):
        cur = level(k)
        tot_prev, tot_cur = float(np.sum(prev)), float(np.sum(cur))
        if abs(tot_cur - tot_prev) <= rel_tol * max(abs(tot_cur), 1e-300):
            return cur
        prev = cur
        k *= 2
    return prev


def certify_lambda(
    curve: Curve,
    field: MetricField,
    domain: Domain | None = None,
    profile: GaugeProfile | None = None,
    n_pairs: int = 24,
    constants: BoundConstants = BoundConstants(),
    seed: int = 0,
    coarse: bool | None = None,
) -> tuple[float, dict]:
    """Worst ratio of certified upper sub-length to certified lower distance.

    Pairs sampled: the endpoints, every dyadic split pair to depth 3, and
    ``n_pairs`` seeded random vertex pairs.  Returns inf when a lower bound
    degenerates to zero for a distinct pair.
    """
    if domain is None:
        domain = field.domain
    if coarse is None:
        coarse = not field.exact
    if curve.degenerate:
        return 1.0, {"pairs": 0, "note": "degenerate curve"}
    seg_up = _segment_certified_uppers(field, curve, coarse)
    cum_up = np.concatenate([[0.0], np.cumsum(seg_up)])
    cum_len = curve.cum_param()
    total = cum_len[-1]
    nv = len(curve.vertices)

    def vertex_at_fraction(f: float) -> int:
        return int(np.argmin(np.abs(cum_len - f * total)))

    pair_idx = {(0, nv - 1)}
    for depth in (1, 2, 3):
        marks = [vertex_at_fraction(j / 2**depth) for j in range(2**depth + 1)]
        for a, b in zip(marks[:-1], marks[1:]):
            if a != b:
                pair_idx.add((min(a, b), max(a, b)))
    rng = np.random.default_rng(seed)
    for _ in range(n_pairs):
        a, b = rng.integers(0, nv, size=2)
        if a != b:
            pair_idx.add((int(min(a, b)), int(max(a, b))))

    use_oracle = has_exact_distance(domain)
    pairs = sorted(pair_idx)
    U = curve.vertices[[a for a, _ in pairs]]
    W = curve.vertices[[b for _, b in pairs]]
    sep = np.linalg.norm(U - W, axis=1)
    live = sep > 1e-12
    ups = np.array([cum_up[b] - cum_up[a] for a, b in pairs])
    if use_oracle:
        lows = exact_distance_batch(domain, U, W)
    else:
        lows = best_lower_batch(domain, profile, U, W, constants)
    diag = {
        "pairs": len(pairs),
        "lower_reference": "oracle" if use_oracle else "bundle",
    }
    if np.any(live & (lows <= 0.0)):
        diag["degenerate_lower"] = True
        return math.inf, diag
    worst = 1.0
    worst_pair = None
    for i in np.where(live)[0]:
        ratio = float(ups[i] / lows[i])
        if ratio > worst:
            worst = ratio
            worst_pair = pairs[i]
    diag["worst_pair"] = worst_pair
    return worst, diag


def exact_disc_geodesic(a: complex, b: complex, n_vertices: int = 129) -> Curve:
    """Polyline along the hyperbolic geodesic of the unit disc through a, b.

    Either a straight chord through the origin or the arc of the circle
    orthogonal to the unit circle.
    """
    a, b = complex(a), complex(b)
    if abs(a) >= 1 or abs(b) >= 1:
        raise SolverError("geodesic oracle needs interior points")
    if abs(a - b) < 1e-15:
        return Curve(np.array([[a]], dtype=np.complex128))
    cross = (np.conj(a) * b).imag
    if abs(cross) < 1e-14 * max(abs(a), abs(b), 1e-30) or abs(a) < 1e-15 or abs(b) < 1e-15:
        t = np.linspace(0.0, 1.0, n_vertices)
        pts = (1 - t) * a + t * b
        return Curve(pts[:, None])
    # orthogonal circle: |z - c|^2 = |c|^2 - 1 with Re(conj(c) z) = (|z|^2+1)/2
    M = np.array([[a.real, a.imag], [b.real, b.imag]])
    rhs = np.array([(abs(a) ** 2 + 1) / 2.0, (abs(b) ** 2 + 1) / 2.0])
    cx, cy = np.linalg.solve(M, rhs)
    c = complex(cx, cy)
    r = math.sqrt(abs(c) ** 2 - 1.0)
    th_a = np.angle(a - c)
    th_b = np.angle(b - c)
    th_far = np.angle(c)  # direction from c to the farthest-from-origin point
    # walk the arc from a to b on the side avoiding the far point
    span = (th_b - th_a) % (2 * np.pi)
    far = (th_far - th_a) % (2 * np.pi)
    if far < span:  # the short way passes the far point; go the other way
        span = span - 2 * np.pi
    t = np.linspace(0.0, 1.0, n_vertices)
    th = th_a + span * t
    pts = c + r * np.exp(1j * th)
    return Curve(pts[:, None])


def solve_geodesic(
    domain: Domain,
    x,
    y,
    config: SolverConfig | None = None,
    field: MetricField | None = None,
    lattice: Lattice | None = None,
    constants: BoundConstants = BoundConstants(),
) -> GeodesicResult:
    """Near-geodesic between interior points with certified bounds.

    Shortest lattice path under upper weights, then local shortening; the
    result carries a certified upper length, the best closed-form (or oracle)
    lower distance, and the certified quasi-geodesic factor.
    """
    if field is None:
        field = MetricField(domain)
    if config is None:
        config = default_config(domain)
    xx = as_point(x, domain.dim)
    yy = as_point(y, domain.dim)
    for p in (xx, yy):
        if not domain.contains(p):
            raise SolverError("endpoints must be interior")
    if np.linalg.norm(xx - yy) < 1e-15:
        curve = Curve(np.array([xx]))
        return GeodesicResult(curve, 0.0, 0.0, 1.0, {"degenerate": True})

    # canonical endpoint order makes solve(x, y) and solve(y, x) identical
    swapped = tuple(np.ravel(_real_embed(yy[None, :]))) < tuple(np.ravel(_real_embed(xx[None, :])))
    if swapped:
        xx, yy = yy, xx

    if lattice is None:
        lattice = build_lattice(domain, config, field)
    coarse = lattice.coarse

    nodes = lattice.nodes
    tree = cKDTree(_real_embed(nodes))
    kq = min(config.stitch_degree, len(nodes))
    neighbors = list(lattice.neighbors)
    n_base = len(nodes)
    ids = {"x": n_base, "y": n_base + 1}
    all_nodes = np.vstack([nodes, xx[None, :], yy[None, :]])
    neighbors.append((np.empty(0, dtype=int), np.empty(0)))
    neighbors.append((np.empty(0, dtype=int), np.empty(0)))

    def stitch(idx_new: int, p: np.ndarray):
        _, jj = tree.query(_real_embed(p[None, :]), k=kq)
        targets = np.atleast_1d(np.asarray(jj).ravel())
        A = np.repeat(p[None, :], len(targets), axis=0)
        w = _segment_upper_weights(field, A, nodes[targets], coarse)
        old_i, old_w = neighbors[idx_new]
        neighbors[idx_new] = (np.concatenate([old_i, targets]), np.concatenate([old_w, w]))
        for j, wt in zip(targets, w):
            oi, ow = neighbors[int(j)]
            neighbors[int(j)] = (np.concatenate([oi, [idx_new]]), np.concatenate([ow, [wt]]))

    stitch(ids["x"], xx)
    stitch(ids["y"], yy)
    # direct edge so very close pairs never detour
    wdir = _segment_upper_weights(field, xx[None, :], yy[None, :], coarse)[0]
    ix, iy = ids["x"], ids["y"]
    oi, ow = neighbors[ix]
    neighbors[ix] = (np.concatenate([oi, [iy]]), np.concatenate([ow, [wdir]]))
    oi, ow = neighbors[iy]
    neighbors[iy] = (np.concatenate([oi, [ix]]), np.concatenate([ow, [wdir]]))

    path = _dijkstra(neighbors, ix, iy)
    raw = Curve(all_nodes[path])
    lattice_upper = curve_kappa_length(field, raw, "upper", coarse=coarse)

    refined = refine_curve(raw, field, iterations=config.refine_iterations,
                           max_vertices=config.max_vertices, coarse=coarse)
    if swapped:
        refined = refined.reversed()
        xx, yy = yy, xx
    upper = curve_kappa_length(field, refined, "upper", coarse=coarse)

    profile = field.profile
    if has_exact_distance(domain):
        lower = exact_distance(domain, xx, yy)
    else:
        lower = lower_distance_bundle(domain, profile, xx, yy, constants).best_lower()
    lam, lam_diag = certify_lambda(
        refined, field, domain, profile, n_pairs=config.cert_pairs,
        constants=constants, seed=config.seed, coarse=coarse,
    )
    lam = max(lam, 1.0)
    diag = {
        "lattice_nodes": len(nodes),
        "lattice_upper": lattice_upper,
        "path_vertices": len(path),
        "refined_vertices": len(refined.vertices),
        "coarse_metric": coarse,
        "swapped": bool(swapped),
        **{f"lambda_{k}": v for k, v in lam_diag.items()},
    }
    if lattice.warnings:
        diag["lattice_warnings"] = list(lattice.warnings)
    return GeodesicResult(refined, upper, max(lower, 0.0), lam, diag)
