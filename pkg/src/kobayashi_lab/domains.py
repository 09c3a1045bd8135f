"""Bounded model domains in C^n with computable boundary-distance oracles.

Every domain here exposes three oracles:

* ``boundary_distance(p)``: Euclidean distance from an interior point to the
  boundary, ``inf{|p - q| : q on the boundary}``.
* ``directional_boundary_distance(p, v)``: the minimum modulus of a COMPLEX
  scalar ``lam`` with ``p + lam*v`` on the boundary.  The minimisation over
  complex multiples (not just real ones) is what makes this quantity the right
  input for Kobayashi-Royden estimates on convex domains.
* ``nearest_boundary_direction(p)``: a unit direction attaining the plain
  boundary distance.

Shipped models: the unit disc, the unit ball in C^n (n <= 3), the ellipsoid
``|z1|^2 + |z2|^(2m) < 1`` in C^2, and bounded intersections of real
half-spaces ``Re<z, a_j> < b_j``.  Disc/ball/half-space oracles are closed
form; the ellipsoid uses 1-D root finding on the reduced modulus problem.

Points and directions are numpy arrays of complex128 with shape ``(n,)``.
The Hermitian inner product convention is ``<z, a> = sum(z_k * conj(a_k))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog


class DomainError(ValueError):
    """Invalid domain construction or query."""


class OutsideDomainError(DomainError):
    """A point required to be interior is not."""


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Coerce to a complex point array, checking finiteness and dimension."""
    z = np.atleast_1d(np.asarray(p, dtype=np.complex128))
    if z.ndim != 1:
        raise DomainError(f"point must be one-dimensional, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("point has non-finite entries")
    if dim is not None and z.size != dim:
        raise DomainError(f"dimension mismatch: point has {z.size}, domain has {dim}")
    return z


def as_direction(v, dim: int | None = None) -> np.ndarray:
    """Coerce to a nonzero complex direction array."""
    w = as_point(v, dim)
    if np.linalg.norm(w) == 0.0:
        raise DomainError("direction must be nonzero")
    return w


def _unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform points on the unit sphere of C^dim, shape (count, dim)."""
    w = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


@dataclass(frozen=True)
class Domain:
    """Base class for bounded models; value-semantic and immutable."""

    label: str = field(init=False, default="domain")
    dim: int = field(init=False, default=1)
    convex: bool = field(init=False, default=True)
    # Dini-smooth boundary, asserted analytically per model.  Half-space
    # intersections carry smooth=False and are excluded from verifiers that
    # assume a smooth boundary.
    smooth: bool = field(init=False, default=True)

    # -- membership -------------------------------------------------------

    def contains(self, p) -> bool:
        z = as_point(p, self.dim)
        return self._defining(z[None, :])[0] < 0.0

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return self._defining(np.asarray(pts, dtype=np.complex128)) < 0.0

    def _defining(self, pts: np.ndarray) -> np.ndarray:
        """Defining function rho, negative inside; vectorised over rows."""
        raise NotImplementedError

    # -- boundary distance --------------------------------------------------

    def boundary_distance(self, p) -> float:
        z = as_point(p, self.dim)
        if not self.contains(z):
            raise OutsideDomainError(f"point {z} is not interior to {self.label}")
        return float(self.boundary_distance_many(z[None, :])[0])

    def boundary_distance_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def directional_boundary_distance(self, p, v) -> float:
        z = as_point(p, self.dim)
        w = as_direction(v, self.dim)
        if not self.contains(z):
            raise OutsideDomainError(f"point {z} is not interior to {self.label}")
        return self._directional(z, w)

    def _directional(self, z: np.ndarray, v: np.ndarray) -> float:
        raise NotImplementedError

    def directional_many(self, Z: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Batched directional distances; rows of Z paired with rows of V."""
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        return np.array([self._directional(z, v) for z, v in zip(Z, V)])

    def nearest_boundary_direction(self, p) -> tuple[np.ndarray, bool]:
        """Unit direction v with delta(p; v) = delta(p); flag marks ties."""
        raise NotImplementedError

    # -- global size --------------------------------------------------------

    def inradius(self) -> float:
        raise NotImplementedError

    def diameter(self) -> tuple[float, bool]:
        """(value, exact); inexact values are upper bounds within factor 2."""
        raise NotImplementedError

    # -- sampling -----------------------------------------------------------

    def sample_interior(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Rejection-sample interior points from the bounding box."""
        lo, hi = self._bounding_box()
        out = np.empty((count, self.dim), dtype=np.complex128)
        got = 0
        for _ in range(10_000):
            m = max(4 * (count - got), 16)
            cand = rng.uniform(lo, hi, size=(m, 2 * self.dim))
            pts = cand[:, : self.dim] + 1j * cand[:, self.dim :]
            pts = pts[self.contains_many(pts)]
            take = min(len(pts), count - got)
            out[got : got + take] = pts[:take]
            got += take
            if got == count:
                return out
        raise DomainError("interior sampling failed to fill the request")

    def sample_in_band(
        self, rng: np.random.Generator, count: int, band: tuple[float, float]
    ) -> np.ndarray:
        """Sample interior points with boundary distance inside ``band``.

        Composes an interior draw with boundary projection plus an inward
        offset, so thin bands do not starve; every returned point is checked
        against the exact oracle.
        """
        lo, hi = band
        if not (0.0 < lo <= hi < self.inradius()):
            raise DomainError(f"band {band} not within (0, inradius)")
        out = np.empty((count, self.dim), dtype=np.complex128)
        got = 0
        for _ in range(400 * count):
            target = rng.uniform(lo, hi)
            p = self._point_at_depth(rng, target)
            if p is None:
                continue
            d = self.boundary_distance_many(p[None, :])[0]
            if lo - 1e-12 <= d <= hi + 1e-12:
                out[got] = p
                got += 1
                if got == count:
                    return out
        raise DomainError(f"band {band} sampling starved after bounded attempts")

    def _point_at_depth(self, rng: np.random.Generator, target: float) -> np.ndarray | None:
        """One candidate point at the requested boundary distance, or None."""
        q = self.sample_interior(rng, 1)[0]
        v, _ = self.nearest_boundary_direction(q)
        dq = self.boundary_distance_many(q[None, :])[0]
        # q + dq*v sits on the boundary; step back in by the target depth
        cand = q + (dq - target) * v
        if self.contains(cand):
            return cand
        return None

    def _bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis bounds for (Re z_1..Re z_n, Im z_1..Im z_n)."""
        raise NotImplementedError

    # -- serialisation ------------------------------------------------------

    def descriptor(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)


# ---------------------------------------------------------------------------
# Disc and ball
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitDisc(Domain):
    """Open unit disc in C."""

    def __post_init__(self):
        object.__setattr__(self, "label", "disc")
        object.__setattr__(self, "dim", 1)

    def _defining(self, pts):
        return np.abs(pts[:, 0]) - 1.0

    def boundary_distance_many(self, pts):
        return 1.0 - np.abs(pts[:, 0])

    def _directional(self, z, v):
        return (1.0 - abs(z[0])) / abs(v[0])

    def directional_many(self, Z, V):
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        return (1.0 - np.abs(Z[:, 0])) / np.abs(V[:, 0])

    def nearest_boundary_direction(self, p):
        z = as_point(p, 1)
        if abs(z[0]) < 1e-14:
            return np.array([1.0 + 0.0j]), True
        return np.array([z[0] / abs(z[0])]), False

    def inradius(self):
        return 1.0

    def diameter(self):
        return 2.0, True

    def sample_in_band(self, rng, count, band):
        lo, hi = band
        if not (0.0 < lo <= hi < 1.0):
            raise DomainError(f"band {band} not within (0, inradius)")
        d = rng.uniform(lo, hi, size=count)
        ang = rng.uniform(0.0, 2.0 * np.pi, size=count)
        return ((1.0 - d) * np.exp(1j * ang))[:, None]

    def _bounding_box(self):
        return np.array([-1.0, -1.0]), np.array([1.0, 1.0])

    def descriptor(self):
        return {"kind": "disc"}


@dataclass(frozen=True)
class UnitBall(Domain):
    """Open Euclidean unit ball in C^n, n in {1, 2, 3}."""

    n: int = 2

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise DomainError("ball dimension must be 1, 2 or 3")
        object.__setattr__(self, "label", f"ball{self.n}")
        object.__setattr__(self, "dim", self.n)

    def _defining(self, pts):
        return np.linalg.norm(pts, axis=1) - 1.0

    def boundary_distance_many(self, pts):
        return 1.0 - np.linalg.norm(pts, axis=1)

    def _directional(self, z, v):
        # min |lam| with |z + lam v| = 1: align the phase of lam <v,z> and
        # solve the quadratic in |lam|.
        ip = abs(np.vdot(z, v))  # |<v, z>|
        nv2 = float(np.vdot(v, v).real)
        nz2 = float(np.vdot(z, z).real)
        return (-ip + math.sqrt(ip * ip + nv2 * (1.0 - nz2))) / nv2

    def directional_many(self, Z, V):
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        ip = np.abs(np.sum(V * Z.conj(), axis=1))
        nv2 = np.sum(np.abs(V) ** 2, axis=1)
        nz2 = np.sum(np.abs(Z) ** 2, axis=1)
        return (-ip + np.sqrt(ip * ip + nv2 * (1.0 - nz2))) / nv2

    def nearest_boundary_direction(self, p):
        z = as_point(p, self.dim)
        r = np.linalg.norm(z)
        if r < 1e-14:
            e = np.zeros(self.dim, dtype=np.complex128)
            e[0] = 1.0
            return e, True
        return z / r, False

    def inradius(self):
        return 1.0

    def diameter(self):
        return 2.0, True

    def sample_in_band(self, rng, count, band):
        lo, hi = band
        if not (0.0 < lo <= hi < 1.0):
            raise DomainError(f"band {band} not within (0, inradius)")
        d = rng.uniform(lo, hi, size=count)
        u = _unit_vectors(rng, count, self.dim)
        return (1.0 - d)[:, None] * u

    def _bounding_box(self):
        return -np.ones(2 * self.dim), np.ones(2 * self.dim)

    def descriptor(self):
        return {"kind": "ball", "n": self.n}


# ---------------------------------------------------------------------------
# Ellipsoid |z1|^2 + |z2|^(2m) < 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ellipsoid(Domain):
    """Egg domain ``|z1|^2 + |z2|^(2m) < 1`` in C^2 with exponent m >= 1.

    For m = 1 this is the unit ball of C^2.  For m > 1 the boundary flattens
    along the z2 directions at the points (e^{i t}, 0), which makes the
    directional distance there scale like delta^(1/(2m)).
    """

    m: float = 2.0

    def __post_init__(self):
        if not (1.0 <= self.m <= 8.0):
            raise DomainError("ellipsoid exponent m must lie in [1, 8]")
        object.__setattr__(self, "label", f"ellipsoid-m{self.m:g}")
        object.__setattr__(self, "dim", 2)

    def _defining(self, pts):
        return np.abs(pts[:, 0]) ** 2 + np.abs(pts[:, 1]) ** (2.0 * self.m) - 1.0

    # The moduli reduction: for z = (z1, z2) with a = |z1|, b = |z2| the
    # nearest boundary point shares the phases of z, so the distance equals
    # the planar distance from (a, b) to the curve u^2 + w^(2m) = 1, u,w >= 0.

    def _profile_u(self, w):
        return np.sqrt(np.maximum(0.0, 1.0 - w ** (2.0 * self.m)))

    def boundary_distance_many(self, pts):
        pts = np.asarray(pts, dtype=np.complex128)
        a = np.abs(pts[:, 0])
        b = np.abs(pts[:, 1])
        grid = np.linspace(0.0, 1.0, 257)
        u = self._profile_u(grid)
        # squared distance to the curve sampled on the grid, (npts, ngrid)
        d2 = (a[:, None] - u[None, :]) ** 2 + (b[:, None] - grid[None, :]) ** 2
        k = np.argmin(d2, axis=1)
        lo = grid[np.maximum(k - 1, 0)]
        hi = grid[np.minimum(k + 1, len(grid) - 1)]
        # golden-section polish of the 1-D projection, vectorised over points
        # golden-section polish; the squared distance is locally quadratic in
        # the curve parameter, so interval width 1e-5 already pins the value
        # to ~1e-10 and 32 rounds leave ample margin
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = hi - invphi * (hi - lo)
        d = lo + invphi * (hi - lo)
        fc = (a - self._profile_u(c)) ** 2 + (b - c) ** 2
        fd = (a - self._profile_u(d)) ** 2 + (b - d) ** 2
        for _ in range(32):
            shrink = fc < fd
            hi = np.where(shrink, d, hi)
            lo = np.where(shrink, lo, c)
            c = hi - invphi * (hi - lo)
            d = lo + invphi * (hi - lo)
            fc = (a - self._profile_u(c)) ** 2 + (b - c) ** 2
            fd = (a - self._profile_u(d)) ** 2 + (b - d) ** 2
        w = 0.5 * (lo + hi)
        best = np.sqrt((a - self._profile_u(w)) ** 2 + (b - w) ** 2)
        return best

    def _boundary_projection(self, z: np.ndarray) -> np.ndarray:
        """Nearest boundary point (same phases as z)."""
        a, b = abs(z[0]), abs(z[1])
        grid = np.linspace(0.0, 1.0, 257)
        u = self._profile_u(grid)
        d2 = (a - u) ** 2 + (b - grid) ** 2
        k = int(np.argmin(d2))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        f = lambda w: (a - self._profile_u(np.asarray([w]))[0]) ** 2 + (b - w) ** 2
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
        fc, fd = f(c), f(d)
        for _ in range(48):
            if fc < fd:
                hi, d, fd = d, c, fc
                c = hi - invphi * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + invphi * (hi - lo)
                fd = f(d)
        w = 0.5 * (lo + hi)
        u = self._profile_u(np.asarray([w]))[0]
        ph1 = z[0] / a if a > 1e-14 else 1.0
        ph2 = z[1] / b if b > 1e-14 else 1.0
        return np.array([u * ph1, w * ph2], dtype=np.complex128)

    def _directional(self, z, v):
        return float(self.directional_many(z[None, :], v[None, :])[0])

    def directional_many(self, Z: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Batched min-modulus complex multiplier reaching the boundary.

        Polar scan over arg(lam) with vectorised radial bisection per angle,
        then zoom rounds plus a parabolic polish around the best angle; the
        first crossing along each ray is unique by convexity.
        """
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        k = len(Z)
        nang = 64
        ang = np.broadcast_to(np.linspace(0.0, 2.0 * np.pi, nang, endpoint=False), (k, nang))
        roots = self._radial_roots(Z, V, ang)
        j = np.argmin(roots, axis=1)
        center = ang[np.arange(k), j]
        best = roots[np.arange(k), j]
        width = 2.0 * np.pi / nang
        rel = np.linspace(-1.0, 1.0, 17)
        for _ in range(4):
            ang = center[:, None] + width * rel[None, :]
            roots = self._radial_roots(Z, V, ang)
            j = np.argmin(roots, axis=1)
            center = ang[np.arange(k), j]
            best = np.minimum(best, roots[np.arange(k), j])
            width *= 2.0 / 16.0
        # parabolic polish through the last bracket
        jj = np.clip(j, 1, roots.shape[1] - 2)
        idx = np.arange(k)
        r0, r1, r2 = roots[idx, jj - 1], roots[idx, jj], roots[idx, jj + 1]
        denom = r0 - 2.0 * r1 + r2
        shift = np.where(np.abs(denom) > 1e-300, 0.5 * (r0 - r2) / np.where(denom == 0, 1.0, denom), 0.0)
        shift = np.clip(shift, -1.0, 1.0)
        step = ang[idx, 1] - ang[idx, 0]
        polished = self._radial_roots(Z, V, (ang[idx, jj] + shift * step)[:, None])[:, 0]
        return np.minimum(best, polished)

    def _radial_roots(self, Z, V, angles: np.ndarray) -> np.ndarray:
        """First r > 0 with Z + r e^{i ang} V on the boundary; (k, m) grid."""
        phase = np.exp(1j * angles)
        z1 = Z[:, 0:1]
        z2 = Z[:, 1:2]
        v1 = phase * V[:, 0:1]
        v2 = phase * V[:, 1:2]
        two_m = 2.0 * self.m

        def rho(r):
            return np.abs(z1 + r * v1) ** 2 + np.abs(z2 + r * v2) ** two_m - 1.0

        nv = np.linalg.norm(V, axis=1)
        cap = (2.0 + np.linalg.norm(Z, axis=1)) / nv
        r_hi = np.broadcast_to(cap[:, None], angles.shape).copy()
        r_lo = np.zeros_like(r_hi)
        if np.any(rho(r_hi) <= 0.0):  # pragma: no cover - defensive
            raise DomainError("internal error: unbounded ray in ellipsoid")
        for _ in range(60):
            mid = 0.5 * (r_lo + r_hi)
            inside = rho(mid) < 0.0
            r_lo = np.where(inside, mid, r_lo)
            r_hi = np.where(inside, r_hi, mid)
        return 0.5 * (r_lo + r_hi)

    def nearest_boundary_direction(self, p):
        z = as_point(p, 2)
        if not self.contains(z):
            raise OutsideDomainError(f"point {z} is not interior to {self.label}")
        if np.linalg.norm(z) < 1e-14:
            return np.array([1.0 + 0.0j, 0.0 + 0.0j]), True
        q = self._boundary_projection(z)
        v = q - z
        nv = np.linalg.norm(v)
        if nv < 1e-15:  # pragma: no cover - interior precondition
            raise OutsideDomainError("projection degenerate; point on boundary?")
        # the direction is ambiguous only when a phase the projection actually
        # uses is undetermined (zero coordinate of z, nonzero in q)
        non_unique = any(
            abs(z[k]) < 1e-12 and abs(q[k]) > 1e-6 for k in range(2)
        )
        return v / nv, non_unique

    def inradius(self):
        # min over the profile curve of sqrt(1 - w^(2m) + w^2) is at w = 0
        return 1.0

    def diameter(self):
        # centrally symmetric: diameter = 2 max |z|; the max of
        # 1 - b^(2m) + b^2 over b in [0, 1] sits at b = m^(-1/(2m-2))
        if self.m == 1.0:
            return 2.0, True
        b = self.m ** (-1.0 / (2.0 * self.m - 2.0))
        return 2.0 * math.sqrt(1.0 - b ** (2.0 * self.m) + b * b), True

    def _point_at_depth(self, rng, target):
        # shoot a random ray from the origin, project, and step inward
        u = _unit_vectors(rng, 1, 2)[0]
        r_lo, r_hi = 0.0, 2.0
        for _ in range(60):
            mid = 0.5 * (r_lo + r_hi)
            if self._defining((mid * u)[None, :])[0] < 0.0:
                r_lo = mid
            else:
                r_hi = mid
        zb = 0.5 * (r_lo + r_hi) * u
        q = zb * (1.0 - 1e-12)
        v, _ = self.nearest_boundary_direction(q)
        cand = q - target * v  # v points outward from q toward the boundary
        if self.contains(cand):
            return cand
        return None

    def _bounding_box(self):
        return -np.ones(4), np.ones(4)

    def descriptor(self):
        return {"kind": "ellipsoid", "m": self.m}


# ---------------------------------------------------------------------------
# Half-space intersections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfspaceIntersection(Domain):
    """Bounded polyhedron ``{z : Re<z, a_j> < b_j for all j}``.

    Co-vectors are normalised to unit Euclidean norm at construction.
    Boundedness and a verifiable interior ball are certified by linear
    programming; construction fails otherwise.  The boundary is not smooth,
    so the model is excluded from verifiers that need Dini smoothness.
    """

    faces_a: tuple = ()  # tuple of tuples of complex entries
    faces_b: tuple = ()

    def __post_init__(self):
        if len(self.faces_a) == 0 or len(self.faces_a) != len(self.faces_b):
            raise DomainError("need matching nonempty face lists")
        A = np.array([as_point(a) for a in self.faces_a], dtype=np.complex128)
        n = A.shape[1]
        if n > 3:
            raise DomainError("half-space models support n <= 3")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise DomainError("zero co-vector")
        A = A / norms[:, None]
        b = np.asarray(self.faces_b, dtype=float) / norms
        object.__setattr__(self, "faces_a", tuple(tuple(row) for row in A))
        object.__setattr__(self, "faces_b", tuple(float(x) for x in b))
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "smooth", False)
        object.__setattr__(self, "label", f"halfspaces{len(b)}d{n}")
        # certify: interior ball (Chebyshev) and bounding box
        Ar = self._real_rows()
        res = linprog(
            c=np.concatenate([np.zeros(2 * n), [-1.0]]),
            A_ub=np.hstack([Ar, np.ones((len(b), 1))]),
            b_ub=b,
            bounds=[(None, None)] * (2 * n) + [(0, None)],
            method="highs",
        )
        if not res.success or res.x[-1] <= 1e-12:
            raise DomainError("half-space intersection has empty interior")
        object.__setattr__(self, "_chebyshev", (res.x[:-1].copy(), float(res.x[-1])))
        lo = np.empty(2 * n)
        hi = np.empty(2 * n)
        support = []
        for d in range(2 * n):
            for sign, tgt in ((1.0, hi), (-1.0, lo)):
                c = np.zeros(2 * n)
                c[d] = -sign
                r = linprog(c=c, A_ub=Ar, b_ub=b, bounds=[(None, None)] * (2 * n), method="highs")
                if r.status == 3:
                    raise DomainError("half-space intersection is unbounded")
                if not r.success:
                    raise DomainError(f"boundedness certification failed: {r.message}")
                tgt[d] = sign * (-r.fun) if sign > 0 else -(-r.fun)
                support.append(r.x.copy())
        lo_fix = np.minimum(lo, hi)
        hi_fix = np.maximum(lo, hi)
        object.__setattr__(self, "_box", (lo_fix, hi_fix))
        pts = np.array(support)
        dmax = 0.0
        for i in range(len(pts)):
            dmax = max(dmax, float(np.max(np.linalg.norm(pts - pts[i], axis=1))))
        object.__setattr__(self, "_support_diameter", dmax)

    def _real_rows(self) -> np.ndarray:
        """Real LP rows: Re<z, a> = (Re a, Im a) . (Re z, Im z)."""
        A = np.array(self.faces_a, dtype=np.complex128)
        return np.hstack([A.real, A.imag])

    def _margins(self, pts: np.ndarray) -> np.ndarray:
        """b_j - Re<p, a_j> for each point/face, shape (npts, nfaces)."""
        A = np.array(self.faces_a, dtype=np.complex128)
        b = np.asarray(self.faces_b)
        ip = pts @ A.conj().T  # <p, a_j>
        return b[None, :] - ip.real

    def _defining(self, pts):
        return -np.min(self._margins(np.asarray(pts, dtype=np.complex128)), axis=1)

    def boundary_distance_many(self, pts):
        return np.min(self._margins(np.asarray(pts, dtype=np.complex128)), axis=1)

    def _directional(self, z, v):
        A = np.array(self.faces_a, dtype=np.complex128)
        margins = self._margins(z[None, :])[0]
        speed = np.abs(A.conj() @ v)  # |<v, a_j>|
        ok = speed > 1e-15
        if not np.any(ok):  # pragma: no cover - would mean unbounded line
            raise DomainError("internal error: direction misses all faces")
        return float(np.min(margins[ok] / speed[ok]))

    def directional_many(self, Z, V):
        Z = np.asarray(Z, dtype=np.complex128)
        V = np.asarray(V, dtype=np.complex128)
        A = np.array(self.faces_a, dtype=np.complex128)
        margins = self._margins(Z)  # (k, faces)
        speed = np.abs(V @ A.conj().T)
        with np.errstate(divide="ignore"):
            ratio = np.where(speed > 1e-15, margins / np.maximum(speed, 1e-300), np.inf)
        return np.min(ratio, axis=1)

    def nearest_boundary_direction(self, p):
        z = as_point(p, self.dim)
        if not self.contains(z):
            raise OutsideDomainError(f"point {z} is not interior to {self.label}")
        margins = self._margins(z[None, :])[0]
        order = np.argsort(margins)
        j = int(order[0])
        tie = len(order) > 1 and margins[order[1]] - margins[j] < 1e-10
        v = np.array(self.faces_a[j], dtype=np.complex128)
        return v, bool(tie)

    def inradius(self):
        return self._chebyshev[1]

    def diameter(self):
        lo, hi = self._box
        diag = float(np.linalg.norm(hi - lo))
        exact = diag <= self._support_diameter * (1.0 + 1e-9)
        return diag, exact

    def _point_at_depth(self, rng, target):
        q = self.sample_interior(rng, 1)[0]
        margins = self._margins(q[None, :])[0]
        j = int(np.argmin(margins))
        a = np.array(self.faces_a[j], dtype=np.complex128)
        cand = q + (margins[j] - target) * a
        if self.contains(cand):
            return cand
        return None

    def _bounding_box(self):
        return self._box

    def descriptor(self):
        return {
            "kind": "halfspaces",
            "faces": [
                {"a": [[c.real, c.imag] for c in row], "b": b}
                for row, b in zip(self.faces_a, self.faces_b)
            ],
        }


# ---------------------------------------------------------------------------
# Module-level operations (functional API mirroring the domain methods)
# ---------------------------------------------------------------------------


def contains(domain: Domain, p) -> bool:
    return domain.contains(p)


def boundary_distance(domain: Domain, p) -> float:
    return domain.boundary_distance(p)


def directional_boundary_distance(domain: Domain, p, v) -> float:
    return domain.directional_boundary_distance(p, v)


def nearest_boundary_direction(domain: Domain, p) -> tuple[np.ndarray, bool]:
    return domain.nearest_boundary_direction(p)


def diameter(domain: Domain) -> tuple[float, bool]:
    return domain.diameter()


@dataclass(frozen=True)
class PairRule:
    """Sampling rule for point pairs: count, depth band, optional separation."""

    count: int
    band: tuple[float, float]
    separation: tuple[float, float] | None = None
    seed: int = 0


def sample_pairs(domain: Domain, rule: PairRule) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic point-pair sample; every point has delta inside the band."""
    rng = np.random.default_rng(rule.seed)
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    attempts = 0
    while len(pairs) < rule.count:
        attempts += 1
        if attempts > 600 * rule.count:
            raise DomainError("pair sampling starved; band/separation too tight")
        x, y = domain.sample_in_band(rng, 2, rule.band)
        if rule.separation is not None:
            s = float(np.linalg.norm(x - y))
            if not (rule.separation[0] <= s <= rule.separation[1]):
                continue
        pairs.append((x, y))
    return pairs


def from_descriptor(desc: dict | str) -> Domain:
    """Build a domain from its JSON descriptor."""
    if isinstance(desc, str):
        desc = json.loads(desc)
    kind = desc.get("kind")
    if kind == "disc":
        return UnitDisc()
    if kind == "ball":
        return UnitBall(n=int(desc.get("n", 2)))
    if kind == "ellipsoid":
        return Ellipsoid(m=float(desc.get("m", 2)))
    if kind == "halfspaces":
        faces = desc.get("faces", [])
        if not faces:
            raise DomainError("halfspaces descriptor needs faces")
        a = [tuple(complex(re, im) for re, im in f["a"]) for f in faces]
        b = tuple(float(f["b"]) for f in faces)
        return HalfspaceIntersection(faces_a=tuple(a), faces_b=b)
    raise DomainError(f"unknown domain kind: {kind!r}")


def unit_cube_c1() -> HalfspaceIntersection:
    """The square |Re z| < 1, |Im z| < 1 in C, a handy non-smooth model."""
    return HalfspaceIntersection(
        faces_a=((1 + 0j,), (-1 + 0j,), (1j,), (-1j,)),
        faces_b=(1.0, 1.0, 1.0, 1.0),
    )
