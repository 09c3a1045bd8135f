import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from kobayashi_lab import (
    DomainError,
    Ellipsoid,
    HalfspaceIntersection,
    OutsideDomainError,
    PairRule,
    UnitBall,
    UnitDisc,
    sample_pairs,
    unit_cube_c1,
)
from kobayashi_lab import domains as domains_mod


def brute_ellipsoid_distance(egg, z):
    """Independent oracle: scipy minimiser on the reduced modulus problem."""
    a, b = abs(z[0]), abs(z[1])

    def f(w):
        u = math.sqrt(max(0.0, 1.0 - w ** (2 * egg.m)))
        return (a - u) ** 2 + (b - w) ** 2

    grid = np.linspace(0.0, 1.0, 4001)
    vals = [f(w) for w in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    return math.sqrt(min(res.fun, vals[0], vals[-1]))


class TestContains:
    def test_disc_center(self, disc):
        assert disc.contains([0])

    def test_disc_boundary_excluded(self, disc):
        assert not disc.contains([1.0])

    def test_ellipsoid_defining_function(self, egg):
        # |0.9|^2 + |0.5|^4 = 0.81 + 0.0625 < 1
        assert egg.contains([0.9, 0.5])
        assert not egg.contains([0.9, 0.8])

    def test_dimension_mismatch(self, disc):
        with pytest.raises(DomainError):
            disc.contains([0.1, 0.2])


class TestBoundaryDistance:
    def test_disc_center(self, disc):
        assert disc.boundary_distance([0]) == pytest.approx(1.0, abs=1e-15)

    def test_cube_center(self):
        cube = unit_cube_c1()
        assert cube.boundary_distance([0]) == pytest.approx(1.0, abs=1e-15)

    def test_ball_radial(self, ball):
        assert ball.boundary_distance([0.6, 0]) == pytest.approx(0.4, abs=1e-14)

    def test_outside_raises(self, disc):
        with pytest.raises(OutsideDomainError):
            disc.boundary_distance([1.2])

    @pytest.mark.parametrize("pt", [(0.9, 0.0), (0.0, 0.9), (0.5, 0.6), (0.3 + 0.2j, -0.4 + 0.5j)])
    def test_ellipsoid_vs_independent_minimiser(self, egg, pt):
        z = np.array(pt, dtype=complex)
        assert egg.boundary_distance(z) == pytest.approx(brute_ellipsoid_distance(egg, z), abs=1e-10)

    def test_ellipsoid_m1_matches_ball(self, ball):
        egg1 = Ellipsoid(1.0)
        rng = np.random.default_rng(0)
        for _ in range(25):
            w = rng.normal(size=2) + 1j * rng.normal(size=2)
            z = 0.95 * rng.uniform() * w / np.linalg.norm(w)
            assert egg1.boundary_distance(z) == pytest.approx(ball.boundary_distance(z), abs=1e-8)


class TestDirectionalDistance:
    def test_disc_radius(self, disc):
        assert disc.directional_boundary_distance([0], [1]) == pytest.approx(1.0, abs=1e-14)

    def test_cube_center_complex_multiplier(self):
        # the complex multiplier reaches the Im-faces at modulus 1 as well
        cube = unit_cube_c1()
        assert cube.directional_boundary_distance([0], [1]) == pytest.approx(1.0, abs=1e-14)

    def test_ball_tangential_slice(self, ball):
        val = ball.directional_boundary_distance([0.5, 0], [0, 1])
        assert val == pytest.approx(math.sqrt(0.75), abs=1e-12)

    def test_zero_direction_rejected(self, ball):
        with pytest.raises(DomainError):
            ball.directional_boundary_distance([0.1, 0], [0, 0])

    def test_ellipsoid_axis(self, egg):
        assert egg.directional_boundary_distance([0, 0], [0, 1]) == pytest.approx(1.0, rel=1e-8)

    def test_ellipsoid_m1_matches_ball_closed_form(self, ball):
        egg1 = Ellipsoid(1.0)
        rng = np.random.default_rng(1)
        for _ in range(20):
            w = rng.normal(size=2) + 1j * rng.normal(size=2)
            z = 0.9 * rng.uniform() * w / np.linalg.norm(w)
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            got = egg1.directional_boundary_distance(z, v)
            want = ball.directional_boundary_distance(z, v)
            assert got == pytest.approx(want, rel=1e-8)

    def test_scaling_law(self, egg):
        z = np.array([0.4 + 0.1j, -0.2 + 0.3j])
        v = np.array([0.3 - 1.0j, 0.8 + 0.2j])
        base = egg.directional_boundary_distance(z, v)
        for c in (2.0 + 1.0j, -0.5j, 3.0, 0.1 - 0.2j):
            scaled = egg.directional_boundary_distance(z, c * v)
            assert scaled * abs(c) == pytest.approx(base, abs=1e-9)

    def test_plain_distance_is_min_over_directions(self, ball):
        rng = np.random.default_rng(7)
        for _ in range(5):
            w = rng.normal(size=2) + 1j * rng.normal(size=2)
            z = 0.8 * rng.uniform() * w / np.linalg.norm(w)
            d = ball.boundary_distance(z)
            dirs = rng.normal(size=(200, 2)) + 1j * rng.normal(size=(200, 2))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            vals = ball.directional_many(np.repeat(z[None, :], 200, axis=0), dirs)
            assert np.all(d <= vals + 1e-9)


class TestNearestDirection:
    def test_disc(self, disc):
        v, tie = disc.nearest_boundary_direction([0.5])
        assert not tie
        assert v[0] == pytest.approx(1.0, abs=1e-12)

    def test_disc_center_ambiguous(self, disc):
        _, tie = disc.nearest_boundary_direction([0.0])
        assert tie

    def test_ball_radial(self, ball):
        v, tie = ball.nearest_boundary_direction([0.6, 0])
        assert not tie
        assert np.allclose(v, [1.0, 0.0], atol=1e-12)

    def test_ellipsoid_flat_axis(self, egg):
        v, _ = egg.nearest_boundary_direction([0.9, 0.0])
        assert abs(v[0] - 1.0) < 1e-6 and abs(v[1]) < 1e-6

    @pytest.mark.parametrize("dom_name", ["disc", "ball", "egg"])
    def test_attains_plain_distance(self, dom_name, disc, ball, egg):
        dom = {"disc": disc, "ball": ball, "egg": egg}[dom_name]
        rng = np.random.default_rng(3)
        pts = dom.sample_in_band(rng, 6, (0.05, 0.4))
        for p in pts:
            v, _ = dom.nearest_boundary_direction(p)
            dd = dom.directional_boundary_distance(p, v)
            assert dd == pytest.approx(dom.boundary_distance(p), abs=1e-6)


class TestDepthMonotonicity:
    def test_inward_normal_monotone(self, ball):
        # walking inward from a near-boundary point, delta never decreases
        p = np.array([0.93, 0.0], dtype=complex)
        v, _ = ball.nearest_boundary_direction(p)
        ds = [ball.boundary_distance(p - t * v) for t in np.linspace(0.0, 0.5, 40)]
        assert all(b >= a - 1e-12 for a, b in zip(ds, ds[1:]))


class TestDiameter:
    def test_disc(self, disc):
        assert disc.diameter() == (2.0, True)

    def test_ball(self, ball):
        assert ball.diameter() == (2.0, True)

    def test_cube_vertex_distance(self):
        d, exact = unit_cube_c1().diameter()
        assert d == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-9)
        assert exact

    def test_egg_closed_form(self, egg):
        # max of 1 - b^4 + b^2 is 5/4 at b = 1/sqrt(2)
        d, exact = egg.diameter()
        assert d == pytest.approx(math.sqrt(5.0), abs=1e-12)
        assert exact


class TestSampling:
    def test_band_membership_disc(self, disc):
        pairs = sample_pairs(disc, PairRule(count=4, band=(0.05, 0.15), seed=7))
        for x, y in pairs:
            for p in (x, y):
                assert 0.05 - 1e-9 <= disc.boundary_distance(p) <= 0.15 + 1e-9

    def test_determinism(self, disc):
        a = sample_pairs(disc, PairRule(count=3, band=(0.05, 0.15), seed=7))
        b = sample_pairs(disc, PairRule(count=3, band=(0.05, 0.15), seed=7))
        for (x1, y1), (x2, y2) in zip(a, b):
            assert np.array_equal(x1, x2) and np.array_equal(y1, y2)

    def test_thin_band_ellipsoid(self, egg):
        pairs = sample_pairs(egg, PairRule(count=6, band=(1e-3, 1e-2), seed=3))
        assert len(pairs) == 6
        for x, y in pairs:
            for p in (x, y):
                assert 1e-3 - 1e-9 <= egg.boundary_distance(p) <= 1e-2 + 1e-9

    def test_separation_law(self, disc):
        pairs = sample_pairs(
            disc, PairRule(count=5, band=(0.05, 0.5), separation=(0.4, 1.2), seed=1)
        )
        for x, y in pairs:
            assert 0.4 <= np.linalg.norm(x - y) <= 1.2

    def test_bad_band_rejected(self, disc):
        with pytest.raises(DomainError):
            disc.sample_in_band(np.random.default_rng(0), 2, (0.5, 1.5))


class TestHalfspaces:
    def test_unbounded_rejected(self):
        with pytest.raises(DomainError):
            HalfspaceIntersection(faces_a=((1 + 0j,),), faces_b=(1.0,))

    def test_empty_interior_rejected(self):
        with pytest.raises(DomainError):
            HalfspaceIntersection(
                faces_a=((1 + 0j,), (-1 + 0j,)), faces_b=(0.0, -0.1)
            )

    def test_cube_inradius_and_flags(self):
        cube = unit_cube_c1()
        assert cube.inradius() == pytest.approx(1.0, abs=1e-9)
        assert cube.convex and not cube.smooth

    def test_nearest_face_direction(self):
        cube = unit_cube_c1()
        v, tie = cube.nearest_boundary_direction([0.5])
        assert not tie
        assert v[0] == pytest.approx(1.0, abs=1e-12)

    def test_non_unit_covectors_normalised(self):
        dom = HalfspaceIntersection(
            faces_a=((2 + 0j,), (-2 + 0j,), (2j,), (-2j,)), faces_b=(2.0, 2.0, 2.0, 2.0)
        )
        assert dom.boundary_distance([0]) == pytest.approx(1.0, abs=1e-12)


class TestDescriptors:
    @pytest.mark.parametrize(
        "desc",
        [
            {"kind": "disc"},
            {"kind": "ball", "n": 2},
            {"kind": "ellipsoid", "m": 2},
        ],
    )
    def test_roundtrip(self, desc):
        dom = domains_mod.from_descriptor(desc)
        again = domains_mod.from_descriptor(dom.descriptor())
        assert again.descriptor() == dom.descriptor()

    def test_halfspace_roundtrip(self):
        cube = unit_cube_c1()
        again = domains_mod.from_descriptor(cube.descriptor())
        assert again.boundary_distance([0.2 + 0.1j]) == pytest.approx(
            cube.boundary_distance([0.2 + 0.1j]), abs=1e-12
        )

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            domains_mod.from_descriptor({"kind": "torus"})


@settings(max_examples=40, deadline=None)
@given(
    re=st.floats(-0.7, 0.7),
    im=st.floats(-0.7, 0.7),
    cre=st.floats(-2, 2),
    cim=st.floats(-2, 2),
)
def test_scaling_property_disc(re, im, cre, cim):
    disc = UnitDisc()
    z = complex(re, im)
    c = complex(cre, cim)
    if abs(z) > 0.95 or abs(c) < 1e-3:
        return
    base = disc.directional_boundary_distance([z], [1.0])
    scaled = disc.directional_boundary_distance([z], [c])
    assert scaled * abs(c) == pytest.approx(base, abs=1e-9)
