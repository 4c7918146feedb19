"""Plane-geometry helpers: angle wrapping, polygons, polylines, cones."""

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from matplotlib.path import Path as MplPath

from squery.errors import DomainError
from squery.geometry import (EPS, Polygon, Polyline, ViewCone, angle_of,
                             distance, distance_xy, rotate_xy,
                             segments_intersect_xy, vec3, wrap_angle)

TAU = math.tau


class TestWrapAngle:
    @pytest.mark.parametrize("raw, expected", [
        (0.0, 0.0),
        (math.pi, math.pi),
        (-math.pi, math.pi),          # half-open interval: -pi maps up
        (3 * math.pi, math.pi),
        (-3 * math.pi, math.pi),
        (TAU, 0.0),
        (-TAU, 0.0),
        (1.5 * math.pi, -0.5 * math.pi),
        (7.0, 7.0 - TAU),
        (0.25, 0.25),
    ])
    def test_known_values(self, raw, expected):
        assert wrap_angle(raw) == pytest.approx(expected, abs=1e-12)

    @given(st.floats(min_value=-1e6, max_value=1e6,
                     allow_nan=False, allow_infinity=False))
    def test_range_and_direction_preserved(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        # same direction vector up to accumulated float error
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-6)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-6)


class TestVectors:
    def test_vec3_promotes_pairs(self):
        assert vec3((1, 2)) == (1.0, 2.0, 0.0)
        assert vec3((1, 2, 3)) == (1.0, 2.0, 3.0)

    def test_vec3_rejects_other_arities(self):
        with pytest.raises(DomainError):
            vec3((1,))
        with pytest.raises(DomainError):
            vec3((1, 2, 3, 4))

    def test_distance_uses_all_axes(self):
        assert distance((0, 0, 0), (1, 2, 2)) == pytest.approx(3.0)
        assert distance((0, 0), (3, 4)) == pytest.approx(5.0)

    def test_distance_xy_ignores_z(self):
        assert distance_xy((0, 0, 0), (3, 4, 100)) == pytest.approx(5.0)

    def test_rotate_xy_passes_z_through(self):
        x, y, z = rotate_xy((1, 0, 5), math.pi / 2)
        assert (x, y) == (pytest.approx(0, abs=1e-12), pytest.approx(1))
        assert z == 5.0

    def test_angle_of(self):
        assert angle_of((0, 0), (1, 1)) == pytest.approx(math.pi / 4)
        assert angle_of((2, 2), (1, 2)) == pytest.approx(math.pi)
        with pytest.raises(DomainError):
            angle_of((1, 1), (1, 1))


class TestPolyline:
    L = Polyline(((0.0, 0.0), (3.0, 0.0), (3.0, 4.0)))

    def test_needs_two_points(self):
        with pytest.raises(DomainError):
            Polyline(((0.0, 0.0),))

    def test_length(self):
        assert self.L.length() == pytest.approx(7.0)

    def test_point_at_interior_and_clamping(self):
        assert self.L.point_at(5.0) == (pytest.approx(3.0), pytest.approx(2.0))
        assert self.L.point_at(-1.0) == (0.0, 0.0)
        assert self.L.point_at(100.0) == (3.0, 4.0)

    def test_heading_follows_segments(self):
        assert self.L.heading_at(1.0) == pytest.approx(0.0)
        assert self.L.heading_at(5.0) == pytest.approx(math.pi / 2)

    def test_project_known_points(self):
        assert self.L.project((4.0, 1.0)) == pytest.approx(4.0)
        assert self.L.project((1.0, -2.0)) == pytest.approx(1.0)
        assert self.L.project((-5.0, 0.0)) == pytest.approx(0.0)

    def test_project_finds_nearest_point(self):
        # the projected point must be (close to) the true closest point,
        # checked against dense arc-length sampling
        rng = random.Random(4821)
        for case in range(500):
            pts = [(rng.uniform(-10, 10), rng.uniform(-10, 10))]
            while len(pts) < rng.randint(2, 6):
                px, py = pts[-1]
                pts.append((px + rng.uniform(-5, 5), py + rng.uniform(-5, 5)))
            try:
                line = Polyline(tuple(pts))
            except DomainError:
                continue
            total = line.length()
            if total < 1e-6:
                continue
            p = (rng.uniform(-12, 12), rng.uniform(-12, 12))
            q = line.point_at(line.project(p))
            d_proj = math.dist(p, q)
            step = total / 400
            d_dense = min(math.dist(p, line.point_at(i * step))
                          for i in range(401))
            assert d_proj <= d_dense + step + 1e-9, \
                "case %d: projection misses nearest point" % case


UNIT_SQUARE = Polygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


class TestPolygon:
    def test_needs_three_points(self):
        with pytest.raises(DomainError):
            Polygon(((0.0, 0.0), (1.0, 0.0)))

    def test_contains_interior_boundary_exterior(self):
        assert UNIT_SQUARE.contains((0.5, 0.5))
        assert UNIT_SQUARE.contains((0.0, 0.0))     # vertices count
        assert UNIT_SQUARE.contains((0.5, 0.0))     # edges count
        assert not UNIT_SQUARE.contains((1.5, 0.5))
        assert not UNIT_SQUARE.contains((0.5, -0.001))

    def test_bounds(self):
        tri = Polygon(((-2.0, 1.0), (3.0, -4.0), (0.0, 5.0)))
        assert tri.bounds() == (-2.0, -4.0, 3.0, 5.0)

    def test_intersects_box(self):
        assert UNIT_SQUARE.intersects_box(0.4, 0.4, 0.6, 0.6)   # box inside
        assert UNIT_SQUARE.intersects_box(-1, -1, 2, 2)         # poly inside
        assert UNIT_SQUARE.intersects_box(0.5, 0.5, 1.5, 1.5)   # overlap
        assert UNIT_SQUARE.intersects_box(1.0, 0.0, 2.0, 1.0)   # shared edge
        assert not UNIT_SQUARE.intersects_box(2.0, 2.0, 3.0, 3.0)

    def test_contains_box(self):
        assert UNIT_SQUARE.contains_box(0.25, 0.25, 0.75, 0.75)
        assert UNIT_SQUARE.contains_box(0.0, 0.0, 1.0, 1.0)     # exact fit
        assert not UNIT_SQUARE.contains_box(0.5, 0.5, 1.5, 1.5)
        assert not UNIT_SQUARE.contains_box(2.0, 2.0, 3.0, 3.0)

    def test_contains_box_rejects_notch(self):
        # corners inside but an edge of the C-shape crosses the box
        c_shape = Polygon(((0, 0), (4, 0), (4, 4), (0, 4), (0, 3),
                           (3, 3), (3, 1), (0, 1)))
        assert not c_shape.contains_box(0.5, 0.5, 3.5, 3.5)
        assert c_shape.contains_box(3.2, 0.5, 3.8, 3.5)


class TestSegments:
    def test_crossing_and_touching(self):
        assert segments_intersect_xy((0, 0), (2, 2), (0, 2), (2, 0))
        assert segments_intersect_xy((0, 0), (2, 0), (1, 0), (1, 5))
        assert not segments_intersect_xy((0, 0), (1, 0), (0, 1), (1, 1))

    def test_proper_only_excludes_touches(self):
        touch = ((0, 0), (2, 0), (1, 0), (1, 5))
        assert segments_intersect_xy(*touch)
        assert not segments_intersect_xy(*touch, proper_only=True)
        cross = ((0, 0), (2, 2), (0, 2), (2, 0))
        assert segments_intersect_xy(*cross, proper_only=True)


class TestViewCone:
    CONE = ViewCone(angle=math.pi / 2, distance=10.0)

    def test_straight_ahead(self):
        assert self.CONE.contains((0, 0), 0.0, (5, 0))

    def test_edge_of_aperture(self):
        assert self.CONE.contains((0, 0), 0.0, (5, 5))       # exactly pi/4
        assert not self.CONE.contains((0, 0), 0.0, (0.1, 5))

    def test_range_limit(self):
        assert not self.CONE.contains((0, 0), 0.0, (11, 0))
        assert self.CONE.contains((0, 0), 0.0, (10, 0))

    def test_origin_always_visible(self):
        assert self.CONE.contains((3, 3), 1.2, (3, 3))

    def test_heading_rotates_cone(self):
        assert self.CONE.contains((0, 0), math.pi, (-5, 0))
        assert not self.CONE.contains((0, 0), math.pi, (5, 0))


def _dist_to_edges(poly: Polygon, p) -> float:
    best = math.inf
    pts = poly.points
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        seg2 = (bx - ax) ** 2 + (by - ay) ** 2
        if seg2 == 0:
            d = math.dist(p, (ax, ay))
        else:
            t = ((p[0] - ax) * (bx - ax) + (p[1] - ay) * (by - ay)) / seg2
            t = min(1.0, max(0.0, t))
            d = math.dist(p, (ax + t * (bx - ax), ay + t * (by - ay)))
        best = min(best, d)
    return best


@st.composite
def star_polygon_and_point(draw):
    # star-shaped around the origin, so the polygon is always simple
    n = draw(st.integers(min_value=3, max_value=8))
    angles = sorted(draw(st.lists(
        st.floats(min_value=0.0, max_value=TAU - 1e-3,
                  allow_nan=False), min_size=n, max_size=n, unique=True)))
    radii = draw(st.lists(
        st.floats(min_value=0.5, max_value=5.0, allow_nan=False),
        min_size=n, max_size=n))
    pts = tuple((r * math.cos(a), r * math.sin(a))
                for a, r in zip(angles, radii))
    point = (draw(st.floats(min_value=-6, max_value=6, allow_nan=False)),
             draw(st.floats(min_value=-6, max_value=6, allow_nan=False)))
    return pts, point


@given(star_polygon_and_point())
def test_polygon_contains_matches_reference(case):
    pts, p = case
    # consecutive near-duplicate angles can produce degenerate edges
    poly = Polygon(pts)
    if _dist_to_edges(poly, p) < 1e-6:
        return      # boundary points are allowed to disagree
    ref = MplPath(pts).contains_point(p)
    assert poly.contains(p) == bool(ref), \
        "polygon %r point %r" % (pts, p)
