"""Plane geometry helpers: angles, polygons, polylines, view cones.

Positions are (x, y, z) triples.  Distances use all three coordinates;
every region/containment test works on the (x, y) projection.  Headings
are plane angles in radians, direction vector (cos h, sin h), and every
angle-valued result is wrapped to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


def vec3(p) -> tuple[float, float, float]:
    """Coerce a 2- or 3-sequence to an (x, y, z) triple."""
    if len(p) == 2:
        return (float(p[0]), float(p[1]), 0.0)
    if len(p) == 3:
        return (float(p[0]), float(p[1]), float(p[2]))
    raise DomainError("expected a 2- or 3-component vector, got %r" % (p,))


def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def distance(a, b) -> float:
    return math.dist(vec3(a), vec3(b))


def distance_xy(a, b) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def heading_vector(h: float) -> tuple[float, float]:
    return (math.cos(h), math.sin(h))


def rotate_xy(v, h: float):
    """Rotate the (x, y) part of v by h radians; z passes through."""
    v = vec3(v)
    c, s = math.cos(h), math.sin(h)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1], v[2])


def angle_of(a, b) -> float:
    """Plane angle of the direction from a to b."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    if abs(dx) < EPS and abs(dy) < EPS:
        raise DomainError("angle of a zero-length direction is undefined")
    return math.atan2(dy, dx)


def point_on_segment_xy(p, a, b, tol: float = EPS) -> bool:
    px, py = p[0], p[1]
    ax, ay, bx, by = a[0], a[1], b[0], b[1]
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    seg_len = math.hypot(bx - ax, by - ay)
    if seg_len < tol:
        return math.hypot(px - ax, py - ay) <= tol
    if abs(cross) / seg_len > tol:
        return False
    dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
    return -tol * seg_len <= dot <= seg_len * seg_len + tol * seg_len


@dataclass(frozen=True)
class Polygon:
    """Simple polygon on the (x, y) plane.  Boundary counts as inside."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 3:
            raise DomainError("polygon needs at least 3 vertices")

    def contains(self, p, tol: float = EPS) -> bool:
        pts = self.points
        n = len(pts)
        for i in range(n):
            if point_on_segment_xy(p, pts[i], pts[(i + 1) % n], tol):
                return True
        # even-odd crossing rule for the interior
        x, y = p[0], p[1]
        inside = False
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            if (y1 > y) != (y2 > y):
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xi:
                    inside = not inside
        return inside

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return (min(xs), min(ys), max(xs), max(ys))

    def intersects_box(self, lo_x: float, lo_y: float,
                       hi_x: float, hi_y: float) -> bool:
        """Whether the polygon meets the axis-aligned box at all."""
        if any(lo_x <= px <= hi_x and lo_y <= py <= hi_y for px, py in self.points):
            return True
        corners = ((lo_x, lo_y), (hi_x, lo_y), (hi_x, hi_y), (lo_x, hi_y))
        if any(self.contains(c) for c in corners):
            return True
        box_edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
        pts = self.points
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            for c, d in box_edges:
                if segments_intersect_xy(a, b, c, d):
                    return True
        return False

    def contains_box(self, lo_x: float, lo_y: float,
                     hi_x: float, hi_y: float) -> bool:
        """Whether the whole box lies inside the polygon."""
        corners = ((lo_x, lo_y), (hi_x, lo_y), (hi_x, hi_y), (lo_x, hi_y))
        if not all(self.contains(c) for c in corners):
            return False
        box_edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
        pts = self.points
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            for c, d in box_edges:
                if segments_intersect_xy(a, b, c, d, proper_only=True):
                    return False
        return True


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect_xy(a, b, c, d, proper_only: bool = False) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and \
            o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if proper_only:
        return False
    for p, (u, v) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
        if point_on_segment_xy(p, u, v):
            return True
    return False


@dataclass(frozen=True)
class Polyline:
    """Open polyline on the (x, y) plane with arc-length parametrization."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise DomainError("polyline needs at least 2 vertices")

    def length(self) -> float:
        return sum(math.dist(self.points[i], self.points[i + 1])
                   for i in range(len(self.points) - 1))

    def point_at(self, s: float) -> tuple[float, float]:
        """Point at arc length s, clamped to the ends."""
        if s <= 0:
            return self.points[0]
        acc = 0.0
        for i in range(len(self.points) - 1):
            a, b = self.points[i], self.points[i + 1]
            seg = math.dist(a, b)
            if acc + seg >= s and seg > 0:
                t = (s - acc) / seg
                return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            acc += seg
        return self.points[-1]

    def heading_at(self, s: float) -> float:
        acc = 0.0
        for i in range(len(self.points) - 1):
            a, b = self.points[i], self.points[i + 1]
            seg = math.dist(a, b)
            if (acc + seg >= s and seg > 0) or i == len(self.points) - 2:
                return math.atan2(b[1] - a[1], b[0] - a[0])
            acc += seg
        return 0.0

    def project(self, p) -> float:
        """Arc length of the closest point of the polyline to p."""
        best_s, best_d = 0.0, math.inf
        acc = 0.0
        for i in range(len(self.points) - 1):
            a, b = self.points[i], self.points[i + 1]
            seg = math.dist(a, b)
            if seg > 0:
                t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (seg * seg)
                t = min(1.0, max(0.0, t))
                q = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
                d = math.hypot(p[0] - q[0], p[1] - q[1])
                if d < best_d:
                    best_d, best_s = d, acc + t * seg
            acc += seg
        return best_s


@dataclass(frozen=True)
class ViewCone:
    """Field of view: full opening angle (radians) and range (meters)."""

    angle: float = math.pi / 2
    distance: float = 50.0

    def contains(self, origin, heading: float, target) -> bool:
        d = distance_xy(origin, target)
        if d > self.distance + EPS:
            return False
        if d < EPS:
            return True
        rel = wrap_angle(angle_of(origin, target) - heading)
        return abs(rel) <= self.angle / 2 + EPS
