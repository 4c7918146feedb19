"""Road maps, regions, and the initial scene check.

A road map is a set of lanes (centerline plus footprint polygon, with
left/right neighbours and successors) and optional named regions.  The
initial scene check asks whether the first frame of a window satisfies
every object's position and heading constraints under a given
correspondence, walking objects in declaration order and bailing out on
the first failure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import dsl, guards
from .errors import (
    FormatError,
    MissingFeatureError,
    SemanticError,
    UnsupportedFeatureError,
    ValidationError,
)
from .geometry import EPS, Polygon, Polyline, ViewCone, angle_of, wrap_angle

POS_TOL = 1e-6     # slack for equality-style position constraints
HEADING_TOL = 1e-9


# ---------------------------------------------------------------------------
# map model

@dataclass(frozen=True)
class Lane:
    id: str
    centerline: Polyline
    polygon: Polygon
    left: str | None = None
    right: str | None = None
    successors: tuple[str, ...] = ()


@dataclass(frozen=True)
class RoadMap:
    lanes: dict[str, Lane]
    regions: dict[str, Polygon] = field(default_factory=dict)

    def validate(self) -> None:
        for lane in self.lanes.values():
            for attr in ("left", "right"):
                nb = getattr(lane, attr)
                if nb is not None and nb not in self.lanes:
                    raise ValidationError(
                        "lane %r: %s neighbour %r does not exist"
                        % (lane.id, attr, nb))
            for succ in lane.successors:
                if succ not in self.lanes:
                    raise ValidationError(
                        "lane %r: successor %r does not exist"
                        % (lane.id, succ))
        # adjacency must be symmetric
        for lane in self.lanes.values():
            if lane.left is not None:
                other = self.lanes[lane.left]
                if other.right != lane.id:
                    raise ValidationError(
                        "lane %r has left neighbour %r but %r's right "
                        "neighbour is %r"
                        % (lane.id, lane.left, lane.left, other.right))
            if lane.right is not None:
                other = self.lanes[lane.right]
                if other.left != lane.id:
                    raise ValidationError(
                        "lane %r has right neighbour %r but %r's left "
                        "neighbour is %r"
                        % (lane.id, lane.right, lane.right, other.left))
        for name in self.regions:
            if name in self.lanes:
                raise ValidationError(
                    "region name %r collides with a lane id" % name)
            if name == "road":
                raise ValidationError("the region name 'road' is reserved")
        if "road" in self.lanes:
            raise ValidationError("the lane id 'road' is reserved")


def map_to_dict(m: RoadMap) -> dict:
    return {
        "lanes": [
            {
                "id": lane.id,
                "centerline": [list(p) for p in lane.centerline.points],
                "polygon": [list(p) for p in lane.polygon.points],
                "left": lane.left,
                "right": lane.right,
                "successors": list(lane.successors),
            }
            for lane in self_sorted(m.lanes)
        ],
        "regions": {name: [list(p) for p in poly.points]
                    for name, poly in sorted(m.regions.items())},
    }


def self_sorted(lanes: dict[str, Lane]) -> list[Lane]:
    return [lanes[k] for k in sorted(lanes)]


def map_from_dict(data: dict) -> RoadMap:
    if not isinstance(data, dict) or "lanes" not in data:
        raise FormatError("road map JSON needs a 'lanes' array")
    lanes: dict[str, Lane] = {}
    for i, entry in enumerate(data["lanes"]):
        try:
            lane = Lane(
                id=str(entry["id"]),
                centerline=Polyline([tuple(map(float, p))
                                     for p in entry["centerline"]]),
                polygon=Polygon([tuple(map(float, p))
                                 for p in entry["polygon"]]),
                left=entry.get("left"),
                right=entry.get("right"),
                successors=tuple(entry.get("successors", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("lane #%d is malformed: %s" % (i, exc)) from exc
        if lane.id in lanes:
            raise ValidationError("duplicate lane id %r" % lane.id)
        lanes[lane.id] = lane
    regions = {}
    for name, pts in data.get("regions", {}).items():
        try:
            regions[str(name)] = Polygon([tuple(map(float, p)) for p in pts])
        except (TypeError, ValueError) as exc:
            raise FormatError("region %r is malformed: %s" % (name, exc)) from exc
    m = RoadMap(lanes=lanes, regions=regions)
    m.validate()
    return m


def load_map(path: str) -> RoadMap:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("not valid JSON: %s" % exc) from exc
    return map_from_dict(data)


def save_map(m: RoadMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(map_to_dict(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# region values

class LaneRegion:
    __slots__ = ("lane",)

    def __init__(self, lane: Lane):
        self.lane = lane

    def contains_point(self, p) -> bool:
        return self.lane.polygon.contains(p)

    def box_test(self, box):
        (lx, hx), (ly, hy) = box[0], box[1]
        may_in = self.lane.polygon.intersects_box(lx, ly, hx, hy)
        may_out = not self.lane.polygon.contains_box(lx, ly, hx, hy)
        return may_in, may_out


class RoadRegion:
    __slots__ = ("lanes",)

    def __init__(self, lanes):
        self.lanes = tuple(lanes)

    def contains_point(self, p) -> bool:
        return any(lane.polygon.contains(p) for lane in self.lanes)

    def box_test(self, box):
        (lx, hx), (ly, hy) = box[0], box[1]
        may_in = any(lane.polygon.intersects_box(lx, ly, hx, hy)
                     for lane in self.lanes)
        # a box split across two lanes is conservatively "maybe outside"
        may_out = not any(lane.polygon.contains_box(lx, ly, hx, hy)
                          for lane in self.lanes)
        return may_in, may_out


class NamedRegion:
    __slots__ = ("name", "polygon")

    def __init__(self, name: str, polygon: Polygon):
        self.name = name
        self.polygon = polygon

    def contains_point(self, p) -> bool:
        return self.polygon.contains(p)

    def box_test(self, box):
        (lx, hx), (ly, hy) = box[0], box[1]
        return (self.polygon.intersects_box(lx, ly, hx, hy),
                not self.polygon.contains_box(lx, ly, hx, hy))


class ConeFilteredRegion:
    """A region restricted to (or excluding) a viewer's field of view."""

    __slots__ = ("base", "origin", "heading", "cone", "negated")

    def __init__(self, base, origin, heading, cone: ViewCone, negated: bool):
        self.base = base
        self.origin = origin
        self.heading = heading
        self.cone = cone
        self.negated = negated

    def contains_point(self, p) -> bool:
        seen = self.cone.contains(self.origin, self.heading, p)
        if self.negated:
            seen = not seen
        return seen and self.base.contains_point(p)

    def box_test(self, box):
        may_in, may_out = self.base.box_test(box)
        if all(lo == hi for lo, hi in box):
            p = tuple(lo for lo, _ in box)
            ok = self.contains_point(p)
            return ok, not ok
        # uncertain box vs. cone boundary: stay conservative
        return may_in, True


def resolve_region(m: RoadMap, name: str):
    if name == "road":
        return RoadRegion(m.lanes.values())
    if name in m.lanes:
        return LaneRegion(m.lanes[name])
    if name in m.regions:
        return NamedRegion(name, m.regions[name])
    raise ValidationError("unknown region %r" % name)


def region_names(m: RoadMap) -> set[str]:
    return {"road"} | set(m.lanes) | set(m.regions)


# ---------------------------------------------------------------------------
# view cones from object attributes

def _const_eval(e: dsl.Expr) -> float:
    if isinstance(e, dsl.Num):
        return e.value
    if isinstance(e, dsl.Deg):
        return _const_eval(e.x) * math.pi / 180.0
    if isinstance(e, dsl.Unary) and e.op == "-":
        return -_const_eval(e.x)
    if isinstance(e, dsl.Bin) and e.op in ("+", "-", "*", "/"):
        a, b = _const_eval(e.left), _const_eval(e.right)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise UnsupportedFeatureError("division by zero in an attribute")
        return a / b
    raise UnsupportedFeatureError(
        "view attributes must be constant expressions")


def object_cones(ast: dsl.ScenarioAST) -> dict[str, ViewCone]:
    """Per-object view cones, honouring visibleDistance / viewAngle."""
    cones: dict[str, ViewCone] = {}
    for obj in ast.objects:
        angle, distance = None, None
        for sp in obj.specifiers:
            if isinstance(sp, dsl.WithAttr):
                if sp.name == "viewAngle":
                    angle = _const_eval(sp.value)
                elif sp.name == "visibleDistance":
                    distance = _const_eval(sp.value)
        if angle is not None or distance is not None:
            cones[obj.name] = ViewCone(
                angle=angle if angle is not None else ViewCone.angle,
                distance=distance if distance is not None else ViewCone.distance)
    return cones


# ---------------------------------------------------------------------------
# scene membership helpers

def _scalar_member(value, x: float, tol: float) -> bool:
    """Is x attainable by the (possibly set-valued) scalar `value`?"""
    if isinstance(value, float):
        return abs(value - x) <= tol
    if isinstance(value, int):
        return abs(float(value) - x) <= tol
    if isinstance(value, guards.IntervalUnion):
        return any(lo - tol <= x <= hi + tol for lo, hi in value.pieces)
    raise UnsupportedFeatureError("expected a scalar constraint")


def _angle_member(value, x: float, tol: float) -> bool:
    if isinstance(value, (int, float)):
        return abs(wrap_angle(float(value) - x)) <= tol
    if isinstance(value, guards.IntervalUnion):
        w = guards.iu_wrap(guards.iu_sub(value, x))
        w = guards.lift(w)
        return any(lo - tol <= 0.0 <= hi + tol for lo, hi in w.pieces)
    raise UnsupportedFeatureError("expected an angle constraint")


def _vec_member(value, p, tol: float) -> bool:
    vec = guards._as_vec(value)
    return all(_scalar_member(c if isinstance(c, (guards.IntervalUnion, float))
                              else float(c), x, tol)
               for c, x in zip(vec, p))


def _local_frame(origin, heading: float, p):
    """Longitudinal/lateral coordinates of p in a pose's frame.

    Longitudinal grows along the heading, lateral to the left of it.
    """
    dx, dy = p[0] - origin[0], p[1] - origin[1]
    c, s = math.cos(heading), math.sin(heading)
    lon = dx * c + dy * s
    lat = -dx * s + dy * c
    return lon, lat


# ---------------------------------------------------------------------------
# initial scene check

def _spec_holds(sp, obj_name: str, ctx: guards.EvalContext,
                ast: dsl.ScenarioAST) -> bool:
    state = ctx.obj_state(obj_name)
    pos, heading = state.pos, state.heading

    def ref_state(expr):
        v = guards.eval_expr(expr, ctx)
        if not isinstance(v, guards.ObjVal):
            raise UnsupportedFeatureError("expected an object reference")
        return v

    def viewer_state(name_or_none):
        if name_or_none is None:
            name = "ego"
        elif isinstance(name_or_none, dsl.NameRef):
            name = name_or_none.name
        else:
            raise UnsupportedFeatureError("the viewer must be a named object")
        if name not in {o.name for o in ast.objects}:
            raise SemanticError(
                "visibility needs an %r object" % name)
        return ctx.obj_state(name)

    if isinstance(sp, dsl.AtSpec):
        return _vec_member(guards.eval_expr(sp.pos, ctx), pos, POS_TOL)
    if isinstance(sp, (dsl.InSpec, dsl.OnSpec)):
        # both constrain the footprint point to the region
        region = guards.eval_expr(sp.region, ctx)
        if not hasattr(region, "contains_point"):
            raise UnsupportedFeatureError("expected a region")
        return region.contains_point(pos)
    if isinstance(sp, dsl.OffsetBySpec):
        anchor = viewer_state(None)
        delta = guards._as_vec(guards.eval_expr(sp.delta, ctx))
        target = guards._offset_rotated(anchor.pos, anchor.heading, delta)
        return _vec_member(target, pos, POS_TOL)
    if isinstance(sp, dsl.BeyondSpec):
        ref = ref_state(sp.ref)
        src = viewer_state(None) if sp.source is None else ref_state(sp.source)
        d = math.hypot(ref.pos[0] - src.pos[0], ref.pos[1] - src.pos[1])
        if d < EPS:
            return False
        sight = angle_of(src.pos, ref.pos)
        lon, lat = _local_frame(ref.pos, sight, pos)
        amount = guards.eval_expr(sp.amount, ctx)
        if isinstance(amount, tuple):
            # vector offset in the line-of-sight frame
            return (_scalar_member(amount[0], lon, POS_TOL)
                    and _scalar_member(amount[1], lat, POS_TOL))
        return (_scalar_member(amount, lon, POS_TOL)
                and abs(lat) <= POS_TOL)
    if isinstance(sp, dsl.VisibleSpec):
        viewer = viewer_state(sp.viewer)
        cone = ctx.cone_for(viewer.name)
        return cone.contains(viewer.pos, viewer.heading, pos)
    if isinstance(sp, dsl.AheadOfSpec):
        ref = ref_state(sp.ref)
        lon, lat = _local_frame(ref.pos, ref.heading, pos)
        if sp.amount is None:
            return lon >= -POS_TOL
        amount = guards.eval_expr(sp.amount, ctx)
        return (_scalar_member(amount, lon, POS_TOL)
                and abs(lat) <= POS_TOL)
    if isinstance(sp, dsl.BehindSpec):
        ref = ref_state(sp.ref)
        lon, lat = _local_frame(ref.pos, ref.heading, pos)
        if sp.amount is None:
            return lon <= POS_TOL
        amount = guards.eval_expr(sp.amount, ctx)
        return (_scalar_member(amount, -lon, POS_TOL)
                and abs(lat) <= POS_TOL)
    if isinstance(sp, dsl.FollowingSpec):
        region = guards.eval_expr(sp.lane, ctx)
        if not isinstance(region, LaneRegion):
            raise UnsupportedFeatureError(
                "`following` needs a lane to follow")
        line = region.lane.centerline
        src = viewer_state(None) if sp.source is None else ref_state(sp.source)
        s_src = line.project(src.pos)
        s_obj = line.project(pos)
        on_line = math.dist(line.point_at(s_obj), (pos[0], pos[1])) <= POS_TOL
        amount = guards.eval_expr(sp.amount, ctx)
        return on_line and _scalar_member(amount, s_obj - s_src, POS_TOL)
    if isinstance(sp, dsl.FacingSpec):
        return _angle_member(guards.eval_expr(sp.heading, ctx), heading,
                             HEADING_TOL)
    if isinstance(sp, dsl.FacingTowardSpec):
        p = guards._as_vec(guards.eval_expr(sp.point, ctx))
        if not all(isinstance(c, float) for c in p):
            raise UnsupportedFeatureError("facing toward needs a fixed point")
        return abs(wrap_angle(angle_of(pos, p) - heading)) <= HEADING_TOL
    if isinstance(sp, dsl.FacingAwaySpec):
        p = guards._as_vec(guards.eval_expr(sp.point, ctx))
        if not all(isinstance(c, float) for c in p):
            raise UnsupportedFeatureError("facing away needs a fixed point")
        away = wrap_angle(angle_of(pos, p) + math.pi)
        return abs(wrap_angle(away - heading)) <= HEADING_TOL
    if isinstance(sp, dsl.ApparentlyFacingSpec):
        viewer = viewer_state(sp.viewer)
        sight = angle_of(viewer.pos, pos)
        apparent = wrap_angle(heading - sight)
        return _angle_member(guards.eval_expr(sp.heading, ctx), apparent,
                             HEADING_TOL)
    if isinstance(sp, dsl.WithAttr):
        # behaviour assignment and view parameters are not scene predicates
        return True
    raise UnsupportedFeatureError("unknown specifier %r" % type(sp).__name__)


def initial_input_match(ast: dsl.ScenarioAST, frame, corr: dict[str, str],
                        road_map: RoadMap | None = None,
                        cones: dict[str, ViewCone] | None = None,
                        memo: dict | None = None,
                        dist_env: dict[int, float] | None = None) -> bool:
    """Whether the frame satisfies every object's scene constraints and the
    global requirements under the correspondence.

    Objects are checked in declaration order with an early exit, so a
    correspondence that fails on the first object costs one specifier
    evaluation.
    """
    ctx = guards.EvalContext(frame=frame, corr=corr, road_map=road_map,
                             cones=cones if cones is not None
                             else object_cones(ast),
                             memo=memo, dist_env=dist_env)
    for obj in ast.objects:
        # class compatibility is part of the scene, not just the search
        state = ctx.obj_state(obj.name)
        if obj.class_name != "Object" and state.cls != obj.class_name:
            return False
        for sp in obj.specifiers:
            if not _spec_holds(sp, obj.name, ctx, ast):
                return False
    for req in ast.requires:
        if not guards.guard_sat(req, ctx).can_true:
            return False
    return True
