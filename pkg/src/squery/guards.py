"""Guard evaluation over observed features and unobserved parameters.

Distribution references inside guards denote values never recorded in a
trace, so guard satisfiability is an existential question over their
supports.  Scalars evaluate to interval unions; a predicate answers with
a pair of attainability bits (`can_true`, `can_false`).  Interval
arithmetic is exact while every unobserved variable occurs at most once;
repeated occurrences fall back to adaptive subdivision of the supports
with a fixed budget, which keeps the answer sound (attainable outcomes
are never reported unattainable) at the price of occasional
over-approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import dsl
from .errors import (
    DomainError,
    MissingFeatureError,
    UnsupportedGuardError,
    ValidationError,
)
from .geometry import ViewCone, angle_of, wrap_angle

TOL = 1e-9
_FULL_ANGLE = None  # set after IntervalUnion is defined


@dataclass(frozen=True)
class TriState:
    """Which truth values of a predicate are attainable."""
    can_true: bool
    can_false: bool

    def __post_init__(self):
        if not (self.can_true or self.can_false):
            raise ValueError("a predicate must attain at least one value")

    @property
    def definite(self) -> bool:
        return self.can_true != self.can_false

    def negate(self) -> "TriState":
        return TriState(self.can_false, self.can_true)


T_TRUE = TriState(True, False)
T_FALSE = TriState(False, True)
T_BOTH = TriState(True, True)


def as_tristate(v) -> TriState:
    if isinstance(v, TriState):
        return v
    if isinstance(v, bool):
        return T_TRUE if v else T_FALSE
    raise UnsupportedGuardError("expected a boolean value, got %r" % (v,))


# ---------------------------------------------------------------------------
# interval unions

_MAX_PIECES = 16


class IntervalUnion:
    """Finite union of closed intervals (endpoints may be infinite)."""

    __slots__ = ("pieces",)

    def __init__(self, pieces):
        merged: list[tuple[float, float]] = []
        for lo, hi in sorted(pieces):
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                continue
            if merged and lo <= merged[-1][1] + 0.0:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        if not merged:
            raise DomainError("empty interval union")
        if len(merged) > _MAX_PIECES:
            merged = [(merged[0][0], merged[-1][1])]
        self.pieces = tuple(merged)

    # -- constructors

    @staticmethod
    def point(v: float) -> "IntervalUnion":
        return IntervalUnion([(v, v)])

    @staticmethod
    def interval(lo: float, hi: float) -> "IntervalUnion":
        return IntervalUnion([(lo, hi)])

    @staticmethod
    def points(vals) -> "IntervalUnion":
        return IntervalUnion([(v, v) for v in vals])

    # -- queries

    @property
    def lo(self) -> float:
        return self.pieces[0][0]

    @property
    def hi(self) -> float:
        return self.pieces[-1][1]

    def is_point(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0][0] == self.pieces[0][1]

    def width(self) -> float:
        return self.hi - self.lo

    def __repr__(self) -> str:
        return "IntervalUnion(%s)" % (list(self.pieces),)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalUnion) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    # -- arithmetic

    def map_monotone(self, f) -> "IntervalUnion":
        return IntervalUnion([tuple(sorted((f(lo), f(hi))))
                              for lo, hi in self.pieces])

    def neg(self) -> "IntervalUnion":
        return IntervalUnion([(-hi, -lo) for lo, hi in self.pieces])


def _mul_safe(a: float, b: float) -> float:
    if a == 0 or b == 0:
        return 0.0
    return a * b


def lift(v) -> IntervalUnion:
    if isinstance(v, IntervalUnion):
        return v
    return IntervalUnion.point(float(v))


def iu_add(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return a + b
    a, b = lift(a), lift(b)
    return IntervalUnion([(x1 + y1, x2 + y2)
                          for x1, x2 in a.pieces for y1, y2 in b.pieces])


def iu_sub(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return a - b
    a, b = lift(a), lift(b)
    return IntervalUnion([(x1 - y2, x2 - y1)
                          for x1, x2 in a.pieces for y1, y2 in b.pieces])


def iu_neg(a):
    if isinstance(a, float):
        return -a
    return a.neg()


def iu_mul(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return a * b
    a, b = lift(a), lift(b)
    out = []
    for x1, x2 in a.pieces:
        for y1, y2 in b.pieces:
            corners = (_mul_safe(x1, y1), _mul_safe(x1, y2),
                       _mul_safe(x2, y1), _mul_safe(x2, y2))
            out.append((min(corners), max(corners)))
    return IntervalUnion(out)


def iu_div(a, b):
    if isinstance(a, float) and isinstance(b, float):
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    a, b = lift(a), lift(b)
    inv_pieces = []
    for lo, hi in b.pieces:
        if lo <= 0 <= hi:
            # split around the pole
            if lo < 0:
                inv_pieces.append((-math.inf, 1.0 / lo))
            if hi > 0:
                inv_pieces.append((1.0 / hi, math.inf))
            if lo == 0 == hi:
                raise DomainError("division by zero")
        else:
            inv_pieces.append(tuple(sorted((1.0 / lo, 1.0 / hi))))
    if not inv_pieces:
        raise DomainError("division by zero")
    return iu_mul(a, IntervalUnion(inv_pieces))


def iu_square(a):
    if isinstance(a, float):
        return a * a
    out = []
    for lo, hi in a.pieces:
        if lo <= 0 <= hi:
            out.append((0.0, max(lo * lo, hi * hi)))
        else:
            s = sorted((lo * lo, hi * hi))
            out.append((s[0], s[1]))
    return IntervalUnion(out)


def iu_sqrt(a):
    if isinstance(a, float):
        return math.sqrt(max(0.0, a))
    out = []
    for lo, hi in a.pieces:
        if hi < 0:
            continue
        out.append((math.sqrt(max(0.0, lo)), math.sqrt(hi)))
    if not out:
        raise DomainError("sqrt of an all-negative set")
    return IntervalUnion(out)


def iu_wrap(a):
    """Angle wrap into (-pi, pi], piecewise."""
    if isinstance(a, float):
        return wrap_angle(a)
    out = []
    for lo, hi in a.pieces:
        if hi - lo >= math.tau:
            return IntervalUnion([(-math.pi, math.pi)])
        wlo, whi = wrap_angle(lo), wrap_angle(hi)
        if wlo <= whi:
            out.append((wlo, whi))
        else:
            out.append((-math.pi, whi))
            out.append((wlo, math.pi))
    return IntervalUnion(out)


def iu_abs(a):
    if isinstance(a, float):
        return abs(a)
    out = []
    for lo, hi in a.pieces:
        if lo <= 0 <= hi:
            out.append((0.0, max(-lo, hi)))
        else:
            s = sorted((abs(lo), abs(hi)))
            out.append((s[0], s[1]))
    return IntervalUnion(out)


def support_union(ref: dsl.DistRef) -> IntervalUnion:
    kind, *rest = ref.support()
    if kind == "finite":
        return IntervalUnion.points(rest[0])
    return IntervalUnion.interval(rest[0], rest[1])


# ---------------------------------------------------------------------------
# evaluation context

@dataclass
class ObjVal:
    """Observed state of one program object at the current frame."""
    name: str
    pos: tuple[float, float, float]
    heading: float
    lane_id: str | None
    cls: str


@dataclass
class EvalContext:
    """Everything a guard needs: the frame, the correspondence, the map,
    view cones, and (for concrete execution) pinned distribution values."""

    frame: object                      # trace.Frame
    corr: dict[str, str]
    road_map: object | None = None     # world.RoadMap
    cones: dict[str, ViewCone] = field(default_factory=dict)
    dist_env: dict[int, float] | None = None
    subdivisions: int = 64
    memo: dict | None = None

    def obj_state(self, name: str) -> ObjVal:
        if name not in self.corr:
            raise MissingFeatureError("object %r has no correspondence" % name)
        trace_id = self.corr[name]
        obs = self.frame.objs.get(trace_id)
        if obs is None:
            raise MissingFeatureError(
                "object %r (trace id %r) absent at frame %d" %
                (name, trace_id, self.frame.t))
        return ObjVal(name, obs.pos, obs.heading, obs.lane, obs.cls)

    def cone_for(self, name: str) -> ViewCone:
        return self.cones.get(name, ViewCone())

    def region_by_name(self, name: str):
        from . import world
        if self.road_map is None:
            raise MissingFeatureError(
                "region %r referenced but no road map is loaded" % name)
        return world.resolve_region(self.road_map, name)

    def lane_region(self, lane_id: str | None, owner: str):
        from . import world
        if lane_id is None:
            raise MissingFeatureError("no lane id recorded for %r" % owner)
        if self.road_map is None:
            raise MissingFeatureError("lane lookup needs a road map")
        lane = self.road_map.lanes.get(lane_id)
        if lane is None:
            raise MissingFeatureError("lane %r not in the road map" % lane_id)
        return world.LaneRegion(lane)


# ---------------------------------------------------------------------------
# expression evaluation

def _as_vec(v):
    """Coerce an evaluated value to an (x, y, z) triple of scalars."""
    if isinstance(v, ObjVal):
        return v.pos
    if isinstance(v, tuple) and len(v) == 3:
        return v
    raise UnsupportedGuardError("expected a position, got %r" % (v,))


def _heading_of(v):
    if isinstance(v, ObjVal):
        return v.heading
    if isinstance(v, (float, IntervalUnion)):
        return v
    raise UnsupportedGuardError("expected a heading, got %r" % (v,))


def _vec_concrete(v) -> tuple[float, float, float] | None:
    vec = _as_vec(v)
    if all(isinstance(c, float) for c in vec):
        return vec
    return None


def _vec_box(v) -> tuple[tuple[float, float], ...]:
    return tuple((c, c) if isinstance(c, float) else (c.lo, c.hi)
                 for c in _as_vec(v))


def eval_expr(e: dsl.Expr, ctx: EvalContext, boxes=None):
    """Evaluate an expression to a scalar, interval union, vector, region,
    object, or tri-state boolean.

    `boxes` optionally narrows the support of unobserved variables during
    subdivision (uid -> IntervalUnion).
    """
    if isinstance(e, dsl.Num):
        return e.value
    if isinstance(e, dsl.BoolLit):
        return T_TRUE if e.value else T_FALSE
    if isinstance(e, dsl.DistRef):
        if ctx.dist_env is not None:
            try:
                return float(ctx.dist_env[e.uid])
            except KeyError:
                raise UnsupportedGuardError(
                    "no pinned value for distribution occurrence %d" % e.uid
                ) from None
        if boxes is not None and e.uid in boxes:
            return boxes[e.uid]
        u = support_union(e)
        if u.is_point():
            return u.lo
        return u
    if isinstance(e, dsl.VecLit):
        comps = [eval_expr(c, ctx, boxes) for c in e.items]
        while len(comps) < 3:
            comps.append(0.0)
        for c in comps:
            if not isinstance(c, (float, IntervalUnion)):
                raise UnsupportedGuardError("vector components must be scalars")
        return tuple(comps)
    if isinstance(e, dsl.NameRef):
        if e.kind == "region":
            return ctx.region_by_name(e.name)
        return ctx.obj_state(e.name)
    if isinstance(e, dsl.FieldRef):
        state = ctx.obj_state(e.obj)
        if e.fld == "position":
            return state.pos
        if e.fld == "heading":
            return state.heading
        if e.fld == "lane":
            return ctx.lane_region(state.lane_id, e.obj)
        # road: the whole drivable surface
        return ctx.region_by_name("road")
    if isinstance(e, dsl.Unary):
        v = eval_expr(e.x, ctx, boxes)
        if e.op == "-":
            return iu_neg(v)
        return as_tristate(v).negate()
    if isinstance(e, dsl.Bin):
        return _eval_bin(e, ctx, boxes)
    if isinstance(e, dsl.Deg):
        return iu_mul(eval_expr(e.x, ctx, boxes), math.pi / 180.0)
    if isinstance(e, dsl.RelativeTo):
        a = eval_expr(e.x, ctx, boxes)
        b = _heading_of(eval_expr(e.base, ctx, boxes))
        return iu_wrap(iu_add(a, b))
    if isinstance(e, dsl.DistanceTo):
        va = _as_vec(eval_expr(e.source, ctx, boxes))
        vb = _as_vec(eval_expr(e.target, ctx, boxes))
        acc = 0.0
        for ca, cb in zip(va, vb):
            acc = iu_add(acc, iu_square(iu_sub(cb, ca)))
        return iu_sqrt(acc)
    if isinstance(e, dsl.AngleTo):
        va = eval_expr(e.source, ctx, boxes)
        vb = eval_expr(e.target, ctx, boxes)
        ca, cb = _vec_concrete(va), _vec_concrete(vb)
        if ca is not None and cb is not None:
            return angle_of(ca, cb)
        return _full_angle()
    if isinstance(e, dsl.RelativeHeadingOf):
        a = _heading_of(eval_expr(e.x, ctx, boxes))
        b = _heading_of(eval_expr(e.base, ctx, boxes))
        return iu_wrap(iu_sub(a, b))
    if isinstance(e, dsl.ApparentHeadingOf):
        x = eval_expr(e.x, ctx, boxes)
        base = eval_expr(e.base, ctx, boxes)
        if not isinstance(x, ObjVal):
            raise UnsupportedGuardError("apparent heading needs an object")
        bv = _vec_concrete(base)
        if bv is None:
            return _full_angle()
        return iu_wrap(iu_sub(x.heading, angle_of(bv, x.pos)))
    if isinstance(e, dsl.CanSee):
        return _eval_can_see(e, ctx, boxes)
    if isinstance(e, dsl.InRegion):
        return _eval_in_region(e, ctx, boxes)
    if isinstance(e, dsl.OffsetBy):
        base = eval_expr(e.base, ctx, boxes)
        delta = _as_vec(eval_expr(e.delta, ctx, boxes))
        if isinstance(base, ObjVal):
            # local frame: rotate the offset by the base heading
            return _offset_rotated(base.pos, base.heading, delta)
        bv = _as_vec(base)
        return tuple(iu_add(a, b) for a, b in zip(bv, delta))
    if isinstance(e, dsl.OffsetAlongBy):
        base = eval_expr(e.base, ctx, boxes)
        h = _heading_of(eval_expr(e.direction, ctx, boxes))
        delta = _as_vec(eval_expr(e.delta, ctx, boxes))
        origin = base.pos if isinstance(base, ObjVal) else _as_vec(base)
        if not isinstance(h, float):
            raise UnsupportedGuardError(
                "offset along needs a concrete heading")
        return _offset_rotated(origin, h, delta)
    if isinstance(e, dsl.VisibleRegion):
        from . import world
        base = eval_expr(e.region, ctx, boxes)
        viewer = eval_expr(e.viewer, ctx, boxes)
        if not isinstance(viewer, ObjVal):
            raise UnsupportedGuardError("visibility filter needs an object viewer")
        return world.ConeFilteredRegion(base, viewer.pos, viewer.heading,
                                        ctx.cone_for(viewer.name), e.negated)
    raise UnsupportedGuardError("cannot evaluate %r" % type(e).__name__)


def _full_angle() -> IntervalUnion:
    global _FULL_ANGLE
    if _FULL_ANGLE is None:
        _FULL_ANGLE = IntervalUnion.interval(-math.pi, math.pi)
    return _FULL_ANGLE


def _offset_rotated(origin, heading: float, delta):
    c, s = math.cos(heading), math.sin(heading)
    dx = iu_sub(iu_mul(delta[0], c), iu_mul(delta[1], s))
    dy = iu_add(iu_mul(delta[0], s), iu_mul(delta[1], c))
    return (iu_add(origin[0], dx), iu_add(origin[1], dy),
            iu_add(origin[2], delta[2]))


def _cmp_tristate(op: str, a, b) -> TriState:
    ia, ib = lift(a), lift(b)
    if op in ("==", "!="):
        d = iu_sub(ia, ib)
        d = lift(d)
        inside = any(lo <= TOL and hi >= -TOL for lo, hi in d.pieces)
        outside = any(lo < -TOL or hi > TOL for lo, hi in d.pieces)
        eq = TriState(inside, outside)
        return eq if op == "==" else eq.negate()
    if op in (">", ">="):
        return _cmp_tristate("<" if op == ">" else "<=", b, a)
    if op == "<":
        return TriState(ia.lo < ib.hi, ia.hi >= ib.lo)
    if op == "<=":
        return TriState(ia.lo <= ib.hi, ia.hi > ib.lo)
    raise UnsupportedGuardError("unknown comparison %r" % op)


def _eval_bin(e: dsl.Bin, ctx: EvalContext, boxes) -> object:
    if e.op == "and":
        l = as_tristate(eval_expr(e.left, ctx, boxes))
        if not l.can_true:
            return T_FALSE
        r = as_tristate(eval_expr(e.right, ctx, boxes))
        return TriState(l.can_true and r.can_true,
                        l.can_false or r.can_false)
    if e.op == "or":
        l = as_tristate(eval_expr(e.left, ctx, boxes))
        if not l.can_false:
            return T_TRUE
        r = as_tristate(eval_expr(e.right, ctx, boxes))
        return TriState(l.can_true or r.can_true,
                        l.can_false and r.can_false)
    a = eval_expr(e.left, ctx, boxes)
    b = eval_expr(e.right, ctx, boxes)
    if e.op == "+":
        return iu_add(a, b)
    if e.op == "-":
        return iu_sub(a, b)
    if e.op == "*":
        return iu_mul(a, b)
    if e.op == "/":
        return iu_div(a, b)
    return _cmp_tristate(e.op, a, b)


def _eval_can_see(e: dsl.CanSee, ctx: EvalContext, boxes) -> TriState:
    viewer = eval_expr(e.viewer, ctx, boxes)
    if not isinstance(viewer, ObjVal):
        raise UnsupportedGuardError("`can see` needs an object viewer")
    target = eval_expr(e.target, ctx, boxes)
    cone = ctx.cone_for(viewer.name)
    tv = _vec_concrete(target)
    if tv is not None:
        return as_tristate(cone.contains(viewer.pos, viewer.heading, tv))
    # target position is uncertain: conservative on both sides
    return T_BOTH


def _eval_in_region(e: dsl.InRegion, ctx: EvalContext, boxes) -> TriState:
    x = eval_expr(e.x, ctx, boxes)
    region = eval_expr(e.region, ctx, boxes)
    if not hasattr(region, "contains_point"):
        raise UnsupportedGuardError("`in` needs a region operand")
    xv = _vec_concrete(x)
    if xv is not None:
        return as_tristate(region.contains_point(xv))
    box = _vec_box(x)
    may_in, may_out = region.box_test(box)
    return TriState(may_in, may_out)


# ---------------------------------------------------------------------------
# attainability with subdivision

def collect_distrefs(e: dsl.Expr) -> list[dsl.DistRef]:
    found: list[dsl.DistRef] = []

    def walk(node):
        if isinstance(node, dsl.DistRef):
            found.append(node)
        for child in dsl._expr_children(node):
            walk(child)

    walk(e)
    return found


def _has_shared_var(e: dsl.Expr) -> bool:
    refs = collect_distrefs(e)
    uids = [r.uid for r in refs]
    return len(uids) != len(set(uids))


def guard_sat(e: dsl.Expr, ctx: EvalContext) -> TriState:
    """Attainability of a guard at the context's frame.

    Exact when each unobserved variable occurs once; otherwise refines by
    subdividing supports.  Sound: an attainable outcome is never reported
    unattainable.
    """
    if ctx.memo is not None:
        key = (id(e), ctx.frame.t)
        hit = ctx.memo.get(key)
        if hit is not None:
            return hit
        result = _guard_sat_impl(e, ctx)
        ctx.memo[key] = result
        return result
    return _guard_sat_impl(e, ctx)


def _guard_sat_impl(e: dsl.Expr, ctx: EvalContext) -> TriState:
    if ctx.dist_env is not None or not _has_shared_var(e):
        return as_tristate(eval_expr(e, ctx))

    refs = {r.uid: r for r in collect_distrefs(e)}
    budget = max(1, ctx.subdivisions) * len(refs)
    start = {uid: support_union(r) for uid, r in refs.items()}
    pending = [start]
    can_true = False
    can_false = False
    spent = 0
    while pending and not (can_true and can_false):
        box = pending.pop()
        spent += 1
        ts = as_tristate(eval_expr(e, ctx, boxes=box))
        if ts.definite:
            can_true = can_true or ts.can_true
            can_false = can_false or ts.can_false
            continue
        # indefinite: split the widest variable, or give up on tiny boxes
        uid, u = max(box.items(), key=lambda kv: kv[1].width())
        if u.width() <= TOL or spent >= budget:
            # cannot refine further: stay conservative
            can_true = can_true or ts.can_true
            can_false = can_false or ts.can_false
            continue
        halves = _split_union(u)
        for half in halves:
            pending.append({**box, uid: half})
    return TriState(can_true, can_false)


def _split_union(u: IntervalUnion) -> list[IntervalUnion]:
    if len(u.pieces) > 1:
        k = len(u.pieces) // 2
        return [IntervalUnion(u.pieces[:k]), IntervalUnion(u.pieces[k:])]
    lo, hi = u.pieces[0]
    if math.isinf(lo) or math.isinf(hi):
        # carve a finite core out of an unbounded support
        anchor = 0.0 if lo < 0 < hi else (hi - 1.0 if math.isinf(lo) else lo + 1.0)
        return [IntervalUnion.interval(lo, anchor),
                IntervalUnion.interval(anchor, hi)]
    mid = 0.5 * (lo + hi)
    return [IntervalUnion.interval(lo, mid), IntervalUnion.interval(mid, hi)]
