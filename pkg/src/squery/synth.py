"""Seeded trace generation from behavior programs.

Generation pins every distribution occurrence to one sampled value and
holds it for the whole trace, places objects in declaration order (the
first position specifier proposes, the rest filter by rejection), then
executes the compiled machines concretely frame by frame.  Labels come
from the machine state after each step; simple kinematics move objects
between frames.  The same seed always yields the same file.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import dsl, guards, world
from .compiler import (
    WILDCARD,
    HfsmBundle,
    RuntimeOracle,
    init_conf,
    label_of,
    step_branches,
    translate,
)
from .errors import NoAdjacentLaneError, UnsatisfiableSceneError
from .geometry import angle_of, wrap_angle
from .trace import Frame, LabelTrace, ObsState
from .world import Lane, RoadMap
from .geometry import Polygon, Polyline

SPEED = 5.0              # m/s along lanes
BLEND_SECONDS = 2.0      # lateral transition time for a lane change
PLACEMENT_BUDGET = 10_000
SCENE_ATTEMPTS = 50


# ---------------------------------------------------------------------------
# standard map

def build_strip_map(lanes: int = 4, length: float = 480.0,
                    lane_width: float = 3.5) -> RoadMap:
    """Parallel straight lanes along +x, numbered Lane1 upward; each
    lane's left neighbour is the next one in +y."""
    out: dict[str, Lane] = {}
    for i in range(lanes):
        y = i * lane_width
        name = "Lane%d" % (i + 1)
        half = lane_width / 2.0
        out[name] = Lane(
            id=name,
            centerline=Polyline([(0.0, y), (length, y)]),
            polygon=Polygon([(0.0, y - half), (length, y - half),
                             (length, y + half), (0.0, y + half)]),
            left="Lane%d" % (i + 2) if i + 1 < lanes else None,
            right="Lane%d" % i if i > 0 else None,
        )
    m = RoadMap(lanes=out)
    m.validate()
    return m


# ---------------------------------------------------------------------------
# distribution sampling

def _all_exprs(ast: dsl.ScenarioAST):
    def stmt(s):
        if isinstance(s, dsl.DoStmt):
            if s.until is not None:
                yield s.until
        elif isinstance(s, dsl.SeqStmt):
            for x in s.stmts:
                yield from stmt(x)
        elif isinstance(s, dsl.TryStmt):
            yield s.condition
            yield from stmt(s.body)
            yield from stmt(s.handler)

    for o in ast.objects:
        for sp in o.specifiers:
            for slot, _ in dsl._spec_slots(sp):
                if slot is not None:
                    yield slot
    for b in ast.behaviors.values():
        yield from stmt(b.body)
    yield from ast.requires


def sample_dist_env(ast: dsl.ScenarioAST, rng: random.Random) -> dict[int, float]:
    env: dict[int, float] = {}
    for e in _all_exprs(ast):
        for ref in guards.collect_distrefs(e):
            if ref.uid in env:
                continue
            env[ref.uid] = _sample_ref(ref, rng)
    return env


def _sample_ref(ref: dsl.DistRef, rng: random.Random) -> float:
    p = ref.params
    if ref.kind == "Range":
        return rng.uniform(p[0], p[1])
    if ref.kind == "Uniform":
        return rng.choice(list(p))
    if ref.kind == "Normal":
        return rng.gauss(p[0], p[1])
    # truncated: resample into the stated bounds
    for _ in range(10_000):
        v = rng.gauss(p[0], p[1])
        if p[2] <= v <= p[3]:
            return v
    raise UnsatisfiableSceneError(
        "could not sample TruncatedNormal%r" % (p,))


# ---------------------------------------------------------------------------
# initial placement

_POSITION_SPECS = (dsl.AtSpec, dsl.InSpec, dsl.OnSpec, dsl.OffsetBySpec,
                   dsl.BeyondSpec, dsl.AheadOfSpec, dsl.BehindSpec,
                   dsl.FollowingSpec, dsl.VisibleSpec)
_HEADING_SPECS = (dsl.FacingSpec, dsl.FacingTowardSpec, dsl.FacingAwaySpec,
                  dsl.ApparentlyFacingSpec)


def _mk_frame(t: int, entries: dict[str, ObsState]) -> Frame:
    return Frame(t=t, objs=dict(entries))


def _lane_at(road_map: RoadMap | None, pos) -> Lane | None:
    if road_map is None:
        return None
    hits = [lane for _, lane in sorted(road_map.lanes.items())
            if lane.polygon.contains(pos)]
    if not hits:
        return None
    if len(hits) == 1:
        return hits[0]
    def gap(lane: Lane) -> float:
        q = lane.centerline.point_at(lane.centerline.project(pos))
        return math.hypot(pos[0] - q[0], pos[1] - q[1])
    return min(hits, key=lambda lane: (gap(lane), lane.id))


def _sample_in_region(region, rng: random.Random):
    polys = []
    if isinstance(region, world.LaneRegion):
        polys = [region.lane.polygon]
    elif isinstance(region, world.NamedRegion):
        polys = [region.polygon]
    elif isinstance(region, world.RoadRegion):
        polys = [lane.polygon for lane in region.lanes]
    if not polys:
        raise UnsatisfiableSceneError("cannot sample inside this region")
    poly = rng.choice(polys)
    lo_x, lo_y, hi_x, hi_y = poly.bounds()
    for _ in range(200):
        p = (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), 0.0)
        if poly.contains(p):
            return p
    raise UnsatisfiableSceneError("rejection sampling in region failed")


def _concrete_vec(v):
    vec = guards._as_vec(v)
    return tuple(float(c) if isinstance(c, (int, float)) else
                 0.5 * (c.lo + c.hi) for c in vec)


def _propose_position(sp, ctx: guards.EvalContext, road_map,
                      rng: random.Random):
    def obj(expr):
        v = guards.eval_expr(expr, ctx)
        if not isinstance(v, guards.ObjVal):
            raise UnsatisfiableSceneError("expected a placed object")
        return v

    if isinstance(sp, dsl.AtSpec):
        return _concrete_vec(guards.eval_expr(sp.pos, ctx))
    if isinstance(sp, (dsl.InSpec, dsl.OnSpec)):
        return _sample_in_region(guards.eval_expr(sp.region, ctx), rng)
    if isinstance(sp, dsl.OffsetBySpec):
        anchor = ctx.obj_state("ego")
        delta = _concrete_vec(guards.eval_expr(sp.delta, ctx))
        return guards._offset_rotated(anchor.pos, anchor.heading, delta)
    if isinstance(sp, dsl.BeyondSpec):
        ref = obj(sp.ref)
        src = ctx.obj_state("ego") if sp.source is None else obj(sp.source)
        sight = angle_of(src.pos, ref.pos)
        amount = guards.eval_expr(sp.amount, ctx)
        if isinstance(amount, tuple):
            lon, lat = _concrete_vec(amount)[:2]
        else:
            lon, lat = float(guards.lift(amount).lo), 0.0
        return guards._offset_rotated(ref.pos, sight, (lon, lat, 0.0))
    if isinstance(sp, dsl.AheadOfSpec):
        ref = obj(sp.ref)
        lon = (rng.uniform(2.0, 30.0) if sp.amount is None
               else float(guards.lift(guards.eval_expr(sp.amount, ctx)).lo))
        return guards._offset_rotated(ref.pos, ref.heading, (lon, 0.0, 0.0))
    if isinstance(sp, dsl.BehindSpec):
        ref = obj(sp.ref)
        lon = (rng.uniform(2.0, 30.0) if sp.amount is None
               else float(guards.lift(guards.eval_expr(sp.amount, ctx)).lo))
        return guards._offset_rotated(ref.pos, ref.heading, (-lon, 0.0, 0.0))
    if isinstance(sp, dsl.FollowingSpec):
        region = guards.eval_expr(sp.lane, ctx)
        if not isinstance(region, world.LaneRegion):
            raise UnsatisfiableSceneError("`following` needs a lane")
        line = region.lane.centerline
        src = (ctx.obj_state("ego") if sp.source is None else obj(sp.source))
        amount = float(guards.lift(guards.eval_expr(sp.amount, ctx)).lo)
        s = line.project(src.pos) + amount
        x, y = line.point_at(s)
        return (x, y, 0.0)
    if isinstance(sp, dsl.VisibleSpec):
        name = sp.viewer if sp.viewer is not None else "ego"
        viewer = ctx.obj_state(name)
        cone = ctx.cone_for(name)
        half = cone.angle / 2.0
        r = rng.uniform(0.5, cone.distance)
        a = viewer.heading + rng.uniform(-half, half)
        return (viewer.pos[0] + r * math.cos(a),
                viewer.pos[1] + r * math.sin(a), 0.0)
    raise UnsatisfiableSceneError("no strategy for %r" % type(sp).__name__)


def _propose_heading(specs, pos, ctx: guards.EvalContext, road_map) -> float:
    for sp in specs:
        if isinstance(sp, dsl.FacingSpec):
            v = guards.eval_expr(sp.heading, ctx)
            return float(guards.lift(v).lo)
        if isinstance(sp, dsl.FacingTowardSpec):
            p = _concrete_vec(guards.eval_expr(sp.point, ctx))
            return angle_of(pos, p)
        if isinstance(sp, dsl.FacingAwaySpec):
            p = _concrete_vec(guards.eval_expr(sp.point, ctx))
            return wrap_angle(angle_of(pos, p) + math.pi)
        if isinstance(sp, dsl.ApparentlyFacingSpec):
            name = sp.viewer if sp.viewer is not None else "ego"
            viewer = ctx.obj_state(name)
            v = float(guards.lift(guards.eval_expr(sp.heading, ctx)).lo)
            return wrap_angle(v + angle_of(viewer.pos, pos))
    lane = _lane_at(road_map, pos)
    if lane is not None:
        return lane.centerline.heading_at(lane.centerline.project(pos))
    return 0.0


def place_objects(ast: dsl.ScenarioAST, road_map: RoadMap | None,
                  dist_env: dict[int, float], rng: random.Random,
                  cones) -> dict[str, ObsState]:
    """Initial poses satisfying all specifiers and global requirements."""
    for _ in range(SCENE_ATTEMPTS):
        placed: dict[str, ObsState] = {}
        ok = True
        for obj in ast.objects:
            state = _place_one(obj, placed, ast, road_map, dist_env, rng,
                               cones)
            if state is None:
                ok = False
                break
            placed[obj.name] = state
        if not ok:
            continue
        frame = _mk_frame(0, placed)
        ctx = guards.EvalContext(frame=frame,
                                 corr={o.name: o.name for o in ast.objects},
                                 road_map=road_map, cones=cones,
                                 dist_env=dist_env)
        if all(guards.guard_sat(r, ctx).can_true for r in ast.requires):
            return placed
    raise UnsatisfiableSceneError(
        "could not realise the initial scene after %d attempts"
        % SCENE_ATTEMPTS)


def _place_one(obj: dsl.ObjectDecl, placed: dict[str, ObsState],
               ast: dsl.ScenarioAST, road_map, dist_env, rng, cones):
    corr = {o.name: o.name for o in ast.objects}
    pos_specs = [sp for sp in obj.specifiers
                 if isinstance(sp, _POSITION_SPECS)]
    for _ in range(PLACEMENT_BUDGET):
        frame = _mk_frame(0, placed)
        ctx = guards.EvalContext(frame=frame, corr=corr, road_map=road_map,
                                 cones=cones, dist_env=dist_env)
        try:
            if pos_specs:
                pos = _propose_position(pos_specs[0], ctx, road_map, rng)
            elif road_map is not None:
                pos = _sample_in_region(
                    world.RoadRegion(road_map.lanes.values()), rng)
            else:
                pos = (rng.uniform(-50, 50), rng.uniform(-50, 50), 0.0)
            pos = (float(pos[0]), float(pos[1]), float(pos[2]))
            heading = _propose_heading(obj.specifiers, pos, ctx, road_map)
        except guards.MissingFeatureError:
            return None
        lane = _lane_at(road_map, pos)
        cand = ObsState(pos=pos, heading=heading,
                        lane=lane.id if lane else None,
                        behaviors=frozenset(), cls=obj.class_name)
        trial = dict(placed)
        trial[obj.name] = cand
        tctx = guards.EvalContext(frame=_mk_frame(0, trial), corr=corr,
                                  road_map=road_map, cones=cones,
                                  dist_env=dist_env)
        try:
            if all(world._spec_holds(sp, obj.name, tctx, ast)
                   for sp in obj.specifiers):
                return cand
        except guards.MissingFeatureError:
            return None
    return None


# ---------------------------------------------------------------------------
# kinematics

@dataclass
class _Motion:
    lane_id: str | None
    s: float
    blend: dict | None = None
    was_changing: bool = False


def _pick_successor(road_map: RoadMap, lane: Lane, label: str) -> Lane | None:
    if not lane.successors:
        return None
    end_h = lane.centerline.heading_at(lane.centerline.length())
    options = [road_map.lanes[s] for s in lane.successors]

    def turn(next_lane: Lane) -> float:
        return wrap_angle(next_lane.centerline.heading_at(0.0) - end_h)

    if label == "TurnLeft":
        return max(options, key=turn)
    if label == "TurnRight":
        return min(options, key=turn)
    return min(options, key=lambda ln: abs(turn(ln)))


def _advance(state: ObsState, motion: _Motion, label: str | None,
             road_map: RoadMap | None, dt: float) -> ObsState:
    pos, heading = state.pos, state.heading
    along = label in ("FollowLane", "TurnLeft", "TurnRight")
    if along or (label == "LaneChange" and motion.was_changing
                 and motion.blend is None):
        # after the lateral blend a lingering LaneChange just drives on
        if motion.lane_id and road_map:
            line = road_map.lanes[motion.lane_id].centerline
            motion.s += SPEED * dt
            if motion.s > line.length():
                # roll into a successor lane when one exists
                nxt = _pick_successor(road_map, road_map.lanes[motion.lane_id],
                                      label or "")
                if nxt is None:
                    motion.s = line.length()
                else:
                    motion.s -= line.length()
                    motion.lane_id = nxt.id
                    line = nxt.centerline
                    motion.s = min(motion.s, line.length())
            x, y = line.point_at(motion.s)
            pos = (x, y, pos[2])
            heading = line.heading_at(motion.s)
        else:
            pos = (pos[0] + SPEED * dt * math.cos(heading),
                   pos[1] + SPEED * dt * math.sin(heading), pos[2])
    elif label == "LaneChange":
        if motion.blend is None:
            if not (motion.lane_id and road_map):
                raise NoAdjacentLaneError(
                    "lane change requested off the mapped road")
            lane = road_map.lanes[motion.lane_id]
            target = lane.left or lane.right
            if target is None:
                raise NoAdjacentLaneError(
                    "lane %r has no neighbour to change into" % lane.id)
            motion.blend = {"from": motion.lane_id, "to": target, "frac": 0.0}
            motion.was_changing = True
        b = motion.blend
        src_line = road_map.lanes[b["from"]].centerline
        dst_line = road_map.lanes[b["to"]].centerline
        motion.s = min(motion.s + SPEED * dt, src_line.length())
        b["frac"] = min(1.0, b["frac"] + dt / BLEND_SECONDS)
        f = 0.5 * (1.0 - math.cos(math.pi * b["frac"]))
        p0 = src_line.point_at(motion.s)
        p1 = dst_line.point_at(dst_line.project(p0))
        pos = (p0[0] + (p1[0] - p0[0]) * f,
               p0[1] + (p1[1] - p0[1]) * f, pos[2])
        heading = src_line.heading_at(motion.s)
        if b["frac"] >= 1.0:
            motion.lane_id = b["to"]
            motion.s = dst_line.project(pos)
            motion.blend = None
    # Stationary, unmodeled primitives, and silent objects hold pose
    if label != "LaneChange":
        motion.was_changing = False
        motion.blend = None
    lane = _lane_at(road_map, pos)
    return ObsState(pos=pos, heading=heading,
                    lane=lane.id if lane else None,
                    behaviors=frozenset(), cls=state.cls)


# ---------------------------------------------------------------------------
# generation

@dataclass
class GenResult:
    trace: LabelTrace
    assignment: dict[str, str]       # program object -> trace id
    dist_env: dict[int, float]
    meta: dict = field(default_factory=dict)


def generate_trace(ast: dsl.ScenarioAST, seed: int, length: int,
                   hz: float = 2.0, road_map: RoadMap | None = None,
                   id_scheme: str = "names") -> GenResult:
    """Build a trace that realises the program.

    id_scheme "names" keeps program object names as trace ids (the
    identity correspondence then matches); "anonymous" renames objects
    car1..carN in a seed-shuffled order, so matching has to search."""
    if id_scheme not in ("names", "anonymous"):
        raise ValueError("id_scheme must be 'names' or 'anonymous'")
    if length < 1:
        raise ValueError("length must be positive")
    rng = random.Random(seed)
    if road_map is None:
        road_map = build_strip_map()
    cones = world.object_cones(ast)
    env = sample_dist_env(ast, rng)
    placed = place_objects(ast, road_map, env, rng, cones)

    bundle = translate(ast)
    corr = {o.name: o.name for o in ast.objects}
    confs = {name: init_conf(m) for name, m in bundle.machines.items()}
    done = {name: False for name in bundle.machines}
    motions = {}
    for name, st in placed.items():
        lane = _lane_at(road_map, st.pos)
        motions[name] = _Motion(
            lane_id=lane.id if lane else None,
            s=lane.centerline.project(st.pos) if lane else 0.0)

    poses = dict(placed)
    frames: list[Frame] = []
    dt = 1.0 / hz
    for t in range(length):
        provisional = _mk_frame(t, poses)
        ctx = guards.EvalContext(frame=provisional, corr=corr,
                                 road_map=road_map, cones=cones,
                                 dist_env=env)
        oracle = RuntimeOracle(ctx)
        recorded: dict[str, ObsState] = {}
        labels: dict[str, str | None] = {}
        for name, m in bundle.machines.items():
            if done[name]:
                labels[name] = None
                continue
            seen: list = []
            for nc, _, _ in step_branches(m, confs[name], oracle):
                if nc not in seen:
                    seen.append(nc)
            live = [nc for nc in seen if label_of(m, nc) is not None]
            if not live:
                done[name] = True
                labels[name] = None
                continue
            choice = rng.choice(live)
            confs[name] = choice
            labels[name] = label_of(m, choice)
        for name, st in poses.items():
            lab = labels.get(name)
            shown = [] if lab in (None, WILDCARD) else [lab]
            recorded[name] = ObsState(pos=st.pos, heading=st.heading,
                                      lane=st.lane,
                                      behaviors=frozenset(shown),
                                      cls=st.cls)
        frames.append(_mk_frame(t, recorded))
        # motion toward the next frame
        poses = {name: _advance(recorded[name], motions[name],
                                labels.get(name), road_map, dt)
                 for name in poses}

    names = [o.name for o in ast.objects]
    if id_scheme == "anonymous":
        order = list(range(len(names)))
        rng.shuffle(order)
        assignment = {names[j]: "car%d" % (slot + 1)
                      for slot, j in enumerate(order)}
    else:
        assignment = {n: n for n in names}
    classes = {o.name: o.class_name for o in ast.objects}
    objects = sorted(((assignment[n], classes[n]) for n in names),
                     key=lambda pair: pair[0]) if id_scheme == "anonymous" \
        else [(n, classes[n]) for n in names]
    out_frames = [
        Frame(t=fr.t, objs={assignment[n]: st for n, st in fr.objs.items()})
        for fr in frames
    ]
    trace = LabelTrace(hz=hz, objects=tuple(objects),
                       frames=tuple(out_frames))
    return GenResult(trace=trace, assignment=assignment, dist_env=env,
                     meta={"seed": seed, "length": length,
                           "id_scheme": id_scheme})


# ---------------------------------------------------------------------------
# program scaling for benchmarks

def scale_program(pairs: int, spacing: float = 80.0,
                  lane_width: float = 3.5) -> str:
    """A program with `pairs` driver/obstacle pairs (2*pairs objects).
    Each driver follows its lane and swerves around its own obstacle;
    pairs are staggered so the strip map can seat them all."""
    if pairs < 1:
        raise ValueError("need at least one pair")
    chunks = []
    decls = []
    for i in range(1, pairs + 1):
        ego = "ego" if i == 1 else "ego%d" % i
        other = "other%d" % i
        beh = "Avoid%d" % i
        lane_idx = (i - 1) % 3          # lanes 1..3 all have a left neighbour
        x = (i - 1) * spacing
        y = lane_idx * lane_width
        chunks.append(
            "behavior %s():\n"
            "    try:\n"
            "        do FollowLane\n"
            "    interrupt when (distance from %s to %s) < Range(1, 15):\n"
            "        do LaneChange until (distance from %s to %s) < 2\n"
            % (beh, ego, other, ego, other))
        decls.append("%s = new Car at (%s, %s), with behavior %s"
                     % (ego, _fmt(x), _fmt(y), beh))
        # the obstacle drives at the same speed, so the gap between the
        # pair never closes and neither guard can strand the machine
        # mid-run with no viable branch
        decls.append("%s = new Car ahead of %s by Range(10, 30), "
                     "with behavior FollowLane" % (other, ego))
    return "\n".join(chunks) + "\n" + "\n".join(decls) + "\n"


def _fmt(v: float) -> str:
    return "%g" % v
