"""Seeded random generators and shared checks used across the suite.

Everything here is driven by an explicit random.Random so failures
reproduce from the seed embedded in the assertion message.
"""

from __future__ import annotations

import itertools
import math
import random

from squery import dsl
from squery.compiler import Hfsm, flatten, init_conf, label_of, step_branches
from squery.guards import EvalContext, TriState, guard_sat
from squery.synth import build_strip_map, generate_trace, scale_program
from squery.trace import Frame, LabelTrace, ObsState

PRIMS = ("FollowLane", "LaneChange", "Stationary", "Brake", "Accelerate")
TRACE_LABELS = ("FollowLane", "LaneChange", "Stationary", "Brake")


# ---------------------------------------------------------------------------
# random guard expressions

def rand_distref(rng: random.Random) -> dsl.DistRef:
    kind = rng.randrange(3)
    if kind == 0:
        lo = round(rng.uniform(-10, 20), 2)
        return dsl.DistRef("Range", (lo, round(lo + rng.uniform(0.5, 15), 2)))
    if kind == 1:
        vals = sorted(round(rng.uniform(-10, 25), 2)
                      for _ in range(rng.randint(2, 4)))
        return dsl.DistRef("Uniform", tuple(vals))
    mu = round(rng.uniform(-5, 15), 2)
    lo = round(mu - rng.uniform(1, 6), 2)
    return dsl.DistRef("TruncatedNormal",
                       (mu, round(rng.uniform(0.5, 3), 2), lo,
                        round(mu + rng.uniform(1, 6), 2)))


def rand_scalar(rng: random.Random, objs, depth: int = 0) -> dsl.Expr:
    if depth >= 2 or rng.random() < 0.45:
        pick = rng.random()
        if pick < 0.3:
            return dsl.Num(round(rng.uniform(-5, 25), 2))
        if pick < 0.55:
            return rand_distref(rng)
        if pick < 0.85:
            a, b = rng.sample(objs, 2)
            return dsl.DistanceTo(target=dsl.NameRef(b), source=dsl.NameRef(a))
        if pick < 0.95:
            return dsl.FieldRef(obj=rng.choice(objs), fld="heading")
        a, b = rng.sample(objs, 2)
        return dsl.AngleTo(target=dsl.NameRef(b), source=dsl.NameRef(a))
    op = rng.choice(("+", "-", "*", "/"))
    left = rand_scalar(rng, objs, depth + 1)
    if op == "/":
        denom = round(rng.uniform(0.5, 8), 2)   # keep away from zero
        return dsl.Bin("/", left, dsl.Num(denom))
    return dsl.Bin(op, left, rand_scalar(rng, objs, depth + 1))


_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


def rand_guard(rng: random.Random, objs, depth: int = 0) -> dsl.Expr:
    if depth >= 2 or rng.random() < 0.6:
        pick = rng.random()
        if pick < 0.75:
            op = _CMP_OPS[min(int(rng.random() * 7), 5)]  # == / != rare
            return dsl.Bin(op, rand_scalar(rng, objs),
                           rand_scalar(rng, objs))
        if pick < 0.85:
            return dsl.BoolLit(rng.random() < 0.5)
        a, b = rng.sample(objs, 2)
        return dsl.CanSee(viewer=dsl.NameRef(a), target=dsl.NameRef(b))
    pick = rng.random()
    if pick < 0.2:
        return dsl.Unary("not", rand_guard(rng, objs, depth + 1))
    op = "and" if pick < 0.6 else "or"
    return dsl.Bin(op, rand_guard(rng, objs, depth + 1),
                   rand_guard(rng, objs, depth + 1))


# ---------------------------------------------------------------------------
# sampling-only guard expressions (no objects, finite supports)

def rand_sampling_scalar(rng: random.Random, refs: list, depth: int = 0):
    if depth >= 2 or rng.random() < 0.5:
        if rng.random() < 0.45 and len(refs) < 3:
            ref = rand_distref(rng)
            refs.append(ref)
            return ref
        return dsl.Num(round(rng.uniform(-10, 25), 2))
    op = rng.choice(("+", "-", "*", "/"))
    left = rand_sampling_scalar(rng, refs, depth + 1)
    if op == "/":
        return dsl.Bin("/", left, dsl.Num(round(rng.uniform(0.5, 8), 2)))
    return dsl.Bin(op, left, rand_sampling_scalar(rng, refs, depth + 1))


def rand_sampling_guard(rng: random.Random, refs: list, depth: int = 0):
    if depth >= 2 or rng.random() < 0.6:
        op = _CMP_OPS[min(int(rng.random() * 7), 5)]
        return dsl.Bin(op, rand_sampling_scalar(rng, refs),
                       rand_sampling_scalar(rng, refs))
    pick = rng.random()
    if pick < 0.2:
        return dsl.Unary("not", rand_sampling_guard(rng, refs, depth + 1))
    op = "and" if pick < 0.6 else "or"
    return dsl.Bin(op, rand_sampling_guard(rng, refs, depth + 1),
                   rand_sampling_guard(rng, refs, depth + 1))


def assign_uids(e: dsl.Expr, counter=None) -> None:
    if counter is None:
        counter = itertools.count(1)
    if isinstance(e, dsl.DistRef):
        e.uid = next(counter)
    for c in dsl._expr_children(e):
        assign_uids(c, counter)


def collect_distrefs(e: dsl.Expr) -> list[dsl.DistRef]:
    out = []
    if isinstance(e, dsl.DistRef):
        out.append(e)
    for c in dsl._expr_children(e):
        out.extend(collect_distrefs(c))
    return out


def sample_points(ref: dsl.DistRef) -> list[float]:
    if ref.kind == "Uniform":
        return list(ref.params)
    if ref.kind == "Range":
        lo, hi = ref.params
    else:
        lo, hi = ref.params[2], ref.params[3]
    steps = 5
    return [lo + (hi - lo) * i / steps for i in range(steps + 1)]


def concrete_eval(e: dsl.Expr, env: dict[int, float]):
    """Plain-float reference evaluation over pinned distribution values.
    Covers exactly the node set rand_sampling_guard can emit."""
    if isinstance(e, dsl.Num):
        return e.value
    if isinstance(e, dsl.BoolLit):
        return e.value
    if isinstance(e, dsl.DistRef):
        return env[e.uid]
    if isinstance(e, dsl.Deg):
        return math.radians(concrete_eval(e.x, env))
    if isinstance(e, dsl.Unary):
        if e.op == "-":
            return -concrete_eval(e.x, env)
        return not concrete_eval(e.x, env)
    if isinstance(e, dsl.Bin):
        if e.op in ("and", "or"):
            l = concrete_eval(e.left, env)
            return (l and concrete_eval(e.right, env)) if e.op == "and" \
                else (l or concrete_eval(e.right, env))
        l = concrete_eval(e.left, env)
        r = concrete_eval(e.right, env)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        if e.op == "/":
            return l / r
        if e.op == "==":
            return abs(l - r) <= 1e-9
        if e.op == "!=":
            return abs(l - r) > 1e-9
        if e.op == "<":
            return l < r
        if e.op == "<=":
            return l <= r
        if e.op == ">":
            return l > r
        return l >= r
    raise AssertionError("unexpected node %r" % type(e).__name__)


def empty_ctx(**kw) -> EvalContext:
    return EvalContext(frame=Frame(t=0, objs={}), corr={}, **kw)


# ---------------------------------------------------------------------------
# random whole programs (round-trip pool)

_OBJ_NAMES = ("ego", "car2", "car3")
_CLASSES = ("Car", "Truck", "Bus", "Pedestrian", "Object")
_REGIONS = ("road", "Lane1", "Lane2")


def rand_stmt(rng: random.Random, objs, defined, depth: int = 0) -> dsl.Stmt:
    pick = rng.random()
    if depth >= 2 or pick < 0.5:
        pool = list(PRIMS) + list(defined)
        until = rand_guard(rng, objs) if rng.random() < 0.6 else None
        return dsl.DoStmt(behavior=rng.choice(pool), until=until)
    if pick < 0.75:
        n = rng.randint(2, 3)
        return dsl.SeqStmt([rand_stmt(rng, objs, defined, depth + 1)
                            for _ in range(n)])
    return dsl.TryStmt(body=rand_stmt(rng, objs, defined, depth + 1),
                       condition=rand_guard(rng, objs),
                       handler=rand_stmt(rng, objs, defined, depth + 1))


def rand_specifiers(rng: random.Random, name: str, earlier: list[str]):
    specs: list[dsl.Specifier] = []
    n = rng.randint(1, 3)
    vec = lambda: dsl.VecLit((dsl.Num(round(rng.uniform(-20, 40), 1)),
                              dsl.Num(round(rng.uniform(-10, 10), 1))))
    pool = ["at", "on", "in", "facing", "facing_toward", "facing_away",
            "with_view"]
    if earlier:
        pool += ["ahead", "behind", "beyond", "visible_from"]
    rng.shuffle(pool)
    for kind in pool[:n]:
        if kind == "at":
            pos = vec()
            if rng.random() < 0.25:
                pos = dsl.OffsetBy(base=pos, delta=vec())
            specs.append(dsl.AtSpec(pos=pos))
        elif kind == "on":
            specs.append(dsl.OnSpec(dsl.NameRef(rng.choice(_REGIONS))))
        elif kind == "in":
            specs.append(dsl.InSpec(dsl.NameRef(rng.choice(_REGIONS))))
        elif kind == "facing":
            specs.append(dsl.FacingSpec(
                dsl.Deg(dsl.Num(rng.choice((0, 45, 90, 180))))))
        elif kind == "facing_toward":
            specs.append(dsl.FacingTowardSpec(vec()))
        elif kind == "facing_away":
            specs.append(dsl.FacingAwaySpec(vec()))
        elif kind == "with_view":
            specs.append(dsl.WithAttr("viewAngle",
                                      dsl.Deg(dsl.Num(rng.choice((60, 90,
                                                                  120))))))
        elif kind == "ahead":
            amount = None
            if rng.random() < 0.7:
                amount = rand_distref(rng) if rng.random() < 0.5 \
                    else dsl.Num(round(rng.uniform(2, 30), 1))
            specs.append(dsl.AheadOfSpec(dsl.NameRef(rng.choice(earlier)),
                                         amount))
        elif kind == "behind":
            specs.append(dsl.BehindSpec(dsl.NameRef(rng.choice(earlier)),
                                        dsl.Num(round(rng.uniform(2, 30), 1))))
        elif kind == "beyond":
            specs.append(dsl.BeyondSpec(dsl.NameRef(rng.choice(earlier)),
                                        dsl.Num(round(rng.uniform(2, 20), 1))))
        else:
            specs.append(dsl.VisibleSpec(dsl.NameRef(rng.choice(earlier))))
    return specs


def rand_program_ast(rng: random.Random) -> dsl.ScenarioAST:
    objs = list(_OBJ_NAMES[: rng.randint(2, 3)])
    behaviors: dict[str, dsl.BehaviorDef] = {}
    defined: list[str] = []
    for i in range(rng.randint(0, 2)):
        name = "B%d" % (i + 1)
        behaviors[name] = dsl.BehaviorDef(
            name=name, body=rand_stmt(rng, objs, defined))
        defined.append(name)
    decls = []
    for i, name in enumerate(objs):
        beh = None
        if defined and rng.random() < 0.6:
            beh = rng.choice(defined)
        elif rng.random() < 0.2:
            beh = rng.choice(PRIMS)
        decls.append(dsl.ObjectDecl(
            name=name, class_name=rng.choice(_CLASSES),
            specifiers=rand_specifiers(rng, name, objs[:i]),
            behavior=beh))
    requires = [rand_guard(rng, objs) for _ in range(rng.randint(0, 2))]
    return dsl.ScenarioAST(objects=decls, behaviors=behaviors,
                           requires=requires)


# ---------------------------------------------------------------------------
# scripted stepping: hierarchical vs flat label sequences

class ScriptedOracle:
    """Answers each transition from a fixed tid -> TriState table."""

    def __init__(self, tristates: dict[int, TriState]):
        self.tristates = tristates

    def ask(self, edge):
        ts = self.tristates[edge.tid]
        out = []
        if ts.can_true:
            out.append((True, None))
        if ts.can_false:
            out.append((False, None))
        return out


def machine_tids(m: Hfsm) -> list[int]:
    out: list[int] = []

    def walk(mm: Hfsm):
        for t in mm.transitions:
            out.append(t.tid)
        for s in mm.states.values():
            if s.child is not None:
                walk(s.child)

    walk(m)
    return out


def rand_script(rng: random.Random, tids, k: int):
    choices = (TriState(True, False), TriState(False, True),
               TriState(True, True))
    return [{tid: rng.choice(choices) for tid in tids} for _ in range(k)]


def hier_label_seqs(m: Hfsm, script, k: int) -> set[tuple[str, ...]]:
    level = {(init_conf(m), ())}
    for t in range(k):
        oracle = ScriptedOracle(script[t])
        nxt = set()
        for conf, seq in level:
            for nc, _, _ in step_branches(m, conf, oracle):
                lab = label_of(m, nc)
                if lab is None:
                    continue
                nxt.add((nc, seq + (lab,)))
        level = nxt
    return {seq for _, seq in level}


def flat_label_seqs(nfa, script, k: int) -> set[tuple[str, ...]]:
    level = {(nfa.initial, ())}
    for t in range(k):
        tri = script[t]
        nxt = set()
        for st, seq in level:
            for e in nfa.out(st):
                lab = nfa.labels[e.dst]
                if lab is None:
                    continue
                if all((tri[tid].can_true if want else tri[tid].can_false)
                       for tid, want in e.literals):
                    nxt.add((e.dst, seq + (lab,)))
        level = nxt
    return {seq for _, seq in level}


def rand_machine_source(rng: random.Random) -> str:
    body = rand_stmt(rng, ["a", "b"], defined=[])
    ast = dsl.ScenarioAST(
        objects=[
            dsl.ObjectDecl("a", "Car",
                           [dsl.AtSpec(dsl.VecLit((dsl.Num(0), dsl.Num(0))))],
                           behavior="M"),
            dsl.ObjectDecl("b", "Car",
                           [dsl.AtSpec(dsl.VecLit((dsl.Num(9), dsl.Num(3))))]),
        ],
        behaviors={"M": dsl.BehaviorDef("M", body)})
    return dsl.pretty(ast)


# ---------------------------------------------------------------------------
# synthetic traces and agreement instances

def rand_walk_trace(rng: random.Random, n_objs: int, length: int,
                    allow_empty: bool = False) -> LabelTrace:
    ids = ["car%d" % (i + 1) for i in range(n_objs)]
    classes = {i: rng.choice(("Car", "Truck")) for i in ids}
    pos = {i: [rng.uniform(-10, 30), rng.uniform(-5, 5)] for i in ids}
    frames = []
    for t in range(length):
        objs = {}
        for i in ids:
            pos[i][0] += rng.uniform(-3, 3)
            pos[i][1] += rng.uniform(-1.5, 1.5)
            n_lab = rng.randint(1, 2)
            if allow_empty and rng.random() < 0.05:
                labs: frozenset[str] = frozenset()
            else:
                labs = frozenset(rng.sample(TRACE_LABELS, n_lab))
            objs[i] = ObsState(pos=(pos[i][0], pos[i][1], 0.0),
                               heading=rng.uniform(-math.pi, math.pi),
                               lane=None, behaviors=labs, cls=classes[i])
        frames.append(Frame(t=t, objs=objs))
    return LabelTrace(hz=1.0, objects=tuple((i, classes[i]) for i in ids),
                      frames=tuple(frames))


def template_program(rng: random.Random) -> str:
    """Map-free programs whose generated traces always stay labelable:
    no construction can strand a machine with zero viable branches."""
    kind = rng.randrange(5)
    d_lo = rng.randint(8, 14)
    d_hi = d_lo + rng.randint(4, 16)
    x0 = rng.choice((0, 5, 10))
    y0 = rng.choice((0, 3.5))
    if kind == 0:
        return scale_program(1)
    if kind == 1:
        t_lo = rng.randint(3, 6)
        t_hi = t_lo + rng.randint(2, 12)
        return (
            "behavior TwoPhase():\n"
            "    do FollowLane until (distance from ego to car2)"
            " < Range(%d, %d)\n"
            "    do LaneChange\n\n"
            "ego = new Car at (%s, %s), with behavior TwoPhase\n"
            "car2 = new Car ahead of ego by Range(%d, %d)\n"
            % (t_lo, t_hi, x0, y0, d_lo, d_hi))
    if kind == 2:
        t_lo = rng.randint(4, 8)
        t_hi = t_lo + rng.randint(2, 10)
        return (
            "behavior Swerve():\n"
            "    try:\n"
            "        do FollowLane\n"
            "    interrupt when (distance from ego to car2)"
            " < Range(%d, %d):\n"
            "        do LaneChange\n\n"
            "ego = new Car at (%s, %s), with behavior Swerve\n"
            "car2 = new Car ahead of ego by Range(%d, %d)\n"
            % (t_lo, t_hi, x0, y0, d_lo, d_hi))
    if kind == 3:
        return (
            "ego = new Car at (%s, %s), with behavior FollowLane\n"
            "car2 = new Car ahead of ego by %d\n" % (x0, y0, d_lo))
    return (
        "ego = new Car at (%s, %s), with behavior Stationary\n"
        "car2 = new Car ahead of ego by Range(%d, %d),"
        " with behavior Stationary\n" % (x0, y0, d_lo, d_hi))


def mutate_trace(rng: random.Random, trace: LabelTrace) -> LabelTrace:
    frames = [
        Frame(t=fr.t, objs=dict(fr.objs)) for fr in trace.frames
    ]
    oid = rng.choice(trace.ids)
    kind = rng.randrange(3)
    if kind == 0:
        # one frame stops looking like the scenario
        fr = rng.choice(frames)
        st = fr.objs[oid]
        fr.objs[oid] = ObsState(pos=st.pos, heading=st.heading, lane=st.lane,
                                behaviors=frozenset({"Brake"}), cls=st.cls)
    elif kind == 1:
        # displace one object everywhere: the opening scene cannot hold
        for fr in frames:
            st = fr.objs[oid]
            fr.objs[oid] = ObsState(pos=(st.pos[0] + 37.0, st.pos[1],
                                         st.pos[2]),
                                    heading=st.heading, lane=st.lane,
                                    behaviors=st.behaviors, cls=st.cls)
    else:
        # wrong class for one object
        for fr in frames:
            st = fr.objs[oid]
            fr.objs[oid] = ObsState(pos=st.pos, heading=st.heading,
                                    lane=st.lane, behaviors=st.behaviors,
                                    cls="Bus")
        return LabelTrace(hz=trace.hz,
                          objects=tuple((i, "Bus" if i == oid else c)
                                        for i, c in trace.objects),
                          frames=tuple(frames))
    return LabelTrace(hz=trace.hz, objects=trace.objects,
                      frames=tuple(frames))


def agreement_instances(rng: random.Random, count: int):
    """(ast, trace, m) triples small enough for the exhaustive matcher."""
    strip = build_strip_map()
    out = []
    while len(out) < count:
        src = template_program(rng)
        ast = dsl.parse(src)
        if rng.random() < 0.55:
            length = rng.randint(4, 12)
            gen = generate_trace(ast, seed=rng.randrange(10 ** 6),
                                 length=length, road_map=strip,
                                 id_scheme=rng.choice(("names",
                                                       "anonymous")))
            trace = gen.trace
            if rng.random() < 0.35:
                trace = mutate_trace(rng, trace)
        else:
            trace = rand_walk_trace(rng, rng.randint(2, 3),
                                    rng.randint(3, 12))
        m_len = rng.randint(1, len(trace))
        out.append((ast, trace, m_len))
    return out


# ---------------------------------------------------------------------------
# the shared property checks; each returns a list of failure descriptions

def check_roundtrip(seed0: int, n: int) -> list[str]:
    """pretty -> parse -> pretty is a fixed point, and parser output
    stays inside the supported fragment."""
    fails = []
    for i in range(n):
        rng = random.Random(seed0 + i)
        ast0 = rand_program_ast(rng)
        try:
            s1 = dsl.pretty(ast0)
            ast1 = dsl.parse(s1)
            problems = dsl.fragment_check(ast1)
            s2 = dsl.pretty(ast1)
        except Exception as exc:   # noqa: BLE001 - collected for the report
            fails.append("seed %d: %s: %s" % (seed0 + i,
                                              type(exc).__name__, exc))
            continue
        if s2 != s1:
            fails.append("seed %d: reprint differs\n%r\n%r"
                         % (seed0 + i, s1, s2))
        if problems:
            fails.append("seed %d: fragment problems %r"
                         % (seed0 + i, problems))
    return fails


def check_equivalence(seed0: int, n: int) -> list[str]:
    """Hierarchical stepping and the flattened machine admit exactly the
    same label sequences under any guard-outcome script."""
    from squery.compiler import flatten as _flatten, translate as _translate
    fails = []
    for i in range(n):
        rng = random.Random(seed0 + i)
        src = rand_machine_source(rng)
        ast = dsl.parse(src)
        m = _translate(ast).machines["a"]
        nfa = _flatten(m)
        tids = machine_tids(m)
        k = rng.randint(1, 6)
        script = rand_script(rng, tids, k)
        h = hier_label_seqs(m, script, k)
        f = flat_label_seqs(nfa, script, k)
        if h != f:
            fails.append("seed %d: k=%d hier-only=%r flat-only=%r\n%s"
                         % (seed0 + i, k, sorted(h - f)[:3],
                            sorted(f - h)[:3], src))
    return fails


def check_sampling(seed0: int, n: int, max_combos: int = 400) -> list[str]:
    """Every concrete outcome found by sampling the distribution supports
    is reported attainable, and pinning the values gives the definite
    answer the plain-float evaluator computes."""
    fails = []
    for i in range(n):
        rng = random.Random(seed0 + i)
        g = rand_sampling_guard(rng, [])
        assign_uids(g)
        refs = collect_distrefs(g)
        ts = guard_sat(g, empty_ctx())
        grids = [sample_points(r) for r in refs]
        combos = itertools.product(*grids) if refs else [()]
        for j, combo in enumerate(combos):
            if j >= max_combos:
                break
            env = {r.uid: v for r, v in zip(refs, combo)}
            got = bool(concrete_eval(g, env))
            if (got and not ts.can_true) or (not got and not ts.can_false):
                fails.append("seed %d: sampled %r unreported (ts=%r) in %s"
                             % (seed0 + i, got, ts, dsl._pp(g)))
                break
            pinned = guard_sat(g, empty_ctx(dist_env=env))
            if not (pinned.definite and pinned.can_true == got):
                fails.append("seed %d: pinned %r vs concrete %r in %s"
                             % (seed0 + i, pinned, got, dsl._pp(g)))
                break
    return fails


def check_pruning(seed0: int, n: int) -> list[str]:
    """The incremental set-based matcher answers exactly like explicit
    path enumeration for any fixed correspondence and window."""
    from squery.compiler import flatten as _flatten, translate as _translate
    from squery.engine import run_window
    from squery.oracle import _has_run
    strip = build_strip_map()
    fails = []
    for i in range(n):
        rng = random.Random(seed0 + i)
        ast = dsl.parse(template_program(rng))
        if rng.random() < 0.5:
            gen = generate_trace(ast, seed=rng.randrange(10 ** 6),
                                 length=rng.randint(3, 10), road_map=strip)
            trace = gen.trace
            if rng.random() < 0.4:
                trace = mutate_trace(rng, trace)
        else:
            trace = rand_walk_trace(rng, 2, rng.randint(3, 10),
                                    allow_empty=True)
        bundle = _translate(ast)
        nfas = {name: _flatten(m) for name, m in bundle.machines.items()}
        names = [o.name for o in ast.objects]
        corr = dict(zip(names, rng.sample(trace.ids, len(names))))
        m_len = rng.randint(1, min(8, len(trace)))
        w = rng.randint(0, len(trace) - m_len)
        eng = run_window(bundle, trace, w, m_len, corr)
        ref = all(_has_run(nfas[name], trace, w, m_len, corr, corr[name])
                  for name in names)
        if eng != ref:
            fails.append("seed %d: engine=%r paths=%r corr=%r w=%d m=%d"
                         % (seed0 + i, eng, ref, corr, w, m_len))
    return fails


def check_matchability(seed0: int, n: int) -> list[str]:
    """A generated trace always matches the program it was built from,
    at full length and at half length, under either id scheme."""
    from squery.query import query
    strip = build_strip_map()
    fails = []
    for i in range(n):
        rng = random.Random(seed0 + i)
        src = template_program(rng)
        ast = dsl.parse(src)
        length = rng.randint(6, 30)
        gen = generate_trace(ast, seed=rng.randrange(10 ** 6),
                             length=length, road_map=strip,
                             id_scheme=rng.choice(("names", "anonymous")))
        m_len = length if rng.random() < 0.5 else max(1, length // 2)
        if not query(ast, gen.trace, m_len).matched:
            fails.append("seed %d: unmatched m=%d len=%d\n%s"
                         % (seed0 + i, m_len, length, src))
    return fails


def check_determinism(seed0: int, n: int) -> list[str]:
    """Same program and seed, same trace: byte-for-byte equal payloads,
    assignments, and sampled values."""
    from squery.trace import trace_to_dict
    strip = build_strip_map()
    fails = []
    for i in range(n // 2):
        rng = random.Random(seed0 + i)
        src = template_program(rng)
        ast = dsl.parse(src)
        seed = rng.randrange(10 ** 6)
        length = rng.randint(3, 20)
        scheme = rng.choice(("names", "anonymous"))
        a = generate_trace(ast, seed=seed, length=length, road_map=strip,
                           id_scheme=scheme)
        b = generate_trace(ast, seed=seed, length=length, road_map=strip,
                           id_scheme=scheme)
        if trace_to_dict(a.trace) != trace_to_dict(b.trace) \
                or a.assignment != b.assignment or a.dist_env != b.dist_env:
            fails.append("seed %d: regeneration differs (gen seed %d)"
                         % (seed0 + i, seed))
    return fails
