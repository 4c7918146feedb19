"""Scenario queries over traces.

The search enumerates injective object correspondences lazily (program
declaration order crossed with trace file order), prefiltered by class
compatibility and by each candidate's longest contiguous presence, then
slides a window of the requested length over the trace.  A window is
accepted when the first frame satisfies the scene constraints and every
object admits a consistent labeled run across the window.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import dsl, engine, world
from .compiler import HfsmBundle, translate
from .errors import ConfigError, MissingFeatureError
from .trace import LabelTrace, longest_presence


@dataclass
class QueryStats:
    correspondences_tried: int = 0
    windows_checked: int = 0
    wall_time_s: float = 0.0
    timed_out: bool = False

    def to_dict(self) -> dict:
        return {
            "correspondences_tried": self.correspondences_tried,
            "windows_checked": self.windows_checked,
            "wall_time_s": self.wall_time_s,
            "timed_out": self.timed_out,
        }


@dataclass
class Witness:
    correspondence: dict[str, str]
    window_start: int

    def to_dict(self) -> dict:
        return {"correspondence": dict(self.correspondence),
                "window_start": self.window_start}


@dataclass
class QueryResult:
    matched: bool
    witness: Witness | None
    stats: QueryStats
    witnesses: list[Witness] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "matched": self.matched,
            "witness": self.witness.to_dict() if self.witness else None,
            "stats": self.stats.to_dict(),
        }
        if self.witnesses:
            out["witnesses"] = [w.to_dict() for w in self.witnesses]
        return out


def _compatible(prog_cls: str, trace_cls: str) -> bool:
    return prog_cls == "Object" or prog_cls == trace_cls


def correspondence_candidates(ast: dsl.ScenarioAST, trace: LabelTrace,
                              m_len: int):
    """Injective assignments of trace objects to program objects, in
    backtracking order: program objects by declaration, trace objects by
    file order.  Candidates must be class compatible and present for at
    least m_len consecutive frames."""
    prog = [(o.name, o.class_name) for o in ast.objects]
    ids = trace.ids
    classes = trace.classes
    presence = {tid: longest_presence(trace, tid) for tid in ids}
    ok = {
        name: [tid for tid in ids
               if _compatible(cls, classes[tid]) and presence[tid] >= m_len]
        for name, cls in prog
    }

    def backtrack(i: int, used: set[str], acc: dict[str, str]):
        if i == len(prog):
            yield dict(acc)
            return
        name = prog[i][0]
        for tid in ok[name]:
            if tid in used:
                continue
            acc[name] = tid
            used.add(tid)
            yield from backtrack(i + 1, used, acc)
            used.discard(tid)
            del acc[name]

    yield from backtrack(0, set(), {})


def _referenced_regions(ast: dsl.ScenarioAST) -> set[str]:
    names: set[str] = set()

    def expr(e):
        if isinstance(e, dsl.NameRef) and e.kind == "region":
            names.add(e.name)
        for c in dsl._expr_children(e):
            expr(c)

    def stmt(s):
        if isinstance(s, dsl.DoStmt):
            if s.until is not None:
                expr(s.until)
        elif isinstance(s, dsl.SeqStmt):
            for x in s.stmts:
                stmt(x)
        elif isinstance(s, dsl.TryStmt):
            stmt(s.body)
            expr(s.condition)
            stmt(s.handler)

    for o in ast.objects:
        for sp in o.specifiers:
            for slot, _ in dsl._spec_slots(sp):
                if slot is not None:
                    expr(slot)
    for b in ast.behaviors.values():
        stmt(b.body)
    for r in ast.requires:
        expr(r)
    return names


def _needs_map(ast: dsl.ScenarioAST) -> bool:
    if _referenced_regions(ast):
        return True
    found = False

    def expr(e):
        nonlocal found
        if isinstance(e, dsl.FieldRef) and e.fld in ("lane", "road"):
            found = True
        for c in dsl._expr_children(e):
            expr(c)

    def stmt(s):
        if isinstance(s, dsl.DoStmt):
            if s.until is not None:
                expr(s.until)
        elif isinstance(s, dsl.SeqStmt):
            for x in s.stmts:
                stmt(x)
        elif isinstance(s, dsl.TryStmt):
            stmt(s.body)
            expr(s.condition)
            stmt(s.handler)

    for o in ast.objects:
        for sp in o.specifiers:
            for slot, _ in dsl._spec_slots(sp):
                if slot is not None:
                    expr(slot)
    for b in ast.behaviors.values():
        stmt(b.body)
    for r in ast.requires:
        expr(r)
    return found


def _validate(ast: dsl.ScenarioAST, trace: LabelTrace, m_len: int,
              road_map) -> None:
    if m_len < 1:
        raise ConfigError("minimum duration must be at least 1")
    if m_len > len(trace):
        raise ConfigError(
            "minimum duration %d exceeds the trace length %d"
            % (m_len, len(trace)))
    refs = _referenced_regions(ast)
    if refs or _needs_map(ast):
        if road_map is None:
            raise ConfigError(
                "the program references the map (%s) but no road map was "
                "given" % (", ".join(sorted(refs)) or "lane or road fields"))
        known = world.region_names(road_map)
        missing = refs - known
        if missing:
            raise ConfigError("unknown regions: %s"
                              % ", ".join(sorted(missing)))


def match_window(ast: dsl.ScenarioAST, bundle: HfsmBundle, trace: LabelTrace,
                 start: int, m_len: int, corr: dict[str, str],
                 road_map=None, cones=None, memo=None) -> bool:
    """One (correspondence, window) check: initial scene, then the run."""
    try:
        if not world.initial_input_match(ast, trace.frames[start], corr,
                                         road_map, cones, memo):
            return False
        return engine.run_window(bundle, trace, start, m_len, corr,
                                 road_map, cones, memo)
    except MissingFeatureError:
        return False


def query(ast: dsl.ScenarioAST, trace: LabelTrace, m_len: int,
          road_map=None, timeout: float | None = None,
          find_all: bool = False) -> QueryResult:
    """Search the trace for the scenario.

    Returns the first witness unless find_all is set, in which case every
    matching (correspondence, window) pair is collected.  A timeout stops
    the search cooperatively and marks the stats accordingly."""
    _validate(ast, trace, m_len, road_map)
    bundle = translate(ast)
    cones = world.object_cones(ast)
    stats = QueryStats()
    witnesses: list[Witness] = []
    began = time.monotonic()
    deadline = began + timeout if timeout is not None else None
    n_windows = len(trace) - m_len + 1
    done = False
    for corr in correspondence_candidates(ast, trace, m_len):
        stats.correspondences_tried += 1
        memo: dict = {}
        for w in range(n_windows):
            if deadline is not None and time.monotonic() > deadline:
                stats.timed_out = True
                done = True
                break
            stats.windows_checked += 1
            if match_window(ast, bundle, trace, w, m_len, corr,
                            road_map, cones, memo):
                witnesses.append(Witness(dict(corr), w))
                if not find_all:
                    done = True
                    break
        if done:
            break
    stats.wall_time_s = time.monotonic() - began
    return QueryResult(matched=bool(witnesses),
                       witness=witnesses[0] if witnesses else None,
                       stats=stats,
                       witnesses=witnesses if find_all else [])


def query_source(source: str, trace: LabelTrace, m_len: int,
                 road_map=None, timeout: float | None = None,
                 find_all: bool = False) -> QueryResult:
    return query(dsl.parse(source), trace, m_len, road_map=road_map,
                 timeout=timeout, find_all=find_all)


def batch_query(ast: dsl.ScenarioAST, traces: dict[str, LabelTrace],
                m_len: int, road_map=None,
                timeout: float | None = None) -> dict[str, dict]:
    """Run the query against several traces, isolating failures: one bad
    trace yields an error entry instead of aborting the batch."""
    out: dict[str, dict] = {}
    for key, tr in traces.items():
        try:
            out[key] = query(ast, tr, m_len, road_map=road_map,
                             timeout=timeout).to_dict()
        except Exception as exc:   # noqa: BLE001 - per-trace isolation
            out[key] = {"error": "%s: %s" % (type(exc).__name__, exc)}
    return out
