"""Reference matcher for cross-checking the incremental engine.

Works on the flattened machines and enumerates label-consistent paths
explicitly, one object at a time, over every injective class-compatible
correspondence and every window.  No duration prefilter, no
early-terminating set representation: just paths.  Deliberately slow
and deliberately simple; budgets keep it usable only on small
instances, which is the point."""

from __future__ import annotations

import itertools

from . import dsl, guards, world
from .compiler import WILDCARD, FlatNfa, HfsmBundle, flatten, translate
from .errors import BudgetExceededError, MissingFeatureError

MAX_FLAT_STATES = 8
MAX_FRAMES = 12
MAX_PATH_NODES = 200_000


def _edge_enabled(nfa: FlatNfa, edge, ctx: guards.EvalContext) -> bool:
    for tid, want in edge.literals:
        ts = guards.guard_sat(nfa.guards[tid], ctx)
        if want and not ts.can_true:
            return False
        if not want and not ts.can_false:
            return False
    return True


def enumerate_runs(nfa: FlatNfa, trace, start: int, length: int,
                   corr: dict[str, str], trace_id: str,
                   road_map=None, cones=None, memo=None):
    """Yield every state sequence of the given length that the flat
    machine can produce over the window while emitting observed labels.

    A run lists the state reached after each frame's step; terminated
    states emit nothing and never appear in a run."""
    if len(nfa.states) > MAX_FLAT_STATES:
        raise BudgetExceededError(
            "flat machine has %d states; the reference matcher handles "
            "at most %d" % (len(nfa.states), MAX_FLAT_STATES))
    if length > MAX_FRAMES:
        raise BudgetExceededError(
            "window of %d frames; the reference matcher handles at most %d"
            % (length, MAX_FRAMES))
    ctxs = []
    for t in range(start, start + length):
        ctxs.append(guards.EvalContext(frame=trace.frames[t], corr=corr,
                                       road_map=road_map, cones=cones or {},
                                       memo=memo))
    nodes = 0

    def walk(state: str, depth: int, acc: list[str]):
        nonlocal nodes
        if depth == length:
            yield tuple(acc)
            return
        frame = trace.frames[start + depth]
        obs = frame.objs.get(trace_id)
        if obs is None:
            return
        for edge in nfa.out(state):
            nodes += 1
            if nodes > MAX_PATH_NODES:
                raise BudgetExceededError("path enumeration budget exhausted")
            lab = nfa.labels[edge.dst]
            if lab is None:
                continue
            if lab != WILDCARD and lab not in obs.behaviors:
                continue
            if not _edge_enabled(nfa, edge, ctxs[depth]):
                continue
            acc.append(edge.dst)
            yield from walk(edge.dst, depth + 1, acc)
            acc.pop()

    yield from walk(nfa.initial, 0, [])


def _has_run(nfa: FlatNfa, trace, start: int, length: int,
             corr: dict[str, str], trace_id: str,
             road_map=None, cones=None, memo=None) -> bool:
    for _ in enumerate_runs(nfa, trace, start, length, corr, trace_id,
                            road_map, cones, memo):
        return True
    return False


def _compatible(prog_cls: str, trace_cls: str) -> bool:
    return prog_cls == "Object" or prog_cls == trace_cls


def brute_force_match(ast: dsl.ScenarioAST, trace, m_len: int,
                      road_map=None):
    """Exhaustive answer: does any window of length m_len match under any
    injective class-compatible correspondence?  Returns (matched,
    witness) with witness = (correspondence, window_start) or None."""
    if m_len < 1 or m_len > len(trace):
        return False, None
    bundle = translate(ast)
    nfas = {name: flatten(m) for name, m in bundle.machines.items()}
    cones = world.object_cones(ast)
    prog = [(o.name, o.class_name) for o in ast.objects]
    ids = trace.ids
    classes = trace.classes
    for perm in itertools.permutations(ids, len(prog)):
        if not all(_compatible(cls, classes[tid])
                   for (_, cls), tid in zip(prog, perm)):
            continue
        corr = {name: tid for (name, _), tid in zip(prog, perm)}
        memo: dict = {}
        for w in range(len(trace) - m_len + 1):
            try:
                if not world.initial_input_match(ast, trace.frames[w], corr,
                                                 road_map, cones, memo):
                    continue
                if all(_has_run(nfas[name], trace, w, m_len, corr,
                                corr[name], road_map, cones, memo)
                       for name, _ in prog):
                    return True, (corr, w)
            except MissingFeatureError:
                continue
    return False, None
