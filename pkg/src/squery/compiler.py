"""Translation of behavior programs into hierarchical state machines.

Each object gets one machine.  Primitive runs become base states that
emit the primitive's name while occupied; `until` clauses become guard
edges; sequences are fused into a single machine by redirecting edges
that entered one component's terminal to the next component's initial
state; try/interrupt blocks become a three-state machine whose
Interrupt state remembers the paused body configuration.

The same branching stepper drives both runtime matching (guards answer
with attainability) and structural flattening (every guard forks both
ways, recorded as literals on the flat edges).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import dsl
from .errors import BudgetExceededError, TranslationError, UnknownStateError

WILDCARD = "*"


# ---------------------------------------------------------------------------
# machine model

@dataclass
class State:
    name: str
    kind: str                     # base | wrapper | try | interrupt | final
    label: str | None = None      # base states: emitted primitive name
    child: "Hfsm | None" = None


@dataclass
class Transition:
    tid: int
    src: str
    dst: str
    kind: str                     # guard | completion | term
    guard: dsl.Expr | None = None


@dataclass
class Hfsm:
    name: str
    states: dict[str, State]
    initial: str
    final: str | None
    transitions: list[Transition]

    def out(self, state_name: str) -> list[Transition]:
        return [t for t in self.transitions if t.src == state_name]

    def state(self, name: str) -> State:
        try:
            return self.states[name]
        except KeyError:
            raise UnknownStateError(
                "machine %r has no state %r" % (self.name, name)) from None


@dataclass
class HfsmBundle:
    machines: dict[str, Hfsm]     # program object name -> machine

    def transition_by_tid(self) -> dict[int, Transition]:
        out: dict[int, Transition] = {}

        def walk(m: Hfsm):
            for t in m.transitions:
                out[t.tid] = t
            for s in m.states.values():
                if s.child is not None:
                    walk(s.child)

        for m in self.machines.values():
            walk(m)
        return out


@dataclass(frozen=True)
class Conf:
    """Configuration of one machine: current state, the configuration of
    that state's child machine, and (for Interrupt states) the paused
    body configuration to resume later."""
    state: str
    child: "Conf | None" = None
    paused: "Conf | None" = None


# ---------------------------------------------------------------------------
# translation

class _Compiler:
    def __init__(self, ast: dsl.ScenarioAST):
        self.ast = ast
        self.tids = itertools.count(1)

    def object_machine(self, obj: dsl.ObjectDecl) -> Hfsm:
        if obj.behavior is None:
            st = State(name=WILDCARD, kind="base", label=WILDCARD)
            return Hfsm(name=obj.name, states={st.name: st},
                        initial=st.name, final=None, transitions=[])
        body = self.behavior_body(obj.behavior)
        m = self.compile_stmt(body)
        m.name = obj.behavior
        return m

    def behavior_body(self, name: str) -> dsl.Stmt:
        b = self.ast.behaviors.get(name)
        if b is not None:
            return b.body
        if name in self.ast.primitive_behaviors:
            return dsl.DoStmt(behavior=name)
        raise TranslationError("behavior %r is not defined" % name)

    def compile_stmt(self, s: dsl.Stmt) -> Hfsm:
        if isinstance(s, dsl.DoStmt):
            return self.compile_do(s)
        if isinstance(s, dsl.SeqStmt):
            return self.compile_seq(s)
        if isinstance(s, dsl.TryStmt):
            return self.compile_try(s)
        raise TranslationError("cannot compile %r" % type(s).__name__)

    def compile_do(self, s: dsl.DoStmt) -> Hfsm:
        name = s.behavior
        end = State(name="End", kind="final")
        if name in self.ast.behaviors:
            # hierarchical run of a defined behavior
            child = self.compile_stmt(self.ast.behaviors[name].body)
            child.name = name
            wrapper = State(name=name, kind="wrapper", child=child)
            transitions = []
            if s.until is not None:
                transitions.append(Transition(next(self.tids), name, "End",
                                              "guard", s.until))
            transitions.append(Transition(next(self.tids), name, "End", "term"))
            return Hfsm(name=name, states={name: wrapper, "End": end},
                        initial=name, final="End", transitions=transitions)
        # primitive run: a base state emitting the primitive's name
        base = State(name=name, kind="base", label=name)
        transitions = []
        if s.until is not None:
            transitions.append(Transition(next(self.tids), name, "End",
                                          "guard", s.until))
        # primitives never finish on their own; the completion edge exists
        # so the structure still shows where control would go
        transitions.append(Transition(next(self.tids), name, "End",
                                      "completion", dsl.BoolLit(False)))
        return Hfsm(name=name, states={name: base, "End": end},
                    initial=name, final="End", transitions=transitions)

    def compile_seq(self, s: dsl.SeqStmt) -> Hfsm:
        parts = [self.compile_stmt(st) for st in s.stmts]
        if len(parts) == 1:
            return parts[0]
        states: dict[str, State] = {}
        transitions: list[Transition] = []
        renames: list[dict[str, str]] = []
        for part in parts:
            ren: dict[str, str] = {}
            for name, st in part.states.items():
                new = name
                k = 2
                while new in states:
                    new = "%s.%d" % (name, k)
                    k += 1
                ren[name] = new
                states[new] = State(name=new, kind=st.kind, label=st.label,
                                    child=st.child)
            renames.append(ren)
        for i, part in enumerate(parts):
            ren = renames[i]
            last = i == len(parts) - 1
            for t in part.transitions:
                dst = ren[t.dst]
                if not last and t.dst == part.final:
                    # completion of this component starts the next one
                    dst = renames[i + 1][parts[i + 1].initial]
                transitions.append(Transition(t.tid, ren[t.src], dst,
                                              t.kind, t.guard))
            if not last:
                del states[ren[part.final]]
        return Hfsm(name="Seq",
                    states=states,
                    initial=renames[0][parts[0].initial],
                    final=renames[-1][parts[-1].final],
                    transitions=transitions)

    def compile_try(self, s: dsl.TryStmt) -> Hfsm:
        body = self.compile_stmt(s.body)
        handler = self.compile_stmt(s.handler)
        body.name = "TryBody"
        handler.name = "Handler"
        states = {
            "Try": State(name="Try", kind="try", child=body),
            "Interrupt": State(name="Interrupt", kind="interrupt",
                               child=handler),
            "End": State(name="End", kind="final"),
        }
        transitions = [
            Transition(next(self.tids), "Try", "Interrupt", "guard",
                       s.condition),
            Transition(next(self.tids), "Interrupt", "Try", "term"),
            Transition(next(self.tids), "Try", "End", "term"),
        ]
        return Hfsm(name="Try", states=states, initial="Try", final="End",
                    transitions=transitions)


def translate(ast: dsl.ScenarioAST) -> HfsmBundle:
    """One machine per declared object, behavior-less objects included
    (they get a single wildcard state that matches any observation)."""
    comp = _Compiler(ast)
    machines = {obj.name: comp.object_machine(obj) for obj in ast.objects}
    return HfsmBundle(machines=machines)


# ---------------------------------------------------------------------------
# configurations

def init_conf(m: Hfsm) -> Conf:
    """Initial configuration: descend initial states without evaluating
    any guard."""
    s = m.state(m.initial)
    child = init_conf(s.child) if s.child is not None else None
    return Conf(state=m.initial, child=child)


def is_terminal(m: Hfsm, conf: Conf) -> bool:
    return m.final is not None and conf.state == m.final


def termination_predicate(m: Hfsm):
    return lambda conf: is_terminal(m, conf)


def label_of(m: Hfsm, conf: Conf) -> str | None:
    """The primitive name a configuration emits this step; None when the
    machine has terminated."""
    if is_terminal(m, conf):
        return None
    s = m.state(conf.state)
    if s.child is None:
        return s.label
    return label_of(s.child, conf.child)


# ---------------------------------------------------------------------------
# the branching stepper

class SymbolicOracle:
    """Forks every guard both ways and records the assumption."""

    def ask(self, edge: Transition):
        return ((True, (edge.tid, True)), (False, (edge.tid, False)))


class RuntimeOracle:
    """Answers from guard attainability at the current frame."""

    def __init__(self, ctx):
        from . import guards
        self._guards = guards
        self.ctx = ctx

    def ask(self, edge: Transition):
        ts = self._guards.guard_sat(edge.guard, self.ctx)
        out = []
        if ts.can_true:
            out.append((True, None))
        if ts.can_false:
            out.append((False, None))
        return out


def step_branches(m: Hfsm, conf: Conf, oracle,
                  fired: frozenset = frozenset(),
                  lits: frozenset = frozenset()):
    """All successor configurations for one timestep.

    Returns (conf, fired, lits) triples.  Each transition fires at most
    once per branch per step, which bounds same-step chains; a state may
    fire any attainably-true guard edge or stay put when every guard
    edge is attainably false.  A state whose child machine terminates
    must take a `term` edge in the same step or the branch is dropped.
    """
    s = m.state(conf.state)
    if is_terminal(m, conf):
        return [(conf, fired, lits)]
    results = []
    guard_edges = [t for t in m.out(conf.state)
                   if t.kind in ("guard", "completion")]
    for e in guard_edges:
        if e.tid in fired:
            continue
        for outcome, lit in oracle.ask(e):
            if outcome:
                nl = lits | {lit} if lit is not None else lits
                results.extend(_enter(m, e, conf, oracle,
                                      fired | {e.tid}, nl))
    # staying requires every guard edge to be attainably false
    stay_lits = lits
    stay_ok = True
    for e in guard_edges:
        hit = False
        for outcome, lit in oracle.ask(e):
            if not outcome:
                hit = True
                if lit is not None:
                    stay_lits = stay_lits | {lit}
        if not hit:
            stay_ok = False
            break
    if stay_ok:
        if s.child is None:
            results.append((conf, fired, stay_lits))
        else:
            for cc, f2, l2 in step_branches(s.child, conf.child, oracle,
                                            fired, stay_lits):
                if is_terminal(s.child, cc):
                    for te in m.out(conf.state):
                        if te.kind == "term" and te.tid not in f2:
                            results.extend(_take_term(m, te, conf, oracle,
                                                      f2 | {te.tid}, l2))
                    # no term edge available: branch dropped
                else:
                    results.append((Conf(conf.state, child=cc,
                                         paused=conf.paused), f2, l2))
    return results


def _fresh_conf(m: Hfsm, dst: str) -> Conf:
    s = m.state(dst)
    child = init_conf(s.child) if s.child is not None else None
    return Conf(state=dst, child=child)


def _enter(m: Hfsm, edge: Transition, old: Conf, oracle, fired, lits):
    dst = m.state(edge.dst)
    if dst.kind == "interrupt":
        # pause the body as it stands; the handler starts fresh
        nc = Conf(state=edge.dst,
                  child=init_conf(dst.child) if dst.child else None,
                  paused=old.child)
    else:
        nc = _fresh_conf(m, edge.dst)
    return step_branches(m, nc, oracle, fired, lits)


def _take_term(m: Hfsm, edge: Transition, old: Conf, oracle, fired, lits):
    src = m.state(old.state)
    dst = m.state(edge.dst)
    if src.kind == "interrupt" and dst.kind == "try" and old.paused is not None:
        # resume the paused body where it left off
        nc = Conf(state=edge.dst, child=old.paused)
        return step_branches(m, nc, oracle, fired, lits)
    return _enter(m, edge, old, oracle, fired, lits)


def step_confs(m: Hfsm, conf: Conf, oracle) -> set[Conf]:
    return {nc for nc, _, _ in step_branches(m, conf, oracle)}


# ---------------------------------------------------------------------------
# flattening

@dataclass(frozen=True)
class FlatEdge:
    src: str
    dst: str
    literals: frozenset          # of (tid, bool)


@dataclass
class FlatNfa:
    """One machine collapsed to its reachable configurations.  Edge
    literals name the guard outcomes a step must attain to take it."""
    states: tuple[str, ...]
    initial: str
    edges: tuple[FlatEdge, ...]
    labels: dict[str, str | None]
    guards: dict[int, dsl.Expr]
    confs: dict[str, Conf] = field(default_factory=dict)

    def out(self, state: str) -> list[FlatEdge]:
        return [e for e in self.edges if e.src == state]


def flatten(m: Hfsm, max_states: int = 4096) -> FlatNfa:
    start = init_conf(m)
    names: dict[Conf, str] = {}
    used: set[str] = set()

    def name_for(conf: Conf) -> str:
        if conf in names:
            return names[conf]
        base = label_of(m, conf)
        if base is None:
            base = "Terminated"
        cand, k = base, 1
        while cand in used:
            k += 1
            cand = "%s#%d" % (base, k)
        used.add(cand)
        names[conf] = cand
        return cand

    oracle = SymbolicOracle()
    edges: set[FlatEdge] = set()
    order = [start]
    seen = {start}
    name_for(start)
    i = 0
    while i < len(order):
        conf = order[i]
        i += 1
        for nc, _, lits in step_branches(m, conf, oracle):
            if nc not in seen:
                if len(seen) >= max_states:
                    raise BudgetExceededError(
                        "flattening exceeded %d states" % max_states)
                seen.add(nc)
                name_for(nc)
                order.append(nc)
            edges.add(FlatEdge(names[conf], names[nc], frozenset(lits)))

    guards: dict[int, dsl.Expr] = {}

    def collect(mm: Hfsm):
        for t in mm.transitions:
            if t.guard is not None:
                guards[t.tid] = t.guard
        for st in mm.states.values():
            if st.child is not None:
                collect(st.child)

    collect(m)
    state_names = tuple(names[c] for c in order)
    return FlatNfa(states=state_names,
                   initial=names[start],
                   edges=tuple(sorted(edges, key=lambda e: (e.src, e.dst,
                                                            sorted(e.literals)))),
                   labels={names[c]: label_of(m, c) for c in order},
                   guards=guards,
                   confs={names[c]: c for c in order})


# ---------------------------------------------------------------------------
# serialisation

def _machine_to_dict(m: Hfsm) -> dict:
    return {
        "name": m.name,
        "initial": m.initial,
        "final": m.final,
        "states": [
            {
                "name": s.name,
                "kind": s.kind,
                **({"label": s.label} if s.label is not None else {}),
                **({"child": _machine_to_dict(s.child)}
                   if s.child is not None else {}),
            }
            for s in m.states.values()
        ],
        "transitions": [
            {
                "tid": t.tid,
                "src": t.src,
                "dst": t.dst,
                "kind": t.kind,
                **({"guard": dsl._pp(t.guard)} if t.guard is not None else {}),
            }
            for t in m.transitions
        ],
    }


def bundle_to_dict(bundle: HfsmBundle, include_flat: bool = True) -> dict:
    out = {"machines": {name: _machine_to_dict(m)
                        for name, m in bundle.machines.items()}}
    if include_flat:
        flat = {}
        for name, m in bundle.machines.items():
            nfa = flatten(m)
            flat[name] = {
                "states": list(nfa.states),
                "initial": nfa.initial,
                "labels": nfa.labels,
                "edges": [
                    {
                        "src": e.src,
                        "dst": e.dst,
                        "requires": [
                            {"guard": dsl._pp(nfa.guards[tid]), "value": val}
                            for tid, val in sorted(e.literals)
                        ],
                    }
                    for e in nfa.edges
                ],
            }
        out["flat"] = flat
    return out


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def bundle_to_dot(bundle: HfsmBundle) -> str:
    lines = ["digraph scenario {", "  rankdir=LR;",
             '  node [shape=box, fontname="Helvetica"];']
    counter = itertools.count()

    def node_id() -> str:
        return "n%d" % next(counter)

    def emit(m: Hfsm, owner: str, depth: int) -> dict[str, str]:
        ids: dict[str, str] = {}
        pad = "  " * (depth + 1)
        lines.append('%ssubgraph "cluster_%s" {' % (pad, _dot_escape(owner)))
        lines.append('%s  label="%s";' % (pad, _dot_escape(owner)))
        for s in m.states.values():
            nid = node_id()
            ids[s.name] = nid
            shape = "doublecircle" if s.name == m.final else \
                    ("ellipse" if s.kind == "base" else "box")
            lines.append('%s  %s [label="%s", shape=%s];'
                         % (pad, nid, _dot_escape(s.name), shape))
            if s.child is not None:
                emit(s.child, "%s/%s" % (owner, s.name), depth + 1)
        for t in m.transitions:
            attrs = []
            if t.kind == "term":
                attrs.append('style=dashed')
                attrs.append('label="done"')
            elif t.kind == "completion":
                attrs.append('style=dotted')
            if t.guard is not None and t.kind != "completion":
                attrs.append('label="%s"' % _dot_escape(dsl._pp(t.guard)))
            lines.append('%s  %s -> %s [%s];'
                         % (pad, ids[t.src], ids[t.dst], ", ".join(attrs)))
        lines.append("%s}" % pad)
        return ids

    for name, m in bundle.machines.items():
        emit(m, name, 0)
    lines.append("}")
    return "\n".join(lines)
