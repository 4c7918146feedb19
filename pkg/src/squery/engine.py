"""Runtime stepping of machine bundles against trace windows.

The matcher keeps, per object, the set of machine configurations
consistent with the labels observed so far.  Each frame advances every
configuration through the branching stepper and keeps the successors
whose emitted label is among the frame's observed behaviors; an empty
set means the window cannot contain the scenario under this
correspondence.
"""

from __future__ import annotations

from . import guards
from .compiler import (
    WILDCARD,
    Conf,
    Hfsm,
    HfsmBundle,
    RuntimeOracle,
    init_conf,
    label_of,
    step_branches,
)
from .geometry import ViewCone


def initial_base_states(m: Hfsm) -> frozenset[Conf]:
    """Start-of-window configurations; guards are not consulted here."""
    return frozenset([init_conf(m)])


def valid_step(m: Hfsm, confs, ctx: guards.EvalContext,
               observed: frozenset[str]) -> frozenset[Conf]:
    """One frame: step every configuration and keep the successors whose
    emitted label was observed.  Terminated branches emit nothing and
    are dropped; a wildcard machine matches any observation."""
    oracle = RuntimeOracle(ctx)
    out = set()
    for c in confs:
        for nc, _, _ in step_branches(m, c, oracle):
            if nc in out:
                continue
            lab = label_of(m, nc)
            if lab is None:
                continue
            if lab == WILDCARD or lab in observed:
                out.add(nc)
    return frozenset(out)


def run_window(bundle: HfsmBundle, trace, start: int, length: int,
               corr: dict[str, str],
               road_map=None,
               cones: dict[str, ViewCone] | None = None,
               memo: dict | None = None) -> bool:
    """Whether frames [start, start+length) admit a consistent run for
    every object under the correspondence.  The caller is expected to
    have checked the initial scene at `start` already."""
    confs = {name: initial_base_states(m)
             for name, m in bundle.machines.items()}
    for t in range(start, start + length):
        frame = trace.frames[t]
        # guards may look at any corresponded object, so a single absence
        # sinks the whole frame before any machine is stepped
        if any(corr[name] not in frame.objs for name in bundle.machines):
            return False
        ctx = guards.EvalContext(frame=frame, corr=corr, road_map=road_map,
                                 cones=cones or {}, memo=memo)
        for name, m in bundle.machines.items():
            obs = frame.objs[corr[name]]
            confs[name] = valid_step(m, confs[name], ctx, obs.behaviors)
            if not confs[name]:
                return False
    return True
