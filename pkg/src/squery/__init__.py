"""squery: match scenario programs against labeled time-series traces.

A scenario is written in a small behavior language (objects with scene
constraints and hierarchical behaviors); a trace records per-frame
object states and candidate behavior labels.  The query compiles
behaviors to state machines and searches object correspondences and
windows for a consistent run.
"""

from . import errors
from .compiler import HfsmBundle, bundle_to_dict, bundle_to_dot, flatten, translate
from .dsl import ParseOptions, ScenarioAST, fragment_check, parse, parse_file, pretty
from .guards import EvalContext, IntervalUnion, TriState, eval_expr, guard_sat
from .oracle import brute_force_match, enumerate_runs
from .query import (
    QueryResult,
    QueryStats,
    Witness,
    batch_query,
    correspondence_candidates,
    match_window,
    query,
    query_source,
)
from .synth import GenResult, build_strip_map, generate_trace, scale_program
from .trace import (
    LabelTrace,
    load_trace,
    longest_presence,
    object_durations,
    save_trace,
)
from .world import RoadMap, initial_input_match, load_map, save_map

__version__ = "0.1.0"

__all__ = [
    "errors",
    "HfsmBundle", "bundle_to_dict", "bundle_to_dot", "flatten", "translate",
    "ParseOptions", "ScenarioAST", "fragment_check", "parse", "parse_file",
    "pretty",
    "EvalContext", "IntervalUnion", "TriState", "eval_expr", "guard_sat",
    "brute_force_match", "enumerate_runs",
    "QueryResult", "QueryStats", "Witness", "batch_query",
    "correspondence_candidates", "match_window", "query", "query_source",
    "GenResult", "build_strip_map", "generate_trace", "scale_program",
    "LabelTrace", "load_trace", "longest_presence", "object_durations",
    "save_trace",
    "RoadMap", "initial_input_match", "load_map", "save_map",
    "__version__",
]
