"""Command-line interface.

Subcommands: compile (machines to JSON/DOT), match (scenario retrieval
over traces with retrieval-style exit codes), gen (seeded trace
synthesis), oracle (the exhaustive reference matcher), bench (runtime
sweeps with CSV and figure output).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bench as benchmod
from . import compiler, dsl, oracle, synth, world
from .errors import SourceError, SqueryError
from .query import query
from .trace import load_trace, save_trace

log = logging.getLogger("squery")

EXIT_MATCH = 0
EXIT_NO_MATCH = 1
EXIT_ERROR = 2


def _setup_logging() -> None:
    level = os.environ.get("SQUERY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _collect_traces(paths: list[str]) -> list[str]:
    out: list[str] = []
    for p in paths:
        if os.path.isdir(p):
            out.extend(sorted(
                os.path.join(p, f) for f in os.listdir(p)
                if f.endswith(".json")))
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# compile

def cmd_compile(args) -> int:
    try:
        ast = dsl.parse(_read(args.program), filename=args.program)
        bundle = compiler.translate(ast)
    except (SqueryError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    stem = os.path.splitext(os.path.basename(args.program))[0]
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    if args.emit in ("json", "both"):
        path = os.path.join(args.out_dir, stem + ".machines.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(compiler.bundle_to_dict(bundle), fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
        written.append(path)
    if args.emit in ("dot", "both"):
        path = os.path.join(args.out_dir, stem + ".dot")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(compiler.bundle_to_dot(bundle))
            fh.write("\n")
        written.append(path)
    for path in written:
        print(path)
    return EXIT_MATCH


# ---------------------------------------------------------------------------
# match

def _match_task(payload: tuple) -> dict:
    source, trace_path, m_len, map_path, timeout, find_all = payload
    try:
        ast = dsl.parse(source)
        road_map = world.load_map(map_path) if map_path else None
        tr = load_trace(trace_path)
        res = query(ast, tr, m_len, road_map=road_map, timeout=timeout,
                    find_all=find_all)
        out = res.to_dict()
        out["trace"] = trace_path
        return out
    except Exception as exc:   # noqa: BLE001 - per-trace isolation
        return {"trace": trace_path,
                "error": "%s: %s" % (type(exc).__name__, exc)}


def _print_result(res: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(res, sort_keys=True))
        return
    trace = res.get("trace", "?")
    if "error" in res:
        print("%s: error: %s" % (trace, res["error"]))
    elif res.get("matched"):
        w = res["witness"]
        corr = " ".join("%s->%s" % kv
                        for kv in sorted(w["correspondence"].items()))
        print("%s: matched window=%d %s (%.3fs)"
              % (trace, w["window_start"], corr,
                 res["stats"]["wall_time_s"]))
    else:
        suffix = " (timed out)" if res["stats"]["timed_out"] else ""
        print("%s: no match%s (%.3fs)"
              % (trace, suffix, res["stats"]["wall_time_s"]))


def cmd_match(args) -> int:
    try:
        source = _read(args.program)
        dsl.parse(source, filename=args.program)   # fail fast on bad programs
        if args.map:
            world.load_map(args.map)               # and on bad maps
    except (SqueryError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    traces = _collect_traces(args.traces)
    if not traces:
        print("no trace files found", file=sys.stderr)
        return EXIT_ERROR
    payloads = [(source, t, args.min_duration, args.map, args.timeout,
                 args.find_all) for t in traces]
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs <= 1 or len(traces) == 1:
        results = [_match_task(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_match_task, payloads))
    any_match = False
    for res in results:
        _print_result(res, args.format)
        any_match = any_match or bool(res.get("matched"))
    return EXIT_MATCH if any_match else EXIT_NO_MATCH


# ---------------------------------------------------------------------------
# gen / oracle / bench

def cmd_gen(args) -> int:
    try:
        ast = dsl.parse(_read(args.program), filename=args.program)
        road_map = world.load_map(args.map) if args.map else None
        gen = synth.generate_trace(ast, seed=args.seed, length=args.length,
                                   hz=args.hz, road_map=road_map,
                                   id_scheme=args.ids)
        save_trace(gen.trace, args.output)
    except (SqueryError, OSError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    print(args.output)
    return EXIT_MATCH


def cmd_oracle(args) -> int:
    try:
        ast = dsl.parse(_read(args.program), filename=args.program)
        road_map = world.load_map(args.map) if args.map else None
        tr = load_trace(args.trace)
        matched, witness = oracle.brute_force_match(ast, tr,
                                                    args.min_duration,
                                                    road_map=road_map)
    except (SqueryError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    out = {"matched": matched,
           "witness": ({"correspondence": witness[0],
                        "window_start": witness[1]} if witness else None)}
    print(json.dumps(out, sort_keys=True))
    return EXIT_MATCH if matched else EXIT_NO_MATCH


def cmd_bench(args) -> int:
    try:
        if args.mode == "duration":
            rows = benchmod.run_duration_sweep(runs=args.runs,
                                               seed=args.seed)
        else:
            rows = benchmod.run_object_sweep(runs=args.runs, seed=args.seed,
                                             timeout=args.timeout)
        os.makedirs(args.out_dir, exist_ok=True)
        csv_path = os.path.join(args.out_dir, "bench_%s.csv" % args.mode)
        fig_path = os.path.join(args.out_dir, "bench_%s.png" % args.mode)
        benchmod.write_csv(rows, csv_path)
        benchmod.render_figure(rows, fig_path)
    except SqueryError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    for r in rows:
        print("%s size=%d m=%d mean=%.4fs stddev=%.4fs timeouts=%d"
              % (r.mode, r.size, r.m_len, r.mean_s, r.stddev_s, r.timeouts))
    print(csv_path)
    print(fig_path)
    return EXIT_MATCH


# ---------------------------------------------------------------------------
# argument wiring

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="squery",
        description="Match scenario programs against labeled traces.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("compile", help="translate a program to machines")
    c.add_argument("program")
    c.add_argument("--emit", choices=("json", "dot", "both"), default="json")
    c.add_argument("-o", "--out-dir", default=".")
    c.set_defaults(fn=cmd_compile)

    m = sub.add_parser("match", help="search traces for the scenario")
    m.add_argument("program")
    m.add_argument("traces", nargs="+",
                   help="trace files or directories of .json traces")
    m.add_argument("-m", "--min-duration", type=int, required=True)
    m.add_argument("--map")
    m.add_argument("--timeout", type=float, default=None)
    m.add_argument("--find-all", action="store_true")
    m.add_argument("--jobs", type=int, default=None)
    m.add_argument("--format", choices=("json", "text"), default="json")
    m.set_defaults(fn=cmd_match)

    g = sub.add_parser("gen", help="generate a trace from a program")
    g.add_argument("program")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--length", type=int, default=40)
    g.add_argument("--hz", type=float, default=2.0)
    g.add_argument("--map")
    g.add_argument("--ids", choices=("names", "anonymous"), default="names")
    g.set_defaults(fn=cmd_gen)

    o = sub.add_parser("oracle", help="run the exhaustive reference matcher")
    o.add_argument("program")
    o.add_argument("trace")
    o.add_argument("-m", "--min-duration", type=int, required=True)
    o.add_argument("--map")
    o.set_defaults(fn=cmd_oracle)

    b = sub.add_parser("bench", help="runtime sweeps with CSV and figure")
    b.add_argument("--mode", choices=("duration", "objects"),
                   default="duration")
    b.add_argument("--out-dir", default="bench_out")
    b.add_argument("--runs", type=int, default=benchmod.DEFAULT_RUNS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--timeout", type=float, default=benchmod.OBJECT_TIMEOUT_S)
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
