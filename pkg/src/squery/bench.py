"""Runtime sweeps: query cost against trace duration and object count.

Each sweep generates seeded traces from the pair program, times the
query, and reports one CSV row per size with mean and standard
deviation over the runs, plus a rendered figure next to the CSV.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass, field

from . import dsl, synth
from .query import query

DURATIONS = (20, 40, 60, 80, 100)
OBJECT_COUNTS = (2, 4, 6, 8)
DEFAULT_RUNS = 10
OBJECT_TIMEOUT_S = 10.0


@dataclass
class SweepRow:
    mode: str
    size: int
    m_len: int
    runs: int
    mean_s: float
    stddev_s: float
    timeouts: int
    times: list[float] = field(default_factory=list)


def _time_query(ast, trace, m_len, road_map, timeout=None, repeat=1):
    # best-of-k damps scheduler jitter, which otherwise swamps the
    # millisecond-scale durations in the duration sweep
    best = None
    res = None
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        res = query(ast, trace, m_len, road_map=road_map, timeout=timeout)
        elapsed = time.perf_counter() - t0
        if best is None or elapsed < best:
            best = elapsed
    return best, res


def run_duration_sweep(durations=DURATIONS, runs: int = DEFAULT_RUNS,
                       seed: int = 0) -> list[SweepRow]:
    src = synth.scale_program(1)
    ast = dsl.parse(src)
    road_map = synth.build_strip_map()
    rows = []
    warmed = False
    for length in durations:
        times = []
        for r in range(runs):
            gen = synth.generate_trace(ast, seed=seed * 1000 + length + r,
                                       length=length, road_map=road_map,
                                       id_scheme="anonymous")
            if not warmed:
                _time_query(ast, gen.trace, length // 2, road_map)
                warmed = True
            elapsed, _ = _time_query(ast, gen.trace, length // 2, road_map,
                                     repeat=3)
            times.append(elapsed)
        rows.append(SweepRow(
            mode="duration", size=length, m_len=length // 2, runs=runs,
            mean_s=statistics.fmean(times),
            stddev_s=statistics.stdev(times) if len(times) > 1 else 0.0,
            timeouts=0, times=times))
    return rows


def run_object_sweep(counts=OBJECT_COUNTS, runs: int = DEFAULT_RUNS,
                     seed: int = 0, length: int = 100,
                     timeout: float = OBJECT_TIMEOUT_S) -> list[SweepRow]:
    road_map = synth.build_strip_map()
    rows = []
    for n in counts:
        src = synth.scale_program(n // 2)
        ast = dsl.parse(src)
        times = []
        timeouts = 0
        for r in range(runs):
            gen = synth.generate_trace(ast, seed=seed * 1000 + n * 37 + r,
                                       length=length, road_map=road_map,
                                       id_scheme="anonymous")
            elapsed, res = _time_query(ast, gen.trace, length // 2,
                                       road_map, timeout=timeout)
            times.append(elapsed)
            if res.stats.timed_out:
                timeouts += 1
        rows.append(SweepRow(
            mode="objects", size=n, m_len=length // 2, runs=runs,
            mean_s=statistics.fmean(times),
            stddev_s=statistics.stdev(times) if len(times) > 1 else 0.0,
            timeouts=timeouts, times=times))
    return rows


def write_csv(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "size", "m", "runs", "mean_s", "stddev_s",
                    "timeouts"])
        for r in rows:
            w.writerow([r.mode, r.size, r.m_len, r.runs,
                        "%.6f" % r.mean_s, "%.6f" % r.stddev_s, r.timeouts])


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least squares y = a*x + b; returns (a, b, r_squared)."""
    n = len(xs)
    mx, my = statistics.fmean(xs), statistics.fmean(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0:
        return 0.0, my, 0.0
    a = sxy / sxx
    b = my - a * mx
    ss_res = sum((y - (a * x + b)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return a, b, r2


def render_figure(rows: list[SweepRow], path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r.size for r in rows]
    ys = [r.mean_s for r in rows]
    errs = [r.stddev_s for r in rows]
    mode = rows[0].mode if rows else "sweep"
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3)
    if mode == "duration":
        ax.set_xlabel("trace length (frames)")
        a, b, r2 = linear_fit(xs, ys)
        fit_ys = [a * x + b for x in xs]
        ax.plot(xs, fit_ys, linestyle="--", alpha=0.6,
                label="linear fit (R²=%.3f)" % r2)
        ax.legend()
    else:
        ax.set_xlabel("objects in program and trace")
        ax.set_yscale("log")
    ax.set_ylabel("query time (s)")
    ax.set_title("query runtime vs %s" % mode)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
