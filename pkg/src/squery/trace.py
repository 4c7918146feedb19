"""Labeled trace files.

A trace is a fixed-rate sequence of frames.  Each frame maps object ids
to an observed state: position, heading, optional lane id, and the set
of behavior labels the upstream perception stack assigned for that
timestep.  Objects may be absent from individual frames.

File format (JSON):

    {
      "hz": 2.0,
      "objects": [{"id": "car1", "class": "Car"}, ...],
      "frames": [
        {"t": 0,
         "objs": {"car1": {"pos": [x, y, z], "heading": 0.0,
                           "lane": "Lane1", "behaviors": ["FollowLane"]}}},
        ...
      ]
    }

`pos` accepts two or three components; `lane` may be null or omitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import FormatError, ValidationError


@dataclass(frozen=True)
class ObsState:
    """One object's observed state at one frame."""
    pos: tuple[float, float, float]
    heading: float
    lane: str | None
    behaviors: frozenset[str]
    cls: str


@dataclass(frozen=True)
class Frame:
    t: int
    objs: dict[str, ObsState]


@dataclass(frozen=True)
class LabelTrace:
    hz: float
    objects: tuple[tuple[str, str], ...]   # (id, class), file order
    frames: tuple[Frame, ...]

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.objects)

    @property
    def classes(self) -> dict[str, str]:
        return dict(self.objects)


def _parse_pos(raw) -> tuple[float, float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) not in (2, 3):
        raise FormatError("pos must have 2 or 3 components, got %r" % (raw,))
    vals = [float(v) for v in raw]
    while len(vals) < 3:
        vals.append(0.0)
    return tuple(vals)


def trace_from_dict(data: dict) -> LabelTrace:
    if not isinstance(data, dict):
        raise FormatError("trace JSON must be an object")
    for key in ("objects", "frames"):
        if key not in data:
            raise FormatError("trace JSON needs %r" % key)
    hz = float(data.get("hz", 1.0))
    if hz <= 0:
        raise ValidationError("hz must be positive")
    objects: list[tuple[str, str]] = []
    seen: set[str] = set()
    for i, entry in enumerate(data["objects"]):
        try:
            oid, cls = str(entry["id"]), str(entry["class"])
        except (KeyError, TypeError) as exc:
            raise FormatError("object #%d is malformed: %s" % (i, exc)) from exc
        if oid in seen:
            raise ValidationError("duplicate object id %r" % oid)
        seen.add(oid)
        objects.append((oid, cls))
    classes = dict(objects)
    frames: list[Frame] = []
    for i, fr in enumerate(data["frames"]):
        if not isinstance(fr, dict) or "objs" not in fr:
            raise FormatError("frame #%d is malformed" % i)
        t = int(fr.get("t", i))
        if t != i:
            raise ValidationError(
                "frame #%d carries t=%d; frames must be consecutive" % (i, t))
        objs: dict[str, ObsState] = {}
        for oid, st in fr["objs"].items():
            if oid not in classes:
                raise ValidationError(
                    "frame #%d references undeclared object %r" % (i, oid))
            try:
                pos = _parse_pos(st["pos"])
                heading = float(st["heading"])
                lane = st.get("lane")
                behaviors = st.get("behaviors", [])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(
                    "frame #%d object %r is malformed: %s"
                    % (i, oid, exc)) from exc
            if lane is not None:
                lane = str(lane)
            if not isinstance(behaviors, list) or \
                    not all(isinstance(b, str) for b in behaviors):
                raise FormatError(
                    "frame #%d object %r: behaviors must be a list of "
                    "strings" % (i, oid))
            objs[oid] = ObsState(pos=pos, heading=heading, lane=lane,
                                 behaviors=frozenset(behaviors), cls=classes[oid])
        frames.append(Frame(t=t, objs=objs))
    return LabelTrace(hz=hz, objects=tuple(objects), frames=tuple(frames))


def trace_to_dict(trace: LabelTrace) -> dict:
    return {
        "hz": trace.hz,
        "objects": [{"id": oid, "class": cls} for oid, cls in trace.objects],
        "frames": [
            {
                "t": fr.t,
                "objs": {
                    oid: {
                        "pos": list(st.pos),
                        "heading": st.heading,
                        "lane": st.lane,
                        "behaviors": sorted(st.behaviors),
                    }
                    for oid, st in sorted(fr.objs.items())
                },
            }
            for fr in trace.frames
        ],
    }


def load_trace(path: str) -> LabelTrace:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("not valid JSON: %s" % exc) from exc
    return trace_from_dict(data)


def save_trace(trace: LabelTrace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_dict(trace), fh, indent=2, sort_keys=True)
        fh.write("\n")


def object_durations(trace: LabelTrace) -> dict[str, int]:
    """Total number of frames each declared object appears in."""
    counts = {oid: 0 for oid, _ in trace.objects}
    for fr in trace.frames:
        for oid in fr.objs:
            counts[oid] += 1
    return counts


def longest_presence(trace: LabelTrace, oid: str) -> int:
    """Longest run of consecutive frames in which the object appears."""
    best = run = 0
    for fr in trace.frames:
        if oid in fr.objs:
            run += 1
            best = max(best, run)
        else:
            run = 0
    return best
