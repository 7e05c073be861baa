"""Declarative control-surface definitions.

A surface spec is a human-editable JSON document describing the controls a
client page renders. The capability set a surface needs is derived from its
control kinds, never authored by hand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .protocol import Topic

CONTROL_KINDS = ("slider", "pot", "xy", "pad_grid", "step_sequencer", "tilt")
TILT_AXES = ("alpha", "beta", "gamma")


class SurfaceError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class ControlSpec:
    id: str
    kind: str
    rows: int = 1            # pad_grid
    cols: int = 1            # pad_grid
    instruments: int = 1     # step_sequencer
    steps: int = 8           # step_sequencer
    axes: Tuple[str, ...] = ()  # tilt
    label: str = ""

    def required_capability(self) -> str:
        return "gyroscope" if self.kind == "tilt" else "touch"


@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    controls: Tuple[ControlSpec, ...]
    requires: frozenset = field(default_factory=frozenset)

    def sequencer(self) -> Optional[ControlSpec]:
        for c in self.controls:
            if c.kind == "step_sequencer":
                return c
        return None

    def control_ids(self) -> List[str]:
        """Every topic-addressable control id (xy pads contribute /x and /y)."""
        ids = []
        for c in self.controls:
            if c.kind == "xy":
                ids.extend([f"{c.id}/x", f"{c.id}/y"])
            elif c.kind == "tilt":
                ids.extend(f"{c.id}/{axis}" for axis in c.axes)
            elif c.kind == "step_sequencer":
                pass  # addressed through SeqCellSet, not ControlChange
            elif c.kind == "pad_grid":
                ids.extend(f"{c.id}/{r}_{col}" for r in range(c.rows) for col in range(c.cols))
            else:
                ids.append(c.id)
        return ids


def _parse_control(d: dict) -> ControlSpec:
    if not isinstance(d, dict):
        raise SurfaceError("malformed-spec", "control must be an object")
    cid = d.get("id")
    kind = d.get("kind")
    if not cid or not isinstance(cid, str) or "/" in cid or "*" in cid:
        raise SurfaceError("malformed-spec", f"bad control id {cid!r}")
    if kind not in CONTROL_KINDS:
        raise SurfaceError("unknown-kind", f"control kind {kind!r}")
    rows = d.get("rows", 1)
    cols = d.get("cols", 1)
    instruments = d.get("instruments", 1)
    steps = d.get("steps", 8)
    for name, v in (("rows", rows), ("cols", cols),
                    ("instruments", instruments), ("steps", steps)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise SurfaceError("bad-dimension", f"{cid}.{name}={v!r} must be int >= 1")
    axes = tuple(d.get("axes", TILT_AXES if kind == "tilt" else ()))
    if kind == "tilt":
        if not axes or any(a not in TILT_AXES for a in axes):
            raise SurfaceError("malformed-spec", f"{cid}.axes must be a subset of {TILT_AXES}")
    return ControlSpec(id=cid, kind=kind, rows=rows, cols=cols,
                       instruments=instruments, steps=steps, axes=axes,
                       label=d.get("label", ""))


def load_spec(document: str) -> SurfaceSpec:
    """Parse and validate a surface spec document, deriving its capability set."""
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SurfaceError("malformed-spec", f"not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise SurfaceError("malformed-spec", "spec must be a JSON object")
    name = obj.get("name")
    if not name or not isinstance(name, str) or "/" in name:
        raise SurfaceError("malformed-spec", f"bad surface name {name!r}")
    raw = obj.get("controls")
    if not isinstance(raw, list) or not raw:
        raise SurfaceError("malformed-spec", "spec needs at least one control")
    controls = tuple(_parse_control(d) for d in raw)
    seen = set()
    for c in controls:
        if c.id in seen:
            raise SurfaceError("duplicate-control", c.id)
        seen.add(c.id)
    requires = frozenset(c.required_capability() for c in controls)
    return SurfaceSpec(name=name, controls=controls, requires=requires)


def load_spec_file(path) -> SurfaceSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_spec(fh.read())


def control_topic(surface: str, control: str, axis: Optional[str] = None) -> Topic:
    """Deterministic, collision-free topic for one control (or one axis of it)."""
    if axis is not None:
        return Topic(f"control/{surface}/{control}/{axis}")
    return Topic(f"control/{surface}/{control}")


def topics_for_surface(spec: SurfaceSpec) -> List[Topic]:
    """All control topics a surface can publish on (sequencer uses state/seq)."""
    out = []
    for c in spec.controls:
        if c.kind == "xy":
            out.append(control_topic(spec.name, c.id, "x"))
            out.append(control_topic(spec.name, c.id, "y"))
        elif c.kind == "tilt":
            out.extend(control_topic(spec.name, c.id, axis) for axis in c.axes)
        elif c.kind == "pad_grid":
            out.extend(control_topic(spec.name, c.id, f"{r}_{col}")
                       for r in range(c.rows) for col in range(c.cols))
        elif c.kind == "step_sequencer":
            continue
        else:
            out.append(control_topic(spec.name, c.id))
    return out
