"""Authoritative session state: sequencer grid, transport, control values.

All values are immutable; apply_mutation returns a new state and never touches
its input. Identical mutation sequences therefore always reproduce identical
snapshots, which is what late-join convergence relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from .protocol import (
    ControlChange,
    Payload,
    ProtocolError,
    SeqCellSet,
    TransportSet,
)

BPM_MIN = 20.0
BPM_MAX = 300.0


class StateError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Cell:
    on: bool = False
    note: Optional[int] = None


@dataclass(frozen=True)
class Transport:
    bpm: float = 120.0
    playing: bool = False
    step: int = 0


@dataclass(frozen=True)
class SharedState:
    grid: Tuple[Tuple[Cell, ...], ...]  # instruments x steps, fixed at creation
    transport: Transport
    controls: Tuple[Tuple[str, float], ...]  # sorted (id, value) pairs
    revision: int = 0

    @property
    def instruments(self) -> int:
        return len(self.grid)

    @property
    def steps(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def control_value(self, control_id: str) -> float:
        for cid, v in self.controls:
            if cid == control_id:
                return v
        raise StateError("unknown-control", control_id)


def initial_state(instruments: int, steps: int, control_ids) -> SharedState:
    if instruments < 1 or steps < 1:
        raise StateError("index-out-of-range", f"grid {instruments}x{steps} invalid")
    grid = tuple(tuple(Cell() for _ in range(steps)) for _ in range(instruments))
    controls = tuple((cid, 0.0) for cid in sorted(set(control_ids)))
    return SharedState(grid=grid, transport=Transport(), controls=controls, revision=0)


def _clamp_bpm(bpm: float) -> float:
    return min(max(float(bpm), BPM_MIN), BPM_MAX)


def apply_mutation(state: SharedState, m: Payload) -> SharedState:
    """Fold one state-mutating payload into a new state (revision +1).

    Only ControlChange, SeqCellSet and TransportSet mutate; anything else is
    rejected. Out-of-range indices and unknown control ids raise StateError
    and leave no trace.
    """
    if isinstance(m, ControlChange):
        ids = [cid for cid, _ in state.controls]
        if m.control not in ids:
            raise StateError("unknown-control", m.control)
        controls = tuple((cid, m.value if cid == m.control else v)
                         for cid, v in state.controls)
        return replace(state, controls=controls, revision=state.revision + 1)

    if isinstance(m, SeqCellSet):
        if not (0 <= m.instrument < state.instruments):
            raise StateError("index-out-of-range",
                             f"instrument {m.instrument} not in [0,{state.instruments})")
        if not (0 <= m.step < state.steps):
            raise StateError("index-out-of-range",
                             f"step {m.step} not in [0,{state.steps})")
        row = state.grid[m.instrument]
        new_row = row[:m.step] + (Cell(on=m.on, note=m.note),) + row[m.step + 1:]
        grid = state.grid[:m.instrument] + (new_row,) + state.grid[m.instrument + 1:]
        return replace(state, grid=grid, revision=state.revision + 1)

    if isinstance(m, TransportSet):
        t = state.transport
        if m.bpm is not None:
            t = replace(t, bpm=_clamp_bpm(m.bpm))
        if m.playing is not None:
            t = replace(t, playing=m.playing)
        return replace(state, transport=t, revision=state.revision + 1)

    raise StateError("invalid-mutation", type(m).__name__)


def set_step(state: SharedState, step: int) -> SharedState:
    """Advance the transport step (hub clock tick, not a client mutation)."""
    if not (0 <= step < state.steps):
        raise StateError("index-out-of-range", f"step {step}")
    return replace(state, transport=replace(state.transport, step=step),
                   revision=state.revision + 1)


# --- Canonical serialization ------------------------------------------------

def snapshot(state: SharedState) -> str:
    """Lossless canonical serialization; equal states serialize bitwise equal."""
    obj = {
        "grid": [[{"on": c.on, "note": c.note} for c in row] for row in state.grid],
        "transport": {"bpm": state.transport.bpm, "playing": state.transport.playing,
                      "step": state.transport.step},
        "controls": {cid: v for cid, v in state.controls},
        "revision": state.revision,
    }
    return json.dumps(obj, separators=(",", ":"), sort_keys=True, allow_nan=False)


def load_snapshot(text: str) -> SharedState:
    try:
        obj = json.loads(text)
        grid = tuple(tuple(Cell(on=c["on"], note=c["note"]) for c in row)
                     for row in obj["grid"])
        t = obj["transport"]
        controls = tuple(sorted((cid, float(v)) for cid, v in obj["controls"].items()))
        return SharedState(grid=grid,
                           transport=Transport(bpm=float(t["bpm"]), playing=t["playing"],
                                               step=t["step"]),
                           controls=controls, revision=obj["revision"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise StateError("malformed-snapshot", str(exc))


# --- Transport clock --------------------------------------------------------

@dataclass(frozen=True)
class TransportClock:
    """Metronome step clock; anchor pins a known (time, step) pair so bpm
    changes re-anchor without skipping or repeating a step."""

    bpm: float
    steps: int
    steps_per_beat: int = 1
    anchor_time_ms: float = 0.0
    anchor_step: int = 0

    def __post_init__(self):
        if not (BPM_MIN <= self.bpm <= BPM_MAX):
            raise StateError("index-out-of-range", f"bpm {self.bpm}")
        if self.steps < 1 or self.steps_per_beat < 1:
            raise StateError("index-out-of-range", "steps and steps_per_beat must be >= 1")

    @property
    def interval_ms(self) -> float:
        return 60000.0 / (self.bpm * self.steps_per_beat)

    def step_at(self, now_ms: float):
        """Return (step index, next_fire_ms) for a query at now_ms >= anchor."""
        elapsed = now_ms - self.anchor_time_ms
        ticks = int(elapsed // self.interval_ms)
        step = (self.anchor_step + ticks) % self.steps
        next_fire = self.anchor_time_ms + (ticks + 1) * self.interval_ms
        return step, next_fire

    def with_bpm(self, bpm: float, now_ms: float) -> "TransportClock":
        """Change tempo, re-anchored at the step current at now_ms: that step
        is treated as having just begun, so the boundary sequence stays a
        straight +1 progression across the change."""
        step, _ = self.step_at(now_ms)
        return replace(self, bpm=_clamp_bpm(bpm), anchor_time_ms=float(now_ms),
                       anchor_step=step)
