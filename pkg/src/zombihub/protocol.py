"""Wire protocol: envelope types, validation and the line-delimited text codec.

One frame = one JSON object on a single line with fixed top-level keys
``v, kind, src, seq, ts, pl``. Everything here is pure values; no I/O.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Optional, Union

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 64 * 1024

UNIT_ID_MIN = 1
UNIT_ID_MAX = 64


class ProtocolError(Exception):
    """Raised when a frame or value violates the wire contract."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


class Role(str, Enum):
    HOTSPOT = "hotspot"
    SERVER = "server"
    CLIENT = "client"


class ScriptBaseline(str, Enum):
    ES5 = "es5"
    ES6PLUS = "es6plus"


class TouchPhase(str, Enum):
    DOWN = "down"
    MOVE = "move"
    UP = "up"


def validate_unit_id(value: str) -> str:
    """Unit ids are 1-64 visible ASCII characters (no spaces or control chars)."""
    if not isinstance(value, str) or not (UNIT_ID_MIN <= len(value) <= UNIT_ID_MAX):
        raise ProtocolError("invariant-violation", f"bad unit id length: {value!r}")
    if any(not (0x21 <= ord(c) <= 0x7E) for c in value):
        raise ProtocolError("invariant-violation", f"unit id has invisible chars: {value!r}")
    return value


def _require_finite(name: str, v: float) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ProtocolError("invariant-violation", f"{name} must be a finite number, got {v!r}")
    return float(v)


def _require_unit_range(name: str, v: float) -> float:
    v = _require_finite(name, v)
    if not (0.0 <= v <= 1.0):
        raise ProtocolError("invariant-violation", f"{name}={v} outside [0,1]")
    return v


def _require_int(name: str, v, minimum: Optional[int] = None, maximum: Optional[int] = None) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise ProtocolError("invariant-violation", f"{name} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ProtocolError("invariant-violation", f"{name}={v} below {minimum}")
    if maximum is not None and v > maximum:
        raise ProtocolError("invariant-violation", f"{name}={v} above {maximum}")
    return v


@dataclass(frozen=True)
class CapabilityProfile:
    """What a unit can do; every field explicit after the hello handshake."""

    touch: bool
    accelerometer: bool
    gyroscope: bool
    secure_transport: bool
    script_baseline: ScriptBaseline = ScriptBaseline.ES5

    def to_dict(self) -> dict:
        return {
            "touch": self.touch,
            "accelerometer": self.accelerometer,
            "gyroscope": self.gyroscope,
            "secure_transport": self.secure_transport,
            "script_baseline": self.script_baseline.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CapabilityProfile":
        if not isinstance(d, dict):
            raise ProtocolError("malformed-frame", "caps must be an object")
        try:
            baseline = ScriptBaseline(d["script_baseline"])
        except (KeyError, ValueError) as exc:
            raise ProtocolError("invariant-violation", f"bad script_baseline: {exc}")
        out = {}
        for key in ("touch", "accelerometer", "gyroscope", "secure_transport"):
            v = d.get(key)
            if not isinstance(v, bool):
                raise ProtocolError("invariant-violation", f"caps.{key} must be explicit bool")
            out[key] = v
        return cls(script_baseline=baseline, **out)


@dataclass(frozen=True)
class Topic:
    """Slash-separated routing path, e.g. sensor/motion/u3 or control/zombitronica/vol0.

    Publish paths never contain wildcards; subscriptions may end with a single
    trailing "*" segment that matches exactly one segment of any value, or,
    when trailing, any suffix.
    """

    path: str

    def __post_init__(self):
        segs = self.path.split("/")
        if not segs or any(not s for s in segs):
            raise ProtocolError("invalid-topic", f"empty segment in {self.path!r}")
        stars = [i for i, s in enumerate(segs) if s == "*"]
        if stars and stars != [len(segs) - 1]:
            raise ProtocolError("invalid-topic", f"wildcard only allowed as trailing segment: {self.path!r}")

    @property
    def is_pattern(self) -> bool:
        return self.path.endswith("/*") or self.path == "*"

    def matches(self, concrete: "Topic") -> bool:
        """True when self (a subscription, possibly with trailing *) covers concrete."""
        if concrete.is_pattern:
            raise ProtocolError("invalid-topic", "publish topics must be concrete")
        if not self.is_pattern:
            return self.path == concrete.path
        prefix = self.path[:-1]  # keep trailing slash, or "" for bare "*"
        return concrete.path.startswith(prefix) if prefix else True


# --- Payload variants -------------------------------------------------------

@dataclass(frozen=True)
class Hello:
    roles: frozenset
    caps: CapabilityProfile
    wants_surface: Optional[str] = None
    requested_id: Optional[str] = None


@dataclass(frozen=True)
class Welcome:
    unit: str
    session: str
    snapshot: str  # canonical SharedState serialization (see state.snapshot)


@dataclass(frozen=True)
class Subscribe:
    topics: tuple


@dataclass(frozen=True)
class Unsubscribe:
    topics: tuple


@dataclass(frozen=True)
class Touch:
    surface: str
    control: str
    phase: TouchPhase
    x: float
    y: float


@dataclass(frozen=True)
class Motion:
    ax: float
    ay: float
    az: float
    rot_alpha: float
    rot_beta: float
    rot_gamma: float


@dataclass(frozen=True)
class Orientation:
    alpha: float  # deg, [0, 360)
    beta: float   # deg, [-180, 180]
    gamma: float  # deg, [-90, 90]


@dataclass(frozen=True)
class ControlChange:
    control: str
    value: float


@dataclass(frozen=True)
class SeqCellSet:
    instrument: int
    step: int
    on: bool
    note: Optional[int] = None


@dataclass(frozen=True)
class TransportSet:
    bpm: Optional[float] = None
    playing: Optional[bool] = None


@dataclass(frozen=True)
class StepTick:
    """Hub-originated metronome tick; clients never send this."""
    step: int


@dataclass(frozen=True)
class Ping:
    nonce: int


@dataclass(frozen=True)
class Pong:
    nonce: int
    hub_ts_ms: int


@dataclass(frozen=True)
class Error:
    code: str
    detail: str


Payload = Union[Hello, Welcome, Subscribe, Unsubscribe, Touch, Motion, Orientation,
                ControlChange, SeqCellSet, TransportSet, StepTick, Ping, Pong, Error]

KIND_BY_TYPE = {
    Hello: "hello",
    Welcome: "welcome",
    Subscribe: "subscribe",
    Unsubscribe: "unsubscribe",
    Touch: "touch",
    Motion: "motion",
    Orientation: "orientation",
    ControlChange: "control_change",
    SeqCellSet: "seq_cell_set",
    TransportSet: "transport_set",
    StepTick: "step_tick",
    Ping: "ping",
    Pong: "pong",
    Error: "error",
}
TYPE_BY_KIND = {v: k for k, v in KIND_BY_TYPE.items()}

SENSOR_KINDS = frozenset({"motion", "orientation"})
STATE_MUTATING_KINDS = frozenset({"control_change", "seq_cell_set", "transport_set"})


@dataclass(frozen=True)
class Envelope:
    """The versioned frame every message travels in."""

    kind: str
    source: str
    seq: int
    ts_ms: int
    payload: Payload
    version: int = PROTOCOL_VERSION

    def __post_init__(self):
        validate_payload(self.payload)
        validate_unit_id(self.source)
        _require_int("seq", self.seq, minimum=0)
        _require_int("ts_ms", self.ts_ms, minimum=0)
        if self.kind != KIND_BY_TYPE[type(self.payload)]:
            raise ProtocolError(
                "invariant-violation",
                f"kind {self.kind!r} does not match payload {type(self.payload).__name__}",
            )


def make_envelope(source: str, seq: int, ts_ms: int, payload: Payload) -> Envelope:
    return Envelope(kind=KIND_BY_TYPE[type(payload)], source=source, seq=seq,
                    ts_ms=ts_ms, payload=payload)


def validate_payload(p: Payload) -> None:
    """Raise ProtocolError unless p satisfies all type invariants."""
    if type(p) not in KIND_BY_TYPE:
        raise ProtocolError("unknown-kind", f"{type(p).__name__}")
    if isinstance(p, Hello):
        if not p.roles or not all(isinstance(r, Role) for r in p.roles):
            raise ProtocolError("invariant-violation", "hello.roles must be non-empty Roles")
        if p.requested_id is not None:
            validate_unit_id(p.requested_id)
    elif isinstance(p, (Subscribe, Unsubscribe)):
        if not all(isinstance(t, Topic) for t in p.topics):
            raise ProtocolError("invariant-violation", "topics must be Topic values")
    elif isinstance(p, Touch):
        if not isinstance(p.phase, TouchPhase):
            raise ProtocolError("invariant-violation", f"bad touch phase {p.phase!r}")
        _require_unit_range("touch.x", p.x)
        _require_unit_range("touch.y", p.y)
        if not p.surface or not p.control:
            raise ProtocolError("invariant-violation", "touch needs surface and control")
    elif isinstance(p, Motion):
        for f in fields(p):
            _require_finite(f"motion.{f.name}", getattr(p, f.name))
    elif isinstance(p, Orientation):
        a = _require_finite("orientation.alpha", p.alpha)
        b = _require_finite("orientation.beta", p.beta)
        g = _require_finite("orientation.gamma", p.gamma)
        if not (0.0 <= a < 360.0):
            raise ProtocolError("invariant-violation", f"alpha={a} outside [0,360)")
        if not (-180.0 <= b <= 180.0):
            raise ProtocolError("invariant-violation", f"beta={b} outside [-180,180]")
        if not (-90.0 <= g <= 90.0):
            raise ProtocolError("invariant-violation", f"gamma={g} outside [-90,90]")
    elif isinstance(p, ControlChange):
        if not p.control:
            raise ProtocolError("invariant-violation", "control_change needs a control id")
        _require_unit_range("control_change.value", p.value)
    elif isinstance(p, SeqCellSet):
        _require_int("seq_cell_set.instrument", p.instrument, minimum=0)
        _require_int("seq_cell_set.step", p.step, minimum=0)
        if not isinstance(p.on, bool):
            raise ProtocolError("invariant-violation", "seq_cell_set.on must be bool")
        if p.note is not None:
            _require_int("seq_cell_set.note", p.note, minimum=0, maximum=127)
    elif isinstance(p, TransportSet):
        if p.bpm is None and p.playing is None:
            raise ProtocolError("invariant-violation", "transport_set must set bpm or playing")
        if p.bpm is not None:
            v = _require_finite("transport_set.bpm", p.bpm)
            if v <= 0:
                raise ProtocolError("invariant-violation", f"bpm={v} must be positive")
        if p.playing is not None and not isinstance(p.playing, bool):
            raise ProtocolError("invariant-violation", "transport_set.playing must be bool")
    elif isinstance(p, StepTick):
        _require_int("step_tick.step", p.step, minimum=0)
    elif isinstance(p, Ping):
        _require_int("ping.nonce", p.nonce, minimum=0)
    elif isinstance(p, Pong):
        _require_int("pong.nonce", p.nonce, minimum=0)
        _require_int("pong.hub_ts_ms", p.hub_ts_ms, minimum=0)
    elif isinstance(p, Welcome):
        validate_unit_id(p.unit)
        if not p.session or not isinstance(p.snapshot, str):
            raise ProtocolError("invariant-violation", "welcome needs session and snapshot")
    elif isinstance(p, Error):
        if not p.code:
            raise ProtocolError("invariant-violation", "error needs a code")


# --- Codec ------------------------------------------------------------------

def _payload_to_json(p: Payload) -> dict:
    if isinstance(p, Hello):
        d = {"roles": sorted(r.value for r in p.roles), "caps": p.caps.to_dict()}
        if p.wants_surface is not None:
            d["wants_surface"] = p.wants_surface
        if p.requested_id is not None:
            d["requested_id"] = p.requested_id
        return d
    if isinstance(p, Welcome):
        return {"unit": p.unit, "session": p.session, "snapshot": p.snapshot}
    if isinstance(p, (Subscribe, Unsubscribe)):
        return {"topics": [t.path for t in p.topics]}
    if isinstance(p, Touch):
        return {"surface": p.surface, "control": p.control, "phase": p.phase.value,
                "x": p.x, "y": p.y}
    if isinstance(p, (Motion, Orientation, ControlChange, StepTick, Ping, Pong, Error)):
        return {f.name: getattr(p, f.name) for f in fields(p)}
    if isinstance(p, SeqCellSet):
        d = {"instrument": p.instrument, "step": p.step, "on": p.on}
        if p.note is not None:
            d["note"] = p.note
        return d
    if isinstance(p, TransportSet):
        d = {}
        if p.bpm is not None:
            d["bpm"] = p.bpm
        if p.playing is not None:
            d["playing"] = p.playing
        return d
    raise ProtocolError("unknown-kind", type(p).__name__)


def _payload_from_json(kind: str, d) -> Payload:
    if not isinstance(d, dict):
        raise ProtocolError("malformed-frame", "pl must be an object")
    try:
        if kind == "hello":
            roles = d.get("roles")
            if not isinstance(roles, list):
                raise ProtocolError("malformed-frame", "hello.roles must be a list")
            try:
                role_set = frozenset(Role(r) for r in roles)
            except ValueError as exc:
                raise ProtocolError("invariant-violation", f"unknown role: {exc}")
            return Hello(roles=role_set, caps=CapabilityProfile.from_dict(d.get("caps")),
                         wants_surface=d.get("wants_surface"),
                         requested_id=d.get("requested_id"))
        if kind == "welcome":
            return Welcome(unit=d["unit"], session=d["session"], snapshot=d["snapshot"])
        if kind in ("subscribe", "unsubscribe"):
            topics = d.get("topics")
            if not isinstance(topics, list) or not all(isinstance(t, str) for t in topics):
                raise ProtocolError("malformed-frame", "topics must be a list of strings")
            cls = Subscribe if kind == "subscribe" else Unsubscribe
            return cls(topics=tuple(Topic(t) for t in topics))
        if kind == "touch":
            return Touch(surface=d["surface"], control=d["control"],
                         phase=TouchPhase(d["phase"]), x=d["x"], y=d["y"])
        if kind == "motion":
            return Motion(ax=d["ax"], ay=d["ay"], az=d["az"], rot_alpha=d["rot_alpha"],
                          rot_beta=d["rot_beta"], rot_gamma=d["rot_gamma"])
        if kind == "orientation":
            return Orientation(alpha=d["alpha"], beta=d["beta"], gamma=d["gamma"])
        if kind == "control_change":
            return ControlChange(control=d["control"], value=d["value"])
        if kind == "seq_cell_set":
            return SeqCellSet(instrument=d["instrument"], step=d["step"], on=d["on"],
                              note=d.get("note"))
        if kind == "transport_set":
            return TransportSet(bpm=d.get("bpm"), playing=d.get("playing"))
        if kind == "step_tick":
            return StepTick(step=d["step"])
        if kind == "ping":
            return Ping(nonce=d["nonce"])
        if kind == "pong":
            return Pong(nonce=d["nonce"], hub_ts_ms=d["hub_ts_ms"])
        if kind == "error":
            return Error(code=d["code"], detail=d.get("detail", ""))
    except KeyError as exc:
        raise ProtocolError("malformed-frame", f"missing field {exc} in {kind} payload")
    except ValueError as exc:
        raise ProtocolError("invariant-violation", str(exc))
    raise ProtocolError("unknown-kind", kind)


def encode_envelope(e: Envelope) -> str:
    """Encode a valid envelope as a single-line text frame.

    Rejects invariant violations (revalidates, since dataclasses can be built
    with replace() bypassing __post_init__ checks on mutated fields).
    """
    if not isinstance(e, Envelope):
        raise ProtocolError("invariant-violation", "not an Envelope")
    validate_payload(e.payload)
    if e.kind != KIND_BY_TYPE[type(e.payload)]:
        raise ProtocolError("invariant-violation", "kind/payload mismatch")
    obj = {"v": e.version, "kind": e.kind, "src": e.source, "seq": e.seq,
           "ts": e.ts_ms, "pl": _payload_to_json(e.payload)}
    frame = json.dumps(obj, separators=(",", ":"), sort_keys=True, allow_nan=False)
    if len(frame.encode("utf-8")) > MAX_FRAME_BYTES:
        raise ProtocolError("invariant-violation", "frame exceeds 64 KiB")
    return frame


def decode_envelope(frame) -> Envelope:
    """Decode a wire frame. Total over arbitrary input: raises ProtocolError,
    never anything else, for any str/bytes up to the frame size cap."""
    if isinstance(frame, bytes):
        if len(frame) > MAX_FRAME_BYTES:
            raise ProtocolError("malformed-frame", "frame exceeds 64 KiB")
        try:
            frame = frame.decode("utf-8")
        except UnicodeDecodeError:
            raise ProtocolError("malformed-frame", "frame is not valid UTF-8")
    if not isinstance(frame, str):
        raise ProtocolError("malformed-frame", f"frame must be text, got {type(frame).__name__}")
    if len(frame.encode("utf-8", errors="replace")) > MAX_FRAME_BYTES:
        raise ProtocolError("malformed-frame", "frame exceeds 64 KiB")
    try:
        obj = json.loads(frame)
    except (json.JSONDecodeError, RecursionError):
        raise ProtocolError("malformed-frame", "frame is not valid JSON")
    if not isinstance(obj, dict):
        raise ProtocolError("malformed-frame", "frame must be a JSON object")
    expected = {"v", "kind", "src", "seq", "ts", "pl"}
    missing = expected - set(obj)
    if missing:
        raise ProtocolError("malformed-frame", f"missing keys: {sorted(missing)}")
    extra = set(obj) - expected
    if extra:
        raise ProtocolError("malformed-frame", f"unknown keys: {sorted(extra)}")
    version = obj["v"]
    if not isinstance(version, int) or isinstance(version, bool):
        raise ProtocolError("malformed-frame", "v must be an integer")
    if version != PROTOCOL_VERSION:
        raise ProtocolError("unsupported-version", f"got {version}, want {PROTOCOL_VERSION}")
    kind = obj["kind"]
    if not isinstance(kind, str):
        raise ProtocolError("malformed-frame", "kind must be a string")
    if kind not in TYPE_BY_KIND:
        raise ProtocolError("unknown-kind", kind)
    payload = _payload_from_json(kind, obj["pl"])
    try:
        return Envelope(kind=kind, source=obj["src"], seq=obj["seq"], ts_ms=obj["ts"],
                        payload=payload, version=version)
    except ProtocolError:
        raise
    except (TypeError, ValueError) as exc:
        raise ProtocolError("malformed-frame", str(exc))


# --- Stream-order checking --------------------------------------------------

class SequenceTracker:
    """Per-source monotonic seq enforcement for one connection's stream."""

    def __init__(self):
        self._last: dict = {}

    def observe(self, source: str, seq: int) -> None:
        last = self._last.get(source)
        if last is not None and seq <= last:
            raise ProtocolError(
                "invariant-violation",
                f"seq {seq} from {source} not above previous {last}",
            )
        self._last[source] = seq


# --- Capability checking ----------------------------------------------------

def validate_capabilities(caps: CapabilityProfile, required: frozenset) -> list:
    """Return every capability in `required` that `caps` lacks (empty = ok).

    `required` is a surface spec's derived requirement set, e.g.
    frozenset({"touch", "gyroscope"}).
    """
    have = {
        "touch": caps.touch,
        "accelerometer": caps.accelerometer,
        "gyroscope": caps.gyroscope,
        "secure_transport": caps.secure_transport,
    }
    return sorted(cap for cap in required if not have.get(cap, False))


def topic_for(e: Envelope, surface: Optional[str] = None) -> Optional[Topic]:
    """Derive the publish topic for a data-bearing envelope.

    Control plane kinds (hello, ping, ...) have no topic and return None.
    `surface` is the publishing unit's surface name, used for control topics
    where the payload itself does not carry one.
    """
    p = e.payload
    if isinstance(p, Motion):
        return Topic(f"sensor/motion/{e.source}")
    if isinstance(p, Orientation):
        return Topic(f"sensor/orientation/{e.source}")
    if isinstance(p, Touch):
        return Topic(f"touch/{p.surface}/{p.control}")
    if isinstance(p, ControlChange):
        return Topic(f"control/{surface or '_'}/{p.control}")
    if isinstance(p, SeqCellSet):
        return Topic("state/seq")
    if isinstance(p, (TransportSet, StepTick)):
        return Topic("state/transport")
    return None
