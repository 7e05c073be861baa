"""Transport-agnostic session and routing core.

The core is a plain synchronous object: transports (the websocket server, or
the virtual-time harness) feed it connection events and decoded frames, and it
emits frames through a send callback. Because every entry point runs on one
logical event loop, publishes and joins are totally ordered and state
mutations are serialized with no locks.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from . import protocol as pr
from . import state as st
from .surfaces import SurfaceSpec

HUB_UNIT_ID = "hub"
DEFAULT_SESSION_CAP = 32
DEFAULT_HEARTBEAT_MS = 5000
DEFAULT_IDLE_TIMEOUT_MS = 15000
SENSOR_RATE_CAP_PER_S = 200  # soft throttle, sensor topics only


@dataclass
class UnitEntry:
    unit: str
    conn_id: object
    caps: pr.CapabilityProfile
    surface: Optional[str]
    subscriptions: List[pr.Topic] = field(default_factory=list)
    last_seen_ms: float = 0.0
    sensor_window: List[float] = field(default_factory=list)
    pending_pings: Dict[int, float] = field(default_factory=dict)
    rtt_ms: Optional[float] = None


@dataclass(frozen=True)
class RttEstimate:
    unit: str
    rtt_ms: float
    sampled_at_ms: float


@dataclass(frozen=True)
class DeliveryReport:
    delivered_to: int


class HubCore:
    """Session registry + router + shared-state owner.

    send(conn_id, frame_text) and close(conn_id) are supplied by the hosting
    transport. on_publish(topic, envelope), when set, observes every routed
    data message (the OSC bridge taps in here).
    """

    def __init__(self, surfaces: Dict[str, SurfaceSpec],
                 primary_surface: Optional[str] = None,
                 session_cap: int = DEFAULT_SESSION_CAP,
                 heartbeat_ms: int = DEFAULT_HEARTBEAT_MS,
                 idle_timeout_ms: int = DEFAULT_IDLE_TIMEOUT_MS,
                 send: Callable[[object, str], None] = lambda c, f: None,
                 close: Callable[[object], None] = lambda c: None,
                 on_publish: Optional[Callable[[pr.Topic, pr.Envelope], None]] = None):
        if idle_timeout_ms <= heartbeat_ms:
            raise ValueError("idle timeout must exceed heartbeat interval")
        self.surfaces = dict(surfaces)
        self.session_cap = session_cap
        self.heartbeat_ms = heartbeat_ms
        self.idle_timeout_ms = idle_timeout_ms
        self.send = send
        self.close = close
        self.on_publish = on_publish
        self.session_token = secrets.token_hex(8)

        primary = None
        if primary_surface is not None:
            primary = self.surfaces[primary_surface]
        else:
            # largest sequencer wins, name as tiebreak, so the choice is stable
            with_seq = [s for s in self.surfaces.values() if s.sequencer() is not None]
            if with_seq:
                primary = max(with_seq, key=lambda s: (
                    s.sequencer().instruments * s.sequencer().steps, s.name))
        seq_spec = primary.sequencer() if primary else None
        instruments = seq_spec.instruments if seq_spec else 4
        steps = seq_spec.steps if seq_spec else 8
        control_ids = []
        for spec in self.surfaces.values():
            control_ids.extend(f"{spec.name}/{cid}" for cid in spec.control_ids())
        self.state = st.initial_state(instruments, steps, control_ids)
        self.clock = st.TransportClock(bpm=self.state.transport.bpm, steps=steps)

        self._by_conn: Dict[object, UnitEntry] = {}
        self._by_unit: Dict[str, UnitEntry] = {}
        self._seq_trackers: Dict[object, pr.SequenceTracker] = {}
        self._next_unit = 0
        self._hub_seq = 0
        self._hub_nonce = 0
        self.stats = {"frames_in": 0, "frames_out": 0, "errors": 0,
                      "throttled": 0, "evicted": 0, "published": 0}

    # --- outbound helpers ---------------------------------------------------

    def _hub_envelope(self, payload: pr.Payload, now_ms: float) -> pr.Envelope:
        env = pr.make_envelope(HUB_UNIT_ID, self._hub_seq, int(now_ms), payload)
        self._hub_seq += 1
        return env

    def _send_frame(self, conn_id, frame: str) -> None:
        self.stats["frames_out"] += 1
        self.send(conn_id, frame)

    def _send_payload(self, conn_id, payload: pr.Payload, now_ms: float) -> None:
        self._send_frame(conn_id, pr.encode_envelope(self._hub_envelope(payload, now_ms)))

    def _send_error(self, conn_id, code: str, detail: str, now_ms: float) -> None:
        self.stats["errors"] += 1
        self._send_payload(conn_id, pr.Error(code=code, detail=detail), now_ms)

    # --- connection lifecycle -----------------------------------------------

    def on_connect(self, conn_id, now_ms: float) -> None:
        self._seq_trackers[conn_id] = pr.SequenceTracker()

    def on_disconnect(self, conn_id, now_ms: float) -> None:
        self._seq_trackers.pop(conn_id, None)
        entry = self._by_conn.pop(conn_id, None)
        if entry is not None:
            self._by_unit.pop(entry.unit, None)

    def units(self) -> List[str]:
        return sorted(self._by_unit)

    def _fresh_unit_id(self) -> str:
        while True:
            uid = f"u{self._next_unit}"
            self._next_unit += 1
            if uid not in self._by_unit and uid != HUB_UNIT_ID:
                return uid

    # --- inbound frames -----------------------------------------------------

    def on_frame(self, conn_id, frame: str, now_ms: float) -> Optional[DeliveryReport]:
        """Process one inbound wire frame; returns a report for routed publishes."""
        self.stats["frames_in"] += 1
        try:
            env = pr.decode_envelope(frame)
        except pr.ProtocolError as exc:
            self._send_error(conn_id, exc.code, exc.detail, now_ms)
            if exc.code == "unsupported-version":
                self.close(conn_id)
            return None

        entry = self._by_conn.get(conn_id)
        if entry is not None:
            entry.last_seen_ms = now_ms

        try:
            self._seq_trackers.setdefault(conn_id, pr.SequenceTracker()).observe(
                env.source, env.seq)
        except pr.ProtocolError as exc:
            self._send_error(conn_id, exc.code, exc.detail, now_ms)
            return None

        p = env.payload
        if isinstance(p, pr.Hello):
            self.admit(env, conn_id, now_ms)
            return None
        if entry is None:
            self._send_error(conn_id, "not-admitted", "hello first", now_ms)
            return None
        if env.source != entry.unit:
            self._send_error(conn_id, "unknown-source",
                             f"{env.source} is not this connection's unit", now_ms)
            return None

        if isinstance(p, pr.Subscribe):
            for t in p.topics:
                if all(t.path != s.path for s in entry.subscriptions):
                    entry.subscriptions.append(t)
            return None
        if isinstance(p, pr.Unsubscribe):
            drop = {t.path for t in p.topics}
            entry.subscriptions = [s for s in entry.subscriptions if s.path not in drop]
            return None
        if isinstance(p, pr.Ping):
            self._send_payload(conn_id, pr.Pong(nonce=p.nonce, hub_ts_ms=int(now_ms)), now_ms)
            return None
        if isinstance(p, pr.Pong):
            sent = entry.pending_pings.pop(p.nonce, None)
            if sent is not None:
                entry.rtt_ms = max(0.0, now_ms - sent)
            return None
        if isinstance(p, (pr.Welcome, pr.Error)):
            return None  # hub-originated kinds; ignore from clients
        if isinstance(p, pr.StepTick):
            self._send_error(conn_id, "forbidden-kind", "step_tick is hub-only", now_ms)
            return None

        if isinstance(p, pr.ControlChange):
            # qualify with the publishing unit's surface so subscribers and the
            # state mirror agree on one id without needing the topic out-of-band
            surface = entry.surface or "_"
            if not p.control.startswith(surface + "/"):
                p = pr.ControlChange(control=f"{surface}/{p.control}", value=p.value)
                env = pr.make_envelope(env.source, env.seq, env.ts_ms, p)
            topic = pr.Topic(f"control/{p.control}")
        else:
            topic = pr.topic_for(env, surface=entry.surface)
        if topic is None:
            return None
        if env.kind in pr.SENSOR_KINDS and self._throttled(entry, now_ms):
            self.stats["throttled"] += 1
            return None
        try:
            return self.route(entry.unit, topic, env, now_ms)
        except (st.StateError, pr.ProtocolError) as exc:
            self._send_error(conn_id, exc.code, exc.detail, now_ms)
            return None

    def _throttled(self, entry: UnitEntry, now_ms: float) -> bool:
        window = [t for t in entry.sensor_window if now_ms - t < 1000.0]
        if len(window) >= SENSOR_RATE_CAP_PER_S:
            entry.sensor_window = window
            return True
        window.append(now_ms)
        entry.sensor_window = window
        return False

    # --- admission ----------------------------------------------------------

    def admit(self, hello_env: pr.Envelope, conn_id, now_ms: float) -> Optional[str]:
        """Register the connection's unit and reply Welcome; returns the unit id."""
        hello = hello_env.payload
        if not isinstance(hello, pr.Hello):
            self._send_error(conn_id, "malformed-frame", "admit needs a hello", now_ms)
            return None
        if len(self._by_unit) >= self.session_cap:
            self._send_error(conn_id, "session-full", f"cap {self.session_cap}", now_ms)
            self.close(conn_id)
            return None
        if conn_id in self._by_conn:
            self._send_error(conn_id, "already-admitted", "", now_ms)
            return None

        requested = hello.requested_id or hello_env.source
        if requested in self._by_unit or requested == HUB_UNIT_ID:
            unit = self._fresh_unit_id()
        else:
            unit = requested

        surface = hello.wants_surface
        if surface is not None and surface not in self.surfaces:
            self._send_error(conn_id, "unknown-surface", surface, now_ms)
            surface = None

        entry = UnitEntry(unit=unit, conn_id=conn_id, caps=hello.caps,
                          surface=surface, last_seen_ms=now_ms)
        self._by_conn[conn_id] = entry
        self._by_unit[unit] = entry
        self._send_payload(conn_id, pr.Welcome(unit=unit, session=self.session_token,
                                               snapshot=st.snapshot(self.state)), now_ms)
        if surface is not None:
            missing = pr.validate_capabilities(hello.caps, self.surfaces[surface].requires)
            if missing:
                # non-fatal: the client grays out what it cannot drive
                self._send_error(conn_id, "missing-capability", ",".join(missing), now_ms)
        return unit

    # --- routing ------------------------------------------------------------

    def route(self, source: str, topic: pr.Topic, env: pr.Envelope,
              now_ms: float) -> DeliveryReport:
        """Apply state mutations, then fan out to every live subscriber except
        the source. Forwarding re-sends the original envelope, so per-source
        seq order is preserved end to end."""
        if source != HUB_UNIT_ID and source not in self._by_unit:
            raise pr.ProtocolError("unknown-source", source)
        if topic.is_pattern:
            raise pr.ProtocolError("invalid-topic", "publish topics must be concrete")

        p = env.payload
        if env.kind in pr.STATE_MUTATING_KINDS:
            self.state = st.apply_mutation(self.state, p)
            if isinstance(p, pr.TransportSet):
                if p.bpm is not None:
                    self.clock = self.clock.with_bpm(self.state.transport.bpm, now_ms)
        elif isinstance(p, pr.StepTick):
            self.state = st.set_step(self.state, p.step)

        frame = pr.encode_envelope(env)
        delivered = 0
        for entry in self._by_unit.values():
            if entry.unit == source:
                continue
            if any(sub.matches(topic) for sub in entry.subscriptions):
                self._send_frame(entry.conn_id, frame)
                delivered += 1
        self.stats["published"] += 1
        if self.on_publish is not None:
            self.on_publish(topic, env)
        return DeliveryReport(delivered_to=delivered)

    def publish(self, source: str, topic: pr.Topic, payload: pr.Payload,
                now_ms: float) -> DeliveryReport:
        """Hub-side publish entry point (used for step ticks and by tests)."""
        env = self._hub_envelope(payload, now_ms) if source == HUB_UNIT_ID else \
            pr.make_envelope(source, 0, int(now_ms), payload)
        return self.route(source, topic, env, now_ms)

    # --- heartbeat / clock --------------------------------------------------

    def heartbeat_tick(self, now_ms: float) -> Tuple[List[RttEstimate], List[str]]:
        """Ping every unit, evict the silent, report current RTT estimates."""
        evicted = []
        for unit, entry in list(self._by_unit.items()):
            if now_ms - entry.last_seen_ms > self.idle_timeout_ms:
                evicted.append(unit)
                self.stats["evicted"] += 1
                self._by_unit.pop(unit, None)
                self._by_conn.pop(entry.conn_id, None)
                self.close(entry.conn_id)
        estimates = []
        for entry in self._by_unit.values():
            nonce = self._hub_nonce
            self._hub_nonce += 1
            entry.pending_pings[nonce] = now_ms
            self._send_payload(entry.conn_id, pr.Ping(nonce=nonce), now_ms)
            if entry.rtt_ms is not None:
                estimates.append(RttEstimate(unit=entry.unit, rtt_ms=entry.rtt_ms,
                                             sampled_at_ms=now_ms))
        return estimates, evicted

    def clock_tick(self, now_ms: float) -> Optional[float]:
        """Advance the transport step if playing; returns the next fire time."""
        if not self.state.transport.playing:
            return None
        step, next_fire = self.clock.step_at(now_ms)
        if step != self.state.transport.step:
            env = self._hub_envelope(pr.StepTick(step=step), now_ms)
            self.route(HUB_UNIT_ID, pr.Topic("state/transport"), env, now_ms)
        return next_fire
