"""Headless scripted clients: the apparatus that exercises the hub without any
physical device.

Two modes share one scenario format:

* virtual  — no sockets; a deterministic event heap drives the HubCore with a
  simulated clock, so a fixed seed reproduces delivery matrices bit for bit.
* real     — websocket clients over loopback against an in-process HubServer,
  for wall-clock latency measurements.
"""

from __future__ import annotations

import asyncio
import heapq
import json
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import protocol as pr
from . import state as st
from .hubcore import HubCore
from .server import HubConfig, HubServer, load_bundled_surfaces
from .surfaces import SurfaceSpec

DATA_KINDS = frozenset({"touch", "motion", "orientation", "control_change",
                        "seq_cell_set", "transport_set", "step_tick"})
MUTATION_KINDS = frozenset({"control_change", "seq_cell_set", "transport_set",
                            "step_tick"})

DEFAULT_CAPS = pr.CapabilityProfile(touch=True, accelerometer=True, gyroscope=True,
                                    secure_transport=True)


class ScenarioError(Exception):
    pass


@dataclass
class PublishSpec:
    kind: str
    rate_hz: float
    count: int
    start_ms: float = 0.0
    control: str = "vol0"
    surface: str = "zombitronica"

    def __post_init__(self):
        if self.rate_hz < 0 or self.count < 0:
            raise ScenarioError(f"negative rate/count in publish spec ({self.kind})")


@dataclass
class MutateSpec:
    count: int
    start_ms: float = 0.0
    interval_ms: float = 10.0


@dataclass
class ScriptedClient:
    id: str
    caps: pr.CapabilityProfile = DEFAULT_CAPS
    surface: Optional[str] = None
    subscribe: List[str] = field(default_factory=list)
    publish: List[PublishSpec] = field(default_factory=list)
    mutate: Optional[MutateSpec] = None
    join_at_ms: float = 0.0
    disconnect_at_ms: Optional[float] = None
    delay_ms: float = 0.0
    skew_ms: float = 0.0
    mirror: bool = False
    ping_hz: float = 0.0
    silence_from_ms: Optional[float] = None

    def __post_init__(self):
        if self.delay_ms < 0 or self.ping_hz < 0:
            raise ScenarioError(f"negative delay/rate on client {self.id}")


@dataclass
class Scenario:
    name: str
    seed: int = 0
    mode: str = "virtual"
    duration_ms: float = 10000.0
    clients: List[ScriptedClient] = field(default_factory=list)
    heartbeat_ms: int = 5000
    idle_timeout_ms: int = 15000


def load_scenario(document: str) -> Scenario:
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}")
    if not isinstance(obj, dict) or "name" not in obj:
        raise ScenarioError("scenario needs a name")
    if obj.get("mode", "virtual") not in ("virtual", "real"):
        raise ScenarioError(f"unknown mode {obj.get('mode')!r}")
    clients = []
    for c in obj.get("clients", []):
        caps = DEFAULT_CAPS
        if "caps" in c:
            merged = dict(DEFAULT_CAPS.to_dict())
            merged.update(c["caps"])
            caps = pr.CapabilityProfile.from_dict(merged)
        publish = [PublishSpec(**p) for p in c.get("publish", [])]
        mutate = MutateSpec(**c["mutate"]) if "mutate" in c else None
        clients.append(ScriptedClient(
            id=c["id"], caps=caps, surface=c.get("surface"),
            subscribe=list(c.get("subscribe", [])), publish=publish, mutate=mutate,
            join_at_ms=c.get("join_at_ms", 0.0),
            disconnect_at_ms=c.get("disconnect_at_ms"),
            delay_ms=c.get("delay_ms", 0.0), skew_ms=c.get("skew_ms", 0.0),
            mirror=c.get("mirror", False), ping_hz=c.get("ping_hz", 0.0),
            silence_from_ms=c.get("silence_from_ms"),
        ))
    return Scenario(name=obj["name"], seed=obj.get("seed", 0),
                    mode=obj.get("mode", "virtual"),
                    duration_ms=obj.get("duration_ms", 10000.0), clients=clients,
                    heartbeat_ms=obj.get("heartbeat_ms", 5000),
                    idle_timeout_ms=obj.get("idle_timeout_ms", 15000))


def load_scenario_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(fh.read())


# --- Report -----------------------------------------------------------------

@dataclass
class RunReport:
    scenario: str = ""
    mode: str = "virtual"
    per_unit: Dict[str, dict] = field(default_factory=dict)
    delivery: Dict[str, int] = field(default_factory=dict)  # "src->dst": count
    ordering_violations: int = 0
    capability_failures: List[dict] = field(default_factory=list)
    evicted: List[str] = field(default_factory=list)
    mutation_log: List[str] = field(default_factory=list)  # frames, hub order
    final_hub_snapshot: str = ""
    mirrors: Dict[str, str] = field(default_factory=dict)
    convergence_ok: bool = True
    hub_rtt: Dict[str, List[float]] = field(default_factory=dict)

    def passed(self) -> bool:
        return self.ordering_violations == 0 and self.convergence_ok

    def rtt_stats(self, unit: Optional[str] = None) -> Optional[dict]:
        if unit is not None:
            samples = self.per_unit.get(unit, {}).get("rtt_samples", [])
        else:
            samples = [s for u in self.per_unit.values()
                       for s in u.get("rtt_samples", [])]
        if not samples:
            return None
        ordered = sorted(samples)
        return {
            "count": len(ordered),
            "min": ordered[0],
            "median": statistics.median(ordered),
            "p95": ordered[min(len(ordered) - 1, int(0.95 * len(ordered)))],
        }

    def to_json(self) -> str:
        return json.dumps({
            "scenario": self.scenario, "mode": self.mode,
            "per_unit": self.per_unit, "delivery": self.delivery,
            "ordering_violations": self.ordering_violations,
            "capability_failures": self.capability_failures,
            "evicted": self.evicted,
            "convergence_ok": self.convergence_ok,
            "rtt": self.rtt_stats(),
            "passed": self.passed(),
        }, indent=2, sort_keys=True)


# --- Shared client bookkeeping ---------------------------------------------

class ClientState:
    """Counters and mirror for one scripted client, shared by both modes."""

    def __init__(self, script: ScriptedClient, report: RunReport):
        self.script = script
        self.report = report
        self.unit = script.id  # provisional until Welcome
        self.seq = 0
        self.sent = 0
        self.received = 0
        self.last_seq_by_src: Dict[str, int] = {}
        self.mirror: Optional[st.SharedState] = None
        self.rtt_samples: List[float] = []
        self.pending_pings: Dict[int, float] = {}
        self.next_nonce = 0

    def next_seq(self) -> int:
        s = self.seq
        self.seq += 1
        return s

    def observe(self, env: pr.Envelope, now_ms: float) -> None:
        self.received += 1
        p = env.payload
        if isinstance(p, pr.Welcome):
            self.unit = p.unit
            if self.script.mirror:
                self.mirror = st.load_snapshot(p.snapshot)
            return
        if isinstance(p, pr.Error):
            if p.code == "missing-capability":
                self.report.capability_failures.append(
                    {"unit": self.unit, "missing": p.detail.split(",")})
            return
        if isinstance(p, pr.Pong):
            sent = self.pending_pings.pop(p.nonce, None)
            if sent is not None:
                self.rtt_samples.append(max(0.0, now_ms - sent))
            return
        if env.kind in DATA_KINDS:
            last = self.last_seq_by_src.get(env.source)
            if last is not None and env.seq <= last:
                self.report.ordering_violations += 1
            self.last_seq_by_src[env.source] = env.seq
            key = f"{env.source}->{self.unit}"
            self.report.delivery[key] = self.report.delivery.get(key, 0) + 1
            if self.mirror is not None and env.kind in MUTATION_KINDS:
                if isinstance(p, pr.StepTick):
                    self.mirror = st.set_step(self.mirror, p.step)
                else:
                    self.mirror = st.apply_mutation(self.mirror, p)

    def finalize(self) -> None:
        self.report.per_unit[self.unit] = {
            "sent": self.sent, "received": self.received,
            "rtt_samples": self.rtt_samples,
        }
        if self.mirror is not None:
            self.report.mirrors[self.unit] = st.snapshot(self.mirror)


def _expand_publishes(script: ScriptedClient, rng: random.Random,
                      surfaces: Dict[str, SurfaceSpec]) -> List[Tuple[float, pr.Payload]]:
    """Precompute (fire_time, payload) pairs; deterministic given the rng."""
    events: List[Tuple[float, pr.Payload]] = []
    for ps in script.publish:
        if ps.rate_hz <= 0 or ps.count <= 0:
            continue
        period = 1000.0 / ps.rate_hz
        for i in range(ps.count):
            t = ps.start_ms + i * period
            if ps.kind == "motion":
                p = pr.Motion(ax=rng.uniform(-10, 10), ay=rng.uniform(-10, 10),
                              az=rng.uniform(-10, 10), rot_alpha=rng.uniform(-180, 180),
                              rot_beta=rng.uniform(-180, 180),
                              rot_gamma=rng.uniform(-180, 180))
            elif ps.kind == "orientation":
                p = pr.Orientation(alpha=rng.uniform(0, 359.9),
                                   beta=rng.uniform(-180, 180),
                                   gamma=rng.uniform(-90, 90))
            elif ps.kind == "control_change":
                p = pr.ControlChange(control=ps.control, value=rng.random())
            elif ps.kind == "touch":
                p = pr.Touch(surface=ps.surface, control=ps.control,
                             phase=pr.TouchPhase.MOVE, x=rng.random(), y=rng.random())
            else:
                raise ScenarioError(f"unknown publish kind {ps.kind!r}")
            events.append((t, p))
    if script.mutate is not None:
        spec = surfaces.get(script.surface or "zombitronica")
        seq_ctrl = spec.sequencer() if spec else None
        instruments = seq_ctrl.instruments if seq_ctrl else 4
        steps = seq_ctrl.steps if seq_ctrl else 8
        controls = [c for c in (spec.control_ids() if spec else ["vol0"])]
        for i in range(script.mutate.count):
            t = script.mutate.start_ms + i * script.mutate.interval_ms
            roll = rng.random()
            if roll < 0.45:
                p = pr.SeqCellSet(instrument=rng.randrange(instruments),
                                  step=rng.randrange(steps), on=rng.random() < 0.5,
                                  note=rng.randrange(128) if rng.random() < 0.5 else None)
            elif roll < 0.9:
                p = pr.ControlChange(control=rng.choice(controls), value=rng.random())
            else:
                p = pr.TransportSet(bpm=rng.uniform(20, 300),
                                    playing=None if rng.random() < 0.5 else False)
            events.append((t, p))
    events.sort(key=lambda e: e[0])
    return events


# --- Virtual-time mode ------------------------------------------------------

class VirtualRun:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.surfaces = load_bundled_surfaces()
        self.report = RunReport(scenario=scenario.name, mode="virtual")
        self._heap: List[Tuple[float, int, object]] = []
        self._order = 0
        self.now = 0.0
        self.core = HubCore(surfaces=self.surfaces,
                            heartbeat_ms=scenario.heartbeat_ms,
                            idle_timeout_ms=scenario.idle_timeout_ms,
                            send=self._hub_send, close=lambda conn: None,
                            on_publish=self._on_publish)
        self.clients: Dict[str, ClientState] = {}
        self._conn_of: Dict[str, str] = {}

    def _at(self, t: float, fn) -> None:
        heapq.heappush(self._heap, (t, self._order, fn))
        self._order += 1

    def _on_publish(self, topic: pr.Topic, env: pr.Envelope) -> None:
        if env.kind in MUTATION_KINDS:
            self.report.mutation_log.append(pr.encode_envelope(env))

    def _hub_send(self, conn_id, frame: str) -> None:
        cs = self.clients.get(conn_id)
        if cs is None:
            return
        delay = cs.script.delay_ms
        t = self.now + delay
        self._at(t, lambda: self._client_receive(cs, frame, t))

    def _client_receive(self, cs: ClientState, frame: str, now: float) -> None:
        if cs.script.silence_from_ms is not None and now >= cs.script.silence_from_ms:
            return
        env = pr.decode_envelope(frame)
        cs.observe(env, now)
        if isinstance(env.payload, pr.Ping):
            pong = pr.Pong(nonce=env.payload.nonce, hub_ts_ms=env.ts_ms)
            self._client_send(cs, pong, now)

    def _client_send(self, cs: ClientState, payload: pr.Payload, now: float) -> None:
        if cs.script.silence_from_ms is not None and now >= cs.script.silence_from_ms:
            return
        ts = int(now + cs.script.skew_ms)
        env = pr.make_envelope(cs.unit, cs.next_seq(), max(0, ts), payload)
        frame = pr.encode_envelope(env)
        cs.sent += 1
        arrive = now + cs.script.delay_ms
        self._at(arrive, lambda: self.core.on_frame(cs.script.id, frame, arrive))

    def run(self) -> RunReport:
        rng = random.Random(self.scenario.seed)
        for script in sorted(self.scenario.clients, key=lambda s: s.id):
            cs = ClientState(script, self.report)
            self.clients[script.id] = cs
            sub_rng = random.Random(rng.random())
            events = _expand_publishes(script, sub_rng, self.surfaces)

            def make_join(cs=cs, script=script, events=events):
                def join():
                    self.core.on_connect(script.id, self.now)
                    hello = pr.Hello(roles=frozenset({pr.Role.CLIENT}), caps=script.caps,
                                     wants_surface=script.surface,
                                     requested_id=script.id)
                    self._client_send(cs, hello, self.now)
                    # subscribe in the same breath: any mutation sneaking in
                    # between the welcome snapshot and the subscription would
                    # otherwise be lost to this client forever
                    if script.subscribe:
                        topics = tuple(pr.Topic(t) for t in script.subscribe)
                        self._client_send(cs, pr.Subscribe(topics=topics), self.now)
                return join
            self._at(script.join_at_ms, make_join())
            for t, payload in events:
                fire = max(t, script.join_at_ms + 1.0)
                self._at(fire, lambda cs=cs, p=payload, f=fire:
                         self._client_send(cs, p, f))
            if script.disconnect_at_ms is not None:
                self._at(script.disconnect_at_ms,
                         lambda s=script: self.core.on_disconnect(s.id, self.now))

        # hub heartbeat cadence
        t = float(self.scenario.heartbeat_ms)
        while t <= self.scenario.duration_ms:
            self._at(t, lambda t=t: self._heartbeat(t))
            t += self.scenario.heartbeat_ms

        horizon = self.scenario.duration_ms
        while self._heap:
            t, _, fn = heapq.heappop(self._heap)
            if t > horizon + 10 * max([c.delay_ms for c in
                                       (s for s in self.scenario.clients)] or [0.0]) + 1000:
                break
            self.now = max(self.now, t)
            fn()

        for cs in self.clients.values():
            cs.finalize()
        self.report.final_hub_snapshot = st.snapshot(self.core.state)
        self.report.convergence_ok = all(m == self.report.final_hub_snapshot
                                         for m in self.report.mirrors.values())
        return self.report

    def _heartbeat(self, now: float) -> None:
        estimates, evicted = self.core.heartbeat_tick(now)
        for e in estimates:
            self.report.hub_rtt.setdefault(e.unit, []).append(e.rtt_ms)
        self.report.evicted.extend(evicted)


# --- Real-socket mode -------------------------------------------------------

class _RealClient:
    def __init__(self, script: ScriptedClient, report: RunReport,
                 surfaces: Dict[str, SurfaceSpec]):
        self.script = script
        self.cs = ClientState(script, report)
        self.surfaces = surfaces
        self._welcome = asyncio.Event()
        self._send_lock = asyncio.Lock()

    async def run(self, url: str, duration_ms: float, ssl_context=None) -> None:
        from websockets.asyncio.client import connect

        s = self.script
        if s.join_at_ms:
            await asyncio.sleep(s.join_at_ms / 1000.0)
        async with connect(url, ssl=ssl_context, max_size=64 * 1024,
                           ping_interval=None) as ws:
            reader = asyncio.create_task(self._reader(ws))
            await self._send(ws, pr.Hello(roles=frozenset({pr.Role.CLIENT}),
                                          caps=s.caps, wants_surface=s.surface,
                                          requested_id=s.id))
            # subscribe before the welcome comes back, so no third-party
            # mutation can slip between the snapshot and the subscription
            if s.subscribe:
                await self._send(ws, pr.Subscribe(
                    topics=tuple(pr.Topic(t) for t in s.subscribe)))
            await asyncio.wait_for(self._welcome.wait(), timeout=10)

            rng = random.Random(hash(s.id) & 0xFFFFFFFF)
            events = _expand_publishes(s, rng, self.surfaces)
            tasks = [asyncio.create_task(self._publisher(ws, events))]
            if s.ping_hz > 0:
                tasks.append(asyncio.create_task(self._pinger(ws, s.ping_hz)))
            end = (duration_ms - s.join_at_ms) / 1000.0
            stop_at = time.monotonic() + max(0.0, end)
            await asyncio.sleep(max(0.0, stop_at - time.monotonic()))
            for t in tasks:
                t.cancel()
            # drain in-flight traffic before closing
            await asyncio.sleep(0.5)
            reader.cancel()

    async def _send(self, ws, payload: pr.Payload) -> None:
        # lock keeps seq assignment and the socket write atomic, so per-source
        # order survives concurrent publisher/pinger tasks
        async with self._send_lock:
            if self.script.delay_ms:
                await asyncio.sleep(self.script.delay_ms / 1000.0)
            env = pr.make_envelope(self.cs.unit, self.cs.next_seq(),
                                   int(time.time() * 1000 + self.script.skew_ms), payload)
            await ws.send(pr.encode_envelope(env))
            self.cs.sent += 1

    async def _reader(self, ws) -> None:
        async for frame in ws:
            if self.script.delay_ms:
                await asyncio.sleep(self.script.delay_ms / 1000.0)
            now = time.monotonic() * 1000.0
            env = pr.decode_envelope(frame)
            self.cs.observe(env, now)
            if isinstance(env.payload, pr.Welcome):
                self._welcome.set()
            elif isinstance(env.payload, pr.Ping):
                await self._send(ws, pr.Pong(nonce=env.payload.nonce,
                                             hub_ts_ms=env.ts_ms))

    async def _publisher(self, ws, events) -> None:
        start = time.monotonic() * 1000.0
        for t, payload in events:
            delta = (start + t) - time.monotonic() * 1000.0
            if delta > 0:
                await asyncio.sleep(delta / 1000.0)
            await self._send(ws, payload)

    async def _pinger(self, ws, hz: float) -> None:
        while True:
            nonce = self.cs.next_nonce
            self.cs.next_nonce += 1
            self.cs.pending_pings[nonce] = time.monotonic() * 1000.0
            await self._send(ws, pr.Ping(nonce=nonce))
            await asyncio.sleep(1.0 / hz)


async def run_real(scenario: Scenario, url: Optional[str] = None) -> RunReport:
    report = RunReport(scenario=scenario.name, mode="real")
    surfaces = load_bundled_surfaces()
    server = None
    if url is None:
        import socket as _socket
        probe = _socket.socket()
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
        probe.close()
        mutation_log = report.mutation_log

        def tap(topic, env):
            if env.kind in MUTATION_KINDS:
                mutation_log.append(pr.encode_envelope(env))

        server = HubServer(HubConfig(host="127.0.0.1", port=port,
                                     heartbeat_ms=scenario.heartbeat_ms,
                                     idle_timeout_ms=scenario.idle_timeout_ms),
                           on_publish=tap)
        await server.start()
        url = f"ws://127.0.0.1:{port}/ws"

    clients = [_RealClient(s, report, surfaces) for s in scenario.clients]
    try:
        await asyncio.gather(*(c.run(url, scenario.duration_ms) for c in clients))
    finally:
        for c in clients:
            c.cs.finalize()
        if server is not None:
            report.final_hub_snapshot = st.snapshot(server.core.state)
            await server.stop()
    report.convergence_ok = all(m == report.final_hub_snapshot
                                for m in report.mirrors.values()) if report.final_hub_snapshot else True
    return report


def simulate(scenario: Scenario, url: Optional[str] = None) -> RunReport:
    """Run a scenario to completion and return its report."""
    if scenario.mode == "virtual":
        return VirtualRun(scenario).run()
    return asyncio.run(run_real(scenario, url=url))
