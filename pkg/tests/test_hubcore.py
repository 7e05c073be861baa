import pytest

from zombihub import protocol as pr
from zombihub import state as st
from zombihub.hubcore import HubCore
from zombihub.server import load_bundled_surfaces

CAPS = pr.CapabilityProfile(True, True, True, True)


class Fake:
    """Records everything the core sends, per connection."""

    def __init__(self, **kwargs):
        self.sent = {}
        self.closed = []
        self.core = HubCore(surfaces=load_bundled_surfaces(),
                            send=self._send, close=self.closed.append, **kwargs)
        self._seqs = {}

    def _send(self, conn, frame):
        self.sent.setdefault(conn, []).append(pr.decode_envelope(frame))

    def join(self, conn, unit, surface=None, caps=CAPS, now=0):
        self.core.on_connect(conn, now)
        hello = pr.make_envelope(unit, self._next_seq(conn), now, pr.Hello(
            roles=frozenset({pr.Role.CLIENT}), caps=caps,
            wants_surface=surface, requested_id=unit))
        self.core.on_frame(conn, pr.encode_envelope(hello), now)
        welcome = [e for e in self.sent.get(conn, []) if e.kind == "welcome"]
        return welcome[-1].payload if welcome else None

    def subscribe(self, conn, unit, topics, now=0):
        env = pr.make_envelope(unit, self._next_seq(conn), now, pr.Subscribe(
            topics=tuple(pr.Topic(t) for t in topics)))
        self.core.on_frame(conn, pr.encode_envelope(env), now)

    def send_payload(self, conn, unit, payload, now=0):
        env = pr.make_envelope(unit, self._next_seq(conn), now, payload)
        return self.core.on_frame(conn, pr.encode_envelope(env), now)

    def _next_seq(self, conn):
        s = self._seqs.get(conn, 0)
        self._seqs[conn] = s + 1
        return s

    def kinds(self, conn):
        return [e.kind for e in self.sent.get(conn, [])]


class TestAdmit:
    def test_first_hello_gets_initial_snapshot(self):
        f = Fake()
        welcome = f.join("c1", "alice")
        assert welcome.unit == "alice"
        assert st.load_snapshot(welcome.snapshot) == f.core.state
        assert f.core.state.revision == 0

    def test_duplicate_requested_id_gets_fresh_id(self):
        f = Fake()
        w1 = f.join("c1", "alice")
        w2 = f.join("c2", "alice")
        assert w1.unit == "alice"
        assert w2.unit != "alice"
        assert sorted(f.core.units()) == sorted([w1.unit, w2.unit])

    def test_session_cap_enforced(self):
        f = Fake(session_cap=32)
        for i in range(32):
            assert f.join(f"c{i}", f"unit{i}") is not None
        assert f.join("c32", "unit32") is None
        errors = [e for e in f.sent["c32"] if e.kind == "error"]
        assert errors[0].payload.code == "session-full"
        assert "c32" in f.closed

    def test_hub_id_reserved(self):
        f = Fake()
        w = f.join("c1", "hub")
        assert w.unit != "hub"

    def test_snapshot_reflects_prior_mutations(self):
        f = Fake()
        f.join("c1", "alice", surface="zombitronica")
        f.send_payload("c1", "alice", pr.SeqCellSet(instrument=1, step=2, on=True))
        f.send_payload("c1", "alice", pr.ControlChange(control="vol0", value=0.5))
        w = f.join("c2", "bob")
        mirror = st.load_snapshot(w.snapshot)
        assert mirror == f.core.state
        assert mirror.revision == 2
        assert mirror.grid[1][2].on
        assert mirror.control_value("zombitronica/vol0") == 0.5

    def test_missing_capability_surfaced_nonfatally(self):
        no_gyro = pr.CapabilityProfile(touch=True, accelerometer=True,
                                       gyroscope=False, secure_transport=True)
        f = Fake()
        w = f.join("c1", "alice", surface="zombee_conductor", caps=no_gyro)
        assert w is not None  # still admitted
        errors = [e.payload for e in f.sent["c1"] if e.kind == "error"]
        assert any(e.code == "missing-capability" and "gyroscope" in e.detail
                   for e in errors)

    def test_unsupported_version_closes_connection(self):
        f = Fake()
        f.core.on_connect("c1", 0)
        frame = '{"v":2,"kind":"ping","src":"u1","seq":0,"ts":0,"pl":{"nonce":1}}'
        f.core.on_frame("c1", frame, 0)
        assert [e.payload.code for e in f.sent["c1"]] == ["unsupported-version"]
        assert "c1" in f.closed


class TestPublish:
    def test_fanout_counts_subscribers_only(self):
        f = Fake()
        f.join("p", "pub")
        for i in range(3):
            f.join(f"s{i}", f"sub{i}")
            f.subscribe(f"s{i}", f"sub{i}", ["sensor/motion/*"])
        report = f.send_payload("p", "pub", pr.Motion(1, 2, 3, 0, 0, 0))
        assert report.delivered_to == 3
        for i in range(3):
            motion = [e for e in f.sent[f"s{i}"] if e.kind == "motion"]
            assert len(motion) == 1 and motion[0].source == "pub"

    def test_no_echo_to_publisher(self):
        f = Fake()
        f.join("p", "pub")
        f.subscribe("p", "pub", ["sensor/motion/*"])
        f.join("s", "sub")
        f.subscribe("s", "sub", ["sensor/motion/*"])
        report = f.send_payload("p", "pub", pr.Motion(0, 0, 0, 0, 0, 0))
        assert report.delivered_to == 1
        assert "motion" not in Fake.kinds(f, "p")

    def test_non_subscriber_gets_nothing(self):
        f = Fake()
        f.join("p", "pub")
        f.join("s", "sub")  # no subscription
        report = f.send_payload("p", "pub", pr.Orientation(10, 0, 0))
        assert report.delivered_to == 0

    def test_control_change_qualified_with_surface(self):
        f = Fake()
        f.join("p", "pub", surface="zombitronica")
        f.join("s", "sub")
        f.subscribe("s", "sub", ["control/zombitronica/*"])
        f.send_payload("p", "pub", pr.ControlChange(control="vol0", value=0.25))
        got = [e for e in f.sent["s"] if e.kind == "control_change"]
        assert got[0].payload.control == "zombitronica/vol0"
        assert f.core.state.control_value("zombitronica/vol0") == 0.25

    def test_state_applied_before_fanout(self):
        f = Fake()
        f.join("p", "pub", surface="zombitronica")
        f.send_payload("p", "pub", pr.TransportSet(bpm=240.0))
        assert f.core.state.transport.bpm == 240.0
        assert f.core.clock.bpm == 240.0

    def test_invalid_mutation_rejected_with_error(self):
        f = Fake()
        f.join("p", "pub", surface="zombitronica")
        f.send_payload("p", "pub", pr.SeqCellSet(instrument=99, step=0, on=True))
        errors = [e.payload.code for e in f.sent["p"] if e.kind == "error"]
        assert "index-out-of-range" in errors
        assert f.core.state.revision == 0

    def test_seq_regression_rejected(self):
        f = Fake()
        f.join("p", "pub")
        env1 = pr.make_envelope("pub", 5, 0, pr.Motion(0, 0, 0, 0, 0, 0))
        env2 = pr.make_envelope("pub", 5, 0, pr.Motion(1, 0, 0, 0, 0, 0))
        f.core.on_frame("p", pr.encode_envelope(env1), 0)
        f.core.on_frame("p", pr.encode_envelope(env2), 0)
        errors = [e.payload.code for e in f.sent["p"] if e.kind == "error"]
        assert "invariant-violation" in errors

    def test_wrong_source_rejected(self):
        f = Fake()
        f.join("p", "pub")
        env = pr.make_envelope("somebody-else", 1, 0, pr.Motion(0, 0, 0, 0, 0, 0))
        f.core.on_frame("p", pr.encode_envelope(env), 0)
        errors = [e.payload.code for e in f.sent["p"] if e.kind == "error"]
        assert "unknown-source" in errors

    def test_sensor_throttle_drops_above_cap(self):
        f = Fake()
        f.join("p", "pub")
        f.join("s", "sub")
        f.subscribe("s", "sub", ["sensor/motion/*"])
        delivered = 0
        for i in range(250):
            r = f.send_payload("p", "pub", pr.Motion(0, 0, 0, 0, 0, 0), now=i)
            if r is not None:
                delivered += r.delivered_to
        assert delivered == 200
        assert f.core.stats["throttled"] == 50

    def test_control_edits_never_throttled(self):
        f = Fake()
        f.join("p", "pub", surface="zombitronica")
        f.join("s", "sub")
        f.subscribe("s", "sub", ["control/zombitronica/*"])
        delivered = 0
        for i in range(300):
            r = f.send_payload("p", "pub",
                               pr.ControlChange(control="vol0", value=0.5), now=i)
            delivered += r.delivered_to
        assert delivered == 300


class TestHeartbeat:
    def test_rtt_estimate_from_injected_delay(self):
        f = Fake()
        f.join("c1", "alice", now=0)
        f.core.heartbeat_tick(5000)
        ping = [e for e in f.sent["c1"] if e.kind == "ping"][0]
        pong = pr.make_envelope("alice", 1, 5008,
                                pr.Pong(nonce=ping.payload.nonce, hub_ts_ms=5000))
        f.core.on_frame("c1", pr.encode_envelope(pong), 5008)
        estimates, _ = f.core.heartbeat_tick(10000)
        assert len(estimates) == 1
        assert estimates[0].rtt_ms == pytest.approx(8.0)

    def test_silent_unit_evicted_past_timeout(self):
        f = Fake(idle_timeout_ms=15000, heartbeat_ms=5000)
        f.join("c1", "alice", now=0)
        _, evicted = f.core.heartbeat_tick(15001)
        assert evicted == ["alice"]
        assert f.core.units() == []
        assert "c1" in f.closed

    def test_evicted_unit_excluded_from_delivery(self):
        f = Fake(idle_timeout_ms=15000, heartbeat_ms=5000)
        f.join("p", "pub", now=16000)
        f.join("s", "sub", now=0)
        f.subscribe("s", "sub", ["sensor/motion/*"], now=0)
        f.core.heartbeat_tick(16000)  # evicts sub
        frames_before = len(f.sent.get("s", []))
        report = f.send_payload("p", "pub", pr.Motion(0, 0, 0, 0, 0, 0), now=16001)
        assert report.delivered_to == 0
        assert len(f.sent.get("s", [])) == frames_before

    def test_active_unit_survives(self):
        f = Fake()
        f.join("c1", "alice", now=0)
        f.send_payload("c1", "alice", pr.Ping(nonce=1), now=12000)
        _, evicted = f.core.heartbeat_tick(15001)
        assert evicted == []


class TestClock:
    def test_step_ticks_published_when_playing(self):
        f = Fake()
        f.join("p", "pub", surface="zombitronica")
        f.join("s", "sub")
        f.subscribe("s", "sub", ["state/*"])
        f.send_payload("p", "pub", pr.TransportSet(bpm=120.0, playing=True))
        f.core.clock = st.TransportClock(bpm=120, steps=8)  # deterministic anchor
        f.core.clock_tick(500.0)
        ticks = [e.payload for e in f.sent["s"] if e.kind == "step_tick"]
        assert ticks and ticks[-1].step == 1
        assert f.core.state.transport.step == 1

    def test_no_ticks_when_stopped(self):
        f = Fake()
        assert f.core.clock_tick(1000.0) is None

    def test_client_cannot_send_step_tick(self):
        f = Fake()
        f.join("c1", "alice")
        f.send_payload("c1", "alice", pr.StepTick(step=3))
        errors = [e.payload.code for e in f.sent["c1"] if e.kind == "error"]
        assert "forbidden-kind" in errors
