import json
import random

import pytest
from hypothesis import given, settings, strategies as s

from zombihub import protocol as pr

from conftest import random_envelope


CAPS = pr.CapabilityProfile(touch=True, accelerometer=True, gyroscope=False,
                            secure_transport=True)


class TestRoundTrip:
    def test_hello_round_trips(self):
        e = pr.make_envelope("u1", 0, 1000, pr.Hello(
            roles=frozenset({pr.Role.CLIENT}), caps=CAPS))
        assert pr.decode_envelope(pr.encode_envelope(e)) == e

    def test_zero_orientation_round_trips(self):
        e = pr.make_envelope("u1", 0, 0, pr.Orientation(alpha=0, beta=0, gamma=0))
        assert pr.decode_envelope(pr.encode_envelope(e)) == e

    def test_1000_random_envelopes_stable_after_reencode(self):
        rng = random.Random(99)
        for _ in range(1000):
            e = random_envelope(rng)
            first = pr.encode_envelope(e)
            again = pr.encode_envelope(pr.decode_envelope(first))
            assert again == first

    def test_frame_is_single_line_with_fixed_keys(self):
        e = pr.make_envelope("u1", 3, 42, pr.Ping(nonce=7))
        frame = pr.encode_envelope(e)
        assert "\n" not in frame
        assert set(json.loads(frame)) == {"v", "kind", "src", "seq", "ts", "pl"}


class TestDecodeTotality:
    @pytest.mark.parametrize("junk", [
        "", "   ", "{", "[]", "null", "42", '"x"', "\x00\x01\x02",
        '{"v":1}', '{"v":1,"kind":"ping","src":"u1","seq":0,"ts":0}',
        '{"v":1,"kind":"ping","src":"u1","seq":0,"ts":0,"pl":[]}',
        '{"v":1,"kind":"ping","src":"","seq":0,"ts":0,"pl":{"nonce":1}}',
        '{"v":"1","kind":"ping","src":"u1","seq":0,"ts":0,"pl":{"nonce":1}}',
    ])
    def test_malformed_rejected_structurally(self, junk):
        with pytest.raises(pr.ProtocolError):
            pr.decode_envelope(junk)

    def test_empty_string_is_malformed(self):
        with pytest.raises(pr.ProtocolError) as err:
            pr.decode_envelope("")
        assert err.value.code == "malformed-frame"

    def test_version_2_is_unsupported(self):
        frame = '{"v":2,"kind":"ping","src":"u1","seq":0,"ts":0,"pl":{"nonce":1}}'
        with pytest.raises(pr.ProtocolError) as err:
            pr.decode_envelope(frame)
        assert err.value.code == "unsupported-version"

    def test_unknown_kind(self):
        frame = '{"v":1,"kind":"warp","src":"u1","seq":0,"ts":0,"pl":{}}'
        with pytest.raises(pr.ProtocolError) as err:
            pr.decode_envelope(frame)
        assert err.value.code == "unknown-kind"

    def test_control_change_out_of_range(self):
        frame = ('{"v":1,"kind":"control_change","src":"u1","seq":0,"ts":0,'
                 '"pl":{"control":"vol0","value":1.5}}')
        with pytest.raises(pr.ProtocolError) as err:
            pr.decode_envelope(frame)
        assert err.value.code == "invariant-violation"

    def test_oversized_frame_rejected(self):
        with pytest.raises(pr.ProtocolError):
            pr.decode_envelope("x" * (pr.MAX_FRAME_BYTES + 1))

    def test_non_utf8_bytes_rejected(self):
        with pytest.raises(pr.ProtocolError):
            pr.decode_envelope(b"\xff\xfe{}")

    @given(s.binary(max_size=2048))
    @settings(max_examples=300, deadline=None)
    def test_total_over_arbitrary_bytes(self, blob):
        try:
            pr.decode_envelope(blob)
        except pr.ProtocolError:
            pass  # the only allowed failure mode

    @given(s.text(max_size=2048))
    @settings(max_examples=300, deadline=None)
    def test_total_over_arbitrary_text(self, text):
        try:
            pr.decode_envelope(text)
        except pr.ProtocolError:
            pass


class TestInvariants:
    def test_touch_coordinates_clamped_at_encode(self):
        bad = pr.Touch.__new__(pr.Touch)
        object.__setattr__(bad, "surface", "z")
        object.__setattr__(bad, "control", "c")
        object.__setattr__(bad, "phase", pr.TouchPhase.DOWN)
        object.__setattr__(bad, "x", 2.0)
        object.__setattr__(bad, "y", 0.0)
        with pytest.raises(pr.ProtocolError):
            pr.validate_payload(bad)

    @pytest.mark.parametrize("alpha,beta,gamma", [
        (360.0, 0, 0), (-1, 0, 0), (0, 181, 0), (0, 0, 91), (0, float("nan"), 0),
    ])
    def test_orientation_ranges(self, alpha, beta, gamma):
        with pytest.raises(pr.ProtocolError):
            pr.make_envelope("u1", 0, 0,
                             pr.Orientation(alpha=alpha, beta=beta, gamma=gamma))

    def test_unit_id_rules(self):
        with pytest.raises(pr.ProtocolError):
            pr.validate_unit_id("")
        with pytest.raises(pr.ProtocolError):
            pr.validate_unit_id("x" * 65)
        with pytest.raises(pr.ProtocolError):
            pr.validate_unit_id("has space")
        assert pr.validate_unit_id("Ok-1_2.3") == "Ok-1_2.3"

    def test_kind_payload_mismatch_rejected(self):
        with pytest.raises(pr.ProtocolError):
            pr.Envelope(kind="ping", source="u1", seq=0, ts_ms=0,
                        payload=pr.Pong(nonce=1, hub_ts_ms=0))

    def test_note_range(self):
        with pytest.raises(pr.ProtocolError):
            pr.make_envelope("u1", 0, 0, pr.SeqCellSet(instrument=0, step=0,
                                                       on=True, note=128))


class TestSequenceTracker:
    def test_zero_one_one_rejected_at_second_one(self):
        t = pr.SequenceTracker()
        t.observe("u1", 0)
        t.observe("u1", 1)
        with pytest.raises(pr.ProtocolError):
            t.observe("u1", 1)

    def test_sources_tracked_independently(self):
        t = pr.SequenceTracker()
        t.observe("u1", 5)
        t.observe("u2", 0)
        t.observe("u1", 6)
        with pytest.raises(pr.ProtocolError):
            t.observe("u2", 0)

    def test_gaps_allowed(self):
        t = pr.SequenceTracker()
        t.observe("u1", 0)
        t.observe("u1", 10)


class TestTopics:
    def test_empty_segment_rejected(self):
        for bad in ["", "/", "a//b", "a/", "/a"]:
            with pytest.raises(pr.ProtocolError):
                pr.Topic(bad)

    def test_wildcard_only_trailing(self):
        pr.Topic("sensor/motion/*")
        pr.Topic("*")
        with pytest.raises(pr.ProtocolError):
            pr.Topic("sensor/*/u1")

    def test_matching(self):
        sub = pr.Topic("sensor/motion/*")
        assert sub.matches(pr.Topic("sensor/motion/u1"))
        assert not sub.matches(pr.Topic("sensor/orientation/u1"))
        assert pr.Topic("*").matches(pr.Topic("anything/at/all"))
        assert pr.Topic("state/seq").matches(pr.Topic("state/seq"))
        assert not pr.Topic("state/seq").matches(pr.Topic("state/transport"))


class TestCapabilities:
    def test_gyroless_device_vs_tilt_surface(self):
        missing = pr.validate_capabilities(CAPS, frozenset({"touch", "gyroscope"}))
        assert missing == ["gyroscope"]

    def test_all_true_vs_any_requirement(self):
        full = pr.CapabilityProfile(True, True, True, True)
        assert pr.validate_capabilities(full, frozenset({"touch", "gyroscope"})) == []

    def test_touchless_vs_touch_surface(self):
        caps = pr.CapabilityProfile(touch=False, accelerometer=True,
                                    gyroscope=True, secure_transport=True)
        assert pr.validate_capabilities(caps, frozenset({"touch"})) == ["touch"]


class TestTopicDerivation:
    def test_motion_topic_carries_source(self):
        e = pr.make_envelope("u7", 0, 0, pr.Motion(0, 0, 0, 0, 0, 0))
        assert pr.topic_for(e).path == "sensor/motion/u7"

    def test_control_plane_kinds_have_no_topic(self):
        e = pr.make_envelope("u7", 0, 0, pr.Ping(nonce=1))
        assert pr.topic_for(e) is None

    def test_golden_frames_fixture_round_trips(self):
        from pathlib import Path
        fixture = Path(__file__).parent.parent / "docs" / "golden_frames.jsonl"
        lines = [l for l in fixture.read_text().splitlines()
                 if l and not l.startswith("#")]
        assert len(lines) == 20
        for line in lines:
            env = pr.decode_envelope(line)
            assert pr.encode_envelope(env) == line
