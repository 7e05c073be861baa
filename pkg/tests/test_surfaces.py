import json

import pytest

from zombihub import surfaces as sf
from zombihub.server import load_bundled_surfaces


class TestLoadSpec:
    def test_zombitronica_inventory(self):
        spec = load_bundled_surfaces()["zombitronica"]
        seq = spec.sequencer()
        assert seq.instruments == 4 and seq.steps == 8
        kinds = [c.kind for c in spec.controls]
        assert kinds.count("slider") == 4
        assert kinds.count("xy") == 1
        assert kinds.count("pot") == 3
        assert spec.requires == frozenset({"touch"})

    def test_zombee_arrangement(self):
        specs = load_bundled_surfaces()
        player = specs["zombee_player"]
        conductor = specs["zombee_conductor"]
        assert player.sequencer() is not None
        assert "gyroscope" in conductor.requires  # tilt control on the conductor
        assert [c.id for c in conductor.controls if c.kind == "slider"] == \
            ["vol_a", "vol_b", "vol_c", "vol_d"]

    def test_duplicate_control_id_rejected(self):
        doc = json.dumps({"name": "x", "controls": [
            {"id": "a", "kind": "slider"}, {"id": "a", "kind": "pot"}]})
        with pytest.raises(sf.SurfaceError) as err:
            sf.load_spec(doc)
        assert err.value.code == "duplicate-control"

    def test_zero_steps_rejected(self):
        doc = json.dumps({"name": "x", "controls": [
            {"id": "s", "kind": "step_sequencer", "instruments": 1, "steps": 0}]})
        with pytest.raises(sf.SurfaceError) as err:
            sf.load_spec(doc)
        assert err.value.code == "bad-dimension"

    def test_unknown_kind_rejected(self):
        doc = json.dumps({"name": "x", "controls": [{"id": "a", "kind": "theremin"}]})
        with pytest.raises(sf.SurfaceError) as err:
            sf.load_spec(doc)
        assert err.value.code == "unknown-kind"

    def test_empty_controls_rejected(self):
        with pytest.raises(sf.SurfaceError):
            sf.load_spec(json.dumps({"name": "x", "controls": []}))

    def test_requires_is_derived_not_authored(self):
        doc = json.dumps({"name": "x", "requires": ["gyroscope"],  # ignored
                          "controls": [{"id": "a", "kind": "slider"}]})
        assert sf.load_spec(doc).requires == frozenset({"touch"})

    def test_tilt_requires_gyroscope(self):
        doc = json.dumps({"name": "x", "controls": [
            {"id": "t", "kind": "tilt", "axes": ["beta"]}]})
        assert sf.load_spec(doc).requires == frozenset({"gyroscope"})


class TestControlTopics:
    def test_slider_topic(self):
        assert sf.control_topic("zombitronica", "vol0").path == \
            "control/zombitronica/vol0"

    def test_xy_pad_has_two_topics(self):
        spec = load_bundled_surfaces()["zombitronica"]
        paths = [t.path for t in sf.topics_for_surface(spec)]
        assert "control/zombitronica/lead/x" in paths
        assert "control/zombitronica/lead/y" in paths

    def test_no_collisions_across_shipped_specs(self):
        # exhaustive enumeration over every bundled spec
        seen = set()
        for spec in load_bundled_surfaces().values():
            for topic in sf.topics_for_surface(spec):
                assert topic.path not in seen, topic.path
                seen.add(topic.path)
        assert seen
