import json
import pathlib

import pytest

from zombihub import harness as hz
from zombihub import protocol as pr
from zombihub import state as st

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def load(name):
    return hz.load_scenario_file(SCENARIO_DIR / name)


class TestLoading:
    def test_all_bundled_scenarios_parse(self):
        paths = sorted(SCENARIO_DIR.glob("*.json"))
        assert len(paths) >= 6
        for p in paths:
            sc = hz.load_scenario_file(p)
            assert sc.name == p.stem

    def test_rejects_garbage(self):
        with pytest.raises(hz.ScenarioError):
            hz.load_scenario("{not json")

    def test_rejects_unknown_mode(self):
        with pytest.raises(hz.ScenarioError):
            hz.load_scenario('{"name": "x", "mode": "telepathy"}')

    def test_rejects_negative_delay(self):
        doc = {"name": "x", "clients": [{"id": "a", "delay_ms": -5}]}
        with pytest.raises(hz.ScenarioError):
            hz.load_scenario(json.dumps(doc))

    def test_caps_merge_partial_override(self):
        doc = {"name": "x", "clients": [{"id": "a", "caps": {"gyroscope": False}}]}
        sc = hz.load_scenario(json.dumps(doc))
        caps = sc.clients[0].caps
        assert not caps.gyroscope and caps.touch and caps.accelerometer


@pytest.fixture(scope="module")
def routing_report():
    return hz.simulate(load("routing_10x100x5.json"))


@pytest.fixture(scope="module")
def convergence_report():
    return hz.simulate(load("convergence_500x3.json"))


class TestVirtualRouting:
    @pytest.fixture
    def report(self, routing_report):
        return routing_report

    def test_exact_fanout_counts(self, report):
        pubs = [f"pub{i}" for i in range(10)]
        subs = [f"sub{i}" for i in range(5)]
        for src in pubs:
            for dst in pubs + subs:
                expected = 0 if dst == src else 100
                assert report.delivery.get(f"{src}->{dst}", 0) == expected, (src, dst)

    def test_no_ordering_violations(self, report):
        assert report.ordering_violations == 0

    def test_no_echo_keys_at_all(self, report):
        assert all(k.split("->")[0] != k.split("->")[1] for k in report.delivery)

    def test_passed(self, report):
        assert report.passed()

    def test_same_seed_reproduces_everything(self, report):
        again = hz.simulate(load("routing_10x100x5.json"))
        assert again.delivery == report.delivery
        assert again.per_unit == report.per_unit
        assert again.final_hub_snapshot == report.final_hub_snapshot

    def test_different_seed_changes_payload_stream_not_counts(self, report):
        sc = load("routing_10x100x5.json")
        sc.seed = sc.seed + 1
        other = hz.simulate(sc)
        assert other.delivery == report.delivery


class TestVirtualConvergence:
    @pytest.fixture
    def report(self, convergence_report):
        return convergence_report

    def test_five_hundred_mutations_accepted(self, report):
        assert len(report.mutation_log) == 500

    def test_all_mirrors_match_hub(self, report):
        assert len(report.mirrors) == 4  # obs0 + three late joiners
        for unit, snap in report.mirrors.items():
            assert snap == report.final_hub_snapshot, unit
        assert report.convergence_ok

    def test_mutation_log_replays_to_same_state(self, report):
        mirror = st.load_snapshot(
            st.snapshot(hz.VirtualRun(load("convergence_500x3.json")).core.state))
        for frame in report.mutation_log:
            env = pr.decode_envelope(frame)
            mirror = st.apply_mutation(mirror, env.payload)
        assert st.snapshot(mirror) == report.final_hub_snapshot


class TestVirtualBehaviour:
    def test_empty_scenario_runs_clean(self):
        report = hz.simulate(hz.load_scenario('{"name": "empty"}'))
        assert report.delivery == {}
        assert report.per_unit == {}
        assert report.passed()

    def test_injected_delay_doubles_into_hub_rtt(self):
        doc = {
            "name": "rtt", "mode": "virtual", "seed": 1, "duration_ms": 12000,
            "clients": [{"id": "fast"}, {"id": "slow", "delay_ms": 25}],
        }
        report = hz.simulate(hz.load_scenario(json.dumps(doc)))
        fast = report.hub_rtt.get("fast", [])
        slow = report.hub_rtt.get("slow", [])
        assert fast and slow
        # delay applies on both legs of the ping/pong exchange
        assert slow[0] - fast[0] == pytest.approx(50.0, abs=1.0)

    def test_capability_failure_lands_in_report(self):
        report = hz.simulate(load("batch_14units.json"))
        assert any("gyroscope" in ",".join(f["missing"])
                   for f in report.capability_failures)
        assert report.passed()

    def test_silent_client_gets_evicted(self):
        doc = {
            "name": "silence", "mode": "virtual", "duration_ms": 30000,
            "clients": [{"id": "ghost", "silence_from_ms": 1.0},
                        {"id": "alive"}],
        }
        report = hz.simulate(hz.load_scenario(json.dumps(doc)))
        assert "ghost" in report.evicted
        assert "alive" not in report.evicted

    def test_fleet_scenarios_pass(self):
        for name in ("zombitronica_4units.json", "zombee_5units.json"):
            report = hz.simulate(load(name))
            assert report.ordering_violations == 0, name
            assert report.passed(), name

    def test_report_json_is_valid(self):
        report = hz.simulate(load("zombee_5units.json"))
        obj = json.loads(report.to_json())
        assert obj["scenario"] == "zombee_5units"
        assert obj["passed"] is True


class TestRealMode:
    def test_tiny_real_run_over_loopback(self):
        doc = {
            "name": "real_smoke", "mode": "real", "duration_ms": 2000,
            "clients": [
                {"id": "a", "surface": "zombitronica", "ping_hz": 5,
                 "subscribe": ["control/*"],
                 "publish": [{"kind": "control_change", "rate_hz": 10,
                              "count": 10, "start_ms": 200, "control": "vol0"}]},
                {"id": "b", "mirror": True,
                 "subscribe": ["control/*", "state/*"]},
            ],
        }
        report = hz.simulate(hz.load_scenario(json.dumps(doc)))
        assert report.delivery.get("a->b", 0) == 10
        assert report.ordering_violations == 0
        stats = report.rtt_stats("a")
        assert stats is not None and stats["median"] < 100.0
        assert report.convergence_ok
