import json
import pathlib

import pytest

from zombihub.cli import build_parser, main

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
SURFACE_DIR = (pathlib.Path(__file__).resolve().parent.parent
               / "src" / "zombihub" / "surfaces_data")


class TestParser:
    def test_unknown_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_no_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_certgen_requires_ip(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["certgen"])
        assert exc.value.code == 2


class TestCertgen:
    def test_writes_pair_and_reports_paths(self, tmp_path, capsys):
        out = tmp_path / "certs"
        code = main(["certgen", "--ip", "10.0.0.1", "--days", "30",
                     "--out", str(out), "--json"])
        assert code == 0
        paths = json.loads(capsys.readouterr().out)
        assert pathlib.Path(paths["cert"]).is_file()
        assert pathlib.Path(paths["key"]).is_file()

    def test_bad_ip_fails_cleanly(self, tmp_path, capsys):
        code = main(["certgen", "--ip", "not-an-ip", "--out", str(tmp_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestSpecsValidate:
    def test_bundled_specs_validate(self, capsys):
        files = sorted(str(p) for p in SURFACE_DIR.glob("*.json"))
        assert files
        assert main(["specs", "validate"] + files) == 0
        out = capsys.readouterr().out
        assert out.count(": ok") == len(files)

    def test_broken_spec_flagged(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"name": "x", "controls": [{"id": "a", "kind": "warp"}]}')
        assert main(["specs", "validate", str(bad)]) == 1
        assert "INVALID" in capsys.readouterr().out

    def test_mixed_batch_returns_failure(self, tmp_path):
        good = next(SURFACE_DIR.glob("*.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("[]")
        assert main(["specs", "validate", str(good), str(bad)]) == 1


class TestSimulate:
    def test_passing_scenario_exits_zero(self, capsys):
        code = main(["simulate", "--scenario",
                     str(SCENARIO_DIR / "zombitronica_4units.json"), "--json"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True

    def test_missing_scenario_exits_one(self, capsys):
        code = main(["simulate", "--scenario", "/nonexistent/nope.json"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_human_readable_summary(self, capsys):
        code = main(["simulate", "--scenario",
                     str(SCENARIO_DIR / "batch_14units.json")])
        assert code == 0
        out = capsys.readouterr().out
        assert "ordering violations" in out
        assert "capability failure" in out  # the gyro-less conductor


class TestServe:
    def test_bad_config_exits_one(self, tmp_path, capsys):
        cfg = tmp_path / "hub.json"
        cfg.write_text(json.dumps({"port": 0}))
        assert main(["serve", "--config", str(cfg)]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_config_file_exits_one(self, capsys):
        assert main(["serve", "--config", "/nonexistent/hub.json"]) == 1


class TestBridge:
    def test_unreachable_hub_exits_one(self, tmp_path, capsys):
        cfg = tmp_path / "bridge.json"
        cfg.write_text(json.dumps({
            "hub_url": "ws://127.0.0.1:1/ws",
            "dest_host": "127.0.0.1", "dest_port": 9000, "mappings": [],
        }))
        assert main(["bridge", "--config", str(cfg)]) == 1

    def test_missing_config_exits_one(self, capsys):
        assert main(["bridge", "--config", "/nonexistent/bridge.json"]) == 1
