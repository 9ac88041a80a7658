"""Command line: config validation, exit codes, artifacts and determinism."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from cli.commands import SUBCOMMANDS, enabled_stages
from cli.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, build_parser, load_config, main, run
from core.errors import ConfigError
from memory.artifact_store import ArtifactStore
from reports.schemas import CheckResult, ExperimentConfig
from reports.summary import EmptyReportError, emit_report, summary_lines

_BASE = {
    "model": {"kind": "jin-xin", "a": 2.0, "h_poly": [0.0, 0.0, 0.5]},
    "shock": {"u_minus": [1.0], "u_plus": [-1.0], "s": 0.0},
    "grid": {"dx": 0.1, "X": 64.0, "fine_dx": 0.1},
}

# ============================================================
# Helpers
# ============================================================


def _make_config(tmp_path: Path, payload: dict | str, name: str = "run.json") -> Path:
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return path


def _index_without_stamp(root: Path) -> dict:
    data = json.loads((root / "index.json").read_text(encoding="utf-8"))
    data.pop("generated_at")
    return data


# ============================================================
# Config loading
# ============================================================


class TestLoadConfig:
    def test_valid(self, tmp_path):
        config = load_config(_make_config(tmp_path, _BASE))
        assert config.model.a == 2.0
        assert config.shock.s == 0.0
        assert config.experiments.evans

    def test_seed_override(self, tmp_path):
        assert load_config(_make_config(tmp_path, _BASE), {"seed": 7}).seed == 7

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.json")

    def test_top_level_must_be_object(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(_make_config(tmp_path, "[1, 2]"))

    def test_unknown_keys_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            load_config(_make_config(tmp_path, {**_BASE, "extra": 1}))

    def test_mismatched_endstates(self):
        with pytest.raises(ValueError):
            ExperimentConfig.model_validate({**_BASE, "shock": {"u_minus": [1.0], "u_plus": [-1.0, 0.0]}})

    def test_scalar_endstates(self):
        config = ExperimentConfig.model_validate({**_BASE, "shock": {"u_minus": 1.0, "u_plus": -1.0}})
        assert config.shock.u_minus == [1.0]


class TestExitCodes:
    def test_missing_required_field(self, tmp_path, capsys):
        payload = {**_BASE, "model": {"kind": "jin-xin", "h_poly": [0.0, 0.0, 0.5]}}
        code = main(["profile", "--config", str(_make_config(tmp_path, payload)), "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        assert "model.a" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        code = main(["profile", "--config", str(_make_config(tmp_path, "{not json")), "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_nonpositive_tol_scale(self, tmp_path):
        code = main(["profile", "--config", str(_make_config(tmp_path, _BASE)), "--tol-scale", "0"])
        assert code == EXIT_CONFIG

    def test_parser_subcommands(self):
        args = build_parser().parse_args(["verify-all", "--config", "x.json"])
        assert args.subcommand == "verify-all"
        assert args.tol_scale == 1.0
        assert args.out is None


# ============================================================
# Runs
# ============================================================


class TestProfileRun:
    def test_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["profile", "--config", str(_make_config(tmp_path, _BASE)), "--out", str(out)])
        assert code == EXIT_OK
        for name in ("shock.json", "profile.csv", "profile_report.json", "classification.json", "summary.csv", "summary.txt", "index.json"):
            assert (out / name).is_file(), name
        assert not (out / "diagnostic.json").exists()
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1] == "2/2 checks passed"
        assert any(line.startswith("PASS profile:") for line in lines)

    def test_profile_csv_columns(self, tmp_path):
        out = tmp_path / "run"
        run("profile", load_config(_make_config(tmp_path, _BASE)), out=out)
        with (out / "profile.csv").open(encoding="utf-8") as f:
            header = next(csv.reader(f))
        assert header == ["x", "u0", "v0"]
        classification = json.loads((out / "classification.json").read_text(encoding="utf-8"))
        assert classification["kind"] == "Lax"
        assert classification["i"] == 2

    def test_index_is_deterministic(self, tmp_path):
        config = load_config(_make_config(tmp_path, _BASE))
        run("profile", config, out=tmp_path / "a")
        run("profile", config, out=tmp_path / "b")
        first, second = _index_without_stamp(tmp_path / "a"), _index_without_stamp(tmp_path / "b")
        assert first == second
        names = [a["name"] for a in first["artifacts"]]
        assert names == sorted(names)
        assert "index.json" not in names

    def test_failed_stage_writes_diagnostic(self, tmp_path):
        payload = {**_BASE, "shock": {"u_minus": [0.5], "u_plus": [0.5], "s": 0.0}}
        out = tmp_path / "run"
        code = run("scattering", load_config(_make_config(tmp_path, payload)), out=out)
        assert code == EXIT_FAILED
        diagnostic = json.loads((out / "diagnostic.json").read_text(encoding="utf-8"))
        assert "profile" in diagnostic["failed"]
        assert diagnostic["skipped"] == ["scattering"]

    def test_disabled_stages(self, tmp_path):
        config = load_config(_make_config(tmp_path, {**_BASE, "experiments": {"evans": False, "greens": False}}))
        assert "evans" not in enabled_stages(config, "verify-all")
        assert enabled_stages(config, "profile") == ["profile"]
        assert set(SUBCOMMANDS) == {"hypotheses", "profile", "scattering", "evans", "greens", "simulate", "verify-all"}


# ============================================================
# Summary
# ============================================================


class TestSummary:
    def test_empty_report_raises(self, tmp_path):
        store = ArtifactStore(tmp_path)
        store.initialize()
        with pytest.raises(EmptyReportError):
            emit_report([], store)

    def test_lines(self):
        checks = [CheckResult(name="a", passed=True, detail="ok"), CheckResult(name="b", passed=False, detail="bad")]
        lines = summary_lines(checks, {"evans": "EvansError: boom"})
        assert lines == ["PASS a: ok", "FAIL b: bad", "FAIL stage evans: EvansError: boom", "1/2 checks passed"]

    def test_summary_csv(self, tmp_path):
        store = ArtifactStore(tmp_path)
        store.initialize()
        ok = emit_report(
            [CheckResult(name="a", passed=True)],
            store,
            metrics=[{"section": "profile", "key": "nu_minus", "value": 0.25}],
            generated_at="2020-01-01T00:00:00+00:00",
        )
        assert ok
        with (tmp_path / "summary.csv").open(encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows == [["section", "key", "value"], ["check", "a", "PASS"], ["profile", "nu_minus", "0.25"]]
        index = json.loads((tmp_path / "index.json").read_text(encoding="utf-8"))
        assert index["generated_at"] == "2020-01-01T00:00:00+00:00"
