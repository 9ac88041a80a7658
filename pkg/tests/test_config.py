"""Settings, artifact store, stage graph and the thread pool."""

from __future__ import annotations

import hashlib
import json

import numpy as np
import pytest

from config.settings import Settings
from core.pipeline import Pipeline, Stage
from memory.artifact_store import INDEX_NAME, ArtifactStore
from worker.pool import chunked, ordered_map

# ============================================================
# Settings
# ============================================================


class TestSettings:
    def test_defaults(self):
        s = Settings()
        assert s.profile_dx == pytest.approx(0.1)
        assert s.contour_eta1 == pytest.approx(0.05)
        assert s.contour_r0 == pytest.approx(0.05)
        assert s.contour_radius is None
        assert s.bromwich_abscissa == pytest.approx(0.5)
        assert s.interior_dissipativity == "report"

    def test_env_overrides_threads(self, monkeypatch):
        monkeypatch.setenv("RELAX_EVANS_THREADS", "4")
        assert Settings().relax_evans_threads == 4

    def test_log_level_normalized(self, monkeypatch):
        monkeypatch.setenv("LOG_LEVEL", "'debug'")
        assert Settings().log_level == "DEBUG"

    def test_threads_must_be_positive(self, monkeypatch):
        monkeypatch.setenv("RELAX_EVANS_THREADS", "0")
        with pytest.raises(ValueError):
            Settings()


# ============================================================
# Artifact store
# ============================================================


class TestArtifactStore:
    def test_requires_initialize(self, tmp_path):
        with pytest.raises(RuntimeError):
            ArtifactStore(tmp_path).store_text("a.txt", "x")

    def test_checksums(self, tmp_path):
        store = ArtifactStore(tmp_path / "out")
        store.initialize()
        store.store_text("note.txt", "hello\n")
        entry = store.get_artifact("note.txt")
        assert entry["bytes"] == 6
        assert entry["sha256"] == hashlib.sha256(b"hello\n").hexdigest()
        assert store.get_artifact("missing") is None

    def test_csv_formatting(self, tmp_path):
        store = ArtifactStore(tmp_path)
        store.initialize()
        store.store_csv("rows.csv", [{"a": 0.1, "b": True}, {"a": float("nan")}], ["a", "b"])
        assert (tmp_path / "rows.csv").read_text(encoding="utf-8") == "a,b\n0.1,true\nnan,\n"

    def test_json_is_sorted_and_plain(self, tmp_path):
        store = ArtifactStore(tmp_path)
        store.initialize()
        store.store_json("data.json", {"b": np.array([1.0, 2.0]), "a": 1 + 2j})
        data = json.loads((tmp_path / "data.json").read_text(encoding="utf-8"))
        assert list(data) == ["a", "b"]
        assert data == {"a": [1.0, 2.0], "b": [1.0, 2.0]}

    def test_index_sorted(self, tmp_path):
        store = ArtifactStore(tmp_path)
        store.initialize()
        for name in ("z.txt", "a.txt", "m.txt"):
            store.store_text(name, name)
        store.write_index("stamp")
        index = json.loads((tmp_path / INDEX_NAME).read_text(encoding="utf-8"))
        assert [a["name"] for a in index["artifacts"]] == ["a.txt", "m.txt", "z.txt"]
        assert index["generated_at"] == "stamp"


# ============================================================
# Stage graph
# ============================================================


_STAGE_KEYS = {"setup": "model", "profile": "profile", "scattering": "scattering", "evans": "verdict"}


def _make_pipeline(fail: str | None = None) -> Pipeline:
    def stage(name: str):
        def fn(state):
            if name == fail:
                raise RuntimeError(f"{name} broke")
            return {_STAGE_KEYS[name]: f"{name} output"}

        return fn

    return Pipeline(
        [
            Stage("setup", stage("setup")),
            Stage("profile", stage("profile"), ("setup",)),
            Stage("scattering", stage("scattering"), ("profile",)),
            Stage("evans", stage("evans"), ("profile",)),
        ]
    )


class TestPipeline:
    def test_closure_adds_prerequisites(self):
        assert _make_pipeline().closure(["scattering"]) == ["setup", "profile", "scattering"]

    def test_unknown_stage(self):
        with pytest.raises(KeyError):
            _make_pipeline().closure(["greens"])

    def test_graph_has_a_node_per_stage(self):
        graph = _make_pipeline().build_graph(["setup", "profile", "evans"])
        assert {"setup", "profile", "evans"} <= set(graph.nodes)

    def test_runs_everything(self):
        result = _make_pipeline().run({"config": {"seed": 0}})
        assert result.ok
        assert result.completed == ["setup", "profile", "scattering", "evans"]
        assert result.state["verdict"] == "evans output"
        assert result.state["config"] == {"seed": 0}

    def test_selection_runs_only_the_closure(self):
        result = _make_pipeline().run({}, ["evans"])
        assert result.completed == ["setup", "profile", "evans"]
        assert "scattering" not in result.state

    def test_failure_skips_dependents(self):
        result = _make_pipeline(fail="profile").run({})
        assert not result.ok
        assert result.failed == {"profile": "RuntimeError: profile broke"}
        assert result.skipped == ["scattering", "evans"]
        assert result.completed == ["setup"]
        assert "verdict" not in result.state

    def test_sibling_runs_after_a_failed_branch(self):
        result = _make_pipeline(fail="scattering").run({})
        assert result.failed == {"scattering": "RuntimeError: scattering broke"}
        assert result.completed == ["setup", "profile", "evans"]
        assert result.skipped == []



# ============================================================
# Thread pool
# ============================================================


class TestPool:
    def test_chunked(self):
        parts = chunked(np.arange(5), 3)
        assert [p.tolist() for p in parts] == [[0, 1], [2, 3], [4]]
        assert len(chunked(np.arange(2), 8)) == 2

    @pytest.mark.parametrize("threads", [1, 2, 4])
    def test_ordered_map_keeps_order(self, threads):
        values = np.arange(20)
        assert ordered_map(lambda chunk: [int(v) * 2 for v in chunk], values, threads) == list(range(0, 40, 2))
