"""Artifact store: CSV/JSON outputs of a run plus an index with checksums.

Formatting is deterministic (repr floats, sorted keys); the only
run-dependent value is the generated_at field of index.json.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path

logger = logging.getLogger(__name__)

INDEX_NAME = "index.json"


def _format(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(float(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _jsonable(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    return value


class ArtifactStore:
    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self._artifacts: dict[str, dict] = {}
        self._initialized = False

    def initialize(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self._initialized = True
        logger.info("Artifact store at %s", self.root)

    def _require(self) -> None:
        if not self._initialized:
            raise RuntimeError("ArtifactStore not initialized. Call initialize() first.")

    def _write(self, name: str, text: str, kind: str) -> Path:
        self._require()
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self._artifacts[name] = {
            "name": name,
            "kind": kind,
            "bytes": len(data),
            "sha256": hashlib.sha256(data).hexdigest(),
        }
        logger.debug("Stored %s (%d bytes)", name, len(data))
        return path

    def store_csv(self, name: str, rows: list[dict], columns: list[str] | None = None) -> Path:
        columns = columns or (list(rows[0].keys()) if rows else [])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row.get(c, "")) for c in columns])
        return self._write(name, buf.getvalue(), "csv")

    def store_json(self, name: str, payload) -> Path:
        text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
        return self._write(name, text, "json")

    def store_text(self, name: str, text: str) -> Path:
        return self._write(name, text, "text")

    def get_artifact(self, name: str) -> dict | None:
        return self._artifacts.get(name)

    def list_artifacts(self) -> list[dict]:
        return [self._artifacts[name] for name in sorted(self._artifacts)]

    def write_index(self, generated_at: str | None = None) -> Path:
        """index.json with every artifact and its checksum; the index itself is not listed."""
        self._require()
        stamp = generated_at or datetime.now(timezone.utc).isoformat()
        payload = {"artifacts": self.list_artifacts(), "generated_at": stamp}
        path = self.root / INDEX_NAME
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        logger.info("Wrote index with %d artifacts", len(self._artifacts))
        return path
