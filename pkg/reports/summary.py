"""Run summary: PASS/FAIL lines, summary.csv and the artifact index."""

from __future__ import annotations

import logging

from core.errors import RelaxationError
from memory.artifact_store import ArtifactStore
from reports.schemas import CheckResult

logger = logging.getLogger(__name__)


class EmptyReportError(RelaxationError, ValueError):
    """No check produced a result."""


def summary_lines(checks: list[CheckResult], failed_stages: dict[str, str] | None = None) -> list[str]:
    lines = [check.line() for check in checks]
    for stage, reason in sorted((failed_stages or {}).items()):
        lines.append(f"FAIL stage {stage}: {reason}")
    passed = sum(check.passed for check in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    return lines


def emit_report(
    checks: list[CheckResult],
    store: ArtifactStore,
    *,
    metrics: list[dict] | None = None,
    failed_stages: dict[str, str] | None = None,
    generated_at: str | None = None,
) -> bool:
    """Write summary.csv / summary.txt and index.json; True when everything passed."""
    if not checks and not failed_stages:
        raise EmptyReportError("nothing to report: no checks were run")
    rows = [
        {"section": "check", "key": check.name, "value": "PASS" if check.passed else "FAIL"}
        for check in checks
    ]
    rows.extend({"section": m["section"], "key": m["key"], "value": m["value"]} for m in metrics or [])
    rows.extend({"section": "stage", "key": name, "value": "FAILED"} for name in sorted(failed_stages or {}))
    store.store_csv("summary.csv", rows, ["section", "key", "value"])
    lines = summary_lines(checks, failed_stages)
    store.store_text("summary.txt", "\n".join(lines) + "\n")
    store.write_index(generated_at)
    ok = all(check.passed for check in checks) and not failed_stages
    logger.info("Report written to %s: %s", store.root, "PASS" if ok else "FAIL")
    return ok
