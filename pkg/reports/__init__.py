"""Run configuration schema and reporting."""

from .schemas import CheckResult, ExperimentConfig
from .summary import EmptyReportError, emit_report, summary_lines

__all__ = ["CheckResult", "EmptyReportError", "ExperimentConfig", "emit_report", "summary_lines"]
