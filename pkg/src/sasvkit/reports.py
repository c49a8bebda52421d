"""Deterministic serialization of audit, metric and breakdown reports.

All real values are rounded to 6 significant digits; serializing the same
report twice yields identical bytes. JSON key order is fixed by the report
types' to_dict methods; infinities become the strings "inf"/"-inf" (JSON
has no literal for them). Text output is UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
from typing import Any

from .audit import AuditReport
from .errors import ValidationError
from .metrics import BreakdownTable, MetricReport

FORMATS = ("json", "csv")


def round6(value: float) -> float:
    """Round to 6 significant digits (exact for infinities)."""
    if not math.isfinite(value):
        return value
    return float(format(value, ".6g"))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return None
        return round6(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _csv_value(value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".6g")


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(_jsonable(payload), indent=2) + "\n").encode("utf-8")


def _breakdown_csv(table: BreakdownTable) -> bytes:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([table.group_by, *table.cols])
    for row_id, row_values in zip(table.rows, table.values):
        writer.writerow([row_id, *(_csv_value(v) for v in row_values)])
    return buf.getvalue().encode("utf-8")


def _metric_csv(report: MetricReport) -> bytes:
    fields = report.to_dict()
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields.keys())
    writer.writerow(_csv_value(v) for v in fields.values())
    return buf.getvalue().encode("utf-8")


def write_report(report: AuditReport | MetricReport | BreakdownTable, format: str) -> bytes:
    """Serialize a report deterministically.

    Supported pairs: MetricReport as json or csv, BreakdownTable as csv
    (attacks as rows, codecs as columns, pooled margins) or json,
    AuditReport as json only.
    """
    if format not in FORMATS:
        raise ValidationError(f"unknown report format '{format}'")
    if isinstance(report, MetricReport):
        return _json_bytes(report.to_dict()) if format == "json" else _metric_csv(report)
    if isinstance(report, BreakdownTable):
        if format == "csv":
            return _breakdown_csv(report)
        return _json_bytes(
            {
                "metric": report.metric,
                "group_by": report.group_by,
                "rows": list(report.rows),
                "cols": list(report.cols),
                "values": [list(row) for row in report.values],
            }
        )
    if isinstance(report, AuditReport):
        if format != "json":
            raise ValidationError("audit reports serialize to json only")
        return _json_bytes(report.to_dict())
    raise ValidationError(f"unsupported report type {type(report).__name__}")
