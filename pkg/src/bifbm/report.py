"""Experiment reports: JSON and CSV emission with stable field order.

Numbers are written with ``repr`` precision (shortest round-tripping
form) and non-finite floats as the strings ``"nan"``, ``"inf"``,
``"-inf"``, so JSON -> CSV -> JSON reproduces every value exactly.
Wall-clock timings live in a separate document so that a report depends
only on its configuration and seed.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .checks import CheckRecord

REPORT_VERSION = 1
RECORD_FIELDS = (
    "name", "criterion", "anchor", "measured", "reference", "kind", "tolerance", "status", "details",
)
# columns stored verbatim in CSV; everything else is a JSON cell
_TEXT_FIELDS = ("name", "anchor", "kind", "status")


@dataclass
class ExperimentReport:
    command: str
    config: dict
    records: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        """0 when every non-report-only record passes, else 1."""
        return 0 if all(r.status != "fail" for r in self.records) else 1

    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "report-only": 0}
        for r in self.records:
            counts[r.status] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "command": self.command,
            "config": self.config,
            "summary": self.summary(),
            "records": [r.to_dict() for r in self.records],
            "artifacts": sorted(self.artifacts),
        }


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_finite(x) for x in v]
    return v


def _unfinite(v):
    if isinstance(v, str) and v in ("nan", "inf", "-inf"):
        return float(v)
    return v


def dumps_json(obj) -> str:
    return json.dumps(_finite(obj), indent=2, allow_nan=False, ensure_ascii=True) + "\n"


def report_json(report: ExperimentReport) -> str:
    return dumps_json(report.to_dict())


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        d = _finite(r.to_dict())
        w.writerow([
            d[f] if f in _TEXT_FIELDS else json.dumps(d[f], allow_nan=False) for f in RECORD_FIELDS
        ])
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != RECORD_FIELDS:
        raise ValueError("not a record table: header mismatch")
    out = []
    for row in rows[1:]:
        d = {f: (v if f in _TEXT_FIELDS else json.loads(v)) for f, v in zip(RECORD_FIELDS, row)}
        d["measured"] = _unfinite(d["measured"])
        out.append(CheckRecord.from_dict(d))
    return out


def records_from_json(text: str) -> list:
    doc = json.loads(text)
    recs = []
    for d in doc["records"]:
        d = dict(d, measured=_unfinite(d["measured"]))
        recs.append(CheckRecord.from_dict(d))
    return recs


def _write(dest, text: str) -> Path:
    dest = Path(dest)
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {dest}: {exc.strerror or exc}") from exc
    return dest


def emit(report: ExperimentReport, fmt: str, dest) -> Path:
    """Write the report as ``json`` (full document) or ``csv`` (records)."""
    if fmt == "json":
        return _write(dest, report_json(report))
    if fmt == "csv":
        return _write(dest, records_csv(report.records))
    raise ValueError(f"unknown report format {fmt!r}")


def emit_timing(timings: dict, dest) -> Path:
    return _write(dest, dumps_json({"timings": timings}))
