"""Structured verification records and JSON-lines / CSV emission.

Every record identifies the mathematical claim it checks through a stable
``claim`` slug, carries the computed value, the reference constant, the
signed gap with its expected orientation, a tolerance, and a verdict.
Identical run configurations produce byte-identical streams apart from the
timestamp field.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Iterable, TextIO

SCHEMA_VERSION = "qcurvlab-report/1"

# gap orientations
GE = "ge"   # pass when value - reference >= -tolerance (infima / lower bounds)
LE = "le"   # pass when value - reference <= +tolerance (suprema / upper bounds)
EQ = "eq"   # pass when |value - reference| <= tolerance  (identities, residuals)

PASS = "pass"
FAIL = "fail"
SUPPRESSED = "suppressed"   # computed outside the stated parameter range


def _verdict(gap: float, orientation: str, tolerance: float) -> str:
    if orientation == GE:
        return PASS if gap >= -tolerance else FAIL
    if orientation == LE:
        return PASS if gap <= tolerance else FAIL
    return PASS if abs(gap) <= tolerance else FAIL


@dataclass
class FunctionalReport:
    """Outcome of one functional evaluation or residual check."""

    name: str
    value: float
    reference_constant: float
    tolerance: float
    orientation: str = EQ
    claim: str = ""
    metadata: dict = field(default_factory=dict)
    verdict: str = ""
    gap: float = 0.0

    def __post_init__(self):
        self.gap = float(self.value) - float(self.reference_constant)
        if not self.verdict:
            self.verdict = _verdict(self.gap, self.orientation, self.tolerance)

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS, SUPPRESSED)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["schema"] = SCHEMA_VERSION
        return rec


@dataclass
class VerificationReport:
    """An ordered collection of records produced by one run."""

    records: list = field(default_factory=list)

    def add(self, report: FunctionalReport) -> FunctionalReport:
        self.records.append(report)
        return report

    def extend(self, reports: Iterable[FunctionalReport]) -> None:
        for r in reports:
            self.add(r)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def summary(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "record": "summary",
            "total": len(self.records),
            "failed": len(self.failures()),
            "all_pass": self.all_pass,
        }

    def write_jsonl(self, stream: TextIO, timestamp: bool = True) -> None:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if timestamp else None
        for rec in self.records:
            row = rec.to_record()
            if stamp is not None:
                row["timestamp"] = stamp
            stream.write(json.dumps(row, sort_keys=True) + "\n")
        summary = self.summary()
        if stamp is not None:
            summary["timestamp"] = stamp
        stream.write(json.dumps(summary, sort_keys=True) + "\n")

    def write_csv(self, stream: TextIO, columns: list[str] | None = None) -> None:
        """Flat CSV of the scan grid: one row per record."""
        cols = columns or ["name", "claim", "value", "reference_constant",
                           "gap", "orientation", "tolerance", "verdict"]
        writer = csv.writer(stream, lineterminator="\n")
        meta_keys = sorted({k for r in self.records for k in r.metadata})
        writer.writerow(cols + meta_keys)
        for r in self.records:
            rec = r.to_record()
            row = [rec[c] for c in cols]
            row += [r.metadata.get(k, "") for k in meta_keys]
            writer.writerow(row)


def report_lines_equal(a: str, b: str) -> bool:
    """Byte equality of two JSON-lines reports modulo the timestamp field."""

    def strip(text: str) -> list[str]:
        out = []
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            obj.pop("timestamp", None)
            out.append(json.dumps(obj, sort_keys=True))
        return out

    return strip(a) == strip(b)
