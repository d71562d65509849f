"""Measured reference points (launch power, GMI/m, post-FEC BER, spans, rate)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

REFERENCE_HEADER = ["launch_power_dbm", "gmi_norm", "post_ber", "spans", "rate"]


class ReferenceSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceRow:
    launch_power_dbm: float
    gmi_norm: float
    post_ber: float
    spans: int
    rate: str


def _parse(lines) -> list[ReferenceRow]:
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        return []
    if [h.strip() for h in header] != REFERENCE_HEADER:
        raise ReferenceSchemaError(f"expected columns {REFERENCE_HEADER}, got {header}")
    rows = []
    for lineno, rec in enumerate(reader, 2):
        if not rec:
            continue
        if len(rec) != len(REFERENCE_HEADER):
            raise ReferenceSchemaError(f"line {lineno}: expected {len(REFERENCE_HEADER)} fields")
        try:
            rows.append(ReferenceRow(float(rec[0]), float(rec[1]), float(rec[2]), int(rec[3]), rec[4].strip()))
        except ValueError as exc:
            raise ReferenceSchemaError(f"line {lineno}: {exc}") from None
    return rows


def ingest_reference_table(path=None) -> list[ReferenceRow]:
    """Read a reference CSV; without a path, the bundled measurement table."""
    if path is None:
        text = resources.files("cmsim").joinpath("data", "table2.csv").read_text()
    else:
        text = Path(path).read_text()
    return _parse(text.splitlines())


def write_reference_table(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REFERENCE_HEADER)
        for r in rows:
            w.writerow([repr(r.launch_power_dbm), repr(r.gmi_norm), repr(r.post_ber), r.spans, r.rate])
