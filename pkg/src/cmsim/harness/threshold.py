"""Threshold crossings of post-FEC BER and their spread across formats."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .sweep import TARGET_POST_BER

METRICS = ("pre_ber", "mi_norm", "gmi_norm")
THRESHOLD_CSV_HEADER = ["constellation", "rate", "metric", "required_value"]


@dataclass(frozen=True)
class Crossing:
    """Predictor values where post-FEC BER meets the target.

    ``crossed`` is False when no bracketing pair of rows exists; the
    values dict is then empty.
    """

    crossed: bool
    values: dict = field(default_factory=dict)
    bracket: tuple[int, int] | None = None

    def __getitem__(self, metric: str) -> float:
        if not self.crossed:
            raise KeyError(f"target not crossed; no {metric} value")
        return self.values[metric]


NOT_CROSSED = Crossing(False)


def find_threshold(rows, target: float = TARGET_POST_BER, order_by: str = "sweep_var") -> Crossing:
    """Log-linear interpolation of post-FEC BER between the first bracketing rows.

    Rows are ordered by ``order_by`` (ascending) and the first pair with
    post BER going from >= target to < target is used. A zero BER at the
    lower end is replaced by the upper confidence bound of that row.
    """
    rows = sorted(rows, key=lambda r: getattr(r, order_by))
    for i in range(len(rows) - 1):
        a, b = rows[i], rows[i + 1]
        if a.post_ber >= target > b.post_ber:
            hi = a.post_ber
            lo = b.post_ber if b.post_ber > 0 else b.post_ber_ci_hi
            if lo >= hi or lo <= 0:
                t = 1.0
            else:
                t = (math.log(hi) - math.log(target)) / (math.log(hi) - math.log(lo))
                t = min(max(t, 0.0), 1.0)
            names = ("sweep_var",) + METRICS
            vals = {n: getattr(a, n) + t * (getattr(b, n) - getattr(a, n)) for n in names}
            return Crossing(True, vals, (i, i + 1))
    return NOT_CROSSED


@dataclass(frozen=True)
class Spread:
    absolute: float
    relative: float
    values: tuple


def prediction_spread(crossings) -> dict[str, Spread]:
    """Per metric: max - min of the required values, and that range over their mean.

    ``crossings`` is a mapping (or sequence) of Crossing objects for one
    code across constellations.
    """
    items = list(crossings.values()) if isinstance(crossings, dict) else list(crossings)
    if len(items) < 2:
        raise ValueError("need at least two constellations")
    if not all(c.crossed for c in items):
        raise ValueError("every curve must cross the target")
    out = {}
    for m in METRICS:
        vals = tuple(c.values[m] for c in items)
        span = max(vals) - min(vals)
        mean = sum(vals) / len(vals)
        out[m] = Spread(span, span / mean if mean else math.inf, vals)
    return out


@dataclass
class ThresholdReport:
    """Required predictor values per (constellation, rate)."""

    target: float = TARGET_POST_BER
    entries: dict = field(default_factory=dict)  # (constellation, rate) -> Crossing

    def add(self, constellation: str, rate: str, crossing: Crossing) -> None:
        self.entries[(constellation, str(rate))] = crossing

    def rates(self) -> list[str]:
        return sorted({r for _, r in self.entries})

    def spread(self, rate: str) -> dict[str, Spread]:
        return prediction_spread([c for (_, r), c in self.entries.items() if r == str(rate)])

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for (const, rate), cr in self.entries.items():
            for m in METRICS:
                val = repr(float(cr.values[m])) if cr.crossed else "nan"
                rows.append([const, rate, m, val])
        return rows


def format_threshold_csv(report: ThresholdReport) -> str:
    lines = [",".join(THRESHOLD_CSV_HEADER)]
    lines += [",".join(r) for r in report.csv_rows()]
    return "\n".join(lines) + "\n"


def write_threshold_csv(report: ThresholdReport, path) -> None:
    Path(path).write_text(format_threshold_csv(report))


def read_threshold_csv(path) -> ThresholdReport:
    report = ThresholdReport()
    collected: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != THRESHOLD_CSV_HEADER:
            raise ValueError(f"unexpected threshold CSV columns {reader.fieldnames}")
        for rec in reader:
            collected.setdefault((rec["constellation"], rec["rate"]), {})[rec["metric"]] = float(rec["required_value"])
    for key, vals in collected.items():
        crossed = all(not math.isnan(v) for v in vals.values())
        report.entries[key] = Crossing(crossed, vals if crossed else {})
    return report
