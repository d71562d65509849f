"""Sweeps, threshold extraction and reporting."""

from .reference import ReferenceRow, ReferenceSchemaError, ingest_reference_table, write_reference_table
from .report import emit_report
from .sweep import (
    SWEEP_CSV_HEADER,
    TARGET_POST_BER,
    SweepError,
    SweepRow,
    SweepSpec,
    format_sweep_csv,
    read_sweep_csv,
    run_point,
    run_sweep,
    write_sweep_csv,
)
from .threshold import (
    METRICS,
    NOT_CROSSED,
    THRESHOLD_CSV_HEADER,
    Crossing,
    Spread,
    ThresholdReport,
    find_threshold,
    format_threshold_csv,
    prediction_spread,
    read_threshold_csv,
    write_threshold_csv,
)

__all__ = [
    "METRICS",
    "NOT_CROSSED",
    "SWEEP_CSV_HEADER",
    "TARGET_POST_BER",
    "THRESHOLD_CSV_HEADER",
    "Crossing",
    "ReferenceRow",
    "ReferenceSchemaError",
    "Spread",
    "SweepError",
    "SweepRow",
    "SweepSpec",
    "ThresholdReport",
    "emit_report",
    "find_threshold",
    "format_sweep_csv",
    "format_threshold_csv",
    "ingest_reference_table",
    "prediction_spread",
    "read_sweep_csv",
    "read_threshold_csv",
    "run_point",
    "run_sweep",
    "write_reference_table",
    "write_sweep_csv",
    "write_threshold_csv",
]
