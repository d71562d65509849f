"""CSV and PNG output for sweeps and thresholds; byte-stable for equal inputs."""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import write_sweep_csv  # noqa: E402
from .threshold import ThresholdReport, write_threshold_csv  # noqa: E402

_AXES = {
    "pre_ber": ("Pre-FEC BER", True),
    "mi_norm": ("MI / m", False),
    "gmi_norm": ("GMI / m", False),
}


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "sweep"


def _plot(sweeps: dict, metric: str, target: float, path: Path, reference=None) -> None:
    xlabel, logx = _AXES[metric]
    fig, ax = plt.subplots(figsize=(6, 4.2), dpi=100)
    for label, rows in sweeps.items():
        pts = sorted((getattr(r, metric), r.post_ber) for r in rows if r.post_ber > 0)
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", ms=3, label=label)
    if reference and metric == "gmi_norm":
        ax.plot(
            [r.gmi_norm for r in reference],
            [r.post_ber for r in reference],
            ls="none",
            marker="x",
            color="k",
            label="measured",
        )
    ax.axhline(target, color="grey", lw=0.8, ls="--")
    ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("Post-FEC BER")
    ax.grid(True, which="both", lw=0.3)
    if sweeps or reference:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)


def emit_report(sweeps: dict, report: ThresholdReport | None, out_dir, formats=("csv", "png"), reference=None) -> list[Path]:
    """Write sweep_<label>.csv, thresholds.csv and post_ber_vs_<metric>.png.

    ``sweeps`` maps a label to its rows. Returns the written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    unknown = set(formats) - {"csv", "png"}
    if unknown:
        raise ValueError(f"unsupported report formats {sorted(unknown)}")
    written = []
    target = report.target if report is not None else 4.7e-3
    if "csv" in formats:
        for label, rows in sweeps.items():
            path = out / f"sweep_{_slug(label)}.csv"
            write_sweep_csv(rows, path)
            written.append(path)
        if report is not None:
            path = out / "thresholds.csv"
            write_threshold_csv(report, path)
            written.append(path)
    if "png" in formats:
        for metric in _AXES:
            path = out / f"post_ber_vs_{metric}.png"
            _plot(sweeps, metric, target, path, reference)
            written.append(path)
    return written
