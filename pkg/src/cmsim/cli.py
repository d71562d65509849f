"""Command-line entry point: ``cmsim {rates,ber-sweep,fiber-sim,threshold,report}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .constellation import get_constellation
from .demapper import demap
from .fiber import FiberParams, edfa, effective_snr, receiver_dsp, rrc_shape, ssfm_propagate, write_waveform
from .harness import (
    SweepSpec,
    ThresholdReport,
    emit_report,
    find_threshold,
    format_sweep_csv,
    format_threshold_csv,
    ingest_reference_table,
    read_sweep_csv,
    read_threshold_csv,
    run_sweep,
)
from .rates import RATE_CSV_HEADER, estimate_gmi, estimate_mi_awgn, rate_row


def _floats(text: str) -> list[float]:
    """'1,2,3' or 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        a, b, s = (float(x) for x in text.split(":"))
        n = int(round((b - a) / s)) + 1
        return [round(a + i * s, 10) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_dataclass_flags(parser, cls) -> None:
    """One flag per field, named like the field (dashes also accepted)."""
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if isinstance(default, bool):
            conv = _bool
        elif isinstance(default, list):
            conv = _floats
        elif isinstance(default, dict):
            conv = json.loads
        elif isinstance(default, (int, float)):
            conv = type(default)
        else:
            conv = str
        names = [f"--{f.name}"]
        if "_" in f.name:
            names.append(f"--{f.name.replace('_', '-')}")
        parser.add_argument(*names, dest=f.name, type=conv, default=None, help=f"(default: {default!r})")


def _overrides(args, cls) -> dict:
    return {f.name: getattr(args, f.name) for f in dataclasses.fields(cls) if getattr(args, f.name) is not None}


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_sweep_arg(text: str):
    label, sep, path = text.partition("=")
    if not sep:
        raise SystemExit(f"--sweep expects LABEL=PATH with LABEL like '16qam,1/2', got {text!r}")
    const, _, rate = label.partition(",")
    return label, const, rate or "?", path


# ----------------------------------------------------------- subcommands


def cmd_rates(args) -> int:
    rows = []
    metrics = ("mi", "gmi") if args.metric == "all" else (args.metric,)
    for name in args.constellation.split(","):
        c = get_constellation(name)
        for i, snr_db in enumerate(_floats(args.snr_db)):
            rho = 10 ** (snr_db / 10)
            seed = np.random.SeedSequence(args.seed, spawn_key=(i,))
            if "mi" in metrics:
                rows.append(rate_row(estimate_mi_awgn(c, rho, args.n, seed), c.name, snr_db))
            if "gmi" in metrics:
                rng = np.random.default_rng(seed)
                bits = rng.integers(0, 2, args.n * c.m, dtype=np.uint8)
                idx = c.index_of_label(bits.reshape(-1, c.m))
                z = np.sqrt(0.5 / rho) * (rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n))
                frame = demap(c.points[idx] + z, rho, c, bits, args.llr_kind)
                est = estimate_gmi(frame)
                rows.append(rate_row(dataclasses.replace(est, metric=f"gmi-{args.llr_kind}"), c.name, snr_db))
    lines = [",".join(RATE_CSV_HEADER)] + [",".join(map(str, r)) for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_ber_sweep(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data.update(_overrides(args, SweepSpec))
    spec = SweepSpec.from_dict(data)
    rows = run_sweep(spec)
    _emit(format_sweep_csv(rows), args.out)
    cr = find_threshold(rows, spec.target_post_ber, order_by="gmi_norm" if spec.channel == "fiber" else "sweep_var")
    if cr.crossed:
        msg = ", ".join(f"{k}={v:.6g}" for k, v in cr.values.items())
        print(f"target {spec.target_post_ber:g} crossed at {msg}", file=sys.stderr)
    else:
        print(f"target {spec.target_post_ber:g} not crossed", file=sys.stderr)
    return 0


def cmd_fiber_sim(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data.update(_overrides(args, FiberParams))
    p = FiberParams(**data)
    c = get_constellation(args.constellation)
    rng = np.random.default_rng(args.seed)
    tx = c.points[rng.integers(0, c.M, size=(p.n_channels, 2, p.n_symbols))]
    w = edfa(ssfm_propagate(rrc_shape(tx, p), p), p, rng)
    if args.out:
        write_waveform(w, args.out)
    rx = receiver_dsp(w, p, tx[p.center_channel])
    snr = effective_snr(rx, tx[p.center_channel])
    if args.symbols_out:
        np.savez(args.symbols_out, tx=tx[p.center_channel], rx=rx)
    summary = {
        "launch_power_dbm": p.launch_power_dbm,
        "span_length_km": p.span_length_km,
        "effective_snr_db": float(10 * np.log10(snr)),
        "samples": w.n,
        "sample_rate": w.sample_rate,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_threshold(args) -> int:
    report = ThresholdReport(target=args.target)
    for text in args.sweep:
        _, const, rate, path = _parse_sweep_arg(text)
        report.add(const, rate, find_threshold(read_sweep_csv(path), args.target, args.order_by))
    _emit(format_threshold_csv(report), args.out)
    for rate in report.rates():
        try:
            spread = report.spread(rate)
        except ValueError as exc:
            print(f"rate {rate}: {exc}", file=sys.stderr)
            continue
        for metric, s in spread.items():
            print(f"rate {rate} {metric}: spread {s.absolute:.4g} (relative {s.relative:.4g})", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    sweeps = {}
    report = ThresholdReport(target=args.target)
    for text in args.sweep:
        label, const, rate, path = _parse_sweep_arg(text)
        rows = read_sweep_csv(path)
        sweeps[label] = rows
        report.add(const, rate, find_threshold(rows, args.target, args.order_by))
    if args.thresholds:
        report = read_threshold_csv(args.thresholds)
    reference = None
    if args.reference != "none":
        reference = ingest_reference_table(None if args.reference == "shipped" else args.reference)
    formats = tuple(f.strip() for f in args.formats.split(","))
    for path in emit_report(sweeps, report, args.out_dir, formats, reference):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="MI / GMI of QAM on the AWGN channel")
    p.add_argument("--constellation", default="16qam", help="comma-separated, e.g. 4qam,16qam,8qam or a file")
    p.add_argument("--snr-db", "--snr_db", dest="snr_db", default="0,3,6,10", help="'a,b,c' or 'start:stop:step'")
    p.add_argument("--metric", choices=("mi", "gmi", "all"), default="all")
    p.add_argument("--llr-kind", "--llr_kind", dest="llr_kind", choices=("exact", "maxlog"), default="exact")
    p.add_argument("--n", type=int, default=100_000, help="symbols per point")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("ber-sweep", help="full pipeline sweep, one CSV row per point")
    p.add_argument("--config", help="JSON file with sweep fields")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_dataclass_flags(p, SweepSpec)
    p.set_defaults(func=cmd_ber_sweep)

    p = sub.add_parser("fiber-sim", help="propagate one random WDM block and write the received waveform")
    p.add_argument("--config", help="JSON file with fiber parameters")
    p.add_argument("--constellation", default="16qam")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="waveform file (binary, self-describing header)")
    p.add_argument("--symbols-out", "--symbols_out", dest="symbols_out", help="npz with tx and rx symbols")
    _add_dataclass_flags(p, FiberParams)
    p.set_defaults(func=cmd_fiber_sim)

    for name, func, hlp in (
        ("threshold", cmd_threshold, "required predictor values at the target post-FEC BER"),
        ("report", cmd_report, "CSV and PNG report from sweep CSVs"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--sweep", action="append", required=True, help="LABEL=PATH, LABEL like '16qam,1/2' (repeatable)")
        p.add_argument("--target", type=float, default=4.7e-3)
        p.add_argument("--order-by", "--order_by", dest="order_by", default="sweep_var")
        if name == "threshold":
            p.add_argument("--out", help="CSV path (default stdout)")
        else:
            p.add_argument("--out-dir", "--out_dir", dest="out_dir", default="report")
            p.add_argument("--thresholds", help="use this threshold CSV instead of recomputing")
            p.add_argument("--reference", default="shipped", help="reference CSV, 'shipped' or 'none'")
            p.add_argument("--formats", default="csv,png")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"cmsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
