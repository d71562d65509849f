"""End-to-end sweeps: channel -> demapper -> decoder, one row per point."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constellation import get_constellation, map_bits_to_indices
from ..demapper import LlrFrame, demap, pre_fec_ber, save_frame
from ..fec import get_codec, interleaver_permutation
from ..fec.common import clopper_pearson
from ..fiber import FiberParams, effective_snr, simulate_link
from ..rates import estimate_gmi, estimate_mi_samples

TARGET_POST_BER = 4.7e-3
SWEEP_VARS = {"awgn": ("snr_db",), "fiber": ("launch_power_dbm", "span_km")}

# seed roles
_INFO, _NOISE, _NEIGHBORS, _FILL, _PERM = range(5)


class SweepError(ValueError):
    pass


@dataclass
class SweepSpec:
    """One sweep: a channel, a constellation, a demapper and a codec.

    ``frames`` is the per-point codeword budget. A point stops earlier
    once it has ``min_errors`` bit errors spread over at least
    ``min_frame_errors`` failed codewords and ``min_frames`` frames.
    ``fiber`` holds FiberParams overrides for fiber sweeps.
    """

    channel: str = "awgn"
    constellation: str = "16qam"
    llr_kind: str = "exact"
    codec: str = "ldpc:4096-1/2"
    sweep_var: str = "snr_db"
    values: list = field(default_factory=lambda: [5.0, 6.0, 7.0])
    frames: int = 200
    min_errors: int = 100
    min_frames: int = 20
    min_frame_errors: int = 10
    target_post_ber: float = TARGET_POST_BER
    seed: int = 1
    workers: int = 1
    turbo_block: int = 20000
    max_iter: int = 50
    turbo_iter: int = 10
    fiber: dict = field(default_factory=dict)
    dump_llrs: str | None = None

    def __post_init__(self):
        self.values = [float(v) for v in np.atleast_1d(self.values)]
        if not self.values:
            raise SweepError("sweep range is empty")
        if self.frames < 1 or self.min_frames < 1:
            raise SweepError("frames must be at least 1")
        if self.channel not in SWEEP_VARS:
            raise SweepError(f"unknown channel {self.channel!r}")
        if self.sweep_var not in SWEEP_VARS[self.channel]:
            raise SweepError(f"sweep variable {self.sweep_var!r} does not apply to the {self.channel} channel")
        if self.llr_kind not in ("exact", "maxlog"):
            raise SweepError(f"unknown L-value kind {self.llr_kind!r}")
        if self.workers < 1:
            raise SweepError("workers must be at least 1")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> SweepSpec:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SweepError(f"unknown sweep fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> SweepSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def fiber_params(self, value: float | None = None) -> FiberParams:
        p = FiberParams(**self.fiber)
        if value is None:
            return p
        key = "span_length_km" if self.sweep_var == "span_km" else self.sweep_var
        return p.replace(**{key: value})


@dataclass(frozen=True)
class SweepRow:
    sweep_var: float
    pre_ber: float
    mi_norm: float
    gmi_norm: float
    s_star: float
    post_ber: float
    post_ber_ci_lo: float
    post_ber_ci_hi: float
    frames: int
    bit_errors: int = 0
    info_bits: int = 0
    snr_db: float = math.nan


SWEEP_CSV_HEADER = [
    "sweep_var",
    "pre_ber",
    "mi_norm",
    "gmi_norm",
    "s_star",
    "post_ber",
    "post_ber_ci_lo",
    "post_ber_ci_hi",
    "frames",
]


def _rng(master: int, point: int, block: int, role: int):
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(point, block, role)))


class _Link:
    """Everything a point needs that does not depend on the sweep value."""

    def __init__(self, spec: SweepSpec):
        self.spec = spec
        self.c = get_constellation(spec.constellation)
        self.codec = get_codec(spec.codec, block=spec.turbo_block, seed=spec.seed)
        m, n = self.c.m, self.codec.n_code
        # codewords per block so that a block fills whole symbols
        self.group = m // math.gcd(n, m)
        if (self.group * n) % m:
            raise SweepError(f"codeword length {n} cannot be mapped onto {m}-bit symbols")
        self.block_bits = self.group * n
        self.perm = interleaver_permutation(self.block_bits, _rng(spec.seed, 0, 0, _PERM))

    def decode(self, llrs):
        if hasattr(self.codec, "k"):  # turbo
            return self.codec.decode(llrs, n_iter=self.spec.turbo_iter)
        return self.codec.decode(llrs, max_iter=self.spec.max_iter)

    def encode_block(self, rng, n_codewords):
        k = self.codec.k_info
        info = rng.integers(0, 2, size=(n_codewords, k), dtype=np.uint8)
        code = np.concatenate([np.asarray(self.codec.encode(u), dtype=np.uint8) for u in info])
        return info, code


def _awgn_block(link: _Link, snr_db: float, point: int, block: int):
    c = link.c
    info, code = link.encode_block(_rng(link.spec.seed, point, block, _INFO), link.group)
    chan_bits = code[link.perm]
    idx = map_bits_to_indices(chan_bits, c)
    rho = 10 ** (snr_db / 10)
    rng = _rng(link.spec.seed, point, block, _NOISE)
    z = math.sqrt(0.5 / rho) * (rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size))
    y = c.points[idx] + z
    return info, chan_bits, idx, y, rho


def _fiber_block(link: _Link, value: float, point: int, block: int):
    spec, c = link.spec, link.c
    p = spec.fiber_params(value)
    n_sym = p.n_symbols
    bits_per_run = 2 * n_sym * c.m
    n_cw = bits_per_run // link.block_bits * link.group
    if n_cw == 0:
        raise SweepError(f"fiber block of {bits_per_run} bits is shorter than {link.block_bits} code bits")
    info, code = link.encode_block(_rng(spec.seed, point, block, _INFO), n_cw)
    chan = code.reshape(-1, link.block_bits)[:, link.perm].ravel()
    coded_bits = chan.size
    fill = _rng(spec.seed, point, block, _FILL).integers(0, 2, bits_per_run - coded_bits, dtype=np.uint8)
    all_bits = np.concatenate([chan, fill])
    idx = map_bits_to_indices(all_bits, c).reshape(2, n_sym)
    others = _rng(spec.seed, point, block, _NEIGHBORS).integers(0, c.M, size=(p.n_channels, 2, n_sym))
    others[p.center_channel] = idx
    tx = c.points[others]
    rx = simulate_link(tx, p, _rng(spec.seed, point, block, _NOISE))
    rho = effective_snr(rx, tx[p.center_channel])
    n_coded_sym = coded_bits // c.m
    return info, chan, idx.ravel()[:n_coded_sym], rx.ravel()[:n_coded_sym], rho


def run_point(spec: SweepSpec, point: int, value: float, return_frame: bool = False):
    """Simulate one sweep point; returns a SweepRow (and the pooled LlrFrame)."""
    link = _Link(spec)
    c = link.c
    k = link.codec.k_info
    n = link.codec.n_code
    frames: list[LlrFrame] = []
    ys, idxs, rhos = [], [], []
    errors = frames_done = frame_errs = 0
    block = 0
    while True:
        if spec.channel == "awgn":
            info, chan_bits, idx, y, rho = _awgn_block(link, value, point, block)
        else:
            info, chan_bits, idx, y, rho = _fiber_block(link, value, point, block)
        frame = demap(y, rho, c, chan_bits, spec.llr_kind)
        frames.append(frame)
        ys.append(y)
        idxs.append(idx)
        rhos.append(np.full(y.size, rho))
        # undo the interleaver per group of codewords
        flat = frame.llrs.T.ravel().reshape(-1, link.block_bits)
        deint = np.empty_like(flat)
        deint[:, link.perm] = flat
        deint = deint.reshape(-1, n)
        for u, llr in zip(info, deint):
            res = link.decode(llr).score(u)
            errors += res.bit_errors
            frame_errs += res.bit_errors > 0
            frames_done += 1
        block += 1
        enough = (
            errors >= spec.min_errors
            and frame_errs >= spec.min_frame_errors
            and frames_done >= spec.min_frames
        )
        if enough or frames_done >= spec.frames:
            break
    pooled = LlrFrame.concat(frames)
    y = np.concatenate(ys)
    idx = np.concatenate(idxs)
    rho_all = np.concatenate(rhos)
    mi = _mi_pooled(y, idx, rho_all, c)
    gmi = estimate_gmi(pooled)
    bits = frames_done * k
    lo, hi = clopper_pearson(errors, bits)
    row = SweepRow(
        sweep_var=float(value),
        pre_ber=pre_fec_ber(pooled),
        mi_norm=mi / c.m,
        gmi_norm=gmi.value / c.m,
        s_star=float(gmi.s_star),
        post_ber=errors / bits,
        post_ber_ci_lo=lo,
        post_ber_ci_hi=hi,
        frames=frames_done,
        bit_errors=errors,
        info_bits=bits,
        snr_db=float(10 * np.log10(np.mean(rho_all))),
    )
    if spec.dump_llrs:
        out = Path(spec.dump_llrs)
        out.mkdir(parents=True, exist_ok=True)
        save_frame(pooled, out / f"point_{point:03d}.npz")
    return (row, pooled) if return_frame else row


def _mi_pooled(y, idx, rho, c) -> float:
    # each block may carry its own SNR estimate; weight by sample count
    total = 0.0
    for r in np.unique(rho):
        sel = rho == r
        total += estimate_mi_samples(y[sel], idx[sel], float(r), c).value * sel.sum()
    return float(total / y.size)


def _point_task(args):
    spec, i, v = args
    return run_point(spec, i, v)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Run every point; results are identical for any worker count."""
    _Link(spec)  # fail fast on codec/constellation mismatch
    tasks = [(spec, i, v) for i, v in enumerate(spec.values)]
    if spec.workers == 1 or len(tasks) == 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(_point_task, tasks))


# ------------------------------------------------------------------ CSV


def format_sweep_csv(rows) -> str:
    lines = [",".join(SWEEP_CSV_HEADER)]
    for r in rows:
        lines.append(
            ",".join(
                repr(float(getattr(r, name))) if name != "frames" else str(int(r.frames))
                for name in SWEEP_CSV_HEADER
            )
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows, path) -> None:
    Path(path).write_text(format_sweep_csv(rows))


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_CSV_HEADER:
            raise SweepError(f"unexpected sweep CSV columns {reader.fieldnames}")
        rows = []
        for rec in reader:
            vals = {k: float(v) for k, v in rec.items() if k != "frames"}
            rows.append(SweepRow(frames=int(rec["frames"]), **vals))
    return rows
