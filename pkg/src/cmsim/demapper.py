"""Soft demapping for AWGN-modeled observations.

L-values follow the convention L = log f(y|1) / f(y|0): positive values
favour bit 1. All L-values are in nats.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .constellation import Constellation

L_MAX = 50.0
_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class LlrFrame:
    """m x n matrix of L-values with the code bits they belong to.

    Row k holds bit position k, column l the l-th symbol. ``kind`` is
    "exact" or "maxlog" and decides how GMI is estimated.
    """

    llrs: np.ndarray
    bits: np.ndarray
    kind: str = "exact"

    def __post_init__(self):
        llrs = np.asarray(self.llrs, dtype=np.float64)
        bits = np.asarray(self.bits, dtype=np.uint8)
        if llrs.ndim != 2 or llrs.shape != bits.shape:
            raise ValueError(f"llrs {llrs.shape} and bits {bits.shape} must be equal 2-D shapes")
        if np.any(bits > 1):
            raise ValueError("bits must be 0 or 1")
        if not np.all(np.isfinite(llrs)):
            raise ValueError("L-values must be finite")
        if self.kind not in ("exact", "maxlog"):
            raise ValueError(f"unknown L-value kind {self.kind!r}")
        object.__setattr__(self, "llrs", llrs)
        object.__setattr__(self, "bits", bits)

    @property
    def m(self) -> int:
        return self.llrs.shape[0]

    @property
    def n(self) -> int:
        return self.llrs.shape[1]

    @property
    def apriori(self) -> np.ndarray:
        """A-priori L-values; always zero since input bits are equally likely."""
        return np.zeros_like(self.llrs)

    def scaled(self, a: float) -> LlrFrame:
        return LlrFrame(self.llrs * a, self.bits, self.kind)

    @classmethod
    def concat(cls, frames) -> LlrFrame:
        frames = list(frames)
        kinds = {f.kind for f in frames}
        if len(kinds) != 1:
            raise ValueError("cannot mix exact and max-log frames")
        return cls(
            np.concatenate([f.llrs for f in frames], axis=1),
            np.concatenate([f.bits for f in frames], axis=1),
            kinds.pop(),
        )


def _check_rho(rho):
    if not np.all(np.asarray(rho) > 0):
        raise ValueError(f"SNR must be positive, got {rho}")


def _sq_dist(y: np.ndarray, c: Constellation) -> np.ndarray:
    return np.abs(y[:, None] - c.points[None, :]) ** 2


def llr_exact(y, rho, c: Constellation) -> np.ndarray:
    """Exact L-values (log-sum-exp over the bit subsets), clamped to +-L_MAX.

    ``y`` may be a scalar (returns shape (m,)) or a 1-D array of n
    samples (returns shape (m, n)).
    """
    _check_rho(rho)
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    out = np.empty((c.m, y_arr.size))
    for start in range(0, y_arr.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        metric = -rho * _sq_dist(y_arr[sl], c)
        for k in range(c.m):
            num = logsumexp(metric[:, c.subsets[k, 1]], axis=1)
            den = logsumexp(metric[:, c.subsets[k, 0]], axis=1)
            out[k, sl] = num - den
    np.clip(out, -L_MAX, L_MAX, out=out)
    return out[:, 0] if np.ndim(y) == 0 else out


def llr_maxlog(y, rho, c: Constellation) -> np.ndarray:
    """Max-log L-values: rho * (min_{X_k^0} |y-x|^2 - min_{X_k^1} |y-x|^2)."""
    _check_rho(rho)
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    out = np.empty((c.m, y_arr.size))
    for start in range(0, y_arr.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        d = _sq_dist(y_arr[sl], c)
        for k in range(c.m):
            out[k, sl] = d[:, c.subsets[k, 0]].min(axis=1) - d[:, c.subsets[k, 1]].min(axis=1)
    out *= rho
    return out[:, 0] if np.ndim(y) == 0 else out


def demap(y, rho, c: Constellation, bits, kind: str = "exact") -> LlrFrame:
    """Demap a block of samples into an :class:`LlrFrame`.

    ``bits`` are the transmitted code bits, either flat (symbol-major, m
    per symbol) or already shaped (m, n).
    """
    fn = {"exact": llr_exact, "maxlog": llr_maxlog}[kind]
    y = np.asarray(y, dtype=np.complex128).ravel()
    llrs = fn(y, rho, c)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim == 1:
        bits = bits.reshape(-1, c.m).T
    return LlrFrame(llrs, bits, kind)


def hard_decide(llr):
    """MAP hard decision: 1 if L >= 0 else 0 (ties go to 1)."""
    dec = (np.asarray(llr) >= 0).astype(np.uint8)
    return int(dec) if dec.ndim == 0 else dec


def pre_fec_ber(frame: LlrFrame) -> float:
    if frame.llrs.size == 0:
        raise ValueError("empty frame")
    return float(np.mean(hard_decide(frame.llrs) != frame.bits))


def write_frame_csv(frame: LlrFrame, path) -> None:
    """Dump a frame as ``k,l,bit,llr`` rows (0-based indices)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "l", "bit", "llr"])
        for k in range(frame.m):
            for l in range(frame.n):
                w.writerow([k, l, int(frame.bits[k, l]), repr(float(frame.llrs[k, l]))])


def read_frame_csv(path, kind: str = "exact") -> LlrFrame:
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="ascii")
    data = np.atleast_1d(data)
    m = int(data["k"].max()) + 1
    n = int(data["l"].max()) + 1
    llrs = np.zeros((m, n))
    bits = np.zeros((m, n), dtype=np.uint8)
    llrs[data["k"], data["l"]] = data["llr"]
    bits[data["k"], data["l"]] = data["bit"]
    return LlrFrame(llrs, bits, kind)


def save_frame(frame: LlrFrame, path) -> None:
    """Binary dump (.npz)."""
    np.savez(Path(path), llrs=frame.llrs, bits=frame.bits, kind=np.array(frame.kind))


def load_frame(path) -> LlrFrame:
    with np.load(Path(path)) as z:
        return LlrFrame(z["llrs"], z["bits"], str(z["kind"]))
