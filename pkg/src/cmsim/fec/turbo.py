"""Turbo code built from two (1, 11/15)_8 recursive systematic encoders.

Octal generators are read with the most significant bit as D^0: the
feedback 15 = 1 + D + D^3, the feedforward 11 = 1 + D^3. Encoder 1 is
terminated with three tail steps, encoder 2 is left open.

Mother codeword layout: ``[systematic k | parity1 k | parity2 k | tail 6]``
with the tail holding the three systematic then the three parity tail
bits of encoder 1. Puncturing removes parity bits only.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from numba import njit

from .common import DecodeResult, interleaver_permutation

N_STATES = 8
TAIL = 3
EXTRINSIC_SCALE = 0.7
DEFAULT_BLOCK = 20000


def _trellis():
    # state = a[t-1] * 4 + a[t-2] * 2 + a[t-3]
    nxt = np.zeros((N_STATES, 2), dtype=np.int64)
    par = np.zeros((N_STATES, 2), dtype=np.int64)
    for s in range(N_STATES):
        a1, a2, a3 = (s >> 2) & 1, (s >> 1) & 1, s & 1
        for u in (0, 1):
            a = u ^ a1 ^ a3
            par[s, u] = a ^ a3
            nxt[s, u] = (a << 2) | (a1 << 1) | a2
    return nxt, par


NEXT_STATE, PARITY = _trellis()


@njit(cache=True)
def _rsc_kernel(u, nxt, par):
    out = np.empty(u.size, dtype=np.uint8)
    s = 0
    for t in range(u.size):
        out[t] = par[s, u[t]]
        s = nxt[s, u[t]]
    return out, s


def rsc_encode(bits, terminate: bool = False):
    """Return (parity, tail_sys, tail_par); the tails are empty when not terminated."""
    u = np.ascontiguousarray(bits, dtype=np.int64)
    out, s = _rsc_kernel(u, NEXT_STATE, PARITY)
    tail_sys, tail_par = [], []
    if terminate:
        for _ in range(TAIL):
            b = ((s >> 2) ^ s) & 1  # drives the feedback sum to zero
            tail_sys.append(b)
            tail_par.append(PARITY[s, b])
            s = NEXT_STATE[s, b]
        assert s == 0
    return out, np.array(tail_sys, dtype=np.uint8), np.array(tail_par, dtype=np.uint8)


# ------------------------------------------------------------ puncturing

class PunctureError(ValueError):
    pass


def parse_rate(rate) -> Fraction:
    r = Fraction(rate).limit_denominator(100) if not isinstance(rate, str) else Fraction(rate)
    if r not in PUNCTURE_PATTERNS:
        raise PunctureError(f"unsupported turbo rate {rate}; choose from {', '.join(map(str, SUPPORTED_RATES))}")
    return r


def parse_puncture_pattern(text: str):
    """Two lines (parity 1, parity 2) or three (systematic first) of 0/1 masks."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].replace(" ", "").replace(",", "").strip()
        if not line:
            continue
        if set(line) - {"0", "1"}:
            raise PunctureError(f"pattern line {line!r} is not a 0/1 mask")
        rows.append(tuple(int(ch) for ch in line))
    if len(rows) == 3:
        if not all(rows[0]):
            raise PunctureError("puncturing must keep all systematic bits")
        rows = rows[1:]
    if len(rows) != 2:
        raise PunctureError(f"expected 2 or 3 pattern lines, got {len(rows)}")
    return rows[0], rows[1]


def format_puncture_pattern(p1, p2) -> str:
    return "".join(map(str, p1)) + "\n" + "".join(map(str, p2)) + "\n"


def load_puncture_pattern(path):
    return parse_puncture_pattern(Path(path).read_text())


def _shipped_patterns():
    out = {}
    for entry in resources.files("cmsim").joinpath("data").iterdir():
        if entry.name.startswith("turbo_r") and entry.name.endswith(".punct"):
            num, den = entry.name[len("turbo_r") : -len(".punct")].split("_")
            out[Fraction(int(num), int(den))] = parse_puncture_pattern(entry.read_text())
    return dict(sorted(out.items()))


# cyclic parity masks per rate; systematic and tail bits are always sent
PUNCTURE_PATTERNS = _shipped_patterns()
SUPPORTED_RATES = tuple(PUNCTURE_PATTERNS)


def _keep_mask(pattern, k: int) -> np.ndarray:
    pattern = np.asarray(pattern, dtype=bool)
    return np.resize(pattern, k)


# ---------------------------------------------------------------- codec


class TurboCode:
    """Rate-compatible turbo code with a seeded internal interleaver.

    ``patterns`` overrides the built-in parity masks for ``rate``.
    """

    def __init__(self, k: int = DEFAULT_BLOCK, rate="1/3", seed: int = 0, patterns=None):
        if k < 1:
            raise ValueError("block length must be positive")
        self.k = k
        self.target_rate = parse_rate(rate) if patterns is None else Fraction(rate)
        p1, p2 = patterns if patterns is not None else PUNCTURE_PATTERNS[self.target_rate]
        self.patterns = (tuple(p1), tuple(p2))
        self.seed = seed
        self.perm = interleaver_permutation(k, seed)
        self.inv_perm = np.argsort(self.perm)
        mother_keep = np.ones(3 * k + 2 * TAIL, dtype=bool)
        mother_keep[k : 2 * k] = _keep_mask(p1, k)
        mother_keep[2 * k : 3 * k] = _keep_mask(p2, k)
        self.keep = mother_keep
        self.name = f"turbo-{k}-{self.target_rate}"

    @property
    def k_info(self) -> int:
        return self.k

    @property
    def n_mother(self) -> int:
        return 3 * self.k + 2 * TAIL

    @property
    def n_code(self) -> int:
        return int(self.keep.sum())

    @property
    def rate(self) -> float:
        return self.k / self.n_code

    def encode_mother(self, info_bits) -> np.ndarray:
        u = np.asarray(info_bits, dtype=np.uint8)
        if u.shape != (self.k,):
            raise ValueError(f"expected {self.k} info bits, got shape {u.shape}")
        p1, ts, tp = rsc_encode(u, terminate=True)
        p2, _, _ = rsc_encode(u[self.perm])
        return np.concatenate([u, p1, p2, ts, tp])

    def encode(self, info_bits) -> np.ndarray:
        return self.puncture(self.encode_mother(info_bits))

    def puncture(self, mother) -> np.ndarray:
        return np.asarray(mother)[self.keep]

    def depuncture(self, values) -> np.ndarray:
        """Place received values into the mother layout, zero (erasure) elsewhere."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n_code,):
            raise ValueError(f"expected {self.n_code} values, got shape {values.shape}")
        out = np.zeros(self.n_mother)
        out[self.keep] = values
        return out

    def decode(self, llrs, n_iter: int = 10, early_stop: bool = True, trace=None) -> DecodeResult:
        return turbo_decode(self, llrs, n_iter, early_stop, trace)

    def __repr__(self) -> str:
        return f"TurboCode(k={self.k}, rate={self.target_rate}, n={self.n_code})"


def turbo_encode(code: TurboCode, info_bits) -> np.ndarray:
    return code.encode(info_bits)


# ---------------------------------------------------------- max-log BCJR

_NEG = -1e300


@njit(cache=True)
def _maxlog_bcjr(ls, la, lp, tail_s, tail_p, terminated, nxt, par):
    """Max-log-MAP posterior L-values (log P1/P0) of the K info bits."""
    K = ls.size
    T = tail_s.size if terminated else 0
    steps = K + T
    alpha = np.full((steps + 1, 8), _NEG)
    alpha[0, 0] = 0.0
    for t in range(steps):
        for s in range(8):
            a = alpha[t, s]
            if a <= _NEG:
                continue
            if t < K:
                for u in range(2):
                    g = u * (ls[t] + la[t]) + par[s, u] * lp[t]
                    ns = nxt[s, u]
                    if a + g > alpha[t + 1, ns]:
                        alpha[t + 1, ns] = a + g
            else:
                u = ((s >> 2) ^ s) & 1
                g = u * tail_s[t - K] + par[s, u] * tail_p[t - K]
                ns = nxt[s, u]
                if a + g > alpha[t + 1, ns]:
                    alpha[t + 1, ns] = a + g
        mx = alpha[t + 1].max()
        for s in range(8):
            if alpha[t + 1, s] > _NEG:
                alpha[t + 1, s] -= mx
    beta = np.full(8, _NEG)
    if terminated:
        beta[0] = 0.0
    else:
        beta[:] = 0.0
    for t in range(steps - 1, K - 1, -1):
        nb = np.full(8, _NEG)
        for s in range(8):
            u = ((s >> 2) ^ s) & 1
            ns = nxt[s, u]
            if beta[ns] > _NEG:
                nb[s] = beta[ns] + u * tail_s[t - K] + par[s, u] * tail_p[t - K]
        beta = nb
    post = np.empty(K)
    for t in range(K - 1, -1, -1):
        best = np.full(2, _NEG)
        nb = np.full(8, _NEG)
        for s in range(8):
            a = alpha[t, s]
            for u in range(2):
                ns = nxt[s, u]
                if beta[ns] <= _NEG:
                    continue
                g = u * (ls[t] + la[t]) + par[s, u] * lp[t]
                if a > _NEG and a + g + beta[ns] > best[u]:
                    best[u] = a + g + beta[ns]
                if g + beta[ns] > nb[s]:
                    nb[s] = g + beta[ns]
        post[t] = best[1] - best[0]
        mx = nb.max()
        for s in range(8):
            if nb[s] > _NEG:
                nb[s] -= mx
        beta = nb
    return post


def bcjr_posterior(ls, la, lp, tail_s=None, tail_p=None) -> np.ndarray:
    """Single-RSC max-log-MAP posteriors; pass tail L-values for a terminated block."""
    terminated = tail_s is not None
    if not terminated:
        tail_s = tail_p = np.zeros(0)
    f = lambda x: np.ascontiguousarray(x, dtype=np.float64)  # noqa: E731
    return _maxlog_bcjr(f(ls), f(la), f(lp), f(tail_s), f(tail_p), terminated, NEXT_STATE, PARITY)


def turbo_decode(code: TurboCode, llrs, n_iter: int = 10, early_stop: bool = True, trace=None) -> DecodeResult:
    """Iterative max-log-MAP decoding with extrinsic scaling by 0.7.

    ``llrs`` is either the received (punctured) vector or the depunctured
    mother-length vector with zeros at punctured positions. Early stopping
    ends when both component decoders agree on every hard decision. If
    ``trace`` is a list, (extrinsic_out, apriori_used) pairs are appended,
    both in the ordering of the decoder that uses them.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape == (code.n_mother,) and code.n_mother != code.n_code:
        full = llrs
    else:
        full = code.depuncture(llrs)
    k = code.k
    ls, lp1, lp2 = full[:k], full[k : 2 * k], full[2 * k : 3 * k]
    ts, tp = full[3 * k : 3 * k + TAIL], full[3 * k + TAIL :]
    perm, inv = code.perm, code.inv_perm
    ls2 = ls[perm]
    la1 = np.zeros(k)
    post = ls.copy()
    converged = False
    it = 0
    for it in range(1, n_iter + 1):
        post1 = bcjr_posterior(ls, la1, lp1, ts, tp)
        le1 = post1 - ls - la1
        la2 = EXTRINSIC_SCALE * le1[perm]
        if trace is not None:
            trace.append((le1[perm], la2))
        post2 = bcjr_posterior(ls2, la2, lp2)
        le2 = (post2 - ls2 - la2)[inv]
        la1 = EXTRINSIC_SCALE * le2
        if trace is not None:
            trace.append((le2, la1))
        post = post2[inv]
        converged = bool(np.array_equal(post1 >= 0, post >= 0))
        if converged and early_stop:
            break
    return DecodeResult((post >= 0).astype(np.uint8), it, converged, post)
