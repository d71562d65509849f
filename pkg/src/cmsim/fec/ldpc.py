"""Binary LDPC codes: alist I/O, GF(2) encoding and sum-product decoding."""

from __future__ import annotations

import math
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from numba import njit

from .common import L_MAX, DecodeResult


class AlistError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


class LdpcCode:
    """Parity-check code described by the row sets of every column of H.

    ``k_info = n - m`` requires H to have full row rank, which is checked
    when the encoder is first built.
    """

    def __init__(self, n: int, m: int, col_rows: list[np.ndarray], name: str = "ldpc"):
        self.n = n
        self.m = m
        self.name = name
        self.col_rows = [np.asarray(r, dtype=np.int64) for r in col_rows]
        row_cols: list[list[int]] = [[] for _ in range(m)]
        for j, rows in enumerate(self.col_rows):
            for i in rows:
                row_cols[i].append(j)
        self.row_cols = [np.asarray(c, dtype=np.int64) for c in row_cols]

        # check-major edge list for the decoder
        self._chk_ptr = np.zeros(m + 1, dtype=np.int64)
        self._chk_ptr[1:] = np.cumsum([c.size for c in self.row_cols])
        self._edge_var = np.concatenate(self.row_cols) if m else np.empty(0, np.int64)
        order = np.argsort(self._edge_var, kind="stable")
        self._var_edges = order.astype(np.int64)
        self._var_ptr = np.zeros(n + 1, dtype=np.int64)
        self._var_ptr[1:] = np.cumsum(np.bincount(self._edge_var, minlength=n))

    @property
    def k_info(self) -> int:
        return self.n - self.m

    @property
    def n_code(self) -> int:
        return self.n

    @property
    def rate(self) -> float:
        return self.k_info / self.n

    @property
    def col_weights(self) -> np.ndarray:
        return np.array([r.size for r in self.col_rows])

    @property
    def row_weights(self) -> np.ndarray:
        return np.array([c.size for c in self.row_cols])

    def dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for j, rows in enumerate(self.col_rows):
            H[rows, j] = 1
        return H

    def syndrome(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint8)
        return np.array([np.bitwise_xor.reduce(c[cols]) if cols.size else 0 for cols in self.row_cols], dtype=np.uint8)

    @cached_property
    def _encoder(self):
        return _systematic_form(self.dense())

    @property
    def info_positions(self) -> np.ndarray:
        return self._encoder[0]

    def encode(self, info_bits) -> np.ndarray:
        return ldpc_encode(self, info_bits)

    def decode(self, llrs, max_iter: int = 50, early_stop: bool = True) -> DecodeResult:
        return ldpc_decode(self, llrs, max_iter, early_stop)

    def __repr__(self) -> str:
        return f"LdpcCode({self.name!r}, n={self.n}, k={self.k_info})"


# ------------------------------------------------------------------ alist


def parse_alist(text: str, name: str = "ldpc") -> LdpcCode:
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        ints = [[int(t) for t in ln] for ln in lines]
    except ValueError as exc:
        raise AlistError(f"non-integer token: {exc}") from None
    if len(ints) < 4 or len(ints[0]) != 2 or len(ints[1]) != 2:
        raise AlistError("malformed alist header")
    n, m = ints[0]
    max_cw, max_rw = ints[1]
    if n <= 0 or m <= 0 or m >= n:
        raise AlistError(f"bad dimensions n={n}, m={m}")
    col_w, row_w = ints[2], ints[3]
    if len(col_w) != n or len(row_w) != m:
        raise AlistError("weight lines do not match n and m")
    if len(ints) != 4 + n + m:
        raise AlistError(f"expected {4 + n + m} non-empty lines, found {len(ints)}")
    if max(col_w) != max_cw or max(row_w) != max_rw:
        raise AlistError("maximum weight header does not match weight lists")
    if sum(col_w) != sum(row_w):
        raise AlistError("column and row weights count different edge totals")

    def entries(line, width, bound, what, idx):
        nz = [v for v in line if v != 0]
        if len(line) > width:
            raise AlistError(f"{what} {idx + 1}: more than {width} entries")
        if any(v < 0 or v > bound for v in line):
            raise AlistError(f"{what} {idx + 1}: index out of range 1..{bound}")
        if len(set(nz)) != len(nz):
            raise AlistError(f"{what} {idx + 1}: repeated index")
        return nz

    col_rows = []
    for j in range(n):
        nz = entries(ints[4 + j], max_cw, m, "column", j)
        if len(nz) != col_w[j]:
            raise AlistError(f"column {j + 1}: weight {len(nz)} but header says {col_w[j]}")
        col_rows.append(np.array(sorted(v - 1 for v in nz), dtype=np.int64))
    edges_from_rows = set()
    for i in range(m):
        nz = entries(ints[4 + n + i], max_rw, n, "row", i)
        if len(nz) != row_w[i]:
            raise AlistError(f"row {i + 1}: weight {len(nz)} but header says {row_w[i]}")
        edges_from_rows.update((i, v - 1) for v in nz)
    edges_from_cols = {(int(i), j) for j, rows in enumerate(col_rows) for i in rows}
    if edges_from_rows != edges_from_cols:
        raise AlistError("row lists and column lists describe different matrices")
    return LdpcCode(n, m, col_rows, name=name)


def load_alist(path) -> LdpcCode:
    path = Path(path)
    return parse_alist(path.read_text(), name=path.stem)


def format_alist(code: LdpcCode) -> str:
    cw, rw = code.col_weights, code.row_weights
    max_cw, max_rw = int(cw.max()), int(rw.max())
    out = [f"{code.n} {code.m}", f"{max_cw} {max_rw}", " ".join(map(str, cw)), " ".join(map(str, rw))]
    for rows in code.col_rows:
        vals = [int(i) + 1 for i in sorted(rows)] + [0] * (max_cw - rows.size)
        out.append(" ".join(map(str, vals)))
    for cols in code.row_cols:
        vals = [int(j) + 1 for j in sorted(cols)] + [0] * (max_rw - cols.size)
        out.append(" ".join(map(str, vals)))
    return "\n".join(out) + "\n"


def write_alist(code: LdpcCode, path) -> None:
    Path(path).write_text(format_alist(code))


SHIPPED_CODES = {
    "toy12": "toy12.alist",
    "648-1/2": "ira648_r1_2.alist",
    "4096-1/2": "ira4096_r1_2.alist",
    "4096-3/4": "ira4096_r3_4.alist",
}


def shipped_code(key: str) -> LdpcCode:
    """Load one of the bundled codes: 'toy12', '648-1/2', '4096-1/2', '4096-3/4'."""
    try:
        fname = SHIPPED_CODES[key]
    except KeyError:
        raise KeyError(f"no shipped LDPC code {key!r}; have {sorted(SHIPPED_CODES)}") from None
    text = resources.files("cmsim").joinpath("data", fname).read_text()
    return parse_alist(text, name=key)


# --------------------------------------------------------------- encoding


def _systematic_form(H: np.ndarray):
    """Reduce H over GF(2), preferring pivots in the rightmost columns.

    Returns (info_cols, parity_cols, A) with parity bit parity_cols[r]
    equal to A[r] @ info (mod 2).
    """
    m, n = H.shape
    rev = H[:, ::-1]
    packed = np.packbits(rev, axis=1)
    pivots = []
    rank = 0
    for col in range(n):
        if rank == m:
            break
        byte, shift = col >> 3, 7 - (col & 7)
        colbits = (packed[:, byte] >> shift) & 1
        cand = np.flatnonzero(colbits[rank:])
        if cand.size == 0:
            continue
        p = rank + cand[0]
        if p != rank:
            packed[[rank, p]] = packed[[p, rank]]
            colbits[[rank, p]] = colbits[[p, rank]]
        others = np.flatnonzero(colbits)
        others = others[others != rank]
        if others.size:
            packed[others] ^= packed[rank]
        pivots.append(col)
        rank += 1
    if rank < m:
        raise RankDeficientError(f"parity-check matrix has rank {rank} < {m} rows")
    reduced = np.unpackbits(packed, axis=1, count=n)
    pivot_set = set(pivots)
    info_rev = [c for c in range(n) if c not in pivot_set]
    # back to original column order; keep info positions ascending
    info_cols = np.array(sorted(n - 1 - c for c in info_rev), dtype=np.int64)
    info_rev_sorted = [n - 1 - c for c in info_cols]
    parity_cols = np.array([n - 1 - c for c in pivots], dtype=np.int64)
    A = reduced[:, info_rev_sorted].astype(np.float32)
    return info_cols, parity_cols, A


def ldpc_encode(code: LdpcCode, info_bits) -> np.ndarray:
    """Encode k_info bits (or a (frames, k_info) array) into codewords."""
    info = np.asarray(info_bits, dtype=np.uint8)
    single = info.ndim == 1
    info2 = np.atleast_2d(info)
    if info2.shape[1] != code.k_info:
        raise ValueError(f"expected {code.k_info} info bits, got {info2.shape[1]}")
    info_cols, parity_cols, A = code._encoder
    parity = (info2.astype(np.float32) @ A.T).astype(np.int64) & 1
    cw = np.zeros((info2.shape[0], code.n), dtype=np.uint8)
    cw[:, info_cols] = info2
    cw[:, parity_cols] = parity
    return cw[0] if single else cw


# --------------------------------------------------------------- decoding


@njit(cache=True)
def _bp_kernel(llr, chk_ptr, edge_var, var_ptr, var_edges, max_iter, early_stop, lmax):
    # Works in the log(P0/P1) convention internally.
    n = llr.size
    m = chk_ptr.size - 1
    E = edge_var.size
    lch = np.empty(n)
    for v in range(n):
        x = -llr[v]
        lch[v] = min(max(x, -lmax), lmax)
    q = np.empty(E)
    for e in range(E):
        q[e] = lch[edge_var[e]]
    r = np.zeros(E)
    total = np.empty(n)
    hard = np.zeros(n, dtype=np.uint8)
    maxdeg = 1
    for c in range(m):
        maxdeg = max(maxdeg, chk_ptr[c + 1] - chk_ptr[c])
    t = np.empty(maxdeg)
    pre = np.empty(maxdeg)
    iters = 0
    converged = False
    for it in range(1, max_iter + 1):
        iters = it
        for c in range(m):
            s = chk_ptr[c]
            d = chk_ptr[c + 1] - s
            acc = 1.0
            for i in range(d):
                t[i] = math.tanh(0.5 * q[s + i])
                pre[i] = acc
                acc *= t[i]
            suf = 1.0
            for i in range(d - 1, -1, -1):
                p = pre[i] * suf
                suf *= t[i]
                if p >= 1.0:
                    val = lmax
                elif p <= -1.0:
                    val = -lmax
                else:
                    val = 2.0 * math.atanh(p)
                    val = min(max(val, -lmax), lmax)
                r[s + i] = val
        for v in range(n):
            tot = lch[v]
            for j in range(var_ptr[v], var_ptr[v + 1]):
                tot += r[var_edges[j]]
            total[v] = tot
            # L(P1/P0) = -tot >= 0 -> bit 1
            hard[v] = 1 if tot <= 0.0 else 0
            for j in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edges[j]
                x = tot - r[e]
                q[e] = min(max(x, -lmax), lmax)
        ok = True
        for c in range(m):
            par = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[edge_var[e]]
            if par:
                ok = False
                break
        converged = ok
        if ok and early_stop:
            break
    for v in range(n):
        total[v] = -total[v]
    return hard, total, iters, converged


def ldpc_decode(code: LdpcCode, llrs, max_iter: int = 50, early_stop: bool = True) -> DecodeResult:
    """Flooding sum-product decoding with tanh-rule check updates.

    ``llrs`` use the log(P1/P0) convention. ``early_stop=False`` always
    runs ``max_iter`` iterations.
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (code.n,):
        raise ValueError(f"expected {code.n} L-values, got shape {llrs.shape}")
    hard, post, iters, ok = _bp_kernel(
        llrs, code._chk_ptr, code._edge_var, code._var_ptr, code._var_edges, max_iter, early_stop, L_MAX
    )
    return DecodeResult(hard[code.info_positions].copy(), int(iters), bool(ok), post)
