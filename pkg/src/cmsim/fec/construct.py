"""Irregular repeat-accumulate parity-check matrices.

H = [H_i | H_p], where H_p is the dual-diagonal accumulator (check i
touches parity bits i-1 and i) and the information columns are placed
greedily, lowest-degree checks first, avoiding length-4 cycles when
possible. Used to generate the bundled alist files.
"""

from __future__ import annotations

import numpy as np

from .ldpc import LdpcCode


def degree_sequence(k: int, profile: dict[int, float]) -> list[int]:
    """Column degrees for k info bits from a {degree: fraction} profile, highest first."""
    degs = sorted(profile, reverse=True)
    counts = [int(round(profile[d] * k)) for d in degs]
    counts[-1] = k - sum(counts[:-1])
    out: list[int] = []
    for d, c in zip(degs, counts):
        out += [d] * c
    return out


def _ira_columns(n: int, k: int, info_degrees, rng) -> list[np.ndarray]:
    m = n - k
    load = np.zeros(m, dtype=np.int64)
    near: list[set[int]] = [set() for _ in range(m)]  # checks sharing a column
    parity_cols = []
    for j in range(m):
        rows = [j, j + 1] if j + 1 < m else [j]
        parity_cols.append(np.array(rows))
        load[rows] += 1
        if len(rows) == 2:
            near[j].add(j + 1)
            near[j + 1].add(j)

    info_cols = []
    for d in info_degrees:
        chosen: list[int] = []
        banned: set[int] = set()
        for _ in range(d):
            free = np.ones(m, dtype=bool)
            free[list(banned | set(chosen))] = False
            if not free.any():
                free = np.ones(m, dtype=bool)
                free[chosen] = False
            cand = np.flatnonzero(free)
            low = cand[load[cand] == load[cand].min()]
            r = int(rng.choice(low))
            chosen.append(r)
            banned |= near[r]
        for a in chosen:
            load[a] += 1
            near[a].update(b for b in chosen if b != a)
        info_cols.append(np.array(sorted(chosen)))
    return info_cols + parity_cols


def ira_code(n: int, k: int, info_degrees, seed: int = 0, name: str = "ira") -> LdpcCode:
    """Build an IRA code. Redraws until the all-ones word is not a codeword."""
    rng = np.random.default_rng(seed)
    if len(info_degrees) != k:
        raise ValueError("need one degree per info bit")
    for _ in range(100):
        cols = _ira_columns(n, k, info_degrees, rng)
        code = LdpcCode(n, n - k, cols, name=name)
        if np.any(code.row_weights % 2):
            return code
    raise RuntimeError("could not avoid the all-ones codeword")


def count_four_cycles(code: LdpcCode) -> int:
    H = code.dense().astype(np.int64)
    overlap = H @ H.T
    np.fill_diagonal(overlap, 0)
    pairs = overlap * (overlap - 1) // 2
    return int(pairs.sum() // 2)
