from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

L_MAX = 50.0


@dataclass
class DecodeResult:
    """Outcome of decoding one frame.

    ``bit_errors`` is filled in when the caller knows the transmitted
    info bits (see :meth:`score`).
    """

    info_bits: np.ndarray
    iterations: int
    converged: bool
    posteriors: np.ndarray | None = None
    bit_errors: int | None = None

    def score(self, reference) -> DecodeResult:
        reference = np.asarray(reference, dtype=np.uint8)
        if reference.shape != self.info_bits.shape:
            raise ValueError("reference length does not match decoded info bits")
        self.bit_errors = int(np.count_nonzero(self.info_bits != reference))
        return self

    @property
    def ber(self) -> float:
        if self.bit_errors is None:
            raise ValueError("frame not scored against a reference")
        return self.bit_errors / self.info_bits.size


def clopper_pearson(errors: int, trials: int, conf: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    a = 1.0 - conf
    lo = 0.0 if errors == 0 else float(beta.ppf(a / 2, errors, trials - errors + 1))
    hi = 1.0 if errors == trials else float(beta.ppf(1 - a / 2, errors + 1, trials - errors))
    return lo, hi


@dataclass(frozen=True)
class PostFecBer:
    ber: float
    errors: int
    bits: int
    frames: int
    frame_errors: int
    ci: tuple[float, float]


def post_fec_ber(results, references=None, conf: float = 0.95) -> PostFecBer:
    """Aggregate post-FEC BER over decoded frames with a Clopper-Pearson interval.

    ``references`` (one info-bit vector per frame) scores unscored results.
    """
    results = list(results)
    if not results:
        raise ValueError("need at least one frame")
    if references is not None:
        references = list(references)
        if len(references) != len(results):
            raise ValueError("one reference per frame required")
        for r, ref in zip(results, references):
            r.score(ref)
    errors = 0
    bits = 0
    frame_errors = 0
    for r in results:
        if r.bit_errors is None:
            raise ValueError("unscored frame; pass references")
        errors += r.bit_errors
        bits += r.info_bits.size
        frame_errors += r.bit_errors > 0
    return PostFecBer(errors / bits, errors, bits, len(results), frame_errors, clopper_pearson(errors, bits, conf))


def interleaver_permutation(n: int, seed) -> np.ndarray:
    """Seeded Fisher-Yates permutation of range(n)."""
    if n < 2:
        return np.arange(n, dtype=np.int64)
    perm = list(range(n))
    rng = np.random.default_rng(seed)
    spans = np.arange(n, 1, -1)  # i + 1 for i = n-1 .. 1
    picks = (rng.random(n - 1) * spans).astype(np.int64).tolist()
    for i, j in zip(range(n - 1, 0, -1), picks):
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def interleave(bits, seed=None, perm=None) -> np.ndarray:
    """out[i] = bits[perm[i]]."""
    bits = np.asarray(bits)
    if perm is None:
        perm = interleaver_permutation(bits.size, seed)
    return bits[perm]


def deinterleave(bits, seed=None, perm=None) -> np.ndarray:
    bits = np.asarray(bits)
    if perm is None:
        perm = interleaver_permutation(bits.size, seed)
    out = np.empty_like(bits)
    out[perm] = bits
    return out
