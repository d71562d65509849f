"""Soft-decision FEC codecs.

Every codec exposes ``n_code``, ``k_info``, ``rate``, ``encode(info)`` and
``decode(llrs) -> DecodeResult``. L-values are log P(1)/P(0).
"""

from pathlib import Path

from .common import (
    DecodeResult,
    PostFecBer,
    clopper_pearson,
    deinterleave,
    interleave,
    interleaver_permutation,
    post_fec_ber,
)
from .ldpc import LdpcCode, load_alist, ldpc_decode, ldpc_encode, shipped_code, write_alist
from .turbo import SUPPORTED_RATES, TurboCode, turbo_decode, turbo_encode


def get_codec(spec: str, block: int = 20000, seed: int = 0):
    """Resolve 'ldpc:4096-1/2', 'ldpc:<file.alist>' or 'turbo:<rate>'."""
    family, _, arg = spec.partition(":")
    family = family.lower()
    if family == "ldpc":
        if arg.endswith(".alist") or Path(arg).exists():
            return load_alist(arg)
        return shipped_code(arg)
    if family == "turbo":
        return TurboCode(block, arg or "1/3", seed=seed)
    raise ValueError(f"unknown codec {spec!r}; use 'ldpc:<name|file>' or 'turbo:<rate>'")


__all__ = [
    "DecodeResult",
    "LdpcCode",
    "PostFecBer",
    "SUPPORTED_RATES",
    "TurboCode",
    "clopper_pearson",
    "deinterleave",
    "get_codec",
    "interleave",
    "interleaver_permutation",
    "ldpc_decode",
    "ldpc_encode",
    "load_alist",
    "post_fec_ber",
    "shipped_code",
    "turbo_decode",
    "turbo_encode",
    "write_alist",
]
