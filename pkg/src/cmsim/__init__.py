"""Coded-modulation simulation: QAM, soft demapping, MI/GMI, LDPC and turbo
decoding, a split-step fiber channel and sweep tooling."""

from .constellation import Constellation, build_8qam, build_square_qam, get_constellation
from .demapper import LlrFrame, demap, hard_decide, llr_exact, llr_maxlog, pre_fec_ber
from .rates import RateEstimate, estimate_gmi, estimate_mi_awgn, optimize_s, symmetrized_pdf

__version__ = "0.1.0"

__all__ = [
    "Constellation",
    "LlrFrame",
    "RateEstimate",
    "build_8qam",
    "build_square_qam",
    "demap",
    "estimate_gmi",
    "estimate_mi_awgn",
    "get_constellation",
    "hard_decide",
    "llr_exact",
    "llr_maxlog",
    "optimize_s",
    "pre_fec_ber",
    "symmetrized_pdf",
]
