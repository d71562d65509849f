"""Monte-Carlo MI and GMI estimators, and the symmetrized L-value PDF.

All rates are in bits per symbol; L-values are in nats.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .constellation import Constellation
from .demapper import L_MAX, LlrFrame

LN2 = math.log(2.0)
S_BRACKET = (1e-3, 20.0)
S_TOL = 1e-4
DEFAULT_BINS = 2001
MIN_MI_SAMPLES = 1000

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RateEstimate:
    metric: str
    value: float
    n_samples: int
    std_err: float
    per_bit_terms: np.ndarray | None = None
    s_star: float | None = None
    s_at_boundary: bool = False

    @property
    def bits(self) -> float:
        return self.value


@dataclass(frozen=True)
class SymmetrizedPdf:
    """Histogram estimate of f_{L|B}(l|1) for symmetrized, mixed L-values."""

    bin_edges: np.ndarray
    density: np.ndarray
    n_samples: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def mass(self) -> np.ndarray:
        return self.density * self.widths

    def integral(self) -> float:
        return float(self.mass.sum())

    def mass_below_zero(self) -> float:
        """Integral of the density over (-inf, 0]; the pre-FEC BER for uniform bits."""
        edges = self.bin_edges
        mass = self.mass
        left, right = edges[:-1], edges[1:]
        total = mass[right <= 0].sum()
        straddle = (left < 0) & (right > 0)
        total += np.sum(mass[straddle] * (0 - left[straddle]) / (right - left)[straddle])
        return float(total)

    def zero_bin_mass(self) -> float:
        """Probability mass of the bin(s) touching l = 0."""
        edges = self.bin_edges
        touch = (edges[:-1] <= 0) & (edges[1:] >= 0)
        return float(self.mass[touch].max())


# --------------------------------------------------------------------- MI


def _mi_terms(z: np.ndarray, rho: float, points: np.ndarray) -> np.ndarray:
    """Per-noise-sample value log2 M - (1/M) sum_i log2 f_{i,l}."""
    M = points.size
    diff = points[:, None] - points[None, :]  # x_i - x_j
    dist2 = np.abs(diff) ** 2
    out = np.empty(z.size)
    chunk = max(1, (1 << 20) // (M * M))
    for start in range(0, z.size, chunk):
        zc = z[start : start + chunk]
        # |x_i - x_j + z|^2 - |z|^2 = |x_i - x_j|^2 + 2 Re{(x_i - x_j)^* z}
        cross = 2.0 * (diff.real[None] * zc.real[:, None, None] + diff.imag[None] * zc.imag[:, None, None])
        log_f = logsumexp(-rho * (dist2[None] + cross), axis=2)  # (chunk, M), nats
        out[start : start + chunk] = math.log2(M) - log_f.mean(axis=1) / LN2
    return out


def estimate_mi_awgn(c: Constellation, rho: float, n: int, seed=None) -> RateEstimate:
    """MI of a uniform-input constellation on the complex AWGN channel.

    Uses n noise draws shared across all M transmitted points; the
    standard error comes from the spread of the per-draw terms.
    """
    if not rho > 0:
        raise ValueError(f"SNR must be positive, got {rho}")
    if n < MIN_MI_SAMPLES:
        raise ValueError(f"need at least {MIN_MI_SAMPLES} samples, got {n}")
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(0.5 / rho)
    z = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    terms = _mi_terms(z, rho, c.points)
    return RateEstimate("mi", float(terms.mean()), n, float(terms.std(ddof=1) / math.sqrt(n)))


def estimate_mi_samples(y, tx_index, rho: float, c: Constellation) -> RateEstimate:
    """MI estimate from received samples under a Gaussian channel model.

    ``tx_index`` are the transmitted point indices. On a non-AWGN channel
    this is the rate of a receiver that assumes AWGN with SNR ``rho``.
    """
    if not rho > 0:
        raise ValueError(f"SNR must be positive, got {rho}")
    y = np.asarray(y, dtype=np.complex128).ravel()
    tx_index = np.asarray(tx_index).ravel()
    if y.size != tx_index.size or y.size == 0:
        raise ValueError("need equally many, non-zero samples and indices")
    out = np.empty(y.size)
    pts = c.points
    for start in range(0, y.size, 8192):
        sl = slice(start, start + 8192)
        d = -rho * np.abs(y[sl, None] - pts[None, :]) ** 2
        own = d[np.arange(d.shape[0]), tx_index[sl]]
        out[sl] = math.log2(c.M) - (logsumexp(d, axis=1) - own) / LN2
    return RateEstimate("mi", float(out.mean()), y.size, float(out.std(ddof=1) / math.sqrt(y.size)) if y.size > 1 else 0.0)


# -------------------------------------------------------------------- GMI


def golden_section_max(f, a: float, b: float, tol: float = S_TOL):
    """Maximize a unimodal f on [a, b]. Returns (x, f(x))."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _aligned(frame: LlrFrame) -> np.ndarray:
    # (-1)^c * lambda
    return np.where(frame.bits == 1, -frame.llrs, frame.llrs)


def _per_symbol_gmi(v: np.ndarray, s: float) -> np.ndarray:
    # m - sum_k log2(1 + exp(s (-1)^c lambda)), one value per symbol
    return v.shape[0] - np.logaddexp(0.0, s * v).sum(axis=0) / LN2


def gmi_objective(frame: LlrFrame, s: float) -> float:
    """Sample-mean GMI for a fixed s (the quantity maximized over s)."""
    return float(_per_symbol_gmi(_aligned(frame), s).mean())


@dataclass(frozen=True)
class SOptimum:
    s_star: float
    value: float
    at_boundary: bool


def optimize_s(frame: LlrFrame, bracket=S_BRACKET, tol: float = S_TOL) -> SOptimum:
    """Golden-section search for the s maximizing the GMI (concave in s)."""
    v = _aligned(frame)
    lo, hi = bracket
    s, val = golden_section_max(lambda s: float(_per_symbol_gmi(v, s).mean()), lo, hi, tol)
    at_edge = (s - lo) < 2 * tol or (hi - s) < 2 * tol
    if at_edge and np.any(v):
        warnings.warn(f"optimal s={s:.4g} at search bracket boundary", RuntimeWarning, stacklevel=2)
    return SOptimum(s, val, at_edge)


def estimate_gmi(frame: LlrFrame, s: float | None = None) -> RateEstimate:
    """GMI estimate from L-values and transmitted bits.

    Exact L-values use s = 1; max-log L-values are scaled by the s found
    with :func:`optimize_s`. Passing ``s`` forces a fixed value.
    """
    if frame.llrs.size == 0:
        raise ValueError("empty frame")
    at_edge = False
    if s is None:
        if frame.kind == "exact":
            s = 1.0
        else:
            opt = optimize_s(frame)
            s, at_edge = opt.s_star, opt.at_boundary
    v = _aligned(frame)
    terms = np.logaddexp(0.0, s * v) / LN2  # (m, n)
    per_bit = 1.0 - terms.mean(axis=1)
    per_symbol = frame.m - terms.sum(axis=0)
    n = frame.n
    std = float(per_symbol.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return RateEstimate("gmi", float(per_bit.sum()), n, std, per_bit, float(s), at_edge)


# ------------------------------------------------------- symmetrized PDF


def symmetrized_pdf(frame: LlrFrame, n_bins: int = DEFAULT_BINS, l_max: float = L_MAX) -> SymmetrizedPdf:
    """Histogram of the symmetrized, bit-mixed L-values, conditioned on bit 1.

    Each L-value enters as +L when its bit is 1 and -L when its bit is 0,
    pooled over all bit positions. Values outside [-l_max, l_max] land in
    the outermost bins. With an odd bin count a bin is centred on 0.
    """
    if n_bins < 2:
        raise ValueError("need at least 2 bins")
    if frame.llrs.size == 0:
        raise ValueError("empty frame")
    v = np.where(frame.bits == 1, frame.llrs, -frame.llrs).ravel()
    edges = np.linspace(-l_max, l_max, n_bins + 1)
    counts, _ = np.histogram(np.clip(v, -l_max, l_max), bins=edges)
    density = counts / (v.size * np.diff(edges))
    return SymmetrizedPdf(edges, density, v.size)


def gmi_from_pdf(pdf: SymmetrizedPdf, m: int) -> RateEstimate:
    """GMI = m * I(B; L) from a symmetrized PDF of exact L-values.

    Uses f(l|0) = f(-l|1). Only meaningful for exact L-values; for
    max-log L-values the identity does not hold.
    """
    edges = pdf.bin_edges
    if not np.allclose(edges, -edges[::-1], atol=1e-9 * max(1.0, abs(edges[-1]))):
        raise ValueError("PDF bins must be symmetric about 0")
    p1 = pdf.mass
    total = p1.sum()
    if not np.isfinite(total) or abs(total - 1.0) > 1e-6:
        raise ValueError(f"degenerate PDF: total mass {total}")
    p0 = p1[::-1]
    nz = p1 > 0
    info = float(np.sum(p1[nz] * np.log2(2.0 * p1[nz] / (p1[nz] + p0[nz]))))
    return RateEstimate("gmi", m * info, pdf.n_samples, float("nan"), s_star=1.0)


# --------------------------------------------------------------- output

RATE_CSV_HEADER = ["metric", "constellation", "rho_db", "value", "s_star", "n", "std_err"]


def rate_row(est: RateEstimate, constellation: str, rho_db: float) -> list:
    s = "" if est.s_star is None else repr(float(est.s_star))
    return [est.metric, constellation, repr(float(rho_db)), repr(float(est.value)), s, est.n_samples, repr(float(est.std_err))]


def write_rates_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATE_CSV_HEADER)
        w.writerows(rows)


def write_pdf_csv(pdf: SymmetrizedPdf, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_center", "density"])
        for x, d in zip(pdf.centers, pdf.density):
            w.writerow([repr(float(x)), repr(float(d))])
