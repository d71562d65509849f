"""Dual-polarization WDM fiber link: RRC shaping, split-step propagation,
EDFA and a data-aided coherent receiver.

Field convention: dA/dz = -(alpha/2) A - i(beta2/2) d2A/dt2 + i gamma N(A) A,
with numpy's FFT sign, so a step h of the linear part multiplies the
spectrum by exp((i beta2/2 w^2 - alpha/2) h). Powers are in W, lengths in
m, times in s internally; the parameter record uses lab units.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from numba import njit
from scipy.constants import c as C_LIGHT
from scipy.constants import h as PLANCK


class FiberError(ValueError):
    pass


@dataclass(frozen=True)
class FiberParams:
    """Link parameters (single span, one EDFA at the receiver).

    ``coupling`` is "coupled" (x sees |u_x|^2 + 2/3 |u_y|^2) or "manakov"
    (8/9 of the total power). ``precision`` "single" runs the split-step
    loop in complex64.
    """

    attenuation_db_km: float = 0.2
    dispersion_ps_nm_km: float = 17.0
    gamma_w_km: float = 1.2
    span_length_km: float = 100.0
    pmd_ps_sqrt_km: float = 0.0
    symbol_rate_gbaud: float = 32.0
    nf_db: float = 3.0
    n_channels: int = 3
    spacing_ghz: float = 50.0
    rolloff: float = 0.01
    step_m: float = 100.0
    oversampling: int = 8
    launch_power_dbm: float = 0.0
    n_symbols: int = 1 << 14
    carrier_thz: float = 193.4
    coupling: str = "coupled"
    precision: str = "double"
    noise: bool = True

    def __post_init__(self):
        for name in ("attenuation_db_km", "dispersion_ps_nm_km", "gamma_w_km"):
            if getattr(self, name) < 0:
                raise FiberError(f"{name} must be non-negative")
        for name in ("span_length_km", "symbol_rate_gbaud", "spacing_ghz", "step_m", "carrier_thz", "nf_db"):
            if not getattr(self, name) > 0:
                raise FiberError(f"{name} must be positive")
        if self.pmd_ps_sqrt_km != 0:
            raise FiberError("PMD is not modelled; pmd_ps_sqrt_km must be 0")
        if not 0 <= self.rolloff <= 1:
            raise FiberError("rolloff must lie in [0, 1]")
        if self.oversampling < 2:
            raise FiberError("oversampling must be at least 2")
        if self.n_channels < 1 or self.n_symbols < 2:
            raise FiberError("need at least one channel and two symbols")
        if self.step_m > 1000:
            raise FiberError("step must not exceed 1 km")
        steps = self.span_length_km * 1e3 / self.step_m
        if abs(steps - round(steps)) > 1e-6:
            raise FiberError("step size must divide the span length")
        if self.coupling not in ("coupled", "manakov"):
            raise FiberError(f"unknown coupling {self.coupling!r}")
        if self.precision not in ("double", "single"):
            raise FiberError(f"unknown precision {self.precision!r}")

    # ---- derived quantities (SI)

    @property
    def alpha(self) -> float:
        """Power attenuation coefficient in 1/m."""
        return self.attenuation_db_km / (10 * math.log10(math.e)) / 1e3

    @property
    def beta2(self) -> float:
        """GVD in s^2/m from D: beta2 = -D lambda^2 / (2 pi c)."""
        lam = C_LIGHT / (self.carrier_thz * 1e12)
        D = self.dispersion_ps_nm_km * 1e-6  # ps/(nm km) -> s/m^2
        return -D * lam**2 / (2 * math.pi * C_LIGHT)

    @property
    def gamma(self) -> float:
        return self.gamma_w_km * 1e-3

    @property
    def span_m(self) -> float:
        return self.span_length_km * 1e3

    @property
    def n_steps(self) -> int:
        return int(round(self.span_m / self.step_m))

    @property
    def symbol_rate(self) -> float:
        return self.symbol_rate_gbaud * 1e9

    @property
    def sample_rate(self) -> float:
        return self.oversampling * self.symbol_rate

    @property
    def n_samples(self) -> int:
        return self.oversampling * self.n_symbols

    @property
    def span_gain(self) -> float:
        """Linear power gain that restores the span loss."""
        return 10 ** (self.attenuation_db_km * self.span_length_km / 10)

    @property
    def n_sp(self) -> float:
        """Spontaneous emission factor implied by the noise figure at the span gain."""
        G = self.span_gain
        nf = 10 ** (self.nf_db / 10)
        return nf / 2 if G == 1 else nf * G / (2 * (G - 1))

    @property
    def power_per_pol(self) -> float:
        return 10 ** (self.launch_power_dbm / 10) * 1e-3 / 2

    def channel_offsets(self) -> np.ndarray:
        """Carrier offsets (Hz) of the WDM grid, centred on the middle channel."""
        idx = np.arange(self.n_channels) - (self.n_channels - 1) / 2
        return idx * self.spacing_ghz * 1e9

    @property
    def center_channel(self) -> int:
        return self.n_channels // 2

    def replace(self, **kw) -> FiberParams:
        return dataclasses.replace(self, **kw)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> FiberParams:
        data = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise FiberError(f"unknown fiber parameters: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> FiberParams:
        return cls.from_json(Path(path).read_text())

    @classmethod
    def full_preset(cls, **kw) -> FiberParams:
        """Eleven channels on the 50 GHz grid; needs about 18 samples/symbol to fit."""
        base = dict(n_channels=11, oversampling=18, n_symbols=1 << 15)
        base.update(kw)
        return cls(**base)


def noise_figure_db(n_sp: float, gain: float) -> float:
    return 10 * math.log10(2 * n_sp * (gain - 1) / gain)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Sampled field, shape (2, N): rows are the x and y polarizations."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 2 or s.shape[0] != 2:
            raise FiberError(f"waveform must have shape (2, N), got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise FiberError("waveform has non-finite samples")
        if not self.sample_rate > 0:
            raise FiberError("sample rate must be positive")

    @property
    def x(self) -> np.ndarray:
        return self.samples[0]

    @property
    def y(self) -> np.ndarray:
        return self.samples[1]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def power(self) -> float:
        """Mean total power (both polarizations), W."""
        return float(np.sum(np.mean(np.abs(self.samples) ** 2, axis=1)))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2)) / self.sample_rate


# ------------------------------------------------------------ waveform IO

_MAGIC = b"CMWF"
_HEADER = struct.Struct("<4sIIQd")  # magic, version, n_pol, length, sample rate


def write_waveform(w: Waveform, path) -> None:
    data = np.ascontiguousarray(w.samples, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, data.shape[0], data.shape[1], float(w.sample_rate)))
        fh.write(data.tobytes())


def read_waveform(path) -> Waveform:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FiberError("file too short for a waveform header")
    magic, version, n_pol, length, fs = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise FiberError("not a waveform file")
    body = raw[_HEADER.size :]
    if len(body) != n_pol * length * 16:
        raise FiberError("waveform length does not match header")
    data = np.frombuffer(body, dtype="<c16").reshape(n_pol, length).astype(np.complex128)
    return Waveform(data, fs)


# ------------------------------------------------------------ transmitter


def raised_cosine_spectrum(f, symbol_rate: float, rolloff: float) -> np.ndarray:
    """Raised-cosine spectrum P(f) with P(0) = 1."""
    f = np.abs(np.asarray(f, dtype=float))
    T = 1.0 / symbol_rate
    f1 = (1 - rolloff) / (2 * T)
    f2 = (1 + rolloff) / (2 * T)
    out = np.zeros_like(f)
    out[f <= f1] = 1.0
    if rolloff > 0:
        band = (f > f1) & (f <= f2)
        out[band] = 0.5 * (1 + np.cos(math.pi * T / rolloff * (f[band] - f1)))
    return out


def _freqs(p: FiberParams) -> np.ndarray:
    return np.fft.fftfreq(p.n_samples, 1.0 / p.sample_rate)


def _bin_shift(offset: float, p: FiberParams) -> int:
    df = p.sample_rate / p.n_samples
    k = offset / df
    if abs(k - round(k)) > 1e-6:
        raise FiberError(
            f"channel offset {offset / 1e9:g} GHz is not a whole number of "
            f"{df / 1e6:g} MHz bins; pick n_symbols to make it one"
        )
    return int(round(k))


def check_grid(p: FiberParams) -> None:
    edge = np.max(np.abs(p.channel_offsets())) + (1 + p.rolloff) * p.symbol_rate / 2
    if edge > p.sample_rate / 2:
        raise FiberError(
            f"WDM grid spans +-{edge / 1e9:.2f} GHz but sampling covers only "
            f"+-{p.sample_rate / 2e9:.2f} GHz; raise oversampling"
        )


def rrc_shape(symbols, p: FiberParams) -> Waveform:
    """Shape symbols of shape (n_channels, 2, n_symbols) into the WDM field.

    Unit-energy symbols give each channel the launch power (split evenly
    over polarizations). Filtering is circular, so the block is periodic.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.shape != (p.n_channels, 2, p.n_symbols):
        raise FiberError(f"symbols must have shape {(p.n_channels, 2, p.n_symbols)}, got {symbols.shape}")
    check_grid(p)
    os_ = p.oversampling
    H = os_ * np.sqrt(raised_cosine_spectrum(_freqs(p), p.symbol_rate, p.rolloff))
    spec = np.zeros((2, p.n_samples), dtype=np.complex128)
    for ch, off in enumerate(p.channel_offsets()):
        up = np.zeros((2, p.n_samples), dtype=np.complex128)
        up[:, ::os_] = symbols[ch]
        spec += np.roll(np.fft.fft(up, axis=1) * H, _bin_shift(off, p), axis=1)
    field = np.fft.ifft(spec, axis=1) * math.sqrt(p.power_per_pol)
    return Waveform(field, p.sample_rate)


# ------------------------------------------------------------ propagation


@njit(cache=True)
def _nonlinear(u, g_h, self_w, cross_w):
    # u_x *= exp(i g h (a|u_x|^2 + b|u_y|^2)), and symmetrically for u_y
    for t in range(u.shape[1]):
        x, y = u[0, t], u[1, t]
        px = x.real * x.real + x.imag * x.imag
        py = y.real * y.real + y.imag * y.imag
        phx = g_h * (self_w * px + cross_w * py)
        phy = g_h * (self_w * py + cross_w * px)
        u[0, t] = x * complex(math.cos(phx), math.sin(phx))
        u[1, t] = y * complex(math.cos(phy), math.sin(phy))


_COUPLING = {"coupled": (1.0, 2.0 / 3.0), "manakov": (8.0 / 9.0, 8.0 / 9.0)}


def ssfm_propagate(w: Waveform, p: FiberParams, length_m: float | None = None, step_m: float | None = None) -> Waveform:
    """Symmetric split-step propagation over ``length_m`` (default: one span).

    Each step is half linear, full nonlinear, half linear; consecutive
    half steps are merged.
    """
    L = p.span_m if length_m is None else float(length_m)
    h = p.step_m if step_m is None else float(step_m)
    if h > 1000:
        raise FiberError("step must not exceed 1 km")
    n_steps = int(round(L / h))
    if n_steps < 1 or abs(n_steps * h - L) > 1e-6 * max(L, 1.0):
        raise FiberError("step size must divide the propagation length")
    cdtype, rdtype = (np.complex64, np.float32) if p.precision == "single" else (np.complex128, np.float64)
    omega = 2 * math.pi * np.fft.fftfreq(w.n, 1.0 / w.sample_rate)
    lin = 1j * p.beta2 / 2 * omega**2 - p.alpha / 2
    half = np.exp(lin * h / 2).astype(cdtype)
    full = np.exp(lin * h).astype(cdtype)
    self_w, cross_w = _COUPLING[p.coupling]

    U = sfft.fft(w.samples.astype(cdtype), axis=1) * half
    for i in range(n_steps):
        u = sfft.ifft(U, axis=1, overwrite_x=True)
        _nonlinear(u, rdtype(p.gamma * h), rdtype(self_w), rdtype(cross_w))
        U = sfft.fft(u, axis=1, overwrite_x=True)
        U *= full if i < n_steps - 1 else half
    out = sfft.ifft(U, axis=1).astype(np.complex128)
    if not np.all(np.isfinite(out)):
        raise FiberError("split-step propagation became unstable (non-finite samples)")
    return Waveform(out, w.sample_rate)


def ase_variance(p: FiberParams) -> float:
    """Per-polarization ASE sample variance: n_sp (G-1) h nu times the sample rate."""
    G = p.span_gain
    return p.n_sp * (G - 1) * PLANCK * p.carrier_thz * 1e12 * p.sample_rate


def edfa(w: Waveform, p: FiberParams, rng=None) -> Waveform:
    """Restore the span loss and add white circular Gaussian ASE (if enabled)."""
    out = w.samples * math.sqrt(p.span_gain)
    if p.noise:
        rng = np.random.default_rng(rng)
        sigma = math.sqrt(ase_variance(p) / 2)
        out = out + sigma * (rng.standard_normal(out.shape) + 1j * rng.standard_normal(out.shape))
    return Waveform(out, w.sample_rate)


# --------------------------------------------------------------- receiver


def edc(w: Waveform, p: FiberParams, length_m: float | None = None) -> Waveform:
    """Undo the accumulated dispersion (loss is left to the amplifier)."""
    L = p.span_m if length_m is None else float(length_m)
    omega = 2 * math.pi * np.fft.fftfreq(w.n, 1.0 / w.sample_rate)
    H = np.exp(-1j * p.beta2 / 2 * omega**2 * L)
    return Waveform(np.fft.ifft(np.fft.fft(w.samples, axis=1) * H, axis=1), w.sample_rate)


def matched_filter(w: Waveform, p: FiberParams, channel: int | None = None) -> np.ndarray:
    """Shift the chosen channel to baseband, RRC-filter and take one sample per symbol."""
    channel = p.center_channel if channel is None else channel
    off = p.channel_offsets()[channel]
    spec = np.roll(np.fft.fft(w.samples, axis=1), -_bin_shift(off, p), axis=1)
    spec *= np.sqrt(raised_cosine_spectrum(np.fft.fftfreq(w.n, 1.0 / w.sample_rate), p.symbol_rate, p.rolloff))
    return np.fft.ifft(spec, axis=1)[:, :: p.oversampling]


def phase_compensate(rx, tx) -> tuple[np.ndarray, dict]:
    """Remove, per transmitted constellation point, the mean phase rotation.

    Returns the compensated symbols and {point: theta}.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    tx = np.asarray(tx, dtype=np.complex128)
    if rx.shape != tx.shape:
        raise FiberError(f"received {rx.shape} and transmitted {tx.shape} shapes differ")
    pts, inv = np.unique(tx.ravel(), return_inverse=True)
    acc = np.zeros(pts.size, dtype=np.complex128)
    np.add.at(acc, inv, rx.ravel() * np.conj(tx.ravel()))
    theta = np.angle(acc)
    out = (rx.ravel() * np.exp(-1j * theta[inv])).reshape(rx.shape)
    return out, dict(zip(pts.tolist(), theta.tolist()))


def receiver_dsp(w: Waveform, p: FiberParams, tx_symbols, channel: int | None = None) -> np.ndarray:
    """EDC, channel selection, matched filter, downsampling, power
    normalization and data-aided phase compensation.

    ``tx_symbols`` has shape (2, n_symbols); the result has the same shape
    on the transmit constellation's scale.
    """
    tx_symbols = np.asarray(tx_symbols)
    if tx_symbols.shape != (2, w.n // p.oversampling) or w.n % p.oversampling:
        raise FiberError(f"transmitted symbols {tx_symbols.shape} do not match a waveform of {w.n} samples")
    y = matched_filter(edc(w, p), p, channel) / math.sqrt(p.power_per_pol)
    y, _ = phase_compensate(y, tx_symbols)
    return y


def effective_snr(rx, tx) -> float:
    """rho = E|X|^2 / E|Y - X|^2."""
    rx = np.asarray(rx, dtype=np.complex128)
    tx = np.asarray(tx, dtype=np.complex128)
    if rx.shape != tx.shape:
        raise FiberError("received and transmitted sequences differ in shape")
    err = np.mean(np.abs(rx - tx) ** 2)
    sig = np.mean(np.abs(tx) ** 2)
    if err <= 1e-30 * max(sig, 1e-300):
        raise FiberError("zero error power: effective SNR is unbounded")
    return float(sig / err)


def simulate_link(symbols, p: FiberParams, rng=None, channel: int | None = None) -> np.ndarray:
    """Full chain for one block: shape, propagate one span, amplify, receive."""
    w = rrc_shape(symbols, p)
    w = edfa(ssfm_propagate(w, p), p, rng)
    channel = p.center_channel if channel is None else channel
    return receiver_dsp(w, p, np.asarray(symbols)[channel], channel)
