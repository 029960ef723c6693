"""Sliding-window spectral analysis of EEG: from raw channels to a
beta-band cognitive-load time series.

The transform convention is the positive-exponent DFT

    C_k = sum_j c_j * exp(+2*pi*i*j*k / N),   k = 0..N-1

with a radix-2 Cooley-Tukey fast path for power-of-two N and a direct
O(N^2) fallback otherwise. Band powers are one-sided (bins 0..N/2, no
factor-2 doubling): P = (1/N) * sum |C_k|^2 over the band's bins. Bin
ranges are half-open on the right so that adjacent bands never share a
bin; the band reaching Nyquist additionally includes bin N/2. Power
ratios are therefore unaffected by the one-sided convention and sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import BandOutOfRange, ConfigError, ZeroPower
from .model import EegRecording


class WindowFn(str, Enum):
    #: half a cosine cycle over the window: sin(pi*(j+0.5)/N)
    HALF_COSINE = "sine"
    HANN = "hann"
    RECT = "rect"


@dataclass(frozen=True)
class Band:
    """Half-open frequency band [f1, f2) in Hz."""

    name: str
    f1: float
    f2: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.f1 < self.f2):
            raise ConfigError(f"band {self.name}: need 0 <= f1 < f2, "
                              f"got [{self.f1}, {self.f2})")


def default_bands(fs: float) -> tuple[Band, ...]:
    """Delta/Theta/Alpha/Beta split; Beta runs up to Nyquist."""
    if fs / 2 <= 14.0:
        raise ConfigError(f"fs={fs} too low for the default band split")
    return (
        Band("Delta", 0.0, 4.0),
        Band("Theta", 4.0, 8.0),
        Band("Alpha", 8.0, 14.0),
        Band("Beta", 14.0, fs / 2),
    )


@dataclass(frozen=True)
class AnalysisConfig:
    """Windowing and band parameters of the load pipeline.

    Defaults: 1024-sample windows (8 s at 128 Hz) sliding by 512 samples
    (50% overlap), half-cosine window function, per-window mean removal,
    Delta/Theta/Alpha/Beta bands derived from the recording rate.
    """

    window_len: int = 1024
    hop: int = 512
    window_fn: WindowFn = WindowFn.HALF_COSINE
    detrend: bool = True
    bands: Optional[tuple[Band, ...]] = None

    def __post_init__(self) -> None:
        if self.window_len < 1:
            raise ConfigError("window_len must be >= 1")
        if not 0 < self.hop <= self.window_len:
            raise ConfigError("need 0 < hop <= window_len")

    def bands_for(self, fs: float) -> tuple[Band, ...]:
        bands = self.bands if self.bands is not None else default_bands(fs)
        validate_bands(bands, fs)
        return bands


def validate_bands(bands: Sequence[Band], fs: float) -> None:
    """Bands must be ordered, disjoint and cover [0, fs/2] without gaps."""
    if not bands:
        raise ConfigError("band list is empty")
    if bands[0].f1 != 0.0:
        raise ConfigError("bands must start at 0 Hz")
    for a, b in zip(bands, bands[1:]):
        if a.f2 != b.f1:
            raise ConfigError(f"gap or overlap between {a.name} and {b.name}")
    if bands[-1].f2 != fs / 2:
        raise ConfigError(f"bands must end at Nyquist ({fs / 2} Hz), "
                          f"got {bands[-1].f2}")


@dataclass(frozen=True)
class Window:
    """One window of one channel; ``samples`` has length window_len."""

    channel: int
    start_sample: int
    start_t: float
    samples: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """DFT coefficients C_k, k = 0..N-1, plus the sampling rate."""

    coeffs: np.ndarray
    fs: float

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]


@dataclass(frozen=True)
class BandPowers:
    """Per-band spectral power and their total (summed in band order)."""

    powers: tuple[tuple[str, float], ...]
    total: float


@dataclass(frozen=True)
class LoadSeries:
    """Per-window cognitive-load values with their time spans.

    ``starts[i]`` is the window start time; every window spans
    ``window_s`` seconds. Windows where any channel had zero total power
    are dropped; ``dropped`` counts them.
    """

    starts: np.ndarray
    loads: np.ndarray
    window_s: float
    hop_s: float
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.loads)

    def spans(self) -> list[tuple[float, float]]:
        return [(float(t), float(t) + self.window_s) for t in self.starts]


# --- windowing ---------------------------------------------------------------

def window_count(n_samples: int, window_len: int, hop: int) -> int:
    """Number of full windows; trailing samples that cannot fill one drop."""
    if n_samples < window_len:
        return 0
    return (n_samples - window_len) // hop + 1


def make_windows(samples: np.ndarray, cfg: AnalysisConfig, fs: float,
                 t0: float = 0.0, channel: int = 0) -> list[Window]:
    """Slice one channel into equal-length windows starting at 0, hop, 2*hop, ..."""
    x = np.asarray(samples, dtype=np.float64)
    n = window_count(x.shape[0], cfg.window_len, cfg.hop)
    return [
        Window(channel, i * cfg.hop, t0 + (i * cfg.hop) / fs,
               x[i * cfg.hop:i * cfg.hop + cfg.window_len])
        for i in range(n)
    ]


@lru_cache(maxsize=32)
def _window_curve(kind: WindowFn, n: int) -> np.ndarray:
    j = np.arange(n, dtype=np.float64)
    if kind is WindowFn.HALF_COSINE:
        curve = np.sin(np.pi * (j + 0.5) / n)
    elif kind is WindowFn.HANN:
        curve = (0.5 * (1.0 - np.cos(2.0 * np.pi * j / (n - 1)))
                 if n > 1 else np.ones(1))
    else:
        curve = np.ones(n)
    curve.setflags(write=False)
    return curve


def apply_window_fn(w: Window, kind: WindowFn, detrend: bool = False) -> Window:
    """Taper a window; optionally subtract its mean first."""
    x = w.samples
    if detrend:
        x = x - x.mean()
    if kind is not WindowFn.RECT:
        x = x * _window_curve(kind, x.shape[0])
    elif not detrend:
        x = x.copy()
    return Window(w.channel, w.start_sample, w.start_t, x)


# --- transforms --------------------------------------------------------------

@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.zeros(n, dtype=np.intp)
    for i in range(n):
        r = 0
        v = i
        for _ in range(bits):
            r = (r << 1) | (v & 1)
            v >>= 1
        idx[i] = r
    idx.setflags(write=False)
    return idx


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 transform over the last axis (positive exponent).

    Accepts any batch shape (..., N) with N a power of two; the batched
    result is elementwise identical to transforming each row alone.
    """
    n = x.shape[-1]
    out = np.ascontiguousarray(x[..., _bit_reversal(n)], dtype=np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp((2j * np.pi / size) * np.arange(half))
        view = out.reshape(out.shape[:-1] + (n // size, size))
        upper = view[..., half:] * tw
        lower = view[..., :half].copy()
        view[..., :half] = lower + upper
        view[..., half:] = lower - upper
        size *= 2
    return out


def _dft_direct(x: np.ndarray) -> np.ndarray:
    """O(N^2) evaluation of the positive-exponent transform, any N."""
    n = x.shape[-1]
    j = np.arange(n)
    out = np.empty(x.shape, dtype=np.complex128)
    for k in range(n):
        out[..., k] = np.sum(x * np.exp((2j * np.pi * k / n) * j), axis=-1)
    return out


def _transform(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if n >= 2 and (n & (n - 1)) == 0:
        return _fft_pow2(x)
    return _dft_direct(np.asarray(x, dtype=np.complex128))


def dft(samples: np.ndarray, fs: float) -> Spectrum:
    """Transform one window of real or complex samples."""
    x = np.asarray(samples)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValueError("dft expects a non-empty 1-D sample vector")
    return Spectrum(_transform(x), float(fs))


# --- band powers -------------------------------------------------------------

def _band_bins(band: Band, n: int, fs: float) -> tuple[int, int]:
    """Half-open bin range [lo, hi) of a band; Nyquist bin joins the top band."""
    nyquist = fs / 2
    if band.f1 < 0 or band.f2 > nyquist:
        raise BandOutOfRange(f"band [{band.f1}, {band.f2}) outside [0, {nyquist}]")
    lo = int(np.floor(band.f1 * n / fs))
    hi = int(np.floor(band.f2 * n / fs))
    if band.f2 == nyquist:
        hi = n // 2 + 1
    return lo, hi


def _band_power_batch(power_bins: np.ndarray, band: Band, n: int,
                      fs: float) -> np.ndarray:
    lo, hi = _band_bins(band, n, fs)
    return power_bins[..., lo:hi].sum(axis=-1)


def spectral_power(s: Spectrum, band: Band) -> float:
    """(1/N) * sum |C_k|^2 over the band's bins."""
    lo, hi = _band_bins(band, s.n, s.fs)
    return float(np.sum(np.abs(s.coeffs[lo:hi]) ** 2) / s.n)


def band_powers(s: Spectrum, bands: Sequence[Band]) -> BandPowers:
    powers = tuple((b.name, spectral_power(s, b)) for b in bands)
    total = 0.0
    for _, p in powers:
        total += p
    return BandPowers(powers, total)


def band_ratios(s: Spectrum, bands: Sequence[Band]) -> dict[str, float]:
    """Per-band share of the total power across ``bands``; sums to 1."""
    bp = band_powers(s, bands)
    if bp.total == 0.0:
        raise ZeroPower("all-zero window: band ratios undefined")
    return {name: p / bp.total for name, p in bp.powers}


# --- load series -------------------------------------------------------------

def cognitive_load_series(eeg: EegRecording, cfg: AnalysisConfig,
                          load_band: str = "Beta") -> LoadSeries:
    """Per-window load: the named band's power ratio averaged over channels.

    Channels are processed with identical windowing; a window position is
    dropped (and counted) when any channel's total power there is zero,
    e.g. a detrended constant stretch.
    """
    bands = cfg.bands_for(eeg.fs)
    band_names = [b.name for b in bands]
    if load_band not in band_names:
        raise ConfigError(f"load band {load_band!r} not among {band_names}")

    n = cfg.window_len
    n_win = window_count(eeg.n_samples, n, cfg.hop)
    starts = eeg.t0 + (np.arange(n_win) * cfg.hop) / eeg.fs
    if n_win == 0:
        return LoadSeries(starts, np.zeros(0), n / eeg.fs, cfg.hop / eeg.fs)

    ratios = np.empty((eeg.n_channels, n_win), dtype=np.float64)
    alive = np.ones(n_win, dtype=bool)
    for ch in range(eeg.n_channels):
        x = np.lib.stride_tricks.sliding_window_view(
            eeg.samples[ch], n)[::cfg.hop][:n_win]
        if cfg.detrend:
            x = x - x.mean(axis=-1, keepdims=True)
        if cfg.window_fn is not WindowFn.RECT:
            x = x * _window_curve(cfg.window_fn, n)
        coeffs = _transform(x)
        power_bins = np.abs(coeffs) ** 2
        per_band = np.stack(
            [_band_power_batch(power_bins, b, n, eeg.fs) / n for b in bands])
        total = np.zeros(n_win)
        for row in per_band:
            total = total + row
        dead = total == 0.0
        alive &= ~dead
        total[dead] = 1.0  # placeholder; dropped below
        ratios[ch] = per_band[band_names.index(load_band)] / total

    loads = ratios.mean(axis=0)
    dropped = int(n_win - alive.sum())
    return LoadSeries(starts[alive], loads[alive], n / eeg.fs,
                      cfg.hop / eeg.fs, dropped)
