"""Synthetic line-spectra signals, sampling protocols and FFT diagnostics."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .gp import TimeSeries

__all__ = [
    "LineSpectraSpec",
    "SpectrumEstimate",
    "synth_line_spectra",
    "line_spectra",
    "subsample",
    "add_noise",
    "is_uniform",
    "fft_spectrum",
    "band_energy_ratio",
    "mse",
]

DEFAULT_FREQS_LOW = (0.31, 0.38, 0.48)
DEFAULT_FREQS_HIGH = (0.51, 0.64, 0.75)
UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class LineSpectraSpec:
    freqs_low: tuple = DEFAULT_FREQS_LOW
    freqs_high: tuple = DEFAULT_FREQS_HIGH
    t_start: float = -100.0
    t_end: float = 100.0
    n_points: int = 5000

    def __post_init__(self):
        object.__setattr__(self, "freqs_low", tuple(float(f) for f in self.freqs_low))
        object.__setattr__(self, "freqs_high", tuple(float(f) for f in self.freqs_high))
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.freqs_low and self.freqs_high and max(self.freqs_low) >= min(self.freqs_high):
            raise ValueError("every low frequency must lie below every high frequency")

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, self.n_points)


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided spectrum.

    ``magnitude`` is the amplitude of the sinusoid each bin represents and
    ``power`` the one-sided PSD (signal**2 / Hz), so ``sum(power) * df``
    equals the mean square of the input.
    """

    freqs: np.ndarray
    magnitude: np.ndarray
    power: np.ndarray

    @property
    def df(self):
        return float(self.freqs[1] - self.freqs[0]) if self.freqs.size > 1 else 0.0


def line_spectra(times, freqs):
    """Sum of unit-amplitude cosines ``cos(2 pi f t)`` over ``freqs``."""
    times = np.asarray(times, dtype=float)
    out = np.zeros_like(times)
    for f in freqs:
        out += np.cos(2 * math.pi * f * times)
    return out


def synth_line_spectra(spec):
    t = spec.times
    return TimeSeries(t, line_spectra(t, spec.freqs_low + spec.freqs_high))


def low_component(spec, times=None):
    """Ground-truth low-frequency part (the ``freqs_low`` cosines only)."""
    t = spec.times if times is None else np.asarray(times, dtype=float)
    return TimeSeries(t, line_spectra(t, spec.freqs_low))


def subsample(ts, fraction, mode="even", seed=None):
    """Keep a fraction of the samples.

    ``mode="even"`` keeps every ``round(1/fraction)``-th sample starting from
    the first; ``mode="random"`` draws ``floor(fraction * n)`` distinct
    indices uniformly (seeded) and keeps them in time order.
    """
    if not 0 < fraction <= 1:
        raise DomainError(f"fraction must be in (0, 1], got {fraction}")
    n = len(ts)
    if mode == "even":
        idx = np.arange(0, n, max(1, round(1 / fraction)))
    elif mode == "random":
        k = math.floor(fraction * n)
        if k == 0:
            raise DomainError(f"fraction {fraction} of {n} samples leaves nothing")
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=k, replace=False))
    else:
        raise ValueError(f"unknown subsampling mode {mode!r}")
    return TimeSeries(ts.times[idx], ts.values[idx])


def add_noise(ts, sigma, seed=None):
    if sigma < 0:
        raise DomainError(f"noise std must be non-negative, got {sigma}")
    if sigma == 0:
        return ts
    rng = np.random.default_rng(seed)
    return ts.with_values(ts.values + sigma * rng.standard_normal(len(ts)))


def is_uniform(times, rtol=UNIFORM_RTOL):
    gaps = np.diff(np.asarray(times, dtype=float))
    if gaps.size == 0:
        return False
    dt = gaps.mean()
    return bool(np.all(np.abs(gaps - dt) <= rtol * abs(dt)))


def _require_uniform(ts):
    if not is_uniform(ts.times):
        raise DomainError(
            "spectrum needs uniformly spaced samples; evaluate the GPLP posterior "
            "mean on a uniform grid first (e.g. `gplp filter --grid`)"
        )
    return float(np.mean(np.diff(ts.times)))


def fft_spectrum(ts, window=None):
    """One-sided FFT spectrum of a uniformly sampled series.

    ``window="hann"`` applies a Hann taper (power is then rescaled by the
    taper's mean square, so Parseval holds only approximately).
    """
    dt = _require_uniform(ts)
    x = np.asarray(ts.values, dtype=float)
    n = x.size
    if window == "hann":
        w = np.hanning(n)
        x = x * w
        scale = np.mean(w * w)
        amp_scale = np.mean(w)
    elif window is None:
        scale = amp_scale = 1.0
    else:
        raise ValueError(f"unknown window {window!r}")

    X = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, dt)
    # one-sided: every bin except DC (and Nyquist for even n) counts twice
    weight = np.full(freqs.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    power = weight * np.abs(X) ** 2 * dt / n / scale
    magnitude = weight * np.abs(X) / n / amp_scale
    return SpectrumEstimate(freqs, magnitude, power)


def band_energy_ratio(ts, cutoff):
    """Fraction of spectral power at frequencies ``<= cutoff`` (Hz).

    The series mean is removed first and the DC bin counts as low band. A
    constant series has no power left; 1.0 is returned with a warning.
    """
    _require_uniform(ts)
    centred = ts.with_values(ts.values - np.mean(ts.values))
    spec = fft_spectrum(centred)
    total = float(np.sum(spec.power))
    # the mean of a constant series can differ from it by rounding
    if total <= 0 or np.ptp(ts.values) == 0:
        warnings.warn("series is constant after mean removal; band energy ratio set to 1.0")
        return 1.0
    return float(np.sum(spec.power[spec.freqs <= cutoff]) / total)


def mse(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))
