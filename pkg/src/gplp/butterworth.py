"""Digital Butterworth low-pass filter used as the classical baseline.

Designed from the analog prototype by the bilinear transform with the cutoff
prewarped, then kept as a cascade of second-order sections (rows of
``[b0, b1, b2, 1, a1, a2]``, the layout ``scipy.signal.sosfilt`` expects).
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .exceptions import DomainError

__all__ = ["ButterworthSpec", "design_butterworth", "frequency_response", "filtfilt", "sos_to_json"]


@dataclass(frozen=True)
class ButterworthSpec:
    order: int
    cutoff_hz: float
    sample_rate_hz: float

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise DomainError(f"order must be a positive integer, got {self.order!r}")
        if not self.sample_rate_hz > 0:
            raise DomainError(f"sample rate must be positive, got {self.sample_rate_hz!r}")
        nyquist = self.sample_rate_hz / 2
        if not 0 < self.cutoff_hz < nyquist:
            raise DomainError(
                f"cutoff {self.cutoff_hz} Hz must lie in (0, {nyquist}) Hz (Nyquist)"
            )


def design_butterworth(spec):
    """Second-order sections of a low-pass Butterworth filter.

    Each section is scaled to unit gain at DC, so the cascade's DC gain is 1.
    Sections are ordered with the poles closest to the unit circle last.
    """
    n = int(spec.order)
    fs = float(spec.sample_rate_hz)
    # prewarp so the digital response is exactly -3 dB at cutoff_hz
    wc = 2 * fs * math.tan(math.pi * spec.cutoff_hz / fs)
    k = np.arange(n)
    analog = wc * np.exp(1j * math.pi * (2 * k + n + 1) / (2 * n))
    poles = (2 * fs + analog) / (2 * fs - analog)

    upper = poles[poles.imag > 1e-12 * wc / fs]
    upper = upper[np.argsort(np.abs(upper))]
    sections = []
    if n % 2:
        real = poles[np.argmin(np.abs(poles.imag))].real
        b = np.array([1.0, 1.0, 0.0])
        a = np.array([1.0, -real, 0.0])
        sections.append(np.concatenate([b * a.sum() / b.sum(), a]))
    for p in upper:
        b = np.array([1.0, 2.0, 1.0])
        a = np.array([1.0, -2 * p.real, abs(p) ** 2])
        sections.append(np.concatenate([b * a.sum() / b.sum(), a]))
    return np.array(sections)


def frequency_response(sos, freqs, sample_rate_hz):
    """Complex response of the cascade at ``freqs`` (Hz)."""
    z = np.exp(-2j * math.pi * np.asarray(freqs, dtype=float) / sample_rate_hz)
    h = np.ones_like(z)
    for b0, b1, b2, a0, a1, a2 in sos:
        h *= (b0 + b1 * z + b2 * z * z) / (a0 + a1 * z + a2 * z * z)
    return h


def filter_order(sos):
    return int(sum(2 if s[2] != 0 or s[5] != 0 else 1 for s in sos))


def _lfilter_sos(sos, x):
    zi = signal.sosfilt_zi(sos) * x[0]
    y, _ = signal.sosfilt(sos, x, zi=zi)
    return y


def filtfilt(x, sos, padlen=None):
    """Zero-phase forward-backward filtering.

    The input is extended at both ends by odd reflection (``padlen`` samples,
    default ``3 * (order + 1)``), each pass starts from the steady state for
    its first sample, and the padding is cut off afterwards.
    """
    x = np.asarray(x, dtype=float)
    if padlen is None:
        padlen = 3 * (filter_order(sos) + 1)
    if x.ndim != 1 or x.size <= padlen:
        raise DomainError(f"input of length {x.size} too short for padding of {padlen}")
    if padlen:
        left = 2 * x[0] - x[padlen:0:-1]
        right = 2 * x[-1] - x[-2:-padlen - 2:-1]
        ext = np.concatenate([left, x, right])
    else:
        ext = x
    y = _lfilter_sos(sos, ext)
    y = _lfilter_sos(sos, y[::-1])[::-1]
    return y[padlen:ext.size - padlen] if padlen else y


def sos_to_json(sos, spec):
    return json.dumps({
        "order": spec.order,
        "cutoff_hz": spec.cutoff_hz,
        "sample_rate_hz": spec.sample_rate_hz,
        "sos": np.asarray(sos).tolist(),
    })
