"""Square-exponential kernel and its band-limited low/high-frequency split.

Frequencies are in Hz and times in seconds. With the Fourier pair

    K(tau) = integral S(xi) exp(2 pi i xi tau) dxi,

the SE kernel ``sigma2 * exp(-tau**2 / (2 l**2))`` has spectral density
``sigma2 * sqrt(2 pi l**2) * exp(-2 pi**2 l**2 xi**2)``. The low-frequency
kernel keeps that density on ``|xi| < b`` and the high-frequency kernel keeps
the rest, so ``se = low + high`` pointwise.
"""

import enum
import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .special import gauss_re_erf

__all__ = [
    "SEHyperparams",
    "BandLimitedKernelSpec",
    "Kernel",
    "se_kernel",
    "se_psd",
    "lowpass_kernel",
    "highpass_kernel",
    "gram_matrix",
]


@dataclass(frozen=True)
class SEHyperparams:
    """Hyperparameters of the SE prior plus the observation noise variance."""

    sigma2: float
    lengthscale: float
    noise_var: float = 0.0

    def __post_init__(self):
        for name in ("sigma2", "lengthscale", "noise_var"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.lengthscale <= 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.noise_var < 0:
            raise ValueError(f"noise_var must be non-negative, got {self.noise_var}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(sigma2=d["sigma2"], lengthscale=d["lengthscale"],
                   noise_var=d.get("noise_var", 0.0))


@dataclass(frozen=True)
class BandLimitedKernelSpec:
    """SE hyperparameters together with the cutoff frequency ``cutoff_b`` (Hz)."""

    se: SEHyperparams
    cutoff_b: float

    def __post_init__(self):
        if not (math.isfinite(self.cutoff_b) and self.cutoff_b > 0):
            raise ValueError(f"cutoff_b must be positive and finite, got {self.cutoff_b!r}")
        object.__setattr__(self, "cutoff_b", float(self.cutoff_b))

    def to_dict(self):
        return {**self.se.to_dict(), "cutoff_b": self.cutoff_b}

    @classmethod
    def from_dict(cls, d):
        return cls(SEHyperparams.from_dict(d), d["cutoff_b"])

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


class Kernel(enum.Enum):
    SE = "se"
    LOW = "low"
    HIGH = "high"


def _se_params(spec):
    return spec.se if isinstance(spec, BandLimitedKernelSpec) else spec


def se_kernel(tau, p):
    """SE covariance ``sigma2 * exp(-tau**2 / (2 l**2))``."""
    p = _se_params(p)
    tau = np.asarray(tau, dtype=float)
    out = p.sigma2 * np.exp(-0.5 * (tau / p.lengthscale) ** 2)
    return float(out) if out.ndim == 0 else out


def se_psd(xi, p):
    """Spectral density of the SE kernel at frequency ``xi`` (Hz)."""
    p = _se_params(p)
    xi = np.asarray(xi, dtype=float)
    l = p.lengthscale
    out = p.sigma2 * math.sqrt(2 * math.pi * l * l) * np.exp(-2 * math.pi**2 * l * l * xi * xi)
    return float(out) if out.ndim == 0 else out


def lowpass_kernel(t, spec):
    """Covariance of the component whose spectrum is the SE density on ``|xi| < b``.

    Closed form ``sigma2 * exp(-t**2/(2 l**2)) * Re erf(sqrt(2) pi b l - i t/(sqrt(2) l))``,
    evaluated through :func:`gplp.special.gauss_re_erf` so large ``b * l``
    or ``t / l`` cannot overflow. ``K_l(0) = sigma2 * erf(sqrt(2) pi b l)``.
    """
    p = spec.se
    t = np.asarray(t, dtype=float)
    a = math.sqrt(2.0) * math.pi * spec.cutoff_b * p.lengthscale
    c = t / (math.sqrt(2.0) * p.lengthscale)
    out = p.sigma2 * np.asarray(gauss_re_erf(a, c))
    return float(out) if out.ndim == 0 else out


def highpass_kernel(t, spec):
    """Covariance of the complementary component, ``se_kernel - lowpass_kernel``."""
    out = np.asarray(se_kernel(t, spec.se)) - np.asarray(lowpass_kernel(t, spec))
    return float(out) if out.ndim == 0 else out


_KERNELS = {
    Kernel.SE: se_kernel,
    Kernel.LOW: lowpass_kernel,
    Kernel.HIGH: highpass_kernel,
}


def kernel_function(kernel):
    return _KERNELS[Kernel(kernel)]


def gram_matrix(ts_a, ts_b, kernel, spec):
    """Matrix with entries ``kernel(ts_a[i] - ts_b[j])``.

    ``kernel`` is a :class:`Kernel` member (or its string value). ``spec`` may
    be :class:`SEHyperparams` when ``kernel`` is ``Kernel.SE``.
    """
    kernel = Kernel(kernel)
    ts_a = np.asarray(ts_a, dtype=float).ravel()
    ts_b = np.asarray(ts_b, dtype=float).ravel()
    if kernel is not Kernel.SE and not isinstance(spec, BandLimitedKernelSpec):
        raise TypeError(f"{kernel.name} kernel needs a BandLimitedKernelSpec")
    tau = ts_a[:, None] - ts_b[None, :]
    return np.asarray(_KERNELS[kernel](tau, spec), dtype=float).reshape(tau.shape)
