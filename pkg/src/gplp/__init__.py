"""Bayesian low-pass filtering with band-limited Gaussian-process components."""

from .exceptions import ConditioningError, DomainError, FitError
from .kernels import (
    BandLimitedKernelSpec,
    Kernel,
    SEHyperparams,
    gram_matrix,
    highpass_kernel,
    lowpass_kernel,
    se_kernel,
    se_psd,
)
from .gp import FitConfig, FitResult, PosteriorEstimate, TimeSeries, fit, nll, observation_cov, posterior
from .special import complex_erf, gauss_re_erf, re_erf_scaled

__version__ = "0.1.0"
