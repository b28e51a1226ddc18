"""Exact GP inference: marginal likelihood, hyperparameter fitting, posteriors.

The observation model is ``y = f_low + f_high + noise`` with
``cov(f_low + f_high) = SE``. Fitting only involves the SE kernel; the cutoff
enters at inference time, where ``cov(f_low(t), y(t')) = K_low(t - t')``
because the components and the noise are independent.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.linalg import lapack
from scipy.stats import qmc

from .exceptions import ConditioningError, FitError
from .kernels import BandLimitedKernelSpec, Kernel, SEHyperparams, gram_matrix, kernel_function

__all__ = [
    "TimeSeries",
    "FitConfig",
    "FitResult",
    "PosteriorEstimate",
    "observation_cov",
    "nll",
    "fit",
    "posterior",
]

JITTER = 1e-8
MAX_JITTER = 1e-4
# SE correlations below this are dropped when fitting; that is under the
# rounding of the diagonal, so banded and dense evaluations agree to ~1e-12.
BAND_TOL = 1e-18
BAND_MAX_FRACTION = 0.2
LOG_2PI = math.log(2 * math.pi)


def _frozen_array(x):
    arr = np.array(x, dtype=float).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Samples ``values[i]`` taken at strictly increasing ``times[i]`` (seconds)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        if times.size == 0:
            raise ValueError("a time series needs at least one sample")
        if times.shape != values.shape:
            raise ValueError(f"times and values differ in length ({times.size} vs {values.size})")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("times and values must be finite")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.times.size

    def with_values(self, values):
        return TimeSeries(self.times, values)


@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit`.

    ``seed=None`` uses the plain Halton sequence for initial points; an
    integer scrambles it reproducibly. ``ftol`` is the relative NLL change at
    which a local search stops.
    """

    n_restarts: int = 8
    seed: int | None = None
    ftol: float = 1e-8
    gtol: float = 1e-6
    maxiter: int = 500


@dataclass(frozen=True)
class FitResult:
    params: SEHyperparams
    nll: float
    restarts_tried: int
    converged: bool
    data_mean: float = 0.0
    restart_nlls: tuple = ()
    initial_nlls: tuple = ()
    bounds: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "nll": self.nll,
            "restarts_tried": self.restarts_tried,
            "converged": self.converged,
            "data_mean": self.data_mean,
            "mean_policy": "empirical mean removed before fitting",
            "restart_nlls": list(self.restart_nlls),
            "initial_nlls": list(self.initial_nlls),
            "bounds": self.bounds,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            params=SEHyperparams.from_dict(d["params"]),
            nll=d["nll"],
            restarts_tried=d["restarts_tried"],
            converged=d["converged"],
            data_mean=d.get("data_mean", 0.0),
            restart_nlls=tuple(d.get("restart_nlls", ())),
            initial_nlls=tuple(d.get("initial_nlls", ())),
            bounds=d.get("bounds", {}),
        )


@dataclass(frozen=True, eq=False)
class PosteriorEstimate:
    """Posterior moments of one latent component at ``query_times``.

    ``variance`` is the diagonal of the posterior covariance, clamped at 0.
    ``data_mean`` is the empirical mean that was removed before inference and
    added back to the mean of the low-frequency component only.
    """

    query_times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    component: Kernel = Kernel.LOW
    full_cov: np.ndarray | None = None
    data_mean: float = 0.0

    @property
    def std(self):
        return np.sqrt(self.variance)

    @property
    def lower95(self):
        return self.mean - 1.96 * self.std

    @property
    def upper95(self):
        return self.mean + 1.96 * self.std

    def to_dict(self):
        d = {
            "component": self.component.value,
            "data_mean": self.data_mean,
            "mean_policy": "empirical mean removed; added back to the low component only",
            "query_times": self.query_times.tolist(),
            "mean": self.mean.tolist(),
            "variance": self.variance.tolist(),
        }
        if self.full_cov is not None:
            d["full_cov"] = self.full_cov.tolist()
        return d


def _cholesky(K, sigma2):
    """Lower Cholesky factor of ``K + jitter * I`` with escalating jitter."""
    jitter = JITTER
    diag = np.arange(K.shape[0])
    while jitter <= MAX_JITTER * (1 + 1e-9):
        A = K.copy()
        A[diag, diag] += jitter * sigma2
        L, info = lapack.dpotrf(A, lower=1, clean=1)
        if info == 0:
            return L, A, jitter
        jitter *= 10
    raise ConditioningError(
        f"Cholesky failed with jitter up to {MAX_JITTER:g} * sigma2 (n={K.shape[0]})"
    )


def _factor(times, p):
    K = gram_matrix(times, times, Kernel.SE, p)
    K[np.diag_indices_from(K)] += p.noise_var
    return _cholesky(K, p.sigma2)


def observation_cov(times, p):
    """Covariance of the observations: SE Gram matrix + noise + jitter.

    The jitter starts at ``1e-8 * sigma2`` and is raised tenfold on each
    Cholesky failure up to ``1e-4 * sigma2``; the returned matrix carries the
    first jitter for which factorisation succeeded.
    """
    if isinstance(times, TimeSeries):
        times = times.times
    _, Sigma, _ = _factor(np.asarray(times, dtype=float), p)
    return Sigma


def _nll_from_factor(L, y):
    alpha = linalg.cho_solve((L, True), y)
    return (np.sum(np.log(np.diag(L))) + 0.5 * y @ alpha + 0.5 * y.size * LOG_2PI), alpha


def nll(ts, p):
    """Gaussian negative log marginal likelihood of ``ts.values`` under ``p``.

    ``0.5 log|S| + 0.5 y' S^-1 y + (n/2) log 2pi`` with ``S`` from
    :func:`observation_cov`. The values are used as given (no centering).
    """
    L, _, _ = _factor(ts.times, p)
    return float(_nll_from_factor(L, ts.values)[0])


def _nll_and_grad(log_params, tau2, y):
    sigma2, ell, noise = np.exp(log_params)
    K = sigma2 * np.exp(-0.5 * tau2 / ell**2)
    S = K.copy()
    S[np.diag_indices_from(S)] += noise
    L, _, jitter = _cholesky(S, sigma2)
    value, alpha = _nll_from_factor(L, y)

    Sinv, info = lapack.dpotri(L, lower=1)
    if info != 0:
        raise ConditioningError("could not invert the observation covariance")
    Sinv = np.tril(Sinv) + np.tril(Sinv, -1).T
    n = y.size
    tr_q = np.trace(Sinv) - alpha @ alpha
    # d S / d log sigma2 = K + jitter*sigma2*I = S_jittered - noise*I
    g_sigma = 0.5 * (n - y @ alpha - noise * tr_q)
    dK_ell = K * (tau2 / ell**2)
    g_ell = 0.5 * (np.sum(Sinv * dK_ell) - alpha @ dK_ell @ alpha)
    g_noise = 0.5 * noise * tr_q
    return value, np.array([g_sigma, g_ell, g_noise])


def _bandwidth(times, ell):
    """Largest index offset whose SE correlation can exceed BAND_TOL."""
    reach = ell * math.sqrt(2.0 * math.log(1.0 / BAND_TOL))
    last = np.searchsorted(times, times + reach, side="right") - 1
    return int(np.max(last - np.arange(times.size)))


def _banded_cholesky(ab, sigma2):
    jitter = JITTER
    while jitter <= MAX_JITTER * (1 + 1e-9):
        A = ab.copy()
        A[0] += jitter * sigma2
        try:
            return linalg.cholesky_banded(A, lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            jitter *= 10
    raise ConditioningError(
        f"banded Cholesky failed with jitter up to {MAX_JITTER:g} * sigma2 (n={ab.shape[1]})"
    )


def _banded_inverse_band(cb):
    """Entries of ``A^-1`` inside the band of ``A = L L'`` (Takahashi recursion).

    ``cb[d, i] = L[i + d, i]``. Returns a dense array whose entries are only
    valid for ``|i - j| <= w``; that is all the gradient needs.
    """
    w = cb.shape[0] - 1
    n = cb.shape[1]
    Z = np.zeros((n, n))
    for i in range(n - 1, -1, -1):
        lii = cb[0, i]
        m = min(w, n - 1 - i)
        if m:
            col = cb[1:m + 1, i]
            off = -(col @ Z[i + 1:i + m + 1, i + 1:i + m + 1]) / lii
            Z[i, i + 1:i + m + 1] = off
            Z[i + 1:i + m + 1, i] = off
            Z[i, i] = (1.0 / lii - col @ off) / lii
        else:
            Z[i, i] = 1.0 / lii**2
    return Z


def _nll_and_grad_banded(log_params, times, y, w):
    sigma2, ell, noise = np.exp(log_params)
    n = y.size
    ab = np.zeros((w + 1, n))
    dK = []
    for d in range(w + 1):
        tau2 = (times[d:] - times[:n - d]) ** 2
        k = sigma2 * np.exp(-0.5 * tau2 / ell**2)
        ab[d, :n - d] = k
        dK.append(k * tau2 / ell**2)
    ab[0] += noise
    cb, jitter = _banded_cholesky(ab, sigma2)
    alpha = linalg.cho_solve_banded((cb, True), y, check_finite=False)
    value = np.sum(np.log(cb[0])) + 0.5 * y @ alpha + 0.5 * n * LOG_2PI

    Z = _banded_inverse_band(cb)
    tr_q = np.trace(Z) - alpha @ alpha
    g_sigma = 0.5 * (n - y @ alpha - noise * tr_q)
    g_ell = 0.0
    for d, dk in enumerate(dK):
        weight = 1.0 if d == 0 else 2.0
        g_ell += weight * (np.diagonal(Z, -d) @ dk - (alpha[d:] * alpha[:n - d]) @ dk)
    g_noise = 0.5 * noise * tr_q
    return value, np.array([g_sigma, 0.5 * g_ell, g_noise])


class _Objective:
    """NLL and gradient in log-parameters, banded when the SE band is narrow."""

    def __init__(self, times, y):
        self.times = times
        self.y = y
        self._tau2 = None

    @property
    def tau2(self):
        if self._tau2 is None:
            self._tau2 = (self.times[:, None] - self.times[None, :]) ** 2
        return self._tau2

    def __call__(self, log_params):
        w = _bandwidth(self.times, math.exp(log_params[1]))
        if w <= BAND_MAX_FRACTION * self.y.size:
            return _nll_and_grad_banded(log_params, self.times, self.y, w)
        return _nll_and_grad(log_params, self.tau2, self.y)

    def value(self, log_params):
        return float(self(log_params)[0])


def _search_space(ts, y):
    var = float(np.mean(y * y))
    if var <= 0:
        var = 1.0
    gaps = np.diff(ts.times)
    gap = float(np.median(gaps)) if gaps.size else 1.0
    span = float(ts.times[-1] - ts.times[0]) or 1.0
    bounds = {
        "sigma2": (1e-6 * var, 1e2 * var),
        "lengthscale": (0.1 * gap, 10.0 * span),
        "noise_var": (1e-6 * var, 1e1 * var),
    }
    return var, gap, bounds


def _initial_points(n, var, gap, seed):
    sampler = qmc.Halton(d=2, scramble=seed is not None, seed=seed)
    u = sampler.random(n + 1)[1:] if seed is None else sampler.random(n)
    # lengthscale spans gap * [1, 25]; the variance is split between signal and noise
    ell = gap * 25.0 ** u[:, 0]
    frac = 0.05 + 0.9 * u[:, 1]
    return np.column_stack([np.log(frac * var), np.log(ell), np.log((1 - frac) * var)])


def fit(ts, config=None):
    """Fit ``(sigma2, lengthscale, noise_var)`` by minimising the NLL.

    The empirical mean is removed first. Each restart runs L-BFGS-B in log
    space from a Halton point scaled by the data variance and the median time
    gap; the lowest final NLL wins, ties going to the earliest restart.
    """
    config = config or FitConfig()
    if len(ts) < 3:
        raise ValueError(f"fitting needs at least 3 observations, got {len(ts)}")
    data_mean = float(np.mean(ts.values))
    y = ts.values - data_mean
    var, gap, bounds = _search_space(ts, y)
    log_bounds = [tuple(np.log(bounds[k])) for k in ("sigma2", "lengthscale", "noise_var")]
    objective = _Objective(ts.times, y)

    starts = _initial_points(config.n_restarts, var, gap, config.seed)
    lo = np.array([b[0] for b in log_bounds])
    hi = np.array([b[1] for b in log_bounds])
    starts = np.clip(starts, lo, hi)

    best = None
    finals, initials, failures = [], [], []
    for i, x0 in enumerate(starts):
        try:
            f0 = objective.value(x0)
            res = optimize.minimize(
                objective, x0, jac=True, method="L-BFGS-B",
                bounds=log_bounds,
                options={"ftol": config.ftol, "gtol": config.gtol, "maxiter": config.maxiter},
            )
        except (ConditioningError, np.linalg.LinAlgError, FloatingPointError) as exc:
            failures.append(f"restart {i}: {exc}")
            initials.append(float("nan"))
            finals.append(float("nan"))
            continue
        initials.append(f0)
        x, fx = res.x, float(res.fun)
        if not np.isfinite(fx) or fx > f0:
            x, fx = x0, f0
        finals.append(fx)
        if np.isfinite(fx) and (best is None or fx < best[1]):
            best = (x, fx, bool(res.success))

    if best is None:
        raise FitError(
            "no restart produced a finite negative log-likelihood",
            {"failures": failures, "bounds": bounds},
        )
    x, fx, ok = best
    sigma2, ell, noise = np.exp(x)
    return FitResult(
        params=SEHyperparams(sigma2, ell, noise),
        nll=fx,
        restarts_tried=len(starts),
        converged=ok,
        data_mean=data_mean,
        restart_nlls=tuple(finals),
        initial_nlls=tuple(initials),
        bounds={k: list(v) for k, v in bounds.items()},
    )


def posterior(ts, query, spec, component=Kernel.LOW, full_cov=False, center=True):
    """Posterior of a latent component at ``query`` times given ``ts``.

    With ``K_c`` the component kernel (``Kernel.LOW``, ``Kernel.HIGH``, or
    ``Kernel.SE`` for the whole latent signal) and ``S`` the observation
    covariance,

        mean = K_c(q, t) S^-1 y
        cov  = K_c(q, q) - K_c(q, t) S^-1 K_c(t, q)

    When ``center`` is true the empirical mean of ``y`` is removed first and
    added back to the LOW and SE means (it is a zero-frequency feature).
    """
    component = Kernel(component)
    if not isinstance(spec, BandLimitedKernelSpec):
        raise TypeError("posterior needs a BandLimitedKernelSpec")
    query = np.asarray(query, dtype=float).ravel()
    if not np.all(np.isfinite(query)):
        raise ValueError("query times must be finite")
    p = spec.se
    data_mean = float(np.mean(ts.values)) if center else 0.0
    y = ts.values - data_mean

    L, _, _ = _factor(ts.times, p)
    alpha = linalg.cho_solve((L, True), y)
    K_qt = gram_matrix(query, ts.times, component, spec)
    mean = K_qt @ alpha
    if component is not Kernel.HIGH:
        mean = mean + data_mean

    V = linalg.solve_triangular(L, K_qt.T, lower=True, check_finite=False)
    prior_var = float(kernel_function(component)(0.0, spec))
    variance = prior_var - np.einsum("ij,ij->j", V, V)
    if np.any(variance < -1e-9 * p.sigma2):
        warnings.warn("posterior variance below -1e-9*sigma2 before clamping", RuntimeWarning)
    variance = np.maximum(variance, 0.0)

    cov = None
    if full_cov:
        cov = gram_matrix(query, query, component, spec) - V.T @ V
        cov = 0.5 * (cov + cov.T)

    mean.setflags(write=False)
    variance.setflags(write=False)
    query.setflags(write=False)
    return PosteriorEstimate(query, mean, variance, component, cov, data_mean)
