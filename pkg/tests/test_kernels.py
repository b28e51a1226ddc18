import json
import math

import numpy as np
import pytest
from scipy import integrate

from gplp.kernels import (
    BandLimitedKernelSpec,
    Kernel,
    SEHyperparams,
    gram_matrix,
    highpass_kernel,
    lowpass_kernel,
    se_kernel,
    se_psd,
)

from oracles import lowpass_quad

# frozen oracle values (tests/oracles.py)
LOW_T0_B0495 = 0.998130245622394          # erf(sqrt(2) * 0.495 * pi), series
HIGH_T0_B05 = 0.001680316336526766        # 1 - erf(sqrt(2) * 0.5 * pi), series
LOW_B05 = {0.5: 0.8827230302430428, 1.0: 0.6080989677614642, 2.0: 0.13403815489678775}  # quadrature
PSD_XI05_L2 = 1.3411905042414914e-08      # sqrt(8 pi) exp(-2 pi^2)


def band(sigma2=1.0, ell=1.0, b=0.5, noise=0.0):
    return BandLimitedKernelSpec(SEHyperparams(sigma2, ell, noise), b)


class TestHyperparams:
    @pytest.mark.parametrize("kwargs", [
        dict(sigma2=0, lengthscale=1),
        dict(sigma2=1, lengthscale=-1),
        dict(sigma2=1, lengthscale=1, noise_var=-0.1),
        dict(sigma2=math.inf, lengthscale=1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SEHyperparams(**kwargs)

    def test_cutoff_must_be_positive(self):
        with pytest.raises(ValueError):
            band(b=0.0)

    def test_json_round_trip(self):
        spec = band(1.5, 0.3, 0.495, 0.9)
        d = json.loads(spec.to_json())
        assert set(d) == {"sigma2", "lengthscale", "noise_var", "cutoff_b"}
        assert BandLimitedKernelSpec.from_json(spec.to_json()) == spec


class TestSE:
    def test_at_zero(self):
        assert se_kernel(0.0, SEHyperparams(2.0, 1.0)) == 2.0

    def test_at_lengthscale(self):
        assert se_kernel(1.7, SEHyperparams(1.0, 1.7)) == pytest.approx(math.exp(-0.5), rel=1e-15)

    def test_closed_form(self):
        assert se_kernel(3.0, SEHyperparams(1.5, 2.0)) == pytest.approx(0.4869787010375246, rel=1e-15)

    def test_symmetric_max_at_zero(self):
        p = SEHyperparams(1.3, 0.7)
        t = np.arange(-50, 51) * 0.1
        k = se_kernel(t, p)
        np.testing.assert_array_equal(k, k[::-1])
        assert k.argmax() == 50

    def test_psd_at_zero(self):
        assert se_psd(0.0, SEHyperparams(1.0, 1.0)) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)

    def test_psd_closed_form(self):
        assert se_psd(0.5, SEHyperparams(1.0, 2.0)) == pytest.approx(PSD_XI05_L2, rel=1e-13)

    @pytest.mark.parametrize("sigma2, ell", [(1.0, 1.0), (2.5, 0.3), (0.4, 4.0)])
    def test_psd_integrates_to_variance(self, sigma2, ell):
        p = SEHyperparams(sigma2, ell)
        total, _ = integrate.quad(lambda xi: se_psd(xi, p), -np.inf, np.inf, epsabs=1e-13)
        assert total == pytest.approx(sigma2, rel=1e-10)


class TestLowpass:
    def test_wide_band_recovers_se(self):
        assert lowpass_kernel(0.0, band(b=100.0)) == pytest.approx(1.0, abs=1e-15)

    def test_reference_cutoff_at_zero(self):
        assert lowpass_kernel(0.0, band(b=0.495)) == pytest.approx(LOW_T0_B0495, abs=1e-14)

    @pytest.mark.parametrize("t", sorted(LOW_B05))
    def test_quadrature_values(self, t):
        assert lowpass_kernel(t, band(b=0.5)) == pytest.approx(LOW_B05[t], abs=1e-12)

    def test_frozen_values_match_live_quadrature(self):
        for t, v in LOW_B05.items():
            assert lowpass_quad(t, 1.0, 1.0, 0.5) == pytest.approx(v, abs=1e-12)

    def test_even(self):
        t = np.linspace(0, 20, 81)
        spec = band(1.2, 0.8, 0.3)
        np.testing.assert_array_equal(lowpass_kernel(t, spec), lowpass_kernel(-t, spec))

    def test_bounded_by_value_at_zero(self):
        # |K_l(t)| <= K_l(0) <= sigma2; K_l(t) itself may exceed SE(t) in the tails
        spec = band(1.0, 1.0, 0.5)
        t = np.linspace(-40, 40, 4001)
        k = lowpass_kernel(t, spec)
        k0 = lowpass_kernel(0.0, spec)
        assert np.all(np.abs(k) <= k0 + 1e-15)
        assert k0 <= 1.0

    def test_tail_exceeds_se(self):
        spec = band(1.0, 1.0, 0.5)
        assert lowpass_kernel(10.5, spec) > se_kernel(10.5, spec) + 1e-4

    def test_no_overflow_for_large_arguments(self):
        spec = band(1.0, 50.0, 5.0)
        k = lowpass_kernel(np.linspace(-1e4, 1e4, 101), spec)
        assert np.all(np.isfinite(k))

    @pytest.mark.parametrize("b", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("ell", [0.5, 1.0, 2.0])
    def test_matches_quadrature_grid(self, b, ell):
        t = np.linspace(-10, 10, 41)
        ref = np.array([lowpass_quad(x, 1.0, ell, b) for x in t])
        assert np.max(np.abs(lowpass_kernel(t, band(1.0, ell, b)) - ref)) <= 1e-8

    def test_limit_large_bandwidth(self):
        for ell, b in [(1.0, 3.0), (0.5, 6.0), (2.0, 1.5)]:
            spec = band(1.7, ell, b)
            t = np.linspace(-10 * ell, 10 * ell, 201)
            assert np.max(np.abs(lowpass_kernel(t, spec) - se_kernel(t, spec.se))) <= 1e-9 * 1.7


class TestHighpass:
    def test_vanishes_for_wide_band(self):
        t = np.linspace(-10, 10, 101)
        assert np.max(np.abs(highpass_kernel(t, band(b=100.0)))) <= 1e-15

    def test_at_zero(self):
        assert highpass_kernel(0.0, band(b=0.5)) == pytest.approx(HIGH_T0_B05, abs=1e-14)

    def test_nonnegative_at_zero(self):
        for b in [0.01, 0.2, 1.0, 5.0]:
            assert highpass_kernel(0.0, band(1.0, 1.0, b)) >= 0

    def test_additivity(self):
        spec = band(2.3, 0.6, 0.4)
        t = np.linspace(-8, 8, 321)
        total = lowpass_kernel(t, spec) + highpass_kernel(t, spec)
        assert np.max(np.abs(total - se_kernel(t, spec.se))) <= 1e-14


class TestGram:
    def test_single_point(self):
        np.testing.assert_array_equal(gram_matrix([0.0], [0.0], Kernel.SE, SEHyperparams(1.0, 1.0)), [[1.0]])

    def test_two_points(self):
        K = gram_matrix([0.0, 1.0], [0.0, 1.0], Kernel.SE, SEHyperparams(1.0, 1.0))
        e = math.exp(-0.5)
        np.testing.assert_allclose(K, [[1, e], [e, 1]], rtol=1e-15)

    def test_lowpass_against_quadrature(self):
        rng = np.random.default_rng(3)
        t = np.sort(rng.uniform(-5, 5, 5))
        spec = band(1.0, 0.8, 0.4)
        K = gram_matrix(t, t, Kernel.LOW, spec)
        ref = np.array([[lowpass_quad(a - c, 1.0, 0.8, 0.4) for c in t] for a in t])
        assert np.max(np.abs(K - ref)) <= 1e-8

    @pytest.mark.parametrize("kernel", list(Kernel))
    def test_symmetric(self, kernel):
        t = np.random.default_rng(0).uniform(-3, 3, 12)
        K = gram_matrix(t, t, kernel, band(1.0, 0.7, 0.3))
        np.testing.assert_array_equal(K, K.T)

    def test_rectangular(self):
        K = gram_matrix(np.arange(3.0), np.arange(5.0), "low", band())
        assert K.shape == (3, 5)

    def test_band_kernels_need_band_spec(self):
        with pytest.raises(TypeError):
            gram_matrix([0.0], [0.0], Kernel.LOW, SEHyperparams(1.0, 1.0))

    def test_lowpass_gram_is_psd(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(100):
            n = rng.integers(2, 21)
            t = np.sort(rng.uniform(-10, 10, n))
            spec = band(1.0, rng.uniform(0.2, 3.0), rng.uniform(0.05, 2.0))
            worst = min(worst, np.linalg.eigvalsh(gram_matrix(t, t, Kernel.LOW, spec)).min())
        assert worst >= -1e-9


def _kernel_spectrum(half_width, dt=0.01, b=0.5):
    spec = band(1.0, 1.0, b)
    t = np.arange(-round(half_width / dt), round(half_width / dt) + 1) * dt
    k = lowpass_kernel(t, spec)
    S = np.real(np.fft.fftshift(np.fft.fft(np.fft.ifftshift(k)))) * dt
    xi = np.fft.fftshift(np.fft.fftfreq(t.size, dt))
    return xi, S, se_psd(xi, spec.se) * (np.abs(xi) < b)


def test_spectral_consistency():
    b = 0.5
    xi, S, target = _kernel_spectrum(50.0, b=b)
    away = np.abs(np.abs(xi) - b) > 0.05
    assert np.max(np.abs(S - target)[away]) <= 1e-3
    dxi = xi[1] - xi[0]
    outside = np.abs(xi) > b + 0.05
    # energy = integral of the spectral density over the band
    assert abs(np.sum(S[outside]) * dxi) <= 1e-4 * np.sum(S) * dxi


def test_out_of_band_leakage_shrinks_with_window():
    # pointwise leakage on the +-50 s window is a truncation effect of the
    # kernel's slow tails; it falls below 1e-4 of the peak on a wider window
    xi, S, _ = _kernel_spectrum(200.0)
    outside = np.abs(xi) > 0.55
    assert np.max(np.abs(S[outside])) <= 1e-4 * S.max()
