import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gplp.exceptions import DomainError
from gplp.special import TAYLOR_RADIUS, _erf_first_quadrant, complex_erf, gauss_re_erf, re_erf_scaled

from oracles import erf_mp, erf_series, erf_series_real

# frozen from the 200-term extended-precision series (tests/oracles.py)
ERF_3 = 0.9999779095030014
ERF_2 = 0.9953222650189527
ERF_1_PLUS_1J = 1.3161512816979477 + 0.19045346923783468j


def test_erf_zero():
    assert complex_erf(0j) == 0


def test_erf_real_three():
    val = complex_erf(3.0)
    assert val.imag == 0
    assert val.real == pytest.approx(ERF_3, abs=1e-14)


def test_erf_one_plus_one_i():
    assert abs(complex_erf(1 + 1j) - ERF_1_PLUS_1J) < 1e-14


def test_frozen_values_match_live_oracle():
    assert erf_series_real(3.0) == pytest.approx(ERF_3, abs=1e-15)
    assert abs(erf_series(1 + 1j) - ERF_1_PLUS_1J) < 1e-15


def test_array_shape_is_preserved():
    z = np.array([[0.1, 1j], [2 + 1j, -0.5 - 0.2j]])
    out = complex_erf(z)
    assert out.shape == (2, 2)


@pytest.mark.parametrize("bad", [complex(np.nan, 0), complex(0, np.inf), complex(np.inf, 1)])
def test_non_finite_input_is_rejected(bad):
    with pytest.raises(DomainError):
        complex_erf(bad)


def test_overflow_is_reported_not_returned():
    with pytest.raises(OverflowError):
        complex_erf(30j)


def test_large_real_part_saturates():
    z = np.array([8 + 0.5j, 20 + 3j, 27 + 26j, -9 + 2j])
    out = complex_erf(z)
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out.real, np.sign(z.real), atol=1e-12)


def test_relative_accuracy_within_radius_six():
    rng = np.random.default_rng(7)
    z = rng.uniform(-6, 6, 600) + 1j * rng.uniform(-6, 6, 600)
    z = z[np.abs(z) <= 6]
    ref = np.array([erf_series(v, terms=400) for v in z])
    rel = np.abs(complex_erf(z) - ref) / np.abs(ref)
    assert rel.max() <= 1e-12


def test_series_grid_scaled_error():
    # the absolute 1e-12 grid criterion lives in test_acceptance; this is the
    # relative form that double precision can meet everywhere on the grid
    x = np.arange(-40, 41) / 10
    z = (x[:, None] + 1j * x[None, :]).ravel()
    ref = np.array([erf_series(v) for v in z])
    err = np.abs(complex_erf(z) - ref) / np.maximum(1.0, np.abs(ref))
    assert err.max() <= 1e-12


def test_branches_agree_at_taylor_radius():
    theta = np.linspace(0, np.pi / 2, 41)
    z = TAYLOR_RADIUS * np.exp(1j * theta)
    from gplp.special import _erf_taylor
    from scipy.special import wofz
    series = _erf_taylor(z)
    faddeeva = 1 - np.exp(-z * z) * wofz(1j * z)
    assert np.max(np.abs(series - faddeeva)) <= 1e-10


def test_first_quadrant_helper_matches_public():
    z = np.array([0.3 + 0.2j, 1.2 + 2.5j, 4 + 0.1j])
    np.testing.assert_array_equal(_erf_first_quadrant(z.copy()), complex_erf(z))


zs = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@settings(max_examples=1000, deadline=None)
@given(zs)
def test_oddness(z):
    assert abs(complex_erf(-z) + complex_erf(z)) <= 1e-13 * max(1.0, abs(complex_erf(z)))


@settings(max_examples=1000, deadline=None)
@given(zs)
def test_conjugate_symmetry(z):
    assert abs(complex_erf(z.conjugate()) - complex_erf(z).conjugate()) <= 1e-13 * max(1.0, abs(complex_erf(z)))


def test_re_erf_scaled_examples():
    assert re_erf_scaled(0.0, 0.0) == 0.0
    assert re_erf_scaled(2.0, 0.0) == pytest.approx(ERF_2, abs=1e-14)
    assert re_erf_scaled(30.0, 1.0) == pytest.approx(1.0, abs=1e-10)


def test_re_erf_scaled_matches_complex_erf():
    a = np.linspace(0, 6, 25)
    c = np.linspace(-6, 6, 25)
    A, C = np.meshgrid(a, c)
    mask = C**2 - A**2 < 600
    naive = complex_erf(A[mask] - 1j * C[mask]).real
    scaled = re_erf_scaled(A[mask], C[mask])
    assert np.max(np.abs(scaled - naive) / np.maximum(1.0, np.abs(naive))) <= 1e-10


def test_re_erf_scaled_large_domain_against_series():
    # a in [0, 50], |c| <= 50 where the true value is representable
    pts = [(0.0, 50.0), (50.0, 50.0), (50.0, 0.0), (25.0, 30.0), (10.0, 3.0), (4.0, 4.5), (1.0, 2.0)]
    for a, c in pts:
        ref = erf_mp(complex(a, -c)).real
        got = re_erf_scaled(a, c)
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref)), (a, c, got, ref)


def test_re_erf_scaled_parity():
    a, c = 1.3, 0.7
    assert re_erf_scaled(a, -c) == re_erf_scaled(a, c)
    assert re_erf_scaled(-a, c) == -re_erf_scaled(a, c)


def test_re_erf_scaled_overflow_raises():
    with pytest.raises(OverflowError):
        re_erf_scaled(1.0, 40.0)


def test_gauss_re_erf_is_bounded_and_finite():
    a = np.linspace(0, 50, 201)
    c = np.linspace(-50, 50, 201)
    A, C = np.meshgrid(a, c)
    g = gauss_re_erf(A, C)
    assert np.all(np.isfinite(g))
    assert np.max(np.abs(g)) <= 1.0 + 1e-15


def test_gauss_re_erf_rejects_nan():
    with pytest.raises(DomainError):
        gauss_re_erf(math.nan, 0.0)
