"""Complex error function for the band-limited kernel.

Everything is routed through the Faddeeva function ``w(z) = exp(-z**2) erfc(-iz)``
(``scipy.special.wofz``), which is bounded by 1 in the closed upper half-plane.
Arguments are folded into the first quadrant before evaluation so that
``erf(-z) = -erf(z)`` and ``erf(conj z) = conj erf(z)`` hold exactly.
"""

import math

import numpy as np
from scipy.special import wofz

from .exceptions import DomainError

__all__ = ["complex_erf", "re_erf_scaled", "gauss_re_erf"]

# Below this modulus the Maclaurin series is used; 1 - exp(-z**2) w(iz)
# loses relative accuracy as erf(z) -> 0.
TAYLOR_RADIUS = 0.5
# 18 terms give |z|**37 / (18! * 37) < 1e-20 for |z| <= TAYLOR_RADIUS.
TAYLOR_TERMS = 18

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _check_finite(*arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise DomainError("complex error function requires finite arguments")


def _erf_taylor(z):
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for n in range(1, TAYLOR_TERMS):
        term = term * (-z2) / n
        total = total + term / (2 * n + 1)
    return _TWO_OVER_SQRT_PI * total


def _erf_first_quadrant(z):
    # Re z >= 0 and Im z >= 0, so iz lies in the closed upper half-plane.
    out = np.empty_like(z)
    small = np.abs(z) <= TAYLOR_RADIUS
    out[small] = _erf_taylor(z[small])
    big = ~small
    zb = z[big]
    with np.errstate(over="ignore", invalid="ignore"):
        out[big] = 1.0 - np.exp(-zb * zb) * wofz(1j * zb)
    return out


def complex_erf(z):
    """Error function of a complex argument.

    Parameters
    ----------
    z : complex or array_like of complex
        Finite arguments.

    Returns
    -------
    complex or ndarray
        ``erf(z)``, same shape as ``z``.

    Raises
    ------
    DomainError
        If any argument is NaN or infinite.
    OverflowError
        If ``|erf(z)|`` exceeds the double-precision range (this needs
        ``Im(z)**2 - Re(z)**2`` above roughly 709).
    """
    z_arr = np.asarray(z, dtype=complex)
    _check_finite(z_arr)
    flat = z_arr.ravel()
    sign = np.where(flat.real < 0, -1.0, 1.0)
    folded = flat * sign
    flip = folded.imag < 0
    folded = np.where(flip, np.conj(folded), folded)

    val = _erf_first_quadrant(folded)
    with np.errstate(invalid="ignore"):
        val = np.where(flip, np.conj(val), val) * sign
    if not np.all(np.isfinite(val)):
        raise OverflowError("erf(z) is outside the double-precision range")
    val = val.reshape(z_arr.shape)
    return complex(val) if val.ndim == 0 else val


def _folded(a, c):
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    _check_finite(a, c)
    a, c = np.broadcast_arrays(a, c)
    sign = np.where(a < 0, -1.0, 1.0)
    return sign, np.abs(a), np.abs(c)


def _faddeeva_term(a, c):
    # Re(exp(2i a c) w(c + i a)) for a >= 0; bounded by 1 in magnitude
    return (np.exp(2j * a * c) * wofz(c + 1j * a)).real


def gauss_re_erf(a, c):
    """Return ``exp(-c**2) * Re(erf(a - i c))`` without overflow.

    With ``erf(z) = 1 - exp(-z**2) w(iz)`` and ``z = a - i c`` this is

        exp(-c**2) - exp(-a**2) * Re(exp(2i a c) * w(c + i a))

    for ``a >= 0``; ``|w| <= 1`` there, so no term can overflow. Negative ``a``
    is handled through oddness. The result is bounded by 1 in magnitude.
    """
    sign, a, c = _folded(a, c)
    val = sign * (np.exp(-c * c) - np.exp(-a * a) * _faddeeva_term(a, c))
    return float(val) if val.ndim == 0 else val


def re_erf_scaled(a, c):
    """Real part of ``erf(a - i c)`` for real ``a`` and ``c``.

    Evaluated as ``1 - exp(c**2 - a**2) * Re(exp(2i a c) w(c + i a))`` with
    ``a >= 0`` (oddness covers ``a < 0``), so the only possible overflow is
    in ``exp(c**2 - a**2)``, i.e. when the true value is itself out of range;
    that case raises ``OverflowError``. Even in ``c``, odd in ``a``.
    """
    sign, a, c = _folded(a, c)
    with np.errstate(over="ignore", invalid="ignore"):
        growth = np.exp((c - a) * (c + a))
        val = sign * (1.0 - growth * _faddeeva_term(a, c))
    # erf of a purely imaginary argument is purely imaginary
    val = np.where(a == 0, 0.0, val)
    if not np.all(np.isfinite(val)):
        raise OverflowError("Re erf(a - ic) is outside the double-precision range")
    return float(val) if val.ndim == 0 else val
