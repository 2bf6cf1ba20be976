"""Integer-order Bessel functions of complex argument and radial overlaps.

All radial integrals used by the package reduce to

    L_m(a, b) = int_0^1 J_m(a r) J_m(b r) r dr,

evaluated by the Lommel closed form, with a Taylor expansion around b = a
(and b = -a) where the closed form cancels, and a double power series when
both arguments are small.  :func:`quad_overlap` is the independent
Gauss-Legendre route used to validate them.
"""

from functools import lru_cache
from math import comb, factorial

import numpy as np

from . import _kernels
from .errors import PoleError, RangeExceededError

MAX_ORDER = _kernels.MAX_ORDER
MAX_ABS_Z = _kernels.MAX_ABS_Z
MAX_IMAG_Z = _kernels.MAX_IMAG_Z

POLE_RTOL = 1.0e-14
DEGENERATE_RTOL = 1.0e-3
# above this |Im a| + |Im b| the unscaled overlap of J_m(a r) J_m(b r) overflows
SCALED_IMAG = 600.0
SMALL_ARG = 0.5
_TAYLOR_TERMS = 8


def _check_order(m):
    if int(m) != m or m < 0 or m > MAX_ORDER:
        raise RangeExceededError(f"order m={m!r} outside 0..{MAX_ORDER}")
    return int(m)


def _check_args(z):
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(z)):
        raise RangeExceededError("non-finite Bessel argument")
    if np.any(np.abs(z) >= MAX_ABS_Z):
        raise RangeExceededError(f"|z| must be < {MAX_ABS_Z:g}")
    if np.any(np.abs(z.imag) > MAX_IMAG_Z):
        raise RangeExceededError(f"|Im z| must be <= {MAX_IMAG_Z:g} (exp overflow)")
    return z


def bessel_orders(nmax, z):
    """Return J_0(z)..J_nmax(z) stacked on the last axis."""
    z = _check_args(z)
    nmax = int(nmax)
    flat = _kernels.jn_block(nmax, z.ravel())
    return flat.reshape(z.shape + (nmax + 1,))


def _unwrap(values, like):
    return complex(values) if np.ndim(like) == 0 else values


def bessel_j(m, z):
    """J_m(z) for integer ``0 <= m <= 200`` and complex ``|z| < 1e4``.

    Accepts a scalar or an array of arguments; scalars come back as ``complex``.
    """
    m = _check_order(m)
    vals = bessel_orders(m, z)[..., m]
    return _unwrap(vals, z)


def bessel_j_prime(m, z):
    """Derivative J'_m(z); uses J'_0 = -J_1 and (J_{m-1} - J_{m+1})/2."""
    m = _check_order(m)
    js = bessel_orders(m + 1, z)
    if m == 0:
        vals = -js[..., 1]
    else:
        vals = 0.5 * (js[..., m - 1] - js[..., m + 1])
    return _unwrap(vals, z)


def bessel_j_derivatives(m, z, kmax):
    """J_m^{(k)}(z) for k = 0..kmax at a single complex z.

    Uses J^{(k)}_m = 2^{-k} sum_i (-1)^i C(k, i) J_{m-k+2i} with
    J_{-n} = (-1)^n J_n.
    """
    m = _check_order(m)
    js = bessel_orders(m + kmax, complex(z))

    def J(n):
        if n >= 0:
            return js[n]
        return js[-n] if (-n) % 2 == 0 else -js[-n]

    out = np.empty(kmax + 1, dtype=np.complex128)
    for k in range(kmax + 1):
        acc = 0.0j
        for i in range(k + 1):
            acc += (-1) ** i * comb(k, i) * J(m - k + 2 * i)
        out[k] = acc / 2.0**k
    return out


def dispersion_lhs(m, gamma):
    """gamma * J'_m(gamma) / J_m(gamma), the left side of the dispersion relation.

    Evaluated as m - gamma J_{m+1}/J_m so that gamma -> 0 stays finite.

    Raises
    ------
    PoleError
        If |J_m(gamma)| < 1e-14 * max(1, |J'_m(gamma)|).
    """
    m = _check_order(m)
    gamma = complex(gamma)
    if gamma == 0.0:
        return complex(m)
    js = bessel_orders(m + 1, gamma)
    jm, jp = js[m], js[m + 1]
    dj = -jp if m == 0 else 0.5 * (js[m - 1] - jp)
    if abs(jm) < POLE_RTOL * max(1.0, abs(dj)):
        raise PoleError(f"J_{m}({gamma}) vanishes: pressure-release eigenvalue")
    return complex(m - gamma * jp / jm)


def dispersion_lhs_derivative(m, gamma, g=None):
    """d/dgamma of :func:`dispersion_lhs`, from Bessel's equation.

    With g = gamma J'_m/J_m one has g' = (m^2 - g^2)/gamma - gamma.
    """
    gamma = complex(gamma)
    if g is None:
        g = dispersion_lhs(m, gamma)
    if gamma == 0.0:
        return 0.0j
    return (m * m - g * g) / gamma - gamma


# ---------------------------------------------------------------------------
# Radial overlaps
# ---------------------------------------------------------------------------


def _lommel_series(m, a, b, terms=24):
    # both |a|, |b| small: integrate the product of the two power series
    ca = _series_coeffs(m, a, terms)
    cb = _series_coeffs(m, b, terms)
    k = np.arange(terms)
    denom = 2.0 * m + 2.0 * (k[:, None] + k[None, :]) + 2.0
    return complex(np.sum(np.outer(ca, cb) / denom))


def _series_coeffs(m, a, terms):
    # J_m(a r) = sum_k c_k r^{m+2k}
    c = np.empty(terms, dtype=np.complex128)
    half = 0.5 * a
    c[0] = half**m / factorial(m)
    q = -half * half
    for k in range(1, terms):
        c[k] = c[k - 1] * q / (k * (m + k))
    return c


def _lommel_taylor(m, a, b):
    # L(a, a+d) = -sum_{k>=1} N_k d^{k-1}/k! / (2a + d), with
    # N_k = J(a)[a J^{(k+1)}(a) + k J^{(k)}(a)] - a J'(a) J^{(k)}(a)
    d = b - a
    jd = bessel_j_derivatives(m, a, _TAYLOR_TERMS + 1)
    acc = 0.0j
    dk = 1.0 + 0.0j
    for k in range(1, _TAYLOR_TERMS + 1):
        nk = jd[0] * (a * jd[k + 1] + k * jd[k]) - a * jd[1] * jd[k]
        acc += nk * dk / factorial(k)
        dk *= d
    return complex(-acc / (2.0 * a + d))


def lommel_cross(m, a, b):
    """int_0^1 J_m(a r) J_m(b r) r dr for complex a, b.

    Closed form [b J_m(a) J'_m(b) - a J'_m(a) J_m(b)] / (a^2 - b^2) away from
    a^2 = b^2.  When ``|b -/+ a| <= 1e-3 max(1, |a|)`` a Taylor expansion of
    the numerator about b = +/-a is used instead, so the function is
    continuous through the degenerate set and equals :func:`lommel_self`
    there.  Both arguments below 0.5 in modulus use a double power series.
    """
    m = _check_order(m)
    a = complex(a)
    b = complex(b)
    _check_args(np.array([a, b]))
    if max(abs(a), abs(b)) <= SMALL_ARG:
        return _lommel_series(m, a, b)
    tol = DEGENERATE_RTOL * max(1.0, abs(a))
    if abs(b - a) <= tol:
        return _lommel_taylor(m, a, b)
    if abs(b + a) <= tol:
        sign = -1.0 if m % 2 else 1.0
        return sign * _lommel_taylor(m, a, -b)
    ja, dja = _j_dj(m, a)
    jb, djb = _j_dj(m, b)
    return complex((b * ja * djb - a * dja * jb) / (a * a - b * b))


def lommel_self(m, a):
    """int_0^1 J_m(a r)^2 r dr = [J'_m(a)^2 + (1 - m^2/a^2) J_m(a)^2] / 2."""
    m = _check_order(m)
    a = complex(a)
    _check_args(a)
    if abs(a) <= SMALL_ARG:
        return _lommel_series(m, a, a)
    ja, dja = _j_dj(m, a)
    return complex(0.5 * (dja * dja + (1.0 - m * m / (a * a)) * ja * ja))


def _g_derivatives(m, a):
    """g = a J'_m(a)/J_m(a) and its first three derivatives in a."""
    g = dispersion_lhs(m, a)
    q = m * m - g * g
    g1 = q / a - a
    g2 = -2.0 * g * g1 / a - q / (a * a) - 1.0
    g3 = -2.0 * (g1 * g1 + g * g2) / a + 4.0 * g * g1 / (a * a) + 2.0 * q / a**3
    return g, g1, g2, g3


def scaled_lommel(m, a, b):
    """int_0^1 J_m(a r) J_m(b r) r dr / (J_m(a) J_m(b)).

    Equals (g(b) - g(a)) / (a^2 - b^2) with g = x J'_m(x)/J_m(x), which
    carries none of the e^{|Im a| + |Im b|} growth of the unscaled integral.
    When |b^2 - a^2| <= 1e-4 |a|^2 the divided difference is replaced by its
    Taylor expansion in w = a^2 about a^2.  That expansion assumes no zero of
    J_m within ~|a|^2 of a^2 in the w plane, which holds when the arguments
    are far from the real axis (the regime where this form is needed, see
    :data:`SCALED_IMAG`); near the real axis use :func:`lommel_cross`.
    """
    m = _check_order(m)
    a = complex(a)
    b = complex(b)
    if a == 0.0 or b == 0.0:
        return lommel_cross(m, a, b) / (bessel_j(m, a) * bessel_j(m, b))
    d = b * b - a * a
    if abs(d) > 1.0e-4 * abs(a * a):
        return complex(-(dispersion_lhs(m, b) - dispersion_lhs(m, a)) / d)
    _, g1, g2, g3 = _g_derivatives(m, a)
    G1 = g1 / (2.0 * a)
    G2 = (a * g2 - g1) / (4.0 * a**3)
    G3 = (a * a * g3 - 3.0 * a * g2 + 3.0 * g1) / (8.0 * a**5)
    return complex(-(G1 + G2 * d / 2.0 + G3 * d * d / 6.0))


def _j_dj(m, z):
    js = bessel_orders(m + 1, z)
    dj = -js[1] if m == 0 else 0.5 * (js[m - 1] - js[m + 1])
    return js[m], dj


@lru_cache(maxsize=64)
def gauss_legendre_unit(order):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def quad_overlap(f, g, order=64):
    """Gauss-Legendre estimate of int_0^1 f(r) g(r) r dr.

    ``f`` and ``g`` are vectorised callables of the radius.
    """
    if not 8 <= order <= 512:
        raise RangeExceededError("quadrature order must lie in [8, 512]")
    r, w = gauss_legendre_unit(int(order))
    fr = np.asarray(f(r), dtype=np.complex128) * np.ones_like(r)
    gr = np.asarray(g(r), dtype=np.complex128) * np.ones_like(r)
    return complex(np.sum(w * fr * gr * r))
