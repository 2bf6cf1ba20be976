import math

import mpmath
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given
from hypothesis import strategies as st

from ductmodes.errors import PoleError, RangeExceededError
from ductmodes.special_fn import (
    DEGENERATE_RTOL,
    bessel_j,
    bessel_j_derivatives,
    bessel_j_prime,
    bessel_orders,
    dispersion_lhs,
    dispersion_lhs_derivative,
    lommel_cross,
    lommel_self,
    quad_overlap,
)

mpmath.mp.dps = 30


def series_j(m, x, terms=60):
    """Plain power series of J_m at a real argument (pure Python oracle)."""
    total = 0.0
    term = (x / 2.0) ** m / math.factorial(m)
    for k in range(terms):
        total += term
        term *= -((x / 2.0) ** 2) / ((k + 1) * (k + 1 + m))
    return total


def bisect(f, a, b, tol=1e-14):
    fa = f(a)
    for _ in range(200):
        c = 0.5 * (a + b)
        fc = f(c)
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
        if b - a < tol:
            break
    return 0.5 * (a + b)


def mp_j(m, z):
    return complex(mpmath.besselj(m, mpmath.mpc(z.real, z.imag)))


complex_args = st.builds(
    complex,
    st.floats(-60, 60, allow_nan=False),
    st.floats(-30, 30, allow_nan=False),
)


class TestBesselValues:
    @pytest.mark.parametrize(
        "m, lo, hi, ref",
        [(0, 2.0, 3.0, 2.404826), (1, 3.5, 4.0, 3.831706), (1, 6.5, 7.5, 7.015587)],
    )
    def test_zeros_match_series_bisection(self, m, lo, hi, ref):
        oracle = bisect(lambda x: series_j(m, x), lo, hi)
        assert abs(oracle - ref) < 1e-6
        assert abs(bessel_j(m, oracle)) < 1e-13

    def test_derivative_zero_of_j1(self):
        oracle = bisect(lambda x: series_j(0, x) - series_j(2, x), 1.5, 2.0)
        assert abs(oracle - 1.841184) < 1e-6
        assert abs(bessel_j_prime(1, oracle)) < 1e-13

    @given(m=st.integers(0, 12), z=complex_args)
    def test_against_mpmath(self, m, z):
        ref = mp_j(m, z)
        scale = max(abs(ref), abs(mp_j(m + 1, z)), 1e-300)
        assert abs(bessel_j(m, z) - ref) <= 1e-12 * scale

    def test_large_argument_against_mpmath(self):
        for z in (500.0 + 3j, 1200.0 - 40j, 35j, 2.0 + 250j):
            for m in (0, 3, 40):
                ref = mp_j(m, z)
                scale = max(abs(ref), abs(mp_j(m + 1, z)))
                assert abs(bessel_j(m, z) - ref) <= 1e-12 * scale

    def test_against_scipy_vectorised(self):
        rng = np.random.default_rng(7)
        z = rng.uniform(-50, 50, 500) + 1j * rng.uniform(-15, 15, 500)
        for m in (0, 1, 5, 20):
            ref = sp.jv(m, z)
            scale = np.maximum(np.abs(ref), np.abs(sp.jv(m + 1, z)))
            assert np.all(np.abs(bessel_j(m, z) - ref) <= 1e-11 * scale)

    def test_small_and_zero_arguments(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(3, 0.0) == 0.0
        assert abs(bessel_j(2, 1e-5) - 1.25e-11 * (1 - 1e-10 / 12)) < 1e-26

    @given(m=st.integers(1, 30), z=complex_args.filter(lambda z: abs(z) > 1e-3))
    def test_three_term_recurrence(self, m, z):
        js = bessel_orders(m + 1, z)
        lhs = js[m - 1] + js[m + 1]
        rhs = 2.0 * m / z * js[m]
        assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), abs(rhs), abs(js[m]))

    @given(z=complex_args)
    def test_reflection_symmetry(self, z):
        for m in (0, 1, 4):
            assert abs(bessel_j(m, -z) - (-1) ** m * bessel_j(m, z)) <= 1e-13 * max(1.0, abs(bessel_j(m, z)))
            assert abs(bessel_j(m, z.conjugate()) - bessel_j(m, z).conjugate()) <= 1e-13 * max(1.0, abs(bessel_j(m, z)))

    def test_array_shape_preserved(self):
        z = np.ones((3, 4), dtype=complex)
        assert bessel_j(2, z).shape == (3, 4)
        assert isinstance(bessel_j(2, 1.0), complex)


class TestDerivatives:
    @given(m=st.integers(0, 10), z=complex_args)
    def test_prime_against_mpmath(self, m, z):
        ref = complex(mpmath.besselj(m, mpmath.mpc(z.real, z.imag), derivative=1))
        scale = max(abs(ref), abs(mp_j(m, z)), 1e-300)
        assert abs(bessel_j_prime(m, z) - ref) <= 1e-11 * scale

    def test_higher_derivatives_against_mpmath(self):
        z = 3.7 + 1.2j
        for m in (0, 2):
            got = bessel_j_derivatives(m, z, 3)
            for k in range(4):
                ref = complex(mpmath.besselj(m, mpmath.mpc(z.real, z.imag), derivative=k))
                assert abs(got[k] - ref) < 1e-13


class TestDispersion:
    def test_origin_limit(self):
        assert dispersion_lhs(0, 0.0) == 0.0
        assert dispersion_lhs(4, 0.0) == 4.0
        assert abs(dispersion_lhs(2, 1e-6) - 2.0) < 1e-11

    def test_pole_at_bessel_zero(self):
        zero = sp.jn_zeros(0, 1)[0]
        with pytest.raises(PoleError):
            dispersion_lhs(0, zero)

    @given(m=st.integers(0, 6), z=st.builds(complex, st.floats(0.5, 30), st.floats(-5, 5)))
    def test_derivative_matches_finite_difference(self, m, z):
        h = 1e-6
        try:
            fd = (dispersion_lhs(m, z + h) - dispersion_lhs(m, z - h)) / (2 * h)
            an = dispersion_lhs_derivative(m, z)
        except PoleError:
            return
        assert abs(fd - an) <= 1e-5 * max(1.0, abs(an))

    def test_matches_ratio_definition(self):
        z = 5.3 + 0.7j
        for m in (0, 1, 3):
            ref = z * complex(mpmath.besselj(m, z, derivative=1)) / mp_j(m, z)
            assert abs(dispersion_lhs(m, z) - ref) < 1e-12 * abs(ref)


class TestLommel:
    @given(
        m=st.integers(0, 6),
        a=st.builds(complex, st.floats(0, 30), st.floats(-6, 6)),
        b=st.builds(complex, st.floats(0, 30), st.floats(-6, 6)),
    )
    def test_matches_quadrature(self, m, a, b):
        q = quad_overlap(lambda r: bessel_j(m, a * r), lambda r: bessel_j(m, b * r), 96)
        scale = math.sqrt(
            quad_overlap(lambda r: np.abs(bessel_j(m, a * r)) ** 2, np.ones_like, 96).real
            * quad_overlap(lambda r: np.abs(bessel_j(m, b * r)) ** 2, np.ones_like, 96).real
        )
        # the scale underflows for tiny arguments; fall back to the integral itself
        assert abs(lommel_cross(m, a, b) - q) <= 1e-11 * max(scale, abs(q), 1e-300)

    def test_symmetric_in_arguments(self):
        a, b = 4.1 + 0.3j, 9.7 - 1.1j
        for m in (0, 2, 5):
            assert abs(lommel_cross(m, a, b) - lommel_cross(m, b, a)) < 1e-14 * abs(lommel_cross(m, a, b))

    def test_sign_of_argument(self):
        a, b = 4.1 + 0.3j, 9.7 - 1.1j
        for m in (0, 1, 2):
            assert abs(lommel_cross(m, a, -b) - (-1) ** m * lommel_cross(m, a, b)) < 1e-14

    def test_rigid_roots_are_orthogonal(self):
        for m in (0, 1, 3):
            zeros = sp.jnp_zeros(m, 5)
            for i in range(5):
                for j in range(i + 1, 5):
                    assert abs(lommel_cross(m, zeros[i], zeros[j])) < 1e-14

    def test_self_matches_quadrature(self):
        for m, a in ((0, 0.2 + 0.1j), (1, 3.0 + 1.0j), (4, 17.5 - 2.0j)):
            q = quad_overlap(lambda r: bessel_j(m, a * r), lambda r: bessel_j(m, a * r), 96)
            assert abs(lommel_self(m, a) - q) <= 1e-12 * max(1.0, abs(q))

    def test_continuous_through_degenerate_switch(self):
        m, a = 1, 6.2 + 0.8j
        edge = DEGENERATE_RTOL * abs(a)
        inside = lommel_cross(m, a, a + edge * (1 - 1e-9))
        outside = lommel_cross(m, a, a + edge * (1 + 1e-9))
        assert abs(inside - outside) < 1e-10 * abs(inside)

    def test_first_order_approach_to_self(self):
        m, a = 0, 3.3 + 0.4j
        eps = 1e-5
        h = 1e-4
        slope = (lommel_cross(m, a, a + h) - lommel_cross(m, a, a - h)) / (2 * h)
        diff = lommel_cross(m, a, a + eps) - lommel_self(m, a)
        assert abs(diff - eps * slope) < 1e-9

    def test_small_argument_series(self):
        a, b = 0.1 + 0.05j, 0.3 - 0.02j
        q = quad_overlap(lambda r: bessel_j(2, a * r), lambda r: bessel_j(2, b * r), 32)
        assert abs(lommel_cross(2, a, b) - q) < 1e-16


class TestRanges:
    def test_order_limits(self):
        with pytest.raises(RangeExceededError):
            bessel_j(201, 1.0)
        with pytest.raises(RangeExceededError):
            bessel_j(-1, 1.0)

    def test_argument_limits(self):
        with pytest.raises(RangeExceededError):
            bessel_j(0, 1e4)
        with pytest.raises(RangeExceededError):
            bessel_j(0, 800j)
        with pytest.raises(RangeExceededError):
            bessel_j(0, complex(np.nan, 0))

    def test_quadrature_order_limits(self):
        with pytest.raises(RangeExceededError):
            quad_overlap(np.ones_like, np.ones_like, order=4)
        assert abs(quad_overlap(np.ones_like, np.ones_like, order=8) - 0.5) < 1e-15
