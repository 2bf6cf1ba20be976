import math
import warnings

import mpmath
import numpy as np
import pytest

from ductmodes import BoundarySpec, find_modes, kp, left_eigenfunction, mutual_overlap, normalization, self_overlap, sij_matrix
from ductmodes.nonortho import biorthogonality_matrix, right_eigenfunction
from ductmodes.special_fn import quad_overlap

K = 30.0


def _modes(beta, count):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return find_modes(BoundarySpec(K, 0, beta), count)


class TestAgainstQuadrature:
    def test_normalisation(self, dissipative_modes):
        for md in list(dissipative_modes)[:6]:
            q = quad_overlap(lambda r: np.abs(md.radial(r)) ** 2, np.ones_like, 128).real
            assert abs(normalization(md) - q) < 1e-12 * q

    def test_mutual_overlaps(self, dissipative_modes):
        ms = list(dissipative_modes)[:6]
        S = sij_matrix(ms).s
        for i, a in enumerate(ms):
            for j, b in enumerate(ms):
                q = quad_overlap(right_eigenfunction(a), left_eigenfunction(b), 128)
                assert abs(S[i, j] - q) < 1e-12

    def test_self_overlap(self, dissipative_modes):
        md = dissipative_modes[1]
        phi = right_eigenfunction(md)
        assert abs(self_overlap(md) - quad_overlap(phi, phi, 128)) < 1e-12

    def test_far_surface_wave_against_mpmath(self):
        # |Im gamma| ~ 450: the direct Bessel product would overflow
        md = _modes(15j, 2)[0]
        g = mpmath.mpc(md.gamma.real, md.gamma.imag)
        mpmath.mp.dps = 30
        jg = mpmath.besselj(0, g)
        f = lambda r: abs(mpmath.besselj(0, g * r) / jg) ** 2 * r  # noqa: E731
        ref = float(mpmath.quad(f, [0, 0.9, 0.97, 0.99, 1]))
        assert abs(md.norm - ref) < 1e-10 * ref
        assert abs(kp(md).kp - 1.0) < 1e-12


class TestLimitingWalls:
    @pytest.mark.parametrize("beta", [0.0, 10j, complex(math.inf), 2j, 0.3j])
    def test_orthogonal_when_self_adjoint(self, beta):
        ms = _modes(beta, 10)
        S = sij_matrix(ms).s
        assert np.max(np.abs(S - np.eye(10))) < 1e-8
        for md in ms:
            rep = kp(md)
            assert abs(rep.kp - 1.0) < 1e-8
            assert not rep.capped


class TestProperties:
    def test_hermitian_and_bounded(self, dissipative_modes):
        S = sij_matrix(list(dissipative_modes)[:12]).s
        assert np.allclose(S, S.conj().T, atol=1e-15)
        assert np.allclose(np.diag(S), 1.0)
        assert np.all(np.abs(S) <= 1.0 + 1e-12)

    def test_biorthogonal(self, dissipative_modes):
        B = biorthogonality_matrix(list(dissipative_modes)[:10])
        off = B - np.diag(np.diag(B))
        assert np.max(np.abs(off)) < 1e-10

    def test_petermann_at_least_one(self):
        for beta in (0.4 + 0.2j, 0.05 + 0.1j, 1.0 - 0.5j, 0.1 + 0.0j):
            for md in _modes(beta, 8):
                assert kp(md).kp >= 1.0 - 1e-12

    def test_left_is_conjugate_of_right(self, dissipative_modes):
        md = dissipative_modes[2]
        r = np.linspace(0, 1, 7)
        assert np.allclose(left_eigenfunction(md)(r), np.conj(right_eigenfunction(md)(r)))

    def test_mixed_orders_rejected(self):
        a = find_modes(BoundarySpec(K, 0, 0.1), 1)[0]
        b = find_modes(BoundarySpec(K, 1, 0.1), 1)[0]
        with pytest.raises(ValueError):
            mutual_overlap(a, b)


class TestNearCoalescence:
    def test_at_ep(self, ep1):
        ms = _modes(ep1.beta_ep, 3)
        assert abs(abs(mutual_overlap(ms[0], ms[1])) - 1) < 1e-6
        for i in (0, 1):
            assert abs(self_overlap(ms[i])) < 1e-4
            assert kp(ms[i]).kp > 1e8

    def test_growth_towards_ep(self, ep1):
        vals = []
        for d in (1e-3, 1e-4, 1e-5):
            ms = _modes(ep1.beta_ep + d, 3)
            vals.append(kp(ms[0]).kp)
        # K_p grows like 1/|beta - beta_ep|
        assert 5 < vals[1] / vals[0] < 20 and 5 < vals[2] / vals[1] < 20

    def test_cap_flag(self, ep1):
        ms = _modes(ep1.beta_ep, 3)
        rep = kp(ms[0], cap=1e3)
        assert rep.capped and rep.kp == 1e3
        assert abs(abs(rep.kp_prime) ** 2 - 1e3) < 1e-6

    def test_case2_values(self):
        ms = _modes(0.0993 + 0.0427j, 2)
        assert kp(ms[0]).kp == pytest.approx(819.4, rel=1e-3)
        assert kp(ms[1]).kp == pytest.approx(815.4, rel=1e-3)


class TestApproachToLossless:
    def test_petermann_decreases_to_one(self):
        # resistive part shrinking at fixed reactance
        res = [0.1, 0.05, 0.02, 0.01, 0.005]
        vals = np.array([[kp(md).kp for md in _modes(complex(r, 0.2), 3)] for r in res])
        assert np.all(np.diff(vals, axis=0) < 0)
        assert np.all(vals > 1.0)
        assert np.max(vals[-1] - 1.0) < 1e-3
