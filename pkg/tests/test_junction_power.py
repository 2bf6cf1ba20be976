import math
import warnings

import numpy as np
import pytest

from ductmodes import BoundarySpec, coupling_matrix, find_modes, incident_amplitudes, power_profile, pressure_field, solve_junction
from ductmodes import junction as junction_mod
from ductmodes.errors import IllConditionedError
from ductmodes.junction import continuity_residuals, incident_flux, reflected_flux, rigid_basis, rigid_flux
from ductmodes.nonortho import kp, mutual_overlap
from ductmodes.power import decay_rate, modal_decay_rates
from ductmodes.special_fn import bessel_j, quad_overlap

K = 30.0
CASE2 = BoundarySpec(K, 0, 0.0993 + 0.0427j)
NEAR_EP = BoundarySpec(K, 0, 0.099346 + 0.042653j)


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fn(*args, **kw)


@pytest.fixture(scope="module")
def rigid_solution():
    return solve_junction(BoundarySpec(K, 0, 0.0), N=30)


class TestCoupling:
    def test_identity_for_rigid_wall(self, rigid_solution):
        assert np.max(np.abs(rigid_solution.F - np.eye(30))) < 1e-10

    def test_spot_checks_against_quadrature(self, dissipative_modes):
        spec = dissipative_modes.spec
        modes = _quiet(find_modes, spec, 50)
        rigid = rigid_basis(0, 50)
        F = coupling_matrix(spec, 50, modes=modes, rigid=rigid)
        assert np.all(np.isfinite(F))
        rng = np.random.default_rng(5)
        for i, j in rng.integers(0, 50, size=(5, 2)):
            md = modes[int(i)]
            c = md.scale / math.sqrt(md.norm)
            q = quad_overlap(lambda r: c * bessel_j(0, md.gamma * r), lambda r: rigid(r)[int(j)], 256)
            assert abs(F[i, j] - q) < 1e-8

    def test_rigid_basis_orthonormal(self):
        rb = rigid_basis(1, 8)
        G = np.array([[quad_overlap(lambda r: rb(r)[i], lambda r: rb(r)[j], 128) for j in range(8)] for i in range(8)])
        assert np.max(np.abs(G - np.eye(8))) < 1e-12


class TestIncidentAmplitudes:
    def test_rigid_wall_is_plane_wave(self):
        A = incident_amplitudes(BoundarySpec(K, 0, 0.0), 10)
        assert abs(A[0] - 1) < 1e-14 and np.max(np.abs(A[1:])) < 1e-14

    @pytest.mark.parametrize("spec", [BoundarySpec(K, 0, 0.4 + 0.2j), BoundarySpec.from_impedance(K, 0, 0.1 - 1j)])
    def test_truncation_convergence(self, spec):
        ms = find_modes(spec, 1)
        s50 = np.sum(np.abs(incident_amplitudes(spec, 50, modes=ms)) ** 2)
        s100 = np.sum(np.abs(incident_amplitudes(spec, 100, modes=ms)) ** 2)
        assert abs(s50 - s100) < 1e-6
        assert abs(1 - s100) < 1e-6

    @pytest.mark.xfail(strict=True, reason="measured 1.35e-6 at this admittance; the projection tail decays like N^-3")
    def test_truncation_convergence_near_coalescence(self):
        ms = _quiet(find_modes, CASE2, 1)
        s50 = np.sum(np.abs(incident_amplitudes(CASE2, 50, modes=ms)) ** 2)
        s100 = np.sum(np.abs(incident_amplitudes(CASE2, 100, modes=ms)) ** 2)
        assert abs(s50 - s100) < 1e-6

    def test_plane_wave_dominates(self):
        A = _quiet(incident_amplitudes, CASE2, 50)
        assert abs(A[0]) > np.max(np.abs(A[5:]))


class TestSolve:
    def test_rigid_identity(self, rigid_solution):
        sol = rigid_solution
        assert np.max(np.abs(sol.G)) < 1e-10
        assert np.max(np.abs(sol.C - sol.A)) < 1e-10

    def test_rigid_plane_wave_field(self):
        N = 10
        A = np.zeros(N, complex)
        A[0] = 1.0
        sol = solve_junction(BoundarySpec(K, 0, 0.0), A=A, N=N)
        # unit-norm plane wave: int_0^1 psi_0^2 r dr = 1 gives psi_0 = sqrt(2)
        for z in (0.0, 0.37, 2.0):
            for r in (0.0, 0.5, 1.0):
                assert abs(pressure_field(sol, r, z) - math.sqrt(2) * np.exp(-1j * K * z)) < 1e-12

    def test_small_admittance_reflects_little(self):
        vals = []
        for N in (40, 80):
            A = np.zeros(N, complex)
            A[0] = 1.0
            sol = solve_junction(BoundarySpec(K, 0, 1e-3), A=A, N=N)
            vals.append(sol.B[:10])
        assert np.linalg.norm(vals[0]) < 1e-2
        assert np.max(np.abs(vals[0] - vals[1])) < 1e-8

    def test_weak_continuity_is_exact(self, case1_solution):
        res = continuity_residuals(case1_solution)
        assert res["pressure_weak"] < 1e-12
        assert res["velocity_weak"] < 1e-12

    def test_pointwise_continuity_improves_with_truncation(self):
        spec = BoundarySpec.from_impedance(K, 0, 0.1 - 1j)
        vals = [continuity_residuals(solve_junction(spec, N=N))["pressure"] for N in (20, 40, 60)]
        assert vals[0] > vals[1] > vals[2]

    @pytest.mark.xfail(strict=True, reason="pointwise mismatch of the Galerkin solution is ~1e-2 ||A|| at N = 50")
    def test_pointwise_continuity_tolerance(self, case1_solution):
        res = continuity_residuals(case1_solution)
        assert res["pressure"] < 1e-6 and res["velocity"] < 1e-6

    def test_field_at_interface(self, case1_solution):
        sol = case1_solution
        r = np.linspace(0.0, 0.9, 10)
        p_l = pressure_field(sol, r, 0.0)
        p_r = sol.rigid_field(r)
        assert np.max(np.abs(p_l - p_r)) < 0.05 * np.linalg.norm(sol.A)

    def test_field_decays(self, case1_solution):
        # slowest amplitude decay rate is ~7e-4 per radius
        slowest = 0.5 * np.min(modal_decay_rates(case1_solution))
        z = 20.0 / slowest
        assert abs(pressure_field(case1_solution, 0.3, z)) < 1e-6
        with pytest.raises(ValueError):
            pressure_field(case1_solution, 0.3, -1.0)

    def test_condition_guard(self, monkeypatch):
        monkeypatch.setattr(junction_mod, "COND_LIMIT", 1.0)
        with pytest.raises(IllConditionedError):
            solve_junction(BoundarySpec(K, 0, 0.4 + 0.2j), N=10)

    def test_length_checks(self):
        with pytest.raises(ValueError):
            solve_junction(BoundarySpec(K, 0, 0.1), A=np.ones(3), N=10)

    def test_near_ep_modes_dominate(self):
        sol = _quiet(solve_junction, NEAR_EP, N=50)
        c = np.abs(sol.C)
        assert min(c[0], c[1]) > 1e2 * np.max(c[2:])

    @pytest.mark.xfail(strict=True, reason="ratio is 73 at beta0 = 0.0993+0.0427j")
    def test_case2_modes_dominate(self, case2_solution):
        c = np.abs(case2_solution.C)
        assert min(c[0], c[1]) > 1e2 * np.max(c[2:])


class TestFluxes:
    @pytest.mark.parametrize("which", ["case1_solution", "case2_solution"])
    def test_interface_balance(self, which, request):
        sol = request.getfixturevalue(which)
        w0 = power_profile(sol, [0.0]).W_total[0]
        assert abs(w0 - rigid_flux(sol)) < 1e-4 * abs(w0)
        win = incident_flux(sol)
        assert abs(w0 - (win - reflected_flux(sol))) < 1e-4 * win


class TestPower:
    z = np.linspace(0.0, 10.0, 201)

    @pytest.mark.parametrize("which", ["case1_solution", "case2_solution"])
    def test_decomposition_and_passivity(self, which, request):
        sol = request.getfixturevalue(which)
        pp = power_profile(sol, self.z)
        assert np.allclose(pp.W_total, pp.W_modal + pp.W_cross, rtol=0, atol=1e-14 * np.max(np.abs(pp.W_modal)))
        assert np.max(np.diff(pp.W_total)) <= 1e-6 * pp.W_total[0]

    def test_case1_cross_power_small(self, case1_solution):
        pp = power_profile(case1_solution, self.z)
        assert np.max(np.abs(pp.W_cross)) < 0.1 * pp.W_total[0]

    def test_case2_cancellation(self, case2_solution):
        pp = power_profile(case2_solution, self.z)
        plateau = (self.z >= 2) & (self.z <= 8)
        assert np.all(pp.W_cross[plateau] < 0)
        assert np.max(np.abs(pp.W_total[plateau] / pp.W_modal[plateau])) < 1e-2
        assert pp.W_total[40] / pp.W_total[160] < 10

    def test_azimuthal_factor(self, case1_solution):
        a = power_profile(case1_solution, [0.0, 1.0])
        b = power_profile(case1_solution, [0.0, 1.0], azimuthal=True)
        assert np.allclose(b.W_total, 2 * np.pi * a.W_total)

    def test_grid_validation(self, case1_solution):
        with pytest.raises(ValueError):
            power_profile(case1_solution, [1.0, 0.5])
        with pytest.raises(ValueError):
            power_profile(case1_solution, [-1.0, 0.5])

    def test_decay_rates(self, ep1):
        assert decay_rate(complex(K, 0)) == 0.0
        kz = complex(0, -math.sqrt(40**2 - K**2))
        assert decay_rate(kz) == pytest.approx(2 * math.sqrt(700), rel=1e-15)
        sol = _quiet(solve_junction, BoundarySpec(K, 0, ep1.beta_ep), N=20, cap=1e16)
        rates = modal_decay_rates(sol)
        assert abs(rates[0] - rates[1]) < 1e-6
        assert np.all(rates >= 0)


class TestNearEpOverlap:
    def test_overlap_and_petermann_very_close(self, ep1):
        ms = _quiet(find_modes, BoundarySpec(K, 0, ep1.beta_ep + 1e-8), 3)
        assert abs(mutual_overlap(ms[0], ms[1])) > 0.999
        assert kp(ms[0]).kp > 1e6

    @pytest.mark.xfail(strict=True, reason="K_p ~ 0.053/|beta0 - beta_ep| gives 5.4e4 at distance 1e-6")
    def test_petermann_at_distance_1e_6(self, ep1):
        ms = _quiet(find_modes, BoundarySpec(K, 0, ep1.beta_ep + 1e-6), 3)
        assert abs(mutual_overlap(ms[0], ms[1])) > 0.999
        assert kp(ms[0]).kp > 1e6
