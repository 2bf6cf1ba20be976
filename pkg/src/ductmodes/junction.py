"""Mode matching at the junction of a rigid duct (z < 0) and a lined duct (z > 0).

Rigid side:  p = sum_n psi_n(r) [A_n e^{-j Kr_n z} + B_n e^{+j Kr_n z}]
Lined side:  p = sum_n phi_n(r) C_n e^{-j Kl_n z}

with unit-norm rigid eigenfunctions psi_n and lined eigenfunctions phi_n.
The axial velocity of a wave e^{-j k z} is (k/K) p.  Pressure continuity is
projected on the left (adjoint) lined eigenfunctions conj(phi_i), which by
bi-orthogonality isolates C_i / K'_p,i; velocity continuity is projected on
the orthonormal rigid set.  With F_ij = int phi_i psi_j r dr and
M = F^T Kl K'_p F this gives

    (Kr + M) B = (Kr - M) A,     C = K'_p F (A + B).
"""

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import BoundarySpec, ModeSet, axial_wavenumber, build_mode, find_modes, rigid_modes
from .errors import IllConditionedError
from .nonortho import KP_CAP, kp
from .special_fn import bessel_j, lommel_cross

DEFAULT_N = 50
COND_LIMIT = 1.0e12


@dataclass(frozen=True)
class RigidBasis:
    """Unit-norm rigid-wall eigenfunctions psi_n = c_n J_m(alpha_n r)."""

    m: int
    alpha: np.ndarray
    coef: np.ndarray

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((self.alpha.size, r.size), dtype=np.complex128)
        for n, (a, c) in enumerate(zip(self.alpha, self.coef)):
            out[n] = c * bessel_j(self.m, a * r)
        return out


def rigid_basis(m, N):
    """The first ``N`` unit-norm rigid-wall eigenfunctions of order ``m``."""
    alpha = rigid_modes(m, N)
    spec = BoundarySpec(1.0, m, 0.0)
    coef = np.empty(N, dtype=np.complex128)
    for n, a in enumerate(alpha):
        md = build_mode(spec, n, a)
        coef[n] = md.scale / np.sqrt(md.norm)
    return RigidBasis(m=m, alpha=alpha, coef=coef)


def lined_coefficients(modes):
    """c_n such that phi_n = c_n J_m(gamma_n r) has unit norm."""
    return np.array([md.scale / np.sqrt(md.norm) for md in modes], dtype=np.complex128)


@dataclass(frozen=True)
class JunctionSolution:
    spec: BoundarySpec
    N: int
    modes: ModeSet
    rigid: RigidBasis
    F: np.ndarray
    G: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Kr: np.ndarray
    Kl: np.ndarray
    kp_prime_diag: np.ndarray
    condition: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def lined_field(self, r, z=0.0):
        """p on the lined side at radii ``r`` and axial position ``z`` >= 0."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        phase = self.C * np.exp(-1j * self.Kl * float(z))
        return phase @ _lined_values(self.modes, r)

    def rigid_field(self, r):
        """p on the rigid side at z = 0: Psi^T (A + B)."""
        return (self.A + self.B) @ self.rigid(r)


def _lined_values(modes, r):
    out = np.empty((len(modes), r.size), dtype=np.complex128)
    for n, (md, c) in enumerate(zip(modes, lined_coefficients(modes))):
        out[n] = c * bessel_j(md.m, md.gamma * r)
    return out


def coupling_matrix(spec, N=DEFAULT_N, modes=None, rigid=None):
    """F_ij = int_0^1 phi_i(r) psi_j(r) r dr.

    This is the overlap of psi_j with the conjugate of the left lined
    eigenfunction conj(phi_i), so no conjugation appears.
    """
    if modes is None:
        modes = find_modes(spec, N)
    if rigid is None:
        rigid = rigid_basis(spec.m, N)
    cl = lined_coefficients(modes)
    F = np.empty((len(modes), rigid.alpha.size), dtype=np.complex128)
    for i, md in enumerate(modes):
        for j, a in enumerate(rigid.alpha):
            F[i, j] = lommel_cross(spec.m, md.gamma, a) * cl[i] * rigid.coef[j]
    return F


def incident_amplitudes(spec, N=DEFAULT_N, modes=None, rigid=None):
    """A_i = int psi_i conj(phi_0) r dr: the lined mode 0 profile, conjugated, on the rigid set.

    The whole normalised profile conj(c_0 J_m(gamma_0 r)) is conjugated;
    since the normalisation constant Lambda is real, conjugating it or not
    makes no difference.
    """
    if modes is None:
        modes = find_modes(spec, 1)
    if rigid is None:
        rigid = rigid_basis(spec.m, N)
    md = modes[0]
    c0 = np.conj(lined_coefficients([md])[0])
    g0 = md.gamma.conjugate()
    return np.array(
        [lommel_cross(spec.m, a, g0) * c * c0 for a, c in zip(rigid.alpha, rigid.coef)],
        dtype=np.complex128,
    )


def solve_junction(spec, A=None, N=DEFAULT_N, modes=None, cap=KP_CAP):
    """Scattering of the incident rigid amplitudes ``A`` at the lined junction.

    ``A`` defaults to :func:`incident_amplitudes`.

    Raises
    ------
    IllConditionedError
        When the 1-norm condition number of Kr + F^T Kl K'_p F exceeds 1e12.
    """
    if modes is None:
        modes = find_modes(spec, N)
    if len(modes) != N:
        raise ValueError("mode set size must equal the truncation N")
    rigid = rigid_basis(spec.m, N)
    if A is None:
        A = incident_amplitudes(spec, N, modes=modes, rigid=rigid)
    A = np.asarray(A, dtype=np.complex128)
    if A.shape != (N,):
        raise ValueError(f"A must have length N={N}")
    F = coupling_matrix(spec, N, modes=modes, rigid=rigid)
    Kr = np.array([axial_wavenumber(spec.K, a) for a in rigid.alpha], dtype=np.complex128)
    Kl = np.array([md.k_axial for md in modes], dtype=np.complex128)
    reports = [kp(md, cap) for md in modes]
    kpp = np.array([rep.kp_prime for rep in reports], dtype=np.complex128)
    M = F.T @ ((Kl * kpp)[:, None] * F)
    lhs = np.diag(Kr) + M
    rhs = np.diag(Kr) - M
    cond = float(np.abs(np.linalg.cond(lhs, 1)))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"junction system condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    G = np.linalg.solve(lhs, rhs)
    B = G @ A
    C = kpp * (F @ (A + B))
    diag = {
        "condition": cond,
        "kp_capped": [rep.mode_index for rep in reports if rep.capped],
        "near_ep": bool(modes.near_ep),
    }
    return JunctionSolution(
        spec=spec,
        N=N,
        modes=modes,
        rigid=rigid,
        F=F,
        G=G,
        A=A,
        B=B,
        C=C,
        Kr=Kr,
        Kl=Kl,
        kp_prime_diag=kpp,
        condition=cond,
        diagnostics=diag,
    )


def pressure_field(sol, r, z):
    """Lined-side pressure p(r, z) = sum_n C_n phi_n(r) e^{-j Kl_n z}."""
    if np.any(np.asarray(z) < 0):
        raise ValueError("z must be >= 0 on the lined side")
    vals = sol.lined_field(r, z)
    return complex(vals[0]) if np.ndim(r) == 0 else vals


def rigid_flux(sol):
    """Net axial power through z = 0- : 0.5 Re sum (A+B) conj(Kr (A-B)) / K.

    Includes the interference terms between incident and reflected
    evanescent modes, which carry power in pairs.
    """
    K = sol.spec.K
    return float(0.5 * np.real(np.sum((sol.A + sol.B) * np.conj(sol.Kr * (sol.A - sol.B)))) / K)


def incident_flux(sol):
    return float(0.5 * np.real(np.sum(np.abs(sol.A) ** 2 * np.conj(sol.Kr))) / sol.spec.K)


def reflected_flux(sol):
    return float(0.5 * np.real(np.sum(np.abs(sol.B) ** 2 * np.conj(sol.Kr))) / sol.spec.K)


def continuity_residuals(sol, npts=64):
    """Pointwise and projected mismatch of pressure and axial velocity at z = 0.

    Returns a dict with ``pressure`` and ``velocity`` (max over a
    Gauss-Legendre radial grid of the field mismatch, divided by ||A||) and
    ``pressure_weak``/``velocity_weak`` (norm of the projected equations the
    solver enforces, divided by ||A||).
    """
    from .special_fn import gauss_legendre_unit

    r, _ = gauss_legendre_unit(npts)
    psi = sol.rigid(r)
    phi = _lined_values(sol.modes, r)
    K = sol.spec.K
    norm_a = float(np.linalg.norm(sol.A)) or 1.0
    p_r = (sol.A + sol.B) @ psi
    p_l = sol.C @ phi
    v_r = (sol.Kr * (sol.A - sol.B)) @ psi / K
    v_l = (sol.Kl * sol.C) @ phi / K
    weak_p = sol.F @ (sol.A + sol.B) - sol.C / sol.kp_prime_diag
    weak_v = sol.Kr * (sol.A - sol.B) - sol.F.T @ (sol.Kl * sol.C)
    return {
        "pressure": float(np.max(np.abs(p_r - p_l)) / norm_a),
        "velocity": float(np.max(np.abs(v_r - v_l)) / norm_a),
        "pressure_weak": float(np.linalg.norm(weak_p) / norm_a),
        "velocity_weak": float(np.linalg.norm(weak_v) / norm_a / K),
    }
