"""Normalisation and nonorthogonality of lined-duct eigenfunctions.

For a dissipative wall the eigenproblem is complex symmetric, so the left
eigenfunction is the complex conjugate of the right one and the modes are
bi-orthogonal (int phi_i phi_j r dr = 0, i != j) rather than orthogonal.
Two ratios measure the departure from orthogonality:

* the self-nonorthogonality (Petermann factor)
  K'_p = int |phi|^2 r dr / int phi^2 r dr,  K_p = |K'_p|^2 >= 1;
* the mutual-nonorthogonality S_ij = int phi_i conj(phi_j) r dr on
  unit-norm eigenfunctions, |S_ij| <= 1.

Every integral is a radial Lommel form (the azimuthal factor cancels in each
ratio).  With phi = s J_m(gamma r) and Lambda = int |phi|^2 r dr, the
normalised eigenfunction is phi / sqrt(Lambda).
"""

from dataclasses import dataclass

import numpy as np

from .special_fn import SCALED_IMAG, bessel_j, lommel_cross, scaled_lommel

KP_CAP = 1.0e12


@dataclass(frozen=True)
class NonorthReport:
    mode_index: int
    self_overlap: complex
    kp_prime: complex
    kp: float
    capped: bool = False


@dataclass(frozen=True)
class OverlapMatrix:
    s: np.ndarray

    @property
    def shape(self):
        return self.s.shape

    def __getitem__(self, idx):
        return self.s[idx]


def normalization(mode):
    """Lambda = int_0^1 |s J_m(gamma r)|^2 r dr (real and positive)."""
    return mode.norm


def right_eigenfunction(mode):
    """r -> s J_m(gamma r) / sqrt(Lambda), the unit-norm eigenfunction."""
    c = mode.scale / np.sqrt(mode.norm)

    def phi(r):
        return c * bessel_j(mode.m, mode.gamma * np.asarray(r, dtype=float))

    return phi


def left_eigenfunction(mode):
    """Adjoint eigenfunction: the pointwise conjugate of :func:`right_eigenfunction`."""
    phi = right_eigenfunction(mode)

    def psi(r):
        return np.conj(phi(r))

    return psi


def raw_overlap(mode_i, mode_j, conjugate=True):
    """int phi_i phi_j r dr on unit-norm eigenfunctions, conjugating phi_j by default."""
    if mode_i.m != mode_j.m:
        raise ValueError("overlaps are only defined between modes of the same azimuthal order")
    gj = mode_j.gamma.conjugate() if conjugate else mode_j.gamma
    sj = mode_j.scale.conjugate() if conjugate else mode_j.scale
    if abs(mode_i.gamma.imag) + abs(gj.imag) > SCALED_IMAG:
        # surface waves far off the real axis: s = 1/J_m(gamma) for both factors
        val = scaled_lommel(mode_i.m, mode_i.gamma, gj)
    else:
        val = lommel_cross(mode_i.m, mode_i.gamma, gj) * mode_i.scale * sj
    return complex(val / np.sqrt(mode_i.norm * mode_j.norm))


def mutual_overlap(mode_i, mode_j):
    """S_ij = int phi_i conj(phi_j) r dr on unit-norm eigenfunctions."""
    if mode_i is mode_j:
        return 1.0 + 0.0j
    return raw_overlap(mode_i, mode_j, conjugate=True)


def self_overlap(mode):
    """int phi^2 r dr / int |phi|^2 r dr; 1 for lossless walls, 0 at an EP."""
    return raw_overlap(mode, mode, conjugate=False)


def kp(mode, cap=KP_CAP):
    """Petermann factor of one mode, capped at ``cap`` with a flag."""
    so = self_overlap(mode)
    if abs(so) ** 2 * cap <= 1.0:
        # exactly (or numerically) self-orthogonal; report the capped magnitude
        kpp = complex(np.sqrt(cap)) if so == 0 else np.sqrt(cap) * abs(so) / so
        return NonorthReport(mode.n, so, kpp, float(cap), True)
    kpp = 1.0 / so
    val = abs(kpp) ** 2
    if val > cap:
        return NonorthReport(mode.n, so, kpp, float(cap), True)
    return NonorthReport(mode.n, so, kpp, float(val), False)


def sij_matrix(modes):
    """Hermitian matrix of mutual overlaps with unit diagonal."""
    modes = list(modes)
    n = len(modes)
    s = np.eye(n, dtype=np.complex128)
    for i in range(n):
        for j in range(i + 1, n):
            v = raw_overlap(modes[i], modes[j], conjugate=True)
            s[i, j] = v
            s[j, i] = v.conjugate()
    return OverlapMatrix(s)


def biorthogonality_matrix(modes):
    """int phi_i phi_j r dr (no conjugate) on unit-norm eigenfunctions."""
    modes = list(modes)
    n = len(modes)
    b = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            v = raw_overlap(modes[i], modes[j], conjugate=False)
            b[i, j] = b[j, i] = v
    return b
