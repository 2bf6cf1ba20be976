"""Axial sound power in the lined section.

From W = 1/2 Re int_0^1 p conj(v_z) r dr with p = sum C_i phi_i e^{-j K_i z}
and v_z = sum (K_i/K) C_i phi_i e^{-j K_i z}:

    W(z) = 1/2 Re sum_ij C_i conj(C_j) (conj(K_j)/K) S_ij e^{-j (K_i - conj(K_j)) z}

with S_ij = int phi_i conj(phi_j) r dr.  The diagonal terms are the modal
powers, which decay as e^{2 Im(K_i) z}; the off-diagonal terms are the
cross powers carried by nonorthogonal mode pairs.  The azimuthal factor
(2 pi for m = 0) is omitted unless ``azimuthal=True``.
"""

from dataclasses import dataclass

import numpy as np

from .nonortho import sij_matrix


@dataclass(frozen=True)
class PowerProfile:
    z: np.ndarray
    W_total: np.ndarray
    W_modal: np.ndarray
    W_cross: np.ndarray


def _azimuthal_factor(m):
    return 2.0 * np.pi if m == 0 else np.pi


def power_matrix(sol):
    """Hermitian-part-free kernel P_ij = C_i conj(C_j) conj(K_j)/K S_ij at z = 0."""
    S = sij_matrix(sol.modes).s
    C = sol.C
    return np.outer(C, np.conj(C)) * (np.conj(sol.Kl) / sol.spec.K)[None, :] * S


def power_profile(sol, z_grid, azimuthal=False):
    """Total, modal (i = j) and cross (i != j) power on ``z_grid``."""
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1:
        raise ValueError("z_grid must be one-dimensional")
    if np.any(z < 0):
        raise ValueError("z_grid must be non-negative")
    if z.size > 1 and np.any(np.diff(z) < 0):
        raise ValueError("z_grid must be sorted")
    P = power_matrix(sol)
    K = sol.Kl
    # e^{-j (K_i - conj K_j) z} = e_i(z) conj(e_j(z)) with e_i = e^{-j K_i z}
    E = np.exp(-1j * np.outer(z, K))
    total = 0.5 * np.real(np.einsum("zi,ij,zj->z", E, P, np.conj(E)))
    modal = 0.5 * np.real(np.abs(E) ** 2 @ np.diag(P))
    cross = total - modal
    if azimuthal:
        f = _azimuthal_factor(sol.spec.m)
        total, modal, cross = f * total, f * modal, f * cross
    return PowerProfile(z=z, W_total=total, W_modal=modal, W_cross=cross)


def modal_decay_rates(sol):
    """Per-mode power decay rate -2 Im(K_l,i) per unit z."""
    return -2.0 * np.imag(np.asarray(sol.Kl))


def decay_rate(kl):
    """Power decay rate of a single axial wavenumber."""
    return -2.0 * complex(kl).imag
