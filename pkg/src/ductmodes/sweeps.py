"""Admittance-plane sweeps of eigenvalues and nonorthogonality metrics.

The roots are seeded at beta0 = 0, carried to the lower-left grid cell,
continued along the bottom row, and then up every column.  Mode identity is
therefore fixed by continuity, with branch cuts running from each
exceptional point in the +Im(beta0) direction (the only places where two
neighbouring columns can disagree about which sheet is which).

``GammaRe``/``GammaIm`` report the tracked sheets.  ``Kp``/``SijRe``/
``SijIm`` are per-cell quantities attached to the modes ordered by
ascending Re(gamma) in each cell.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import os

import numpy as np

from .eigensolver import SEED_MARGIN, BoundarySpec, build_mode, canonical_gamma, continue_roots, find_modes
from .ep_locator import eps_in_window
from .errors import DuctModesError
from .nonortho import KP_CAP, kp, sij_matrix

MAX_RESOLUTION = 512


class Quantity(str, Enum):
    GAMMA_RE = "GammaRe"
    GAMMA_IM = "GammaIm"
    KP = "Kp"
    SIJ_RE = "SijRe"
    SIJ_IM = "SijIm"


@dataclass(frozen=True)
class GridResult:
    """Sweep output.

    ``values`` has shape ``(n_modes, n_im, n_re)`` for the gamma and Kp
    quantities (Kp stored as log10) and ``(n_modes, n_modes, n_im, n_re)``
    for the S_ij quantities.  ``mask`` marks failed cells, whose values are
    NaN.
    """

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray
    quantity: Quantity
    mask: np.ndarray
    ep_markers: list
    gammas: np.ndarray = field(repr=False, default=None)


def thread_count():
    """Worker cap from DUCTMODES_THREADS (default: number of CPUs)."""
    raw = os.environ.get("DUCTMODES_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _resolution(resolution):
    if np.ndim(resolution) == 0:
        nre = nim = int(resolution)
    else:
        nre, nim = (int(v) for v in resolution)
    for n in (nre, nim):
        if not 1 <= n <= MAX_RESOLUTION:
            raise ValueError(f"resolution must lie in 1..{MAX_RESOLUTION} per axis")
    return nre, nim


def _axis(lo, hi, n):
    return np.array([float(lo)]) if n == 1 else np.linspace(float(lo), float(hi), n)


def _walk(m, K, w, betas):
    """Continue ``w`` through ``betas``; a failed node is recorded as None.

    The state stays at the last node reached, so a single hard cell does
    not poison the rest of the line.
    """
    out = []
    prev = betas[0]
    for b in betas:
        if b == prev:
            out.append(w.copy())
            continue
        try:
            w_new, _ = continue_roots(m, K, w, prev, b)
        except DuctModesError:
            out.append(None)
            continue
        w, prev = w_new, b
        out.append(w.copy())
    return out


def track_grid(template, re_axis, im_axis, n_track):
    """Continued roots w = gamma^2 on the grid, shape (n_im, n_re, n_track); NaN on failure."""
    m, K = template.m, template.K
    seed = find_modes(template.with_beta(0.0), n_track, verify=False)
    w0 = seed.gammas.astype(np.complex128) ** 2
    b00 = complex(re_axis[0], im_axis[0])
    w0, _ = continue_roots(m, K, w0, 0.0, b00)
    row = _walk(m, K, w0, [complex(x, im_axis[0]) for x in re_axis])
    grid = np.full((im_axis.size, re_axis.size, n_track), np.nan + 0j)

    def column(ix):
        start = row[ix]
        if start is None:
            return ix, [None] * im_axis.size
        return ix, _walk(m, K, start, [complex(re_axis[ix], y) for y in im_axis])

    workers = min(thread_count(), re_axis.size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(column, range(re_axis.size)))
    else:
        results = [column(ix) for ix in range(re_axis.size)]
    for ix, col in sorted(results, key=lambda t: t[0]):
        for iy, w in enumerate(col):
            if w is not None:
                grid[iy, ix] = w
    return grid


def sweep(template, re_range, im_range, resolution, quantity, n_modes=2, cap=KP_CAP, margin=SEED_MARGIN):
    """Evaluate ``quantity`` for the first ``n_modes`` modes over a beta0 grid.

    Parameters
    ----------
    template : BoundarySpec
        Supplies K and m; its admittance is ignored.
    re_range, im_range : (float, float)
        Window in the admittance plane.
    resolution : int or (int, int)
        Grid points along Re and Im (at most 512 each).
    quantity : Quantity or str
    n_modes : int
        Number of reported modes.
    """
    quantity = Quantity(quantity)
    nre, nim = _resolution(resolution)
    re_axis = _axis(*re_range, nre)
    im_axis = _axis(*im_range, nim)
    n_track = n_modes + margin
    w = track_grid(template, re_axis, im_axis, n_track)
    mask = ~np.all(np.isfinite(w), axis=2)
    gam = np.full(w.shape, np.nan + 0j)
    for iy in range(nim):
        for ix in range(nre):
            if not mask[iy, ix]:
                gam[iy, ix] = [canonical_gamma(x) for x in w[iy, ix]]

    if quantity in (Quantity.GAMMA_RE, Quantity.GAMMA_IM):
        sheet = gam[:, :, :n_modes]
        part = sheet.real if quantity is Quantity.GAMMA_RE else sheet.imag
        values = np.moveaxis(part, 2, 0).copy()
    else:
        if quantity is Quantity.KP:
            values = np.full((n_modes, nim, nre), np.nan)
        else:
            values = np.full((n_modes, n_modes, nim, nre), np.nan)
        for iy in range(nim):
            for ix in range(nre):
                if mask[iy, ix]:
                    continue
                spec = template.with_beta(complex(re_axis[ix], im_axis[iy]))
                order = sorted(gam[iy, ix], key=lambda g: (round(g.real, 12), g.imag))[:n_modes]
                try:
                    modes = [build_mode(spec, n, g) for n, g in enumerate(order)]
                    if quantity is Quantity.KP:
                        values[:, iy, ix] = [np.log10(kp(md, cap).kp) for md in modes]
                    else:
                        s = sij_matrix(modes).s
                        values[:, :, iy, ix] = s.real if quantity is Quantity.SIJ_RE else s.imag
                except (DuctModesError, ArithmeticError, ValueError):
                    mask[iy, ix] = True
                    gam[iy, ix] = np.nan
    eps = eps_in_window(template.m, template.K, (re_axis[0], re_axis[-1]), (im_axis[0], im_axis[-1]))
    return GridResult(
        re_axis=re_axis,
        im_axis=im_axis,
        values=values,
        quantity=quantity,
        mask=mask,
        ep_markers=eps,
        gammas=gam[:, :, :n_modes],
    )
