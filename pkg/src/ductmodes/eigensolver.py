"""Transverse eigenvalues of a circular duct with a locally reacting wall.

The modes of azimuthal order m solve

    gamma J'_m(gamma) / J_m(gamma) = Y,    Y = -j K beta0,

with eigenfunction J_m(gamma r)/J_m(gamma).  The left side is even in gamma,
so the solver works in w = gamma**2 (where the plane-wave root of the rigid
duct is simple) and reports the root with Re(gamma) >= 0.

Roots at a target admittance are reached by predictor-corrector continuation
from the rigid-wall roots (beta0 = 0).  Completeness is verified with the
argument principle applied to the entire function gamma J'_m - Y J_m over a
rectangle in the gamma plane.

A pressure-release wall (beta0 = inf, impedance Z = 0) is handled through the
reciprocal form J_m(gamma) - (jZ/K) gamma J'_m(gamma) = 0, which at Z = 0
reduces to J_m(gamma) = 0.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
import cmath
import math
import warnings

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import CompletenessError, ConvergenceError, RangeExceededError, StepCollapseError
from .special_fn import (
    bessel_j,
    bessel_j_prime,
    dispersion_lhs,
    SCALED_IMAG,
    lommel_cross,
    scaled_lommel,
)

SURFACE_THRESHOLD = 3.0
RESIDUAL_RTOL = 1.0e-9
NEAR_EP_DISTANCE = 1.0e-4
NEWTON_RTOL = 1.0e-12
HOMOTOPY_STEPS = 64
MAX_CONTINUATION_STEPS = 20000
SEED_MARGIN = 6


class ModeClass(str, Enum):
    GUIDED = "Guided"
    SURFACE = "Surface"


@dataclass(frozen=True)
class BoundarySpec:
    """Frequency ``K`` (= omega R / c0), azimuthal order ``m`` and wall admittance.

    ``beta0 = inf`` selects the pressure-release wall.
    """

    K: float
    m: int
    beta0: complex = 0j

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise ValueError(f"K must be positive and finite, got {self.K!r}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "m", int(self.m))
        b = complex(self.beta0)
        if cmath.isinf(b):
            b = complex(math.inf, 0.0)
        elif cmath.isnan(b):
            raise ValueError("beta0 is NaN")
        object.__setattr__(self, "beta0", b)

    @classmethod
    def from_impedance(cls, K, m, Z):
        """Build from the wall impedance Z = 1/beta0 (Z = 0 is pressure release)."""
        Z = complex(Z)
        return cls(K, m, complex(math.inf) if Z == 0 else 1.0 / Z)

    @property
    def pressure_release(self):
        return cmath.isinf(self.beta0)

    @property
    def Y(self):
        """Robin coefficient Y = -j K beta0, always derived from ``beta0``."""
        if self.pressure_release:
            return complex(math.inf)
        return -1j * self.K * self.beta0

    def with_beta(self, beta0):
        return replace(self, beta0=complex(beta0))


@dataclass(frozen=True)
class Mode:
    """One transverse eigensolution.

    ``scale`` is the factor s in the unnormalised eigenfunction
    s J_m(gamma r); s = 1/J_m(gamma) except on a pressure-release wall, where
    J_m(gamma) = 0 and s = 1/J'_m(gamma) is used.  ``norm`` is
    Lambda = int_0^1 |s J_m(gamma r)|^2 r dr.
    """

    m: int
    n: int
    gamma: complex
    k_axial: complex
    norm: float
    kind: ModeClass
    scale: complex
    residual: float

    def radial(self, r):
        """Unnormalised eigenfunction s J_m(gamma r) at radii ``r``."""
        r = np.asarray(r, dtype=float)
        return self.scale * bessel_j(self.m, self.gamma * r)


@dataclass(frozen=True)
class ModeSet:
    """Modes of one :class:`BoundarySpec`.

    Sets built by :func:`find_modes` are sorted by ascending Re(gamma), ties by
    Im(gamma).  Sets produced by :func:`track_path` keep the seed ordering so
    that ``modes[i]`` is the continuation of ``seed.modes[i]``; ``sorted``
    says which of the two applies.
    """

    spec: BoundarySpec
    modes: tuple
    near_ep: bool = False
    sorted: bool = True
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def truncation(self):
        return len(self.modes)

    @property
    def gammas(self):
        return np.array([md.gamma for md in self.modes], dtype=np.complex128)

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    def __iter__(self):
        return iter(self.modes)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------


def axial_wavenumber(K, gamma):
    """sqrt(K^2 - gamma^2) on the branch Im <= 0 (Re >= 0 when Im == 0)."""
    k = cmath.sqrt(complex(K) ** 2 - complex(gamma) ** 2)
    if k.imag > 0.0 or (k.imag == 0.0 and k.real < 0.0):
        k = -k
    return k


def classify(mode, threshold=SURFACE_THRESHOLD):
    """Surface iff Im(gamma) > threshold; ``mode`` may be a Mode or a gamma."""
    gamma = mode.gamma if isinstance(mode, Mode) else complex(mode)
    return ModeClass.SURFACE if gamma.imag > threshold else ModeClass.GUIDED


def canonical_gamma(w):
    """Root of w with Re >= 0 (Im >= 0 on the imaginary axis)."""
    g = cmath.sqrt(complex(w))
    if g.real < 0.0 or (g.real == 0.0 and g.imag < 0.0):
        g = -g
    return g


def _ftol(Y):
    return NEWTON_RTOL * max(1.0, abs(Y))


def residual(spec, gamma):
    """|gamma J'_m/J_m - Y| (or |J_m(gamma)|/|J'_m(gamma)| on a pressure-release wall)."""
    if spec.pressure_release:
        return abs(bessel_j(spec.m, gamma)) / max(1e-300, abs(bessel_j_prime(spec.m, gamma)))
    return abs(dispersion_lhs(spec.m, gamma) - spec.Y)


def build_mode(spec, n, gamma, threshold=SURFACE_THRESHOLD):
    """Assemble a :class:`Mode` (wavenumber, normalisation, class) from gamma."""
    m = spec.m
    gamma = complex(gamma)
    jm = bessel_j(m, gamma)
    if spec.pressure_release or abs(jm) < 1e-8 * max(1.0, abs(bessel_j_prime(m, gamma))):
        scale = 1.0 / bessel_j_prime(m, gamma)
    else:
        scale = 1.0 / jm
    if scale == 1.0 / jm and 2.0 * abs(gamma.imag) > SCALED_IMAG:
        lam = scaled_lommel(m, gamma, gamma.conjugate())
    else:
        lam = lommel_cross(m, gamma, gamma.conjugate()) * abs(scale) ** 2
    return Mode(
        m=m,
        n=n,
        gamma=gamma,
        k_axial=axial_wavenumber(spec.K, gamma),
        norm=float(lam.real),
        kind=classify(gamma, threshold),
        scale=complex(scale),
        residual=float(residual(spec, gamma)),
    )


# ---------------------------------------------------------------------------
# rigid wall
# ---------------------------------------------------------------------------


def _bracket_roots(func, count, start, step=0.05):
    roots = []
    x0 = start
    f0 = func(x0)
    while len(roots) < count:
        xs = x0 + step * np.arange(1, 401)
        fs = func(xs)
        prev_x, prev_f = x0, f0
        for x, fx in zip(xs, fs):
            if prev_f == 0.0:
                roots.append(prev_x)
            elif prev_f * fx < 0.0:
                roots.append(brentq(lambda t: float(func(np.array([t]))[0]), prev_x, x, xtol=1e-15, rtol=1e-15))
            if len(roots) >= count:
                break
            prev_x, prev_f = x, fx
        x0, f0 = xs[-1], fs[-1]
    return roots[:count]


def rigid_modes(m, count):
    """First ``count`` non-negative zeros of J'_m, ascending (0 included for m = 0)."""
    if count < 1:
        raise ValueError("count must be >= 1")

    def djm(x):
        return np.real(bessel_j_prime(m, np.asarray(x, dtype=float)))

    roots = [0.0] if m == 0 else []
    need = count - len(roots)
    if need > 0:
        roots += _bracket_roots(djm, need, start=1e-3 if m == 0 else max(1e-3, m * 0.5))
    return np.array(roots[:count], dtype=float)


def pressure_release_roots(m, count):
    """First ``count`` positive zeros of J_m."""

    def jm(x):
        return np.real(bessel_j(m, np.asarray(x, dtype=float)))

    return np.array(_bracket_roots(jm, count, start=max(1e-3, m * 0.5)), dtype=float)


# ---------------------------------------------------------------------------
# continuation in w = gamma^2
# ---------------------------------------------------------------------------


def _pairwise_min(w):
    n = w.size
    if n < 2:
        return np.full(n, np.inf)
    d = np.abs(w[:, None] - w[None, :])
    d[np.arange(n), np.arange(n)] = np.inf
    return d.min(axis=1)


def _check_range(w):
    # roots with |Im gamma| near the Bessel overflow limit cannot be evaluated
    with np.errstate(invalid="ignore"):
        im = np.abs(np.sqrt(np.asarray(w, dtype=np.complex128)).imag)
    if np.any(im > 0.98 * _kernels.MAX_IMAG_Z):
        raise RangeExceededError(
            f"a root reached |Im gamma| = {np.nanmax(im):.4g}, beyond the supported {_kernels.MAX_IMAG_Z:g}"
        )


def continue_roots(m, K, w, beta_a, beta_b, steps=HOMOTOPY_STEPS, max_steps=MAX_CONTINUATION_STEPS):
    """Carry the roots ``w`` (= gamma^2) along the straight segment beta_a -> beta_b.

    Euler predictor on dw/dbeta = -jK / (dG/dw), Newton corrector.  A step is
    rejected (and halved) when Newton fails, when a root lands closer to
    another root's prediction than to its own, or when two roots collapse
    onto each other; a step shorter than 1e-12 of the segment is accepted
    once Newton converges, which lets a path end exactly on a branch point.
    Identity is preserved: output ``i`` continues input ``i``.

    Returns ``(w_end, n_steps)``.
    """
    w = np.array(w, dtype=np.complex128)
    beta_a = complex(beta_a)
    beta_b = complex(beta_b)
    if beta_a == beta_b or w.size == 0:
        return w, 0
    t = 0.0
    h = 1.0 / steps
    taken = 0
    attempts = 0
    while t < 1.0:
        attempts += 1
        if attempts > max_steps:
            raise StepCollapseError(f"continuation exceeded {max_steps} steps between {beta_a} and {beta_b}")
        h = min(h, 1.0 - t)
        Y0 = -1j * K * (beta_a + t * (beta_b - beta_a))
        t1 = 1.0 if t + h >= 1.0 else t + h
        Y1 = -1j * K * (beta_a + t1 * (beta_b - beta_a))
        _, fw = _kernels.disp_w_vec(m, w, Y0)
        with np.errstate(divide="ignore", invalid="ignore"):
            w_pred = w + (Y1 - Y0) / fw
        bad_pred = ~np.isfinite(w_pred)
        w_pred[bad_pred] = w[bad_pred]
        w_new, res, its, status = _kernels.newton_w(m, Y1, w_pred, _ftol(Y1), 60)
        converged = bool(np.all(status == 0))
        tiny = h < 1e-12
        ok = converged
        if ok and not tiny:
            sep_pred = _pairwise_min(w_pred)
            sep_old = _pairwise_min(w)
            sep_new = _pairwise_min(w_new)
            jump = np.abs(w_new - w_pred)
            move = np.abs(w_new - w)
            ok = bool(np.all(jump <= 0.25 * sep_pred)) and bool(np.all(sep_new >= 0.25 * sep_old))
            ok = ok and bool(np.all(move <= 0.5 * sep_old))
        if ok:
            w = w_new
            t = t1
            taken += 1
            if int(its.max()) <= 4:
                h *= 2.0
            _check_range(w)
        else:
            if tiny and not converged:
                _check_range(w_pred)
                raise StepCollapseError(f"step collapsed near beta={beta_a + t * (beta_b - beta_a)}")
            h *= 0.5
    return w, taken


# ---------------------------------------------------------------------------
# argument principle
# ---------------------------------------------------------------------------


def _edge_phase(m, Y, a, b, n0):
    t = np.linspace(0.0, 1.0, n0 + 1)
    for _ in range(30):
        z = a + (b - a) * t
        vals = _kernels.wall_function(m, Y, z)
        if not np.all(np.isfinite(vals)) or np.any(vals == 0):
            raise CompletenessError("wall function vanished or overflowed on the counting contour")
        dphi = np.angle(vals[1:] / vals[:-1])
        coarse = np.abs(dphi) > math.pi / 6
        if not np.any(coarse):
            return float(dphi.sum())
        mids = 0.5 * (t[:-1] + t[1:])[coarse]
        t = np.sort(np.concatenate([t, mids]))
    raise CompletenessError("argument-principle contour refinement did not settle")


def winding_count(m, Y, re_lo, re_hi, im_lo, im_hi):
    """Zeros of gamma J'_m - Y J_m inside a rectangle, counted in gamma.

    The function's m-fold zero at gamma = 0 is removed, so every eigenvalue
    contributes once for each of its images +gamma, -gamma that fall inside.
    ``Y = inf`` counts zeros of J_m (pressure-release wall).
    """
    Yk = complex(math.nan, math.nan) if cmath.isinf(Y) else complex(Y)
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo), complex(re_hi, im_hi), complex(re_lo, im_hi)]
    total = 0.0
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        n0 = max(16, int(8 * abs(b - a)))
        total += _edge_phase(m, Yk, a, b, n0)
    wind = total / (2 * math.pi)
    count = round(wind)
    if abs(wind - count) > 0.05:
        raise CompletenessError(f"non-integer winding number {wind:.4f}")
    has_origin = re_lo < 0 < re_hi and im_lo < 0 < im_hi
    return int(count) - (m if has_origin else 0)


def _images_inside(gammas, re_lo, re_hi, im_lo, im_hi):
    pts = np.concatenate([gammas, -gammas])
    inside = (pts.real > re_lo) & (pts.real < re_hi) & (pts.imag > im_lo) & (pts.imag < im_hi)
    return int(inside.sum())


def _nudge(value, others, direction, gap):
    # move a contour edge outward until no known root image sits within `gap`
    for _ in range(50):
        if others.size == 0 or np.min(np.abs(others - value)) > gap:
            return value
        value += direction * gap
    return value


def _counting_box(spec, gammas, split_re, K):
    pts = np.concatenate([gammas, -gammas])
    gap = 1e-3 * max(1.0, float(np.max(np.abs(gammas))) if gammas.size else 1.0)
    re_lo = _nudge(-0.5, pts.real, -1.0, gap)
    re_hi = _nudge(split_re, pts.real, +1.0, gap)
    im_hi = max(float(K), float(np.max(gammas.imag)) + 1.0 if gammas.size else float(K))
    im_lo = min(-1.0, float(np.min(gammas.imag)) - 1.0 if gammas.size else -1.0)
    im_hi = _nudge(im_hi, pts.imag, +1.0, gap)
    im_lo = _nudge(im_lo, pts.imag, -1.0, gap)
    return re_lo, re_hi, im_lo, im_hi


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _sort_key(g):
    return (round(g.real, 12), g.imag)


def _polish(spec, gammas):
    w0 = np.asarray(gammas, dtype=np.complex128) ** 2
    w, res, its, status = _kernels.newton_w(spec.m, spec.Y, w0, _ftol(spec.Y), 60)
    return np.array([canonical_gamma(x) for x in w]), status


def _scan_for_missing(spec, known, box, step=0.75):
    """Newton from a coarse grid inside ``box``; returns roots not in ``known``."""
    re_lo, re_hi, im_lo, im_hi = box
    re = np.arange(max(re_lo, 0.0) + step / 2, re_hi, step)
    im = np.arange(im_lo + step / 2, im_hi, step)
    seeds = (re[None, :] + 1j * im[:, None]).ravel() ** 2
    w, res, its, status = _kernels.newton_w(spec.m, spec.Y, seeds, _ftol(spec.Y), 60)
    found = []
    for wi, st in zip(w, status):
        if st != 0:
            continue
        g = canonical_gamma(wi)
        if not (re_lo < g.real < re_hi and im_lo < g.imag < im_hi):
            continue
        pool = np.concatenate([np.asarray(known), np.asarray(found, dtype=np.complex128)])
        if pool.size and np.min(np.abs(pool - g)) < 1e-7 * max(1.0, abs(g)):
            continue
        found.append(g)
    return found


def find_modes(spec, count, threshold=SURFACE_THRESHOLD, verify=True):
    """The ``count`` modes of ``spec`` with smallest Re(gamma).

    Roots are continued from the rigid-wall roots, polished, sorted by
    ascending Re(gamma) and (if ``verify``) checked against the
    argument-principle count; missing roots trigger a grid scan of the
    counting rectangle before a :class:`CompletenessError` is raised.

    The result carries ``near_ep=True`` (and a warning is issued) when the
    two closest eigenvalues are within 1e-4 of each other.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    m, K = spec.m, spec.K
    ntrack = count + SEED_MARGIN
    diag = {}
    if spec.pressure_release:
        gammas = pressure_release_roots(m, ntrack).astype(np.complex128)
    else:
        alphas = rigid_modes(m, ntrack)
        w_end, nsteps = continue_roots(m, K, alphas.astype(np.complex128) ** 2, 0.0, spec.beta0)
        diag["continuation_steps"] = nsteps
        gammas, status = _polish(spec, np.array([canonical_gamma(x) for x in w_end]))
        if np.any(status != 0):
            raise ConvergenceError("root polishing failed after continuation")
    gammas = np.array(sorted(gammas, key=_sort_key), dtype=np.complex128)

    if verify:
        for attempt in range(3):
            split = 0.5 * (gammas[count - 1].real + gammas[count].real)
            box = _counting_box(spec, gammas, split, K)
            expected = winding_count(m, spec.Y, *box)
            have = _images_inside(gammas, *box)
            diag["winding_count"] = expected
            diag["counting_box"] = box
            if expected == have:
                break
            if expected < have or spec.pressure_release:
                raise CompletenessError(f"argument principle counts {expected} roots, solver has {have}")
            extra = _scan_for_missing(spec, gammas, box)
            if not extra:
                raise CompletenessError(f"argument principle counts {expected} roots, solver has {have}")
            gammas = np.array(sorted(list(gammas) + extra, key=_sort_key), dtype=np.complex128)
        else:
            raise CompletenessError("root census did not converge after refinement")

    chosen = gammas[:count]
    modes = tuple(build_mode(spec, n, g, threshold) for n, g in enumerate(chosen))
    tol = RESIDUAL_RTOL * (1.0 if spec.pressure_release else max(1.0, abs(spec.Y)))
    for md in modes:
        if not md.residual <= tol:
            raise ConvergenceError(f"mode {md.n} residual {md.residual:.3e} exceeds {tol:.3e}")
    near = bool(len(chosen) > 1 and np.min(_pairwise_min(chosen)) < NEAR_EP_DISTANCE)
    if near:
        warnings.warn(f"beta0={spec.beta0} is within reach of an exceptional point", RuntimeWarning, stacklevel=2)
    return ModeSet(spec=spec, modes=modes, near_ep=near, sorted=True, diagnostics=diag)


def track_path(spec0, path, seed, threshold=SURFACE_THRESHOLD):
    """Continue the modes of ``seed`` along a polyline of admittances.

    Returns one :class:`ModeSet` per node of ``path``.  Mode identity follows
    continuity: ``result[k].modes[i]`` is the continuation of
    ``seed.modes[i]`` and keeps its index ``n``.  The seed must belong to
    ``path[0]``.
    """
    path = [complex(b) for b in path]
    if not path:
        return []
    m, K = spec0.m, spec0.K
    if abs(complex(seed.spec.beta0) - path[0]) > 1e-12 * max(1.0, abs(path[0])):
        w, _ = continue_roots(m, K, seed.gammas ** 2, seed.spec.beta0, path[0])
    else:
        w = seed.gammas.astype(np.complex128) ** 2
    labels = [md.n for md in seed.modes]
    out = []
    prev = path[0]
    for beta in path:
        if beta != prev:
            w, _ = continue_roots(m, K, w, prev, beta)
        spec = spec0.with_beta(beta)
        gammas = [canonical_gamma(x) for x in w]
        modes = tuple(build_mode(spec, n, g, threshold) for n, g in zip(labels, gammas))
        near = bool(len(gammas) > 1 and np.min(_pairwise_min(np.array(gammas))) < NEAR_EP_DISTANCE)
        out.append(ModeSet(spec=spec, modes=modes, near_ep=near, sorted=False))
        prev = beta
    return out
