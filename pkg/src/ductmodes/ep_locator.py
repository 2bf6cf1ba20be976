"""Exceptional points of the dispersion relation in the admittance plane.

An exceptional point is a double root of

    f(gamma, beta0) = g(gamma) + j K beta0,    g = gamma J'_m(gamma) / J_m(gamma),

i.e. f = 0 and df/dgamma = g'(gamma) = 0.  From Bessel's equation
g' = (m^2 - g^2)/gamma - gamma, so at the double root gamma^2 + Y^2 = m^2 and
g'' = -2.  Near such a point the two roots split as

    gamma - gamma_ep ~ +/- c sqrt(beta0 - beta_ep),   c = sqrt(-2 f_beta / f_gg) = sqrt(j K)

(the sign of the radicand follows from the second-order Taylor expansion of
f; the overall +/- is immaterial).
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .eigensolver import (
    BoundarySpec,
    canonical_gamma,
    continue_roots,
    find_modes,
    rigid_modes,
)
from .errors import ConvergenceError, OutOfDiskError, TrackingError, TripleRootError
from .special_fn import dispersion_lhs

EP_TOL = 1.0e-10
TRIPLE_TOL = 1.0e-8
FD_STEP = 1.0e-7
EXPANSION_RADIUS = 1.0e-2
MIN_LOOP_NODES = 64
LOOP_CLEARANCE = 1.0e-6


@dataclass(frozen=True)
class EpRecord:
    """A double root (gamma_ep, beta_ep) coalescing modes ``pair``."""

    m: int
    K: float
    beta_ep: complex
    gamma_ep: complex
    pair: tuple
    sqrt_coeff: complex
    residual_f: float = 0.0
    residual_df: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class TwoLevelModel:
    """Complex symmetric model H = diag(alpha1, alpha2) + lam * [[0, c], [c, 0]].

    Its two eigenvalues coalesce at lam = +/- j (alpha1 - alpha2) / (2 c).
    """

    alpha1: complex
    alpha2: complex
    c: complex
    lam: complex

    def __post_init__(self):
        if complex(self.c) == 0:
            raise ValueError("coupling constant c must be non-zero")

    def matrix(self):
        lc = complex(self.lam) * complex(self.c)
        return np.array([[self.alpha1, lc], [lc, self.alpha2]], dtype=np.complex128)


def _derivs(m, gamma):
    g = dispersion_lhs(m, gamma)
    g1 = (m * m - g * g) / gamma - gamma
    g2 = -2.0 * g * g1 / gamma - (m * m - g * g) / (gamma * gamma) - 1.0
    return g, g1, g2


def _system(m, K, gamma, beta):
    g, g1, g2 = _derivs(m, gamma)
    return np.array([g + 1j * K * beta, g1]), np.array([[g1, 1j * K], [g2, 0.0]]), g2


def fd_jacobian(m, K, gamma, beta, h=FD_STEP):
    """Central-difference Jacobian of (f, df/dgamma) with respect to (gamma, beta)."""
    jac = np.empty((2, 2), dtype=np.complex128)
    for col, (dg, db) in enumerate(((h, 0.0), (0.0, h))):
        fp, _, _ = _system(m, K, gamma + dg, beta + db)
        fm, _, _ = _system(m, K, gamma - dg, beta - db)
        jac[:, col] = (fp - fm) / (2.0 * h)
    return jac


def sqrt_coefficient(K, f_gg):
    """sqrt(-2 f_beta / f_gg) with f_beta = j K."""
    return cmath.sqrt(-2.0 * 1j * K / f_gg)


def find_ep(m, K, gamma_init, beta_init, maxit=100, pair=(0, 1)):
    """Newton solve of f = 0, df/dgamma = 0 for (gamma, beta0).

    Raises
    ------
    ConvergenceError
        No convergence within ``maxit`` iterations.
    TripleRootError
        |d^2 f/dgamma^2| < 1e-8 at the solution.
    """
    gamma = complex(gamma_init)
    beta = complex(beta_init)
    for it in range(1, maxit + 1):
        F, J, _ = _system(m, K, gamma, beta)
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular EP Jacobian at gamma={gamma}, beta={beta}") from exc
        # damp very large steps, the basin around a double root is narrow
        lim = 0.5 * max(1.0, abs(gamma))
        if abs(d[0]) > lim:
            d *= lim / abs(d[0])
        gamma += d[0]
        beta += d[1]
        F, _, g2 = _system(m, K, gamma, beta)
        if abs(F[0]) < EP_TOL and abs(F[1]) < EP_TOL and abs(d[0]) < 1e-12 * max(1.0, abs(gamma)):
            break
    else:
        raise ConvergenceError(f"EP Newton did not converge from gamma={gamma_init}, beta={beta_init}")
    if abs(g2) < TRIPLE_TOL:
        raise TripleRootError(f"third-order coalescence at beta={beta}")
    gamma = canonical_gamma(gamma * gamma)
    F, _, g2 = _system(m, K, gamma, beta)
    return EpRecord(
        m=int(m),
        K=float(K),
        beta_ep=complex(beta),
        gamma_ep=complex(gamma),
        pair=tuple(pair),
        sqrt_coeff=sqrt_coefficient(K, g2),
        residual_f=float(abs(F[0])),
        residual_df=float(abs(F[1])),
        iterations=it,
    )


def _reduced_newton(m, gamma, maxit=60):
    # with beta eliminated the double root satisfies g^2 = m^2 - gamma^2; the
    # dissipative branch is g = -j sqrt(gamma^2 - m^2), solved here directly
    for _ in range(maxit):
        g, g1, _ = _derivs(m, gamma)
        s = cmath.sqrt(gamma * gamma - m * m)
        step = (g + 1j * s) / (g1 + 1j * gamma / s)
        if abs(step) > 1.0:
            step /= abs(step)
        gamma -= step
        if not cmath.isfinite(gamma):
            return None
        if abs(step) < 1e-13 * max(1.0, abs(gamma)):
            return gamma
    return None


def _seed(m, K, n):
    """Starting point for the EP joining rigid modes n and n+1.

    The double root lies in the upper gamma half plane with Re(gamma) between
    the two rigid eigenvalues; vertical offsets from their midpoint are fed
    to the beta-eliminated scalar equation until one lands in that strip.
    """
    alphas = rigid_modes(m, n + 2)
    lo, hi = alphas[n], alphas[n + 1]
    mid = 0.5 * (lo + hi)
    for t in (1.5, 1.0, 2.0, 2.5, 0.5, 3.0):
        try:
            gamma = _reduced_newton(m, complex(mid, t))
        except (ArithmeticError, ValueError):
            continue
        if gamma is None:
            continue
        if gamma.real < 0:
            gamma = -gamma
        if lo < gamma.real < hi and gamma.imag > 0:
            g = dispersion_lhs(m, gamma)
            return gamma, 1j * g / K
    raise ConvergenceError(f"no exceptional-point seed found between rigid modes {n} and {n + 1}")


def enumerate_eps(m, K, count):
    """The first ``count`` exceptional points, ordered by lower mode index.

    The k-th record couples modes (k, k+1): its gamma_ep has real part
    between the k-th and (k+1)-th rigid eigenvalues and Im(gamma_ep) > 0,
    which selects the dissipative (Re beta_ep > 0) member of each
    (gamma, beta) <-> (conj(gamma), -conj(beta)) pair.
    """
    if not 1 <= count <= 20:
        raise ValueError("count must lie in 1..20")
    out = []
    n = 0
    while len(out) < count:
        try:
            gamma0, beta0 = _seed(m, K, n)
            ep = find_ep(m, K, gamma0, beta0, pair=(n, n + 1))
        except (ConvergenceError, TripleRootError) as exc:
            raise ConvergenceError(f"EP search for pair ({n}, {n + 1}) failed: {exc}") from exc
        n += 1
        if any(abs(ep.beta_ep - o.beta_ep) < 1e-6 for o in out):
            raise ConvergenceError(f"EP search for pair {ep.pair} returned a duplicate point")
        out.append(ep)
    return out


def local_expansion(ep, beta0):
    """First-order branch values gamma_ep +/- c sqrt(beta0 - beta_ep)."""
    d = complex(beta0) - ep.beta_ep
    if abs(d) >= EXPANSION_RADIUS:
        raise OutOfDiskError(f"|beta0 - beta_ep| = {abs(d):.3g} outside the expansion disk")
    s = ep.sqrt_coeff * cmath.sqrt(d)
    return ep.gamma_ep + s, ep.gamma_ep - s


def _loop_nodes(loop, min_nodes):
    loop = [complex(b) for b in loop]
    if len(loop) < 2 or loop[0] != loop[-1]:
        raise ValueError("loop must be closed (first node equal to last)")
    seg = np.abs(np.diff(np.array(loop)))
    total = float(seg.sum())
    if total == 0:
        raise ValueError("loop has zero length")
    nodes = [loop[0]]
    for a, b, L in zip(loop[:-1], loop[1:], seg):
        k = max(1, int(math.ceil(min_nodes * L / total)))
        for i in range(1, k + 1):
            nodes.append(a + (b - a) * i / k)
    return nodes


def _segment_distance(p, a, b):
    ab = b - a
    if ab == 0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def winding_number(loop, point):
    """Winding number of a closed polyline around ``point``."""
    z = np.array([complex(b) for b in loop]) - complex(point)
    return int(round(np.sum(np.angle(z[1:] / z[:-1])) / (2 * math.pi)))


def encircle_ep(ep, loop, spec=None, nodes=MIN_LOOP_NODES, turns=1):
    """Permutation of the coalescing pair after transport around ``loop``.

    The pair is located at the loop start with :func:`find_modes` (ordered
    by ascending Re(gamma)), carried around ``turns`` times by continuation,
    and matched back to the starting eigenvalues.  Returns a tuple ``p`` with
    ``p[i]`` the starting index reached by mode ``i``.

    Raises
    ------
    TrackingError
        If the loop passes within 1e-6 of beta_ep or the end point does not
        match the start set.
    """
    loop = [complex(b) for b in loop]
    pts = _loop_nodes(loop, max(nodes, MIN_LOOP_NODES))
    clearance = min(_segment_distance(ep.beta_ep, a, b) for a, b in zip(loop[:-1], loop[1:]))
    if clearance < LOOP_CLEARANCE:
        raise TrackingError(f"loop passes {clearance:.2e} from the exceptional point")
    if spec is None:
        spec = BoundarySpec(ep.K, ep.m, loop[0])
    start = find_modes(spec.with_beta(loop[0]), max(ep.pair) + 1 + 2, verify=False)
    i0, i1 = ep.pair
    g0 = np.array([start.modes[i0].gamma, start.modes[i1].gamma])
    w = g0**2
    for _ in range(turns):
        for a, b in zip(pts[:-1], pts[1:]):
            w, _ = continue_roots(ep.m, ep.K, w, a, b)
    g1 = np.array([canonical_gamma(x) for x in w])
    perm = []
    for g in g1:
        d = np.abs(g0 - g)
        k = int(np.argmin(d))
        if d[k] > 1e-6 * max(1.0, abs(g)):
            raise TrackingError("transported eigenvalue does not return to the starting set")
        perm.append(k)
    if sorted(perm) != [0, 1]:
        raise TrackingError("transported pair collapsed onto one eigenvalue")
    return tuple(perm)


def two_level_eigen(model):
    """Eigenvalues 0.5 (a1 + a2 +/- R), R = sqrt((a1 - a2)^2 + 4 lam^2 c^2), and eigenvectors.

    Eigenvectors are the columns of the returned 2x2 array, scaled to unit
    2-norm.  At coalescence (R = 0) both columns are the same vector,
    proportional to [1, +/- j].
    """
    a1, a2 = complex(model.alpha1), complex(model.alpha2)
    lc = complex(model.lam) * complex(model.c)
    R = cmath.sqrt((a1 - a2) ** 2 + 4.0 * lc * lc)
    gammas = (0.5 * (a1 + a2 + R), 0.5 * (a1 + a2 - R))
    vecs = np.empty((2, 2), dtype=np.complex128)
    for k, g in enumerate(gammas):
        # rows of H - g: (a1 - g, lc) and (lc, a2 - g); pick the better-scaled null vector
        u = np.array([lc, g - a1])
        v = np.array([g - a2, lc])
        x = u if np.linalg.norm(u) >= np.linalg.norm(v) else v
        if np.linalg.norm(x) == 0.0:
            x = np.eye(2, dtype=np.complex128)[k]
        vecs[:, k] = x / np.linalg.norm(x)
    return gammas[0], gammas[1], vecs


def eps_in_window(m, K, re_range, im_range, limit=20):
    """Dissipative exceptional points whose admittance lies inside a rectangle."""
    out = []
    for n in range(limit):
        try:
            gamma0, beta0 = _seed(m, K, n)
            ep = find_ep(m, K, gamma0, beta0, pair=(n, n + 1))
        except (ConvergenceError, TripleRootError):
            continue
        b = ep.beta_ep
        if b.real > re_range[1] and n > 0:
            break
        if re_range[0] <= b.real <= re_range[1] and im_range[0] <= b.imag <= im_range[1]:
            out.append(ep)
    return out
