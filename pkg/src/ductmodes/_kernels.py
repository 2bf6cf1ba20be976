"""Hot numeric kernels: complex Bessel J_n and the dispersion residual.

Every kernel exists twice: a scalar-loop version compiled with numba (suffix
``_nb``) and a vectorised pure-numpy version (suffix ``_np``).  The public
dispatchers at the bottom pick one according to ``_accel.USE_NUMBA``.  Both
paths implement the same algorithm, so they double as cross-checks.

Algorithm for J_0..J_nmax at complex z:

* reduce to the first quadrant with J_n(conj z) = conj J_n(z) and
  J_n(-z) = (-1)^n J_n(z);
* |z| <= SERIES_RADIUS: ascending power series per order;
* otherwise Miller backward recurrence from a start order well past
  max(nmax, |z|), normalised with exp(-iz) = J_0 + 2 sum_k (-i)^k J_k, which
  stays free of catastrophic cancellation when Im z is large.
"""

import math

import numpy as np

from . import _accel
from ._accel import njit

SERIES_RADIUS = 4.0
MAX_ABS_Z = 1.0e4
MAX_IMAG_Z = 700.0
MAX_ORDER = 200

_RESCALE_HI = 1.0e250
_RESCALE_FACTOR = 1.0e-250


def _miller_start_py(nmax, a):
    big = max(float(nmax), a)
    n = int(big + 30.0 + 2.0 * math.sqrt(40.0 * big))
    if n % 2 == 1:
        n += 1
    return n


_miller_start = njit(cache=True)(_miller_start_py)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _series_nb(n, z):
    # J_n(z) = (z/2)^n / n! * sum_k (-z^2/4)^k / (k! (n+k)!/n!)
    half = 0.5 * z
    lead = 1.0 + 0.0j
    for i in range(1, n + 1):
        lead = lead * half / i
    q = -half * half
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    k = 1
    while k < 400:
        term = term * q / (k * (n + k))
        total += term
        if abs(term) < 1.0e-17 * abs(total) and k > abs(half):
            break
        k += 1
    return lead * total


@njit(cache=True, nogil=True)
def _jn_first_quadrant_nb(nmax, z, out):
    a = abs(z)
    if a == 0.0:
        out[0] = 1.0
        for n in range(1, nmax + 1):
            out[n] = 0.0
        return
    if a <= SERIES_RADIUS:
        for n in range(nmax + 1):
            out[n] = _series_nb(n, z)
        return
    nstart = _miller_start(nmax, a)
    buf = np.zeros(nstart + 2, dtype=np.complex128)
    jp1 = 0.0 + 0.0j
    jn = 1.0e-30 + 0.0j
    buf[nstart] = jn
    two_over_z = 2.0 / z
    for n in range(nstart, 0, -1):
        jm1 = n * two_over_z * jn - jp1
        buf[n - 1] = jm1
        jp1 = jn
        jn = jm1
        if abs(jn) > _RESCALE_HI:
            for i in range(n - 1, nstart + 1):
                buf[i] *= _RESCALE_FACTOR
            jp1 *= _RESCALE_FACTOR
            jn *= _RESCALE_FACTOR
    # exp(-iz) = J0 + 2 sum_k (-i)^k J_k
    s = buf[0]
    phase = 1.0 + 0.0j
    for k in range(1, nstart + 1):
        phase = phase * (-1.0j)
        s += 2.0 * phase * buf[k]
    scale = np.exp(-1.0j * z) / s
    for n in range(nmax + 1):
        out[n] = buf[n] * scale


@njit(cache=True, nogil=True)
def jn_upto_nb(nmax, z):
    """J_0(z) .. J_nmax(z) for one complex z (numba)."""
    out = np.empty(nmax + 1, dtype=np.complex128)
    flip_sign = z.real < 0.0
    w = -z if flip_sign else z
    flip_conj = w.imag < 0.0
    if flip_conj:
        w = w.conjugate()
    _jn_first_quadrant_nb(nmax, w, out)
    for n in range(nmax + 1):
        v = out[n]
        if flip_sign and n % 2 == 1:
            v = -v
        if flip_conj:
            v = v.conjugate()
        out[n] = v
    return out


@njit(cache=True, nogil=True)
def jn_block_nb(nmax, zs):
    """J_0..J_nmax for every entry of a flat complex array (numba)."""
    res = np.empty((zs.shape[0], nmax + 1), dtype=np.complex128)
    for i in range(zs.shape[0]):
        res[i, :] = jn_upto_nb(nmax, zs[i])
    return res


@njit(cache=True, nogil=True)
def disp_w_nb(m, w, Y):
    """Dispersion residual in w = gamma**2 and its w-derivative (numba).

    G(w) = gamma J'_m/J_m = m - w rho with rho = J_{m+1}/(gamma J_m);
    dG/dw = (2 m rho - w rho^2 - 1)/2.  Returns (G - Y, dG/dw, |J_m|, |J'_m|).
    """
    gam = np.sqrt(w + 0.0j)
    if gam == 0.0:
        rho = 1.0 / (2.0 * (m + 1)) + 0.0j
        jm_abs = 1.0 if m == 0 else 0.0
        jmp_abs = 0.5 if m == 1 else 0.0
        g = m - w * rho
        return g - Y, 0.5 * (2.0 * m * rho - w * rho * rho - 1.0), jm_abs, jmp_abs
    js = jn_upto_nb(m + 1, gam)
    jm = js[m]
    jp = js[m + 1]
    if m == 0:
        dj = -jp
    else:
        dj = 0.5 * (js[m - 1] - jp)
    rho = jp / (gam * jm)
    g = m - w * rho
    return g - Y, 0.5 * (2.0 * m * rho - w * rho * rho - 1.0), abs(jm), abs(dj)


@njit(cache=True, nogil=True)
def disp_w_vec_nb(m, ws, Y):
    """:func:`disp_w_nb` over an array; returns (f, dG/dw) arrays."""
    f = np.empty(ws.shape[0], dtype=np.complex128)
    fw = np.empty(ws.shape[0], dtype=np.complex128)
    for i in range(ws.shape[0]):
        a, b, _, _ = disp_w_nb(m, ws[i], Y)
        f[i] = a
        fw[i] = b
    return f, fw


@njit(cache=True, nogil=True)
def wall_function_nb(m, Y, zs):
    """gamma J'_m(gamma) - Y J_m(gamma) over an array (entire in gamma).

    With Y = inf pass ``Y`` as nan to get J_m itself (pressure-release wall).
    """
    out = np.empty(zs.shape[0], dtype=np.complex128)
    pr = Y != Y
    for i in range(zs.shape[0]):
        js = jn_upto_nb(m + 1, zs[i])
        if pr:
            out[i] = js[m]
        else:
            out[i] = (m - Y) * js[m] - zs[i] * js[m + 1]
    return out


@njit(cache=True, nogil=True)
def newton_w_nb(m, Y, w0, ftol, maxit):
    """Newton iterations on G(w) = Y for an array of starting points (numba).

    Returns (w, |residual|, iterations used, status) arrays; status 0 means
    converged, 1 stagnated, 2 hit a pole.
    """
    n = w0.shape[0]
    w_out = w0.copy()
    res = np.empty(n)
    its = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    for i in range(n):
        w = w0[i]
        status[i] = 1
        for it in range(maxit):
            f, fw, ajm, adj = disp_w_nb(m, w, Y)
            if ajm < 1.0e-14 * max(1.0, adj):
                status[i] = 2
                break
            res[i] = abs(f)
            its[i] = it
            if abs(f) <= ftol:
                status[i] = 0
                break
            if fw == 0.0:
                break
            dw = f / fw
            w = w - dw
            if abs(dw) <= 1.0e-15 * max(1.0, abs(w)):
                f, fw, ajm, adj = disp_w_nb(m, w, Y)
                res[i] = abs(f)
                its[i] = it + 1
                status[i] = 0 if abs(f) <= 1.0e3 * ftol else 1
                break
        w_out[i] = w
    return w_out, res, its, status


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _series_np(n, z):
    half = 0.5 * z
    lead = np.ones_like(z)
    for i in range(1, n + 1):
        lead = lead * half / i
    q = -half * half
    term = np.ones_like(z)
    total = np.ones_like(z)
    kmax = 400
    amax = float(np.max(np.abs(half))) if z.size else 0.0
    for k in range(1, kmax):
        term = term * q / (k * (n + k))
        total = total + term
        if k > amax and np.all(np.abs(term) < 1.0e-17 * np.abs(total)):
            break
    return lead * total


def _miller_np(nmax, z):
    a = float(np.max(np.abs(z)))
    nstart = _miller_start_py(nmax, a)
    buf = np.zeros((nstart + 2, z.size), dtype=np.complex128)
    jp1 = np.zeros(z.size, dtype=np.complex128)
    jn = np.full(z.size, 1.0e-30, dtype=np.complex128)
    buf[nstart] = jn
    two_over_z = 2.0 / z
    for n in range(nstart, 0, -1):
        jm1 = n * two_over_z * jn - jp1
        buf[n - 1] = jm1
        jp1, jn = jn, jm1
        big = np.abs(jn) > _RESCALE_HI
        if np.any(big):
            buf[n - 1:, big] *= _RESCALE_FACTOR
            jp1 = np.where(big, jp1 * _RESCALE_FACTOR, jp1)
            jn = np.where(big, jn * _RESCALE_FACTOR, jn)
    phase = (-1.0j) ** np.arange(nstart + 2)
    phase[0] = 0.5
    s = 2.0 * (phase[:, None] * buf).sum(axis=0)
    scale = np.exp(-1.0j * z) / s
    return (buf[: nmax + 1] * scale).T


def jn_block_np(nmax, zs):
    """J_0..J_nmax for every entry of a flat complex array (numpy)."""
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    flip_sign = zs.real < 0.0
    w = np.where(flip_sign, -zs, zs)
    flip_conj = w.imag < 0.0
    w = np.where(flip_conj, w.conjugate(), w)
    out = np.empty((zs.size, nmax + 1), dtype=np.complex128)
    a = np.abs(w)
    zero = a == 0.0
    small = (a <= SERIES_RADIUS) & ~zero
    large = a > SERIES_RADIUS
    out[zero] = 0.0
    out[zero, 0] = 1.0
    if np.any(small):
        ws = w[small]
        out[small] = np.stack([_series_np(n, ws) for n in range(nmax + 1)], axis=1)
    if np.any(large):
        out[large] = _miller_np(nmax, w[large])
    odd = np.arange(nmax + 1) % 2 == 1
    sign = np.where(flip_sign[:, None] & odd[None, :], -1.0, 1.0)
    out = out * sign
    out = np.where(flip_conj[:, None], out.conjugate(), out)
    return out


def disp_w_np(m, w, Y):
    """Vectorised counterpart of :func:`disp_w_nb`."""
    w = np.asarray(w, dtype=np.complex128).ravel()
    gam = np.sqrt(w)
    zero = gam == 0.0
    safe = np.where(zero, 1.0, gam)
    js = jn_block_np(m + 1, safe)
    jm = js[:, m]
    jp = js[:, m + 1]
    dj = -jp if m == 0 else 0.5 * (js[:, m - 1] - jp)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = jp / (safe * jm)
    rho = np.where(zero, 1.0 / (2.0 * (m + 1)), rho)
    ajm = np.where(zero, 1.0 if m == 0 else 0.0, np.abs(jm))
    adj = np.where(zero, 0.5 if m == 1 else 0.0, np.abs(dj))
    g = m - w * rho
    return g - Y, 0.5 * (2.0 * m * rho - w * rho * rho - 1.0), ajm, adj


def disp_w_vec_np(m, ws, Y):
    f, fw, _, _ = disp_w_np(m, ws, Y)
    return f, fw


def wall_function_np(m, Y, zs):
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    js = jn_block_np(m + 1, zs)
    if Y != Y:
        return js[:, m]
    return (m - Y) * js[:, m] - zs * js[:, m + 1]


def newton_w_np(m, Y, w0, ftol, maxit):
    """Vectorised counterpart of :func:`newton_w_nb`."""
    w = np.array(w0, dtype=np.complex128)
    n = w.size
    res = np.full(n, np.inf)
    its = np.zeros(n, dtype=np.int64)
    status = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    for it in range(maxit):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        f, fw, ajm, adj = disp_w_np(m, w[idx], Y)
        pole = ajm < 1.0e-14 * np.maximum(1.0, adj)
        status[idx[pole]] = 2
        active[idx[pole]] = False
        res[idx] = np.abs(f)
        its[idx] = it
        done = (np.abs(f) <= ftol) & ~pole
        status[idx[done]] = 0
        active[idx[done]] = False
        step = ~pole & ~done & (fw != 0.0)
        active[idx[~pole & ~done & (fw == 0.0)]] = False
        sidx = idx[step]
        dw = f[step] / fw[step]
        w[sidx] = w[sidx] - dw
        tiny = np.abs(dw) <= 1.0e-15 * np.maximum(1.0, np.abs(w[sidx]))
        if np.any(tiny):
            tidx = sidx[tiny]
            f2, _, _, _ = disp_w_np(m, w[tidx], Y)
            res[tidx] = np.abs(f2)
            its[tidx] = it + 1
            status[tidx] = np.where(np.abs(f2) <= 1.0e3 * ftol, 0, 1)
            active[tidx] = False
    return w, res, its, status


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if _accel.USE_NUMBA:
    BACKEND = "numba"

    def jn_block(nmax, zs):
        return jn_block_nb(int(nmax), np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel()))

    def jn_upto(nmax, z):
        return jn_upto_nb(int(nmax), complex(z))

    def disp_w(m, w, Y):
        return disp_w_nb(int(m), complex(w), complex(Y))

    def disp_w_vec(m, ws, Y):
        return disp_w_vec_nb(int(m), np.ascontiguousarray(ws, dtype=np.complex128), complex(Y))

    def wall_function(m, Y, zs):
        return wall_function_nb(int(m), complex(Y), np.ascontiguousarray(np.ravel(zs), dtype=np.complex128))

    def newton_w(m, Y, w0, ftol, maxit=60):
        return newton_w_nb(int(m), complex(Y), np.ascontiguousarray(w0, dtype=np.complex128), float(ftol), int(maxit))

else:
    BACKEND = "numpy"

    def jn_block(nmax, zs):
        return jn_block_np(int(nmax), zs)

    def jn_upto(nmax, z):
        return jn_block_np(int(nmax), np.array([complex(z)]))[0]

    def disp_w(m, w, Y):
        f, fw, ajm, adj = disp_w_np(int(m), np.array([complex(w)]), complex(Y))
        return complex(f[0]), complex(fw[0]), float(ajm[0]), float(adj[0])

    def disp_w_vec(m, ws, Y):
        return disp_w_vec_np(int(m), np.asarray(ws, dtype=np.complex128), complex(Y))

    def wall_function(m, Y, zs):
        return wall_function_np(int(m), complex(Y), zs)

    def newton_w(m, Y, w0, ftol, maxit=60):
        return newton_w_np(int(m), complex(Y), np.asarray(w0, dtype=np.complex128), float(ftol), int(maxit))
