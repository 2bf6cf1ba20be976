"""Compare the numba and pure-numpy kernel paths.

Run with ``python benchmarks/bench_kernels.py``.  Both implementations are
imported side by side (the env flag only chooses the default dispatch), so
one process times both and checks that they agree.
"""

import argparse
import time

import numpy as np

from ductmodes import _kernels as k


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng, n):
    zs = (rng.uniform(-60, 60, n) + 1j * rng.uniform(-20, 20, n)).astype(np.complex128)
    ws = zs**2
    Y = -1j * 30.0 * (0.4 + 0.2j)
    seeds = (np.arange(1, 31) * np.pi + 0.3j) ** 2
    return [
        ("jn_block nmax=10", lambda: k.jn_block_nb(10, zs), lambda: k.jn_block_np(10, zs)),
        ("disp_w_vec m=0", lambda: k.disp_w_vec_nb(0, ws, Y), lambda: k.disp_w_vec_np(0, ws, Y)),
        ("wall_function m=2", lambda: k.wall_function_nb(2, Y, zs), lambda: k.wall_function_np(2, Y, zs)),
        (
            "newton_w 30 roots",
            lambda: k.newton_w_nb(0, Y, seeds.astype(np.complex128), 1e-10, 60),
            lambda: k.newton_w_np(0, Y, seeds.astype(np.complex128), 1e-10, 60),
        ),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="number of arguments per call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(12345)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fnb, fnp in cases(rng, args.n):
        a = fnb()  # warm-up / JIT compile
        b = fnp()
        a0 = np.asarray(a[0] if isinstance(a, tuple) else a)
        b0 = np.asarray(b[0] if isinstance(b, tuple) else b)
        scale = np.maximum(np.abs(b0), 1e-300)
        diff = float(np.max(np.abs(a0 - b0) / np.maximum(scale, np.max(np.abs(b0)) * 1e-12)))
        tn = _best(fnb, args.repeat)
        tp = _best(fnp, args.repeat)
        print(f"{name:<22}{tn * 1e3:>12.3f}{tp * 1e3:>12.3f}{tp / tn:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
