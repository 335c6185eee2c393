#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--sizes 1048576,4194304]

The same dispatchers the library uses are timed with KPZLAB_NO_NUMBA toggled,
so the numbers reflect exactly what each backend delivers inside
moc_profile / holder_coefficient / validate_hyp.
"""

import argparse
import os
import time

import numpy as np


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="1048576,4194304",
                        help="comma-separated array lengths for the window kernels")
    parser.add_argument("--holder-n", type=int, default=8192)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    from kpzlab import _kernels
    from kpzlab._accel import HAVE_NUMBA

    rng = np.random.default_rng(0)
    rows = []

    def with_backend(numba_on, fn, *a):
        os.environ["KPZLAB_NO_NUMBA"] = "" if numba_on else "1"
        try:
            return timeit(fn, *a)
        finally:
            os.environ.pop("KPZLAB_NO_NUMBA", None)

    if HAVE_NUMBA:  # trigger compilation outside the timed region
        _kernels.window_range_sup(rng.standard_normal(64), 4)
        _kernels.window_min_array(rng.standard_normal(64), 4)
        _kernels.holder_sup(rng.standard_normal(64), 0.01, 0.5)

    for n in sizes:
        v = np.cumsum(rng.standard_normal(n)) * n**-0.25
        for w in (64, n // 64):
            t_np = with_backend(False, _kernels.window_range_sup, v, w)
            t_nb = with_backend(True, _kernels.window_range_sup, v, w) if HAVE_NUMBA else float("nan")
            rows.append((f"window_range_sup(n={n}, w={w})", t_np, t_nb))
        t_np = with_backend(False, _kernels.window_min_array, v, 65)
        t_nb = with_backend(True, _kernels.window_min_array, v, 65) if HAVE_NUMBA else float("nan")
        rows.append((f"window_min_array(n={n}, w=65)", t_np, t_nb))

    h = np.cumsum(rng.standard_normal(args.holder_n)) * args.holder_n**-0.25
    t_np = with_backend(False, _kernels.holder_sup, h, 1e-4, 0.25)
    t_nb = with_backend(True, _kernels.holder_sup, h, 1e-4, 0.25) if HAVE_NUMBA else float("nan")
    rows.append((f"holder_sup(n={args.holder_n})", t_np, t_nb))

    print(f"{'kernel':44s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for name, t_np, t_nb in rows:
        ratio = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:44s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {ratio:9.2f}")
    if not HAVE_NUMBA:
        print("numba not installed: numba column is nan")


if __name__ == "__main__":
    main()
