"""Time the numba kernels against the numpy fallback.

Both variants are importable in one process, so no environment flag is needed
here. The first numba call (compilation) is excluded from the timings.

    python3 benchmarks/bench_backends.py --repeat 5
"""

import argparse
import time

import numpy as np

from steklov import _accel
from steklov.kernels import get_kernel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_points, radius):
    x = np.linspace(-20, 20, n_points)
    u = np.linspace(0, 1, 257)
    rng = np.random.default_rng(0)
    coef = rng.normal(size=1024)
    for kid in ("fejer", "jackson:n=2,alpha=1", "bspline:n=4"):
        k = get_kernel(kid)
        p = np.asarray(k.pvec)
        yield f"kernel_values  {kid}", "kernel_values", (k.code, p, x)
        yield f"lattice_sums   {kid}", "lattice_sums", (k.code, p, u, 1.0, radius, True)
        yield f"series_eval    {kid}", "series_eval", (k.code, p, k.half_width, x[::10], 16.0,
                                                      -512.0, coef)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--radius", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 0
    print(f"{'case':42s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn, a in cases(args.points, args.radius):
        f_np = getattr(_accel, fn + "_numpy")
        f_nb = getattr(_accel, fn + "_numba")
        ref, got = f_np(*a), f_nb(*a)  # warm-up and compile
        t_np = best_of(lambda: f_np(*a), args.repeat)
        t_nb = best_of(lambda: f_nb(*a), args.repeat)
        diff = float(np.max(np.abs(ref - got)))
        print(f"{name:42s} {t_np:11.4f} {t_nb:11.4f} {t_np / t_nb:8.1f} {diff:10.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
