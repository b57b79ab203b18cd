"""Compare the compiled kernels with their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from geoverb import _pykernels

try:
    from geoverb import _ext
except ImportError:  # extension not built
    _ext = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def ism_case(order):
    src = np.array([1.3, 2.1, 1.2])
    lst = np.array([4.2, 1.7, 1.6])
    dims = np.array([6.0, 4.5, 3.0])
    beta = np.sqrt(1.0 - np.array([0.2, 0.25, 0.3, 0.2, 0.4, 0.1]))

    def run(mod):
        last = mod.image_source_scan(src, lst, dims, beta, order, 16000.0, 343.0)
        out = np.zeros(last + 1)
        mod.image_source_scan(src, lst, dims, beta, order, 16000.0, 343.0, out)
        return out

    return run


def centroid_case(n, k, d):
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((n, d))
    cents = rng.standard_normal((k, d))
    return lambda mod: mod.nearest_centroid(pts, cents)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = [
        ("image_source_scan order=20", ism_case(20)),
        ("image_source_scan order=60", ism_case(60)),
        ("nearest_centroid 20000x50x32", centroid_case(20000, 50, 32)),
    ]
    print(f"{'kernel':34s} {'numpy s':>10s} {'compiled s':>11s} {'speedup':>8s}  match")
    for name, case in cases:
        t_py, out_py = best_of(lambda: case(_pykernels), args.repeat)
        if _ext is None:
            print(f"{name:34s} {t_py:10.4f} {'n/a':>11s} {'n/a':>8s}  n/a")
            continue
        t_c, out_c = best_of(lambda: case(_ext), args.repeat)
        same = np.array_equal(out_py, out_c)
        print(f"{name:34s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f}x  {same}")


if __name__ == "__main__":
    main()
