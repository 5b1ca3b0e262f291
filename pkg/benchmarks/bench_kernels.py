"""Throughput of the compiled selection kernel against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--trials N] [--repeat R]

Both backends run on the same SNR batch; the script checks that their paths
agree before reporting trellises per second and the speed-up.
"""

import argparse
import time

import numpy as np

from dfrelay import kernels
from dfrelay.model import n_links

CASES = [
    ("optimal", None, 6, 2),
    ("optimal", None, 6, 8),
    ("hop", None, 6, 8),
    ("adhoc", None, 6, 8),
    ("block", 2, 6, 8),
    ("sliding", 3, 8, 4),
    ("brute", None, 5, 4),
]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if kernels.BACKEND != "compiled":
        raise SystemExit("compiled kernel not built; run `pip install -e .` first")

    rng = np.random.default_rng(0)
    print(f"{'strategy':<10}{'w':>3}{'L':>4}{'M':>4}{'compiled/s':>14}{'python/s':>12}{'speed-up':>10}")
    for name, w, L, M in CASES:
        snr = rng.exponential(size=(args.trials, n_links(L, M)))
        fast = kernels.select_batch(snr, L, M, name, w, backend="compiled")
        slow = kernels.select_batch(snr, L, M, name, w, backend="python")
        assert np.array_equal(fast[0], slow[0]), f"backends disagree for {name}"
        t_fast = best_time(lambda: kernels.select_batch(snr, L, M, name, w, backend="compiled"), args.repeat)
        t_slow = best_time(lambda: kernels.select_batch(snr, L, M, name, w, backend="python"), args.repeat)
        print(f"{name:<10}{w or '':>3}{L:>4}{M:>4}{args.trials / t_fast:>14,.0f}"
              f"{args.trials / t_slow:>12,.0f}{t_slow / t_fast:>9.0f}x")


if __name__ == "__main__":
    main()
