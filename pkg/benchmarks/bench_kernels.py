"""Time the compiled kernels against the pure-Python fallback.

Run from the repository root after building the extension::

    python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from artrac import _backend, _kernels_py
from artrac.kinematics import A40X

try:
    from artrac import _kernels as compiled
except ImportError:
    compiled = None


def _cases(n):
    rng = np.random.default_rng(0)
    t = np.arange(n) * 0.01
    gamma = 0.6 * np.sin(0.2 * t) * np.minimum(1.0, t / 5)
    tb = (rng.uniform(2, 3, n), rng.uniform(-0.05, 0.05, n), rng.uniform(-0.05, 0.05, n),
          rng.uniform(-0.78, 0.78, n), rng.uniform(-0.3, 0.3, n))
    noisy = rng.standard_normal(n)
    return {
        "two_body": lambda impl: _backend.two_body(*tb, A40X.l1, A40X.l2, impl=impl),
        "integrate_truth": lambda impl: _backend.integrate_truth(gamma, 0.01, 2.5, A40X.l1, A40X.l2,
                                                                 0.004, impl=impl),
        "moving_average": lambda impl: _backend.moving_average(noisy, 5, impl=impl),
    }


def best_time(fn, impl, repeat):
    return min(timeit.repeat(lambda: fn(impl), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20_000, help="samples per kernel call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':<16} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for name, fn in _cases(args.samples).items():
        py = best_time(fn, _kernels_py, args.repeat)
        if compiled is None:
            print(f"{name:<16} {py * 1e3:>12.2f} {'n/a':>14} {'n/a':>8}")
            continue
        cy = best_time(fn, compiled, args.repeat)
        print(f"{name:<16} {py * 1e3:>12.2f} {cy * 1e3:>14.3f} {py / cy:>7.0f}x")


if __name__ == "__main__":
    main()
