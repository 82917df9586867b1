#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Kernel timings run in-process on identical inputs (after one warm-up call so
compilation is excluded) and also check that both paths agree. ``--end-to-end``
additionally times one full ``strategy-grid`` experiment per backend in a fresh
interpreter, with ELASTICITY_LAB_DISABLE_NUMBA toggled.

    python3 benchmarks/bench_kernels.py [--repeat 7] [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from elasticity_lab import kernels

T = 9432
PANEL = 8760


def _cases(rng):
    wind = rng.normal(7.6, 2.4, T)
    eps_d = rng.normal(0.0, np.sqrt(20.72), T)
    eps_s = rng.normal(0.0, 0.1, T)
    market = (38.09, -0.4, np.array([0.97]), 0.0, 4.0, 16.0, wind, eps_d, eps_s, np.array([374.0]), 1e6)
    ar = (0.5, np.array([1.84, -0.85]), rng.standard_normal(T), np.zeros(2))
    scores = rng.standard_normal((PANEL, 28))
    dev = rng.standard_normal(PANEL)
    return [
        ("ar_recursion AR(2)", kernels.ar_recursion_numba, kernels.ar_recursion_numpy, ar),
        ("market_recursion L=1", kernels.market_recursion_numba, kernels.market_recursion_numpy, market),
        ("hac_meat k=28 bw=10", kernels.hac_meat_numba, kernels.hac_meat_numpy, (scores, 10)),
        ("hac_meat k=28 bw=70", kernels.hac_meat_numba, kernels.hac_meat_numpy, (scores, 70)),
        ("hac_meat k=3 bw=70", kernels.hac_meat_numba, kernels.hac_meat_numpy, (scores[:, :3].copy(), 70)),
        ("autocovariances 24 lags", kernels.autocovariances_numba, kernels.autocovariances_numpy, (dev, 24)),
    ]


def _max_rel_diff(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    worst = 0.0
    for x, y in zip(a, b):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        scale = max(np.abs(y).max(initial=0.0), 1e-300)
        worst = max(worst, float(np.abs(x - y).max(initial=0.0) / scale))
    return worst


def _best(fn, args, repeat):
    number = 1
    # grow the inner loop until one batch takes about 50 ms
    while True:
        t = timeit.timeit(lambda: fn(*args), number=number)
        if t > 0.05 or number >= 10_000:
            break
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numba ms':>11}{'numpy ms':>11}{'speedup':>9}{'max rel diff':>14}")
    for name, fast, slow, args in _cases(rng):
        diff = _max_rel_diff(fast(*args), slow(*args))  # also warms up the JIT
        t_fast = _best(fast, args, repeat)
        t_slow = _best(slow, args, repeat)
        print(f"{name:<26}{1e3 * t_fast:>11.3f}{1e3 * t_slow:>11.3f}{t_slow / t_fast:>8.1f}x{diff:>14.1e}")


_E2E = (
    "import time; from elasticity_lab.harness import run_experiment;"
    "run_experiment('strategy-grid', {'length': 1000, 'burn_in': 100});"
    "t = time.perf_counter(); run_experiment('strategy-grid', seed=1);"
    "print(time.perf_counter() - t)"
)


def bench_end_to_end():
    print()
    print("strategy-grid, one seed (warm):")
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, ELASTICITY_LAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True, check=True)
        print(f"  {label:<6}{float(out.stdout):8.3f} s")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--end-to-end", action="store_true")
    args = parser.parse_args(argv)
    bench_kernels(args.repeat)
    if args.end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
