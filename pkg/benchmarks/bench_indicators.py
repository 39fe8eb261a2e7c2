"""Benchmark the compiled indicator kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_indicators.py [series_length] [repeats]
"""
import sys
import timeit

import numpy as np

from rlfolio import _kernels_py

try:
    from rlfolio import _ind_kernels
except ImportError:
    _ind_kernels = None


def make_series(n, seed=0):
    rng = np.random.default_rng(seed)
    close = 100 * np.exp(np.cumsum(rng.normal(0, 0.02, n)))
    high = close * (1 + np.abs(rng.normal(0, 0.01, n)))
    low = close * (1 - np.abs(rng.normal(0, 0.01, n)))
    return high, low, close


def bench(label, fn, repeats):
    best = min(timeit.repeat(fn, number=1, repeat=repeats))
    print(f"  {label:<10} {best * 1e3:10.3f} ms")
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    repeats = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    high, low, close = make_series(n)
    tp = (high + low + close) / 3.0

    cases = [
        ("ema", lambda k: k.ema(close, 2.0 / 13.0)),
        ("rsi", lambda k: k.rsi_kernel(close, 14)),
        ("cci", lambda k: k.cci_kernel(tp, 14)),
        ("adx", lambda k: k.adx_kernel(high, low, close, 14)),
    ]
    backends = [("python", _kernels_py)]
    if _ind_kernels is not None:
        backends.append(("cython", _ind_kernels))
    else:
        print("compiled extension not available; benchmarking fallback only")

    print(f"series length {n}, best of {repeats} runs\n")
    for name, call in cases:
        print(f"{name}:")
        times = {}
        for label, mod in backends:
            times[label] = bench(label, lambda m=mod: call(m), repeats)
        if "cython" in times:
            speedup = times["python"] / times["cython"]
            print(f"  speedup    {speedup:10.1f}x")
        print()


if __name__ == "__main__":
    main()
