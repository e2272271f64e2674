"""Compiled vs pure-numpy timings for the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from interpkit import _pykernels, kernels


def _time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    compiled = kernels._impl
    if compiled is _pykernels:
        print("compiled backend unavailable; only the python timings are meaningful")

    print(f"{'kernel':<14}{'size':>10}{'compiled [s]':>15}{'python [s]':>13}{'speedup':>10}")
    for n in (8, 12, 16, 18):
        a = np.ascontiguousarray(rng.standard_normal((n + 4, n)))
        assert abs(compiled.max_sign_sum(a) - _pykernels.max_sign_sum(a)) <= 1e-9 * np.abs(a).sum()
        tc = _time(lambda: compiled.max_sign_sum(a), args.repeat)
        tp = _time(lambda: _pykernels.max_sign_sum(a), args.repeat)
        print(f"{'max_sign_sum':<14}{f'{n + 4}x{n}':>10}{tc:>15.6f}{tp:>13.6f}{tp / tc:>10.1f}")
    for n in (100, 1000, 4000):
        c = rng.standard_normal(n)
        labels = np.arange(-n // 2, n - n // 2, dtype=np.int64)
        np.testing.assert_allclose(compiled.calderon(c, labels, 2.0), _pykernels.calderon(c, labels, 2.0), rtol=1e-9, atol=1e-9)
        tc = _time(lambda: compiled.calderon(c, labels, 2.0), args.repeat)
        tp = _time(lambda: _pykernels.calderon(c, labels, 2.0), args.repeat)
        print(f"{'calderon':<14}{n:>10}{tc:>15.6f}{tp:>13.6f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
