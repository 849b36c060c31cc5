"""Benchmark: compiled jet kernels against the pure numpy fallback.

The jet ring multiplication and the graded division are the hot inner
loops of every classification and certificate; this compares both
backends on the same workloads and on an end-to-end classification.
"""

from __future__ import annotations

import time

import numpy as np

from . import _jetcore_py
from . import _jettables as tables

try:
    from . import _jetcore
except ImportError:
    _jetcore = None


def _workload(order, n=2000, seed=0):
    rng = np.random.default_rng(seed)
    T = tables.term_count(order)
    a = rng.standard_normal((n, T))
    b = rng.standard_normal((n, T))
    b[:, 0] += 3.0  # keep divisions well-posed
    return a, b


def _time_kernel(core, a, b, order, repeats):
    best_mul = best_div = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for x, y in zip(a, b):
            core.jet_mul(x, y, order)
        best_mul = min(best_mul, time.perf_counter() - t0)
        t0 = time.perf_counter()
        for x, y in zip(a, b):
            core.jet_div(x, y, order)
        best_div = min(best_div, time.perf_counter() - t0)
    return best_mul, best_div


def _classification_time():
    from .builder import SwallowtailData, build
    from .frontal import classify
    data = SwallowtailData(xi=("2", "3*u", "0"), b=("0", "0", "1"))
    t0 = time.perf_counter()
    for _ in range(5):
        germ = build(data)
        classify(germ)
    return (time.perf_counter() - t0) / 5


def run_benchmark(repeats=5):
    print(f"jet kernel benchmark ({'extension built' if _jetcore else 'extension missing'})")
    for order in (4, 6):
        a, b = _workload(order)
        pm, pd = _time_kernel(_jetcore_py, a, b, order, repeats)
        line = f"order {order}: fallback mul {pm*1e3:7.2f} ms  div {pd*1e3:7.2f} ms"
        if _jetcore is not None:
            cm, cd = _time_kernel(_jetcore, a, b, order, repeats)
            line += (f" | compiled mul {cm*1e3:7.2f} ms  div {cd*1e3:7.2f} ms"
                     f" | speedup x{pm/cm:.1f} / x{pd/cd:.1f}")
        print(line)
        # agreement between backends
        if _jetcore is not None:
            x, y = a[0], b[0]
            dm = np.max(np.abs(_jetcore.jet_mul(x, y, order)
                               - _jetcore_py.jet_mul(x, y, order)))
            dd = np.max(np.abs(_jetcore.jet_div(x, y, order)
                               - _jetcore_py.jet_div(x, y, order)))
            print(f"          backend agreement: mul {dm:.2e}, div {dd:.2e}")
    print(f"end-to-end classification: {_classification_time()*1e3:.1f} ms "
          f"(active backend)")


if __name__ == "__main__":
    run_benchmark()
