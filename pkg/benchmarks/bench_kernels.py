#!/usr/bin/env python3
"""Benchmark the compiled graph kernels against the NumPy/SciPy fallback.

Times the two hot kernels (component labelling and seeded spreading) on
sampled networks of increasing size and prints a comparison table.  Run
after `pip install -e .`:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from persuasion_net import _kernels
from persuasion_net._kernels import _fallback
from persuasion_net.model import FiniteDist, ModelParams
from persuasion_net.netgen import sample_network
from persuasion_net.rng import RngSpec

try:
    from persuasion_net._kernels import _core
except ImportError:
    _core = None


def build(n, mean_degree=4.0):
    lam = math.sqrt(mean_degree)
    f = FiniteDist.point(lam)
    p = ModelParams(gamma_h=0.5, mu_h1=0.6, mu_l1=0.4, mu_s1=0.5, q=1.0,
                    f_h=f, f_l=f)
    return sample_network(p, n, RngSpec(1234))


def timeit(fn, *args, reps=5):
    best = math.inf
    out = None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    backends = [("python", _fallback)]
    if _core is not None:
        backends.insert(0, ("cython", _core))
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'n':>9} {'edges':>9} {'kernel':>22} {'cython':>10} {'python':>10} {'speedup':>8}")
    for n in (10_000, 100_000, 300_000):
        net = build(n)
        carrier = np.ones(net.n, dtype=np.uint8)
        believers = (net.node_type == 0).astype(np.uint8)
        seeds = np.arange(0, net.n, max(1, net.n // 8), dtype=np.int64)
        rows = {
            "components(full)": lambda impl: impl.components_labels(
                net.indptr, net.indices, carrier),
            "components(believer)": lambda impl: impl.components_labels(
                net.indptr, net.indices, believers),
            "spread(believer shr)": lambda impl: impl.spread_observed(
                net.indptr, net.indices, seeds, believers),
        }
        for name, call in rows.items():
            times = {}
            results = {}
            for bname, impl in backends:
                times[bname], results[bname] = timeit(call, impl)
            if _core is not None:
                a, b = results["cython"], results["python"]
                if isinstance(a, tuple):  # components: compare partitions
                    assert a[1] == b[1]
                else:
                    assert np.array_equal(a, b)
            cy = times.get("cython", float("nan"))
            py = times["python"]
            speedup = py / cy if _core is not None else float("nan")
            print(f"{n:>9} {net.edge_count:>9} {name:>22} "
                  f"{cy * 1e3:>8.2f}ms {py * 1e3:>8.2f}ms {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
