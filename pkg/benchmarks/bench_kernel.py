#!/usr/bin/env python3
"""Benchmark the compiled simplex kernel against the pure-Python fallback.

Measures raw kernel solves on random bounded LPs and on the 9-bus dispatch
program, plus an end-to-end clearing fixed point, and verifies that the two
kernels return value-identical results on every instance they share.

Usage: python benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import random
import statistics
import time

import numpy as np

from gridbid import kernel, load_case9
from gridbid.dcopf import template_for
from gridbid.market import ClearingEngine


def random_instance(rng, n_max=12, m_max=8):
    n = rng.randint(4, n_max)
    m = rng.randint(2, min(m_max, n))
    A = np.array([[rng.uniform(-3, 3) for _ in range(n)] for _ in range(m)])
    lo = np.array([rng.uniform(-5, 0) for _ in range(n)])
    up = lo + np.array([rng.uniform(0.5, 6) for _ in range(n)])
    x0 = np.array([rng.uniform(l, u) for l, u in zip(lo, up)])
    b = A @ x0
    c = np.array([rng.uniform(-2, 2) for _ in range(n)])
    return A, b, c, lo, up


def time_solves(solve, instances, repeat):
    times = []
    results = []
    for inst in instances:
        t0 = time.perf_counter()
        for _ in range(repeat):
            res = solve(*inst)
        times.append((time.perf_counter() - t0) / repeat)
        results.append(res)
    return times, results


def bench_random(impls, repeat):
    rng = random.Random(1234)
    instances = [random_instance(rng) for _ in range(60)]
    print("random bounded LPs (4-12 vars, 2-8 rows), 60 instances:")
    baseline = None
    outputs = {}
    for name, impl in impls.items():
        times, results = time_solves(impl.solve, instances, repeat)
        outputs[name] = results
        mean_us = 1e6 * statistics.mean(times)
        print(f"  {name:>8}: {mean_us:9.1f} us/solve")
        if baseline is None:
            baseline = mean_us
        else:
            print(f"            speedup vs python: {baseline / mean_us:.1f}x")
    _check_identical(outputs)


def bench_dispatch(impls, repeat):
    case = load_case9()
    tpl = template_for(case.network)
    rng = random.Random(7)
    instances = []
    for _ in range(60):
        prices = [rng.uniform(0.01, 5.0) for _ in range(3)]
        demand = rng.uniform(30.0, 770.0)
        c = tpl._c_base.copy()
        c[:3] = prices
        b = tpl._b_base.copy()
        b[tpl._load_rows] = -np.full(3, demand / 3)
        instances.append((tpl._A, b, c, tpl._lo, tpl._up))
    print("9-bus dispatch LP (21 vars, 18 rows), 60 instances:")
    baseline = None
    outputs = {}
    for name, impl in impls.items():
        times, results = time_solves(impl.solve, instances, repeat)
        outputs[name] = results
        mean_us = 1e6 * statistics.mean(times)
        print(f"  {name:>8}: {mean_us:9.1f} us/solve")
        if baseline is None:
            baseline = mean_us
        else:
            print(f"            speedup vs python: {baseline / mean_us:.1f}x")
    _check_identical(outputs)


def bench_clearing(impls):
    case = load_case9()
    prices = (2.0, 3.3, 4.1)
    print("clearing fixed point at prices (2.0, 3.3, 4.1):")
    results = {}
    for name, impl in impls.items():
        kernel.solve = impl.solve  # route the hot path through this kernel
        try:
            engine = ClearingEngine(case.network, case.market)
            t0 = time.perf_counter()
            compact = engine.clear(prices)
            dt = time.perf_counter() - t0
            results[name] = compact
            print(f"  {name:>8}: {1e3 * dt:9.2f} ms "
                  f"({compact.iterations_used} iterations)")
        finally:
            kernel.solve = kernel._impl.solve
    vals = list(results.values())
    for other in vals[1:]:
        assert other == vals[0], "kernels disagreed on the clearing state"


def _check_identical(outputs):
    names = list(outputs)
    ref = outputs[names[0]]
    for name in names[1:]:
        for a, b in zip(ref, outputs[name]):
            assert a[0] == b[0] and a[1] == b[1] and a[2] == b[2], \
                f"kernel {name} diverged from {names[0]}"
    if len(names) > 1:
        print(f"  results value-identical across: {', '.join(names)}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions per instance")
    args = ap.parse_args()
    impls = kernel.available_kernels()
    print(f"kernels available: {', '.join(impls)} "
          f"(active: {kernel.kernel_name()})\n")
    bench_random(impls, args.repeat)
    print()
    bench_dispatch(impls, args.repeat)
    print()
    bench_clearing(impls)


if __name__ == "__main__":
    main()
