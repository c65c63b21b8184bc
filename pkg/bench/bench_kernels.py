#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference backend.

Times the three hot paths: the fused gradient pass that dominates head
training, the Adam update, and the stub-embedding expansion. Run after an
editable install:

    python bench/bench_kernels.py [--batch 32] [--repeats 200]
"""

import argparse
import time

import numpy as np

from ironia import kernels


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backend(name, batch, repeats):
    kb = kernels.get_backend(name)
    rng = np.random.default_rng(7)
    X = rng.normal(size=(batch, 768))
    y = rng.integers(0, 4, size=batch).astype(np.int64)
    W1 = rng.normal(scale=0.05, size=(768, 50))
    b1 = np.zeros(50)
    W2 = rng.normal(scale=0.1, size=(50, 4))
    b2 = np.zeros(4)
    grad = rng.normal(size=(768, 50))
    m, v = np.zeros_like(W1), np.zeros_like(W1)

    results = {
        "batch_gradients": time_call(
            lambda: kb.batch_gradients(X, y, W1, b1, W2, b2, False), repeats
        ),
        "forward_batch": time_call(
            lambda: kb.forward_batch(X, W1, b1, W2, b2, False), repeats
        ),
        "adam_step(W1)": time_call(
            lambda: kb.adam_step(W1, grad, m, v, 1, 1e-3, 0.9, 0.999, 1e-8), repeats
        ),
        "stub_expand(768)": time_call(lambda: kb.stub_expand(12345, 768), repeats),
    }
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    names = kernels.available_backends()
    print(f"backends: {', '.join(names)} (active: {kernels.active_backend_name()})")
    print(f"batch={args.batch} repeats={args.repeats} (best-of timing)\n")

    table = {name: bench_backend(name, args.batch, args.repeats) for name in names}
    ops = next(iter(table.values())).keys()
    width = max(len(op) for op in ops)
    header = f"{'op':<{width}}  " + "  ".join(f"{name:>12}" for name in names)
    print(header)
    print("-" * len(header))
    for op in ops:
        cells = "  ".join(f"{table[name][op] * 1e6:>10.1f}us" for name in names)
        print(f"{op:<{width}}  {cells}")
    if "native" in table and "reference" in table:
        print()
        for op in ops:
            ratio = table["reference"][op] / table["native"][op]
            print(f"{op}: native is {ratio:.1f}x the reference backend")


if __name__ == "__main__":
    main()
