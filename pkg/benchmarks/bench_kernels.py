"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on representative sizes under both backends by
launching a subprocess with LDGLAB_DISABLE_NUMBA set, since the backend is
chosen at import time.  Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import timeit

WORKER = """
import json, os, timeit
import numpy as np
from ldglab.core import MaterialParams
from ldglab import kernels

p = MaterialParams.default()
rng = np.random.default_rng(0)
results = {"backend": "numba" if kernels.USE_NUMBA else "numpy"}

n = 513
q1 = rng.uniform(-0.5, 0.5, (n, n))
q3 = rng.uniform(-0.2, 0.2, (n, n))
kernels.bulk_reduced(q1, q3, p)   # warm-up / jit
results["bulk_reduced_513"] = min(timeit.repeat(
    lambda: kernels.bulk_reduced(q1, q3, p), number=20, repeat=5)) / 20

q = rng.uniform(-0.5, 0.5, (5, n, n))
kernels.bulk_full(q, p)
results["bulk_full_513"] = min(timeit.repeat(
    lambda: kernels.bulk_full(q, p), number=20, repeat=5)) / 20

pts = rng.uniform(-0.5, 0.5, (4001, 2))
grad = np.zeros_like(pts)
kernels.path_energy_grad(pts, p, grad)
results["path_energy_4001"] = min(timeit.repeat(
    lambda: kernels.path_energy_grad(pts, p, grad), number=200, repeat=5)) / 200

print(json.dumps(results))
"""


def run(disable_numba: bool) -> dict:
    env = dict(os.environ, LDGLAB_DISABLE_NUMBA="1" if disable_numba else "0")
    out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    numba = run(disable_numba=False)
    numpy_ = run(disable_numba=True)
    print(f"{'kernel':24s} {'numba [us]':>12s} {'numpy [us]':>12s} {'speedup':>9s}")
    for key in sorted(numba):
        if key == "backend":
            continue
        tn, tp = numba[key] * 1e6, numpy_[key] * 1e6
        print(f"{key:24s} {tn:12.1f} {tp:12.1f} {tp / tn:8.2f}x")
    print("\nNote: end-to-end solver time is dominated by sparse linear algebra,")
    print("so overall wall-clock gains are smaller than per-kernel speedups.")


if __name__ == "__main__":
    main()
