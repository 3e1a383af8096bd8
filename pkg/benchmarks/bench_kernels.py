"""Compiled vs pure-Python kernel timings.

Run from the repository root::

    python3 benchmarks/bench_kernels.py

The first block times the kernels in-process. The second times a
representative workload (a batch of contour coefficients and one exact
moment) in fresh interpreters, once per backend, selected through
``GINPROD_PURE_PYTHON``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ginprod._kernels import _pykernels

try:
    from ginprod._kernels import _ckernels
except ImportError:
    _ckernels = None

WORKLOAD = """
import time
from ginprod import BACKEND, CoefficientCache, EnsembleParams, coeff_a, moment_exact
t = time.perf_counter()
cache = CoefficientCache()
for m in (1, 2, 3):
    for j in range(1, 25):
        coeff_a(m, j, j + 1, cache=cache)
moment_exact(EnsembleParams(80, 2), 2, cache=CoefficientCache())
print(BACKEND, time.perf_counter() - t)
"""


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_table(size, repeat):
    rng = np.random.default_rng(0)
    z = rng.uniform(0.1, 40, size) + 1j * rng.uniform(-200, 200, size)
    g = rng.normal(size=size) + 1j * rng.normal(size=size)
    w = rng.uniform(0, 1, size)
    rows = []
    for name, mod in (("python", _pykernels), ("compiled", _ckernels)):
        if mod is None:
            rows.append((name, float("nan"), float("nan")))
            continue
        t_lg = _best(lambda: mod.loggamma(z), repeat, 5)
        t_sum = _best(lambda: mod.shifted_real_exp_sum(g, w, 0.5), repeat, 20)
        rows.append((name, t_lg, t_sum))
    return rows


def workload(backend):
    env = dict(os.environ, GINPROD_PURE_PYTHON="1" if backend == "python" else "0")
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-workload", action="store_true")
    args = ap.parse_args(argv)

    rows = kernel_table(args.size, args.repeat)
    print(f"kernels, {args.size} points")
    print(f"{'backend':10s} {'loggamma [ms]':>14s} {'exp-sum [ms]':>13s}")
    for name, a, b in rows:
        print(f"{name:10s} {a * 1e3:14.3f} {b * 1e3:13.3f}")
    if rows[1][1] == rows[1][1]:
        print(f"speedup    {rows[0][1] / rows[1][1]:14.2f} {rows[0][2] / rows[1][2]:13.2f}")
    if not args.skip_workload:
        print("\nworkload (72 coefficients + one exact moment, fresh process)")
        for backend in ("python", "compiled"):
            name, t = workload(backend)
            print(f"{name:10s} {t:8.3f} s")


if __name__ == "__main__":
    main()
