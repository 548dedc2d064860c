"""Compare the compiled and NumPy replicate kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--n 400] [--B 1000] [--repeat 5]

Times the kernel alone on inputs of a realistic shape and the full
``bootstrap_replicates`` call with each backend, and checks that both
backends agree.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from cifabc import MultiplierSpec, Window, bootstrap_replicates, kernels
from cifabc._kernels_py import replicate_functionals as py_kernel
from cifabc.simulation import scenario


def kernel_inputs(rng, B, m, grid):
    def group():
        idx = np.sort(rng.integers(0, m + 1, grid)).astype(np.intp)
        return rng.standard_normal((B, m)), rng.standard_normal((B, m)), idx, np.sort(rng.random(grid))

    return (*group(), *group(), rng.random(grid))


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400, help="subjects per group")
    ap.add_argument("--B", type=int, default=1000, help="bootstrap replicates")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not kernels.compiled_available():
        print("compiled extension not available; only the NumPy kernel can be timed")
    from cifabc import _kernels_py

    backends = {"python": _kernels_py.replicate_functionals}
    if kernels.compiled_available():
        from cifabc._kernels import replicate_functionals as c_kernel

        backends["cython"] = c_kernel

    rng = np.random.default_rng(0)
    m = int(0.8 * args.n)
    args_k = kernel_inputs(rng, min(args.B, 1024), m, 2 * m)
    print(f"kernel only: B={min(args.B, 1024)}, {m} events per group, {2 * m} grid points")
    times = {}
    for name, fn in backends.items():
        times[name] = best(lambda: fn(*args_k), args.repeat)
        print(f"  {name:7s} {times[name] * 1e3:9.2f} ms")
    if "cython" in backends:
        diff = np.max(np.abs(backends["cython"](*args_k) - py_kernel(*args_k)))
        print(f"  speedup {times['python'] / times['cython']:.1f}x, max abs difference {diff:.1e}")

    data = scenario(2, "H1", sizes=(args.n, args.n)).simulate(np.random.default_rng(1))
    window, spec = Window(0, 1.5), MultiplierSpec("poisson", True)
    print(f"bootstrap_replicates: n={args.n}+{args.n}, B={args.B}")
    original = kernels.replicate_functionals
    results = {}
    try:
        for name, fn in backends.items():
            kernels.replicate_functionals = fn
            times[name] = best(lambda: bootstrap_replicates(data, window, spec, args.B, 7), args.repeat)
            results[name] = bootstrap_replicates(data, window, spec, args.B, 7)
            print(f"  {name:7s} {times[name] * 1e3:9.2f} ms")
    finally:
        kernels.replicate_functionals = original
    if "cython" in results:
        diff = np.max(np.abs(results["cython"] - results["python"]))
        print(f"  speedup {times['python'] / times['cython']:.1f}x, max abs difference {diff:.1e}")


if __name__ == "__main__":
    main()
