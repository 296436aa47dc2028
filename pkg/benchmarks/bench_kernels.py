"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--dim 20] [--points 4000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from cvtele import kernels


def cases(dim, points, seed=0):
    rng = np.random.default_rng(seed)
    alphas = rng.normal(scale=2.0, size=points) + 1j * rng.normal(scale=2.0, size=points)
    weights = rng.normal(size=points) + 1j * rng.normal(size=points)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    rho = np.outer(v, v.conj()) / np.vdot(v, v).real
    return {
        "displacement_batch": lambda impl: impl.displacement_batch(alphas, dim),
        "cf_trace_batch": lambda impl: impl.cf_trace_batch(rho, alphas),
        "weyl_sum": lambda impl: impl.weyl_sum(alphas, weights, dim),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=20)
    ap.add_argument("--points", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = {"numpy": kernels.python_impl}
    if kernels.compiled_impl is not None:
        impls["cython"] = kernels.compiled_impl
    else:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"dim={args.dim} points={args.points} (best of {args.repeat})")
    print(f"{'kernel':<20}" + "".join(f"{k:>12}" for k in impls) + f"{'speedup':>10}  max|diff|")
    for name, fn in cases(args.dim, args.points).items():
        times, outs = {}, {}
        for key, impl in impls.items():
            outs[key] = fn(impl)
            times[key] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        row = f"{name:<20}" + "".join(f"{times[k] * 1e3:>10.2f}ms" for k in impls)
        if "cython" in impls:
            diff = float(np.max(np.abs(outs["cython"] - outs["numpy"])))
            row += f"{times['numpy'] / times['cython']:>9.1f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
