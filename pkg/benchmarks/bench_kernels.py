"""Time the compiled and numpy kernels on a bootstrap-sized workload.

Usage::

    python benchmarks/bench_kernels.py [--boot 1000] [--T 240] [--d 8] [--repeat 5]

Both backends are also checked for bitwise-identical output.
"""

import argparse
import timeit

import numpy as np

from minspan import kernels
from minspan.bootstrap import BlockPlan, RegressionLayout, default_block_len, draw_block_starts, rng_from
from minspan.simulation import GARCH_ARCH, GARCH_BETA, GARCH_OMEGA, loading_matrix, var_matrix


def workloads(B, T, d):
    rng = np.random.default_rng(0)
    Z = np.column_stack([np.ones(T), rng.standard_normal((T, d))])
    plan = BlockPlan(T, default_block_len(T))
    starts = draw_block_starts(plan, rng_from(1, 0), B)
    layout = RegressionLayout.exclusion(d)
    K = d // 2
    v = rng.standard_normal((500 + T, d))
    phi, bmat = var_matrix(K, 0.1), loading_matrix(K, d - K)
    H = kernels.block_grams(Z, plan.block_len, backend="python")
    return {
        "block_grams": lambda be: kernels.block_grams(Z, plan.block_len, backend=be),
        "bootstrap_moments": lambda be: kernels.bootstrap_moments(H, starts, 1 / plan.t_b, layout.colsets, backend=be)[0][0],
        "var_garch": lambda be: kernels.var_garch(
            v, phi, np.zeros(K), bmat, np.zeros(d - K), GARCH_OMEGA, GARCH_ARCH, GARCH_BETA, backend=be
        ),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--boot", type=int, default=1000)
    ap.add_argument("--T", type=int, default=240)
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"B={args.boot} T={args.T} d={args.d}; backends: {', '.join(backends)}")
    print(f"{'kernel':<20}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}{'identical':>11}")
    for name, fn in workloads(args.boot, args.T, args.d).items():
        times, outs = [], []
        for be in backends:
            outs.append(fn(be))
            n = 3
            times.append(min(timeit.repeat(lambda: fn(be), number=n, repeat=args.repeat)) / n * 1e3)
        speed = f"{times[0] / times[-1]:.1f}x" if len(times) > 1 else "-"
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        print(f"{name:<20}" + "".join(f"{t:>14.3f}" for t in times) + f"{speed:>10}{str(same):>11}")


if __name__ == "__main__":
    main()
