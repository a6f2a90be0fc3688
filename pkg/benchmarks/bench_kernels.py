"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R] [--size S]
"""

import argparse
import timeit

import numpy as np

from heavytail_ld._backend import available_backends


def cases(size, rng):
    t = np.logspace(-8, 2, size)
    u1 = rng.random((size, 1))
    u2 = rng.random((size // 8, 8))
    return {
        "sici": lambda k: k.sici(t),
        "psi_nodes": lambda k: k.psi_nodes(t, 0.4),
        "charfn_nodes n=64": lambda k: k.charfn_nodes(t, 0.4, 64),
        "mc_naive_chunk": lambda k: k.mc_naive_chunk(u2, 100.0, 0.7),
        "mc_bigjump_chunk": lambda k: k.mc_bigjump_chunk(u1, 100.0, 2, 0.7),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=200_000)
    args = ap.parse_args(argv)
    backends = available_backends()
    names = list(backends)
    work = cases(args.size, np.random.default_rng(0))
    print(f"{'kernel':<20}" + "".join(f"{n + ' (ms)':>16}" for n in names)
          + ("   speedup" if len(names) == 2 else ""))
    for label, fn in work.items():
        best = {}
        for name in names:
            k = backends[name]
            fn(k)
            best[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) * 1e3
        row = f"{label:<20}" + "".join(f"{best[n]:>16.2f}" for n in names)
        if "compiled" in best:
            row += f"{best['python'] / best['compiled']:>10.1f}x"
        print(row)
    if "compiled" not in backends:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
