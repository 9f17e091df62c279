"""Timing comparison of the compiled and pure-Python sampling kernels.

Times the three hot kernels (outcome-bit sampling, plus-count reduction,
signature binning) on Monte Carlo shaped workloads, then one end-to-end
adaptive run on the active backend.  Usage:

    python3 benchmarks/bench_kernels.py [--shots 200000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from paulitree._backend import active_backend, get_module
from paulitree.family import BasisString, FamilyInstance, corollary_profile
from paulitree.protocols import run_adaptive
from paulitree.sampling import ShotStream


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(shots, repeats):
    workloads = []
    for n in (3, 6):
        rng = np.random.default_rng(n)
        g = rng.uniform(-0.2, 0.2, n)
        key = int(rng.integers(2**63))
        workloads.append((n, g, key))

    rows = []
    for n, g, key in workloads:
        out_bits = np.empty((shots, n), dtype=np.uint8)
        out_sig = np.zeros(1 << n, dtype=np.int64)

        def make_cases(mod):
            return {
                "sample_bits": lambda: mod.sample_bits(g, shots, key, 0, 1, n, out_bits),
                "plus_count": lambda: mod.prefix_plus_count(g, shots, key, 0, 1, n),
                "signature_counts": lambda: (
                    out_sig.fill(0),
                    mod.signature_counts(g, shots, key, 0, 1, n, out_sig),
                ),
            }

        try:
            compiled = make_cases(get_module("cython"))
        except ImportError:
            compiled = None
        fallback = make_cases(get_module("python"))

        for name in ("sample_bits", "plus_count", "signature_counts"):
            t_py = best_of(repeats, fallback[name])
            t_cy = best_of(repeats, compiled[name]) if compiled else None
            rows.append((f"{name} n={n}", t_cy, t_py))
    return rows


def bench_end_to_end(repeats):
    inst = FamilyInstance(corollary_profile(4, 0.5), BasisString.from_str("ZXYZ"))

    def run():
        run_adaptive(inst, eta=0.1, stream=ShotStream(inst, seed=7), record=False)

    return best_of(repeats, run)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"active backend: {active_backend()}")
    print(f"{args.shots} shots per kernel call, best of {args.repeats}\n")
    print(f"{'workload':<24} {'cython':>10} {'python':>10} {'speedup':>9}")
    for name, t_cy, t_py in bench_kernels(args.shots, args.repeats):
        cy = f"{t_cy * 1e3:.1f} ms" if t_cy is not None else "n/a"
        speed = f"{t_py / t_cy:7.1f}x" if t_cy else "-"
        print(f"{name:<24} {cy:>10} {t_py * 1e3:>7.1f} ms {speed:>9}")

    t = bench_end_to_end(args.repeats)
    print(f"\nadaptive run n=4 (derived stage budgets, {active_backend()} backend): {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
