"""Time the matrix-free Hamiltonian apply for the compiled and numpy kernels.

Usage::

    python3 benchmarks/bench_apply.py [--repeat 5] [--cases small,medium,large]

Each case prints the basis size, the best time per apply for every available
backend, the speedup over numpy and the largest difference between the
backends' outputs.
"""
import argparse
import time

import numpy as np

from varqed import kernels
from varqed.matter import EmitterSpec, solve_matter
from varqed.modes import CavityGeometry
from varqed.oracle import build_operator

CASES = {
    # name: (levels, modes, photon cap)
    "small": (2, 16, 3),
    "medium": (4, 16, 4),
    "large": (4, 30, 4),
}


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cases", default=",".join(CASES))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    print(f"backends: {', '.join(sorted(kernels.BACKENDS))} (default {kernels.BACKEND})")
    header = f"{'case':<8} {'states':>9} " + " ".join(f"{b + ' [ms]':>13}" for b in sorted(kernels.BACKENDS))
    print(header + f" {'speedup':>8} {'max diff':>10}")
    rng = np.random.default_rng(0)
    for name in args.cases.split(","):
        levels, modes, photons = CASES[name]
        eig = solve_matter(EmitterSpec(levels, (), -0.5))
        cavity = CavityGeometry(np.pi, 0.3 * np.pi, 0.5)
        ops = {b: build_operator(eig, cavity, modes, photons, backend=b, threads=args.threads)
               for b in kernels.BACKENDS}
        n = next(iter(ops.values())).size
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        out = {b: op.apply(v) for b, op in ops.items()}
        times = {b: best_time(lambda op=op: op.apply(v), args.repeat) for b, op in ops.items()}
        diff = max(float(np.abs(out[b] - out["numpy"]).max()) for b in out)
        speedup = times["numpy"] / times.get("cython", times["numpy"])
        cols = " ".join(f"{1e3 * times[b]:>13.2f}" for b in sorted(kernels.BACKENDS))
        print(f"{name:<8} {n:>9d} {cols} {speedup:>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
