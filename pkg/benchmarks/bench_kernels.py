"""Time the compiled kernels against their pure-Python twins.

    python benchmarks/bench_kernels.py [--m 100] [--d 20] [--K 30] [--repeat 5]

Prints the best-of-``repeat`` time per kernel and backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from decopt.graph import build_mixing_matrix, generate_erdos_renyi
from decopt.kernels import available_backends, load_backend


def cases(m, d, K):
    w = build_mixing_matrix(generate_erdos_renyi(m, 0.2, seed=0)).entries
    lap = np.diag(np.full(m, 2.0)) - np.eye(m, k=1) - np.eye(m, k=-1)
    x = np.random.default_rng(0).standard_normal((m, d))
    eta = 0.3
    return {
        "householder_tridiagonal": lambda b: b.householder_tridiagonal(lap),
        "tridiagonal_eigenvalues": (
            lambda b, t=load_backend("python").householder_tridiagonal(lap): b.tridiagonal_eigenvalues(*t)
        ),
        "fastmix_recurrence": lambda b: b.fastmix_recurrence(w, x, K, eta),
        "matrix_power_apply": lambda b: b.matrix_power_apply(w, x, K),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--d", type=int, default=20)
    ap.add_argument("--K", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = available_backends()
    print(f"m={args.m} d={args.d} K={args.K}; backends: {', '.join(backends)}")
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases(args.m, args.d, args.K).items():
        times = []
        for b in backends:
            mod = load_backend(b)
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            times.append(best)
        row = f"{name:<26}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
