"""Compiled vs pure-numpy per-atom kernels.

    python3 benchmarks/bench_kernels.py [--n 2000] [--atoms 50] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from tclab import _kernels_py as py

try:
    from tclab import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="outcomes")
    ap.add_argument("--atoms", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    x = rng.uniform(-10, 10, args.n)
    x[rng.random(args.n) < 0.02] = np.inf
    p = rng.uniform(0.2, 1.0, args.n)
    p /= p.sum()
    labels = np.sort(rng.integers(0, args.atoms, args.n)).astype(np.int64)
    labels[: args.atoms] = np.arange(args.atoms)
    labels.sort()
    k = args.atoms

    calls = {
        "atom_min": lambda m: m.atom_min(x, labels, k),
        "atom_expect": lambda m: m.atom_expect(x, p, labels, k),
        "atom_cvar": lambda m: m.atom_cvar(x, p, labels, k, 0.3),
        "atom_upper_quantile": lambda m: m.atom_upper_quantile(x, p, labels, k, 0.3),
    }
    print(f"n={args.n} atoms={k} repeat={args.repeat}")
    print(f"{'kernel':<22}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for name, fn in calls.items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<22}{t_py:>12.3f}{'n/a':>14}{'':>10}")
            continue
        a, b = fn(py), fn(compiled)
        assert np.allclose(a, b, equal_nan=False) or np.array_equal(a, b), name
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_py:>12.3f}{t_c:>14.3f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
