"""Time the compiled kernels against the pure-Python fallback on J_n models.

    python3 benchmarks/bench_kernels.py [--levels 4 6 8] [--repeat 3]

Every kernel is run on identical inputs for each backend; outputs are compared
before timings are reported.
"""
import argparse
import time

import numpy as np

from qstree import kernels
from qstree.csst import build_jn


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n):
    tree = build_jn(n)
    indptr, nbr, edge_of, weight, _, eu, ev = tree.csr
    size = len(tree)
    sources = np.arange(min(size, 256))
    rng = np.random.default_rng(n)
    mask = (rng.random(size) < 0.2).astype(np.uint8)
    values = rng.integers(0, 1000, size)
    dm = kernels.tree_distance_matrix(indptr, nbr, weight, sources[:128])[:, :128].copy()
    return size, {
        "tree_distances": lambda k: k.tree_distances(indptr, nbr, weight, 0),
        "tree_distance_matrix": lambda k: k.tree_distance_matrix(indptr, nbr, weight, sources),
        "path_max_sweep": lambda k: k.path_max_sweep(indptr, nbr, weight, values, 0),
        "branch_diameters": lambda k: k.branch_diameters(indptr, nbr, weight),
        "cut_components": lambda k: k.cut_components(indptr, nbr, edge_of, eu, ev, mask),
        "ratio_argext": lambda k: k.ratio_argext(dm * dm, dm + 1, True),
    }


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the fallback is available")
    names = list(backends)
    print(f"{'model':>6} {'vertices':>8} {'kernel':<22}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for n in args.levels:
        size, fns = cases(n)
        for kname, fn in fns.items():
            times, outs = [], []
            for b in names:
                t, out = best_of(lambda: fn(backends[b]), args.repeat)
                times.append(t)
                outs.append(out)
            if not all(same(outs[0], o) for o in outs[1:]):
                raise SystemExit(f"backends disagree on {kname} for J_{n}")
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'-':>10}"
            print(f"{'J_' + str(n):>6} {size:>8} {kname:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
