"""Compiled vs pure-Python orbit counting and clustering.

    python benchmarks/bench_kernels.py --sizes 16 32 64 --repeat 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gengnn.evaluation import _kernels_py
from gengnn.evaluation import kernels
from gengnn.graph import gen_planar, gen_tree


def _graphs(kind: str, n: int, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    make = gen_tree if kind == "tree" else gen_planar
    return [make(n, rng).A.astype(np.uint8) for _ in range(count)]


def _time(fn, graphs, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for A in graphs:
            fn(A)
        best = min(best, time.perf_counter() - t0)
    return best / len(graphs)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--kinds", nargs="+", default=["tree", "planar"])
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if kernels.BACKEND != "cython":
        print("compiled kernels not built; only the Python backend is timed")
    print(f"{'kernel':<12}{'kind':<8}{'n':>5}{'python ms':>12}{'cython ms':>12}{'speedup':>9}")
    for kind in args.kinds:
        for n in args.sizes:
            graphs = _graphs(kind, n, args.count, args.seed)
            for name in ("orbits", "clustering"):
                py = getattr(_kernels_py, "orbit_counts" if name == "orbits" else "clustering")
                fast = getattr(kernels, "orbit_counts" if name == "orbits" else "clustering")
                for A in graphs:
                    assert np.allclose(py(A), fast(A)), "backends disagree"
                tp = _time(py, graphs, args.repeat)
                if kernels.BACKEND == "cython":
                    tc = _time(fast, graphs, args.repeat)
                    print(f"{name:<12}{kind:<8}{n:>5}{1e3 * tp:>12.3f}{1e3 * tc:>12.3f}{tp / tc:>9.1f}")
                else:
                    print(f"{name:<12}{kind:<8}{n:>5}{1e3 * tp:>12.3f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
