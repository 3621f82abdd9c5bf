"""Compiled vs pure-Python GF(2) elimination.

Usage: python benchmarks/bench_gf2.py [--sizes 256 1024 2048] [--repeat 3]

Two workloads per size: dense random rows until full rank, and the sparse
unit/pair rows that dominate the phase-1 part of the delayed-CSIT schemes.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from xchannel.gf2 import BACKENDS, make_eliminator, nwords


def dense(backend: str, k: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, np.iinfo(np.uint64).max, (k + 16, nwords(k)), dtype=np.uint64, endpoint=True)
    if k % 64:
        rows[:, -1] &= np.uint64((1 << (k % 64)) - 1)
    rhs = rng.integers(0, 2, k + 16)
    el = make_eliminator(k, backend)
    t = time.perf_counter()
    for r, y in zip(rows, rhs):
        el.add_row(r, int(y))
        if el.rank == k:
            break
    return time.perf_counter() - t


def sparse(backend: str, k: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    pairs = rng.integers(0, k, (3 * k, 2))
    units = rng.integers(0, k, k)
    el = make_eliminator(k, backend)
    t = time.perf_counter()
    for (u, v), w in zip(pairs, np.resize(units, 3 * k)):
        if u != v:
            el.add_pair(int(u), int(v), 0)
        if rng.random() < 0.3:
            el.add_unit(int(w), 0)
    return time.perf_counter() - t


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 2048])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = sorted(BACKENDS)
    print(f"{'workload':<8} {'k':>6} " + " ".join(f"{n:>10}" for n in names) + "   speedup")
    for k in args.sizes:
        for label, fn in (("dense", dense), ("sparse", sparse)):
            best = {n: min(fn(n, k, s) for s in range(args.repeat)) for n in names}
            speed = best["python"] / best["compiled"] if "compiled" in best else float("nan")
            cells = " ".join(f"{best[n]:>9.4f}s" for n in names)
            print(f"{label:<8} {k:>6} {cells}   {speed:6.1f}x")


if __name__ == "__main__":
    main()
