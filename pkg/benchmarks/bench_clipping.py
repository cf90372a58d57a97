"""Benchmark: compiled clipping kernel vs the pure-Python fallback.

Times ball_masses (the hot loop of every density ladder) on a generator mesh
over a batch of query points, for both backends, and reports the speedup.
Both implementations are imported directly so one process measures the pair.

Usage: python benchmarks/bench_clipping.py [--level 4] [--queries 20] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from varifold_lab import generators
from varifold_lab._kernels import pyfallback

try:
    from varifold_lab._kernels import _clipcore
except ImportError:
    _clipcore = None


def run(impl, v, points, radii) -> float:
    t0 = time.perf_counter()
    for x0 in points:
        impl.ball_masses(v.vertices, v.faces, v.multiplicity, x0, radii)
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=4, help="sphere refinement level")
    ap.add_argument("--queries", type=int, default=20, help="number of query points")
    ap.add_argument("--repeat", type=int, default=3, help="take the best of N runs")
    args = ap.parse_args()

    v = generators.gen_sphere(1.0, args.level).varifold
    rng = np.random.default_rng(0)
    points = rng.normal(size=(args.queries, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    radii = 0.4 * 0.5 ** np.arange(6)

    print(f"mesh: sphere level {args.level} "
          f"({len(v.vertices)} vertices, {len(v.faces)} faces), "
          f"{args.queries} query points x {len(radii)} radii")

    t_py = min(run(pyfallback, v, points, radii) for _ in range(args.repeat))
    print(f"fallback: {t_py:8.3f} s")

    if _clipcore is None:
        print("compiled: not built (pip install -e . compiles it when Cython is available)")
        return
    t_c = min(run(_clipcore, v, points, radii) for _ in range(args.repeat))
    print(f"compiled: {t_c:8.3f} s")
    print(f"speedup:  {t_py / t_c:8.1f}x")

    # parity spot check while both are loaded
    m_py = pyfallback.ball_masses(v.vertices, v.faces, v.multiplicity, points[0], radii)
    m_c = _clipcore.ball_masses(v.vertices, v.faces, v.multiplicity, points[0], radii)
    print(f"parity:   max |diff| = {np.abs(m_py - m_c).max():.3e}")


if __name__ == "__main__":
    main()
