"""Time the compiled kernels against the NumPy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--draws 200000] [--repeat 3]

Every kernel is run by both backends on the same pre-drawn random numbers;
the script checks that the outputs agree bit for bit and prints the best
wall time of each.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from betafield import _backend
from betafield.graph import coupling_matrix
from betafield.verify.instances import cycle_graph, random_network


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(draws: int, rng: np.random.Generator):
    net = random_network(rng, 6, extra=0.5)
    n = net.n
    w = np.ascontiguousarray(coupling_matrix(net)[None])
    theta = np.ones((1, n))
    normals, uniforms = rng.standard_normal((draws, n)), rng.random((draws, n))
    yield "sample_pivots", f"n={n}, {draws} draws", lambda k: k.sample_pivots(w, theta, normals, uniforms)

    cyc = cycle_graph(4)
    indptr, nbr, wts, eid = cyc.csr
    a = np.ones(cyc.n_edges)
    walk_u = rng.random((draws, 8))
    yield "errw_walks", f"4-cycle, {draws} walks x 8 steps", lambda k: k.errw_walks(indptr, nbr, eid, a, 0, walk_u)

    ntraj = max(1, draws // 100)
    jump_u = rng.random((ntraj, 50, 2))
    phi = np.ones(cyc.n)
    yield "vrjp_jumps", f"4-cycle, {ntraj} paths x 50 jumps", lambda k: k.vrjp_jumps(indptr, nbr, wts, phi, 0, jump_u)

    seeds = np.random.SeedSequence(1).spawn(ntraj)

    def advance(k):
        loc = np.tile(phi, (ntraj, 1))
        cur = np.zeros(ntraj, dtype=np.int64)
        zt = np.zeros(ntraj)
        jumps = np.zeros(ntraj, dtype=np.int64)
        gens = [np.random.Generator(np.random.PCG64(s)) for s in seeds]
        k.vrjp_advance(indptr, nbr, wts, phi, loc, cur, zt, jumps, 200.0, gens)
        return loc, cur, jumps

    yield "vrjp_advance", f"4-cycle, {ntraj} paths to Z-time 200", advance


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--draws", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _backend.compiled is None:
        raise SystemExit("compiled extension not available; build with `pip install --no-build-isolation -e .`")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<14s} {'workload':<36s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}  identical")
    for name, workload, call in cases(args.draws, rng):
        tc, oc = best_of(lambda: call(_backend.compiled), args.repeat)
        tp, op = best_of(lambda: call(_backend.python), args.repeat)
        print(f"{name:<14s} {workload:<36s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}  {same(oc, op)}")


if __name__ == "__main__":
    main()
