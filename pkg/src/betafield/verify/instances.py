"""Random and named test networks."""

from __future__ import annotations

import numpy as np

from ..graph import Network

__all__ = [
    "random_network",
    "random_weights",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "star_graph",
    "WEIGHT_RANGE",
]

WEIGHT_RANGE = (0.5, 2.0)


def random_weights(rng: np.random.Generator, size, lo: float = WEIGHT_RANGE[0], hi: float = WEIGHT_RANGE[1]) -> np.ndarray:
    return rng.uniform(lo, hi, size)


def random_network(rng: np.random.Generator, n: int, extra: float = 0.4, weights: tuple[float, float] = WEIGHT_RANGE) -> Network:
    """Random connected graph: a random recursive tree plus each other pair with probability ``extra``."""
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(v)), v))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra:
                edges.add((i, j))
    edges = sorted(edges)
    return Network(n, tuple(edges), random_weights(rng, len(edges), *weights))


def path_graph(n: int, w=1.0) -> Network:
    edges = tuple((k, k + 1) for k in range(n - 1))
    return Network(n, edges, np.broadcast_to(np.asarray(w, dtype=float), (n - 1,)))


def cycle_graph(n: int, w=1.0) -> Network:
    edges = tuple((k, k + 1) for k in range(n - 1)) + ((0, n - 1),)
    return Network(n, edges, np.broadcast_to(np.asarray(w, dtype=float), (n,)))


def complete_graph(n: int, w=1.0) -> Network:
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return Network(n, edges, np.broadcast_to(np.asarray(w, dtype=float), (len(edges),)))


def star_graph(leaves: int, w=1.0) -> Network:
    edges = tuple((0, k) for k in range(1, leaves + 1))
    return Network(leaves + 1, edges, np.broadcast_to(np.asarray(w, dtype=float), (leaves,)))
