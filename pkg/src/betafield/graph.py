"""Finite conductance networks, their matrices and spanning-tree sums."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Network",
    "as_ordering",
    "coupling_matrix",
    "graph_distance",
    "distance_matrix",
    "spanning_tree_polynomial",
    "log_spanning_tree_polynomial",
    "enumerate_spanning_trees",
    "laplacian",
    "log_tree_sums",
]

MAX_ENUMERATION_VERTICES = 10


@dataclass(frozen=True, eq=False)
class Network:
    """Connected undirected graph on vertices ``0..n-1`` with positive weights.

    Edges are stored as sorted pairs ``(i, j)`` with ``i < j``; ``weights[k]``
    is the conductance of ``edges[k]``. Instances are immutable.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 1:
            raise ValueError("a network needs at least one vertex")
        edges = []
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge {(i, j)} has a vertex outside 0..{n - 1}")
            edges.append((min(i, j), max(i, j)))
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edge")
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape != (len(edges),):
            raise ValueError("need exactly one weight per edge")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("edge weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "weights", w)
        if not _is_connected(n, edges):
            raise ValueError("network is disconnected")

    @classmethod
    def from_weighted_edges(cls, n: int, edges: Iterable[Sequence[float]]) -> Network:
        """Build from ``[(i, j, w), ...]``."""
        edges = [tuple(e) for e in edges]
        return cls(n, tuple((int(e[0]), int(e[1])) for e in edges), np.array([e[2] for e in edges], dtype=float))

    @classmethod
    def from_matrix(cls, w: np.ndarray) -> Network:
        w = np.asarray(w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or not np.allclose(w, w.T, rtol=0, atol=0):
            raise ValueError("weight matrix must be square and symmetric")
        i, j = np.nonzero(np.triu(w, 1))
        return cls(w.shape[0], tuple(zip(i.tolist(), j.tolist())), w[i, j])

    @classmethod
    def from_dict(cls, spec: dict) -> Network:
        try:
            return cls.from_weighted_edges(int(spec["n"]), spec["edges"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed graph spec: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> Network:
        with open(path) as fh:
            try:
                spec = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"malformed graph file {path}: {exc}") from exc
        return cls.from_dict(spec)

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, float(w)] for (i, j), w in zip(self.edges, self.weights)]}

    def with_weights(self, weights: np.ndarray) -> Network:
        """Same edge set, new conductances."""
        return Network(self.n, self.edges, np.asarray(weights, dtype=float))

    def permuted(self, perm: Sequence[int]) -> Network:
        """Relabel vertex ``v`` as ``perm[v]``."""
        perm = as_ordering(perm, self.n)
        return Network(self.n, tuple((int(perm[i]), int(perm[j])) for i, j in self.edges), self.weights)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def edge_id(self, i: int, j: int) -> int:
        """Index of edge ``{i, j}``; raises ``KeyError`` for non-edges."""
        return self.edge_index[(min(i, j), max(i, j))]

    @cached_property
    def vertex_weights(self) -> np.ndarray:
        """``W_i``, the total conductance at each vertex."""
        wi = np.zeros(self.n)
        np.add.at(wi, self.edge_array[:, 0], self.weights)
        np.add.at(wi, self.edge_array[:, 1], self.weights)
        wi.setflags(write=False)
        return wi

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, neighbours, weights, edge_ids)``, neighbours sorted."""
        rows: list[list[tuple[int, float, int]]] = [[] for _ in range(self.n)]
        for k, ((i, j), w) in enumerate(zip(self.edges, self.weights)):
            rows[i].append((j, float(w), k))
            rows[j].append((i, float(w), k))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        nbr, wts, eid = [], [], []
        for v, row in enumerate(rows):
            row.sort()
            indptr[v + 1] = indptr[v] + len(row)
            for j, w, k in row:
                nbr.append(j)
                wts.append(w)
                eid.append(k)
        out = (indptr, np.array(nbr, dtype=np.int64), np.array(wts, dtype=float), np.array(eid, dtype=np.int64))
        for a in out:
            a.setflags(write=False)
        return out

    def neighbours(self, i: int) -> np.ndarray:
        indptr, nbr, _, _ = self.csr
        return nbr[indptr[i]:indptr[i + 1]]


def _is_connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def as_ordering(order: Sequence[int] | None, n: int) -> np.ndarray:
    """Validate a vertex ordering; ``None`` means the identity.

    ``order[k]`` is the vertex placed at position ``k``.
    """
    if order is None:
        return np.arange(n)
    arr = np.asarray(order, dtype=np.int64).reshape(-1)
    if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(n)):
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    return arr


def coupling_matrix(net: Network) -> np.ndarray:
    """Symmetric matrix with zero diagonal and ``W_ij`` off the diagonal."""
    p = np.zeros((net.n, net.n))
    if net.n_edges:
        i, j = net.edge_array.T
        p[i, j] = net.weights
        p[j, i] = net.weights
    return p


def distance_matrix(net: Network) -> np.ndarray:
    """All-pairs hop distances by breadth-first search."""
    dist = np.full((net.n, net.n), -1, dtype=np.int64)
    for s in range(net.n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in net.neighbours(v):
                if dist[s, w] < 0:
                    dist[s, w] = dist[s, v] + 1
                    queue.append(w)
    return dist


def graph_distance(net: Network, i: int, j: int) -> int:
    return int(distance_matrix(net)[i, j])


def laplacian(n: int, edges: np.ndarray, weights: np.ndarray) -> np.ndarray:
    lap = np.zeros((n, n))
    if len(edges):
        i, j = np.asarray(edges).T
        np.add.at(lap, (i, j), -weights)
        np.add.at(lap, (j, i), -weights)
        np.add.at(lap, (i, i), weights)
        np.add.at(lap, (j, j), weights)
    return lap


def _tree_weights(net: Network, u: np.ndarray | None) -> np.ndarray:
    if u is None:
        return np.asarray(net.weights, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (net.n,):
        raise ValueError(f"u must have length {net.n}")
    i, j = net.edge_array.T
    return net.weights * np.exp(u[i] + u[j])


def log_spanning_tree_polynomial(net: Network, u: np.ndarray | None = None, *, deleted: int = 0) -> float:
    """``log D(W, u)`` via the matrix-tree theorem.

    The weighted Laplacian with edge weights ``W_ij exp(u_i + u_j)`` has the
    row and column of ``deleted`` removed; the remaining principal minor is
    evaluated by LU factorisation with partial pivoting.
    """
    if net.n == 1:
        return 0.0
    lap = laplacian(net.n, net.edge_array, _tree_weights(net, u))
    keep = np.delete(np.arange(net.n), deleted)
    sign, logdet = np.linalg.slogdet(lap[np.ix_(keep, keep)])
    if sign <= 0:
        raise FloatingPointError("non-positive Laplacian minor; weights underflowed")
    return float(logdet)


def spanning_tree_polynomial(net: Network, u: np.ndarray | None = None, *, deleted: int = 0) -> float:
    """``D(W, u) = sum_T prod_{ij in T} W_ij exp(u_i + u_j)``."""
    return float(np.exp(log_spanning_tree_polynomial(net, u, deleted=deleted)))


def enumerate_spanning_trees(net: Network) -> list[tuple[int, ...]]:
    """Every spanning tree as a tuple of edge indices (brute force, n <= 10)."""
    if net.n > MAX_ENUMERATION_VERTICES:
        raise ValueError(f"enumeration limited to {MAX_ENUMERATION_VERTICES} vertices")
    trees = []
    for subset in itertools.combinations(range(net.n_edges), net.n - 1):
        parent = list(range(net.n))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for k in subset:
            a, b = find(net.edges[k][0]), find(net.edges[k][1])
            if a == b:
                break
            parent[a] = b
        else:
            trees.append(subset)
    return trees


def log_tree_sums(net: Network, edge_weights: np.ndarray) -> np.ndarray:
    """``log sum_T prod_{e in T} y_e`` for each row ``y`` of ``edge_weights``."""
    y = np.atleast_2d(np.asarray(edge_weights, dtype=float))
    if net.n == 1:
        return np.zeros(len(y))
    i, j = net.edge_array.T
    lap = np.zeros((len(y), net.n, net.n))
    for k in range(net.n_edges):
        a, b = i[k], j[k]
        lap[:, a, a] += y[:, k]
        lap[:, b, b] += y[:, k]
        lap[:, a, b] -= y[:, k]
        lap[:, b, a] -= y[:, k]
    sign, logdet = np.linalg.slogdet(lap[:, 1:, 1:])
    return np.where(sign > 0, logdet, -np.inf)
