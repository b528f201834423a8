"""The mixing measure of edge-reinforced random walk (the "magic formula").

For initial edge weights ``a`` and start ``i0`` the ERRW is a mixture of
reversible Markov chains with conductances ``y`` normalised by ``y[e0] = 1``;
the mixing density with respect to ``prod_{e != e0} dy_e / y_e`` is

    C(a, i0) sqrt(y_{i0}) prod_e y_e^{a_e} / prod_i y_i^{(a_i + 1) / 2} sqrt(D(y))

with ``a_i``, ``y_i`` the sums over edges at ``i`` and ``D`` the spanning-tree
sum. The same law arises from the VRJP field with gamma(a_e) conductances,
which is how :func:`sample_magic_point` draws from it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .bridge import sample_u_mixed
from .graph import Network, log_tree_sums

__all__ = [
    "edge_weight_vector",
    "vertex_sums",
    "path_counts",
    "log_constant_c",
    "log_density_magic",
    "path_probability_closed",
    "markov_path_probability",
    "sample_mixed_w",
    "sample_magic_point",
]


def edge_weight_vector(net: Network, a: Sequence[float] | float) -> np.ndarray:
    """Validated per-edge initial weights; a scalar is used for every edge."""
    a = np.asarray(a, dtype=float)
    a = np.full(net.n_edges, float(a)) if a.ndim == 0 else a.reshape(-1)
    if a.shape != (net.n_edges,):
        raise ValueError(f"need one initial weight per edge ({net.n_edges})")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ValueError("initial edge weights must be strictly positive")
    return a


def vertex_sums(net: Network, edge_values: np.ndarray) -> np.ndarray:
    """``v_i = sum_{e ni i} v_e``, vectorised over leading axes."""
    edge_values = np.asarray(edge_values, dtype=float)
    out = np.zeros(edge_values.shape[:-1] + (net.n,))
    for k, (i, j) in enumerate(net.edges):
        out[..., i] += edge_values[..., k]
        out[..., j] += edge_values[..., k]
    return out


def path_counts(net: Network, path: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Crossings per edge and departures per vertex along ``path``.

    Raises ``ValueError`` if a step does not follow an edge.
    """
    path = [int(v) for v in path]
    if not path:
        raise ValueError("empty path")
    n_e = np.zeros(net.n_edges, dtype=np.int64)
    n_i = np.zeros(net.n, dtype=np.int64)
    for v in path:
        if not 0 <= v < net.n:
            raise ValueError(f"vertex {v} outside the network")
    for s, t in zip(path[:-1], path[1:]):
        try:
            n_e[net.edge_id(s, t)] += 1
        except KeyError:
            raise ValueError(f"step {s}->{t} is not along an edge") from None
        n_i[s] += 1
    return n_e, n_i


def log_constant_c(net: Network, a: Sequence[float], i0: int) -> float:
    """``log C(a, i0)``.

    ``C = 2^{1 - |V| + sum a_e} / sqrt(pi)^{|V| - 1}
    * prod_i Gamma((a_i + 1 - 1{i = i0}) / 2) / prod_e Gamma(a_e)``.
    """
    a = edge_weight_vector(net, a)
    av = vertex_sums(net, a)
    shift = np.zeros(net.n)
    shift[i0] = 1.0
    return float(
        (1 - net.n + a.sum()) * np.log(2.0)
        - 0.5 * (net.n - 1) * np.log(np.pi)
        + gammaln(0.5 * (av + 1.0 - shift)).sum()
        - gammaln(a).sum()
    )


def log_density_magic(net: Network, y: np.ndarray, a: Sequence[float], i0: int) -> np.ndarray | float:
    """Log mixing density at conductances ``y`` (rows allowed).

    The density is 0-homogeneous in ``y``, so any normalisation of ``y``
    (``y[e0] = 1`` with ``e0`` at ``i0`` in the usual statement) gives the
    density on the corresponding slice, against ``prod_{e != e0} dy_e / y_e``.
    """
    a = edge_weight_vector(net, a)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[-1] != net.n_edges or np.any(y <= 0):
        raise ValueError("y must be a positive vector with one entry per edge")
    yv = vertex_sums(net, y)
    av = vertex_sums(net, a)
    out = (
        log_constant_c(net, a, i0)
        + 0.5 * np.log(yv[:, i0])
        + np.log(y) @ a
        - np.log(yv) @ (0.5 * (av + 1.0))
        + 0.5 * log_tree_sums(net, y)
    )
    return float(out[0]) if single else out


def path_probability_closed(net: Network, path: Sequence[int], a: Sequence[float]) -> float:
    """Probability that the ERRW started at ``path[0]`` follows ``path``.

    Integrating the Markov path probability against the mixing density
    shifts ``Gamma(a_e)`` to ``Gamma(a_e + N_e)`` and
    ``Gamma((a_i + 1 - 1{i = i0}) / 2)`` by ``N_i``, which leaves
    ``prod_e (a_e)_{N_e}`` over ``prod_{k < N_{i0}} (a_{i0} + 2k)
    * prod_{i != i0} prod_{k < N_i} (a_i + 1 + 2k)``.
    """
    a = edge_weight_vector(net, a)
    n_e, n_i = path_counts(net, path)
    i0 = int(path[0])
    av = vertex_sums(net, a)
    log_p = 0.0
    for e in range(net.n_edges):
        log_p += np.sum(np.log(a[e] + np.arange(n_e[e])))
    for i in range(net.n):
        base = av[i] if i == i0 else av[i] + 1.0
        log_p -= np.sum(np.log(base + 2.0 * np.arange(n_i[i])))
    return float(np.exp(log_p))


def markov_path_probability(net: Network, y: np.ndarray, path: Sequence[int]) -> np.ndarray | float:
    """``prod_e y_e^{N_e} / prod_i y_i^{N_i}`` for the reversible chain with conductances ``y``."""
    n_e, n_i = path_counts(net, path)
    y = np.asarray(y, dtype=float)
    yv = vertex_sums(net, y)
    out = np.exp(np.log(y) @ n_e - np.log(yv) @ n_i)
    return float(out) if np.ndim(out) == 0 else out


def sample_mixed_w(a: Sequence[float], rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Independent gamma(shape ``a_e``, rate 1) conductances."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("initial edge weights must be strictly positive")
    shape = a.shape if size is None else (size,) + a.shape
    return rng.gamma(np.broadcast_to(a, shape))


def sample_magic_point(
    net: Network, a: Sequence[float], i0: int, e0: int, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draws ``y`` with ``y[e0] = 1`` from the ERRW mixing measure.

    ``W ~ gamma(a)`` per edge, then ``(u, gamma)`` from the VRJP field with
    conductances ``W`` and ``phi = 1``; ``y_e = W_e exp(u_i + u_j)`` rescaled
    so that ``y[e0] = 1``.
    """
    a = edge_weight_vector(net, a)
    count = 1 if size is None else int(size)
    w = sample_mixed_w(a, rng, count)
    u, _ = sample_u_mixed(net, w, i0, rng)
    i, j = net.edge_array.T
    log_y = np.log(w) + u[:, i] + u[:, j]
    y = np.exp(log_y - log_y[:, e0:e0 + 1])
    y[:, e0] = 1.0
    return y[0] if size is None else y
