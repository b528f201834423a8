"""Exact simulation of the VRJP and the ERRW, with their time changes.

The VRJP ``Y`` jumps from ``i`` to ``j`` at rate ``W_ij L_j(t)`` where
``L_j(t) = phi_j + (time spent at j)``. Between jumps only ``L`` at the
current vertex moves, and no rate out of the current vertex depends on it,
so holding times are exactly exponential and the process is simulated event
by event without discretisation.

The Z-process runs on the clock ``D(t) = sum_i (L_i(t)^2 - phi_i^2)`` and has
local times ``ell = L^2 - phi^2``. Its limit field is estimated by

    U_i = 1/2 log((ell_i + phi_i^2) / (ell_{i0} + phi_{i0}^2)) = log(L_i / L_{i0}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from ._parallel import run_ordered
from .bridge import tilde_beta
from .graph import Network, coupling_matrix
from .magic import edge_weight_vector, path_counts

__all__ = [
    "VRJPState",
    "ZRecord",
    "ERRWState",
    "VRJPFields",
    "initial_vrjp_state",
    "vrjp_step",
    "time_change_d",
    "z_record",
    "estimate_u",
    "vrjp_limit_fields",
    "vrjp_jump_paths",
    "simulate_vrjp",
    "time_rescale_phi",
    "mixture_jump_chains",
    "initial_errw_state",
    "errw_step",
    "errw_path_probability_direct",
    "simulate_errw",
    "path_frequencies",
    "path_density_closed",
    "path_density_direct",
    "path_density_mixture",
]

DEFAULT_T_END = 1e4
CONVERGENCE_TOL = 0.01
MAX_DOUBLINGS = 4


def _phi_vector(net: Network, phi) -> np.ndarray:
    phi = np.ones(net.n) if phi is None else np.asarray(phi, dtype=float).reshape(-1)
    if phi.shape != (net.n,) or not np.all(np.isfinite(phi)) or np.any(phi <= 0):
        raise ValueError(f"phi must be a positive vector of length {net.n}")
    return phi


# ---------------------------------------------------------------- VRJP, one step at a time


@dataclass(frozen=True, eq=False)
class VRJPState:
    """Position, Y-time and local times ``L`` (``L >= phi``, ``sum(L - phi) == t``)."""

    current: int
    t: float
    L: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    jumps: int = 0


@dataclass(frozen=True, eq=False)
class ZRecord:
    """Local times ``ell`` of the Z-process and its clock ``t_z = sum(ell)``."""

    ell: np.ndarray
    t_z: float


def initial_vrjp_state(net: Network, phi=None, i0: int = 0) -> VRJPState:
    phi = _phi_vector(net, phi)
    if not 0 <= i0 < net.n:
        raise ValueError(f"start vertex {i0} outside the network")
    return VRJPState(int(i0), 0.0, phi.copy(), phi)


def _categorical(weights: np.ndarray, u: float) -> int:
    # first index whose running sum exceeds u * total, as in the kernels
    cum = 0.0
    target = u * float(np.sum(weights))
    for k, w in enumerate(weights):
        cum += w
        if cum > target:
            return k
    return len(weights) - 1


def vrjp_step(state: VRJPState, net: Network, rng: np.random.Generator) -> VRJPState:
    """Hold at the current vertex for an exponential time, then jump.

    The holding rate is ``sum_{j~i} W_ij L_j`` and the destination is chosen
    with probability proportional to ``W_ij L_j``.
    """
    indptr, nbr, wts, _ = net.csr
    i = state.current
    lo, hi = indptr[i], indptr[i + 1]
    if lo == hi:
        raise ValueError("isolated vertex")
    rates = wts[lo:hi] * state.L[nbr[lo:hi]]
    hold = -math.log(1.0 - rng.random()) / float(np.sum(rates))
    L = state.L.copy()
    L[i] += hold
    dest = int(nbr[lo + _categorical(rates, rng.random())])
    return VRJPState(dest, state.t + hold, L, state.phi, state.jumps + 1)


def time_change_d(state: VRJPState) -> float:
    """Z-time ``D(t) = sum_i (L_i^2 - phi_i^2)`` reached at Y-time ``t``."""
    return float(np.sum(state.L**2 - state.phi**2))


def z_record(state: VRJPState) -> ZRecord:
    ell = state.L**2 - state.phi**2
    return ZRecord(ell, float(np.sum(ell)))


def estimate_u(ell: np.ndarray, phi: np.ndarray, i0: int) -> np.ndarray:
    """Finite-time plug-in ``1/2 log((ell_i + phi_i^2) / (ell_{i0} + phi_{i0}^2))``.

    ``ell`` may hold one row per trajectory. The plug-in already converges to
    the mixing field; no further ``phi`` correction is applied.
    """
    ell = np.asarray(ell, dtype=float)
    phi = np.asarray(phi, dtype=float)
    lsq = np.log(ell + phi**2)
    u = 0.5 * (lsq - lsq[..., i0:i0 + 1])
    u[..., i0] = 0.0
    return u


# ---------------------------------------------------------------- VRJP, batched


@dataclass(frozen=True, eq=False)
class VRJPFields:
    """Outcome of :func:`vrjp_limit_fields`.

    ``u`` is the estimate at ``t_end`` and ``u_half`` the one at ``t_end / 2``;
    ``median_gap`` is the per-coordinate median of ``|u - u_half|``.
    """

    u: np.ndarray = field(repr=False)
    u_half: np.ndarray = field(repr=False)
    t_end: float
    converged: bool
    median_gap: np.ndarray
    jumps: np.ndarray = field(repr=False)


class _Batch:
    """Resumable state of a block of trajectories (picklable)."""

    def __init__(self, phi: np.ndarray, i0: int, seeds: Sequence[np.random.SeedSequence]):
        count = len(seeds)
        self.loc = np.tile(phi, (count, 1))
        self.current = np.full(count, i0, dtype=np.int64)
        self.ztime = np.zeros(count)
        self.jumps = np.zeros(count, dtype=np.int64)
        self.generators = [np.random.Generator(np.random.PCG64(s)) for s in seeds]


def _advance(csr, phi: np.ndarray, batch: _Batch, t_target: float) -> _Batch:
    indptr, nbr, wts, _ = csr
    _backend.kernels.vrjp_advance(
        indptr, nbr, wts, phi, batch.loc, batch.current, batch.ztime, batch.jumps, float(t_target), batch.generators
    )
    return batch


def vrjp_limit_fields(
    net: Network,
    phi,
    i0: int,
    n_traj: int,
    seed: int | np.random.SeedSequence,
    *,
    t_end: float = DEFAULT_T_END,
    jobs: int = 1,
    chunk: int = 1024,
    tol: float = CONVERGENCE_TOL,
    max_doublings: int = MAX_DOUBLINGS,
) -> VRJPFields:
    """Estimate the limit field of ``n_traj`` independent VRJPs started at ``i0``.

    Each trajectory owns a generator spawned from ``seed``, so results do not
    depend on ``jobs`` or on ``chunk``-level scheduling. Trajectories are run
    to Z-time ``t_end / 2`` and ``t_end``; while the median gap between the
    two estimates exceeds ``tol`` in some coordinate, all trajectories are
    resumed to twice the horizon (at most ``max_doublings`` times).
    """
    phi = _phi_vector(net, phi)
    if t_end <= 0 or n_traj < 1:
        raise ValueError("need t_end > 0 and at least one trajectory")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # one spawned child per trajectory, grouped in blocks
    per_traj = ss.spawn(n_traj)
    batches = [_Batch(phi, i0, per_traj[k:k + chunk]) for k in range(0, n_traj, chunk)]
    csr = net.csr

    def run_to(target: float) -> np.ndarray:
        nonlocal batches
        batches = run_ordered(_advance, [(csr, phi, b, target) for b in batches], jobs)
        loc = np.concatenate([b.loc for b in batches])
        return estimate_u(loc**2 - phi**2, phi, i0)

    horizon = float(t_end)
    u_prev = run_to(horizon / 2)
    for attempt in range(max_doublings + 1):
        u = run_to(horizon)
        gap = np.median(np.abs(u - u_prev), axis=0)
        converged = bool(np.all(gap < tol))
        if converged or attempt == max_doublings:
            break
        u_prev = u
        horizon *= 2
    jumps = np.concatenate([b.jumps for b in batches])
    return VRJPFields(u, u_prev, horizon, converged, gap, jumps)


def vrjp_jump_paths(net: Network, phi, i0: int, n_traj: int, n_jumps: int, rng: np.random.Generator):
    """First ``n_jumps`` jumps of ``n_traj`` VRJPs (Y time scale).

    Returns ``(vertices, times)`` of shapes ``(n_traj, n_jumps + 1)`` and
    ``(n_traj, n_jumps)``; ``times[:, k]`` is the Y-time of jump ``k``.
    """
    phi = _phi_vector(net, phi)
    indptr, nbr, wts, _ = net.csr
    uniforms = rng.random((n_traj, n_jumps, 2))
    return _backend.kernels.vrjp_jumps(indptr, nbr, wts, phi, int(i0), uniforms)


def simulate_vrjp(
    net: Network, phi, i0: int, t_end: float, rng: np.random.Generator, *, snapshot_every: int = 0
) -> list[dict]:
    """Event log of one trajectory until its Z-clock passes ``t_end``.

    Each record holds the jump index, Y-time, Z-time and the vertex entered;
    with ``snapshot_every = k > 0`` every ``k``-th record also carries ``L``.
    """
    state = initial_vrjp_state(net, phi, i0)
    log = [{"step": 0, "y_time": 0.0, "z_time": 0.0, "vertex": state.current, "L": state.L.copy()}]
    while True:
        state = vrjp_step(state, net, rng)
        z = time_change_d(state)
        rec = {"step": state.jumps, "y_time": state.t, "z_time": z, "vertex": state.current}
        if snapshot_every and state.jumps % snapshot_every == 0:
            rec["L"] = state.L.copy()
        log.append(rec)
        if z >= t_end:
            return log


def time_rescale_phi(times: np.ndarray, vertices: np.ndarray, phi) -> np.ndarray:
    """Map Y-times of jumps to the clock ``A(s) = sum_i (L_i(s) / phi_i - 1)``.

    While the walk sits at ``i`` the new clock runs at speed ``1 / phi_i``.
    On that clock the walk is a VRJP with weights ``W_ij phi_i phi_j`` and
    unit initial local times.
    """
    times = np.asarray(times, dtype=float)
    vertices = np.asarray(vertices)
    phi = np.asarray(phi, dtype=float)
    holds = np.diff(times, axis=-1, prepend=0.0)
    return np.cumsum(holds / phi[vertices[..., :-1]], axis=-1)


def mixture_jump_chains(net: Network, u: np.ndarray, i0: int, depth: int, rng: np.random.Generator) -> np.ndarray:
    """Jump chains of the Markov processes with rates ``1/2 W_ij exp(u_j - u_i)``.

    One chain per row of ``u``; the step ``i -> j`` has probability
    proportional to ``W_ij exp(u_j)``.
    """
    u = np.atleast_2d(u)
    p = coupling_matrix(net)
    cum = np.cumsum(p[None] * np.exp(u)[:, None, :], axis=-1)
    rows = np.arange(len(u))
    paths = np.empty((len(u), depth + 1), dtype=np.int64)
    paths[:, 0] = i0
    draws = rng.random((len(u), depth))
    for t in range(depth):
        c = cum[rows, paths[:, t]]
        target = draws[:, t] * c[:, -1]
        paths[:, t + 1] = np.minimum(np.sum(c <= target[:, None], axis=1), net.n - 1)
    return paths


# ---------------------------------------------------------------- ERRW


@dataclass(frozen=True, eq=False)
class ERRWState:
    """Position, step count and edge weights ``a_e + crossings``."""

    current: int
    step: int
    z_edges: np.ndarray = field(repr=False)


def initial_errw_state(net: Network, a, i0: int) -> ERRWState:
    return ERRWState(int(i0), 0, edge_weight_vector(net, a).copy())


def errw_step(state: ERRWState, net: Network, rng: np.random.Generator) -> ERRWState:
    """Cross an edge chosen proportionally to its current weight."""
    indptr, nbr, _, eid = net.csr
    lo, hi = indptr[state.current], indptr[state.current + 1]
    k = lo + _categorical(state.z_edges[eid[lo:hi]], rng.random())
    z = state.z_edges.copy()
    z[eid[k]] += 1.0
    return ERRWState(int(nbr[k]), state.step + 1, z)


def errw_path_probability_direct(net: Network, path: Sequence[int], a) -> float:
    """Product of the one-step reinforced transition probabilities along ``path``."""
    path_counts(net, path)  # validates
    z = edge_weight_vector(net, a).copy()
    indptr, _, _, eid = net.csr
    prob = 1.0
    for s, t in zip(path[:-1], path[1:]):
        e = net.edge_id(s, t)
        prob *= z[e] / np.sum(z[eid[indptr[s]:indptr[s + 1]]])
        z[e] += 1.0
    return float(prob)


def simulate_errw(net: Network, a, i0: int, n_walks: int, depth: int, rng: np.random.Generator) -> np.ndarray:
    """``n_walks`` independent ERRW paths of ``depth`` steps, shape ``(n_walks, depth + 1)``."""
    a = edge_weight_vector(net, a)
    indptr, nbr, _, eid = net.csr
    return _backend.kernels.errw_walks(indptr, nbr, eid, a, int(i0), rng.random((n_walks, depth)))


def path_frequencies(paths: np.ndarray) -> dict[tuple[int, ...], int]:
    """Counts of each distinct row of ``paths``."""
    uniq, counts = np.unique(np.asarray(paths), axis=0, return_counts=True)
    return {tuple(int(v) for v in row): int(c) for row, c in zip(uniq, counts)}


# ---------------------------------------------------------------- path densities of the Z-process


def _check_path(net: Network, path: Sequence[int]) -> list[int]:
    path = [int(v) for v in path]
    path_counts(net, path)
    return path


def path_density_closed(net: Network, phi, path: Sequence[int], ell: np.ndarray) -> float:
    """Density of the Z-process following ``path`` with final local times ``ell``.

    With ``Lambda = phi^2 + ell`` the density (against the jump times) is

        prod_k W_{x_{k-1} x_k} / 2 * prod_{i != x_n} Lambda_i^{-1/2} * prod_{i != x_0} phi_i
            * exp(-sum_E W_ij (sqrt(Lambda_i Lambda_j) - phi_i phi_j)).
    """
    phi = _phi_vector(net, phi)
    path = _check_path(net, path)
    ell = np.asarray(ell, dtype=float)
    lam = phi**2 + ell
    i, j = net.edge_array.T
    log_p = sum(np.log(0.5 * net.weights[net.edge_id(s, t)]) for s, t in zip(path[:-1], path[1:]))
    log_p -= 0.5 * np.sum(np.log(np.delete(lam, path[-1])))
    log_p += np.sum(np.log(np.delete(phi, path[0])))
    log_p -= np.sum(net.weights * (np.sqrt(lam[i] * lam[j]) - phi[i] * phi[j]))
    return float(np.exp(log_p))


def path_density_direct(net: Network, phi, path: Sequence[int], jump_times: Sequence[float], t: float) -> tuple[float, np.ndarray]:
    """Same density built from the Z-rates ``1/2 W_ij sqrt(Lambda_j / Lambda_i)`` segment by segment.

    ``jump_times`` are the Z-times of the jumps, ``t`` the observation time.
    Returns ``(density, ell)``.
    """
    phi = _phi_vector(net, phi)
    path = _check_path(net, path)
    times = [0.0, *map(float, jump_times), float(t)]
    if len(times) != len(path) + 1 or np.any(np.diff(times) < 0):
        raise ValueError("need one non-decreasing jump time per step, ending before t")
    indptr, nbr, wts, _ = net.csr
    lam = phi**2
    log_p = 0.0
    for k, v in enumerate(path):
        lo, hi = indptr[v], indptr[v + 1]
        start, stop = lam[v], lam[v] + times[k + 1] - times[k]
        # integral of sum_j W_vj sqrt(Lambda_j) / (2 sqrt(Lambda_v)) over the visit
        log_p -= np.sum(wts[lo:hi] * np.sqrt(lam[nbr[lo:hi]])) * (np.sqrt(stop) - np.sqrt(start))
        lam[v] = stop
        if k + 1 < len(path):
            w = path[k + 1]
            log_p += np.log(0.5 * wts[lo:hi][nbr[lo:hi] == w][0] * np.sqrt(lam[w] / lam[v]))
    return float(np.exp(log_p)), lam - phi**2


def path_density_mixture(net: Network, path: Sequence[int], ell: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of the mixed Markov density.

    Given ``u``, the Z-process is Markov with rates ``1/2 W_ij exp(u_j - u_i)``
    and leaves ``i`` at total rate ``tilde beta_i(u)``, so its path density is
    ``prod_k W / 2 * exp(u_{x_n} - u_{x_0} - <tilde beta(u), ell>)``. Rows of
    ``u`` are draws of the mixing field rooted at ``path[0]``.
    """
    path = _check_path(net, path)
    u = np.atleast_2d(u)
    ell = np.asarray(ell, dtype=float)
    log_w = sum(np.log(0.5 * net.weights[net.edge_id(s, t)]) for s, t in zip(path[:-1], path[1:]))
    vals = np.exp(log_w + u[:, path[-1]] - u[:, path[0]] - tilde_beta(net, u) @ ell)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))
