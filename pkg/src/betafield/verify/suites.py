"""The acceptance suites.

Each suite takes a :class:`SuiteContext` and returns a list of
:class:`TestReport`; a suite passes when all of its reports pass. Sample
sizes are the acceptance sizes multiplied by ``ctx.scale`` (``scale < 1`` is
only meant for smoke runs).
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from ..bridge import (
    beta_from_u_gamma,
    certify,
    determinant_identity_check,
    fields_from_betas,
    jacobian_check,
    sample_u,
    sample_u_mixed,
)
from ..family import FamilyParams, laplace_transform, marginal_ig_params, sample_beta
from ..graph import Network, enumerate_spanning_trees, spanning_tree_polynomial
from ..magic import path_probability_closed, sample_mixed_w
from ..process import (
    errw_path_probability_direct,
    path_frequencies,
    simulate_errw,
    time_rescale_phi,
    vrjp_jump_paths,
    vrjp_limit_fields,
)
from .instances import cycle_graph, path_graph, random_network, random_weights
from .quadrature import magic_expectation, magic_mass, nu_mass, q_mass
from .stats import (
    TestReport,
    bonferroni,
    correlation_z,
    independence_scan,
    ks_test,
    ks_two_sample,
    mc_mean,
    residual_check,
    z_window,
)

__all__ = ["SuiteContext", "SUITES", "CRITERIA", "suite_seed"]

ALPHA = 0.01


@dataclass
class SuiteContext:
    master_seed: int
    name: str
    scale: float = 1.0
    jobs: int = 1

    def __post_init__(self) -> None:
        self.seed_sequence = suite_seed(self.master_seed, self.name)
        self.rng = np.random.default_rng(self.seed_sequence)
        self.label = f"{self.master_seed}:{zlib.crc32(self.name.encode())}"

    def size(self, full: int, floor: int = 1000) -> int:
        return max(floor, int(round(full * self.scale)))

    def report(self, fn: Callable[..., TestReport], *args, **kw) -> TestReport:
        return fn(*args, seed=self.label, **kw)


def suite_seed(master: int, name: str) -> np.random.SeedSequence:
    """Per-suite seed: ``SeedSequence([master, crc32(name)])``."""
    return np.random.SeedSequence([int(master), zlib.crc32(name.encode())])


def _runtime(ctx: SuiteContext, name: str, seconds: float, limit: float) -> TestReport:
    return residual_check(seconds, limit, name=name, seed=ctx.label)


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# ---------------------------------------------------------------- 1. mass of nu


def suite_nu_mass(ctx: SuiteContext) -> list[TestReport]:
    out = []
    for n in (2, 3):
        for k in range(5):
            net = random_network(ctx.rng, n, extra=0.5)
            params = FamilyParams(net, random_weights(ctx.rng, n))
            t0 = time.perf_counter()
            res = nu_mass(params, rtol=1e-6)
            dt = time.perf_counter() - t0
            out.append(
                ctx.report(residual_check, abs(res.value - 1.0), 1e-3, name=f"nu-mass[n={n},#{k}]", quad_error=res.error)
            )
            out.append(_runtime(ctx, f"nu-mass-runtime[n={n},#{k}]", dt, 60.0))
    return out


# ---------------------------------------------------------------- 2. Laplace transform


def suite_laplace(ctx: SuiteContext) -> list[TestReport]:
    out = []
    draws = ctx.size(1_000_000)
    for g in range(5):
        n = int(ctx.rng.integers(2, 5))
        net = random_network(ctx.rng, n)
        params = FamilyParams(net, random_weights(ctx.rng, n))
        t0 = time.perf_counter()
        beta = sample_beta(params, ctx.rng, draws)
        for k in range(5):
            lam = ctx.rng.uniform(0.0, 2.0, n)
            mean, se = mc_mean(np.exp(-beta @ lam))
            out.append(ctx.report(z_window, mean, se, laplace_transform(params, lam), name=f"laplace[g{g},l{k}]", n=draws))
        out.append(_runtime(ctx, f"laplace-runtime[g{g}]", time.perf_counter() - t0, 120.0))
    return out


# ---------------------------------------------------------------- 3. inverse-Gaussian marginals


def suite_marginals(ctx: SuiteContext) -> list[TestReport]:
    draws = ctx.size(100_000)
    cases = []
    for n in (3, 4, 5):
        net = random_network(ctx.rng, n)
        cases.append(FamilyParams(net, random_weights(ctx.rng, n)))
    m = sum(p.n for p in cases)
    thr = bonferroni(ALPHA, m)
    out = []
    for c, params in enumerate(cases):
        beta = sample_beta(params, ctx.rng, draws)
        for i in range(params.n):
            ig = marginal_ig_params(params, i).scipy()
            out.append(
                ctx.report(ks_test, 1.0 / (2.0 * beta[:, i] * params.theta[i]), ig.cdf, name=f"marginal[c{c},v{i}]", threshold=thr)
            )
    return out


# ---------------------------------------------------------------- 4. independence at distance >= 2


def suite_independence(ctx: SuiteContext) -> list[TestReport]:
    draws = ctx.size(100_000, floor=10_000)
    net = path_graph(5, random_weights(ctx.rng, 4))
    params = FamilyParams(net, random_weights(ctx.rng, 5))
    beta = sample_beta(params, ctx.rng, draws)
    far = [(i, j) for i in range(5) for j in range(i + 2, 5)]
    out = independence_scan(beta, far, name="independence", seed=ctx.label)
    adj = []
    for i in range(4):
        r, se = correlation_z(beta[:, i], beta[:, i + 1])
        adj.append(abs(r) / se)
    out.append(TestReport("independence-power[adjacent max |z|]", "minimum", max(adj), 4.0, max(adj), draws, ctx.label))
    return out


# ---------------------------------------------------------------- 5. round trip and certificate


def suite_round_trip(ctx: SuiteContext) -> list[TestReport]:
    count = ctx.size(1000, floor=100)
    worst_beta = worst_u = worst_gamma = 0.0
    cert_fail = 0
    for _ in range(count):
        n = int(ctx.rng.integers(2, 7))
        net = random_network(ctx.rng, n)
        i0 = int(ctx.rng.integers(n))
        # beta -> (u, gamma) -> beta
        beta = sample_beta(FamilyParams(net, random_weights(ctx.rng, n)), ctx.rng).beta
        u, gamma = fields_from_betas(net, beta, i0)
        back = beta_from_u_gamma(net, u[0], float(gamma[0]), i0)
        worst_beta = max(worst_beta, _rel(back, beta))
        cert_fail += not certify(net, u[0], float(gamma[0]), i0)
        # (u, gamma) -> beta -> (u, gamma)
        u0 = ctx.rng.normal(size=n)
        u0[i0] = 0.0
        g0 = float(ctx.rng.exponential())
        b = beta_from_u_gamma(net, u0, g0, i0)
        u1, g1 = fields_from_betas(net, b, i0)
        worst_u = max(worst_u, float(np.max(np.abs(u1[0] - u0))))
        worst_gamma = max(worst_gamma, abs(float(g1[0]) - g0) / g0)
        cert_fail += not certify(net, u0, g0, i0)
    return [
        ctx.report(residual_check, worst_beta, 1e-10, name="round-trip[beta]", n=count),
        ctx.report(residual_check, worst_u, 1e-10, name="round-trip[u]", n=count),
        ctx.report(residual_check, worst_gamma, 1e-10, name="round-trip[gamma]", n=count),
        ctx.report(residual_check, cert_fail, 1, name="round-trip[certificate failures]", n=2 * count),
    ]


# ---------------------------------------------------------------- 6. determinant identity


def suite_determinant(ctx: SuiteContext) -> list[TestReport]:
    count = ctx.size(1000, floor=100)
    worst = 0.0
    for _ in range(count):
        n = int(ctx.rng.integers(1, 7))
        net = random_network(ctx.rng, n)
        beta = sample_beta(FamilyParams(net, random_weights(ctx.rng, n)), ctx.rng).beta
        worst = max(worst, determinant_identity_check(net, beta, int(ctx.rng.integers(n))))
    return [ctx.report(residual_check, worst, 1e-9, name="determinant-identity", n=count)]


# ---------------------------------------------------------------- 7. Jacobian


def suite_jacobian(ctx: SuiteContext) -> list[TestReport]:
    count = ctx.size(100, floor=20)
    worst = 0.0
    for _ in range(count):
        n = int(ctx.rng.integers(1, 6))
        net = random_network(ctx.rng, n)
        i0 = int(ctx.rng.integers(n))
        u = ctx.rng.normal(size=n)
        u[i0] = 0.0
        worst = max(worst, jacobian_check(net, u, float(ctx.rng.exponential()) + 0.05, i0))
    return [ctx.report(residual_check, worst, 1e-5, name="jacobian", n=count)]


# ---------------------------------------------------------------- 8. mass of Q


def suite_q_mass(ctx: SuiteContext) -> list[TestReport]:
    out = []
    for n, tol in ((2, 1e-4), (3, 1e-3)):
        for k in range(3):
            net = random_network(ctx.rng, n, extra=0.5)
            phi = random_weights(ctx.rng, n)
            i0 = int(ctx.rng.integers(n))
            res = q_mass(net, phi, i0)
            out.append(ctx.report(residual_check, abs(res.value - 1.0), tol, name=f"q-mass[n={n},#{k}]", quad_error=res.error))
    return out


# ---------------------------------------------------------------- 9. VRJP limit field vs beta-derived field


def _vrjp_cases(rng: np.random.Generator) -> list[tuple[str, Network, np.ndarray, int]]:
    tri = random_network(rng, 3, extra=1.0)
    cyc = cycle_graph(4, random_weights(rng, 4))
    star = Network(4, ((0, 1), (0, 2), (0, 3), (1, 2)), random_weights(rng, 4))
    return [
        ("triangle,phi=1", tri, np.ones(3), 0),
        ("4-cycle,phi random", cyc, rng.uniform(0.5, 2.0, 4), 0),
        ("paw,phi random", star, rng.uniform(0.5, 2.0, 4), 2),
    ]


def suite_vrjp_limit(ctx: SuiteContext) -> list[TestReport]:
    n_traj = ctx.size(10_000, floor=500)
    cases = _vrjp_cases(ctx.rng)
    m = sum(net.n - 1 for _, net, _, _ in cases)
    thr = bonferroni(ALPHA, m)
    out = []
    t0 = time.perf_counter()
    for c, (label, net, phi, i0) in enumerate(cases):
        seed = ctx.seed_sequence.spawn(1)[0]
        res = vrjp_limit_fields(net, phi, i0, n_traj, seed, jobs=ctx.jobs)
        u_ref, _ = sample_u(net, phi, i0, ctx.rng, 10 * n_traj)
        out.append(
            TestReport(
                f"vrjp-convergence[{label}]",
                "residual",
                float(np.max(res.median_gap)),
                0.01,
                res.t_end,
                n_traj,
                ctx.label,
                {"t_end": res.t_end},
            )
        )
        for j in range(net.n):
            if j != i0:
                out.append(ctx.report(ks_two_sample, res.u[:, j], u_ref[:, j], name=f"vrjp-u[{label},u{j}]", threshold=thr))
    out.append(_runtime(ctx, "vrjp-runtime[total]", time.perf_counter() - t0, 600.0))
    return out


# ---------------------------------------------------------------- 10. gamma component


def suite_gamma(ctx: SuiteContext) -> list[TestReport]:
    draws = ctx.size(100_000, floor=10_000)
    net = random_network(ctx.rng, 4)
    phi = random_weights(ctx.rng, 4)
    i0 = int(ctx.rng.integers(4))
    u, gamma = sample_u(net, phi, i0, ctx.rng, draws)
    law = stats.gamma(0.5, scale=1.0 / phi[i0] ** 2)
    out = [ctx.report(ks_test, gamma, law.cdf, name="gamma-law", threshold=ALPHA)]
    for j in range(net.n):
        if j != i0:
            r, se = correlation_z(gamma, u[:, j])
            out.append(ctx.report(z_window, r, se, 0.0, name=f"gamma-independence[u{j}]", n=draws))
    return out


# ---------------------------------------------------------------- 11. ERRW path probabilities


def _all_paths(net: Network, start: int, steps: int):
    paths = [[start]]
    for _ in range(steps):
        paths = [p + [int(v)] for p in paths for v in net.neighbours(p[-1])]
    return paths


def suite_errw_paths(ctx: SuiteContext) -> list[TestReport]:
    walks = ctx.size(1_000_000)
    graphs = [("triangle", cycle_graph(3)), ("4-cycle", cycle_graph(4))]
    out = []
    for label, net in graphs:
        a = ctx.rng.uniform(0.5, 3.0, net.n_edges)
        worst, count = 0.0, 0
        for start in range(net.n):
            for steps in range(1, 7):
                for p in _all_paths(net, start, steps):
                    worst = max(worst, _rel(path_probability_closed(net, p, a), errw_path_probability_direct(net, p, a)))
                    count += 1
        out.append(ctx.report(residual_check, worst, 1e-12, name=f"errw-closed-vs-direct[{label}]", n=count))
        freq = path_frequencies(simulate_errw(net, a, 0, walks, 4, ctx.rng))
        for p in _all_paths(net, 0, 4):
            prob = path_probability_closed(net, p, a)
            se = math.sqrt(prob * (1 - prob) / walks)
            est = freq.get(tuple(p), 0) / walks
            out.append(ctx.report(z_window, est, se, prob, name=f"errw-frequency[{label},{''.join(map(str, p))}]", n=walks))
    return out


# ---------------------------------------------------------------- 12. mass of the magic measure


def suite_magic_mass(ctx: SuiteContext) -> list[TestReport]:
    tri = cycle_graph(3)
    out = []
    for label, a, i0, e0 in (("a=1", np.ones(3), 0, 0), ("a random", ctx.rng.uniform(0.3, 3.0, 3), 1, 2)):
        t0 = time.perf_counter()
        res = magic_mass(tri, a, i0, e0)
        dt = time.perf_counter() - t0
        out.append(ctx.report(residual_check, abs(res.value - 1.0), 1e-3, name=f"magic-mass[{label}]", quad_error=res.error))
        out.append(_runtime(ctx, f"magic-mass-runtime[{label}]", dt, 120.0))
    return out


# ---------------------------------------------------------------- 13. gamma-mixed VRJP vs magic measure


def zero_homogeneous_statistics(y: np.ndarray) -> np.ndarray:
    """Five bounded statistics of triangle conductances invariant under ``y -> c y``."""
    y0, y1, y2 = y[:, 0], y[:, 1], y[:, 2]
    s = y0 + y1 + y2
    return np.column_stack(
        [
            y0 / s,
            y1 / s,
            y0 * y1 / (y0 + y1) ** 2,
            np.minimum(np.minimum(y0, y1), y2) / np.maximum(np.maximum(y0, y1), y2),
            y1**2 / (y1**2 + y2**2),
        ]
    )


def suite_magic_bridge(ctx: SuiteContext) -> list[TestReport]:
    draws = ctx.size(200_000, floor=10_000)
    tri = cycle_graph(3)
    i, j = tri.edge_array.T
    out = []
    for label, a, i0 in (("a=1", np.ones(3), 0), ("a random", ctx.rng.uniform(0.5, 3.0, 3), 1)):
        exact = magic_expectation(tri, a, i0, 0, zero_homogeneous_statistics).value
        other = magic_expectation(tri, a, i0, 2, zero_homogeneous_statistics).value
        out.append(ctx.report(residual_check, float(np.max(np.abs(exact - other))), 1e-6, name=f"magic-e0-invariance[{label}]"))
        w = sample_mixed_w(a, ctx.rng, draws)
        u, _ = sample_u_mixed(tri, w, i0, ctx.rng)
        vals = zero_homogeneous_statistics(w * np.exp(u[:, i] + u[:, j]))
        for k in range(vals.shape[1]):
            mean, se = mc_mean(vals[:, k])
            out.append(ctx.report(z_window, mean, se, float(exact[k]), name=f"magic-bridge[{label},f{k}]", n=draws))
    return out


# ---------------------------------------------------------------- 14. time rescaling of phi


def suite_time_rescale(ctx: SuiteContext) -> list[TestReport]:
    draws = ctx.size(200_000, floor=10_000)
    out = []
    # single edge: first tilde holding time is Exp(W phi_0 phi_1)
    edge = path_graph(2)
    phi = np.array([2.0, 3.0])
    verts, times = vrjp_jump_paths(edge, phi, 0, draws, 1, ctx.rng)
    first = time_rescale_phi(times, verts, phi)[:, 0]
    out.append(ctx.report(ks_test, first, stats.expon(scale=1.0 / 6.0).cdf, name="rescale[edge,first hold ~ Exp(6)]"))
    # triangle with general phi vs the reduced process
    depth = 4
    net = random_network(ctx.rng, 3, extra=1.0)
    phi = ctx.rng.uniform(0.5, 2.0, 3)
    i, j = net.edge_array.T
    reduced = net.with_weights(net.weights * phi[i] * phi[j])
    v1, t1 = vrjp_jump_paths(net, phi, 0, draws, depth, ctx.rng)
    s1 = time_rescale_phi(t1, v1, phi)
    v2, s2 = vrjp_jump_paths(reduced, np.ones(3), 0, draws, depth, ctx.rng)
    thr = bonferroni(ALPHA, depth)
    for k in range(depth):
        out.append(ctx.report(ks_two_sample, s1[:, k], s2[:, k], name=f"rescale[triangle,jump {k} time]", threshold=thr))
    f1, f2 = path_frequencies(v1), path_frequencies(v2)
    for p in sorted(set(f1) | set(f2)):
        p1, p2 = f1.get(p, 0) / draws, f2.get(p, 0) / draws
        se = math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / draws)
        out.append(ctx.report(z_window, p1, se, p2, name=f"rescale[triangle,chain {''.join(map(str, p))}]", n=draws))
    return out


# ---------------------------------------------------------------- 15. matrix-tree vs enumeration


def suite_matrix_tree(ctx: SuiteContext) -> list[TestReport]:
    count = ctx.size(100, floor=20)
    worst = 0.0
    for _ in range(count):
        n = int(ctx.rng.integers(2, 8))
        net = random_network(ctx.rng, n, extra=float(ctx.rng.uniform(0.1, 0.8)))
        u = ctx.rng.normal(size=n)
        y = net.weights * np.exp(u[net.edge_array[:, 0]] + u[net.edge_array[:, 1]])
        brute = sum(math.prod(y[list(t)]) for t in enumerate_spanning_trees(net))
        worst = max(worst, _rel(spanning_tree_polynomial(net, u), brute))
    return [ctx.report(residual_check, worst, 1e-10, name="matrix-tree-vs-enumeration", n=count)]


SUITES: dict[str, Callable[[SuiteContext], list[TestReport]]] = {
    "nu-mass": suite_nu_mass,
    "laplace": suite_laplace,
    "marginals": suite_marginals,
    "independence": suite_independence,
    "round-trip": suite_round_trip,
    "determinant": suite_determinant,
    "jacobian": suite_jacobian,
    "q-mass": suite_q_mass,
    "vrjp-limit": suite_vrjp_limit,
    "gamma": suite_gamma,
    "errw-paths": suite_errw_paths,
    "magic-mass": suite_magic_mass,
    "magic-bridge": suite_magic_bridge,
    "time-rescale": suite_time_rescale,
    "matrix-tree": suite_matrix_tree,
}

# acceptance criterion number -> suite name
CRITERIA: dict[int, str] = {k + 1: name for k, name in enumerate(SUITES)}
