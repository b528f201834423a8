import math

import numpy as np
import pytest
from scipy import stats

from betafield.bridge import sample_u
from betafield.graph import Network
from betafield.process import (
    ERRWState,
    VRJPState,
    errw_path_probability_direct,
    errw_step,
    estimate_u,
    initial_errw_state,
    initial_vrjp_state,
    mixture_jump_chains,
    path_density_closed,
    path_density_direct,
    path_density_mixture,
    path_frequencies,
    simulate_errw,
    simulate_vrjp,
    time_change_d,
    time_rescale_phi,
    vrjp_jump_paths,
    vrjp_limit_fields,
    vrjp_step,
    z_record,
)
from betafield.verify.instances import cycle_graph, star_graph


# ---- single VRJP steps


def test_two_vertex_step(edge):
    rng = np.random.default_rng(1)
    holds = []
    for _ in range(20_000):
        s = vrjp_step(initial_vrjp_state(edge, None, 0), edge, rng)
        assert s.current == 1
        holds.append(s.t)
    assert stats.kstest(holds, stats.expon().cdf).pvalue > 1e-3


def test_state_invariants(triangle, rng):
    s = initial_vrjp_state(triangle, [1.0, 2.0, 0.5], 0)
    for _ in range(50):
        s = vrjp_step(s, triangle, rng)
        assert np.all(s.L >= s.phi)
        assert np.sum(s.L - s.phi) == pytest.approx(s.t, rel=1e-12)


def test_star_destination_uniform(rng):
    net = star_graph(4)
    counts = np.zeros(5)
    for _ in range(20_000):
        counts[vrjp_step(initial_vrjp_state(net, None, 0), net, rng).current] += 1
    assert counts[0] == 0
    assert stats.chisquare(counts[1:]).pvalue > 1e-3


def test_rates_after_sitting(triangle, rng):
    # after sitting at 0 for time s, the rate 1 -> 0 is W (1 + s)
    s = 0.7
    L = np.array([1.0 + s, 1.0, 1.0])
    state = VRJPState(1, s, L, np.ones(3))
    hits = sum(vrjp_step(state, triangle, rng).current == 0 for _ in range(40_000))
    p = (1 + s) / (2 + s)
    assert hits / 40_000 == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / 40_000))


def test_time_change_examples(rng):
    single = Network(1, (), [])
    s = initial_vrjp_state(single)
    assert time_change_d(s) == 0.0
    sat = VRJPState(0, 0.5, np.array([1.5]), np.ones(1))
    assert time_change_d(sat) == pytest.approx(1.5**2 - 1)
    net = cycle_graph(4)
    state, last = initial_vrjp_state(net, [1.0, 0.5, 2.0, 1.0]), 0.0
    for _ in range(100):
        state = vrjp_step(state, net, rng)
        d = time_change_d(state)
        assert d > last
        last = d
    rec = z_record(state)
    assert rec.t_z == pytest.approx(np.sum(rec.ell))


def test_initial_state_validation(edge):
    with pytest.raises(ValueError):
        initial_vrjp_state(edge, [1.0, 0.0])
    with pytest.raises(ValueError):
        initial_vrjp_state(edge, None, 5)


# ---- the limit estimator


def test_estimate_u_examples():
    np.testing.assert_array_equal(estimate_u([3.0, 3.0, 3.0], np.ones(3), 1), 0.0)
    ell = 5.0
    u = estimate_u([ell, ell], [2.0, 1.0], 0)
    assert u[0] == 0.0
    assert u[1] == pytest.approx(0.5 * math.log((ell + 1) / (ell + 4)), rel=1e-14)


def test_estimate_u_rows():
    ell = np.array([[1.0, 2.0], [4.0, 0.5]])
    u = estimate_u(ell, np.ones(2), 1)
    np.testing.assert_allclose(u[:, 0], 0.5 * np.log((ell[:, 0] + 1) / (ell[:, 1] + 1)))
    np.testing.assert_array_equal(u[:, 1], 0.0)


def test_limit_fields_two_vertices():
    out = vrjp_limit_fields(Network.from_weighted_edges(2, [(0, 1, 1.0)]), None, 0, 4000, 11, t_end=2000.0)
    assert out.converged
    e = np.exp(out.u[:, 1])
    assert e.mean() == pytest.approx(1.0, abs=4 * e.std() / math.sqrt(e.size))
    assert stats.kstest(e, stats.invgauss(1.0, scale=1.0).cdf).pvalue > 1e-3


def test_limit_fields_match_bridge(rng):
    net = cycle_graph(4)
    phi = np.array([1.0, 1.5, 0.7, 1.2])
    out = vrjp_limit_fields(net, phi, 0, 3000, 5, t_end=4000.0)
    u, _ = sample_u(net, phi, 0, rng, 20_000)
    for j in range(1, 4):
        assert stats.ks_2samp(out.u[:, j], u[:, j]).pvalue > 1e-3


def test_limit_fields_reproducible_and_job_invariant(triangle):
    a = vrjp_limit_fields(triangle, None, 0, 300, 3, t_end=200.0, chunk=64)
    b = vrjp_limit_fields(triangle, None, 0, 300, 3, t_end=200.0, chunk=64, jobs=2)
    c = vrjp_limit_fields(triangle, None, 0, 300, 3, t_end=200.0, chunk=300)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.u, c.u)
    assert a.t_end == b.t_end


def test_limit_fields_doubling_reported(triangle):
    out = vrjp_limit_fields(triangle, None, 0, 50, 1, t_end=1.0, tol=1e-9, max_doublings=2)
    assert not out.converged and out.t_end == 4.0


def test_simulate_vrjp_log(triangle, rng):
    log = simulate_vrjp(triangle, None, 0, 50.0, rng, snapshot_every=5)
    assert log[0]["vertex"] == 0 and log[-1]["z_time"] >= 50.0
    assert all(r["z_time"] < 50.0 for r in log[:-1])
    assert all("L" in r for r in log[5::5])


# ---- conditional Markov structure


def test_jump_chain_is_mixture_of_markov(rng):
    net = cycle_graph(4, 1.3)
    phi = np.ones(4)
    depth, n = 3, 60_000
    verts, _ = vrjp_jump_paths(net, phi, 0, n, depth, rng)
    u, _ = sample_u(net, phi, 0, rng, n)
    chains = mixture_jump_chains(net, u, 0, depth, rng)
    fa, fb = path_frequencies(verts), path_frequencies(chains)
    for key in set(fa) | set(fb):
        pa, pb = fa.get(key, 0) / n, fb.get(key, 0) / n
        se = math.sqrt((pa * (1 - pa) + pb * (1 - pb)) / n)
        assert abs(pa - pb) < 4 * se + 1e-12


# ---- time rescaling


def test_rescale_identity_for_unit_phi():
    times = np.array([0.3, 1.0, 2.5])
    np.testing.assert_allclose(time_rescale_phi(times, [0, 1, 0, 1], np.ones(2)), times)


def test_rescale_single_vertex():
    np.testing.assert_allclose(time_rescale_phi([3.0], [0, 0], [2.0]), [1.5])


def test_rescale_first_hold_law(edge, rng):
    verts, times = vrjp_jump_paths(edge, [2.0, 3.0], 0, 20_000, 1, rng)
    tilde = time_rescale_phi(times, verts, [2.0, 3.0])[:, 0]
    assert stats.kstest(tilde, stats.expon(scale=1 / 6).cdf).pvalue > 1e-3


# ---- ERRW


def test_errw_step_examples(triangle, rng):
    first = [errw_step(initial_errw_state(triangle, 1.0, 0), triangle, rng).current for _ in range(20_000)]
    assert np.mean(np.equal(first, 1)) == pytest.approx(0.5, abs=4 * math.sqrt(0.25 / 20_000))
    state = ERRWState(1, 1, np.array([2.0, 1.0, 1.0]))  # edge (0,1) crossed once
    back = [errw_step(state, triangle, rng).current for _ in range(20_000)]
    assert np.mean(np.equal(back, 0)) == pytest.approx(2 / 3, abs=4 * math.sqrt(2 / 9 / 20_000))


def test_errw_weights_grow_by_one(triangle, rng):
    s = initial_errw_state(triangle, [1.0, 0.5, 2.0], 0)
    total = s.z_edges.sum()
    for n in range(1, 30):
        prev = s.z_edges
        s = errw_step(s, triangle, rng)
        assert np.all(s.z_edges >= prev)
        assert s.z_edges.sum() == pytest.approx(total + n)


def test_errw_direct_examples(triangle, edge):
    assert errw_path_probability_direct(triangle, [0, 1], 1.0) == pytest.approx(0.5)
    assert errw_path_probability_direct(triangle, [0, 1, 0], 1.0) == pytest.approx(1 / 3)
    assert errw_path_probability_direct(edge, [0, 1, 0, 1], 0.37) == 1.0


def test_errw_direct_invalid(triangle, path3):
    with pytest.raises(ValueError):
        errw_path_probability_direct(path3, [0, 2], 1.0)


def test_errw_simulation_frequencies(triangle, rng):
    paths = simulate_errw(triangle, [1.0, 2.0, 0.5], 0, 50_000, 3, rng)
    freq = path_frequencies(paths)
    assert sum(freq.values()) == 50_000
    for key, count in freq.items():
        p = errw_path_probability_direct(triangle, key, [1.0, 2.0, 0.5])
        assert count / 50_000 == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / 50_000) + 1e-12)


# ---- path densities


def test_closed_density_equals_direct(rng):
    net = cycle_graph(4, 0.8)
    phi = np.array([1.0, 1.6, 0.6, 1.3])
    for path in ([0, 1, 2], [0, 1, 0], [0, 3, 2, 1], [0]):
        jumps = np.sort(rng.uniform(0, 3.0, len(path) - 1))
        direct, ell = path_density_direct(net, phi, path, jumps, 3.0)
        assert path_density_closed(net, phi, path, ell) == pytest.approx(direct, rel=1e-10)


def test_mixture_density(rng):
    net = cycle_graph(4)
    phi = np.array([1.0, 1.4, 0.8, 1.1])
    path = [0, 1, 2]
    _, ell = path_density_direct(net, phi, path, [0.4, 1.1], 1.8)
    u, _ = sample_u(net, phi, 0, rng, 400_000)
    mean, se = path_density_mixture(net, path, ell, u)
    assert mean == pytest.approx(path_density_closed(net, phi, path, ell), abs=4 * se)


def test_direct_density_validation(triangle):
    with pytest.raises(ValueError):
        path_density_direct(triangle, None, [0, 1], [2.0], 1.0)
