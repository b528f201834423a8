import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betafield.graph import (
    Network,
    coupling_matrix,
    distance_matrix,
    enumerate_spanning_trees,
    graph_distance,
    log_spanning_tree_polynomial,
    log_tree_sums,
    spanning_tree_polynomial,
)
from betafield.verify.instances import complete_graph

from conftest import networks


def brute_force_d(net, u):
    y = net.weights * np.exp(u[net.edge_array[:, 0]] + u[net.edge_array[:, 1]])
    return sum(math.prod(y[list(t)]) for t in enumerate_spanning_trees(net))


# ---- coupling matrix


def test_coupling_single_edge(edge):
    np.testing.assert_array_equal(coupling_matrix(edge), [[0, 1], [1, 0]])


def test_coupling_triangle_weight_two():
    p = coupling_matrix(complete_graph(3, 2.0))
    np.testing.assert_array_equal(p, 2.0 * (1 - np.eye(3)))


def test_coupling_non_edge_is_zero():
    net = Network.from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 3.0)])
    p = coupling_matrix(net)
    assert p[0, 2] == 0.0 and p[1, 2] == 3.0


# ---- distances


def test_distance_path(path3):
    assert graph_distance(path3, 0, 2) == 2


def test_distance_identity(triangle):
    assert all(graph_distance(triangle, i, i) == 0 for i in range(3))


def test_distance_triangle(triangle):
    assert graph_distance(triangle, 0, 2) == 1


# ---- spanning-tree polynomial


def test_d_triangle_unit(triangle):
    assert spanning_tree_polynomial(triangle, np.zeros(3)) == pytest.approx(3.0, rel=1e-14)


def test_d_single_edge():
    net = Network.from_weighted_edges(2, [(0, 1, 2.5)])
    u = np.array([0.3, -0.7])
    assert spanning_tree_polynomial(net, u) == pytest.approx(2.5 * math.exp(-0.4), rel=1e-14)


def test_d_triangle_shifted(triangle):
    assert spanning_tree_polynomial(triangle, np.array([math.log(2), 0, 0])) == pytest.approx(8.0, rel=1e-14)


def test_enumeration_counts(edge, triangle):
    assert enumerate_spanning_trees(edge) == [(0,)]
    assert len(enumerate_spanning_trees(triangle)) == 3
    assert len(enumerate_spanning_trees(complete_graph(4))) == 16


def test_enumeration_guard():
    with pytest.raises(ValueError):
        enumerate_spanning_trees(complete_graph(11))


def test_single_vertex_has_unit_d():
    assert spanning_tree_polynomial(Network(1, (), [])) == 1.0


@settings(max_examples=60, deadline=None)
@given(networks(min_n=2, max_n=7), st.integers(0, 2**32 - 1))
def test_matrix_tree_matches_enumeration(net, seed):
    u = np.random.default_rng(seed).normal(size=net.n)
    assert spanning_tree_polynomial(net, u) == pytest.approx(brute_force_d(net, u), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(networks(min_n=2, max_n=6), st.integers(0, 2**32 - 1))
def test_deleted_vertex_is_irrelevant(net, seed):
    u = np.random.default_rng(seed).normal(size=net.n)
    vals = [log_spanning_tree_polynomial(net, u, deleted=k) for k in range(net.n)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-11, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(networks(min_n=2, max_n=6), st.integers(0, 2**32 - 1))
def test_relabelling_invariance(net, seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=net.n)
    perm = rng.permutation(net.n)
    u_perm = np.empty(net.n)
    u_perm[perm] = u
    assert spanning_tree_polynomial(net.permuted(perm), u_perm) == pytest.approx(spanning_tree_polynomial(net, u), rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(networks(min_n=2, max_n=6), st.floats(-2.0, 2.0))
def test_constant_shift_scaling(net, c):
    u = np.linspace(-1, 1, net.n)
    lhs = log_spanning_tree_polynomial(net, u + c)
    rhs = 2 * (net.n - 1) * c + log_spanning_tree_polynomial(net, u)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_log_tree_sums_batched(triangle, rng):
    y = rng.uniform(0.1, 3.0, (5, 3))
    expected = [math.log(r[0] * r[1] + r[1] * r[2] + r[0] * r[2]) for r in y]
    np.testing.assert_allclose(log_tree_sums(triangle, y), expected, rtol=1e-13)


# ---- construction and I/O


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 0, 1.0)],  # self-loop
        [(0, 1, 1.0), (1, 0, 2.0)],  # duplicate
        [(0, 1, -1.0)],  # non-positive weight
        [(0, 5, 1.0)],  # out of range
    ],
)
def test_invalid_networks(edges):
    with pytest.raises(ValueError):
        Network.from_weighted_edges(2, edges)


def test_disconnected_rejected():
    with pytest.raises(ValueError, match="disconnected"):
        Network.from_weighted_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])


def test_json_round_trip(tmp_path, triangle):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(triangle.to_dict()))
    loaded = Network.load(path)
    assert loaded.edges == triangle.edges
    np.testing.assert_array_equal(loaded.weights, triangle.weights)


def test_malformed_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text("{not json")
    with pytest.raises(ValueError):
        Network.load(path)
    path.write_text('{"edges": []}')
    with pytest.raises(ValueError):
        Network.load(path)


def test_from_matrix(triangle):
    net = Network.from_matrix(coupling_matrix(triangle))
    assert set(net.edges) == set(triangle.edges)
    np.testing.assert_array_equal(coupling_matrix(net), coupling_matrix(triangle))


def test_distance_matrix_symmetric(path3):
    d = distance_matrix(path3)
    np.testing.assert_array_equal(d, d.T)
    np.testing.assert_array_equal(d[0], [0, 1, 2])


def test_csr_sorted_neighbours(triangle):
    indptr, nbr, wts, eid = triangle.csr
    np.testing.assert_array_equal(indptr, [0, 2, 4, 6])
    np.testing.assert_array_equal(nbr, [1, 2, 0, 2, 0, 1])
    for v in range(3):
        for p in range(indptr[v], indptr[v + 1]):
            assert triangle.edge_id(v, nbr[p]) == eid[p]
