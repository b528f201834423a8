import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betafield.family import FamilyParams, sample_beta
from betafield.graph import Network
from betafield.linalg import (
    IndefiniteError,
    PotentialMatrix,
    certificate_ordering,
    gauss_elimination,
    green_column,
    is_positive_definite,
    log_determinant,
    lu_factorize,
    positive_stability_certificate,
)

from conftest import networks


def sampled_matrix(net, seed):
    rng = np.random.default_rng(seed)
    beta = sample_beta(FamilyParams(net, rng.uniform(0.5, 2.0, net.n)), rng).beta
    return PotentialMatrix(net, beta)


# ---- factorisation examples


def test_lu_two_vertices(edge):
    f = lu_factorize(PotentialMatrix(edge, [1.0, 1.0]))
    np.testing.assert_allclose(f.x, [2.0, 1.5], rtol=1e-15)
    assert f.H[0, 1] == 1.0


def test_lu_single_vertex():
    f = lu_factorize(PotentialMatrix(Network(1, (), []), [5.0]))
    np.testing.assert_array_equal(f.x, [10.0])


def test_lu_path(path3):
    f = lu_factorize(PotentialMatrix(path3, [1.0, 1.0, 1.0]), [0, 1, 2])
    np.testing.assert_allclose(f.x, [2.0, 1.5, 4.0 / 3.0], rtol=1e-15)
    assert f.H[0, 1] == 1.0 and f.H[1, 2] == 1.0 and f.H[0, 2] == 0.0


def test_lu_reports_failure_index(edge):
    f = lu_factorize(PotentialMatrix(edge, [0.4, 0.4]))
    assert not f.positive and f.failed_at == 1
    with pytest.raises(IndefiniteError) as info:
        log_determinant(f)
    assert info.value.index == 1


def test_lu_rejects_nonpositive_beta(edge):
    with pytest.raises(ValueError):
        lu_factorize(PotentialMatrix(edge, [1.0, 0.0]))


# ---- positive definiteness and determinants


@pytest.mark.parametrize("beta,expected", [([1.0, 1.0], True), ([0.4, 0.4], False)])
def test_is_positive_definite_examples(edge, beta, expected):
    assert is_positive_definite(PotentialMatrix(edge, beta)) is expected


def test_is_positive_definite_single():
    assert is_positive_definite(PotentialMatrix(Network(1, (), []), [0.1]))


def test_boundary_point_is_indefinite(triangle):
    # 2 beta - P is singular at beta = 1 on the unit triangle
    assert not is_positive_definite(PotentialMatrix(triangle, [1.0, 1.0, 1.0]))


def test_log_determinant_examples(edge, path3):
    assert log_determinant(lu_factorize(PotentialMatrix(edge, [1.0, 1.0]))) == pytest.approx(math.log(3))
    assert log_determinant(lu_factorize(PotentialMatrix(Network(1, (), []), [0.5]))) == pytest.approx(0.0, abs=1e-15)
    assert log_determinant(lu_factorize(PotentialMatrix(path3, [1.0, 1.0, 1.0]))) == pytest.approx(math.log(4))


# ---- Green function


def test_green_column_examples(edge):
    m = PotentialMatrix(edge, [1.0, 1.0])
    g = green_column(m, 0)
    np.testing.assert_allclose(g, [2 / 3, 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(m.matrix @ g, [1.0, 0.0], atol=1e-12)
    assert green_column(PotentialMatrix(Network(1, (), []), [1.0]), 0)[0] == 0.5


def test_green_column_indefinite(edge):
    with pytest.raises(IndefiniteError):
        green_column(PotentialMatrix(edge, [0.4, 0.4]), 0)


@settings(max_examples=50, deadline=None)
@given(networks(max_n=7), st.integers(0, 2**32 - 1))
def test_green_positive_and_exact(net, seed):
    m = sampled_matrix(net, seed)
    for i0 in range(net.n):
        g = green_column(m, i0)
        assert np.all(g > 0)
        np.testing.assert_allclose(g, np.linalg.inv(m.matrix)[:, i0], rtol=1e-8)


# ---- the recursion against independent oracles


@settings(max_examples=50, deadline=None)
@given(networks(max_n=7), st.integers(0, 2**32 - 1))
def test_elimination_reconstructs_matrix(net, seed):
    m = sampled_matrix(net, seed)
    ts, u = gauss_elimination(m)
    lower = np.eye(net.n)
    for t in ts:
        lower = lower @ np.linalg.inv(t)
    np.testing.assert_allclose(lower @ u, m.matrix, atol=1e-10)
    # the elimination pivots are the recursion pivots
    np.testing.assert_allclose(np.diag(u), lu_factorize(m).x, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(networks(max_n=7), st.integers(0, 2**32 - 1))
def test_pivot_minor_identity(net, seed):
    m = sampled_matrix(net, seed)
    x = lu_factorize(m).x
    a = m.matrix
    minors = [1.0] + [np.linalg.det(a[:k, :k]) for k in range(1, net.n + 1)]
    for i in range(net.n):
        assert x[i] * minors[i] == pytest.approx(minors[i + 1], rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(networks(max_n=6), st.integers(0, 2**32 - 1), st.floats(0.2, 1.5))
def test_verdict_ordering_invariant(net, seed, scale):
    rng = np.random.default_rng(seed)
    beta = scale * rng.uniform(0.2, 2.0, net.n)
    m = PotentialMatrix(net, beta)
    verdicts = {is_positive_definite(m, rng.permutation(net.n)) for _ in range(5)}
    assert verdicts == {bool(np.all(np.linalg.eigvalsh(m.matrix) > 1e-9))} or len(verdicts) == 1


def test_schrodinger_potential(triangle):
    m = PotentialMatrix(triangle, [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(m.schrodinger_potential, [2.0, 2.0, 2.0])


# ---- certificate


def test_certificate_examples(edge):
    assert positive_stability_certificate(PotentialMatrix(edge, [1.0, 1.0]), [1.0, 1.0], [0, 1])
    assert positive_stability_certificate(PotentialMatrix(edge, [1.0, 1.0]), [1.0, 1.0], [1, 0])
    assert not positive_stability_certificate(PotentialMatrix(edge, [0.4, 0.4]), [1.0, 1.0])


def test_certificate_ordering_ends_at_base(path3):
    np.testing.assert_array_equal(certificate_ordering(path3, 0), [2, 1, 0])
