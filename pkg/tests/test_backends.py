import os
import subprocess
import sys

import numpy as np
import pytest

from betafield import _pykernels
from betafield.graph import coupling_matrix
from betafield.verify.instances import cycle_graph, random_network

compiled = pytest.importorskip("betafield._kernels", reason="compiled extension not built")


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sample_pivots_identical(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, 5, extra=0.6)
    w = np.ascontiguousarray(np.stack([coupling_matrix(net)] * 2))
    theta = rng.uniform(0.5, 2.0, (2, net.n))
    normals, uniforms = rng.standard_normal((2, net.n)), rng.random((2, net.n))
    assert same(compiled.sample_pivots(w, theta, normals, uniforms), _pykernels.sample_pivots(w, theta, normals, uniforms))


def test_errw_walks_identical():
    rng = np.random.default_rng(3)
    net = random_network(rng, 6)
    indptr, nbr, _, eid = net.csr
    a = rng.uniform(0.2, 2.0, net.n_edges)
    u = rng.random((500, 7))
    assert same(compiled.errw_walks(indptr, nbr, eid, a, 2, u), _pykernels.errw_walks(indptr, nbr, eid, a, 2, u))


def test_vrjp_jumps_identical():
    rng = np.random.default_rng(4)
    net = cycle_graph(5, 0.7)
    indptr, nbr, wts, _ = net.csr
    phi = rng.uniform(0.5, 1.5, net.n)
    u = rng.random((200, 12, 2))
    assert same(compiled.vrjp_jumps(indptr, nbr, wts, phi, 1, u), _pykernels.vrjp_jumps(indptr, nbr, wts, phi, 1, u))


def test_vrjp_advance_identical():
    net = cycle_graph(4)
    indptr, nbr, wts, _ = net.csr
    phi = np.array([1.0, 1.3, 0.8, 1.1])

    def run(k):
        n = 64
        loc = np.tile(phi, (n, 1))
        cur = np.zeros(n, dtype=np.int64)
        zt = np.zeros(n)
        jumps = np.zeros(n, dtype=np.int64)
        gens = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(9).spawn(n)]
        k.vrjp_advance(indptr, nbr, wts, phi, loc, cur, zt, jumps, 50.0, gens)
        k.vrjp_advance(indptr, nbr, wts, phi, loc, cur, zt, jumps, 120.0, gens)
        return loc, cur, zt, jumps

    assert same(run(compiled), run(_pykernels))


def _backend_name(env_value):
    env = dict(os.environ)
    env.pop("BETAFIELD_BACKEND", None)
    if env_value is not None:
        env["BETAFIELD_BACKEND"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "import betafield; print(betafield.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    return out.stdout.strip()


def test_backend_selection():
    assert _backend_name(None) == "cython"
    assert _backend_name("python") == "python"


def test_results_do_not_depend_on_backend(tmp_path):
    code = (
        "import numpy as np, betafield as b;"
        "net = b.Network.from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)]);"
        "x = b.sample_beta(b.FamilyParams(net), np.random.default_rng(5), 50);"
        "f = b.vrjp_limit_fields(net, None, 0, 20, 5, t_end=50.0);"
        "print(repr(x.tolist()), repr(f.u.tolist()))"
    )
    outs = []
    for value in (None, "python"):
        env = dict(os.environ)
        env.pop("BETAFIELD_BACKEND", None)
        if value:
            env["BETAFIELD_BACKEND"] = value
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]
