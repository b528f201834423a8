"""Deterministic quadrature oracles for the normalisation identities.

Integration is delegated to :func:`scipy.integrate.cubature` (adaptive
Genz-Malik / Gauss-Kronrod with support for infinite limits). Each wrapper
supplies a change of variables that keeps the integrand smooth:

* ``nu``: ``beta_k = beta_k^*(beta_{<k}) + s_k^2`` with ``s_k > 0``, where
  ``beta_k^*`` is where the ``k``-th leading minor of ``2 beta - P`` vanishes;
  the ``1 / sqrt|2 beta - P|`` singularity cancels against ``ds``.
* ``Q``: ``u_{-i0}`` over the whole space.
* magic measure: ``log y_e`` for ``e != e0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cubature

from ..bridge import log_density_q
from ..family import FamilyParams, log_density_nu
from ..graph import Network, coupling_matrix
from ..magic import log_density_magic

__all__ = [
    "QuadResult",
    "quadrature_mass",
    "quadrature_expectation",
    "nu_mass",
    "q_mass",
    "magic_mass",
    "magic_expectation",
    "MAX_DIMS",
]

MAX_DIMS = 3
_U_CLIP = 60.0
_LOGY_CLIP = 200.0


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float
    converged: bool
    evaluations: int


def _run(f, lower, upper, rtol: float, atol: float, max_subdivisions: int) -> QuadResult:
    if len(lower) > MAX_DIMS:
        raise ValueError(f"quadrature oracle limited to {MAX_DIMS} dimensions")
    res = cubature(f, lower, upper, rtol=rtol, atol=atol, max_subdivisions=max_subdivisions)
    value = res.estimate if np.ndim(res.estimate) else float(res.estimate)
    error = res.error if np.ndim(res.error) else float(res.error)
    return QuadResult(value, error, res.status == "converged", int(res.subdivisions))


def quadrature_mass(
    log_density: Callable[[np.ndarray], np.ndarray],
    lower,
    upper,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_subdivisions: int = 20_000,
) -> QuadResult:
    """``int exp(log_density(x)) dx`` over a box (limits may be infinite).

    ``log_density`` maps points of shape ``(m, d)`` to ``(m,)``. Failure to
    reach the tolerance is reported through ``converged`` with the achieved
    error bound in ``error``.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))

    def f(x):
        return np.exp(log_density(x))

    return _run(f, lower, upper, rtol, atol, max_subdivisions)


def quadrature_expectation(
    log_density: Callable[[np.ndarray], np.ndarray],
    statistic: Callable[[np.ndarray], np.ndarray],
    lower,
    upper,
    *,
    rtol: float = 1e-7,
    atol: float = 1e-10,
    max_subdivisions: int = 20_000,
) -> QuadResult:
    """``int statistic(x) exp(log_density(x)) dx``; ``statistic`` returns ``(m, k)``."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))

    def f(x):
        return statistic(x) * np.exp(log_density(x))[:, None]

    return _run(f, lower, upper, rtol, atol, max_subdivisions)


# ---------------------------------------------------------------- nu^{W, theta}


def _leading_dets(m: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.ones(m.shape[0])
    return np.linalg.det(m[:, :k, :k])


def _nu_log_integrand(params: FamilyParams):
    n = params.n
    p = coupling_matrix(params.net)

    def log_f(s):
        s = np.asarray(s, dtype=float)
        out = np.full(len(s), -np.inf)
        ok = np.all(np.isfinite(s * s), axis=1)
        s = s[ok]
        m = np.broadcast_to(-p, (len(s), n, n)).copy()
        beta = np.zeros_like(s)
        for k in range(n):
            # leading (k+1)-minor is affine in beta_k; find where it vanishes
            m[:, k, k] = 0.0
            det0 = _leading_dets(m, k + 1)
            beta[:, k] = -det0 / (2.0 * _leading_dets(m, k)) + s[:, k] ** 2
            m[:, k, k] = 2.0 * beta[:, k]
        good = np.all(np.isfinite(beta), axis=1)
        vals = np.full(len(s), -np.inf)
        if np.any(good):
            vals[good] = log_density_nu(params, beta[good]) + np.sum(np.log(2.0 * s[good]), axis=1)
        out[ok] = vals
        return out

    return log_f


def nu_mass(params: FamilyParams, **kw) -> QuadResult:
    """Total mass of ``nu^{W, theta}`` over ``D`` (``n <= 3``)."""
    n = params.n
    return quadrature_mass(_nu_log_integrand(params), np.zeros(n), np.full(n, np.inf), **kw)


# ---------------------------------------------------------------- Q^{W, phi}


def q_mass(net: Network, phi, i0: int, **kw) -> QuadResult:
    """Total mass of ``Q^{W, phi}_{i0}`` over ``u_{-i0}`` (``n <= 4``)."""
    phi = np.ones(net.n) if phi is None else np.asarray(phi, dtype=float)
    free = np.delete(np.arange(net.n), i0)

    def log_f(x):
        u = np.zeros((len(x), net.n))
        u[:, free] = np.clip(x, -_U_CLIP, _U_CLIP)
        return log_density_q(net, u, phi, i0)

    d = net.n - 1
    return quadrature_mass(log_f, np.full(d, -np.inf), np.full(d, np.inf), **kw)


# ---------------------------------------------------------------- magic measure


def _magic_point(net: Network, e0: int):
    free = np.delete(np.arange(net.n_edges), e0)

    def to_y(x):
        y = np.ones((len(x), net.n_edges))
        y[:, free] = np.exp(np.clip(x, -_LOGY_CLIP, _LOGY_CLIP))
        return y

    return to_y


def magic_mass(net: Network, a, i0: int, e0: int, **kw) -> QuadResult:
    """Total mass of the ERRW mixing measure on ``{y_{e0} = 1}`` (``|E| <= 4``)."""
    to_y = _magic_point(net, e0)
    d = net.n_edges - 1
    return quadrature_mass(
        lambda x: log_density_magic(net, to_y(x), a, i0), np.full(d, -np.inf), np.full(d, np.inf), **kw
    )


def magic_expectation(net: Network, a, i0: int, e0: int, statistic: Callable[[np.ndarray], np.ndarray], **kw) -> QuadResult:
    """Expectations of ``statistic(y)`` (shape ``(m, k)``) under the mixing measure."""
    to_y = _magic_point(net, e0)
    d = net.n_edges - 1
    return quadrature_expectation(
        lambda x: log_density_magic(net, to_y(x), a, i0),
        lambda x: statistic(to_y(x)),
        np.full(d, -np.inf),
        np.full(d, np.inf),
        **kw,
    )
