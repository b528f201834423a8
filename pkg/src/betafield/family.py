"""The random potential family ``nu^{W, theta}`` and its exact sampler.

``nu^{W, theta}`` lives on ``D = {beta > 0 : 2 beta - P positive definite}``
with density

    (2/pi)^{n/2} exp(-<theta, beta> + sum_E W_ij sqrt(theta_i theta_j))
        * prod_i sqrt(theta_i) / sqrt(|2 beta - P|).

Sampling is exact. Under a vertex ordering, ``beta`` is a bijective image of
the pivots ``x`` of ``2 beta - P`` and the pivots can be drawn one at a time:
``x_m`` given ``x_1..x_{m-1}`` has density proportional to
``x^{-1/2} exp(-(theta_m x + R_m / x) / 2)`` with
``R_m = (sum_{j>m} H_mj sqrt(theta_j))**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from ._pykernels import _gig_half
from .graph import Network, as_ordering, coupling_matrix
from .linalg import PotentialMatrix, is_positive_definite

__all__ = [
    "FamilyParams",
    "BetaField",
    "IGParams",
    "sample_inverse_gaussian",
    "sample_gig_half",
    "sample_beta",
    "sample_beta_mixed",
    "log_density_nu",
    "laplace_transform",
    "marginal_ig_params",
    "rescale_theta",
]


@dataclass(frozen=True, eq=False)
class FamilyParams:
    net: Network
    theta: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        theta = np.ones(self.net.n) if self.theta is None else np.array(self.theta, dtype=float).reshape(-1)
        if theta.shape != (self.net.n,):
            raise ValueError(f"theta must have length {self.net.n}")
        if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
            raise ValueError("theta must be strictly positive")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.net.n

    def edge_coupling(self) -> np.ndarray:
        """``W_ij sqrt(theta_i theta_j)`` per edge."""
        i, j = self.net.edge_array.T
        return self.net.weights * np.sqrt(self.theta[i] * self.theta[j])


@dataclass(frozen=True, eq=False)
class BetaField:
    """A point of ``D`` together with its family parameters.

    ``ordering`` records how a sampled point was generated; it carries no
    information about the law.
    """

    params: FamilyParams
    beta: np.ndarray = field(repr=False)
    ordering: np.ndarray | None = None

    def __post_init__(self) -> None:
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if beta.shape != (self.params.n,):
            raise ValueError(f"beta must have length {self.params.n}")
        if not is_positive_definite(PotentialMatrix(self.params.net, beta)):
            raise ValueError("beta is outside D: 2 beta - P is not positive definite")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def net(self) -> Network:
        return self.params.net


@dataclass(frozen=True)
class IGParams:
    """Inverse Gaussian with mean ``mu`` and shape ``lam``."""

    mu: float
    lam: float

    def __post_init__(self) -> None:
        if not (self.mu > 0 and self.lam > 0):
            raise ValueError("inverse Gaussian parameters must be positive")

    @property
    def variance(self) -> float:
        return self.mu**3 / self.lam

    def scipy(self):
        from scipy import stats

        return stats.invgauss(self.mu / self.lam, scale=self.lam)


def sample_inverse_gaussian(p: IGParams, rng: np.random.Generator, size=None):
    """Inverse Gaussian draws by transformation with rejection.

    One normal and one uniform per draw (Michael, Schucany and Haas).
    """
    shape = () if size is None else size
    z = rng.standard_normal(shape)
    u = rng.random(shape)
    mu, lam = p.mu, p.lam
    r = mu * z * z / lam
    s = 1.0 + 0.5 * r + 0.5 * np.sqrt(r) * np.sqrt(r + 4.0)
    small = mu / s
    out = np.where(u * (mu + small) <= mu, small, mu * s)
    return float(out) if size is None else out


def sample_gig_half(a: float, b: float, rng: np.random.Generator, size=None):
    """Draws with density proportional to ``x^{-1/2} exp(-(a x + b / x) / 2)``.

    ``b = 0`` gives a gamma variable with shape 1/2 and rate ``a / 2``; for
    ``b > 0`` the draw is the reciprocal of ``IG(sqrt(a / b), a)``.
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    shape = () if size is None else size
    z = np.atleast_1d(rng.standard_normal(shape))
    u = np.atleast_1d(rng.random(shape))
    out = _gig_half(np.full(z.shape, float(a)), np.full(z.shape, float(b)), z, u)
    return float(out[0]) if size is None else out.reshape(shape)


def _draw(p_stack: np.ndarray, theta_stack: np.ndarray, order: np.ndarray, rng: np.random.Generator, size: int):
    n = len(order)
    w = np.ascontiguousarray(p_stack[:, order][:, :, order])
    th = np.ascontiguousarray(theta_stack[:, order])
    normals = rng.standard_normal((size, n))
    uniforms = rng.random((size, n))
    x, b = _backend.kernels.sample_pivots(w, th, normals, uniforms)
    beta = np.empty_like(b)
    beta[:, order] = b
    return x, beta


def sample_beta(
    params: FamilyParams,
    rng: np.random.Generator,
    size: int | None = None,
    *,
    ordering: Sequence[int] | None = None,
    return_pivots: bool = False,
):
    """Exact draws from ``nu^{W, theta}``.

    Returns a :class:`BetaField` when ``size`` is None, otherwise an array of
    shape ``(size, n)``. With ``return_pivots`` the pivots ``x`` (in ordered
    positions) are returned as well.
    """
    order = as_ordering(ordering, params.n)
    count = 1 if size is None else int(size)
    x, beta = _draw(coupling_matrix(params.net)[None], params.theta[None], order, rng, count)
    if size is None:
        out = BetaField(params, beta[0], order)
        return (out, x[0]) if return_pivots else out
    return (beta, x) if return_pivots else beta


def sample_beta_mixed(
    net: Network,
    edge_weights: np.ndarray,
    theta: np.ndarray,
    rng: np.random.Generator,
    *,
    ordering: Sequence[int] | None = None,
) -> np.ndarray:
    """One draw of ``nu^{W_k, theta}`` per row ``W_k`` of ``edge_weights``."""
    edge_weights = np.atleast_2d(np.asarray(edge_weights, dtype=float))
    count = edge_weights.shape[0]
    order = as_ordering(ordering, net.n)
    p = np.zeros((count, net.n, net.n))
    if net.n_edges:
        i, j = net.edge_array.T
        p[:, i, j] = edge_weights
        p[:, j, i] = edge_weights
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (net.n,))[None]
    _, beta = _draw(p, theta, order, rng, count)
    return beta


def log_density_nu(params: FamilyParams, beta: np.ndarray) -> np.ndarray | float:
    """Log density of ``nu^{W, theta}``; ``-inf`` outside ``D``.

    Accepts a single point or an array of points (one per row). Non-finite
    input raises ``ValueError`` so that it is never confused with the
    boundary value.
    """
    beta = np.asarray(beta, dtype=float)
    single = beta.ndim == 1
    b = np.atleast_2d(beta)
    if b.shape[-1] != params.n:
        raise ValueError(f"beta must have length {params.n}")
    if not np.all(np.isfinite(b)):
        raise ValueError("beta must be finite")
    m = -coupling_matrix(params.net)[None] + 2.0 * b[:, :, None] * np.eye(params.n)[None]
    eig = np.linalg.eigvalsh(m)
    inside = np.all(eig > 0, axis=1) & np.all(b > 0, axis=1)
    logdet = np.sum(np.log(np.where(inside[:, None], eig, 1.0)), axis=1)
    n = params.n
    const = 0.5 * n * np.log(2.0 / np.pi) + params.edge_coupling().sum() + 0.5 * np.log(params.theta).sum()
    out = np.where(inside, const - b @ params.theta - 0.5 * logdet, -np.inf)
    return float(out[0]) if single else out


def laplace_transform(params: FamilyParams, lam: np.ndarray) -> float:
    """``E[exp(-<lam, beta>)]`` in closed form, ``lam >= 0``."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (params.n,) or np.any(lam < 0):
        raise ValueError(f"lambda must be a non-negative vector of length {params.n}")
    t = params.theta
    s = lam + t
    i, j = params.net.edge_array.T if params.net.n_edges else (np.array([], int), np.array([], int))
    expo = -np.sum(params.net.weights * (np.sqrt(s[i] * s[j]) - np.sqrt(t[i] * t[j])))
    return float(np.exp(expo + 0.5 * np.sum(np.log(t / s))))


def marginal_ig_params(params: FamilyParams, i: int) -> IGParams:
    """Law of ``1 / (2 beta_i theta_i)``: ``IG(1 / sum_{j~i} W_ij sqrt(theta_i theta_j), 1)``."""
    indptr, nbr, wts, _ = params.net.csr
    lo, hi = indptr[i], indptr[i + 1]
    s = float(np.sum(wts[lo:hi] * np.sqrt(params.theta[i] * params.theta[nbr[lo:hi]])))
    if s <= 0:
        raise ValueError(f"vertex {i} has no neighbours")
    return IGParams(1.0 / s, 1.0)


def rescale_theta(b: BetaField) -> BetaField:
    """Map ``beta ~ nu^{W, theta}`` to ``theta * beta ~ nu^{W^theta, 1}``.

    ``W^theta_ij = W_ij sqrt(theta_i theta_j)``.
    """
    net = b.params.net.with_weights(b.params.edge_coupling())
    return BetaField(FamilyParams(net), b.params.theta * b.beta, b.ordering)
