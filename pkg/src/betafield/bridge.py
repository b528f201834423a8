"""Change of variables between potentials ``beta`` and VRJP mixing fields.

For ``beta`` in ``D`` and a base vertex ``i0`` with ``G = (2 beta - P)^{-1}``,

    u_j = log(G(i0, j) / G(i0, i0)),    gamma = 1 / (2 G(i0, i0)),

and conversely ``beta_i = 1/2 sum_{j~i} W_ij exp(u_j - u_i) + 1{i = i0} gamma``.
When ``beta ~ nu^{W, phi^2}``, ``u`` has the VRJP mixing law ``Q^{W, phi}_{i0}``
and ``gamma`` is an independent gamma(1/2, rate phi_{i0}^2) variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import FamilyParams, sample_beta, sample_beta_mixed
from .graph import Network, coupling_matrix, log_spanning_tree_polynomial, log_tree_sums
from .linalg import (
    IndefiniteError,
    PotentialMatrix,
    certificate_ordering,
    green_column,
    log_determinant,
    lu_factorize,
    positive_stability_certificate,
)

__all__ = [
    "UField",
    "u_from_beta",
    "gamma_from_beta",
    "gamma_from_u",
    "beta_from_u_gamma",
    "tilde_beta",
    "log_density_q",
    "log_density_gamma",
    "log_jacobian",
    "sample_u",
    "sample_u_mixed",
    "fields_from_betas",
    "couple_u_fields",
    "determinant_identity_check",
    "jacobian_check",
    "certify",
]


@dataclass(frozen=True, eq=False)
class UField:
    """A mixing field rooted at ``base`` (``u[base] == 0``) with initial local times ``phi``."""

    net: Network
    base: int
    u: np.ndarray = field(repr=False)
    phi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float).reshape(-1)
        if u.shape != (self.net.n,):
            raise ValueError(f"u must have length {self.net.n}")
        if u[self.base] != 0.0:
            raise ValueError("u must vanish at the base vertex")
        phi = np.ones(self.net.n) if self.phi is None else np.array(self.phi, dtype=float).reshape(-1)
        if phi.shape != (self.net.n,) or np.any(phi <= 0):
            raise ValueError("phi must be a positive vector")
        u.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "phi", phi)


def _green(net: Network, beta: np.ndarray, i0: int) -> np.ndarray:
    m = PotentialMatrix(net, beta)
    f = lu_factorize(m)
    if not f.positive:
        raise IndefiniteError("2 beta - P is not positive definite", f.failed_at)
    return green_column(m, i0, f)


def u_from_beta(net: Network, beta: np.ndarray, i0: int) -> np.ndarray:
    """The unique ``u`` with ``u[i0] = 0`` and ``1/2 sum_j W_ij e^{u_j - u_i} = beta_i`` off ``i0``."""
    g = _green(net, beta, i0)
    u = np.log(g / g[i0])
    u[i0] = 0.0
    return u


def gamma_from_beta(net: Network, beta: np.ndarray, i0: int) -> float:
    """``1 / (2 G(i0, i0))``."""
    return float(0.5 / _green(net, beta, i0)[i0])


def tilde_beta(net: Network, u: np.ndarray) -> np.ndarray:
    """``1/2 sum_{j~i} W_ij exp(u_j - u_i)``; rows of ``u`` are handled independently."""
    u = np.asarray(u, dtype=float)
    p = coupling_matrix(net)
    return 0.5 * np.sum(p * np.exp(u[..., None, :] - u[..., :, None]), axis=-1)


def gamma_from_u(net: Network, beta: np.ndarray, u: np.ndarray, i0: int) -> float:
    """``beta_{i0} - 1/2 sum_{j~i0} W_{i0 j} e^{u_j}``, the second route to ``gamma``."""
    return float(beta[i0] - tilde_beta(net, u)[i0])


def beta_from_u_gamma(net: Network, u: np.ndarray, gamma: float, i0: int) -> np.ndarray:
    """Inverse map; the result always lies in ``D`` when ``gamma > 0``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    u = np.asarray(u, dtype=float)
    beta = tilde_beta(net, u)
    beta[..., i0] += gamma
    return beta


def certify(net: Network, u: np.ndarray, gamma: float, i0: int) -> bool:
    """Positive-stability certificate for ``beta_from_u_gamma`` with ``xi = e^u``."""
    beta = beta_from_u_gamma(net, u, gamma, i0)
    return positive_stability_certificate(PotentialMatrix(net, beta), np.exp(u), certificate_ordering(net, i0))


def log_density_q(net: Network, u: np.ndarray, phi: np.ndarray | None, i0: int) -> np.ndarray | float:
    """Log density of ``Q^{W, phi}_{i0}`` with respect to ``prod_{j != i0} du_j``.

    ``u`` is a full-length vector with ``u[i0] == 0``, or one such vector per row.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != net.n:
        raise ValueError(f"u must have length {net.n}")
    if np.any(u[:, i0] != 0.0):
        raise ValueError("u must vanish at the base vertex")
    phi = np.ones(net.n) if phi is None else np.asarray(phi, dtype=float)
    n = net.n
    out = np.sum(np.log(np.delete(phi, i0))) - 0.5 * (n - 1) * np.log(2 * np.pi) - np.sum(u, axis=1)
    if net.n_edges:
        i, j = net.edge_array.T
        du = u[:, i] - u[:, j]
        with np.errstate(over="ignore", invalid="ignore"):
            out = out - 0.5 * np.sum(
                net.weights * (np.exp(du) * phi[j] ** 2 + np.exp(-du) * phi[i] ** 2 - 2 * phi[i] * phi[j]), axis=1
            )
            out = out + 0.5 * log_tree_sums(net, net.weights * np.exp(u[:, i] + u[:, j]))
        # overflow far out in the tails: the quadratic term dominates, so the density vanishes
        out = np.where(np.isnan(out) & np.all(np.isfinite(u), axis=1), -np.inf, out)
    return float(out[0]) if single else out


def log_density_gamma(gamma: np.ndarray | float, phi0: float) -> np.ndarray | float:
    """Gamma(1/2, rate ``phi0**2``) log density."""
    gamma = np.asarray(gamma, dtype=float)
    return np.log(phi0) - phi0**2 * gamma - 0.5 * np.log(np.pi * gamma)


def log_jacobian(net: Network, u: np.ndarray) -> float:
    """``log |d beta / d(u, gamma)| = -(n-1) log 2 - 2 sum u + log D(W, u)``."""
    u = np.asarray(u, dtype=float)
    return float(-(net.n - 1) * np.log(2.0) - 2.0 * np.sum(u) + log_spanning_tree_polynomial(net, u))


def fields_from_betas(
    net: Network, betas: np.ndarray, i0: int, edge_weights: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(u, gamma)`` for many potentials at once (dense solves).

    ``edge_weights`` optionally gives one conductance vector per row.
    """
    betas = np.atleast_2d(betas)
    m = 2.0 * betas[:, :, None] * np.eye(net.n)[None]
    if edge_weights is None:
        m = m - coupling_matrix(net)[None]
    elif net.n_edges:
        i, j = net.edge_array.T
        m[:, i, j] -= edge_weights
        m[:, j, i] -= edge_weights
    rhs = np.zeros((len(betas), net.n, 1))
    rhs[:, i0, 0] = 1.0
    g = np.linalg.solve(m, rhs)[:, :, 0]
    u = np.log(g / g[:, i0:i0 + 1])
    u[:, i0] = 0.0
    return u, 0.5 / g[:, i0]


def sample_u(net: Network, phi: np.ndarray | None, i0: int, rng: np.random.Generator, size: int | None = None):
    """Draw ``(u, gamma)`` by sampling ``beta ~ nu^{W, phi^2}`` and mapping it.

    Returns ``(UField, gamma)`` when ``size`` is None, otherwise arrays of
    shapes ``(size, n)`` and ``(size,)``.
    """
    phi = np.ones(net.n) if phi is None else np.asarray(phi, dtype=float)
    params = FamilyParams(net, phi**2)
    betas = sample_beta(params, rng, 1 if size is None else size)
    u, gamma = fields_from_betas(net, betas, i0)
    if size is None:
        return UField(net, i0, u[0], phi), float(gamma[0])
    return u, gamma


def sample_u_mixed(net: Network, edge_weights: np.ndarray, i0: int, rng: np.random.Generator):
    """``(u, gamma)`` with ``phi = 1`` and one conductance vector per row of ``edge_weights``."""
    edge_weights = np.atleast_2d(np.asarray(edge_weights, dtype=float))
    betas = sample_beta_mixed(net, edge_weights, np.ones(net.n), rng)
    return fields_from_betas(net, betas, i0, edge_weights)


def couple_u_fields(net: Network, beta: np.ndarray) -> np.ndarray:
    """Matrix ``u(i, j) = log(G(i, j) / G(i, i))`` for every base point ``i``."""
    m = PotentialMatrix(net, beta)
    f = lu_factorize(m)
    if not f.positive:
        raise IndefiniteError("2 beta - P is not positive definite", f.failed_at)
    out = np.empty((net.n, net.n))
    for i in range(net.n):
        g = green_column(m, i, f)
        out[i] = np.log(g / g[i])
        out[i, i] = 0.0
    return out


def determinant_identity_check(net: Network, beta: np.ndarray, i0: int) -> float:
    """Relative gap between ``log |2 beta - P|`` and ``log(2 gamma) - 2 sum u + log D(W, u)``."""
    m = PotentialMatrix(net, beta)
    lhs = log_determinant(lu_factorize(m))
    u = u_from_beta(net, beta, i0)
    gamma = gamma_from_beta(net, beta, i0)
    rhs = np.log(2.0 * gamma) - 2.0 * np.sum(u) + log_spanning_tree_polynomial(net, u)
    return float(abs(lhs - rhs) / max(1.0, abs(lhs)))


def _beta_of_coords(net: Network, coords: np.ndarray, i0: int) -> np.ndarray:
    u = np.insert(coords[:-1], i0, 0.0)
    return beta_from_u_gamma(net, u, coords[-1], i0)


def jacobian_check(net: Network, u: np.ndarray, gamma: float, i0: int, step: float = 1e-6) -> float:
    """Relative gap between the closed-form ``|J|`` and central differences.

    The map is ``(u_{-i0}, gamma) -> beta``; each coordinate is perturbed by
    ``step`` in both directions.
    """
    u = np.asarray(u, dtype=float)
    coords = np.append(np.delete(u, i0), gamma)
    jac = np.empty((net.n, net.n))
    for k in range(net.n):
        e = np.zeros(net.n)
        e[k] = step
        jac[:, k] = (_beta_of_coords(net, coords + e, i0) - _beta_of_coords(net, coords - e, i0)) / (2 * step)
    fd = abs(np.linalg.det(jac))
    closed = np.exp(log_jacobian(net, u))
    return float(abs(fd - closed) / closed)
