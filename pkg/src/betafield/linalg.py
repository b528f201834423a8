"""Triangular factorisation of ``M = 2 beta - P`` and what it certifies.

For a conductance network with coupling matrix ``P`` and a potential ``beta``
the symmetric matrix ``M = 2 beta - P`` factors as ``M = L U`` with ``U``
upper triangular, diagonal ``x`` (the pivots) and off-diagonal ``-H``.
``M`` is positive definite exactly when every pivot is positive, and the
pivots multiply to ``|M|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Network, as_ordering, coupling_matrix, distance_matrix

__all__ = [
    "IndefiniteError",
    "PotentialMatrix",
    "TriangularFactors",
    "lu_factorize",
    "is_positive_definite",
    "log_determinant",
    "green_column",
    "positive_stability_certificate",
    "certificate_ordering",
    "gauss_elimination",
    "PIVOT_RTOL",
]

PIVOT_RTOL = 1e-12


class IndefiniteError(ValueError):
    """Raised when ``2 beta - P`` is not positive definite."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True, eq=False)
class PotentialMatrix:
    net: Network
    beta: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if beta.shape != (self.net.n,):
            raise ValueError(f"beta must have length {self.net.n}")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def matrix(self) -> np.ndarray:
        """Dense ``2 beta - P``."""
        return np.diag(2.0 * self.beta) - coupling_matrix(self.net)

    @property
    def schrodinger_potential(self) -> np.ndarray:
        """``V = 2 beta - W_i``, so that ``2 beta - P = -Laplacian + V``."""
        return 2.0 * self.beta - self.net.vertex_weights


@dataclass(frozen=True, eq=False)
class TriangularFactors:
    """Pivots ``x`` and fill values ``H`` in ordered indices.

    ``x[k]`` and ``H[k, j]`` (``k < j``) refer to positions in ``ordering``.
    When the recursion meets a non-positive pivot it stops: ``failed_at`` is
    the offending position and later pivots are NaN.
    """

    ordering: np.ndarray
    x: np.ndarray
    H: np.ndarray
    failed_at: int | None = None

    @property
    def positive(self) -> bool:
        return self.failed_at is None


def lu_factorize(m: PotentialMatrix, ordering: Sequence[int] | None = None) -> TriangularFactors:
    """Run the pivot recursion for ``M`` under ``ordering``.

    ``H[0, j] = W[0, j]``, ``H[i, j] = W[i, j] + sum_{k<i} H[k, i] H[k, j] / x[k]``
    and ``x[i] = 2 beta[i] - sum_{k<i} H[k, i]**2 / x[k]``. A pivot at or below
    ``PIVOT_RTOL * max(1, 2 beta[i])`` ends the recursion.
    """
    if np.any(m.beta <= 0):
        raise ValueError("beta must be strictly positive")
    order = as_ordering(ordering, m.net.n)
    n = m.net.n
    w = coupling_matrix(m.net)[np.ix_(order, order)]
    two_beta = 2.0 * m.beta[order]
    x = np.full(n, np.nan)
    h = np.zeros((n, n))
    failed = None
    for i in range(n):
        xi = two_beta[i]
        for k in range(i):
            xi -= h[k, i] ** 2 / x[k]
        x[i] = xi
        if xi <= PIVOT_RTOL * max(1.0, two_beta[i]):
            failed = i
            break
        for j in range(i + 1, n):
            hij = w[i, j]
            for k in range(i):
                hij += h[k, i] * h[k, j] / x[k]
            h[i, j] = hij
    return TriangularFactors(order, x, h, failed)


def is_positive_definite(m: PotentialMatrix, ordering: Sequence[int] | None = None) -> bool:
    if np.any(m.beta <= 0):
        return False
    return lu_factorize(m, ordering).positive


def log_determinant(f: TriangularFactors) -> float:
    """``log |2 beta - P|`` as the sum of log pivots."""
    if not f.positive:
        raise IndefiniteError("matrix is not positive definite", f.failed_at)
    return float(np.sum(np.log(f.x)))


def _solve(f: TriangularFactors, rhs: np.ndarray) -> np.ndarray:
    # M = U^T diag(1/x) U with U = diag(x) - strict_upper(H), in ordered indices
    n = len(f.x)
    b = rhs[f.ordering]
    y = np.zeros(n)
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc += f.H[k, i] * y[k]
        y[i] = acc / f.x[i]
    z = f.x * y
    g = np.zeros(n)
    for i in range(n - 1, -1, -1):
        acc = z[i]
        for j in range(i + 1, n):
            acc += f.H[i, j] * g[j]
        g[i] = acc / f.x[i]
    out = np.empty(n)
    out[f.ordering] = g
    return out


def green_column(m: PotentialMatrix, i0: int, factors: TriangularFactors | None = None) -> np.ndarray:
    """``G(i0, .)`` where ``G = (2 beta - P)^{-1}``; entries are positive."""
    f = lu_factorize(m) if factors is None else factors
    if not f.positive:
        raise IndefiniteError("matrix is not positive definite", f.failed_at)
    e = np.zeros(m.net.n)
    e[i0] = 1.0
    return _solve(f, e)


def positive_stability_certificate(
    m: PotentialMatrix,
    xi: np.ndarray,
    ordering: Sequence[int] | None = None,
    *,
    rtol: float = 1e-12,
) -> bool:
    """Check ``A xi > 0`` and positive leading partial row sums for reordered ``A``.

    With ``A = M[order][:, order]`` and ``xi`` reordered alike, the
    certificate holds when ``A xi`` is componentwise non-negative and not
    zero, and ``sum_{j<=k} A[k, j] xi[j] > 0`` for every ``k``. Since ``A`` has
    non-positive off-diagonal entries this proves ``A`` positive stable,
    hence ``M`` positive definite. Comparisons are made relative to
    ``sum_j |A[k, j]| xi[j]`` with tolerance ``rtol``.
    """
    order = as_ordering(ordering, m.net.n)
    xi = np.asarray(xi, dtype=float)[order]
    if np.any(xi <= 0):
        raise ValueError("xi must be strictly positive")
    a = m.matrix[np.ix_(order, order)]
    terms = a * xi[None, :]
    scale = np.abs(terms).sum(axis=1)
    row = terms.sum(axis=1)
    if np.any(row < -rtol * scale) or not np.any(row > rtol * scale):
        return False
    partial = np.tril(terms).sum(axis=1)
    return bool(np.all(partial > rtol * scale))


def certificate_ordering(net: Network, i0: int) -> np.ndarray:
    """Vertices by decreasing distance from ``i0``, ending with ``i0``.

    Distances along a breadth-first spanning tree equal graph distances, so
    every vertex except ``i0`` has a neighbour placed after it.
    """
    d = distance_matrix(net)[i0]
    return np.array(sorted(range(net.n), key=lambda v: (-d[v], v)), dtype=np.int64)


def gauss_elimination(m: PotentialMatrix) -> tuple[list[np.ndarray], np.ndarray]:
    """Row elimination ``T_{n-1} ... T_1 M = U`` with unit lower ``T_k``.

    Independent of :func:`lu_factorize`; used as a test oracle. Returns the
    list of elimination matrices and the upper triangular result.
    """
    a = m.matrix.copy()
    n = a.shape[0]
    ts = []
    for k in range(n - 1):
        t = np.eye(n)
        t[k + 1:, k] = -a[k + 1:, k] / a[k, k]
        a = t @ a
        ts.append(t)
    return ts, a
