"""Multivariate inverse-Gaussian potentials, VRJP mixing fields and the ERRW magic formula.

The main entry points are re-exported here; see the submodules for the rest.

>>> import numpy as np
>>> from betafield import Network, FamilyParams, sample_beta
>>> net = Network.from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
>>> beta = sample_beta(FamilyParams(net), np.random.default_rng(0), 5)
>>> beta.shape
(5, 3)
"""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .bridge import (
    UField,
    beta_from_u_gamma,
    couple_u_fields,
    determinant_identity_check,
    gamma_from_beta,
    jacobian_check,
    log_density_q,
    sample_u,
    u_from_beta,
)
from .family import (
    BetaField,
    FamilyParams,
    IGParams,
    laplace_transform,
    log_density_nu,
    marginal_ig_params,
    rescale_theta,
    sample_beta,
    sample_gig_half,
    sample_inverse_gaussian,
)
from .graph import Network, coupling_matrix, enumerate_spanning_trees, graph_distance, spanning_tree_polynomial
from .linalg import (
    IndefiniteError,
    PotentialMatrix,
    TriangularFactors,
    green_column,
    is_positive_definite,
    log_determinant,
    lu_factorize,
    positive_stability_certificate,
)
from .magic import (
    log_constant_c,
    log_density_magic,
    markov_path_probability,
    path_probability_closed,
    sample_magic_point,
    sample_mixed_w,
)
from .process import (
    errw_path_probability_direct,
    errw_step,
    estimate_u,
    simulate_errw,
    time_change_d,
    time_rescale_phi,
    vrjp_limit_fields,
    vrjp_step,
)

__all__ = [
    "BACKEND",
    "Network",
    "coupling_matrix",
    "graph_distance",
    "spanning_tree_polynomial",
    "enumerate_spanning_trees",
    "PotentialMatrix",
    "TriangularFactors",
    "IndefiniteError",
    "lu_factorize",
    "is_positive_definite",
    "log_determinant",
    "green_column",
    "positive_stability_certificate",
    "FamilyParams",
    "BetaField",
    "IGParams",
    "sample_inverse_gaussian",
    "sample_gig_half",
    "sample_beta",
    "log_density_nu",
    "laplace_transform",
    "marginal_ig_params",
    "rescale_theta",
    "UField",
    "u_from_beta",
    "gamma_from_beta",
    "beta_from_u_gamma",
    "log_density_q",
    "sample_u",
    "couple_u_fields",
    "determinant_identity_check",
    "jacobian_check",
    "vrjp_step",
    "time_change_d",
    "estimate_u",
    "vrjp_limit_fields",
    "time_rescale_phi",
    "errw_step",
    "errw_path_probability_direct",
    "simulate_errw",
    "log_constant_c",
    "log_density_magic",
    "path_probability_closed",
    "markov_path_probability",
    "sample_mixed_w",
    "sample_magic_point",
]
