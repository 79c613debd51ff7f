"""Certified inner/outer bounds and codebook constructions for the
non-adaptive zero-error capacity region of discrete memoryless two-way
channels."""

__version__ = "0.1.0"

from .channel import (
    Channel,
    ConfusionFamily,
    canonical_channel,
    derive_confusion,
    parse_channel,
    same_adjacency,
)
from .codebooks import (
    BestPairResult,
    CodebookPair,
    LinearCodePair,
    UdResult,
    detecting_family,
    detecting_vector_check,
    exhaustive_best_pair,
    is_uniquely_decodable,
    lemma8_bound,
    lemma8_search,
    theorem6_combine,
    theorem8_construct,
    theorem8_family,
    theorem8_rate_target,
)
from .graphs import Graph
from .inner import (
    DetectingSets,
    InnerPoint,
    best_sub_alphabet,
    detecting_sets,
    linear_code_L,
    max_random_coding,
    random_coding_point,
    rate_hull,
    restricted_family,
)
from .oneshot import (
    DualPair,
    independence_product,
    rho_lower_certificate,
    rho_upper_estimate,
)
from .outer import (
    LambdaBound,
    ProductDistribution,
    assemble_outer_region,
    epsilon_lambda,
    l_lambda,
    max_epsilon,
    max_neglog_l,
    maxmin_bound,
    minimize_over_q,
    minmax_bound,
    oneway_lp_bound,
    region_polygon,
)
from .spectral import (
    CapacitySandwich,
    capacity_sandwich,
    fractional_clique_cover,
    kg_kk_bound,
    lovasz_theta,
    noiseless_direction_bound,
)

__all__ = [
    "__version__",
    "Channel",
    "ConfusionFamily",
    "canonical_channel",
    "derive_confusion",
    "parse_channel",
    "same_adjacency",
    "BestPairResult",
    "CodebookPair",
    "LinearCodePair",
    "UdResult",
    "detecting_family",
    "detecting_vector_check",
    "exhaustive_best_pair",
    "is_uniquely_decodable",
    "lemma8_bound",
    "lemma8_search",
    "theorem6_combine",
    "theorem8_construct",
    "theorem8_family",
    "theorem8_rate_target",
    "Graph",
    "DetectingSets",
    "InnerPoint",
    "best_sub_alphabet",
    "detecting_sets",
    "linear_code_L",
    "max_random_coding",
    "random_coding_point",
    "rate_hull",
    "restricted_family",
    "DualPair",
    "independence_product",
    "rho_lower_certificate",
    "rho_upper_estimate",
    "LambdaBound",
    "ProductDistribution",
    "assemble_outer_region",
    "epsilon_lambda",
    "l_lambda",
    "max_epsilon",
    "max_neglog_l",
    "maxmin_bound",
    "minimize_over_q",
    "minmax_bound",
    "oneway_lp_bound",
    "region_polygon",
    "CapacitySandwich",
    "capacity_sandwich",
    "fractional_clique_cover",
    "kg_kk_bound",
    "lovasz_theta",
    "noiseless_direction_bound",
]
