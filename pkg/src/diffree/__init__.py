"""Set families with a forbidden set-difference size: constructions,
constraint checking, random partial chains and exact extremal search."""

from .chains import (
    BoundEstimate,
    ChainSplit,
    IncidenceStats,
    PermSample,
    block_chains,
    block_hit_estimate,
    chains_k1,
    default_split,
    estimate_k1,
    incidence_k1,
    lower_factor,
    removable_ksets,
    sample_permutation,
)
from .constraints import (
    ForbiddenDifference,
    ForbiddenIntersection,
    ForbiddenRatio,
    ForbiddenSymmetricDifference,
)
from .constructions import (
    ResidueChoice,
    a_star,
    a_star_k,
    greedy_valid_family,
    middle_layers,
)
from .dsl import parse_spec, render_spec
from .family import (
    Family,
    Violation,
    check_family,
    conflict_graph,
    lym_sum,
    make_family,
    pair_stats,
    partition_by_size_mod,
    truncate_to_band,
)
from .search import SearchResult, max_family, max_family_exhaustive, max_independent_set

__version__ = "0.1.0"
