"""prodperc: bond percolation on high-dimensional Cartesian product graphs.

Implicit product graphs, reproducible percolation via deferred edge
decisions, exact component censuses, and experiment harnesses for the
phase-transition behaviour of the percolated products.
"""

from .basegraphs import (
    BaseGraph,
    GraphStats,
    brute_force_isoperimetric,
    complete,
    from_edge_list,
    star,
    star_clique,
    stats,
)
from .errors import SizeLimitError, UnsupportedOperationError
from .percolation import (
    CensusResult,
    EdgeSampler,
    ExplorationResult,
    TwoRoundSchedule,
    bfs_component,
    canonical_edge_key,
    census,
    census_with_labels,
    layer_bfs,
    sample_edge,
    two_round_split,
    union_sampler,
)
from .product import (
    ProductGraph,
    Projection,
    build,
    parse_product_spec,
    projection_cover,
)

__all__ = [
    "BaseGraph", "GraphStats", "ProductGraph", "Projection",
    "EdgeSampler", "CensusResult", "ExplorationResult", "TwoRoundSchedule",
    "SizeLimitError", "UnsupportedOperationError",
    "brute_force_isoperimetric", "complete", "from_edge_list", "star",
    "star_clique", "stats", "build", "parse_product_spec",
    "projection_cover", "bfs_component", "canonical_edge_key", "census",
    "census_with_labels", "layer_bfs", "sample_edge", "two_round_split",
    "union_sampler",
]

__version__ = "0.1.0"
