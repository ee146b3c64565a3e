"""Simulator and verification toolkit for consensus over slowly time-varying networks."""

from .graphcore import (
    Graph,
    SpectralSummary,
    edge_diff,
    laplacian,
    laplacian_monotone_psd_check,
    spectral_summary,
    swap_vertices,
)
from .topologies import (
    OrderedTree,
    RolePartition,
    bethe_tree,
    nested_path_tree,
    partition_roles,
    rotating_star,
)
from .worstcase import ChainProblem, global_optimum, kappa_global_bound, local_gradient
from .adversary import Schedule, information_flow, span_trace
from .gossip import (
    accelerated_gossip_nrl,
    chebyshev_static,
    effective_graph,
    plain_gossip,
    verify_ct_sandwich,
)
from .tvopt import (
    FunctionSequenceContract,
    PotentialTrace,
    agm_tv_step,
    potential,
    run_agm_tv,
    z_value,
)

__all__ = [
    "Graph",
    "SpectralSummary",
    "laplacian",
    "spectral_summary",
    "edge_diff",
    "swap_vertices",
    "laplacian_monotone_psd_check",
    "OrderedTree",
    "RolePartition",
    "bethe_tree",
    "nested_path_tree",
    "rotating_star",
    "partition_roles",
    "ChainProblem",
    "local_gradient",
    "global_optimum",
    "kappa_global_bound",
    "Schedule",
    "information_flow",
    "span_trace",
    "effective_graph",
    "accelerated_gossip_nrl",
    "plain_gossip",
    "verify_ct_sandwich",
    "chebyshev_static",
    "FunctionSequenceContract",
    "PotentialTrace",
    "agm_tv_step",
    "z_value",
    "potential",
    "run_agm_tv",
]
