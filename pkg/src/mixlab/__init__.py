"""mixlab: lazy random walks on graphs with small bottlenecks.

Graph representations, random-graph generators, exact mixing and hitting
computations, conductance profiles, spreader certification, bad-set
contraction and first-visit diagnostics.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    Graph,
    MultiGraph,
    boundary_size,
    connected_components,
    degree_sum,
    internal_edges,
    is_connected,
    is_connected_set,
    largest_component,
    read_edge_list,
    write_edge_list,
)
from .generators import Seed, gen_gnp, gen_newman_watts, percolate, perturb  # noqa: E402
from .walk import (  # noqa: E402
    avg_mixing_time,
    ball_growth_lower_bound,
    hitting_survival,
    mixing_time,
    simulate_walk,
    stationary,
    step,
    tv_distance,
)
from .conductance import conductance, conductance_profile, edge_flow, fr_bound  # noqa: E402
from .spreader import SpreaderParams, bad_set_union, spreader_check  # noqa: E402
from .contraction import contract_components, contract_to_vertex, coupling_survival_check  # noqa: E402
from .fvtl import fvtl_report, lambda_u, returns_RT  # noqa: E402

__all__ = [
    "Graph", "MultiGraph", "boundary_size", "connected_components", "degree_sum",
    "internal_edges", "is_connected", "is_connected_set", "largest_component",
    "read_edge_list", "write_edge_list", "Seed", "gen_gnp", "gen_newman_watts",
    "percolate", "perturb", "avg_mixing_time", "ball_growth_lower_bound",
    "hitting_survival", "mixing_time", "simulate_walk", "stationary", "step",
    "tv_distance", "conductance", "conductance_profile", "edge_flow", "fr_bound",
    "SpreaderParams", "bad_set_union", "spreader_check", "contract_components",
    "contract_to_vertex", "coupling_survival_check", "fvtl_report", "lambda_u",
    "returns_RT",
]
