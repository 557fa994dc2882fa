"""Shortest multirate anypath routing for lossy wireless mesh networks."""

from .algorithms import (
    RoutingTable,
    anypath_bellman_ford,
    multirate_anypath_bellman_ford,
    shortest_anypath_first,
    shortest_multirate_anypath_first,
    solve,
)
from .evaluation import (
    all_pairs_costs,
    connectivity_report,
    gain_distribution,
    rate_histogram,
    write_evaluation,
)
from .graph import (
    Graph,
    GraphError,
    GraphFormatError,
    JointReceptionModel,
    format_graph,
    generate_random_graph,
    independent_joint_model,
    parse_graph,
    read_graph,
    write_graph,
)
from .metrics import (
    EATT,
    EATX,
    Metric,
    anypath_cost,
    hyperlink_cost,
    hyperlink_delivery_ratio,
    incremental_update,
    relay_weights,
    remaining_cost,
)
from .oracle import (
    SimulationReport,
    brute_force_optimal,
    independence_report,
    sample_reception,
    simulate_delivery,
)
from .fixtures import worked_example_graph, worked_example_path

__version__ = "0.1.0"
