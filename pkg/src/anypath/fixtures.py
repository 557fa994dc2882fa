"""Bundled example graphs."""

from importlib import resources

from .graph import Graph, parse_graph

SOURCE, RELAYS, DESTINATION = 0, (1, 2, 3), 4


def worked_example_path():
    """Path-like handle to the bundled ``worked_example.apg`` file."""
    return resources.files(__package__) / "data" / "worked_example.apg"


def worked_example_graph() -> Graph:
    """Source 0, relays 1-3 with costs 2.0/3.3/10.0 toward destination 4, one rate."""
    return parse_graph(worked_example_path().read_text(encoding="utf-8"))
