"""Quartet-based inference of 2-by-N logical topologies.

Receivers are 0-based indices in file order; joins are edge labels.
"""

from ._core import (
    LogicalTree,
    ParseError,
    QtomoError,
    csv_header,
    enumerate_valid_configs,
    infer,
    is_valid,
    load_topology,
    lower_bound,
    make_tree,
    min_quartets,
    parse_topology,
    quartet_type,
    random_config,
    serialize_topology,
    sweep,
)

__all__ = [
    "LogicalTree",
    "ParseError",
    "QtomoError",
    "csv_header",
    "enumerate_valid_configs",
    "infer",
    "is_valid",
    "load_topology",
    "lower_bound",
    "make_tree",
    "min_quartets",
    "parse_topology",
    "quartet_type",
    "random_config",
    "serialize_topology",
    "sweep",
]
