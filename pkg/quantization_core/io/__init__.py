"""
Input/Output Module

Tree documents, run configuration, experiment runners and the
command-line interface for quantization_core.
"""

from .run_config import RunConfig, parse_budget, parse_range
from .tree_store import parse_tree, read_tree, serialize_tree, tree_frame, write_tree, write_tree_csv

__all__ = [
    'RunConfig',
    'parse_budget',
    'parse_range',
    'parse_tree',
    'read_tree',
    'serialize_tree',
    'tree_frame',
    'write_tree',
    'write_tree_csv',
]
