"""Decentralized sparse multitask recursive least squares over networks.

The library simulates a network of nodes that each run a recursive
least squares estimator on a private measurement stream while being
coupled to their neighbors through a pairwise similarity penalty and
to a sparsity prior through an l1 penalty.  Two online solvers are
provided (a closed-form ADMM scheme and a cheaper subgradient scheme)
together with a centralized benchmark solver, steady-state error
analysis tools, synthetic data generation, and an experiment harness
with a command line front end.
"""

from mtrls.errors import (
    DimensionMismatchError,
    DuplicateEdgeError,
    InvalidSparsityError,
    LambdaNotOneError,
    MtrlsError,
    NodeIndexError,
    SelfLoopError,
    SingularBlockError,
    TooManyEdgesError,
    ZeroTruthError,
)
from mtrls.graph import Graph, build_graph, from_edge_list, random_graph, to_edge_list

__all__ = [
    "DimensionMismatchError",
    "DuplicateEdgeError",
    "Graph",
    "InvalidSparsityError",
    "LambdaNotOneError",
    "MtrlsError",
    "NodeIndexError",
    "SelfLoopError",
    "SingularBlockError",
    "TooManyEdgesError",
    "ZeroTruthError",
    "build_graph",
    "from_edge_list",
    "random_graph",
    "to_edge_list",
]

__version__ = "0.1.0"
