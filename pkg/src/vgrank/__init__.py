"""Ranking software verification tools for a C program from its verification graph.

Programs become verification graphs (statement ASTs linked by control-flow,
control-dependence and data-dependence edges), graphs are compared with a
Weisfeiler-Lehman style kernel, and a pairwise SVM ensemble predicts a
ranking of the tools.
"""
from .competition import Dataset, ScoringSchema, TaskOutcome, assemble_dataset, rank_tools
from .experiment import cross_validate
from .frontend import extract
from .graph import Edge, NeighborSelector, Node, VerificationGraph, read_graph, write_graph
from .kernel import CombinedKernel, GramMatrix, KernelConfig, WLKernel, compute_gram, wl_kernel
from .ranking import DefaultRanker, RPCRanker, default_ranking, spearman
from .svm import PrecomputedSVC

__version__ = "0.1.0"

__all__ = [
    "CombinedKernel",
    "Dataset",
    "DefaultRanker",
    "Edge",
    "GramMatrix",
    "KernelConfig",
    "NeighborSelector",
    "Node",
    "PrecomputedSVC",
    "RPCRanker",
    "ScoringSchema",
    "TaskOutcome",
    "VerificationGraph",
    "WLKernel",
    "assemble_dataset",
    "compute_gram",
    "cross_validate",
    "default_ranking",
    "extract",
    "rank_tools",
    "read_graph",
    "spearman",
    "wl_kernel",
    "write_graph",
]
