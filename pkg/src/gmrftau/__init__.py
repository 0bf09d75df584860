"""Maximum-determinant positive definite completions of graph-patterned correlation matrices.

``tau(G, x)`` is the determinant of the completion with unit diagonal and value
``x`` on the edges of ``G``; the package solves for it, audits the inequalities
it satisfies and provides the related zeta, spanning-tree, sphere-sampling and
power-series tools.
"""

from .errors import (
    GmrfError,
    InfeasibleSpec,
    IntegrityError,
    NoConvergence,
    NoStabilization,
    NotApplicable,
    NotChordal,
    NotPositiveDefinite,
    OverlapMismatch,
    ParameterError,
    PoleError,
    SizeGuardError,
)
from .graph import Graph, generate, read_edge_list, write_edge_list
from .model import CorrelationSpec, GmrfSolution
from .solver import classify_edges, log_tau, m_threshold, solve, tau, verify_kkt

__all__ = [
    "CorrelationSpec",
    "GmrfError",
    "GmrfSolution",
    "Graph",
    "InfeasibleSpec",
    "IntegrityError",
    "NoConvergence",
    "NoStabilization",
    "NotApplicable",
    "NotChordal",
    "NotPositiveDefinite",
    "OverlapMismatch",
    "ParameterError",
    "PoleError",
    "SizeGuardError",
    "classify_edges",
    "generate",
    "log_tau",
    "m_threshold",
    "read_edge_list",
    "solve",
    "tau",
    "verify_kkt",
    "write_edge_list",
]
