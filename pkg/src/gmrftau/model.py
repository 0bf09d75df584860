"""Constraint specifications and solved max-determinant completions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from . import symmat
from .errors import ParameterError
from .graph import Graph, _norm_edge

EDGE_LIMIT = 1.0 - 1e-6


@dataclass(frozen=True)
class CorrelationSpec:
    """A graph with a uniform edge value ``x`` or one value per edge."""

    graph: Graph
    x: float | None = None
    weights: MappingProxyType | None = None

    def __post_init__(self):
        if (self.x is None) == (self.weights is None):
            raise ParameterError("give exactly one of a uniform x or per-edge weights")
        if self.x is not None:
            object.__setattr__(self, "x", float(self.x))
            vals = [self.x]
        else:
            w = {_norm_edge(*e): float(v) for e, v in dict(self.weights).items()}
            if set(w) != self.graph.edge_set:
                raise ParameterError("weight keys must be exactly the edge set")
            object.__setattr__(self, "weights", MappingProxyType(w))
            vals = list(w.values())
        for v in vals:
            if not -1.0 < v < 1.0:
                raise ParameterError(f"edge value {v} outside (-1, 1)")

    @classmethod
    def uniform(cls, graph, x):
        return cls(graph, x=x)

    @classmethod
    def per_edge(cls, graph, weights):
        return cls(graph, weights=weights)

    @property
    def is_uniform(self):
        return self.weights is None

    def __hash__(self):
        w = None if self.weights is None else tuple(sorted(self.weights.items()))
        return hash((self.graph, self.x, w))

    def __eq__(self, other):
        if not isinstance(other, CorrelationSpec):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.x == other.x
            and (None if self.weights is None else dict(self.weights))
            == (None if other.weights is None else dict(other.weights))
        )

    def weight(self, u, v):
        if self.x is not None:
            return self.x
        return self.weights[_norm_edge(u, v)]

    def weight_vector(self) -> np.ndarray:
        if self.x is not None:
            return np.full(self.graph.m, self.x)
        return np.array([self.weights[e] for e in self.graph.edges])

    def max_abs_weight(self):
        w = self.weight_vector()
        return float(np.max(np.abs(w))) if w.size else 0.0

    def constrained_matrix(self, fill=0.0):
        """Unit diagonal, edge values on edges, ``fill`` on non-edges."""
        n = self.graph.n
        m = np.full((n, n), float(fill))
        np.fill_diagonal(m, 1.0)
        for (u, v), w in zip(self.graph.edges, self.weight_vector()):
            m[u, v] = m[v, u] = w
        return m

    def check_solvable_range(self):
        if self.max_abs_weight() > EDGE_LIMIT:
            raise ParameterError("edge values with 1-|x| < 1e-6 are refused (conditioning)")


def dual_matrix(spec: CorrelationSpec, y) -> np.ndarray:
    """The precision-side parametrisation: ``-y`` on edges, ``1 + sum x*y`` on the diagonal."""
    g = spec.graph
    n = g.n
    b = np.eye(n)
    for (u, v), w, t in zip(g.edges, spec.weight_vector(), y):
        b[u, v] = b[v, u] = -t
        b[u, u] += w * t
        b[v, v] += w * t
    return b


def kkt_residuals(spec: CorrelationSpec, A, B) -> dict:
    """Optimality residuals of a candidate pair (covariance ``A``, precision ``B``)."""
    g = spec.graph
    n = g.n
    eye = np.eye(n)
    res = {"inverse": float(np.max(np.abs(A @ B - eye)))}

    off_pattern = np.ones((n, n), dtype=bool)
    np.fill_diagonal(off_pattern, False)
    for u, v in g.edges:
        off_pattern[u, v] = off_pattern[v, u] = False
    res["precision_pattern"] = float(np.max(np.abs(B[off_pattern]), initial=0.0))

    cons = float(np.max(np.abs(np.diag(A) - 1.0)))
    for (u, v), w in zip(g.edges, spec.weight_vector()):
        cons = max(cons, abs(A[u, v] - w))
    res["constraints"] = cons

    y = np.array([-B[u, v] for u, v in g.edges])
    bhat = dual_matrix(spec, y)
    res["dual_diagonal"] = float(np.max(np.abs(np.diag(B) - np.diag(bhat))))
    eq = A @ bhat
    edge_mask = np.zeros((n, n), dtype=bool)
    for u, v in g.edges:
        edge_mask[u, v] = edge_mask[v, u] = True
    res["edge_equations"] = float(np.max(np.abs(eq[edge_mask]), initial=0.0))
    res["nonedge_equations"] = float(np.max(np.abs(eq[off_pattern]), initial=0.0))
    return res


@dataclass(frozen=True, eq=False)
class GmrfSolution:
    """Max-determinant completion ``A`` with its inverse ``B`` and diagnostics."""

    spec: CorrelationSpec
    A: np.ndarray
    B: np.ndarray
    log_tau: float
    iterations: int
    residual: float
    method: str
    logdet_trace: tuple = field(default=(), repr=False)

    @property
    def graph(self) -> Graph:
        return self.spec.graph

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)

    @property
    def y_vector(self) -> np.ndarray:
        return np.array([-self.B[u, v] for u, v in self.graph.edges])

    @property
    def y(self) -> dict:
        return {e: -float(self.B[e]) for e in self.graph.edges}

    @property
    def z(self) -> dict:
        n = self.graph.n
        return {(u, v): float(self.A[u, v]) for u in range(n) for v in range(u + 1, n)}

    @property
    def z_nonedges(self) -> dict:
        return {e: float(self.A[e]) for e in self.graph.non_edges()}

    @property
    def Y(self) -> np.ndarray:
        out = np.zeros(self.graph.n)
        for (u, v), t in zip(self.graph.edges, self.y_vector):
            out[u] += t
            out[v] += t
        return out

    def kkt(self) -> dict:
        return kkt_residuals(self.spec, self.A, self.B)

    def to_dict(self) -> dict:
        d = {"n": self.graph.n}
        if self.spec.is_uniform:
            d["x"] = self.spec.x
        else:
            d["weights"] = [[u, v, w] for (u, v), w in sorted(self.spec.weights.items())]
        d["tau"] = self.tau
        d["log_tau"] = self.log_tau
        d["y"] = [[u, v, t] for (u, v), t in self.y.items()]
        d["z_nonedges"] = [[u, v, z] for (u, v), z in self.z_nonedges.items()]
        d["residual"] = self.residual
        d["iterations"] = self.iterations
        d["method"] = self.method
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def make_solution(spec, A, method, iterations, logdet_trace=()) -> GmrfSolution:
    """Restore the constrained entries of ``A`` exactly and pair it with its inverse."""
    A = spec.constrained_matrix() + np.where(_free_mask(spec.graph), symmat.as_symmetric(A), 0.0)
    B, ld = symmat.inverse_logdet(A)
    res = kkt_residuals(spec, A, B)
    A.setflags(write=False)
    B.setflags(write=False)
    return GmrfSolution(
        spec=spec,
        A=A,
        B=B,
        log_tau=ld,
        iterations=int(iterations),
        residual=max(res.values()),
        method=method,
        logdet_trace=tuple(logdet_trace),
    )


def _free_mask(g: Graph) -> np.ndarray:
    mask = np.ones((g.n, g.n), dtype=bool)
    np.fill_diagonal(mask, False)
    for u, v in g.edges:
        mask[u, v] = mask[v, u] = False
    return mask
