"""Conditionally independent couplings, clique sums and an exact chordal solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import symmat
from .errors import NotChordal, OverlapMismatch, ParameterError
from .graph import Graph
from .model import CorrelationSpec, GmrfSolution, make_solution

OVERLAP_TOL = 1e-12


def tau_complete(r, x):
    """Determinant of the r x r all-x correlation matrix."""
    return (1.0 - x) ** (r - 1) * (1.0 + (r - 1) * x)


def log_tau_complete(r, x):
    return (r - 1) * math.log1p(-x) + math.log1p((r - 1) * x)


def y_complete(r, x):
    """Negated off-diagonal precision entry of the all-x matrix."""
    return x / ((1.0 - x) * (1.0 + (r - 1) * x))


@dataclass(frozen=True)
class CouplingLayout:
    """Index labels of the two marginals; the output is indexed by ``Q`` (sorted union)."""

    X: tuple
    Y: tuple

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(self.X))
        object.__setattr__(self, "Y", tuple(self.Y))
        if len(set(self.X)) != len(self.X) or len(set(self.Y)) != len(self.Y):
            raise ParameterError("index sets must not repeat labels")

    @property
    def Z(self):
        ys = set(self.Y)
        return tuple(i for i in self.X if i in ys)

    @property
    def Q(self):
        return tuple(sorted(set(self.X) | set(self.Y)))


def _embed(inv, labels, pos, size):
    out = np.zeros((size, size))
    idx = [pos[i] for i in labels]
    out[np.ix_(idx, idx)] = inv
    return out


def couple(A, B, layout: CouplingLayout) -> np.ndarray:
    """Gaussian coupling of covariances ``A`` (over X) and ``B`` (over Y), independent given Z.

    Computed as the inverse of the zero-padded ``A^-1 + B^-1 - C^-1`` where ``C``
    is the shared block on ``Z``.
    """
    A = symmat.as_symmetric(A)
    B = symmat.as_symmetric(B)
    if A.shape[0] != len(layout.X) or B.shape[0] != len(layout.Y):
        raise ParameterError("matrix sizes do not match the layout")
    z = layout.Z
    xpos = {lab: i for i, lab in enumerate(layout.X)}
    ypos = {lab: i for i, lab in enumerate(layout.Y)}
    c_from_a = symmat.principal(A, [xpos[i] for i in z]) if z else None
    if z:
        c_from_b = symmat.principal(B, [ypos[i] for i in z])
        gap = float(np.max(np.abs(c_from_a - c_from_b)))
        if gap > OVERLAP_TOL:
            raise OverlapMismatch(f"overlap blocks differ by {gap:.3e}")
    q = layout.Q
    qpos = {lab: i for i, lab in enumerate(q)}
    size = len(q)
    prec = _embed(symmat.inverse(A), layout.X, qpos, size)
    prec += _embed(symmat.inverse(B), layout.Y, qpos, size)
    if z:
        prec -= _embed(symmat.inverse(c_from_a), z, qpos, size)
    return symmat.inverse(prec)


# -- clique sums ------------------------------------------------------------

def glue(g1: Graph, g2: Graph, s1, s2):
    """Identify ``s2[i]`` with ``s1[i]``; returns the glued graph and the relabelling of g2."""
    s1, s2 = list(s1), list(s2)
    if len(s1) != len(s2) or len(set(s1)) != len(s1) or len(set(s2)) != len(s2):
        raise ParameterError("clique vertex lists must be distinct and of equal length")
    if not g1.is_clique(s1) or not g2.is_clique(s2):
        raise ParameterError("glued vertex sets must induce cliques")
    mapping = dict(zip(s2, s1))
    nxt = g1.n
    for w in range(g2.n):
        if w not in mapping:
            mapping[w] = nxt
            nxt += 1
    edges = set(g1.edges)
    for u, v in g2.edges:
        a, b = mapping[u], mapping[v]
        edges.add((min(a, b), max(a, b)))
    return Graph.from_edges(nxt, edges), [mapping[w] for w in range(g2.n)]


def clique_sum_solve(sol1: GmrfSolution, sol2: GmrfSolution, s1, s2, x=None) -> GmrfSolution:
    """Solution on the clique sum of two solved graphs, by coupling their completions."""
    if not (sol1.spec.is_uniform and sol2.spec.is_uniform):
        raise ParameterError("clique sums are defined for uniform-x solutions")
    if sol1.spec.x != sol2.spec.x or (x is not None and float(x) != sol1.spec.x):
        raise ParameterError("solutions were computed at different x")
    glued, relabel = glue(sol1.graph, sol2.graph, s1, s2)
    layout = CouplingLayout(tuple(range(sol1.graph.n)), tuple(relabel))
    D = couple(sol1.A, sol2.A, layout)
    spec = CorrelationSpec.uniform(glued, sol1.spec.x)
    return make_solution(spec, D, "clique_sum", 0)


# -- chordal graphs ---------------------------------------------------------

def lex_bfs(g: Graph):
    """Lexicographic breadth-first search order (partition refinement)."""
    if g.n == 0:
        return []
    partition = [list(range(g.n))]
    order = []
    while partition:
        v = partition[0].pop(0)
        if not partition[0]:
            partition.pop(0)
        order.append(v)
        nbrs = g.adjacency[v]
        refined = []
        for part in partition:
            inside = [w for w in part if w in nbrs]
            outside = [w for w in part if w not in nbrs]
            refined += [p for p in (inside, outside) if p]
        partition = refined
    return order


def perfect_elimination_ordering(g: Graph):
    """Reverse Lex-BFS order, verified; raises :class:`NotChordal` otherwise."""
    peo = lex_bfs(g)[::-1]
    pos = {v: i for i, v in enumerate(peo)}
    for v in peo:
        later = [w for w in g.adjacency[v] if pos[w] > pos[v]]
        if not later:
            continue
        parent = min(later, key=pos.__getitem__)
        if any(w != parent and w not in g.adjacency[parent] for w in later):
            raise NotChordal(f"vertex {v} has a non-clique later neighbourhood")
    return peo


def is_chordal(g: Graph) -> bool:
    try:
        perfect_elimination_ordering(g)
    except NotChordal:
        return False
    return True


def maximal_cliques_chordal(g: Graph):
    peo = perfect_elimination_ordering(g)
    pos = {v: i for i, v in enumerate(peo)}
    cands = [
        frozenset([v] + [w for w in g.adjacency[v] if pos[w] > pos[v]]) for v in peo
    ]
    cliques = []
    for c in sorted(set(cands), key=lambda s: (-len(s), sorted(s))):
        if not any(c <= d for d in cliques):
            cliques.append(c)
    return [sorted(c) for c in cliques]


def clique_tree_order(cliques):
    """Prim order on the clique intersection graph (max weight); yields (clique, parent)."""
    k = len(cliques)
    sets = [set(c) for c in cliques]
    in_tree = [False] * k
    best = [-1] * k
    parent = [None] * k
    order = []
    current = 0
    for _ in range(k):
        in_tree[current] = True
        order.append((current, parent[current]))
        for j in range(k):
            if not in_tree[j]:
                w = len(sets[current] & sets[j])
                if w > best[j]:
                    best[j] = w
                    parent[j] = current
        rest = [j for j in range(k) if not in_tree[j]]
        if rest:
            current = max(rest, key=lambda j: (best[j], -j))
    return order


def chordal_solve(g: Graph, x) -> GmrfSolution:
    """Exact completion for a chordal graph, coupling maximal cliques along a clique tree.

    ``x`` is a uniform edge value or a mapping of per-edge values.
    """
    spec = CorrelationSpec.uniform(g, x) if np.isscalar(x) else CorrelationSpec.per_edge(g, x)
    cliques = maximal_cliques_chordal(g)
    full = spec.constrained_matrix()
    labels, D = None, None
    for idx, _parent in clique_tree_order(cliques):
        c = tuple(cliques[idx])
        block = symmat.principal(full, c)
        symmat.cholesky(block)
        if D is None:
            labels, D = c, block
            continue
        layout = CouplingLayout(labels, c)
        D = couple(D, block, layout)
        labels = layout.Q
    return make_solution(spec, D, "chordal_exact", len(cliques))
