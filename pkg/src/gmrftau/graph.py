"""Simple undirected graphs, generators and structural queries.

Vertices are ``0..n-1``; edges are stored as sorted pairs ``(u, v)`` with
``u < v`` in lexicographic order, so iteration is deterministic.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ParameterError, SizeGuardError

HOM_GUARD = 10**8


def _norm_edge(u, v):
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError("vertex count must be nonnegative")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ParameterError(f"loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ParameterError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u > v:
                raise ParameterError("edges must be stored with the smaller index first")
            if (u, v) in seen:
                raise ParameterError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
        if list(self.edges) != sorted(self.edges):
            raise ParameterError("edges must be sorted")

    @classmethod
    def from_edges(cls, n, edges):
        """Build a graph from any iterable of vertex pairs (duplicates and loops rejected)."""
        normed = [_norm_edge(u, v) for u, v in edges]
        if len(set(normed)) != len(normed):
            raise ParameterError("duplicate edge in edge list")
        return cls(int(n), tuple(sorted(normed)))

    # -- basic queries -------------------------------------------------

    @property
    def m(self):
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        nbrs = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def edge_index(self) -> dict:
        return {e: i for i, e in enumerate(self.edges)}

    def has_edge(self, u, v):
        return _norm_edge(u, v) in self.edge_set

    def neighbors(self, u):
        return sorted(self.adjacency[u])

    def degree(self, u):
        return len(self.adjacency[u])

    @property
    def degrees(self):
        return [len(a) for a in self.adjacency]

    @property
    def max_degree(self):
        return max(self.degrees, default=0)

    @property
    def average_degree(self):
        return 2 * self.m / self.n if self.n else 0.0

    def non_edges(self):
        """All vertex pairs ``u < v`` that are not edges, lexicographically."""
        es = self.edge_set
        return [(u, v) for u, v in itertools.combinations(range(self.n), 2) if (u, v) not in es]

    def adjacency_matrix(self, dtype=float):
        a = np.zeros((self.n, self.n), dtype=dtype)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def laplacian(self, dtype=float):
        a = self.adjacency_matrix(dtype)
        return np.diag(a.sum(axis=1)) - a

    def is_regular(self):
        degs = self.degrees
        return bool(degs) and min(degs) == max(degs)

    def components(self):
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            comp, queue = [], deque([s])
            seen[s] = True
            while queue:
                u = queue.popleft()
                comp.append(u)
                for w in self.adjacency[u]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self):
        return self.n <= 1 or len(self.components()) == 1

    def is_forest(self):
        return self.m == self.n - len(self.components())

    def is_tree(self):
        return self.n >= 1 and self.is_connected() and self.m == self.n - 1

    def bipartition(self):
        """Two-colouring as a list of 0/1, or None if the graph has an odd cycle."""
        colour = [-1] * self.n
        for s in range(self.n):
            if colour[s] >= 0:
                continue
            colour[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if colour[w] < 0:
                        colour[w] = 1 - colour[u]
                        queue.append(w)
                    elif colour[w] == colour[u]:
                        return None
        return colour

    def is_bipartite(self):
        return self.bipartition() is not None

    def induced(self, vertices):
        """Induced subgraph, relabelled in the order given."""
        pos = {v: i for i, v in enumerate(vertices)}
        return Graph.from_edges(
            len(vertices), [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        )

    def is_clique(self, vertices):
        return all(self.has_edge(u, v) for u, v in itertools.combinations(vertices, 2))

    def describe(self):
        return f"n={self.n} m={self.m}"


# -- structural operations ---------------------------------------------

def girth(g: Graph) -> float:
    """Length of a shortest cycle; ``math.inf`` for forests."""
    best = math.inf
    for s in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in g.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def _extend_automorphism(g: Graph, mapping: dict) -> bool:
    """Backtracking search for an automorphism extending a partial vertex map."""
    if len(mapping) == g.n:
        return True
    u = next(v for v in range(g.n) if v not in mapping)
    used = set(mapping.values())
    for w in range(g.n):
        if w in used or g.degree(w) != g.degree(u):
            continue
        if all((a in g.adjacency[u]) == (b in g.adjacency[w]) for a, b in mapping.items()):
            mapping[u] = w
            if _extend_automorphism(g, mapping):
                return True
            del mapping[u]
    return False


def is_vertex_transitive(g: Graph, max_n=20) -> bool:
    """True if every vertex is the image of vertex 0 under some automorphism."""
    if g.n > max_n:
        raise SizeGuardError(f"automorphism search limited to n <= {max_n}")
    if g.n <= 1:
        return True
    if not g.is_regular():
        return False
    return all(_extend_automorphism(g, {0: v}) for v in range(1, g.n))


def is_edge_transitive(g: Graph, max_n=20) -> bool:
    """True if every edge is the image of the first edge under some automorphism."""
    if g.n > max_n:
        raise SizeGuardError(f"automorphism search limited to n <= {max_n}")
    if g.m <= 1:
        return True
    a, b = g.edges[0]
    return all(
        _extend_automorphism(g, {a: u, b: v}) or _extend_automorphism(g, {a: v, b: u})
        for u, v in g.edges[1:]
    )


def delete_edge(g: Graph, e) -> Graph:
    e = _norm_edge(*e)
    if e not in g.edge_set:
        raise ParameterError(f"{e} is not an edge")
    return Graph(g.n, tuple(f for f in g.edges if f != e))


def contract_edge(g: Graph, e) -> Graph:
    """Merge the endpoints of ``e`` into the smaller index; loops and parallel edges dropped."""
    u, v = _norm_edge(*e)
    if (u, v) not in g.edge_set:
        raise ParameterError(f"{(u, v)} is not an edge")

    def relabel(w):
        if w == v:
            w = u
        return w - 1 if w > v else w

    new_edges = set()
    for a, b in g.edges:
        a, b = relabel(a), relabel(b)
        if a != b:
            new_edges.add(_norm_edge(a, b))
    return Graph(g.n - 1, tuple(sorted(new_edges)))


def disjoint_union(g: Graph, h: Graph) -> Graph:
    return Graph.from_edges(g.n + h.n, list(g.edges) + [(u + g.n, v + g.n) for u, v in h.edges])


def hom_density(g: Graph, h: Graph) -> Fraction:
    """Probability that a uniform random map V(g) -> V(h) sends edges to edges (exact)."""
    if h.n < 1:
        raise ParameterError("target graph must have at least one vertex")
    total = h.n**g.n
    if total > HOM_GUARD:
        raise SizeGuardError(f"{h.n}^{g.n} maps exceed the brute-force guard {HOM_GUARD}")
    if g.m == 0:
        return Fraction(1)
    adj = h.adjacency_matrix(dtype=bool)
    # enumerate maps in chunks keyed on the first few vertices
    lead = 0
    while lead < g.n and h.n ** (g.n - lead) > 10**6:
        lead += 1
    tail = g.n - lead
    tail_maps = np.indices((h.n,) * tail).reshape(tail, -1).T if tail else np.zeros((1, 0), int)
    count = 0
    for prefix in itertools.product(range(h.n), repeat=lead):
        maps = np.empty((tail_maps.shape[0], g.n), dtype=np.int64)
        maps[:, :lead] = prefix
        maps[:, lead:] = tail_maps
        ok = np.ones(maps.shape[0], dtype=bool)
        for u, v in g.edges:
            ok &= adj[maps[:, u], maps[:, v]]
        count += int(ok.sum())
    return Fraction(count, total)


# -- generators ----------------------------------------------------------

def path_graph(n):
    if n < 1:
        raise ParameterError("path needs n >= 1")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    if n < 3:
        raise ParameterError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    if n < 1:
        raise ParameterError("complete graph needs n >= 1")
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def complete_bipartite(a, b):
    if a < 1 or b < 1:
        raise ParameterError("complete bipartite graph needs both sides nonempty")
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def book_graph(k):
    """K_{1,1,k}: ``k`` triangles sharing the spine edge (0, 1)."""
    if k < 1:
        raise ParameterError("book graph needs k >= 1")
    edges = [(0, 1)]
    for p in range(2, k + 2):
        edges += [(0, p), (1, p)]
    return Graph.from_edges(k + 2, edges)


def mobius_ladder():
    """K_{5,5} minus a Hamiltonian 10-cycle (left side 0..4, right side 5..9)."""
    ham = set()
    for i in range(5):
        ham.add((i, 5 + i))
        ham.add((i, 5 + (i - 1) % 5))
    edges = [(i, 5 + j) for i in range(5) for j in range(5) if (i, 5 + j) not in ham]
    return Graph.from_edges(10, edges)


def petersen_graph():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def random_tree(n, seed):
    """Uniform labelled tree via a random Prüfer sequence."""
    if n < 1:
        raise ParameterError("tree needs n >= 1")
    if n <= 2:
        return path_graph(n)
    rng = np.random.default_rng(seed)
    seq = [int(s) for s in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    edges = []
    for s in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, s))
        degree[leaf] -= 1
        degree[s] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return Graph.from_edges(n, edges)


def random_regular(n, d, seed, max_tries=10_000):
    """Pairing model with rejection of loops and multi-edges."""
    if d < 0 or d >= n:
        raise ParameterError(f"need 0 <= d < n (got n={n}, d={d})")
    if (n * d) % 2:
        raise ParameterError("n*d must be even")
    rng = np.random.default_rng(seed)
    points = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        perm = rng.permutation(points)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        normed = {_norm_edge(a, b) for a, b in pairs}
        if len(normed) == len(pairs):
            return Graph(n, tuple(sorted(normed)))
    raise ParameterError(f"pairing model failed {max_tries} times for n={n}, d={d}")


def erdos_renyi(n, p, seed):
    if n < 1 or not 0 <= p <= 1:
        raise ParameterError("need n >= 1 and 0 <= p <= 1")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])


def random_chordal(n, seed):
    """Chordal graph grown by attaching each new vertex to a random sub-clique."""
    if n < 1:
        raise ParameterError("need n >= 1")
    rng = np.random.default_rng(seed)
    cliques = [[0]]
    edges = []
    for v in range(1, n):
        base = cliques[int(rng.integers(len(cliques)))]
        size = int(rng.integers(1, len(base) + 1))
        chosen = sorted(int(c) for c in rng.choice(base, size=size, replace=False))
        edges += [(c, v) for c in chosen]
        cliques.append(chosen + [v])
    return Graph.from_edges(n, edges)


_FAMILIES = {
    "path": (path_graph, 1, False),
    "cycle": (cycle_graph, 1, False),
    "complete": (complete_graph, 1, False),
    "complete_bipartite": (complete_bipartite, 2, False),
    "book": (book_graph, 1, False),
    "mobius_ladder": (mobius_ladder, 0, False),
    "petersen": (petersen_graph, 0, False),
    "random_tree": (random_tree, 1, True),
    "random_regular": (random_regular, 2, True),
    "erdos_renyi": (erdos_renyi, 2, True),
    "random_chordal": (random_chordal, 1, True),
}

FAMILIES = tuple(_FAMILIES)


def generate(family, params=(), seed=None) -> Graph:
    """Build a graph from a named family. Random families require ``seed``."""
    try:
        fn, arity, random = _FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    params = list(params)
    if len(params) != arity:
        raise ParameterError(f"{family} takes {arity} parameter(s), got {len(params)}")
    if family != "erdos_renyi":
        if any(float(p) != int(p) for p in params):
            raise ParameterError(f"{family} parameters must be integers")
        params = [int(p) for p in params]
    else:
        params = [int(params[0]), float(params[1])]
    if random:
        if seed is None:
            raise ParameterError(f"{family} requires a seed")
        return fn(*params, seed=seed)
    return fn(*params)


# -- edge-list I/O --------------------------------------------------------

def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"] + [f"e {u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "n" or len(parts) != 2:
                raise ParameterError(f"line {lineno}: expected 'n <N>'")
            n = int(parts[1])
        elif parts[0] == "e" and len(parts) == 3:
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ParameterError(f"line {lineno}: expected 'e <u> <v>'")
    if n is None:
        raise ParameterError("missing 'n <N>' header")
    return Graph.from_edges(n, edges)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_edge_list(g))
