"""Deterministic graph corpora used by the CLI, the audits and the test suite."""

from __future__ import annotations

import numpy as np

from .graph import (
    Graph,
    book_graph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    mobius_ladder,
    path_graph,
    petersen_graph,
    random_chordal,
    random_regular,
    random_tree,
)


def _seeds(seed, count):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def random_corpus(count=100, n_min=4, n_max=12, ps=(0.3, 0.6), seed=0):
    """``count`` Erdos-Renyi graphs with at least one edge; p cycles through ``ps``."""
    out = []
    draws = _seeds(seed, 4 * count)
    i = 0
    for s in draws:
        if len(out) == count:
            break
        rng = np.random.default_rng(s)
        n = int(rng.integers(n_min, n_max + 1))
        p = ps[i % len(ps)]
        g = erdos_renyi(n, p, s)
        if g.m == 0:
            continue
        out.append((f"gnp:{n},{p},seed={s}", g))
        i += 1
    return out


def random_trees(count=50, n_min=2, n_max=12, seed=0):
    out = []
    for s in _seeds(seed, count):
        n = int(np.random.default_rng(s).integers(n_min, n_max + 1))
        out.append((f"tree:{n},seed={s}", random_tree(n, s)))
    return out


def random_regular_corpus(count=30, ns=(8, 10, 12, 14, 16, 20), ds=(3, 4), seed=0):
    out = []
    for i, s in enumerate(_seeds(seed, count)):
        n, d = ns[i % len(ns)], ds[(i // len(ns)) % len(ds)]
        if n * d % 2:
            n += 1
        out.append((f"regular:{n},{d},seed={s}", random_regular(n, d, s)))
    return out


def random_chordal_corpus(count=30, n_min=4, n_max=12, seed=0):
    out = []
    for s in _seeds(seed, count):
        n = int(np.random.default_rng(s).integers(n_min, n_max + 1))
        out.append((f"chordal:{n},seed={s}", random_chordal(n, s)))
    return out


def standard_corpus():
    """Named small graphs covering trees, cycles, cliques, bipartite and transitive cases."""
    return [
        ("K2", complete_graph(2)),
        ("P3", path_graph(3)),
        ("P6", path_graph(6)),
        ("star5", complete_bipartite(1, 4)),
        ("C4", cycle_graph(4)),
        ("C5", cycle_graph(5)),
        ("C6", cycle_graph(6)),
        ("C8", cycle_graph(8)),
        ("K4", complete_graph(4)),
        ("K5", complete_graph(5)),
        ("K2,3", complete_bipartite(2, 3)),
        ("K3,3", complete_bipartite(3, 3)),
        ("book3", book_graph(3)),
        ("book5", book_graph(5)),
        ("petersen", petersen_graph()),
        ("mobius_ladder", mobius_ladder()),
        ("tree9", random_tree(9, 11)),
        ("cubic10", random_regular(10, 3, 5)),
        ("chordal8", random_chordal(8, 3)),
        ("gnp9", erdos_renyi(9, 0.5, 2)),
    ]


def vertex_transitive_corpus():
    return [
        ("C5", cycle_graph(5)),
        ("C6", cycle_graph(6)),
        ("C7", cycle_graph(7)),
        ("K4", complete_graph(4)),
        ("K5", complete_graph(5)),
        ("K3,3", complete_bipartite(3, 3)),
        ("K4,4", complete_bipartite(4, 4)),
        ("petersen", petersen_graph()),
    ]


def as_graphs(corpus) -> list[Graph]:
    return [g for _label, g in corpus]
