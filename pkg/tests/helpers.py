"""Random instance generators shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from homolumo.bridging import BridgeProblem, ConstraintSet, enumerate_bridgeable_subsets
from homolumo.graph import Graph, graph_from_edges
from homolumo.linalg import determinant


def random_graph(rng, n: int, p: float = 0.5) -> Graph:
    edges = [(i, j) for i, j in itertools.combinations(range(1, n + 1), 2) if rng.random() < p]
    return graph_from_edges(n, edges)


def random_invertible_graph(rng, n: int, p: float = 0.5) -> Graph:
    while True:
        G = random_graph(rng, n, p)
        if determinant(G.adjacency) != 0:
            return G


def random_problem(rng, max_n: int = 6, max_m: int = 6, max_k: int = 2, constrained: bool = True) -> BridgeProblem:
    """Random instance with invertible G_A and an arbitrarily bridgeable subset of G_B."""
    while True:
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(2, max_m + 1))
        k = int(rng.integers(1, min(max_k, m // 2) + 1))
        GA = random_invertible_graph(rng, n)
        GB = random_invertible_graph(rng, m)
        subsets = enumerate_bridgeable_subsets(GB, k)
        if not subsets:
            continue
        bv = subsets[int(rng.integers(len(subsets)))]
        cs = ConstraintSet()
        if constrained:
            r = rng.random()
            if r < 0.3:
                cs = ConstraintSet(max_degree=int(rng.integers(2, 5)))
            elif r < 0.45:
                cs = ConstraintSet(row_bounds=tuple((0, int(rng.integers(0, k + 1))) for _ in range(n)))
            elif r < 0.6:
                cs = ConstraintSet(col_bounds=tuple(
                    (lo, lo + int(rng.integers(0, 3))) for lo in rng.integers(0, 2, size=k)))
        return BridgeProblem(GA, GB, bv, cs)


def all_bridges(p: BridgeProblem):
    """Every 0/1 block on the bridge columns as full n x m matrices (brute force)."""
    cols = list(p.bridge_cols)
    for bits in itertools.product((0, 1), repeat=p.n * p.k_B):
        K = np.zeros((p.n, p.m), dtype=np.int64)
        K[:, cols] = np.array(bits).reshape(p.n, p.k_B)
        yield K
