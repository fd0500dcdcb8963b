from __future__ import annotations

import numpy as np
import pytest

from helpers import random_invertible_graph, random_problem
from homolumo.bridging import (
    BridgeProblem,
    ConstraintSet,
    bridge,
    enumerate_bridgeable_subsets,
    exact_inverse,
    format_bridging,
    is_arbitrarily_bridgeable,
    kbk_zero_check,
    parse_bridging,
    validate_bridge,
)
from homolumo.errors import NotBridgeableError, NotInvertibleError
from homolumo.graph import BipartiteBridge, builtin, comb_graph, fulvene, path_graph
from homolumo.linalg import symmetric_eigen
from homolumo.reference import FULVENE_BRIDGEABLE
from homolumo.spectral import block_inverse

K2 = builtin("K2")


def test_bridge_zero_is_disjoint_union():
    G = bridge(fulvene(), path_graph(4), np.zeros((6, 4), dtype=int))
    ev = symmetric_eigen(G.adjacency).eigenvalues
    union = np.sort(np.concatenate([symmetric_eigen(fulvene().adjacency).eigenvalues,
                                    symmetric_eigen(path_graph(4).adjacency).eigenvalues]))[::-1]
    assert np.allclose(ev, union, atol=1e-9)


def test_example_bridge_spectrum():
    G = bridge(K2, K2, np.array([[1, 0], [1, 0]]))
    assert np.allclose(symmetric_eigen(G.adjacency).eigenvalues, [2.1701, 0.3111, -1, -1.4812], atol=1e-4)
    with pytest.raises(ValueError):
        bridge(K2, K2, np.zeros((2, 3), dtype=int))


def test_comb_bridge_has_four_cycle():
    T, P4 = comb_graph(4), path_graph(4)
    A = bridge(T, P4, parse_bridging("2↦3,8", 8, 4)).adjacency
    # G_B vertex 2 is vertex 10 of G_C; 3-4 is a path edge and 8 is the pendant of 4
    cycle = [10, 3, 4, 8]
    assert all(A[u - 1, v - 1] for u, v in zip(cycle, cycle[1:] + cycle[:1]))
    # T itself is a tree, so every cycle of G_C uses the new edges
    assert np.trace(np.linalg.matrix_power(T.adjacency, 4)) < np.trace(np.linalg.matrix_power(A, 4))


def test_bridgeable_examples():
    assert is_arbitrarily_bridgeable(K2, {1})
    assert is_arbitrarily_bridgeable(fulvene(), {1, 2})
    assert not is_arbitrarily_bridgeable(K2, {1, 2})
    assert not is_arbitrarily_bridgeable(path_graph(4), {1, 2, 3})
    assert enumerate_bridgeable_subsets(K2, 1) == [(1,), (2,)]
    for k, expected in FULVENE_BRIDGEABLE.items():
        assert enumerate_bridgeable_subsets(fulvene(), k) == expected
    with pytest.raises(NotInvertibleError):
        is_arbitrarily_bridgeable(path_graph(3), {1})
    with pytest.raises(ValueError):
        enumerate_bridgeable_subsets(fulvene(), 4)


def test_bridgeability_permutation_invariant(rng):
    for _ in range(40):
        G = random_invertible_graph(rng, int(rng.integers(2, 9)))
        perm = rng.permutation(G.n) + 1
        mapping = {v + 1: int(perm[v]) for v in range(G.n)}
        H = G.relabel(mapping)
        for k in range(1, G.n // 2 + 1):
            mapped = sorted(tuple(sorted(mapping[v] for v in s)) for s in enumerate_bridgeable_subsets(G, k))
            assert mapped == enumerate_bridgeable_subsets(H, k)


def test_kbk_zero_check():
    F = fulvene()
    assert kbk_zero_check(F, (1, 2), np.zeros((3, 6), dtype=int))
    K = np.zeros((1, 6), dtype=int)
    K[0, [1, 2]] = 1
    assert not kbk_zero_check(F, (2, 3), K)
    with pytest.raises(ValueError):
        kbk_zero_check(F, (1,), K)


def test_bridgeable_supported_bridges_keep_schur_equal_a(rng):
    for _ in range(40):
        p = random_problem(rng, constrained=False)
        K = np.zeros((p.n, p.m), dtype=int)
        K[:, list(p.bridge_cols)] = rng.integers(0, 2, size=(p.n, p.k_B))
        assert kbk_zero_check(p.GB, p.bridge_vertices, K)
        bi = block_inverse(p.GA.adjacency, p.GB.adjacency, K)
        assert bi is not None
        assert np.abs(bi.S_inv - p.A_inv).max() < 1e-10


def test_problem_validation():
    with pytest.raises(NotBridgeableError):
        BridgeProblem(fulvene(), fulvene(), (2, 3))
    with pytest.raises(NotBridgeableError):
        BridgeProblem(K2, path_graph(4), (1, 2, 3))
    with pytest.raises(NotInvertibleError):
        BridgeProblem(path_graph(3), K2, (1,))
    with pytest.raises(NotInvertibleError):
        BridgeProblem(K2, path_graph(3), (1,))
    with pytest.raises(ValueError):
        BridgeProblem(K2, fulvene(), (1, 1))
    with pytest.raises(ValueError):
        BridgeProblem(K2, K2, (1,), ConstraintSet(row_bounds=((0, 1),)))
    with pytest.raises(ValueError):
        ConstraintSet(row_bounds=((2, 1),))


def test_validate_bridge():
    p = BridgeProblem(K2, K2, (1,))
    assert not validate_bridge(p, np.zeros((2, 2), dtype=int))
    assert validate_bridge(p, np.array([[1, 0], [1, 0]])).ok
    r = validate_bridge(p, np.array([[1, 1], [0, 0]]))
    assert not r and any("non-bridge" in v for v in r.violations)
    P4 = path_graph(4)
    q = BridgeProblem(P4, P4, (2, 3), ConstraintSet(max_degree=3))
    K = np.zeros((4, 4), dtype=int)
    K[1, 1] = K[1, 2] = 1  # G_A vertex 2 reaches degree 4
    r = validate_bridge(q, K)
    assert not r.ok and any("degree of G_A vertex 2 is 4" in v for v in r.violations)
    q2 = BridgeProblem(P4, P4, (2, 3), ConstraintSet(row_bounds=((0, 1),) * 4, col_bounds=((1, 1), (0, 0))))
    r = validate_bridge(q2, K)
    assert len(r.violations) == 2  # row 2 over its cap, bridge vertex 3 must stay unused


def test_linear_rows_and_limits():
    P4 = path_graph(4)
    q = BridgeProblem(P4, P4, (2, 3), ConstraintSet(max_degree=3))
    row_lo, row_hi, col_lo, col_hi = q.edge_count_limits()
    assert row_hi.tolist() == [2, 1, 1, 2] and col_hi.tolist() == [1, 1]
    labels = [r[3] for r in q.linear_rows()]
    assert labels[0] == "sum K >= 1"
    assert "edges at G_A vertex 1" not in labels and "edges at G_A vertex 2" in labels


def test_untouched_degree_violations():
    p = BridgeProblem(path_graph(4), path_graph(4), (2, 3), ConstraintSet(max_degree=1))
    assert len(p.untouched_degree_violations()) == 2  # G_A vertices 2 and 3


def test_bridging_notation_roundtrip():
    K = np.zeros((6, 6), dtype=int)
    K[[3, 4, 5], 3] = 1
    s = format_bridging(K, (1, 4))
    assert s == "1↦∅; 4↦4,5,6"
    assert parse_bridging(s, 6, 6) == BipartiteBridge(K)
    assert parse_bridging("1->2", 2, 2).K.tolist() == [[0, 0], [1, 0]]
    for bad in ("1:2", "3↦1", "1↦7"):
        with pytest.raises(ValueError):
            parse_bridging(bad, 6, 2)


def test_exact_inverse_error():
    with pytest.raises(NotInvertibleError):
        exact_inverse(path_graph(5))


def test_bifulvene_is_a_bridged_fulvene_pair():
    F1 = builtin("F1")
    straight = np.zeros((6, 6), dtype=int)
    straight[[0, 1], [0, 1]] = 1
    cross = np.zeros((6, 6), dtype=int)
    cross[[0, 1], [1, 0]] = 1
    assert bridge(fulvene(), fulvene(), straight).edges == F1.edges
    # the two joins are isomorphic (1<->2, 3<->5 is a fulvene automorphism)
    ev = np.linalg.eigvalsh(F1.adjacency)
    assert np.allclose(ev, np.linalg.eigvalsh(bridge(fulvene(), fulvene(), cross).adjacency), atol=1e-12)
    assert is_arbitrarily_bridgeable(fulvene(), {1, 2})
