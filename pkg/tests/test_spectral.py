from __future__ import annotations

import itertools

import numpy as np
import pytest

from helpers import random_graph, random_invertible_graph
from homolumo.bridging import bridge
from homolumo.errors import InternalFaultError, NotInvertibleError
from homolumo.graph import builtin, fulvene, graph_from_adjacency, path_graph
from homolumo.linalg import rational_inverse
from homolumo.spectral import (
    batch_gaps,
    block_inverse,
    congruence_lmi_check,
    gap_from_eigenvalues,
    gap_via_inverse_sdp,
    homo_lumo_gap,
)

EXAMPLE_C = np.array([[0, 1, 1, 0], [1, 0, 1, 0], [1, 1, 0, 1], [0, 0, 1, 0]])


def test_gap_examples():
    assert homo_lumo_gap(fulvene()).gap == pytest.approx(0.872134, abs=1e-5)
    r = homo_lumo_gap(builtin("K2"))
    assert (r.lambda_plus, r.lambda_minus, r.gap, r.invertible) == (pytest.approx(1), pytest.approx(-1), pytest.approx(2), True)
    r = homo_lumo_gap(EXAMPLE_C)
    assert np.allclose(r.spectrum.eigenvalues, [2.1701, 0.3111, -1, -1.4812], atol=1e-4)
    assert r.gap == pytest.approx(1.3111, abs=1e-4)


def test_singular_graph_gap_zero():
    r = homo_lumo_gap(path_graph(3))
    assert not r.invertible and r.gap == 0


def test_float_exact_mismatch_is_fault():
    with pytest.raises(InternalFaultError):
        gap_from_eigenvalues(np.array([1.0, 0.0, -1.0]), invertible=True)
    with pytest.raises(InternalFaultError):
        gap_from_eigenvalues(np.array([1.0, -1.0]), invertible=False)


def test_gap_via_sdp_examples():
    assert gap_via_inverse_sdp(builtin("K2")).gap == pytest.approx(2, abs=1e-7)
    assert gap_via_inverse_sdp(fulvene()).gap == pytest.approx(0.872134, abs=1e-5)
    assert gap_via_inverse_sdp(path_graph(4)).gap == pytest.approx(5 ** 0.5 - 1, abs=1e-7)
    with pytest.raises(NotInvertibleError):
        gap_via_inverse_sdp(path_graph(3))


def test_gap_via_sdp_matches_eigen(rng):
    for _ in range(15):
        G = random_invertible_graph(rng, int(rng.integers(2, 15)))
        assert gap_via_inverse_sdp(G).gap == pytest.approx(homo_lumo_gap(G).gap, abs=1e-6)


def test_reciprocal_law(rng):
    for _ in range(30):
        G = random_invertible_graph(rng, int(rng.integers(2, 11)))
        r = homo_lumo_gap(G)
        inv = np.linalg.eigvalsh(rational_inverse(G.adjacency).to_numpy())
        assert r.lambda_plus * inv[-1] == pytest.approx(1, abs=1e-8)
        assert r.lambda_minus * inv[0] == pytest.approx(1, abs=1e-8)


def test_batch_gaps_agree(rng):
    mats = []
    for _ in range(40):
        G = random_graph(rng, 7)
        mats.append(G.adjacency)
    got = batch_gaps(np.array(mats, dtype=float))
    want = [homo_lumo_gap(A).gap for A in mats]
    assert np.allclose(got, want, atol=1e-9)


def test_block_inverse_zero_bridge():
    A, B = fulvene().adjacency, builtin("K2").adjacency
    bi = block_inverse(A, B, np.zeros((6, 2), dtype=int))
    Ai, Bi = np.linalg.inv(A), np.linalg.inv(B)
    assert np.allclose(bi.C_inv, np.block([[Ai, np.zeros((6, 2))], [np.zeros((2, 6)), Bi]]), atol=1e-12)


def test_block_inverse_example():
    K2 = builtin("K2").adjacency
    bi = block_inverse(K2, K2, np.array([[1, 0], [1, 0]]))
    assert np.abs(bi.C_inv - np.linalg.inv(EXAMPLE_C)).max() < 1e-10
    assert np.allclose(bi.Q @ bi.Z, np.eye(4), atol=1e-10)
    with pytest.raises(NotInvertibleError):
        block_inverse(K2, path_graph(3).adjacency, np.zeros((2, 3), dtype=int))


def _check_invariants(A, B, K, bi):
    n, m = A.shape[0], B.shape[0]
    C = np.block([[A, K], [K.T, B]])
    D = np.block([[bi.S_inv, np.zeros((n, m))], [np.zeros((m, n)), bi.B_inv]])
    assert np.abs(bi.Q @ bi.Z - np.eye(n + m)).max() < 1e-10
    assert np.abs(bi.C_inv - bi.Q.T @ D @ bi.Q).max() < 1e-9
    assert np.abs(C @ bi.C_inv - np.eye(n + m)).max() < 1e-9


def test_block_inverse_all_bridges_k2():
    K2 = builtin("K2").adjacency
    for bits in itertools.product((0, 1), repeat=4):
        K = np.array(bits).reshape(2, 2)
        C = np.block([[K2, K], [K.T, K2]])
        bi = block_inverse(K2, K2, K)
        assert (bi is None) == (rational_inverse(C) is None)
        if bi is not None:
            _check_invariants(K2, K2, K, bi)


def test_block_inverse_random(rng):
    done = 0
    while done < 200:
        GA = random_invertible_graph(rng, int(rng.integers(2, 7)))
        GB = random_invertible_graph(rng, int(rng.integers(2, 7)))
        K = (rng.random((GA.n, GB.n)) < 0.4).astype(int)
        bi = block_inverse(GA.adjacency, GB.adjacency, K)
        C = bridge(GA, GB, K)
        assert (bi is None) == (rational_inverse(C.adjacency) is None)
        if bi is not None:
            _check_invariants(GA.adjacency, GB.adjacency, K, bi)
        done += 1


def test_congruence_check():
    G = fulvene()
    bi = block_inverse(G.adjacency, builtin("K2").adjacency, np.zeros((6, 2), dtype=int))
    C = graph_from_adjacency(np.block([[G.adjacency, np.zeros((6, 2), int)], [np.zeros((2, 6), int), builtin("K2").adjacency]]))
    r = homo_lumo_gap(C)
    assert congruence_lmi_check(bi, 0.0, 0.0) == (True, True)
    assert congruence_lmi_check(bi, r.lambda_plus, -r.lambda_minus) == (True, True)
    assert congruence_lmi_check(bi, r.lambda_plus * 1.01, 0) == (False, True)
    assert congruence_lmi_check(bi, 0, -r.lambda_minus * 1.01) == (True, False)
    with pytest.raises(ValueError):
        congruence_lmi_check(bi, -1, 0)


def test_congruence_check_random_bridges(rng):
    for _ in range(30):
        GA = random_invertible_graph(rng, int(rng.integers(2, 6)))
        GB = random_invertible_graph(rng, int(rng.integers(2, 6)))
        K = (rng.random((GA.n, GB.n)) < 0.4).astype(int)
        bi = block_inverse(GA.adjacency, GB.adjacency, K)
        if bi is None:
            continue
        r = homo_lumo_gap(bridge(GA, GB, K))
        for f in (0.5, 0.99, 1.02, 1.5):
            ok_mu, ok_eta = congruence_lmi_check(bi, f * r.lambda_plus, f * -r.lambda_minus)
            assert ok_mu == ok_eta == (f < 1)
