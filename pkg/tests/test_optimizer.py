from __future__ import annotations

import math

import numpy as np
import pytest

from helpers import all_bridges, random_problem
from homolumo.bridging import BridgeProblem, ConstraintSet, bridge, format_bridging, validate_bridge
from homolumo.errors import BudgetExceededError, InfeasibleError
from homolumo.graph import builtin, comb_graph, fulvene, path_graph
from homolumo.optimizer import (
    bounds_report,
    enumerate_opt_gap,
    exact_opt_gap,
    gamma_star,
    lower_bound,
    omega_star_binary,
    omega_star_relaxed,
    upper_bound_sdp,
)
from homolumo.spectral import homo_lumo_gap

K2 = builtin("K2")
F0 = fulvene()
P4 = path_graph(4)


def brute_force(p: BridgeProblem):
    """Best gap and lexicographically smallest optimal K over all feasible bridges."""
    best, best_key = -math.inf, None
    for K in all_bridges(p):
        if not validate_bridge(p, K):
            continue
        g = homo_lumo_gap(bridge(p.GA, p.GB, K)).gap
        key = tuple(K.ravel())
        if g > best + 1e-9 or (abs(g - best) <= 1e-9 and key < best_key):
            best, best_key = max(g, best), key
    return best, best_key


def test_example_k2():
    p = BridgeProblem(K2, K2, (1,))
    for sol in (exact_opt_gap(p), enumerate_opt_gap(p)):
        assert sol.gap == pytest.approx(1.3111, abs=1e-4)
        assert sol.K_opt.K.tolist() == [[1, 0], [1, 0]]
        assert sol.mu + sol.eta == pytest.approx(sol.gap, abs=1e-7)
        assert np.allclose(sol.spectrum.eigenvalues, [2.1701, 0.3111, -1, -1.4812], atol=1e-4)
    assert enumerate_opt_gap(p).leaves_evaluated == 3


def test_fulvene_14():
    p = BridgeProblem(F0, F0, (1, 4))
    sol = exact_opt_gap(p)
    assert sol.gap == pytest.approx(0.85828, abs=1e-5)
    assert format_bridging(sol.K_opt, p.bridge_vertices) == "1↦∅; 4↦3,5,6"


def test_bridge_order_does_not_matter():
    a = exact_opt_gap(BridgeProblem(F0, F0, (1, 4)))
    b = exact_opt_gap(BridgeProblem(F0, F0, (4, 1)))
    assert a.K_opt == b.K_opt and a.gap == b.gap


def test_max_degree_instance():
    p = BridgeProblem(P4, P4, (2, 3), ConstraintSet(max_degree=3))
    sol = exact_opt_gap(p)
    assert sol.gap == pytest.approx(0.954520, abs=1e-6)
    assert bridge(P4, P4, sol.K_opt).degrees().max() <= 3


def test_infeasible_and_budget():
    p = BridgeProblem(K2, K2, (1,), ConstraintSet(col_bounds=((0, 0),)))
    for fn in (exact_opt_gap, enumerate_opt_gap, upper_bound_sdp, omega_star_binary, omega_star_relaxed):
        with pytest.raises(InfeasibleError):
            fn(p)
    with pytest.raises(InfeasibleError):
        bounds_report(p)
    q = BridgeProblem(path_graph(12), P4, (2, 3))
    with pytest.raises(BudgetExceededError):
        enumerate_opt_gap(q)
    with pytest.raises(BudgetExceededError):
        exact_opt_gap(BridgeProblem(F0, F0, (1, 2)), max_nodes=3)


def test_exact_matches_brute_force(rng):
    for _ in range(12):
        p = random_problem(rng, max_n=4, max_m=5)
        want, key = brute_force(p)
        if key is None:
            with pytest.raises(InfeasibleError):
                exact_opt_gap(p)
            continue
        for sol in (exact_opt_gap(p), enumerate_opt_gap(p)):
            assert sol.gap == pytest.approx(want, abs=1e-9)
            assert tuple(sol.K_opt.K.ravel()) == key


def test_bnb_sanity(rng):
    for _ in range(6):
        p = random_problem(rng)
        try:
            sol = exact_opt_gap(p)
        except InfeasibleError:
            continue
        assert sol.nodes_explored <= 2 ** (p.n * p.k_B + 1)
        h = sol.incumbent_history
        assert all(a <= b for a, b in zip(h, h[1:]))
        assert validate_bridge(p, sol.K_opt)


def test_gamma_star():
    assert gamma_star(1, 1, 0) == pytest.approx(1)
    assert gamma_star(1, 1, 1) == pytest.approx((3 + 5 ** 0.5) / 2)
    assert gamma_star(1, 1, 2) > gamma_star(1, 1, 1)
    assert gamma_star(2, 0.5, 0) == pytest.approx(2)
    for bad in ((0, 1, 1), (1, -1, 1), (1, 1, -0.1), (1, 1, math.nan)):
        with pytest.raises(ValueError):
            gamma_star(*bad)


def test_gamma_star_is_top_eigenvalue(rng):
    for _ in range(50):
        p, q = rng.integers(1, 6, size=2)
        D = rng.normal(size=(p, q))
        a, b = rng.uniform(0.1, 3, size=2)
        M = np.block([[a * np.eye(p), -a * D], [-a * D.T, a * D.T @ D + b * np.eye(q)]])
        om = np.linalg.eigvalsh(D.T @ D)[-1]
        assert gamma_star(a, b, om) == pytest.approx(np.linalg.eigvalsh(M)[-1], rel=1e-10)


def test_lower_bound_examples():
    p = BridgeProblem(F0, F0, (1, 2))
    assert lower_bound(p, "binary") == pytest.approx(0.233688, abs=1e-6)
    assert lower_bound(p, "relaxed") == pytest.approx(0.531664, abs=1e-6)
    q = BridgeProblem(P4, P4, (2, 3))
    assert lower_bound(q, "binary") == pytest.approx(0.472136, abs=1e-6)
    assert lower_bound(q, "relaxed") == pytest.approx(0.86953, abs=1e-5)
    r = BridgeProblem(K2, K2, (1,))
    assert omega_star_binary(r)[0] == pytest.approx(1)
    assert lower_bound(r, "binary") == pytest.approx(3 - 5 ** 0.5, abs=1e-12)
    with pytest.raises(ValueError):
        lower_bound(r, "other")


def test_omega_binary_matches_enumeration(rng):
    for _ in range(25):
        p = random_problem(rng, max_n=5, max_m=6, max_k=3)
        best = math.inf
        for K in all_bridges(p):
            if validate_bridge(p, K):
                D = K @ p.B_inv
                best = min(best, np.linalg.eigvalsh(D.T @ D)[-1])
        if best == math.inf:
            with pytest.raises(InfeasibleError):
                omega_star_binary(p)
            continue
        om, K = omega_star_binary(p)
        assert om == pytest.approx(best, abs=1e-10)
        assert validate_bridge(p, K)
        D = K.K @ p.B_inv
        assert np.linalg.eigvalsh(D.T @ D)[-1] == pytest.approx(om, abs=1e-10)
        assert omega_star_relaxed(p) <= om + 1e-7


def test_upper_bound_examples():
    assert upper_bound_sdp(BridgeProblem(K2, K2, (1,))) == pytest.approx(1.67597, abs=1e-5)
    assert upper_bound_sdp(BridgeProblem(P4, P4, (2, 3))) == pytest.approx(5 ** 0.5 - 1, abs=1e-6)


@pytest.mark.parametrize(
    "GA, GB, bv, expected",
    [
        (F0, F0, (1, 4), (0.333126, 0.72678, 0.85828, 0.87214)),
        (comb_graph(4), P4, (2,), (0.38832, 0.73094, 0.93258, 0.95452)),
    ],
)
def test_bounds_report(GA, GB, bv, expected):
    rep = bounds_report(BridgeProblem(GA, GB, bv))
    got = (rep.lower_sdp, rep.lower_sir, rep.opt, rep.upper_sdp)
    assert got == pytest.approx(expected, abs=1e-5)
    assert rep.upper_sir == rep.opt
    assert not rep.sandwich_violations()
    assert rep.omega_star_relaxed <= rep.omega_star_binary + 1e-9
    assert set(rep.timings) >= {"omega_binary", "omega_relaxed", "upper_sdp", "exact"}


def test_bounds_report_without_exact():
    rep = bounds_report(BridgeProblem(K2, K2, (1,)), include_exact=False)
    assert rep.opt is None and rep.solution is None
    assert [k for k, _ in rep.chain()] == ["lower_sdp", "lower_sir", "upper_sdp", "gap_of_GA"]
