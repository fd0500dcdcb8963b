"""Optimal bridges: branch-and-bound, enumeration, and the gap bounds.

All searches work on the n x k_B block of K at the bridge columns, indexed
row-major.  Bridge vertices are handled in increasing label order so that
the row-major order of the block agrees with that of the full K, which the
lexicographic tie-break is defined on.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bridging import BridgeProblem, bridge, validate_bridge
from .errors import BudgetExceededError, InfeasibleError, InternalFaultError, SolverError
from .graph import BipartiteBridge
from .linalg import Spectrum, symmetric_eigen
from .sdp import SdpSettings, SdpSolution, SdpStatus, solve_sdp
from .sdp.lmis import all_free, assemble_bridged_gap_lmis, assemble_omega_lmi, is_integral, presolve
from .spectral import batch_gaps, homo_lumo_gap

ENUM_BUDGET_BITS = 22
TIE_TOL = 1e-9
# Nodes are pruned only when their bound is clearly below the incumbent, so
# that every tied optimum is reached and the lexicographic tie-break is exact.
PRUNE_SLACK = 1e-6
SANDWICH_SLACK = 1e-6


@dataclass(frozen=True)
class BridgeSolution:
    K_opt: BipartiteBridge
    gap: float
    mu: float
    eta: float
    spectrum: Spectrum
    nodes_explored: int
    wall_time: float
    method: str = "bnb"
    leaves_evaluated: int = 0
    incumbent_history: tuple[float, ...] = ()


@dataclass(frozen=True)
class BoundsReport:
    lower_sdp: float
    lower_sir: float
    opt: float | None
    upper_sir: float | None
    upper_sdp: float
    gap_of_GA: float
    omega_star_binary: float
    omega_star_relaxed: float
    alpha_plus: float
    alpha_minus: float
    beta_plus: float
    beta_minus: float
    solution: BridgeSolution | None = None
    timings: dict[str, float] = field(default_factory=dict)

    def chain(self) -> list[tuple[str, float]]:
        items = [("lower_sdp", self.lower_sdp), ("lower_sir", self.lower_sir)]
        if self.opt is not None:
            items.append(("opt", self.opt))
        items += [("upper_sdp", self.upper_sdp), ("gap_of_GA", self.gap_of_GA)]
        return items

    def sandwich_violations(self, slack: float = SANDWICH_SLACK) -> list[str]:
        c = self.chain()
        return [f"{a}={x:.9g} > {b}={y:.9g}" for (a, x), (b, y) in zip(c, c[1:]) if x > y + slack]


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


class _Instance:
    """Problem data in the sorted bridge-column order used by every search."""

    def __init__(self, p: BridgeProblem):
        self.p = p
        self.order = order = np.argsort(p.bridge_cols, kind="stable")
        self.cols = [p.bridge_cols[i] for i in order]
        self.n, self.k = p.n, p.k_B
        labelled = p.linear_rows()
        # constraints are stated in the problem's bridge order; permute columns
        perm = np.arange(self.n * self.k).reshape(self.n, self.k)[:, order].ravel()
        self.rows = [(np.asarray(a)[perm], lo, hi) for a, lo, hi, _ in labelled]
        self.A = p.GA.adjacency.astype(float)
        self.B = p.GB.adjacency.astype(float)
        self.A_inv, self.B_inv = p.A_inv, p.B_inv

    def embed(self, block: np.ndarray) -> BipartiteBridge:
        K = np.zeros((self.n, self.p.m), dtype=np.int64)
        K[:, self.cols] = np.rint(block).astype(np.int64)
        return BipartiteBridge(K, self.k)

    def feasible(self, vecs: np.ndarray) -> np.ndarray:
        """Row mask of 0/1 vectors (b, n*k) satisfying all side rows."""
        ok = np.ones(vecs.shape[0], dtype=bool)
        for a, lo, hi in self.rows:
            s = vecs @ a
            ok &= (s >= lo - 1e-9) & (s <= hi + 1e-9)
        return ok

    def gaps(self, vecs: np.ndarray) -> np.ndarray:
        b = vecs.shape[0]
        n, m = self.n, self.p.m
        C = np.zeros((b, n + m, n + m))
        C[:, :n, :n] = self.A
        C[:, n:, n:] = self.B
        blocks = vecs.reshape(b, n, self.k)
        for c, j in enumerate(self.cols):
            C[:, :n, n + j] = blocks[:, :, c]
            C[:, n + j, :n] = blocks[:, :, c]
        return batch_gaps(C)

    def check_satisfiable(self) -> None:
        bad = self.p.untouched_degree_violations()
        if bad:
            raise InfeasibleError("; ".join(bad))


class _Leaves:
    """Evaluated integral bridges with the deterministic tie-break."""

    def __init__(self, inst: _Instance):
        self.inst = inst
        self.seen: dict[tuple[int, ...], float] = {}
        self.best = -math.inf
        self.history: list[float] = []

    def add(self, vecs: np.ndarray) -> None:
        vecs = np.asarray(vecs, dtype=np.int64).reshape(-1, self.inst.n * self.inst.k)
        keys = [tuple(int(v) for v in row) for row in vecs]
        new = [i for i, key in enumerate(keys) if key not in self.seen]
        if not new:
            return
        vecs = vecs[new]
        mask = self.inst.feasible(vecs)
        if not mask.any():
            return
        vecs = vecs[mask]
        g = self.inst.gaps(vecs.astype(float))
        for row, val in zip(vecs, g):
            self.seen[tuple(int(v) for v in row)] = float(val)
        top = float(g.max())
        if top > self.best:
            self.best = top
        self.history.append(self.best)

    def winner(self) -> tuple[tuple[int, ...], float]:
        if not self.seen:
            raise InfeasibleError("no bridge satisfies the constraints")
        tied = [key for key, g in self.seen.items() if g >= self.best - TIE_TOL]
        key = min(tied, key=lambda kk: self.inst.embed(np.array(kk).reshape(self.inst.n, self.inst.k)).key())
        return key, self.seen[key]


def _solution(inst: _Instance, key, nodes: int, t0: float, method: str, leaves: _Leaves) -> BridgeSolution:
    K = inst.embed(np.array(key).reshape(inst.n, inst.k))
    G = bridge(inst.p.GA, inst.p.GB, K)
    res = homo_lumo_gap(G)
    v = validate_bridge(inst.p, K)
    if not v.ok:
        raise InternalFaultError(f"optimal bridge violates constraints: {v.violations}")
    mu, eta = res.lambda_plus, -res.lambda_minus
    if not res.invertible:
        mu = eta = 0.0
    return BridgeSolution(
        K, res.gap, mu, eta, res.spectrum, nodes, time.perf_counter() - t0, method,
        len(leaves.seen), tuple(leaves.history),
    )


# ---------------------------------------------------------------------------
# Exact search
# ---------------------------------------------------------------------------


def enumerate_opt_gap(p: BridgeProblem, budget_bits: int = ENUM_BUDGET_BITS, chunk: int = 1 << 13) -> BridgeSolution:
    """Scan every 0/1 bridge on the bridge columns (``n * k_B <= budget_bits``)."""
    t0 = time.perf_counter()
    inst = _Instance(p)
    bits = inst.n * inst.k
    if bits > budget_bits:
        raise BudgetExceededError(f"enumeration needs 2^{bits} candidates, budget is 2^{budget_bits}")
    inst.check_satisfiable()
    leaves = _Leaves(inst)
    weights = 1 << np.arange(bits - 1, -1, -1, dtype=np.int64)
    total = 1 << bits
    for start in range(1, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        vecs = (codes[:, None] & weights[None, :]) > 0
        leaves.add(vecs)
    key, _ = leaves.winner()
    return _solution(inst, key, total - 1, t0, "enumeration", leaves)


def _node_relaxation(inst: _Instance, pattern: np.ndarray, settings: SdpSettings | None):
    """Presolve and solve the relaxation of a node; ``None`` when the node is empty."""
    pre = presolve(pattern, inst.rows)
    if pre is None:
        return None, None
    if not np.isnan(pre.pattern).any():
        return pre, None
    prob = assemble_bridged_gap_lmis(
        inst.A_inv, inst.B_inv, inst.cols, pre.pattern, rows=pre.rows, eqs=pre.eqs, require_nonzero=False
    )
    return pre, solve_sdp(prob, settings)


def _relaxed_k(inst: _Instance, pattern: np.ndarray, sol: SdpSolution) -> np.ndarray:
    vals = np.nan_to_num(pattern, nan=0.0).ravel().copy()
    free = np.nonzero(np.isnan(pattern.ravel()))[0]
    vals[free] = np.clip(sol.x[2:2 + free.size], 0.0, 1.0)
    return vals


def exact_opt_gap(p: BridgeProblem, settings: SdpSettings | None = None, max_nodes: int | None = None) -> BridgeSolution:
    """Globally optimal bridge by best-bound-first branch-and-bound.

    Node bounds come from the full SDP relaxation with the node's fixings;
    integral points are scored by the spectrum of the bridged graph.
    """
    t0 = time.perf_counter()
    inst = _Instance(p)
    inst.check_satisfiable()
    nk = inst.n * inst.k
    leaves = _Leaves(inst)
    leaves.add(np.eye(nk, dtype=np.int64))

    counter = itertools.count()
    heap: list[tuple[float, int, np.ndarray]] = [(-math.inf, next(counter), all_free(inst.n, inst.k))]
    nodes = 0
    while heap:
        neg_bound, _, pattern = heapq.heappop(heap)
        if -neg_bound < leaves.best - PRUNE_SLACK:
            continue
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise BudgetExceededError(f"branch-and-bound exceeded {max_nodes} nodes")
        pre, sol = _node_relaxation(inst, pattern, settings)
        if pre is None:
            continue
        if sol is None:
            leaves.add(pre.pattern.ravel()[None, :])
            continue
        if sol.status == SdpStatus.INFEASIBLE:
            continue
        bound = sol.objective + abs(sol.duality_gap) if sol.optimal else math.inf
        if bound < leaves.best - PRUNE_SLACK:
            continue
        kv = _relaxed_k(inst, pre.pattern, sol)
        if is_integral(kv):
            leaves.add(np.rint(kv)[None, :])
        free = np.nonzero(np.isnan(pre.pattern.ravel()))[0]
        frac = np.abs(kv[free] - 0.5)
        j = int(free[np.argmin(frac)])  # argmin returns the first (lowest index) tie
        for val in (1.0, 0.0):
            child = pre.pattern.copy().ravel()
            child[j] = val
            heapq.heappush(heap, (-bound, next(counter), child.reshape(inst.n, inst.k)))
    key, _ = leaves.winner()
    return _solution(inst, key, nodes, t0, "bnb", leaves)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def _require_optimal(sol: SdpSolution, what: str) -> SdpSolution:
    if sol.status == SdpStatus.INFEASIBLE:
        raise InfeasibleError(f"{what}: relaxation is infeasible")
    if not sol.optimal:
        raise SolverError(f"{what}: solver ended with status {sol.status.value}", sol.status.value)
    return sol


def upper_bound_sdp(p: BridgeProblem, settings: SdpSettings | None = None) -> float:
    """Optimal value of the full SDP relaxation (0 <= K <= 1, W >= K^T K)."""
    inst = _Instance(p)
    inst.check_satisfiable()
    pre, sol = _node_relaxation(inst, all_free(inst.n, inst.k), settings)
    if pre is None:
        raise InfeasibleError("no bridge satisfies the constraints")
    if sol is None:
        return float(inst.gaps(pre.pattern.ravel()[None, :])[0])
    return float(_require_optimal(sol, "upper bound").objective)


def gamma_star(alpha: float, beta: float, omega: float) -> float:
    """Largest value of ``alpha |x - D y|^2 + beta |y|^2`` on the unit sphere, ``omega = lambda_max(D^T D)``."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    if not omega >= 0:
        raise ValueError("omega must be nonnegative")
    s = alpha * (omega + 1.0) + beta
    disc = max(s * s - 4.0 * alpha * beta, 0.0)
    return 0.5 * (s + math.sqrt(disc))


def omega_star_binary(p: BridgeProblem) -> tuple[float, BipartiteBridge]:
    """``min lambda_max(B^{-1} K^T K B^{-1})`` over admissible 0/1 bridges, with a minimizer.

    The objective depends on K only through ``W = K^T K`` restricted to the
    bridge columns, and W accumulates one row of K at a time, so the search
    runs over the reachable W states row by row instead of over all K.
    """
    inst = _Instance(p)
    inst.check_satisfiable()
    n, k = inst.n, inst.k
    row_lo, row_hi, col_lo, col_hi = p.edge_count_limits()
    col_lo, col_hi = col_lo[inst.order], col_hi[inst.order]
    patterns = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.int64)
    iu = np.triu_indices(k)
    # state: upper triangle of W -> (previous state, row pattern)
    layers: list[dict[tuple[int, ...], tuple]] = [{tuple([0] * len(iu[0])): ()}]
    for i in range(n):
        ok = [pat for pat in patterns if row_lo[i] <= pat.sum() <= row_hi[i]]
        nxt: dict[tuple[int, ...], tuple] = {}
        for state in layers[-1]:
            W = np.zeros((k, k), dtype=np.int64)
            W[iu] = state
            for pat in ok:
                W2 = W + np.triu(np.outer(pat, pat))
                if np.any(np.diag(W2) > col_hi):
                    continue
                key = tuple(int(v) for v in W2[iu])
                if key not in nxt:
                    nxt[key] = (state, tuple(int(v) for v in pat))
        layers.append(nxt)
    R = inst.B_inv[inst.cols, :]
    best, best_state = math.inf, None
    for state in sorted(layers[-1]):
        W = np.zeros((k, k))
        W[iu] = state
        d = np.diag(W)
        if d.sum() < 1 or np.any(d < col_lo) or np.any(d > col_hi):
            continue
        W = W + np.triu(W, 1).T
        om = float(np.linalg.eigvalsh(R.T @ W @ R)[-1])
        if om < best - 1e-12:
            best, best_state = om, state
    if best_state is None:
        raise InfeasibleError("no bridge satisfies the constraints")
    block = np.zeros((n, k), dtype=np.int64)
    state = best_state
    for i in range(n, 0, -1):
        prev, pat = layers[i][state]
        block[i - 1] = pat
        state = prev
    return best, inst.embed(block)


def omega_star_relaxed(p: BridgeProblem, settings: SdpSettings | None = None) -> float:
    """``min omega`` over the box-relaxed bridges via the omega LMI."""
    inst = _Instance(p)
    inst.check_satisfiable()
    pre = presolve(all_free(inst.n, inst.k), inst.rows)
    if pre is None:
        raise InfeasibleError("no bridge satisfies the constraints")
    prob = assemble_omega_lmi(inst.B_inv, inst.cols, inst.n, pre.pattern, rows=pre.rows, eqs=pre.eqs, require_nonzero=False)
    sol = _require_optimal(solve_sdp(prob, settings), "omega")
    return max(-float(sol.objective), 0.0)


def _alphas_betas(p: BridgeProblem) -> tuple[float, float, float, float]:
    a = symmetric_eigen(p.A_inv).eigenvalues
    b = symmetric_eigen(p.B_inv).eigenvalues
    return float(a[0]), float(-a[-1]), float(b[0]), float(-b[-1])


def lower_from_omega(p: BridgeProblem, omega: float) -> float:
    ap, am, bp, bm = _alphas_betas(p)
    return 1.0 / gamma_star(ap, bp, omega) + 1.0 / gamma_star(am, bm, omega)


def lower_bound(p: BridgeProblem, mode: str = "binary", settings: SdpSettings | None = None) -> float:
    """Closed-form lower bound from ``omega*`` over 0/1 (``binary``) or box-relaxed (``relaxed``) bridges."""
    if mode == "binary":
        omega = omega_star_binary(p)[0]
    elif mode == "relaxed":
        omega = omega_star_relaxed(p, settings)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return lower_from_omega(p, omega)


def bounds_report(
    p: BridgeProblem,
    include_exact: bool = True,
    exact_method: str = "bnb",
    settings: SdpSettings | None = None,
) -> BoundsReport:
    """All bounds for one instance; raises ``InternalFaultError`` if they are out of order.

    ``lower_sdp`` uses the binary omega* and ``lower_sir`` the box-relaxed one
    (the smaller omega gives the larger bound).
    """
    timings: dict[str, float] = {}

    def timed(name, fn, *args):
        t = time.perf_counter()
        out = fn(*args)
        timings[name] = time.perf_counter() - t
        return out

    ap, am, bp, bm = _alphas_betas(p)
    om_bin, _ = timed("omega_binary", omega_star_binary, p)
    om_rel = timed("omega_relaxed", omega_star_relaxed, p, settings)
    upper = timed("upper_sdp", upper_bound_sdp, p, settings)
    sol = None
    if include_exact:
        if exact_method == "bnb":
            sol = timed("exact", exact_opt_gap, p, settings)
        elif exact_method == "enumerate":
            sol = timed("exact", enumerate_opt_gap, p)
        else:
            raise ValueError(f"unknown exact method {exact_method!r}")
    rep = BoundsReport(
        lower_sdp=lower_from_omega(p, om_bin),
        lower_sir=lower_from_omega(p, om_rel),
        opt=sol.gap if sol else None,
        upper_sir=sol.gap if sol else None,
        upper_sdp=upper,
        gap_of_GA=homo_lumo_gap(p.GA).gap,
        omega_star_binary=om_bin,
        omega_star_relaxed=om_rel,
        alpha_plus=ap,
        alpha_minus=am,
        beta_plus=bp,
        beta_minus=bm,
        solution=sol,
        timings=timings,
    )
    bad = rep.sandwich_violations()
    if bad:
        raise InternalFaultError("bound ordering violated: " + "; ".join(bad))
    return rep


__all__ = [
    "BoundsReport",
    "BridgeSolution",
    "bounds_report",
    "enumerate_opt_gap",
    "exact_opt_gap",
    "gamma_star",
    "lower_bound",
    "lower_from_omega",
    "omega_star_binary",
    "omega_star_relaxed",
    "upper_bound_sdp",
]
