"""Assembly of the bridged-gap LMIs and the omega LMI.

Bridge entries live on the n x k_B block of K at the bridge columns.  A
block pattern is an ``(n, k_B)`` float array whose entries are 0/1 for fixed
entries and NaN for free (relaxed, 0 <= K <= 1) ones.  Linear side rows are
``(a, lo, hi)`` triples over the row-major vectorization of the block.

With R = B^{-1}[bridge, :] (k_B x m) we have K B^{-1} = K_blk R and
B^{-1} W B^{-1} = R^T W_blk R, since K and W vanish off the bridge columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from ..errors import InfeasibleError
from .solver import LmiBlock, SdpProblem

Row = tuple[np.ndarray, float, float]

_INTEGRAL_TOL = 1e-9


def all_free(n: int, k: int) -> np.ndarray:
    return np.full((n, k), np.nan)


@dataclass
class _Affine:
    """Matrix-valued affine map: const + sum_v x_v coeff[v]."""

    const: np.ndarray
    coeff: np.ndarray


def _k_affine(pattern: np.ndarray, kvar0: int, N: int) -> tuple[_Affine, list[tuple[int, int]]]:
    n, k = pattern.shape
    free = [(i, c) for i in range(n) for c in range(k) if np.isnan(pattern[i, c])]
    const = np.nan_to_num(pattern, nan=0.0)
    coeff = np.zeros((N, n, k))
    for t, (i, c) in enumerate(free):
        coeff[kvar0 + t, i, c] = 1.0
    return _Affine(const, coeff), free


def _w_affine(pattern: np.ndarray, Kaff: _Affine, w_pairs, wvar0: int, N: int) -> _Affine:
    """W on the bridge block: diag = column sums of K; off-diagonals free when both
    columns still have free entries, otherwise pinned to the entry of K^T K."""
    n, k = pattern.shape
    colfixed = ~np.isnan(pattern).any(axis=0)
    const = np.zeros((k, k))
    coeff = np.zeros((N, k, k))
    for c in range(k):
        const[c, c] = Kaff.const[:, c].sum()
        coeff[:, c, c] = Kaff.coeff[:, :, c].sum(axis=1)
    for a in range(k):
        for b in range(a + 1, k):
            if (a, b) in w_pairs:
                v = wvar0 + w_pairs.index((a, b))
                coeff[v, a, b] = coeff[v, b, a] = 1.0
                continue
            fa, fb = (a, b) if colfixed[a] else (b, a)
            # column fa fixed: W_ab = sum_l K[l,fa] * K[l,fb], linear in column fb
            val = Kaff.const[:, fa] @ Kaff.const[:, fb]
            lin = Kaff.coeff[:, :, fb] @ Kaff.const[:, fa]
            const[a, b] = const[b, a] = val
            coeff[:, a, b] = coeff[:, b, a] = lin
    return _Affine(const, coeff)


def _linear_part(rows: Sequence[Row], Kaff: _Affine, N: int):
    """Translate side rows into ``G x >= h``; constant rows are checked here."""
    G, h = [], []
    n, k = Kaff.const.shape
    cvec = Kaff.const.ravel()
    cmat = Kaff.coeff.reshape(N, n * k)
    for a, lo, hi in rows:
        a = np.asarray(a, dtype=float)
        const = float(a @ cvec)
        lin = cmat @ a
        if not np.any(lin):
            if const < lo - 1e-9 or const > hi + 1e-9:
                raise InfeasibleError(f"side constraint violated by fixed entries ({const} not in [{lo}, {hi}])")
            continue
        if np.isfinite(lo):
            G.append(lin)
            h.append(lo - const)
        if np.isfinite(hi):
            G.append(-lin)
            h.append(const - hi)
    return (np.array(G).reshape(-1, N), np.array(h))


def _eq_part(eqs: Sequence[tuple[np.ndarray, float]], Kaff: _Affine, N: int):
    E, f = [], []
    n, k = Kaff.const.shape
    cvec = Kaff.const.ravel()
    cmat = Kaff.coeff.reshape(N, n * k)
    for a, rhs in eqs:
        a = np.asarray(a, dtype=float)
        lin = cmat @ a
        const = float(a @ cvec)
        if not np.any(lin):
            if abs(const - rhs) > 1e-9:
                raise InfeasibleError("equality violated by fixed entries")
            continue
        E.append(lin)
        f.append(rhs - const)
    return np.array(E).reshape(-1, N), np.array(f)


def _check_pattern(pattern, n: int, k: int) -> np.ndarray:
    pattern = np.array(pattern, dtype=float)
    if pattern.shape != (n, k):
        raise ValueError(f"bridge pattern has shape {pattern.shape}, expected {(n, k)}")
    fixed = pattern[~np.isnan(pattern)]
    if np.any((fixed != 0) & (fixed != 1)):
        raise ValueError("fixed bridge entries must be 0 or 1")
    return pattern


def assemble_bridged_gap_lmis(
    A_inv: np.ndarray,
    B_inv: np.ndarray,
    bridge_cols: Sequence[int],
    K=None,
    *,
    rows: Sequence[Row] = (),
    eqs: Sequence[tuple[np.ndarray, float]] = (),
    require_nonzero: bool = True,
) -> SdpProblem:
    """Gap relaxation ``max mu + eta`` over the two bridged LMIs.

    ``K`` is a block pattern (see module docstring); ``None`` relaxes every
    entry.  Free entries get the box ``0 <= K <= 1`` and, together with W,
    the Schur-complement block ``[[W, K^T], [K, I]] >= 0``; columns that are
    completely fixed have W pinned to ``K^T K`` and leave that block.  With a
    completely fixed K the problem is the exact gap SDP of the bridged graph.
    The nonzero-bridge row ``sum K >= 1`` is added unless ``require_nonzero``
    is False (for callers whose ``rows``/``eqs`` already carry it).
    """
    A_inv = np.asarray(A_inv, dtype=float)
    B_inv = np.asarray(B_inv, dtype=float)
    n, m = A_inv.shape[0], B_inv.shape[0]
    cols = list(bridge_cols)
    k = len(cols)
    if A_inv.shape != (n, n) or B_inv.shape != (m, m) or not cols or max(cols) >= m:
        raise ValueError("dimension mismatch between A_inv, B_inv and bridge columns")
    pattern = _check_pattern(all_free(n, k) if K is None else K, n, k)
    free_mask = np.isnan(pattern)
    colfree = free_mask.any(axis=0)
    F = [c for c in range(k) if colfree[c]]
    w_pairs = [(a, b) for a in range(k) for b in range(a + 1, k) if colfree[a] and colfree[b]]
    nK = int(free_mask.sum())
    N = 2 + nK + len(w_pairs)
    if require_nonzero and nK == 0 and np.nansum(pattern) < 1:
        raise InfeasibleError("sum K >= 1 cannot hold for a zero bridge")

    Kaff, free = _k_affine(pattern, 2, N)
    Waff = _w_affine(pattern, Kaff, w_pairs, 2 + nK, N)
    R = B_inv[cols, :]

    KB_c = Kaff.const @ R
    KB_t = Kaff.coeff @ R
    BWB_c = R.T @ Waff.const @ R
    BWB_t = np.einsum("ka,vkl,lb->vab", R, Waff.coeff, R)

    def gap_block(sign: float, var: int, name: str) -> LmiBlock:
        const = np.block([[np.eye(n), KB_c], [KB_c.T, np.eye(m) + BWB_c]])
        coeff = np.zeros((N, n + m, n + m))
        coeff[:, :n, n:] = KB_t
        coeff[:, n:, :n] = KB_t.transpose(0, 2, 1)
        coeff[:, n:, n:] = BWB_t
        coeff[var, :n, :n] += sign * A_inv
        coeff[var, n:, n:] += sign * B_inv
        return LmiBlock(const, coeff, name)

    blocks = [gap_block(-1.0, 0, "mu"), gap_block(1.0, 1, "eta")]
    if F:
        s = len(F)
        const = np.zeros((s + n, s + n))
        coeff = np.zeros((N, s + n, s + n))
        const[:s, :s] = Waff.const[np.ix_(F, F)]
        coeff[:, :s, :s] = Waff.coeff[:, F][:, :, F]
        const[s:, :s] = Kaff.const[:, F]
        const[:s, s:] = Kaff.const[:, F].T
        coeff[:, s:, :s] = Kaff.coeff[:, :, F]
        coeff[:, :s, s:] = Kaff.coeff[:, :, F].transpose(0, 2, 1)
        const[s:, s:] = np.eye(n)
        blocks.append(LmiBlock(const, coeff, "schur"))

    lower = np.zeros(N)
    upper = np.full(N, np.inf)
    upper[2:2 + nK] = 1.0
    all_rows = list(rows)
    if require_nonzero:
        all_rows.insert(0, (np.ones(n * k), 1.0, np.inf))
    G, h = _linear_part(all_rows, Kaff, N)
    E, f = _eq_part(eqs, Kaff, N)
    names = ["mu", "eta"] + [f"K[{i + 1},{cols[c] + 1}]" for i, c in free]
    names += [f"W[{cols[a] + 1},{cols[b] + 1}]" for a, b in w_pairs]
    c = np.zeros(N)
    c[:2] = 1.0
    return SdpProblem(c, tuple(blocks), G, h, E, f, lower, upper, tuple(names))


def assemble_omega_lmi(
    B_inv: np.ndarray,
    bridge_cols: Sequence[int],
    n: int,
    K=None,
    *,
    rows: Sequence[Row] = (),
    eqs: Sequence[tuple[np.ndarray, float]] = (),
    require_nonzero: bool = True,
) -> SdpProblem:
    """``min omega`` s.t. ``[[omega I, B^{-1} K^T], [K B^{-1}, I]] >= 0`` (posed as max -omega).

    With K fixed the optimum is ``lambda_max(B^{-1} K^T K B^{-1})``.  Free
    entries are boxed to [0, 1]; ``sum K >= 1`` is imposed unless
    ``require_nonzero`` is False (fixed-K diagnostics only).
    """
    B_inv = np.asarray(B_inv, dtype=float)
    m = B_inv.shape[0]
    cols = list(bridge_cols)
    k = len(cols)
    if B_inv.shape != (m, m) or not cols or max(cols) >= m:
        raise ValueError("dimension mismatch between B_inv and bridge columns")
    pattern = _check_pattern(all_free(n, k) if K is None else K, n, k)
    nK = int(np.isnan(pattern).sum())
    N = 1 + nK
    Kaff, free = _k_affine(pattern, 1, N)
    R = B_inv[cols, :]
    KB_c = Kaff.const @ R
    KB_t = Kaff.coeff @ R
    const = np.block([[np.zeros((m, m)), KB_c.T], [KB_c, np.eye(n)]])
    coeff = np.zeros((N, m + n, m + n))
    coeff[:, m:, :m] = KB_t
    coeff[:, :m, m:] = KB_t.transpose(0, 2, 1)
    coeff[0, :m, :m] = np.eye(m)
    lower = np.full(N, -np.inf)
    upper = np.full(N, np.inf)
    lower[1:] = 0.0
    upper[1:] = 1.0
    all_rows = list(rows)
    if require_nonzero:
        all_rows.insert(0, (np.ones(n * k), 1.0, np.inf))
    G, h = _linear_part(all_rows, Kaff, N)
    E, f = _eq_part(eqs, Kaff, N)
    c = np.zeros(N)
    c[0] = -1.0
    names = ["omega"] + [f"K[{i + 1},{cols[c_] + 1}]" for i, c_ in free]
    return SdpProblem(c, (LmiBlock(const, coeff, "omega"),), G, h, E, f, lower, upper, tuple(names))


# ---------------------------------------------------------------------------
# LP presolve of the bridge polytope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Presolved:
    pattern: np.ndarray                       # newly fixed entries filled in
    rows: tuple[Row, ...]                     # inequality rows that can hold strictly
    eqs: tuple[tuple[np.ndarray, float], ...]  # rows that hold with equality on the whole polytope


def presolve(pattern: np.ndarray, rows: Sequence[Row]) -> Presolved | None:
    """Find entries and rows forced to equality on ``{0 <= K <= 1, rows}``.

    Returns ``None`` when the polytope is empty.  Interior-point methods need a
    strictly feasible point; after this step the remaining free entries and
    inequality rows can all be strict simultaneously.
    """
    pattern = np.array(pattern, dtype=float)
    n, k = pattern.shape
    flat = pattern.ravel()
    free = np.nonzero(np.isnan(flat))[0]
    base = np.nan_to_num(flat, nan=0.0)

    # one-sided inequalities g . z >= r over the free entries z
    ineqs: list[tuple[np.ndarray, float, int, int]] = []  # (g, r, row index, side)
    for idx, (a, lo, hi) in enumerate(rows):
        a = np.asarray(a, dtype=float)
        g = a[free]
        const = float(a @ base)
        if not np.any(g):
            if const < lo - 1e-9 or const > hi + 1e-9:
                return None
            continue
        if np.isfinite(lo):
            ineqs.append((g, lo - const, idx, -1))
        if np.isfinite(hi):
            ineqs.append((-g, const - hi, idx, +1))
    p = free.size
    if p == 0:
        return Presolved(pattern, (), ())
    # box sides: z >= 0 (side -1), -z >= -1 (side +1), encoded with row index -1 - j
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        ineqs.append((e, 0.0, -1 - j, -1))
        ineqs.append((-e, -1.0, -1 - j, +1))

    q = len(ineqs)
    Gm = np.array([g for g, *_ in ineqs])
    rv = np.array([r for _, r, *_ in ineqs])
    pending = set(range(q))
    strict: set[int] = set()
    while pending:
        S = sorted(pending)
        # variables: z (p), t (|S|); maximize sum t
        nt = len(S)
        cobj = np.concatenate([np.zeros(p), -np.ones(nt)])
        A_ub = np.zeros((q, p + nt))
        A_ub[:, :p] = -Gm
        b_ub = -rv.copy()
        for col, i in enumerate(S):
            A_ub[i, p + col] = 1.0
        bounds = [(0.0, 1.0)] * p + [(0.0, 1.0)] * nt
        res = linprog(cobj, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise RuntimeError(f"presolve LP failed: {res.message}")
        t = res.x[p:]
        newly = {i for col, i in enumerate(S) if t[col] > 1e-7}
        if not newly:
            break
        strict |= newly
        pending -= newly
    tight = pending

    new = flat.copy()
    for i in tight:
        g, r, ridx, side = ineqs[i]
        if ridx < 0:
            j = -1 - ridx
            new[free[j]] = 0.0 if side < 0 else 1.0
    new_pattern = new.reshape(n, k)
    eq_rows: list[tuple[np.ndarray, float]] = []
    ineq_rows: list[Row] = []
    tight_sides: dict[int, set[int]] = {}
    for i in tight:
        _, _, ridx, side = ineqs[i]
        if ridx >= 0:
            tight_sides.setdefault(ridx, set()).add(side)
    for idx, (a, lo, hi) in enumerate(rows):
        sides = tight_sides.get(idx)
        if sides:
            eq_rows.append((np.asarray(a, dtype=float), lo if -1 in sides else hi))
        else:
            ineq_rows.append((np.asarray(a, dtype=float), lo, hi))
    return Presolved(new_pattern, tuple(ineq_rows), tuple(eq_rows))


def is_integral(values: np.ndarray, tol: float = 1e-6) -> bool:
    return bool(np.all(np.minimum(np.abs(values), np.abs(values - 1)) <= tol))
