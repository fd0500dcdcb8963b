"""HOMO-LUMO gaps and the block inverse of a bridged adjacency matrix."""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np

from .errors import InternalFaultError, NotInvertibleError
from .graph import BipartiteBridge, Graph
from .linalg import RationalMatrix, Spectrum, determinant, psd_check, rational_inverse, symmetric_eigen
from .sdp import LmiBlock, SdpProblem, SdpSettings, solve_sdp

ZERO_EIG_TOL = 1e-9


@dataclass(frozen=True)
class GapResult:
    """``lambda_plus``/``lambda_minus`` are the eigenvalues closest to zero on each side."""

    lambda_plus: float
    lambda_minus: float
    gap: float
    invertible: bool
    spectrum: Spectrum | None = None


def gap_from_eigenvalues(evals: np.ndarray, invertible: bool | None = None) -> GapResult:
    evals = np.asarray(evals, dtype=float)
    scale = max(float(np.max(np.abs(evals))), 1.0)
    pos = evals[evals > ZERO_EIG_TOL * scale]
    neg = evals[evals < -ZERO_EIG_TOL * scale]
    lp = float(pos.min()) if pos.size else float("nan")
    lm = float(neg.max()) if neg.size else float("nan")
    has_zero = pos.size + neg.size < evals.size
    if invertible is None:
        invertible = not has_zero
    elif invertible == has_zero:
        raise InternalFaultError(
            f"float spectrum {'has' if has_zero else 'has no'} zero eigenvalue but exact test says "
            f"{'invertible' if invertible else 'singular'}"
        )
    return GapResult(lp, lm, lp - lm if invertible else 0.0, invertible)


def homo_lumo_gap(G: Graph | np.ndarray) -> GapResult:
    """Gap ``lambda_plus - lambda_minus`` of a graph; 0 when the adjacency is singular.

    Invertibility is decided by the exact determinant; the floating-point
    zero threshold (1e-9 relative to the spectral norm) must agree with it.
    """
    A = G.adjacency if isinstance(G, Graph) else np.asarray(G)
    spec = symmetric_eigen(A)
    res = gap_from_eigenvalues(spec.eigenvalues, determinant(A) != 0)
    return GapResult(res.lambda_plus, res.lambda_minus, res.gap, res.invertible, spec)


def batch_gaps(C: np.ndarray) -> np.ndarray:
    """Gaps of a stack of symmetric matrices ``(b, N, N)`` (LAPACK, for hot loops)."""
    ev = np.linalg.eigvalsh(C)
    scale = np.maximum(np.abs(ev).max(axis=1, keepdims=True), 1.0)
    zero = np.abs(ev) <= ZERO_EIG_TOL * scale
    pos = np.where(ev > 0, ev, np.inf).min(axis=1)
    neg = np.where(ev < 0, ev, -np.inf).max(axis=1)
    gaps = pos - neg
    gaps[zero.any(axis=1)] = 0.0
    return gaps


def gap_via_inverse_sdp(G: Graph, settings: SdpSettings | None = None) -> GapResult:
    """Gap as ``max mu + eta`` s.t. ``mu C^{-1} <= I`` and ``-eta C^{-1} <= I``."""
    inv = rational_inverse(G.adjacency)
    if inv is None:
        raise NotInvertibleError(f"{G} is not invertible")
    Ci = inv.to_numpy()
    N = G.n
    I = np.eye(N)
    blocks = (
        LmiBlock(I, np.stack([-Ci, np.zeros_like(Ci)]), "mu"),
        LmiBlock(I, np.stack([np.zeros_like(Ci), Ci]), "eta"),
    )
    sol = solve_sdp(SdpProblem(np.ones(2), blocks, names=("mu", "eta")), settings)
    if not sol.optimal:
        raise InternalFaultError(f"gap SDP ended with status {sol.status.value}")
    mu, eta = (float(v) for v in sol.x)
    return GapResult(mu, -eta, mu + eta, True)


@dataclass(frozen=True)
class BlockInverse:
    """Inverse of ``C = [[A, K], [K^T, B]]`` as ``Q^T diag(S^{-1}, B^{-1}) Q``.

    ``Q = [[I, -K B^{-1}], [0, I]]`` and ``Z = Q^{-1}``.
    """

    C_inv: np.ndarray
    S_inv: np.ndarray
    B_inv: np.ndarray
    Q: np.ndarray
    Z: np.ndarray
    S_exact: RationalMatrix

    @property
    def n(self) -> int:
        return self.S_inv.shape[0]


def block_inverse(A, B, K: BipartiteBridge | np.ndarray) -> BlockInverse | None:
    """Block inverse of the bridged adjacency, or ``None`` when S (equivalently C) is singular."""
    A = np.asarray(A.adjacency if isinstance(A, Graph) else A)
    B = np.asarray(B.adjacency if isinstance(B, Graph) else B)
    Km = np.asarray(K.K if isinstance(K, BipartiteBridge) else K)
    n, m = A.shape[0], B.shape[0]
    if Km.shape != (n, m):
        raise ValueError(f"K has shape {Km.shape}, expected {(n, m)}")
    if rational_inverse(A) is None:
        raise NotInvertibleError("block A is singular")
    B_inv_q = rational_inverse(B)
    if B_inv_q is None:
        raise NotInvertibleError("block B is singular")
    Kq = RationalMatrix.from_rows(Km.tolist())
    KBi = Kq @ B_inv_q
    S_q = RationalMatrix.from_rows(A.tolist()) - KBi @ Kq.transpose()
    S_inv_q = _rational_inverse_q(S_q)
    if S_inv_q is None:
        return None
    S_inv = S_inv_q.to_numpy()
    B_inv = B_inv_q.to_numpy()
    KB = KBi.to_numpy()
    Q = np.block([[np.eye(n), -KB], [np.zeros((m, n)), np.eye(m)]])
    Z = np.block([[np.eye(n), KB], [np.zeros((m, n)), np.eye(m)]])
    D = np.block([[S_inv, np.zeros((n, m))], [np.zeros((m, n)), B_inv]])
    C_inv = Q.T @ D @ Q
    C_inv = 0.5 * (C_inv + C_inv.T)
    return BlockInverse(C_inv, S_inv, B_inv, Q, Z, S_q)


def _rational_inverse_q(M: RationalMatrix) -> RationalMatrix | None:
    """Exact inverse of a rational matrix: clear denominators, invert the integer matrix."""
    den = 1
    for r in M.rows:
        for v in r:
            den = lcm(den, v.denominator)
    inv = rational_inverse([[int(v * den) for v in r] for r in M.rows])
    if inv is None:
        return None
    return RationalMatrix(tuple(tuple(v * den for v in r) for r in inv.rows))


CONGRUENCE_TOL = 1e-7


def congruence_lmi_check(bi: BlockInverse, mu: float, eta: float) -> tuple[bool, bool]:
    """Decide ``mu C^{-1} <= I`` and ``-eta C^{-1} <= I`` directly and through the congruence by Z.

    ``Z^T (I - mu C^{-1}) Z = Z^T Z - mu diag(S^{-1}, B^{-1})``; the two tests
    must agree, otherwise ``InternalFaultError`` is raised.
    """
    if mu < 0 or eta < 0:
        raise ValueError("mu and eta must be nonnegative")
    N = bi.C_inv.shape[0]
    n = bi.n
    I = np.eye(N)
    D = np.zeros((N, N))
    D[:n, :n] = bi.S_inv
    D[n:, n:] = bi.B_inv
    ZtZ = bi.Z.T @ bi.Z
    out = []
    for t, sign in ((mu, 1.0), (eta, -1.0)):
        direct = I - sign * t * bi.C_inv
        transformed = ZtZ - sign * t * D
        d_ok = psd_check(0.5 * (direct + direct.T), CONGRUENCE_TOL)
        t_ok = psd_check(0.5 * (transformed + transformed.T), CONGRUENCE_TOL * max(1.0, np.linalg.norm(ZtZ, 2)))
        if d_ok != t_ok:
            raise InternalFaultError(f"congruence check disagrees at t={t}")
        out.append(d_ok)
    return out[0], out[1]
