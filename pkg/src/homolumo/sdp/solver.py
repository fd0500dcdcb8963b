"""Primal-dual interior-point solver for small block-LMI problems.

The user-facing problem is

    maximize    c^T x + offset
    subject to  F0_b + sum_i x_i F_ib  >= 0     (PSD, one per block b)
                G x >= h                        (linear inequalities)
                E x  = f                        (linear equalities)
                lo <= x <= hi

Equalities are eliminated up front (``x = x0 + N y``); inequalities and boxes
become one diagonal (LP) cone.  The remaining problem is the dual of a
standard-form SDP and is solved with an infeasible-start path-following
method using the HKM search direction and Mehrotra's predictor-corrector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla


class SdpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LmiBlock:
    """Affine symmetric map ``x -> const + sum_i x_i coeffs[i]`` required PSD."""

    const: np.ndarray
    coeffs: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        const = np.array(self.const, dtype=float)
        coeffs = np.array(self.coeffs, dtype=float)
        s = const.shape[0]
        if const.shape != (s, s) or coeffs.ndim != 3 or coeffs.shape[1:] != (s, s):
            raise ValueError(f"block {self.name!r}: inconsistent shapes {const.shape}, {coeffs.shape}")
        if not (np.allclose(const, const.T, atol=1e-12) and np.allclose(coeffs, coeffs.transpose(0, 2, 1), atol=1e-12)):
            raise ValueError(f"block {self.name!r} is not symmetric")
        const = 0.5 * (const + const.T)
        coeffs = 0.5 * (coeffs + coeffs.transpose(0, 2, 1))
        const.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        return self.const.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.const + np.tensordot(x, self.coeffs, axes=1)


def _matrix(a, ncols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, ncols))
    a = np.array(a, dtype=float)
    return a.reshape(-1, ncols)


@dataclass(frozen=True)
class SdpProblem:
    objective: np.ndarray
    blocks: tuple[LmiBlock, ...] = ()
    ineq_matrix: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    names: tuple[str, ...] = ()
    offset: float = 0.0

    def __post_init__(self) -> None:
        c = np.array(self.objective, dtype=float).ravel()
        N = c.size
        object.__setattr__(self, "objective", c)
        G = _matrix(self.ineq_matrix, N)
        h = np.zeros(0) if self.ineq_rhs is None else np.array(self.ineq_rhs, dtype=float).ravel()
        E = _matrix(self.eq_matrix, N)
        f = np.zeros(0) if self.eq_rhs is None else np.array(self.eq_rhs, dtype=float).ravel()
        if G.shape[0] != h.size or E.shape[0] != f.size:
            raise ValueError("constraint matrix/rhs size mismatch")
        lo = np.full(N, -np.inf) if self.lower is None else np.array(self.lower, dtype=float)
        hi = np.full(N, np.inf) if self.upper is None else np.array(self.upper, dtype=float)
        if lo.shape != (N,) or hi.shape != (N,) or np.any(lo > hi):
            raise ValueError("invalid variable boxes")
        for b in self.blocks:
            if b.coeffs.shape[0] != N:
                raise ValueError(f"block {b.name!r} has {b.coeffs.shape[0]} coefficients, expected {N}")
        names = tuple(self.names) or tuple(f"x{i}" for i in range(N))
        if len(names) != N:
            raise ValueError("names length mismatch")
        for k, v in dict(ineq_matrix=G, ineq_rhs=h, eq_matrix=E, eq_rhs=f, lower=lo, upper=hi).items():
            v.setflags(write=False)
            object.__setattr__(self, k, v)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "names", names)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def value(self, x: np.ndarray) -> float:
        return float(self.objective @ x + self.offset)

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any constraint at ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        viol = 0.0
        for b in self.blocks:
            viol = max(viol, -float(np.linalg.eigvalsh(b.evaluate(x))[0]))
        if self.ineq_rhs.size:
            viol = max(viol, float(np.max(self.ineq_rhs - self.ineq_matrix @ x)))
        if self.eq_rhs.size:
            viol = max(viol, float(np.max(np.abs(self.eq_matrix @ x - self.eq_rhs))))
        viol = max(viol, float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        return max(viol, 0.0)


@dataclass(frozen=True)
class SdpSettings:
    tol: float = 1e-8
    report_tol: float = 1e-7
    max_iter: int = 200
    step_fraction: float = 0.98
    infeas_tol: float = 1e-8


@dataclass(frozen=True)
class SdpSolution:
    status: SdpStatus
    x: np.ndarray
    objective: float
    duality_gap: float
    max_residual: float
    iterations: int
    bound: float = math.inf
    info: dict = field(default_factory=dict, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status is SdpStatus.OPTIMAL


# ---------------------------------------------------------------------------
# Reduction to standard dual form
# ---------------------------------------------------------------------------


@dataclass
class _Std:
    """Dual standard form: max b^T y  s.t.  Z = C - sum_i y_i A_i in cone."""

    b: np.ndarray
    C_sdp: list[np.ndarray]
    A_sdp: list[np.ndarray]          # (N, s, s)
    C_lp: np.ndarray                 # (L,)
    A_lp: np.ndarray                 # (L, N)
    x0: np.ndarray
    basis: np.ndarray                # x = x0 + basis @ y
    offset: float


class _Trivial(Exception):
    def __init__(self, status: SdpStatus, y: np.ndarray | None = None):
        self.status = status
        self.y = y


def _reduce(p: SdpProblem) -> _Std:
    N = p.num_vars
    rows = [p.ineq_matrix]
    rhs = [p.ineq_rhs]
    eye = np.eye(N)
    fin_lo = np.isfinite(p.lower)
    fin_hi = np.isfinite(p.upper)
    rows.append(eye[fin_lo])
    rhs.append(p.lower[fin_lo])
    rows.append(-eye[fin_hi])
    rhs.append(-p.upper[fin_hi])
    G = np.vstack(rows)
    h = np.concatenate(rhs)

    E, f = p.eq_matrix, p.eq_rhs
    if E.shape[0]:
        U, s, Vt = np.linalg.svd(E)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        x0 = Vt[:rank].T @ ((U[:, :rank].T @ f) / s[:rank])
        if np.linalg.norm(E @ x0 - f) > 1e-9 * (1 + np.linalg.norm(f)):
            raise _Trivial(SdpStatus.INFEASIBLE)
        basis = Vt[rank:].T
    else:
        x0 = np.zeros(N)
        basis = eye
    b = basis.T @ p.objective
    offset = float(p.objective @ x0 + p.offset)

    C_sdp, A_sdp = [], []
    for blk in p.blocks:
        C = blk.const + np.tensordot(x0, blk.coeffs, axes=1)
        A = -np.tensordot(basis.T, blk.coeffs, axes=1)
        C_sdp.append(0.5 * (C + C.T))
        A_sdp.append(0.5 * (A + A.transpose(0, 2, 1)))
    C_lp = G @ x0 - h
    A_lp = -(G @ basis)
    # normalize LP rows; drop constant rows
    norms = np.linalg.norm(A_lp, axis=1)
    const_rows = norms <= 1e-12
    if np.any(C_lp[const_rows] < -1e-9):
        raise _Trivial(SdpStatus.INFEASIBLE)
    keep = ~const_rows
    C_lp = C_lp[keep] / norms[keep]
    A_lp = A_lp[keep] / norms[keep][:, None]

    # drop SDP blocks with no variable dependence
    keepC, keepA = [], []
    for C, A in zip(C_sdp, A_sdp):
        if np.all(np.abs(A) <= 1e-14):
            if np.linalg.eigvalsh(C)[0] < -1e-9:
                raise _Trivial(SdpStatus.INFEASIBLE)
            continue
        keepC.append(C)
        keepA.append(A)

    nvar = basis.shape[1]
    if nvar == 0:
        raise _Trivial(SdpStatus.OPTIMAL, np.zeros(0))
    used = np.zeros(nvar, dtype=bool)
    for A in keepA:
        used |= np.any(np.abs(A.reshape(nvar, -1)) > 1e-14, axis=1)
    if A_lp.size:
        used |= np.any(np.abs(A_lp) > 1e-14, axis=0)
    if not used.all():
        if np.any(np.abs(b[~used]) > 1e-14):
            raise _Trivial(SdpStatus.UNBOUNDED)
        basis = basis[:, used]
        b = b[used]
        keepA = [A[used] for A in keepA]
        A_lp = A_lp[:, used]
    return _Std(b, keepC, keepA, C_lp, A_lp.T.copy(), x0, basis, offset)


# ---------------------------------------------------------------------------
# Interior-point iteration
# ---------------------------------------------------------------------------


def _max_step_psd(X: np.ndarray, dX: np.ndarray) -> float:
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    lam = np.linalg.eigvalsh(Li @ dX @ Li.T)[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def _inner(Xs, Zs, xl, zl) -> float:
    return float(sum(np.sum(X * Z) for X, Z in zip(Xs, Zs)) + xl @ zl)


def _solve_std(d: _Std, st: SdpSettings) -> tuple[SdpStatus, np.ndarray, int, dict]:
    N = d.b.size
    nblk = len(d.C_sdp)
    sizes = [C.shape[0] for C in d.C_sdp]
    L = d.C_lp.size
    nu = sum(sizes) + L
    b = d.b
    normb = np.linalg.norm(b)
    normC = math.sqrt(sum(np.sum(C * C) for C in d.C_sdp) + d.C_lp @ d.C_lp)
    Aflat = [A.reshape(N, -1) for A in d.A_sdp]
    A_lp = d.A_lp  # (N, L)

    # starting point (big-M)
    Xs, Zs = [], []
    for C, A, s in zip(d.C_sdp, d.A_sdp, sizes):
        anorm = np.linalg.norm(A.reshape(N, -1), axis=1)
        xi = max(10.0, math.sqrt(s), s * float(np.max((1 + np.abs(b)) / (1 + anorm))))
        zeta = max(10.0, math.sqrt(s), float(np.max(anorm)), float(np.linalg.norm(C)))
        Xs.append(xi * np.eye(s))
        Zs.append(zeta * np.eye(s))
    if L:
        anorm = np.linalg.norm(A_lp, axis=0)
        xi = max(10.0, float(np.max((1 + np.abs(b)) / (1 + np.linalg.norm(A_lp, axis=1)))))
        zeta = max(10.0, float(np.max(anorm)), float(np.linalg.norm(d.C_lp)))
        xl = np.full(L, xi)
        zl = np.full(L, zeta)
    else:
        xl = np.zeros(0)
        zl = np.zeros(0)
    y = np.zeros(N)

    def op_A(Ms, ml):
        out = np.zeros(N)
        for Af, M in zip(Aflat, Ms):
            out += Af @ M.ravel()
        if L:
            out += A_lp @ ml
        return out

    def op_At(v):
        mats = [np.tensordot(v, A, axes=1) for A in d.A_sdp]
        return mats, (A_lp.T @ v if L else np.zeros(0))

    best = None
    info: dict = {}
    status = SdpStatus.MAX_ITER
    it = 0
    stall = 0
    for it in range(1, st.max_iter + 1):
        AtY, at_lp = op_At(y)
        Rd = [C - Z - M for C, Z, M in zip(d.C_sdp, Zs, AtY)]
        rd_lp = d.C_lp - zl - at_lp
        rp = b - op_A(Xs, xl)
        gap = _inner(Xs, Zs, xl, zl)
        mu = gap / nu
        pobj = _inner(d.C_sdp, Xs, d.C_lp, xl)
        dobj = float(b @ y)
        pinf = np.linalg.norm(rp) / (1 + normb)
        dinf = math.sqrt(sum(np.sum(R * R) for R in Rd) + rd_lp @ rd_lp) / (1 + normC)
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        err = max(pinf, dinf, relgap)
        if best is None or err < best[0]:
            best = (err, y.copy(), pobj, dobj)
        info = dict(pinf=pinf, dinf=dinf, relgap=relgap, pobj=pobj, dobj=dobj)
        if err <= st.tol:
            status = SdpStatus.OPTIMAL
            break
        # infeasibility certificates
        if pobj < 0 and np.linalg.norm(op_A(Xs, xl)) / -pobj < st.infeas_tol and dinf > st.tol:
            status = SdpStatus.INFEASIBLE
            break
        if dobj > 0:
            resid = math.sqrt(sum(np.sum((M + Z) ** 2) for M, Z in zip(AtY, Zs)) + np.sum((at_lp + zl) ** 2))
            if resid / dobj < st.infeas_tol and pinf > st.tol:
                status = SdpStatus.UNBOUNDED
                break

        # Schur complement matrix M_ij = <A_i, X A_j Z^-1>
        M = np.zeros((N, N))
        Zinvs = []
        try:
            for A, Af, X, Z in zip(d.A_sdp, Aflat, Xs, Zs):
                Lz = np.linalg.cholesky(Z)
                Lzi = sla.solve_triangular(Lz, np.eye(Z.shape[0]), lower=True)
                Zi = Lzi.T @ Lzi
                Zinvs.append(Zi)
                T = np.matmul(np.matmul(X, A), Zi)
                M += Af @ T.reshape(N, -1).T
        except np.linalg.LinAlgError:
            status = SdpStatus.NUMERICAL_FAILURE
            break
        if L:
            M += (A_lp * (xl / zl)) @ A_lp.T
        M = 0.5 * (M + M.T)
        try:
            cf = sla.cho_factor(M)
            solveM = lambda r: sla.cho_solve(cf, r)  # noqa: E731
        except (np.linalg.LinAlgError, ValueError):
            reg = 1e-14 * max(1.0, float(np.max(np.abs(np.diag(M)))))
            try:
                cf = sla.cho_factor(M + reg * np.eye(N))
                solveM = lambda r: sla.cho_solve(cf, r)  # noqa: E731
            except (np.linalg.LinAlgError, ValueError):
                status = SdpStatus.NUMERICAL_FAILURE
                break

        XRdZi = [X @ R @ Zi for X, R, Zi in zip(Xs, Rd, Zinvs)]
        xrd_lp = xl * rd_lp / zl if L else np.zeros(0)

        def direction(Rc, rc_lp):
            rhs = rp - op_A(Rc, rc_lp) + op_A(XRdZi, xrd_lp)
            dy = solveM(rhs)
            AtD, at_lp_d = op_At(dy)
            dZ = [R - Q for R, Q in zip(Rd, AtD)]
            dz_lp = rd_lp - at_lp_d
            dX = []
            for Rcb, X, dZb, Zi in zip(Rc, Xs, dZ, Zinvs):
                T = X @ dZb @ Zi
                D = Rcb - 0.5 * (T + T.T)
                dX.append(0.5 * (D + D.T))
            dx_lp = rc_lp - xl * dz_lp / zl if L else np.zeros(0)
            return dX, dy, dZ, dx_lp, dz_lp

        def steps(dX, dZ, dx_lp, dz_lp):
            ap = min([_max_step_psd(X, D) for X, D in zip(Xs, dX)], default=math.inf)
            ad = min([_max_step_psd(Z, D) for Z, D in zip(Zs, dZ)], default=math.inf)
            if L:
                ap = min(ap, _max_step_lp(xl, dx_lp))
                ad = min(ad, _max_step_lp(zl, dz_lp))
            return ap, ad

        # predictor
        Rc = [-X for X in Xs]
        rc_lp = -xl
        dXa, dya, dZa, dxa_lp, dza_lp = direction(Rc, rc_lp)
        ap, ad = steps(dXa, dZa, dxa_lp, dza_lp)
        ap, ad = min(1.0, ap), min(1.0, ad)
        gap_aff = _inner([X + ap * D for X, D in zip(Xs, dXa)], [Z + ad * D for Z, D in zip(Zs, dZa)],
                         xl + ap * dxa_lp, zl + ad * dza_lp)
        sigma = min(1.0, max(0.0, gap_aff / gap) ** 3) if gap > 0 else 0.0
        # corrector
        Rc = []
        for X, Zi, DX, DZ in zip(Xs, Zinvs, dXa, dZa):
            T = DX @ DZ @ Zi
            R = sigma * mu * Zi - X - 0.5 * (T + T.T)
            Rc.append(0.5 * (R + R.T))
        rc_lp = (sigma * mu / zl - xl - dxa_lp * dza_lp / zl) if L else np.zeros(0)
        dX, dy, dZ, dx_lp, dz_lp = direction(Rc, rc_lp)
        ap, ad = steps(dX, dZ, dx_lp, dz_lp)
        gamma = st.step_fraction
        ap = min(1.0, gamma * ap)
        ad = min(1.0, gamma * ad)
        if ap < 1e-12 and ad < 1e-12:
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
        Xs = [X + ap * D for X, D in zip(Xs, dX)]
        Xs = [0.5 * (X + X.T) for X in Xs]
        xl = xl + ap * dx_lp
        y = y + ad * dy
        Zs = [Z + ad * D for Z, D in zip(Zs, dZ)]
        Zs = [0.5 * (Z + Z.T) for Z in Zs]
        zl = zl + ad * dz_lp

    if status is SdpStatus.OPTIMAL:
        info["bound"] = info["pobj"] + d.offset
        return status, y, it, info
    if status in (SdpStatus.MAX_ITER, SdpStatus.NUMERICAL_FAILURE) and best is not None:
        err, ybest, pobj, dobj = best
        info.update(best_err=err)
        if err <= st.report_tol:
            info["bound"] = pobj + d.offset
            return SdpStatus.OPTIMAL, ybest, it, info
        return status, ybest, it, info
    return status, y, it, info


def solve_sdp(p: SdpProblem, settings: SdpSettings | None = None) -> SdpSolution:
    """Solve ``p`` (a maximization).  Deterministic for identical inputs."""
    st = settings or SdpSettings()
    try:
        d = _reduce(p)
    except _Trivial as t:
        return _trivial_solution(p, t)
    status, y, iters, info = _solve_std(d, st)
    x = d.x0 + d.basis @ y
    obj = p.value(x)
    resid = p.residual(x)
    bound = info.get("bound", math.inf)
    dgap = abs(bound - obj) if math.isfinite(bound) else math.inf
    if status is SdpStatus.OPTIMAL and (dgap > st.report_tol * (1 + abs(obj)) or resid > st.report_tol):
        status = SdpStatus.MAX_ITER
    return SdpSolution(status, x, obj, dgap, resid, iters, bound, info)


def _trivial_solution(p: SdpProblem, t: _Trivial) -> SdpSolution:
    N = p.num_vars
    if t.status is SdpStatus.OPTIMAL:
        # every variable pinned by equalities
        E, f = p.eq_matrix, p.eq_rhs
        x = np.linalg.lstsq(E, f, rcond=None)[0] if E.shape[0] else np.zeros(N)
        resid = p.residual(x)
        if resid > 1e-9:
            return SdpSolution(SdpStatus.INFEASIBLE, x, math.nan, math.inf, resid, 0)
        obj = p.value(x)
        return SdpSolution(SdpStatus.OPTIMAL, x, obj, 0.0, resid, 0, obj)
    return SdpSolution(t.status, np.full(N, math.nan), math.nan, math.inf, math.inf, 0)


# ---------------------------------------------------------------------------
# Plain-text dump
# ---------------------------------------------------------------------------


def dump_problem(p: SdpProblem) -> str:
    """Human-readable dump of ``p`` for cross-checking with external tools.

    Format::

        maximize <offset> + sum c_i x_i
        var <name> <lo> <hi> <c_i>
        block <name> <order>
        F0
        <rows>
        F <var name>
        <rows>
        ineq <coeffs...> >= <rhs>
        eq <coeffs...> = <rhs>
    """
    fmt = lambda v: repr(float(v))  # noqa: E731
    out = [f"maximize {fmt(p.offset)} + c.x", f"nvars {p.num_vars}"]
    for name, lo, hi, c in zip(p.names, p.lower, p.upper, p.objective):
        out.append(f"var {name} {fmt(lo)} {fmt(hi)} {fmt(c)}")
    for b in p.blocks:
        out.append(f"block {b.name or '-'} {b.order}")
        out.append("F0")
        out.extend(" ".join(fmt(v) for v in row) for row in b.const)
        for name, F in zip(p.names, b.coeffs):
            if np.any(F):
                out.append(f"F {name}")
                out.extend(" ".join(fmt(v) for v in row) for row in F)
    for row, r in zip(p.ineq_matrix, p.ineq_rhs):
        out.append("ineq " + " ".join(fmt(v) for v in row) + f" >= {fmt(r)}")
    for row, r in zip(p.eq_matrix, p.eq_rhs):
        out.append("eq " + " ".join(fmt(v) for v in row) + f" = {fmt(r)}")
    return "\n".join(out) + "\n"
