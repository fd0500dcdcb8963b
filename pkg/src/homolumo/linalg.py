"""Dense linear algebra: exact rational inverses and a Jacobi eigensolver.

Everything here works on small matrices (order <= 64).  Decisions that are
algebraic in nature (invertibility, vanishing of sub-blocks of an inverse)
are taken in exact rational arithmetic; spectra are computed in floating
point by cyclic Jacobi rotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
MAX_ORDER = 64


# ---------------------------------------------------------------------------
# Exact rational matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalMatrix:
    """Immutable matrix of exact rationals stored row by row."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.rows or not self.rows[0]:
            raise ValueError("RationalMatrix must be non-empty")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise ValueError("ragged rows")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(v) for v in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self.rows[i][j]

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.rows))
        return RationalMatrix(
            tuple(tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols) for row in self.rows)
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return RationalMatrix(tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)))

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.rows)))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(self.rows[i][j] for j in cols) for i in rows))

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    def is_identity(self) -> bool:
        return all(v == (i == j) for i, r in enumerate(self.rows) for j, v in enumerate(r))

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows])


def _as_int_rows(M) -> list[list[int]]:
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    rows = []
    for r in arr.tolist():
        out = []
        for v in r:
            iv = int(v)
            if iv != v:
                raise ValueError(f"non-integer entry {v!r}")
            out.append(iv)
        rows.append(out)
    return rows


def _bareiss_gauss_jordan(rows: list[list[int]]) -> tuple[int, list[list[int]]] | None:
    """Fraction-free Gauss-Jordan on ``[M | I]``.

    Returns ``(d, R)`` with ``M^{-1} = R / d``, or ``None`` when ``M`` is
    singular.  All intermediate values are integer minors, so every division
    is exact.
    """
    n = len(rows)
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    prev = 1
    for k in range(n):
        pivot = next((p for p in range(k, n) if aug[p][k] != 0), None)
        if pivot is None:
            return None
        if pivot != k:
            aug[k], aug[pivot] = aug[pivot], aug[k]
        pk = aug[k]
        akk = pk[k]
        for i in range(n):
            if i == k:
                continue
            ri = aug[i]
            aik = ri[k]
            aug[i] = [(akk * x - aik * y) // prev for x, y in zip(ri, pk)]
        prev = akk
    # left block is now prev * I
    return prev, [r[n:] for r in aug]


def determinant(M) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    a = _as_int_rows(M)
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot = next((p for p in range(k, n) if a[p][k] != 0), None)
        if pivot is None:
            return 0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rational_inverse(M) -> RationalMatrix | None:
    """Exact inverse of a square integer matrix, or ``None`` if singular."""
    rows = _as_int_rows(M)
    res = _bareiss_gauss_jordan(rows)
    if res is None:
        return None
    d, adj = res
    return RationalMatrix(tuple(tuple(Fraction(v, d) for v in r) for r in adj))


# ---------------------------------------------------------------------------
# Floating-point symmetric matrices
# ---------------------------------------------------------------------------


def as_symmetric(M, *, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as a finite, exactly symmetric float matrix.

    Returns a read-only float64 copy.
    """
    arr = np.array(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(arr, arr.T):
        raise ValueError(f"{name} is not symmetric")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted in descending order, optionally with eigenvectors.

    ``vectors[:, k]`` is the unit eigenvector of ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None
    sweeps: int = 0

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def min(self) -> float:
        return float(self.eigenvalues[-1])


def symmetric_eigen(M, want_vectors: bool = False) -> Spectrum:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``JACOBI_TOL`` times the norm of ``M`` (or ``JACOBI_MAX_SWEEPS``
    is reached).
    """
    a = np.array(as_symmetric(M))
    n = a.shape[0]
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds {MAX_ORDER}")
    v = np.eye(n)
    scale = np.linalg.norm(a)
    threshold = JACOBI_TOL * scale if scale > 0 else 0.0
    sweeps = 0
    iu = np.triu_indices(n, 1)
    while sweeps < JACOBI_MAX_SWEEPS:
        off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
        if off <= threshold:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    evals = np.diag(a).copy()
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    evals.setflags(write=False)
    vecs = None
    if want_vectors:
        vecs = v[:, order]
        vecs.setflags(write=False)
    return Spectrum(evals, vecs, sweeps)


def min_eigenvalue(M) -> float:
    return symmetric_eigen(M).min


def psd_check(M, tol: float = 1e-9) -> bool:
    """True iff the smallest eigenvalue of ``M`` is at least ``-tol``."""
    return min_eigenvalue(M) >= -tol


def schur_complement(A, B_inv, K) -> np.ndarray:
    """``S = A - K B^{-1} K^T``, symmetrized."""
    A = as_symmetric(A, name="A")
    B_inv = as_symmetric(B_inv, name="B_inv")
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape != (A.shape[0], B_inv.shape[0]):
        raise ValueError(f"K has shape {K.shape}, expected {(A.shape[0], B_inv.shape[0])}")
    S = A - K @ B_inv @ K.T
    return 0.5 * (S + S.T)
