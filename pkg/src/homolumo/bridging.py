"""Bridged graphs, arbitrary bridgeability and side constraints on bridges.

A bridge joins G_A (n vertices) to G_B (m vertices) through an n x m 0/1
matrix K; the bridged graph has adjacency ``[[A, K], [K^T, B]]`` with G_A
vertices labelled 1..n and G_B vertices n+1..n+m.

A vertex subset s of G_B is *arbitrarily bridgeable* when the principal
submatrix ``B^{-1}[s, s]`` of the exact inverse vanishes.  The condition is
checked on the subset directly: moving s to the front by a permutation P
turns ``B^{-1}`` into ``P^T B^{-1} P`` whose leading block is exactly
``B^{-1}[s, s]``, so no permutation has to be searched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import NotBridgeableError, NotInvertibleError
from .graph import BipartiteBridge, Graph, graph_from_adjacency
from .linalg import RationalMatrix, rational_inverse


def bridge(GA: Graph, GB: Graph, K: BipartiteBridge | np.ndarray, name: str | None = None) -> Graph:
    """The bridged graph ``B_K(G_A, G_B)``."""
    Km = K.K if isinstance(K, BipartiteBridge) else np.asarray(K)
    if Km.shape != (GA.n, GB.n):
        raise ValueError(f"K has shape {Km.shape}, expected {(GA.n, GB.n)}")
    C = np.block([[GA.adjacency, Km], [Km.T, GB.adjacency]])
    if name is None and GA.name and GB.name:
        name = f"B({GA.name},{GB.name})"
    return graph_from_adjacency(C, name=name)


def exact_inverse(G: Graph) -> RationalMatrix:
    inv = rational_inverse(G.adjacency)
    if inv is None:
        raise NotInvertibleError(f"{G} is not invertible")
    return inv


def is_arbitrarily_bridgeable(GB: Graph, subset: Iterable[int], *, inverse: RationalMatrix | None = None) -> bool:
    """True iff ``B^{-1}`` restricted to ``subset x subset`` is the zero matrix."""
    idx = sorted({int(v) - 1 for v in subset})
    if not idx:
        raise ValueError("subset must be non-empty")
    if idx[0] < 0 or idx[-1] >= GB.n:
        raise ValueError(f"subset {sorted(subset)} outside 1..{GB.n}")
    Binv = inverse if inverse is not None else exact_inverse(GB)
    if 2 * len(idx) > GB.n:
        return False
    return Binv.submatrix(idx, idx).is_zero()


def enumerate_bridgeable_subsets(GB: Graph, k: int) -> list[tuple[int, ...]]:
    """All arbitrarily bridgeable k-subsets of G_B, lexicographically sorted."""
    Binv = exact_inverse(GB)
    if not 1 <= k <= GB.n // 2:
        raise ValueError(f"k must be in 1..{GB.n // 2}")
    return [
        s
        for s in itertools.combinations(range(1, GB.n + 1), k)
        if is_arbitrarily_bridgeable(GB, s, inverse=Binv)
    ]


def kbk_zero_check(GB: Graph, bridge_vertices: Sequence[int], K) -> bool:
    """Exact test of ``K B^{-1} K^T = 0`` for a K supported on ``bridge_vertices``."""
    Km = K.K if isinstance(K, BipartiteBridge) else np.asarray(K)
    cols = {int(v) - 1 for v in bridge_vertices}
    outside = [j for j in range(GB.n) if j not in cols]
    if np.any(Km[:, outside] != 0):
        raise ValueError("K has entries outside the bridge columns")
    Binv = exact_inverse(GB)
    Kr = RationalMatrix.from_rows(Km.tolist())
    return (Kr @ Binv @ Kr.transpose()).is_zero()


def format_bridging(K: BipartiteBridge | np.ndarray, bridge_vertices: Sequence[int]) -> str:
    """Bridge notation such as ``1↦3,5; 2↦6`` (G_B vertex ↦ G_A vertices)."""
    Km = K.K if isinstance(K, BipartiteBridge) else np.asarray(K)
    parts = []
    for j in bridge_vertices:
        targets = [str(i + 1) for i in np.nonzero(Km[:, j - 1])[0]]
        parts.append(f"{j}↦{','.join(targets) if targets else '∅'}")
    return "; ".join(parts)


def parse_bridging(text: str, n: int, m: int) -> BipartiteBridge:
    """Inverse of :func:`format_bridging` (``->`` is accepted for ``↦``)."""
    K = np.zeros((n, m), dtype=np.int64)
    for part in filter(None, (s.strip() for s in text.split(";"))):
        head, sep, tail = part.replace("->", "↦").partition("↦")
        if not sep:
            raise ValueError(f"bad bridging term {part!r}")
        j = int(head)
        if not 1 <= j <= m:
            raise ValueError(f"G_B vertex {j} outside 1..{m}")
        tail = tail.strip()
        if tail in ("∅", ""):
            continue
        for t in tail.split(","):
            i = int(t)
            if not 1 <= i <= n:
                raise ValueError(f"G_A vertex {i} outside 1..{n}")
            K[i - 1, j - 1] = 1
    return BipartiteBridge(K)


# ---------------------------------------------------------------------------
# Problems and constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSet:
    """Optional side constraints on a bridge.

    ``max_degree`` caps every vertex degree of the bridged graph.
    ``row_bounds[i]`` bounds the number of bridge edges at G_A vertex i+1;
    ``col_bounds[c]`` bounds the edges at the c-th bridge vertex of G_B.
    """

    max_degree: int | None = None
    row_bounds: tuple[tuple[int, int], ...] | None = None
    col_bounds: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self) -> None:
        if self.max_degree is not None and self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        for bounds in (self.row_bounds, self.col_bounds):
            for lo, hi in bounds or ():
                if lo < 0 or hi < lo:
                    raise ValueError(f"invalid bounds [{lo}, {hi}]")


@dataclass(frozen=True)
class BridgeProblem:
    """One bridging instance: G_A, G_B, the bridge vertices of G_B and side constraints."""

    GA: Graph
    GB: Graph
    bridge_vertices: tuple[int, ...]
    constraints: ConstraintSet = field(default_factory=ConstraintSet)

    def __post_init__(self) -> None:
        bv = tuple(int(v) for v in self.bridge_vertices)
        object.__setattr__(self, "bridge_vertices", bv)
        if not bv or len(set(bv)) != len(bv):
            raise ValueError("bridge vertices must be distinct and non-empty")
        if any(not 1 <= v <= self.GB.n for v in bv):
            raise ValueError(f"bridge vertices must lie in 1..{self.GB.n}")
        if 2 * len(bv) > self.GB.n:
            raise NotBridgeableError(f"k_B={len(bv)} exceeds m/2={self.GB.n / 2}")
        if rational_inverse(self.GA.adjacency) is None:
            raise NotInvertibleError(f"G_A ({self.GA}) is not invertible")
        if not is_arbitrarily_bridgeable(self.GB, bv, inverse=self.B_inv_exact):
            raise NotBridgeableError(f"G_B ({self.GB}) is not arbitrarily bridgeable over {set(bv)}")
        cs = self.constraints
        if cs.row_bounds is not None and len(cs.row_bounds) != self.GA.n:
            raise ValueError(f"row_bounds needs {self.GA.n} entries")
        if cs.col_bounds is not None and len(cs.col_bounds) != len(bv):
            raise ValueError(f"col_bounds needs {len(bv)} entries")

    @property
    def n(self) -> int:
        return self.GA.n

    @property
    def m(self) -> int:
        return self.GB.n

    @property
    def k_B(self) -> int:
        return len(self.bridge_vertices)

    @property
    def bridge_cols(self) -> tuple[int, ...]:
        """0-based G_B columns of the bridge vertices, in the given order."""
        return tuple(v - 1 for v in self.bridge_vertices)

    @cached_property
    def A_inv_exact(self) -> RationalMatrix:
        return exact_inverse(self.GA)

    @cached_property
    def B_inv_exact(self) -> RationalMatrix:
        inv = rational_inverse(self.GB.adjacency)
        if inv is None:
            raise NotInvertibleError(f"G_B ({self.GB}) is not invertible")
        return inv

    @cached_property
    def A_inv(self) -> np.ndarray:
        return self.A_inv_exact.to_numpy()

    @cached_property
    def B_inv(self) -> np.ndarray:
        return self.B_inv_exact.to_numpy()

    def embed(self, block) -> BipartiteBridge:
        """Full n x m bridge from its n x k_B block on the bridge columns."""
        block = np.asarray(block)
        if block.shape != (self.n, self.k_B):
            raise ValueError(f"bridge block has shape {block.shape}, expected {(self.n, self.k_B)}")
        K = np.zeros((self.n, self.m), dtype=np.int64)
        K[:, list(self.bridge_cols)] = np.rint(block).astype(np.int64)
        return BipartiteBridge(K, self.k_B)

    def block_of(self, K: BipartiteBridge) -> np.ndarray:
        return K.K[:, list(self.bridge_cols)]

    def describe(self) -> str:
        bits = [f"G_A={self.GA}", f"G_B={self.GB}", f"bridge={list(self.bridge_vertices)}"]
        if self.constraints.max_degree is not None:
            bits.append(f"max_degree={self.constraints.max_degree}")
        return ", ".join(bits)

    # -- linear side constraints over the n x k_B block, row-major ----------

    def edge_count_limits(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(row_lo, row_hi, col_lo, col_hi)``: allowed bridge-edge counts per G_A
        vertex and per bridge vertex, combining the degree cap and the bounds."""
        n, k = self.n, self.k_B
        cs = self.constraints
        row_lo, row_hi = np.zeros(n), np.full(n, np.inf)
        col_lo, col_hi = np.zeros(k), np.full(k, np.inf)
        if cs.max_degree is not None:
            row_hi = np.minimum(row_hi, cs.max_degree - self.GA.degrees())
            col_hi = np.minimum(col_hi, cs.max_degree - self.GB.degrees()[list(self.bridge_cols)])
        if cs.row_bounds is not None:
            row_lo = np.maximum(row_lo, [lo for lo, _ in cs.row_bounds])
            row_hi = np.minimum(row_hi, [hi for _, hi in cs.row_bounds])
        if cs.col_bounds is not None:
            col_lo = np.maximum(col_lo, [lo for lo, _ in cs.col_bounds])
            col_hi = np.minimum(col_hi, [hi for _, hi in cs.col_bounds])
        return row_lo, row_hi, col_lo, col_hi

    def linear_rows(self) -> list[tuple[np.ndarray, float, float, str]]:
        """Side constraints as ``lo <= a . vec(K_block) <= hi`` rows.

        The first row is always the nonzero-bridge row ``sum K >= 1``; rows for
        edge-count limits follow only where a limit binds.  A row with
        ``hi < lo`` marks an infeasible instance.
        """
        n, k = self.n, self.k_B
        rows: list[tuple[np.ndarray, float, float, str]] = [(np.ones(n * k), 1.0, np.inf, "sum K >= 1")]
        row_lo, row_hi, col_lo, col_hi = self.edge_count_limits()
        for i in range(n):
            if row_lo[i] > 0 or row_hi[i] < k:
                a = np.zeros(n * k)
                a[i * k:(i + 1) * k] = 1
                rows.append((a, float(row_lo[i]), float(row_hi[i]), f"edges at G_A vertex {i + 1}"))
        for c in range(k):
            if col_lo[c] > 0 or col_hi[c] < n:
                a = np.zeros(n * k)
                a[c::k] = 1
                rows.append((a, float(col_lo[c]), float(col_hi[c]),
                             f"edges at G_B vertex {self.bridge_vertices[c]}"))
        return rows

    def untouched_degree_violations(self) -> list[str]:
        """Degree-cap violations at vertices no bridge can change."""
        md = self.constraints.max_degree
        if md is None:
            return []
        out = [f"degree of G_A vertex {v + 1} is {d} > {md}" for v, d in enumerate(self.GA.degrees()) if d > md]
        out += [
            f"degree of G_B vertex {v + 1} is {d} > {md}"
            for v, d in enumerate(self.GB.degrees())
            if d > md and v not in self.bridge_cols
        ]
        return out


@dataclass(frozen=True)
class BridgeValidation:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_bridge(problem: BridgeProblem, K: BipartiteBridge | np.ndarray) -> BridgeValidation:
    """Check a bridge against every constraint of ``problem``; list all violations."""
    Km = np.asarray(K.K if isinstance(K, BipartiteBridge) else K)
    if Km.shape != (problem.n, problem.m):
        raise ValueError(f"K has shape {Km.shape}, expected {(problem.n, problem.m)}")
    v: list[str] = []
    if not np.isin(Km, (0, 1)).all():
        v.append("K is not binary")
    outside = [j for j in range(problem.m) if j not in problem.bridge_cols]
    if np.any(Km[:, outside] != 0):
        v.append("K has edges at non-bridge vertices of G_B")
    if Km.sum() < 1:
        v.append("sum K >= 1 violated")
    cs = problem.constraints
    if cs.max_degree is not None:
        C = np.block([[problem.GA.adjacency, Km], [Km.T, problem.GB.adjacency]])
        deg = C.sum(axis=1)
        for idx in np.nonzero(deg > cs.max_degree)[0]:
            side, lab = ("G_A", idx + 1) if idx < problem.n else ("G_B", idx - problem.n + 1)
            v.append(f"degree of {side} vertex {lab} is {deg[idx]} > {cs.max_degree}")
    if cs.row_bounds is not None:
        for i, (lo, hi) in enumerate(cs.row_bounds):
            s = int(Km[i].sum())
            if not lo <= s <= hi:
                v.append(f"G_A vertex {i + 1} has {s} bridge edges, outside [{lo}, {hi}]")
    if cs.col_bounds is not None:
        for c, (lo, hi) in enumerate(cs.col_bounds):
            j = problem.bridge_cols[c]
            s = int(Km[:, j].sum())
            if not lo <= s <= hi:
                v.append(f"G_B vertex {j + 1} has {s} bridge edges, outside [{lo}, {hi}]")
    return BridgeValidation(not v, tuple(v))
