"""Simple undirected graphs, named builders, JSON I/O and DOT export.

Vertices are labelled ``1..n``.  The on-disk format is a JSON object::

    {"n": 6, "edges": [[1, 2], [2, 3]], "name": "F0"}

``name`` is optional.  Edges are unordered pairs; loops and repeated edges
are rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import GraphFormatError


@dataclass(frozen=True)
class Graph:
    """Vertex-labelled simple graph; ``edges`` holds sorted pairs ``(i, j)``, ``i < j``."""

    n: int
    edges: tuple[tuple[int, int], ...]
    name: str | None = field(default=None, compare=True)

    @property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges:
            A[i - 1, j - 1] = A[j - 1, i - 1] = 1
        A.setflags(write=False)
        return A

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def relabel(self, perm: dict[int, int], name: str | None = None) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return graph_from_edges(self.n, [(perm[i], perm[j]) for i, j in self.edges], name=name or self.name)

    def __str__(self) -> str:
        return self.name or f"graph(n={self.n}, m={len(self.edges)})"


@dataclass(frozen=True)
class BipartiteBridge:
    """0/1 biadjacency matrix ``K`` (n x m) joining G_A vertices to G_B vertices."""

    K: np.ndarray
    k_B: int | None = None

    def __post_init__(self) -> None:
        K = np.array(self.K, dtype=np.int64)
        if K.ndim != 2:
            raise ValueError("K must be a 2-D matrix")
        if not np.isin(K, (0, 1)).all():
            raise ValueError("K must contain only 0/1 entries")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    @property
    def shape(self) -> tuple[int, int]:
        return self.K.shape

    def key(self) -> tuple[int, ...]:
        """Row-major vectorization, used for lexicographic tie-breaking."""
        return tuple(int(v) for v in self.K.ravel())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteBridge):
            return NotImplemented
        return self.K.shape == other.K.shape and np.array_equal(self.K, other.K)

    def __hash__(self) -> int:
        return hash((self.K.shape, self.key()))


def graph_from_edges(n: int, edges: Iterable[Iterable[int]], name: str | None = None) -> Graph:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise GraphFormatError(f"vertex count must be a positive integer, got {n!r}")
    seen: set[tuple[int, int]] = set()
    for e in edges:
        pair = tuple(e)
        if len(pair) != 2:
            raise GraphFormatError(f"edge {pair!r} is not a pair")
        i, j = pair
        if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in (i, j)):
            raise GraphFormatError(f"edge {pair!r} has non-integer labels")
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphFormatError(f"edge {pair!r} has a label outside 1..{n}")
        if i == j:
            raise GraphFormatError(f"loop at vertex {i}")
        key = (int(min(i, j)), int(max(i, j)))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}")
        seen.add(key)
    return Graph(int(n), tuple(sorted(seen)), name)


def graph_from_adjacency(A, name: str | None = None) -> Graph:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphFormatError("adjacency must be square")
    if not np.array_equal(A, A.T) or np.any(np.diag(A) != 0) or not np.isin(A, (0, 1)).all():
        raise GraphFormatError("adjacency must be symmetric 0/1 with zero diagonal")
    n = A.shape[0]
    edges = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if A[i, j]]
    return graph_from_edges(n, edges, name)


# ---------------------------------------------------------------------------
# Builtins
# ---------------------------------------------------------------------------

# Fulvene: five-ring 1-2-3-4-5 with the exocyclic vertex 6 on ring vertex 4.
# This labelling is the one whose arbitrarily bridgeable subsets are
#   k=1: {1},{2},{3},{4},{5}
#   k=2: {1,2},{1,3},{1,4},{2,4},{2,5},{3,4},{4,5}
#   k=3: {1,2,4},{1,3,4},{2,4,5}
# (see tests/test_fixtures.py for the permutation search that pins it).
FULVENE_EDGES = ((1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (4, 6))

_BUILTIN_RE = re.compile(r"^\s*(P|C|COMB)\s*\(?\s*(\d+)\s*\)?\s*$", re.IGNORECASE)


def path_graph(n: int) -> Graph:
    return graph_from_edges(n, [(i, i + 1) for i in range(1, n)], name=f"P({n})")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphFormatError("cycle needs at least 3 vertices")
    return graph_from_edges(n, [(i, i + 1) for i in range(1, n)] + [(1, n)], name=f"C({n})")


def comb_graph(k: int) -> Graph:
    """Path ``1..k`` with a pendant vertex ``k+i`` hung on each path vertex ``i``."""
    if k < 1:
        raise GraphFormatError("comb needs k >= 1")
    edges = [(i, i + 1) for i in range(1, k)] + [(i, k + i) for i in range(1, k + 1)]
    return graph_from_edges(2 * k, edges, name=f"COMB({k})")


def fulvene() -> Graph:
    return graph_from_edges(6, FULVENE_EDGES, name="F0")


def bifulvene() -> Graph:
    """Two fulvenes joined by the edges 1-7 and 2-8 (vertices 7..12 are the second copy).

    Joining 1-8 and 2-7 instead gives an isomorphic graph, since swapping 1<->2
    and 3<->5 is an automorphism of the fulvene.
    """
    second = [(i + 6, j + 6) for i, j in FULVENE_EDGES]
    return graph_from_edges(12, [*FULVENE_EDGES, *second, (1, 7), (2, 8)], name="F1")


def builtin(name: str) -> Graph:
    """Resolve ``P(n)``, ``C(n)``, ``COMB(k)``, ``K2``, ``F0`` or ``F1`` (also ``P4``-style)."""
    key = name.strip()
    upper = key.upper()
    if upper == "K2":
        return graph_from_edges(2, [(1, 2)], name="K2")
    if upper == "F0":
        return fulvene()
    if upper == "F1":
        return bifulvene()
    m = _BUILTIN_RE.match(key)
    if not m:
        raise GraphFormatError(f"unknown builtin graph {name!r}")
    kind, size = m.group(1).upper(), int(m.group(2))
    if size < 1:
        raise GraphFormatError(f"invalid size in {name!r}")
    if kind == "P":
        return path_graph(size)
    if kind == "C":
        return cycle_graph(size)
    return comb_graph(size)


def is_builtin_name(name: str) -> bool:
    return name.strip().upper() in ("K2", "F0", "F1") or bool(_BUILTIN_RE.match(name))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def serialize_graph(G: Graph) -> str:
    obj: dict = {"n": G.n, "edges": [list(e) for e in G.edges]}
    if G.name is not None:
        obj["name"] = G.name
    return json.dumps(obj)


def parse_graph(text: str) -> Graph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(obj, dict):
        raise GraphFormatError("graph JSON must be an object")
    unknown = set(obj) - {"n", "edges", "name"}
    if unknown:
        raise GraphFormatError(f"unknown fields {sorted(unknown)}")
    if "n" not in obj or "edges" not in obj:
        raise GraphFormatError("graph JSON needs 'n' and 'edges'")
    if not isinstance(obj["edges"], list):
        raise GraphFormatError("'edges' must be a list")
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise GraphFormatError("'name' must be a string")
    return graph_from_edges(obj["n"], obj["edges"], name=name)


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_export(G: Graph, highlight_bridge: BipartiteBridge | None = None) -> str:
    """Undirected DOT text; edges of ``highlight_bridge`` get ``style=dashed``.

    The bridge's rows are vertices ``1..n_A`` of ``G`` and its columns are the
    vertices ``n_A+1..n_A+m``.
    """
    bridge_edges: set[tuple[int, int]] = set()
    if highlight_bridge is not None:
        nA, m = highlight_bridge.shape
        if nA + m != G.n:
            raise ValueError(f"bridge shape {highlight_bridge.shape} does not match graph order {G.n}")
        for i, j in zip(*np.nonzero(highlight_bridge.K)):
            bridge_edges.add((int(i) + 1, nA + int(j) + 1))
    lines = [f"graph {_dot_id(G.name or 'G')} {{"]
    for v in range(1, G.n + 1):
        lines.append(f"  {v};")
    for i, j in G.edges:
        attr = " [style=dashed]" if (i, j) in bridge_edges else ""
        lines.append(f"  {i} -- {j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
