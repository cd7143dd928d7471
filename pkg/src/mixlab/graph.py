"""Sparse labelled graphs and multigraphs on vertices ``0..n-1``.

Both classes are immutable after construction and store adjacency in CSR
form (``indptr``, ``indices``, ``mult``) with sorted neighbour lists.  Edge
multiplicity is carried explicitly; a :class:`Graph` is simply a
:class:`MultiGraph` whose multiplicities are all one.

Vertex sets are accepted as any iterable of ints (or a boolean mask of
length ``n``) and normalised to a sorted ``int64`` array.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

__all__ = [
    "Graph",
    "MultiGraph",
    "as_vertex_set",
    "boundary_size",
    "internal_edges",
    "degree_sum",
    "is_connected_set",
    "connected_components",
    "largest_component",
    "is_connected",
    "induced_subgraph",
    "parse_edge_list",
    "format_edge_list",
    "read_edge_list",
    "write_edge_list",
]


class MultiGraph:
    """Undirected multigraph without loops.

    Use :meth:`from_edges` to build one; the constructor takes canonical
    edge arrays (``u < v``, lexicographically sorted, unique) plus their
    multiplicities.
    """

    simple = False

    def __init__(self, n: int, eu: np.ndarray, ev: np.ndarray, mult: np.ndarray):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = int(n)
        self.eu = np.ascontiguousarray(eu, dtype=np.int64)
        self.ev = np.ascontiguousarray(ev, dtype=np.int64)
        self.mult = np.ascontiguousarray(mult, dtype=np.int64)
        for arr in (self.eu, self.ev, self.mult):
            arr.setflags(write=False)
        self.m = int(self.mult.sum())

        src = np.concatenate([self.eu, self.ev])
        dst = np.concatenate([self.ev, self.eu])
        w = np.concatenate([self.mult, self.mult])
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=self.indptr[1:])
        self.indices = dst
        self.weights = w
        self.degrees = np.bincount(src, weights=w, minlength=self.n).astype(np.int64)
        for arr in (self.indptr, self.indices, self.weights, self.degrees):
            arr.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges, *, drop_loops: bool = False):
        """Build from an iterable of ``(u, v)`` pairs.

        Repeated pairs accumulate multiplicity (for :class:`Graph` they
        collapse).  Loops raise ``ValueError`` unless ``drop_loops``.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range 0..{n - 1}")
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            if not drop_loops:
                raise ValueError(f"loop at vertex {int(arr[loops][0, 0])}")
            arr = arr[~loops]
        a = np.minimum(arr[:, 0], arr[:, 1])
        b = np.maximum(arr[:, 0], arr[:, 1])
        key = a * max(n, 1) + b
        uniq, counts = np.unique(key, return_counts=True)
        eu, ev = uniq // max(n, 1), uniq % max(n, 1)
        if cls.simple:
            counts = np.ones_like(counts)
        return cls(n, eu, ev, counts)

    @classmethod
    def empty(cls, n: int):
        z = np.zeros(0, dtype=np.int64)
        return cls(n, z, z, z)

    # -- accessors --------------------------------------------------------

    def neighbours(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def multiplicities(self, v: int) -> np.ndarray:
        return self.weights[self.indptr[v]:self.indptr[v + 1]]

    def multiplicity(self, u: int, v: int) -> int:
        nb = self.neighbours(u)
        i = np.searchsorted(nb, v)
        if i < len(nb) and nb[i] == v:
            return int(self.multiplicities(u)[i])
        return 0

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array, repeated by multiplicity."""
        pairs = np.stack([self.eu, self.ev], axis=1)
        return np.repeat(pairs, self.mult, axis=0)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric adjacency matrix with multiplicities as entries."""
        return sp.csr_matrix(
            (self.weights.astype(float), self.indices, self.indptr),
            shape=(self.n, self.n),
        )

    def adjacency_lists(self) -> list[dict[int, int]]:
        """Per-vertex ``{neighbour: multiplicity}`` dicts (pure-Python views)."""
        ip, ind, w = self.indptr.tolist(), self.indices.tolist(), self.weights.tolist()
        return [dict(zip(ind[ip[v]:ip[v + 1]], w[ip[v]:ip[v + 1]])) for v in range(self.n)]

    def is_simple(self) -> bool:
        return bool(np.all(self.mult == 1))

    def to_multigraph(self) -> "MultiGraph":
        return MultiGraph(self.n, self.eu, self.ev, self.mult)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.eu, other.eu)
            and np.array_equal(self.ev, other.ev)
            and np.array_equal(self.mult, other.mult)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, m={self.m})"


class Graph(MultiGraph):
    """Simple undirected graph: no loops, no parallel edges."""

    simple = True

    def __init__(self, n, eu, ev, mult=None):
        if mult is None:
            mult = np.ones(len(eu), dtype=np.int64)
        mult = np.asarray(mult)
        if mult.size and np.any(mult != 1):
            raise ValueError("Graph cannot hold parallel edges; use MultiGraph")
        super().__init__(n, eu, ev, mult)


# -- vertex sets ----------------------------------------------------------


def as_vertex_set(G: MultiGraph, S) -> np.ndarray:
    """Normalise ``S`` to a sorted array of distinct vertex ids of ``G``."""
    if isinstance(S, np.ndarray) and S.dtype == bool:
        if S.shape != (G.n,):
            raise ValueError("boolean mask must have length n")
        return np.flatnonzero(S)
    arr = np.fromiter((int(x) for x in S), dtype=np.int64) if not isinstance(
        S, np.ndarray) else S.astype(np.int64, copy=False).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= G.n):
        raise ValueError(f"vertex id out of range 0..{G.n - 1}")
    out = np.unique(arr)
    if out.size != arr.size:
        raise ValueError("vertex set contains duplicates")
    return out


def _mask(G: MultiGraph, S) -> np.ndarray:
    mask = np.zeros(G.n, dtype=bool)
    mask[as_vertex_set(G, S)] = True
    return mask


def boundary_size(G: MultiGraph, S) -> int:
    """``|∂_G(S)|``: edges with exactly one endpoint in ``S``, with multiplicity."""
    mask = _mask(G, S)
    return int(G.mult[mask[G.eu] != mask[G.ev]].sum())


def internal_edges(G: MultiGraph, S) -> int:
    """``e_G(S)``: edges with both endpoints in ``S``, with multiplicity."""
    mask = _mask(G, S)
    return int(G.mult[mask[G.eu] & mask[G.ev]].sum())


def degree_sum(G: MultiGraph, S) -> int:
    """``deg_G(S) = 2 e_G(S) + |∂_G(S)|``."""
    return int(G.degrees[as_vertex_set(G, S)].sum())


def is_connected_set(G: MultiGraph, S) -> bool:
    """True iff the induced subgraph ``G[S]`` is connected."""
    members = as_vertex_set(G, S)
    if members.size == 0:
        raise ValueError("connectivity of the empty set is undefined")
    inside = set(members.tolist())
    start = members[0]
    seen = {int(start)}
    queue = deque([int(start)])
    ip, ind = G.indptr, G.indices
    while queue:
        v = queue.popleft()
        for w in ind[ip[v]:ip[v + 1]].tolist():
            if w in inside and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(inside)


def connected_components(G: MultiGraph) -> list[np.ndarray]:
    """Partition of ``V(G)`` into components, ordered by smallest member."""
    if G.n == 0:
        return []
    _, labels = csgraph.connected_components(G.adjacency(), directed=False)
    order = np.argsort(labels, kind="stable")
    cuts = np.flatnonzero(np.diff(labels[order])) + 1
    blocks = np.split(order, cuts)
    blocks.sort(key=lambda b: int(b[0]))
    return blocks


def is_connected(G: MultiGraph) -> bool:
    return G.n > 0 and len(connected_components(G)) == 1


def largest_component(G: MultiGraph) -> tuple[np.ndarray, int]:
    """A maximum-order component and its order ``ℓ_1(G)``.

    Ties go to the component containing the smallest vertex label.
    """
    if G.n < 1:
        raise ValueError("graph has no vertices")
    blocks = connected_components(G)
    best = max(blocks, key=lambda b: (len(b), -int(b[0])))
    return best, len(best)


def induced_subgraph(G: MultiGraph, S) -> tuple[MultiGraph, np.ndarray]:
    """``G[S]`` relabelled densely; returns the subgraph and the kept ids.

    ``kept[i]`` is the original label of new vertex ``i``.
    """
    kept = as_vertex_set(G, S)
    new_id = np.full(G.n, -1, dtype=np.int64)
    new_id[kept] = np.arange(kept.size)
    sel = (new_id[G.eu] >= 0) & (new_id[G.ev] >= 0)
    cls = type(G)
    sub = cls(kept.size, new_id[G.eu[sel]], new_id[G.ev[sel]], G.mult[sel])
    return sub, kept


# -- edge-list text format ------------------------------------------------


def parse_edge_list(text: str, *, multigraph: bool = False) -> MultiGraph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"`` (0-based).

    Loops, out-of-range ids and a wrong line count are rejected.  In simple
    mode a repeated pair is an error; in multigraph mode it adds
    multiplicity.
    """
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty edge list")
    try:
        n, m = (int(x) for x in lines[0])
    except ValueError as exc:
        raise ValueError("header must be 'n m'") from exc
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"header promises {m} edges, found {len(body)}")
    pairs = []
    for k, parts in enumerate(body, start=2):
        if len(parts) != 2:
            raise ValueError(f"line {k}: expected 'u v'")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"line {k}: vertex out of range 0..{n - 1}")
        if u == v:
            raise ValueError(f"line {k}: loop at {u}")
        pairs.append((u, v))
    if multigraph:
        return MultiGraph.from_edges(n, pairs)
    G = Graph.from_edges(n, pairs)
    if G.m != m:
        raise ValueError("repeated edge in simple edge list")
    return G


def format_edge_list(G: MultiGraph) -> str:
    edges = G.edges()
    out = [f"{G.n} {G.m}"]
    out.extend(f"{u} {v}" for u, v in edges.tolist())
    return "\n".join(out) + "\n"


def read_edge_list(path, *, multigraph: bool = False) -> MultiGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), multigraph=multigraph)


def write_edge_list(G: MultiGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(G))
