"""Seeded random-graph models and host-graph diagnostics.

Every sampler takes a ``seed`` that is either an ``int`` or a
:class:`Seed`; identical seeds give identical edge lists.  Randomness comes
from numpy's PCG64 keyed by ``SeedSequence(master, spawn_key=(stream,))``,
which is platform independent.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, MultiGraph, read_edge_list

__all__ = [
    "Seed",
    "make_rng",
    "HostSpec",
    "parse_host_spec",
    "build_host",
    "complete_graph",
    "path_graph",
    "cycle_graph",
    "star_graph",
    "circulant_graph",
    "random_regular",
    "gen_gnp",
    "perturb",
    "gen_newman_watts",
    "percolate",
    "percolate_host",
    "degeneracy",
    "second_eigenvalue",
    "EigenvalueError",
]

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            val = getattr(self, name)
            if not 0 <= val <= _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def child(self, stream: int) -> "Seed":
        return Seed(self.master, stream)


def _as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed), 0)


def make_rng(seed) -> np.random.Generator:
    s = _as_seed(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(s.master, spawn_key=(s.stream,))))


# -- deterministic constructions ------------------------------------------


def complete_graph(n: int) -> Graph:
    u, v = np.triu_indices(n, k=1)
    return Graph(n, u, v)


def path_graph(n: int) -> Graph:
    u = np.arange(max(n - 1, 0))
    return Graph(n, u, u + 1)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return circulant_graph(n, [1])


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with centre 0."""
    v = np.arange(1, leaves + 1)
    return Graph(leaves + 1, np.zeros_like(v), v)


def circulant_graph(n: int, offsets) -> Graph:
    """Vertices ``i`` and ``i + o (mod n)`` adjacent for every offset ``o``."""
    offsets = sorted({int(o) for o in offsets})
    if any(o <= 0 or 2 * o >= n for o in offsets):
        raise ValueError("offsets must satisfy 0 < o < n/2")
    i = np.arange(n)
    pairs = np.concatenate([np.stack([i, (i + o) % n], axis=1) for o in offsets]) if offsets else np.zeros((0, 2), int)
    return Graph.from_edges(n, pairs)


def random_regular(n: int, d: int, seed, max_attempts: int = 10_000) -> Graph:
    """Uniform simple ``d``-regular graph by configuration-model rejection.

    Each attempt pairs ``n*d`` half-edges uniformly; a pairing with a loop
    or repeated pair is discarded and the next substream is tried.
    """
    if n * d % 2 or d >= n or d < 0:
        raise ValueError("need n*d even and 0 <= d < n")
    base = _as_seed(seed)
    for attempt in range(max_attempts):
        rng = make_rng(Seed(base.master, (base.stream + attempt) & _U64))
        stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
        a, b = stubs.min(axis=1), stubs.max(axis=1)
        if np.any(a == b):
            continue
        key = a * n + b
        if np.unique(key).size != key.size:
            continue
        return Graph.from_edges(n, stubs)
    raise RuntimeError(f"no simple {d}-regular pairing in {max_attempts} attempts")


# -- host specs -------------------------------------------------------------


@dataclass(frozen=True)
class HostSpec:
    kind: str
    n: int | None = None
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.kind, self.n, tuple(sorted(self.params.items()))))


_KINDS = ("complete", "circulant", "random-regular", "file")


def parse_host_spec(text: str) -> HostSpec:
    """Parse ``complete:n=100``, ``circulant:n=100,offsets=1;2;3``,
    ``random-regular:n=100,d=6`` or ``file:<path>``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _KINDS:
        raise ValueError(f"unknown host kind {kind!r}; expected one of {_KINDS}")
    if kind == "file":
        if not rest:
            raise ValueError("file host needs a path")
        return HostSpec("file", None, {"path": rest})
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed host parameter {item!r}")
        params[key.strip()] = val.strip()
    if "n" not in params:
        raise ValueError("host spec needs n=")
    n = int(params.pop("n"))
    if kind == "circulant":
        offs = params.get("offsets")
        if not offs:
            raise ValueError("circulant host needs offsets=")
        params["offsets"] = tuple(int(x) for x in re.split(r"[;\s]+", offs) if x)
    elif kind == "random-regular":
        if "d" not in params:
            raise ValueError("random-regular host needs d=")
        params["d"] = int(params["d"])
    return HostSpec(kind, n, params)


def build_host(spec: HostSpec, seed=0) -> MultiGraph:
    if spec.kind == "complete":
        return complete_graph(spec.n)
    if spec.kind == "circulant":
        return circulant_graph(spec.n, spec.params["offsets"])
    if spec.kind == "random-regular":
        return random_regular(spec.n, spec.params["d"], seed)
    return read_edge_list(spec.params["path"])


def host_degree(spec: HostSpec) -> int | None:
    """Regular degree implied by a host string, if known without building it."""
    if spec.kind == "complete":
        return spec.n - 1
    if spec.kind == "circulant":
        return 2 * len(spec.params["offsets"])
    if spec.kind == "random-regular":
        return spec.params["d"]
    return None


# -- random models ----------------------------------------------------------


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert ``k = v(v-1)/2 + w`` (``0 <= w < v``) for pair indices."""
    v = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    # float rounding can be off by one either way
    v -= (v * (v - 1) // 2 > k)
    v += ((v + 1) * v // 2 <= k)
    w = k - v * (v - 1) // 2
    return w, v


def _sample_pair_indices(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``[0, total)`` kept independently with probability ``p``.

    Geometric skipping: expected cost proportional to the number kept.
    """
    if p <= 0.0 or total == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunk = max(1024, int(total * p * 1.1) + 64)
    out = []
    pos = -1
    while True:
        gaps = rng.geometric(p, size=chunk).astype(np.int64)
        idx = pos + np.cumsum(gaps)
        done = idx[-1] >= total
        if done:
            idx = idx[idx < total]
        out.append(idx)
        if done:
            break
        pos = int(idx[-1])
    return np.concatenate(out)


def gen_gnp(n: int, p: float, seed) -> Graph:
    """Binomial random graph ``G(n, p)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = make_rng(seed)
    idx = _sample_pair_indices(n * (n - 1) // 2, p, rng)
    w, v = _pair_from_index(idx)
    return Graph(n, *_sorted_pairs(w, v))


def _sorted_pairs(u: np.ndarray, v: np.ndarray):
    order = np.lexsort((v, u))
    return u[order], v[order]


def _union(n: int, *graphs: MultiGraph) -> Graph:
    eu = np.concatenate([g.eu for g in graphs])
    ev = np.concatenate([g.ev for g in graphs])
    return Graph.from_edges(n, np.stack([eu, ev], axis=1))


def perturb(G: MultiGraph, eps: float, seed) -> Graph:
    """``G ∪ R`` with ``R ~ G(n, eps/n)``; duplicate edges collapse."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    R = gen_gnp(G.n, min(1.0, eps / G.n), seed)
    return _union(G.n, G, R)


def gen_newman_watts(n: int, k: int, eps: float, seed) -> Graph:
    """Newman–Watts small world ``H_{n,k,eps}``.

    The circulant band with offsets ``1..k`` plus every non-band pair
    independently with probability ``eps/n``.  ``eps = 0`` gives the band.
    """
    if not (1 <= k and 2 * k < n):
        raise ValueError("need 1 <= k < n/2")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    band = circulant_graph(n, range(1, k + 1))
    if eps == 0:
        return band
    R = gen_gnp(n, min(1.0, eps / n), seed)
    gap = (R.ev - R.eu)
    in_band = (gap <= k) | (n - gap <= k)
    extra = Graph(n, R.eu[~in_band], R.ev[~in_band])
    return _union(n, band, extra)


def percolate(G: MultiGraph, p: float, seed) -> Graph:
    """Keep each edge of a simple host independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not G.is_simple():
        raise ValueError("percolation host must be simple")
    rng = make_rng(seed)
    keep = rng.random(len(G.eu)) < p
    return Graph(G.n, G.eu[keep], G.ev[keep])


def percolate_host(spec: HostSpec, p: float, seed) -> Graph:
    """``G_p`` for a host given by spec.

    A complete host is never materialised: ``(K_n)_p`` is sampled directly as
    ``G(n, p)``, which has the same law.
    """
    s = _as_seed(seed)
    if spec.kind == "complete":
        return gen_gnp(spec.n, p, s)
    host = build_host(spec, s.child(s.stream + 1))
    return percolate(host, p, s)


# -- diagnostics -------------------------------------------------------------


def degeneracy(G: MultiGraph) -> tuple[int, list[int]]:
    """Degeneracy ``Δ`` and an ordering in which every vertex has at most
    ``Δ`` earlier neighbours.

    Repeatedly removes a minimum-degree vertex, smallest label first (lazy
    heap, O(m log n)); the ordering is the reverse removal order.
    """
    n = G.n
    deg = G.degrees.astype(np.int64).tolist()
    heap = [(deg[v], v) for v in range(n)]
    heapq.heapify(heap)
    removed = [False] * n
    removal = []
    best = 0
    ip, ind, w = G.indptr.tolist(), G.indices.tolist(), G.weights.tolist()
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        best = max(best, d)
        removed[v] = True
        removal.append(v)
        for p in range(ip[v], ip[v + 1]):
            x = ind[p]
            if not removed[x]:
                deg[x] -= w[p]
                heapq.heappush(heap, (deg[x], x))
    return best, removal[::-1]


class EigenvalueError(RuntimeError):
    """Power iteration hit its iteration cap."""


def _top_eigenvalue(apply, n: int, tol: float, cap: int, rng) -> tuple[float, int]:
    x = rng.standard_normal(n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    for it in range(1, cap + 1):
        y = apply(x)
        theta = float(x @ y)
        resid = float(np.linalg.norm(y - theta * x))
        if resid <= tol:
            return theta, it
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, it
        x = y / norm
    raise EigenvalueError(f"power iteration did not reach tol={tol} in {cap} iterations")


def second_eigenvalue(G: MultiGraph, tol: float = 1e-6, seed=0) -> float:
    """``λ(G) = max(|λ_2|, |λ_n|)`` of the adjacency matrix of a regular graph.

    Two power iterations restricted to the complement of the all-ones
    vector: on ``A + dI`` (top value ``λ_2 + d``) and on ``dI - A`` (top value
    ``d - λ_n``).  Both shifted operators are positive semidefinite.  Each
    stops once the residual ``‖Mx − θx‖`` is at most ``tol``; the iteration
    cap is ``10·log(n)/tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    deg = G.degrees
    if G.n < 2:
        raise ValueError("need at least two vertices")
    d = int(deg[0])
    if np.any(deg != d):
        raise ValueError("second_eigenvalue requires a regular graph")
    A = G.adjacency()
    n = G.n
    cap = int(math.ceil(10 * math.log(n) / tol))
    rng = make_rng(seed)

    def deflate(y):
        return y - y.mean()

    top_plus, _ = _top_eigenvalue(lambda x: deflate(A @ x + d * x), n, tol, cap, rng)
    top_minus, _ = _top_eigenvalue(lambda x: deflate(d * x - A @ x), n, tol, cap, rng)
    lam2 = top_plus - d
    lamn = d - top_minus
    return max(abs(lam2), abs(lamn))
