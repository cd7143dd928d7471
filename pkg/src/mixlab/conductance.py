"""Edge flow, conductance, the connected-set profile and the Fountoulakis–Reed bound.

Levels are indexed by ``j = 1..J`` with ``p = 2^-j`` and
``J = ceil(log2 1/π_min)``.  A set ``S`` belongs to level ``j`` when
``p/2 <= π(S) <= p``; since ``π(S) = deg(S)/2e`` the test is done in exact
integer arithmetic, so sets sitting exactly on a dyadic boundary belong to
both neighbouring levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .generators import make_rng
from .graph import (
    MultiGraph,
    as_vertex_set,
    boundary_size,
    connected_components,
    degree_sum,
    is_connected,
)

__all__ = [
    "edge_flow",
    "conductance",
    "conductance_details",
    "enumerate_connected_sets",
    "iter_connected_sets",
    "sample_connected_sets",
    "Level",
    "ConductanceProfile",
    "conductance_profile",
    "level_count",
    "levels_of",
    "FRBound",
    "fr_bound",
    "NoConnectedSetError",
]

EXACT_N_MAX = 30


class NoConnectedSetError(ValueError):
    """No connected set of the requested size exists."""


def _proper(G: MultiGraph, S) -> np.ndarray:
    S = as_vertex_set(G, S)
    if S.size == 0 or S.size == G.n:
        raise ValueError("S must be a proper nonempty subset of V(G)")
    if G.m == 0:
        raise ValueError("graph has no edges")
    return S


def edge_flow(G: MultiGraph, S) -> float:
    """``Q_G(S) = |∂S| / 4e(G)``."""
    S = _proper(G, S)
    return boundary_size(G, S) / (4.0 * G.m)


def conductance_details(G: MultiGraph, S) -> dict:
    """Both conductance formulas, their agreement, and the lower bound
    ``|∂S| / 2deg(S)``."""
    S = _proper(G, S)
    m = G.m
    b = boundary_size(G, S)
    d = degree_sum(G, S)
    dc = 2 * m - d
    if d == 0 or dc == 0:
        raise ValueError("S or its complement has zero stationary mass")
    q = b / (4.0 * m)
    via_q = q / ((d / (2.0 * m)) * (dc / (2.0 * m)))
    direct = m * b / (d * dc)
    lower = b / (2.0 * d)
    if abs(via_q - direct) > 1e-12 * max(1.0, direct):
        raise ArithmeticError(f"conductance formulas disagree: {via_q!r} vs {direct!r}")
    if direct < lower - 1e-12:
        raise ArithmeticError("conductance below |∂S|/2deg(S)")
    return {"phi": direct, "phi_via_q": via_q, "lower_bound": lower,
            "boundary": b, "deg": d, "q": q}


def conductance(G: MultiGraph, S) -> float:
    """``Φ_G(S) = e(G)|∂S| / (deg(S) deg(V∖S))``."""
    return conductance_details(G, S)["phi"]


# -- enumeration ------------------------------------------------------------


def iter_connected_sets(G: MultiGraph, k_min: int, k_max: int,
                        roots=None) -> Iterator[tuple[tuple[int, ...], int, int]]:
    """Connected sets with their statistics, ``(members, e(S), deg(S))``.

    Canonical extension (ESU): every set is generated once, from its
    smallest vertex, by only ever adding vertices larger than that root
    which are new to the closed neighbourhood of the current set.
    ``roots`` limits the smallest member to the given vertices.
    """
    n = G.n
    if not 1 <= k_min <= k_max:
        raise ValueError("need 1 <= k_min <= k_max")
    k_max = min(k_max, n)
    adj = G.adjacency_lists()
    deg = G.degrees.tolist()

    def extend(sub, ext, nbhd, root, e, d):
        if len(sub) >= k_min:
            yield tuple(sorted(sub)), e, d
        if len(sub) == k_max:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            aw = adj[w]
            new_ext = ext + [u for u in aw if u > root and u not in nbhd]
            ew = 0
            for x in sub:
                ew += aw.get(x, 0)
            yield from extend(sub + [w], new_ext, nbhd | aw.keys(), root, e + ew, d + deg[w])

    for v in (range(n) if roots is None else roots):
        v = int(v)
        av = adj[v]
        yield from extend([v], [u for u in av if u > v], {v} | av.keys(), v, 0, deg[v])


def enumerate_connected_sets(G: MultiGraph, k_min: int, k_max: int) -> Iterator[tuple[int, ...]]:
    """Every G-connected set with ``k_min <= |S| <= k_max``, exactly once,
    as a sorted tuple.  The number of such sets can be exponential."""
    if k_max > G.n:
        raise ValueError("k_max exceeds n")
    for S, _, _ in iter_connected_sets(G, k_min, k_max):
        yield S


def _grow(G, adj, deg, rng, inS, root, stop):
    """Randomized breadth-first growth from ``root``.

    Yields ``(members, e, d)`` after every addition; ``stop(size, d)``
    ends the growth.  ``inS`` is a scratch boolean list, left cleared.
    """
    members = [root]
    inS[root] = True
    e, d = 0, deg[root]
    frontier = list(adj[root].keys())
    seen = set(frontier)
    seen.add(root)
    try:
        yield members, e, d
        while frontier and not stop(len(members), d):
            i = int(rng.integers(len(frontier)))
            frontier[i], frontier[-1] = frontier[-1], frontier[i]
            w = frontier.pop()
            aw = adj[w]
            for x, mu in aw.items():
                if inS[x]:
                    e += mu
                elif x not in seen:
                    seen.add(x)
                    frontier.append(x)
            members.append(w)
            inS[w] = True
            d += deg[w]
            yield members, e, d
    finally:
        for x in members:
            inS[x] = False


def sample_connected_sets(G: MultiGraph, k: int, count: int, seed) -> list[tuple[int, ...]]:
    """``count`` connected sets of size exactly ``k``.

    Each set grows by randomized breadth-first expansion from a uniform
    root among vertices whose component has at least ``k`` vertices.  The
    law is not uniform over connected sets, so anything derived from these
    samples is heuristic.
    """
    if not 1 <= k <= G.n:
        raise ValueError("need 1 <= k <= n")
    eligible = np.concatenate([c for c in connected_components(G) if c.size >= k] or [np.empty(0, np.int64)])
    if eligible.size == 0:
        raise NoConnectedSetError(f"no connected set of size {k}: every component is smaller")
    eligible.sort()
    rng = make_rng(seed)
    adj = G.adjacency_lists()
    deg = G.degrees.tolist()
    inS = [False] * G.n
    out = []
    for _ in range(count):
        root = int(eligible[rng.integers(eligible.size)])
        last = None
        for members, _, _ in _grow(G, adj, deg, rng, inS, root, lambda size, d: size >= k):
            last = members
        out.append(tuple(sorted(last)))
    return out


# -- profile ----------------------------------------------------------------


def level_count(G: MultiGraph) -> int:
    """``ceil(log2 1/π_min)``, computed in integers."""
    two_m = 2 * G.m
    dmin = int(G.degrees.min())
    if dmin == 0:
        raise ValueError("isolated vertex")
    J = 0
    while dmin << J < two_m:
        J += 1
    return J


def levels_of(d: int, two_m: int, J: int) -> list[int]:
    """Levels ``j`` in ``1..J`` with ``2^-j/2 <= d/two_m <= 2^-j``."""
    if d <= 0 or d >= two_m:
        return []
    j_hi = (two_m // d).bit_length() - 1  # largest j with d·2^j <= 2m
    out = []
    for j in (j_hi - 1, j_hi):
        if 1 <= j <= J and d << j <= two_m <= d << (j + 1):
            out.append(j)
    return out


@dataclass
class Level:
    j: int
    p: float
    phi: float
    witness: tuple[int, ...] | None

    def to_dict(self) -> dict:
        return {"j": self.j, "p": self.p, "phi": self.phi,
                "witness": None if self.witness is None else list(self.witness)}


@dataclass
class ConductanceProfile:
    """``Φ_G(2^-j)`` for every level, with the minimising set (``None``
    when no connected set falls in the level window, in which case
    ``phi = 1``)."""

    levels: list[Level]
    mode: str
    examined: int = 0

    @property
    def rigorous(self) -> bool:
        return self.mode == "exact"

    def phis(self) -> np.ndarray:
        return np.array([lv.phi for lv in self.levels])

    def to_dict(self) -> dict:
        return {"mode": self.mode, "levels": [lv.to_dict() for lv in self.levels]}


class _LevelMin:
    """Running minimum per level, exact in rationals.

    Ties on ``Φ`` go to the smaller set, then the lexicographically smaller
    member tuple.
    """

    def __init__(self, G: MultiGraph):
        self.m = G.m
        self.two_m = 2 * G.m
        self.J = level_count(G)
        self.best: dict[int, tuple] = {}
        self.examined = 0

    def offer(self, S: tuple, e: int, d: int) -> None:
        self.examined += 1
        js = levels_of(d, self.two_m, self.J)
        if not js:
            return
        b = d - 2 * e
        num, den = self.m * b, d * (self.two_m - d)
        for j in js:
            cur = self.best.get(j)
            if cur is None:
                self.best[j] = (num, den, S)
                continue
            lhs, rhs = num * cur[1], cur[0] * den
            if lhs < rhs or (lhs == rhs and (len(S), S) < (len(cur[2]), cur[2])):
                self.best[j] = (num, den, S)

    def profile(self, mode: str) -> ConductanceProfile:
        levels = []
        for j in range(1, self.J + 1):
            cur = self.best.get(j)
            p = 2.0 ** -j
            if cur is None:
                levels.append(Level(j, p, 1.0, None))
            else:
                levels.append(Level(j, p, cur[0] / cur[1], cur[2]))
        return ConductanceProfile(levels, mode, self.examined)


def conductance_profile(G: MultiGraph, mode: str = "exact", budget: int = 64, seed=0,
                        n_max_exact: int = EXACT_N_MAX) -> ConductanceProfile:
    """Minimum conductance over G-connected sets in each dyadic window.

    ``exact`` enumerates every connected proper subset and is refused above
    ``n_max_exact`` vertices.  ``sampled`` looks at every singleton, every
    adjacent pair, and for each level ``budget`` randomly grown sets (every
    prefix of a growth that lands in the window counts); its values are
    upper bounds on the true profile.
    """
    if G.m == 0 or not is_connected(G):
        raise ValueError("conductance profile needs a connected graph with an edge")
    acc = _LevelMin(G)
    if mode == "exact":
        if G.n > n_max_exact:
            raise ValueError(f"exact profile refused for n = {G.n} > {n_max_exact}")
        for S, e, d in iter_connected_sets(G, 1, G.n - 1):
            acc.offer(S, e, d)
        return acc.profile("exact")
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")

    deg = G.degrees.tolist()
    for v in range(G.n):
        acc.offer((v,), 0, deg[v])
    for u, v, mu in zip(G.eu.tolist(), G.ev.tolist(), G.mult.tolist()):
        acc.offer((u, v), mu, deg[u] + deg[v])
    rng = make_rng(seed)
    adj = G.adjacency_lists()
    inS = [False] * G.n
    two_m = acc.two_m
    for j in range(1, acc.J + 1):
        cap = two_m >> j  # largest d with d·2^j <= 2m

        def stop(size, d, cap=cap):
            return d > cap or size >= G.n - 1

        for _ in range(budget):
            root = int(rng.integers(G.n))
            for members, e, d in _grow(G, adj, deg, rng, inS, root, stop):
                if d > cap or len(members) >= G.n:
                    break
                if levels_of(d, two_m, acc.J):
                    acc.offer(tuple(sorted(members)), e, d)
    return acc.profile("sampled")


@dataclass
class FRBound:
    bound: float
    fr_sum: float
    c0: float
    profile: ConductanceProfile = field(repr=False)

    @property
    def rigorous(self) -> bool:
        return self.profile.rigorous

    def to_dict(self) -> dict:
        return {"levels": [lv.to_dict() for lv in self.profile.levels],
                "fr_sum": self.fr_sum, "bound": self.bound, "c0": self.c0,
                "mode": self.profile.mode, "rigorous": self.rigorous}


def fr_bound(G: MultiGraph, C0: float = 1.0, mode: str = "exact", budget: int = 64,
             seed=0, n_max_exact: int = EXACT_N_MAX) -> FRBound:
    """``C0 · Σ_j Φ_G(2^-j)^-2``.  Sampled mode can only overestimate the
    profile, so its bound is reported as non-rigorous."""
    if not C0 > 0:
        raise ValueError("C0 must be positive")
    prof = conductance_profile(G, mode, budget, seed, n_max_exact)
    s = math.fsum(lv.phi ** -2 for lv in prof.levels)
    return FRBound(C0 * s, s, C0, prof)
