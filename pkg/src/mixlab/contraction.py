"""Contracting bad components: the quotient ``G*``, the merged ``Ĝ``, and
the checks that tie walks on them back to walks on ``G``.

Relabelling convention: vertices outside ``U`` keep their relative order
and come first; contracted vertices follow, one per component of ``G[U]``
ordered by smallest member.  So the merged vertex ``u*`` of ``Ĝ`` is
always its last vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import (
    MultiGraph,
    as_vertex_set,
    connected_components,
    induced_subgraph,
    internal_edges,
    is_connected,
)
from .walk import kernel_of, stationary, tv_distance

__all__ = [
    "ContractionMap",
    "ContractedPair",
    "quotient",
    "contract_components",
    "contract_to_vertex",
    "merge_to_vertex",
    "stationary_tv",
    "coupling_survival_check",
]


def quotient(G: MultiGraph, f: np.ndarray, n_new: int) -> MultiGraph:
    """Multigraph on ``0..n_new-1`` with edges ``f(x)f(y)`` for every edge
    ``xy`` of ``G`` with ``f(x) != f(y)``; multiplicities add up."""
    a, b = f[G.eu], f[G.ev]
    keep = a != b
    a, b, w = a[keep], b[keep], G.mult[keep]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    key = lo * max(n_new, 1) + hi
    uniq, inv = np.unique(key, return_inverse=True)
    mult = np.bincount(inv, weights=w, minlength=uniq.size).astype(np.int64)
    return MultiGraph(n_new, uniq // max(n_new, 1), uniq % max(n_new, 1), mult)


@dataclass
class ContractionMap:
    """``f: V(G) -> V(G*)``.

    ``f[x]`` is the image of ``x``; ``survivors[i]`` is the original label
    of ``G*`` vertex ``i`` for ``i < len(survivors)``; ``images[i]`` is the
    ``G*`` vertex standing for ``blocks[i]``.
    """

    n: int
    blocks: list[np.ndarray]
    images: np.ndarray
    survivors: np.ndarray
    f: np.ndarray = field(repr=False)

    @property
    def U(self) -> np.ndarray:
        return np.sort(np.concatenate(self.blocks)) if self.blocks else np.empty(0, np.int64)

    @property
    def n_star(self) -> int:
        return self.survivors.size + len(self.blocks)

    def to_dict(self) -> dict:
        return {"n": self.n, "n_star": self.n_star,
                "blocks": [b.tolist() for b in self.blocks],
                "images": self.images.tolist(),
                "survivors": self.survivors.tolist()}


@dataclass
class ContractedPair:
    Gstar: MultiGraph
    map: ContractionMap
    Ustar: np.ndarray


def contract_components(G: MultiGraph, U) -> ContractedPair:
    """Contract every connected component of ``G[U]`` to a single vertex.

    Edges inside a component vanish; all other edges survive with their
    multiplicity, so ``e(G*) = e(G) - Σ_i e_G(U_i)``.
    """
    U = as_vertex_set(G, U)
    if U.size:
        sub, kept = induced_subgraph(G, U)
        blocks = [kept[c] for c in connected_components(sub)]
    else:
        blocks = []
    inU = np.zeros(G.n, dtype=bool)
    inU[U] = True
    survivors = np.flatnonzero(~inU).astype(np.int64)
    f = np.empty(G.n, dtype=np.int64)
    f[survivors] = np.arange(survivors.size)
    images = np.arange(survivors.size, survivors.size + len(blocks), dtype=np.int64)
    for img, blk in zip(images, blocks):
        f[blk] = img
    cmap = ContractionMap(G.n, blocks, images, survivors, f)
    Gs = quotient(G, f, cmap.n_star)
    lost = sum(internal_edges(G, b) for b in blocks)
    if Gs.m != G.m - lost:
        raise AssertionError("edge count not preserved by contraction")
    if not _independent(Gs, images):
        raise AssertionError("contracted vertices are adjacent; blocks are not maximal")
    return ContractedPair(Gs, cmap, images)


def _independent(G: MultiGraph, S: np.ndarray) -> bool:
    mask = np.zeros(G.n, dtype=bool)
    mask[S] = True
    return not np.any(mask[G.eu] & mask[G.ev])


def merge_to_vertex(G: MultiGraph, S) -> MultiGraph:
    """Identify all of the independent set ``S`` with one new last vertex."""
    S = as_vertex_set(G, S)
    if S.size == 0:
        raise ValueError("nothing to merge")
    if not _independent(G, S):
        raise ValueError("set is not independent; merging would create loops")
    inS = np.zeros(G.n, dtype=bool)
    inS[S] = True
    rest = np.flatnonzero(~inS)
    f = np.empty(G.n, dtype=np.int64)
    f[rest] = np.arange(rest.size)
    f[S] = rest.size
    return quotient(G, f, rest.size + 1)


def contract_to_vertex(pair: ContractedPair) -> MultiGraph:
    """``Ĝ``: merge ``U*`` into ``u*`` (the last vertex).

    ``e(Ĝ) = e(G*)``, and when ``G*`` is connected the stationary law is
    preserved off ``U*`` with ``π_Ĝ(u*) = π_{G*}(U*)``; both are checked.
    """
    Gs, Us = pair.Gstar, pair.Ustar
    Gh = merge_to_vertex(Gs, Us)
    if Gh.m != Gs.m:
        raise AssertionError("e(Ĝ) != e(G*)")
    if Gs.m and is_connected(Gs):
        ps, ph = stationary(Gs), stationary(Gh)
        k = Gs.n - Us.size
        if (np.max(np.abs(ps[:k] - ph[:k]), initial=0.0) > 1e-12
                or abs(ps[Us].sum() - ph[-1]) > 1e-12):
            raise AssertionError("stationary law not preserved by the merge")
    return Gh


def stationary_tv(G: MultiGraph, Gstar: MultiGraph, cmap: ContractionMap) -> float:
    """TV distance between ``π_G`` and ``π_{G*}`` on the union state space.

    Vertices outside ``U`` are shared (aligned through ``f``); ``U`` only
    exists in ``G`` and ``U*`` only in ``G*``, each carrying zero mass in
    the other chain.
    """
    pg, ps = stationary(G), stationary(Gstar)
    k = cmap.survivors.size
    sigma1 = np.concatenate([pg[cmap.survivors], pg[cmap.U], np.zeros(len(cmap.blocks))])
    sigma2 = np.concatenate([ps[:k], np.zeros(cmap.U.size), ps[k:]])
    return tv_distance(sigma1, sigma2)


def coupling_survival_check(G: MultiGraph, U, t_max: int, *, curves: bool = False):
    """Largest gap between ``P[τ_G(δ_v, U) > t]`` and ``P[τ_Ĝ(δ_v, u*) > t]``
    over all starts ``v ∉ U`` and ``t <= t_max``.

    ``Ĝ`` is built by merging ``U`` in one step.  Both sides are computed by
    absorbing iteration with every start evolved at once.  The two walks
    agree until the hit, so the gap is zero up to rounding.
    """
    if not is_connected(G):
        raise ValueError("graph must be connected")
    U = as_vertex_set(G, U)
    if U.size == 0 or U.size == G.n:
        raise ValueError("need a nonempty proper subset U")
    inU = np.zeros(G.n, dtype=bool)
    inU[U] = True
    rest = np.flatnonzero(~inU)
    f = np.empty(G.n, dtype=np.int64)
    f[rest] = np.arange(rest.size)
    f[U] = rest.size
    Gh = quotient(G, f, rest.size + 1)

    kg, kh = kernel_of(G), kernel_of(Gh)
    k = rest.size
    X = np.zeros((G.n, k))
    X[rest, np.arange(k)] = 1.0
    Y = np.zeros((Gh.n, k))
    Y[np.arange(k), np.arange(k)] = 1.0
    sg = np.empty((t_max + 1, k))
    sh = np.empty((t_max + 1, k))
    sg[0] = sh[0] = 1.0
    for t in range(1, t_max + 1):
        X = kg.push(X)
        X[U] = 0.0
        Y = kh.push(Y)
        Y[-1] = 0.0
        sg[t] = X.sum(axis=0)
        sh[t] = Y.sum(axis=0)
    gap = float(np.max(np.abs(sg - sh))) if k else 0.0
    if curves:
        return gap, sg, sh
    return gap
