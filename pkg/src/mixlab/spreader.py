"""Thin, loaded and bad sets; spreader certification and the bad-vertex union.

All predicates are strict and evaluated in exact integer arithmetic: the
real parameters are converted to fractions once (floats convert exactly),
and every comparison is cross-multiplied.  ``log`` is the natural
logarithm throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .conductance import iter_connected_sets
from .graph import (
    MultiGraph,
    as_vertex_set,
    boundary_size,
    connected_components,
    degree_sum,
    induced_subgraph,
    internal_edges,
)

__all__ = [
    "SpreaderParams",
    "is_thin",
    "is_loaded",
    "is_bad",
    "bad_implies_thin_or_loaded",
    "Verdict",
    "SpreaderCertificate",
    "BadSetReport",
    "spreader_check",
    "bad_set_union",
    "analyse",
    "max_loaded_excess",
    "densest_subgraph",
    "default_k_cap",
]

MAX_WITNESSES = 8
D_DENOMINATOR = 10_000


def _frac(x) -> Fraction:
    # floats go through their shortest repr, so 0.01 means 1/100
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class SpreaderParams:
    """Parameters ``(alpha, D)``; ``beta = 1/D^2`` and ``gamma = alpha^2/4``.

    With ``strict`` the admissible range ``D >= 4``, ``0 < alpha < 1/D^2``
    is enforced; exploratory runs may switch that off.
    """

    alpha: float
    D: float
    strict: bool = True

    def __post_init__(self):
        a, D = _frac(self.alpha), _frac(self.D)
        if a <= 0 or D <= 0:
            raise ValueError("alpha and D must be positive")
        if self.strict and not (D >= 4 and a < 1 / (D * D)):
            raise ValueError(f"need D >= 4 and 0 < alpha < 1/D^2 (got alpha={self.alpha}, D={self.D})")

    @property
    def alpha_q(self) -> Fraction:
        return _frac(self.alpha)

    @property
    def D_q(self) -> Fraction:
        return _frac(self.D)

    @property
    def beta(self) -> Fraction:
        return 1 / (self.D_q ** 2)

    @property
    def gamma(self) -> Fraction:
        return self.alpha_q ** 2 / 4

    def window(self, n: int) -> tuple[int, int]:
        """``[ceil((log n)^(1/5)), floor((1 - 1/D^2) n)]``, lower end at least 1."""
        lo = max(1, math.ceil(math.log(n) ** 0.2)) if n > 1 else 1
        hi = math.floor((1 - self.beta) * n)
        return lo, hi

    def to_dict(self) -> dict:
        return {"alpha": float(self.alpha), "D": float(self.D),
                "beta": float(self.beta), "gamma": float(self.gamma)}


# -- predicates -------------------------------------------------------------


def _nonempty(G, S) -> np.ndarray:
    S = as_vertex_set(G, S)
    if S.size == 0:
        raise ValueError("S must be nonempty")
    return S


def _thin(b: int, k: int, a: Fraction) -> bool:
    return b * a.denominator < a.numerator * k


def _loaded(e: int, k: int, D: Fraction) -> bool:
    return e * D.denominator > D.numerator * k


def _bad(b: int, d: int, g: Fraction) -> bool:
    return b * g.denominator < g.numerator * d


def is_thin(G: MultiGraph, S, alpha) -> bool:
    """``|∂S| < alpha·|S|``."""
    S = _nonempty(G, S)
    return _thin(boundary_size(G, S), S.size, _frac(alpha))


def is_loaded(G: MultiGraph, S, D) -> bool:
    """``e(S) > D·|S|``."""
    S = _nonempty(G, S)
    return _loaded(internal_edges(G, S), S.size, _frac(D))


def is_bad(G: MultiGraph, S, gamma) -> bool:
    """``|∂S| / deg(S) < gamma``."""
    S = _nonempty(G, S)
    d = degree_sum(G, S)
    if d == 0:
        raise ValueError("deg(S) = 0: the boundary ratio is undefined")
    return _bad(boundary_size(G, S), d, _frac(gamma))


def bad_implies_thin_or_loaded(G: MultiGraph, S, alpha) -> dict:
    """Check both conclusions for an ``(alpha^2/4)``-bad set.

    Returns ``precondition`` (whether ``S`` is bad at all), ``boundary_ok``
    (``|∂S| <= 2e(S)``), ``thin``, ``loaded`` (``alpha^-1``-loaded),
    ``branch`` and ``holds``.  A violated precondition is reported with
    ``holds = None``.
    """
    S = _nonempty(G, S)
    a = _frac(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    b, e, k = boundary_size(G, S), internal_edges(G, S), S.size
    d = 2 * e + b
    out = {"precondition": d > 0 and _bad(b, d, a * a / 4),
           "boundary_ok": b <= 2 * e,
           "thin": _thin(b, k, a),
           "loaded": _loaded(e, k, 1 / a)}
    out["branch"] = ("both" if out["thin"] and out["loaded"] else
                     "thin" if out["thin"] else "loaded" if out["loaded"] else None)
    if out["precondition"]:
        out["holds"] = out["boundary_ok"] and out["branch"] is not None
    else:
        out["holds"] = None
    return out


# -- S3 via maximum closure ------------------------------------------------


def _rational_D(D) -> Fraction:
    q = _frac(D)
    return q if q.denominator <= D_DENOMINATOR else q.limit_denominator(D_DENOMINATOR)


def max_loaded_excess(G: MultiGraph, D) -> tuple[Fraction, np.ndarray]:
    """``max_S e(S) - D|S|`` over all vertex sets, with the smallest maximiser.

    Maximum-weight closure: each edge class is an item of profit ``mult``
    needing both endpoints, each vertex costs ``D``.  Solved as one integer
    min cut after scaling by the denominator of ``D``.
    """
    Dq = _rational_D(D)
    p, q = Dq.numerator, Dq.denominator
    n, k = G.n, G.eu.size
    if k == 0:
        return Fraction(0), np.empty(0, dtype=np.int64)
    s, t = n + k, n + k + 1
    src_cap = G.mult * q
    big = int(src_cap.sum()) + 1
    if big >= 2**31:
        raise OverflowError("capacities exceed int32; use a coarser D")
    eid = np.arange(k) + n
    rows = np.concatenate([np.full(k, s), eid, eid, np.arange(n)])
    cols = np.concatenate([eid, G.eu, G.ev, np.full(n, t)])
    caps = np.concatenate([src_cap, np.full(2 * k, big), np.full(n, p)])
    C = sp.csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(n + k + 2, n + k + 2))
    res = csgraph.maximum_flow(C, s, t)
    R = (C - res.flow).tocsr()
    R.data = (R.data > 0).astype(np.int8)
    R.eliminate_zeros()
    reach = csgraph.breadth_first_order(R, s, directed=True, return_predecessors=False)
    W = np.sort(reach[reach < n]).astype(np.int64)
    value = Fraction(internal_edges(G, W)) - Dq * W.size if W.size else Fraction(0)
    return value, W


def densest_subgraph(G: MultiGraph) -> tuple[Fraction, np.ndarray]:
    """Exact maximum of ``e(S)/|S|`` (Dinkelbach iteration over min cuts)."""
    if G.n == 0:
        raise ValueError("empty graph")
    best = Fraction(G.m, G.n)
    W = np.arange(G.n)
    while True:
        val, S = max_loaded_excess(G, best)
        if val <= 0 or S.size == 0:
            return best, W
        best, W = Fraction(internal_edges(G, S), S.size), S


# -- certification ----------------------------------------------------------


@dataclass
class Verdict:
    """``status`` is ``pass``, ``fail``, ``partial`` or ``inconclusive``."""

    status: str
    k_max_checked: int | None = None
    per_k: list[dict] = field(default_factory=list)
    witnesses: list[dict] = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"verdict": self.status, "per_k": self.per_k, "witnesses": self.witnesses}
        if self.k_max_checked is not None:
            d["k_max_checked"] = self.k_max_checked
        d.update(self.detail)
        return d


@dataclass
class SpreaderCertificate:
    params: SpreaderParams
    n: int
    window: tuple[int, int]
    k_cap: int
    s1: Verdict
    s2: Verdict
    s3: Verdict

    @property
    def is_spreader(self) -> bool | None:
        st = {self.s1.status, self.s2.status, self.s3.status}
        if "fail" in st:
            return False
        return True if st == {"pass"} else None

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "n": self.n, "window": list(self.window),
                "k_cap": self.k_cap, "s1": self.s1.to_dict(), "s2": self.s2.to_dict(),
                "s3": self.s3.to_dict()}


@dataclass
class BadSetReport:
    """The union ``U`` of connected bad sets in the size window, its
    components, and its size/degree/stationary mass next to the reference
    thresholds ``n·exp(-(log n)^(1/11))`` and ``exp(-(log n)^(1/11))``."""

    U: np.ndarray
    blocks: list[np.ndarray]
    partial: bool
    k_max_checked: int
    stats: dict

    def to_dict(self) -> dict:
        return {"U": self.U.tolist(), "blocks": [b.tolist() for b in self.blocks],
                "partial": self.partial, "k_max_checked": self.k_max_checked,
                "stats": self.stats}


def default_k_cap(n: int) -> int:
    return n if n <= 24 else 6


def _scan(G: MultiGraph, params: SpreaderParams, k_cap: int):
    n = G.n
    k_lo, k_hi = params.window(n)
    top = min(k_hi, k_cap, n)
    a, Dinv, g = params.alpha_q, 1 / params.alpha_q, params.gamma
    counts = {k: [0, 0, 0] for k in range(k_lo, top + 1)}
    wit_thin = {k: [] for k in counts}
    wit_load = {k: [] for k in counts}
    inU = np.zeros(n, dtype=bool)
    if k_lo <= top:
        for S, e, d in iter_connected_sets(G, k_lo, top):
            k = len(S)
            b = d - 2 * e
            c = counts[k]
            if _thin(b, k, a):
                c[0] += 1
                if len(wit_thin[k]) < MAX_WITNESSES:
                    wit_thin[k].append(S)
            if _loaded(e, k, Dinv):
                c[1] += 1
                if len(wit_load[k]) < MAX_WITNESSES:
                    wit_load[k].append(S)
            if d > 0 and _bad(b, d, g):
                c[2] += 1
                inU[list(S)] = True
    return k_lo, k_hi, top, counts, wit_thin, wit_load, inU


def _count_verdict(idx: int, counts, witnesses, n, k_lo, k_hi, top) -> Verdict:
    per_k, wit = [], []
    failed = False
    for k in sorted(counts):
        thr = n * math.exp(-math.sqrt(k))
        c = counts[k][idx]
        ok = c < thr
        per_k.append({"k": k, "count": c, "threshold": thr, "ok": ok})
        if not ok:
            failed = True
            wit.extend({"k": k, "set": list(S)} for S in sorted(witnesses[k]))
    if failed:
        return Verdict("fail", top, per_k, wit)
    if top >= k_hi or k_lo > k_hi:
        return Verdict("pass", top, per_k)
    return Verdict("partial", top, per_k)


def _s3_verdict(G: MultiGraph, params: SpreaderParams) -> Verdict:
    n = G.n
    Dq = _rational_D(params.D)
    need = math.ceil(params.alpha_q * n)
    value, W = max_loaded_excess(G, Dq)
    detail = {"max_excess": float(value), "D_used": str(Dq), "min_size": need}
    if value <= 0:
        return Verdict("pass", detail=detail)
    e = internal_edges(G, W)
    detail["witness_size"] = int(W.size)
    if W.size >= need:
        return Verdict("fail", witnesses=[{"k": int(W.size), "set": W.tolist(), "e": e}], detail=detail)
    if _loaded(e, need, Dq):
        # padding keeps every edge of W and reaches the size floor
        pad = np.setdiff1d(np.arange(n), W)[: need - W.size]
        P = np.sort(np.concatenate([W, pad]))
        return Verdict("fail", witnesses=[{"k": int(P.size), "set": P.tolist(),
                                           "e": internal_edges(G, P)}], detail=detail)
    detail["dense_witness"] = W.tolist()
    return Verdict("inconclusive", detail=detail)


def analyse(G: MultiGraph, params: SpreaderParams, k_cap: int | None = None):
    """One enumeration pass producing both the certificate and the bad-set
    report.  Every bad set is thin or loaded, so the bad filter rides on
    the same pass."""
    n = G.n
    k_cap = default_k_cap(n) if k_cap is None else int(k_cap)
    k_lo, k_hi, top, counts, wt, wl, inU = _scan(G, params, k_cap)
    cert = SpreaderCertificate(
        params, n, (k_lo, k_hi), k_cap,
        _count_verdict(0, counts, wt, n, k_lo, k_hi, top),
        _count_verdict(1, counts, wl, n, k_lo, k_hi, top),
        _s3_verdict(G, params),
    )
    U = np.flatnonzero(inU).astype(np.int64)
    if U.size:
        sub, kept = induced_subgraph(G, U)
        blocks = [kept[c] for c in connected_components(sub)]
    else:
        blocks = []
    degU = degree_sum(G, U) if U.size else 0
    lnn = math.log(n) if n > 1 else 0.0
    stats = {
        "size": int(U.size),
        "deg": int(degU),
        "pi": (degU / (2 * G.m)) if G.m else 0.0,
        "size_threshold": n * math.exp(-lnn ** (1 / 11)),
        "pi_threshold": math.exp(-lnn ** (1 / 11)),
        "blocks": len(blocks),
    }
    report = BadSetReport(U, blocks, top < k_hi, top, stats)
    return cert, report


def spreader_check(G: MultiGraph, params: SpreaderParams, k_cap: int | None = None) -> SpreaderCertificate:
    """S1/S2 counts over the size window up to ``k_cap`` and the exact S3 test."""
    return analyse(G, params, k_cap)[0]


def bad_set_union(G: MultiGraph, params: SpreaderParams, k_cap: int | None = None,
                  seed=None) -> BadSetReport:
    """Union of connected ``gamma``-bad sets with window sizes up to ``k_cap``.

    The scan is deterministic; ``seed`` is accepted for interface symmetry
    with the sampled analyses and ignored.
    """
    return analyse(G, params, k_cap)[1]
