"""Lazy random walk: kernel, stationary law, exact evolution, mixing times.

Distributions are plain 1-D numpy arrays indexed by vertex.  Exact
evolution keeps dense vectors but multiplies through the sparse adjacency,
so one step costs O(n + m) per start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .generators import make_rng
from .graph import MultiGraph, as_vertex_set, is_connected

__all__ = [
    "LazyKernel",
    "kernel_of",
    "stationary",
    "pi_min",
    "pi_max",
    "check_distribution",
    "step",
    "tv_distance",
    "MixingReport",
    "default_t_cap",
    "mixing_time",
    "avg_mixing_time",
    "mixing_times_spectral",
    "tv_curves",
    "hitting_survival",
    "simulate_walk",
    "simulate_walks",
    "ball_growth_lower_bound",
    "DisconnectedGraphError",
]

DEFAULT_EPS = 0.25
_BLOCK = 64


class DisconnectedGraphError(ValueError):
    """Raised where a unique stationary distribution is required."""


class LazyKernel:
    """Transition structure of the lazy walk on a (multi)graph.

    ``P(i, i) = 1/2`` and ``P(i, j) = mult(i, j) / (2 deg i)``.  Vertices of
    degree zero have no valid row and are rejected.
    """

    def __init__(self, G: MultiGraph):
        if G.n == 0:
            raise ValueError("empty graph")
        if G.n > 1 and np.any(G.degrees == 0):
            v = int(np.flatnonzero(G.degrees == 0)[0])
            raise ValueError(f"vertex {v} is isolated; the lazy walk is undefined there")
        self.graph = G
        self.n = G.n
        self.degrees = G.degrees.astype(np.float64)
        # CSR row j lists in-neighbours i of j with weight P(i, j)
        self.in_indptr = G.indptr
        self.in_indices = G.indices
        self.in_weights = G.weights / (2.0 * self.degrees[G.indices])
        # a lone vertex is its own stationary law; treat it as degree one
        if G.n == 1:
            self.degrees = np.ones(1)
        self._adj = G.adjacency()

    def matrix(self) -> sp.csr_matrix:
        D = sp.diags(1.0 / (2.0 * self.degrees))
        return (D @ self._adj + 0.5 * sp.identity(self.n, format="csr")).tocsr()

    def exact_row(self, i: int) -> dict[int, Fraction]:
        """Row ``i`` in rational arithmetic."""
        G = self.graph
        deg = int(G.degrees[i])
        row = {i: Fraction(1, 2)}
        for j, mu in zip(G.neighbours(i).tolist(), G.multiplicities(i).tolist()):
            row[j] = row.get(j, Fraction(0)) + Fraction(mu, 2 * deg)
        return row

    def push(self, mu: np.ndarray) -> np.ndarray:
        """``mu P`` for a vector (or ``(n, k)`` matrix of column vectors)."""
        if mu.ndim == 1:
            return 0.5 * mu + self._adj @ (mu / (2.0 * self.degrees))
        return 0.5 * mu + self._adj @ (mu / (2.0 * self.degrees)[:, None])


def kernel_of(G) -> LazyKernel:
    """Kernel for ``G`` (cached on the graph object), or ``G`` itself."""
    if isinstance(G, LazyKernel):
        return G
    k = getattr(G, "_lazy_kernel", None)
    if k is None:
        k = LazyKernel(G)
        G._lazy_kernel = k
    return k


def _require_connected(G: MultiGraph) -> None:
    if G.n == 1:
        return
    if G.m < 1 or not is_connected(G):
        raise DisconnectedGraphError("graph must be connected with at least one edge")


def stationary(G: MultiGraph) -> np.ndarray:
    """``π_G(u) = deg_G(u) / 2e(G)``."""
    G = G.graph if isinstance(G, LazyKernel) else G
    _require_connected(G)
    if G.n == 1:
        return np.ones(1)
    return G.degrees / (2.0 * G.m)


def pi_min(G: MultiGraph) -> float:
    return float(stationary(G).min())


def pi_max(G: MultiGraph) -> float:
    return float(stationary(G).max())


def check_distribution(mu, n: int | None = None, atol: float = 1e-9) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1:
        raise ValueError("a distribution is a 1-D vector")
    if n is not None and mu.size != n:
        raise ValueError(f"distribution has length {mu.size}, expected {n}")
    if np.any(mu < 0):
        raise ValueError("negative probability")
    if abs(mu.sum() - 1.0) > atol:
        raise ValueError(f"probabilities sum to {mu.sum()!r}")
    return mu


def step(kernel, mu) -> np.ndarray:
    """One lazy step ``mu P``."""
    k = kernel_of(kernel)
    mu = check_distribution(mu, k.n)
    return k.push(mu)


def tv_distance(mu, nu) -> float:
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if mu.shape != nu.shape:
        raise ValueError("distributions live on different index sets")
    return 0.5 * float(np.abs(mu - nu).sum())


# -- mixing times -----------------------------------------------------------


def default_t_cap(n: int) -> int:
    return int(math.ceil(50 * math.log(max(n, 2)) ** 2))


@dataclass
class MixingReport:
    """Outcome of a mixing-time computation.

    ``t`` is ``None`` when ``status == "cap"``.  ``curve`` (when present)
    maps ``t``, ``max_tv``, ``mean_tv``, ``sem`` to equal-length arrays.
    """

    eps: float
    t: int | None
    status: str
    mode: str
    n_starts: int
    t_cap: int
    worst_start: int | None = None
    per_start: np.ndarray | None = field(default=None, repr=False)
    curve: dict | None = field(default=None, repr=False)

    @property
    def has_curve(self) -> bool:
        return self.curve is not None

    def to_dict(self) -> dict:
        d = {
            "eps": self.eps,
            "t": self.t,
            "status": self.status,
            "mode": self.mode,
            "n_starts": self.n_starts,
            "t_cap": self.t_cap,
        }
        if self.worst_start is not None:
            d["worst_start"] = self.worst_start
        return d


class MonotonicityError(AssertionError):
    """TV to stationarity increased along an exact run (numerical bug)."""


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")


def mixing_time(G, eps: float = DEFAULT_EPS, t_cap: int | None = None,
                starts=None, block: int = _BLOCK) -> MixingReport:
    """Worst-start mixing time ``t_mix(G, eps)``.

    Each start is evolved exactly until its own TV distance drops to
    ``eps``; because that distance is non-increasing in ``t`` the answer is
    the maximum of the per-start crossing times.  Finished starts are
    swapped out of the working block, so the cost is the sum of the
    per-start times.

    ``starts`` restricts the maximum to a subset (mode ``"sampled"``; the
    result is then a lower bound on the true mixing time).
    """
    _check_eps(eps)
    k = kernel_of(G)
    _require_connected(k.graph)
    n = k.n
    t_cap = default_t_cap(n) if t_cap is None else int(t_cap)
    pi = stationary(k.graph)
    if starts is None:
        start_list = np.arange(n)
        mode = "exact"
    else:
        start_list = as_vertex_set(k.graph, starts)
        mode = "sampled" if start_list.size < n else "exact"

    times = np.full(start_list.size, -1, dtype=np.int64)
    B = max(1, min(block, start_list.size))
    X = np.zeros((n, B))
    Y = np.zeros((n, B))
    tv = np.zeros(B)
    slot = np.full(B, -1, dtype=np.int64)  # index into start_list
    age = np.zeros(B, dtype=np.int64)
    prev = np.ones(B)
    nxt = 0

    def load(b):
        nonlocal nxt
        X[:, b] = 0.0
        while nxt < start_list.size:
            i = nxt
            nxt += 1
            s = start_list[i]
            d0 = 1.0 - pi[s]
            if d0 <= eps:
                times[i] = 0
                continue
            X[s, b] = 1.0
            slot[b] = i
            age[b] = 0
            prev[b] = d0
            return
        slot[b] = -1

    for b in range(B):
        load(b)
    status = "ok"
    while np.any(slot >= 0):
        _kernels.step_block(k.in_indptr, k.in_indices, k.in_weights, X, Y, pi, tv)
        X, Y = Y, X
        age += 1
        active = slot >= 0
        if np.any(tv[active] > prev[active] + 1e-12):
            raise MonotonicityError("TV distance increased along an exact run")
        prev[active] = tv[active]
        done = np.flatnonzero(active & (tv <= eps))
        for b in done:
            times[slot[b]] = age[b]
            load(b)
        if np.any(age[slot >= 0] >= t_cap):
            status = "cap"
            break
        # shrink the working block once the queue has drained
        if nxt >= start_list.size and X.shape[1] > 4:
            live = np.flatnonzero(slot >= 0)
            if 0 < live.size <= X.shape[1] // 2:
                X = np.ascontiguousarray(X[:, live])
                Y = np.zeros_like(X)
                tv = np.zeros(live.size)
                slot, age, prev = slot[live], age[live], prev[live]

    if status == "cap":
        return MixingReport(eps, None, "cap", mode, int(start_list.size), t_cap, per_start=times)
    w = int(np.argmax(times))
    return MixingReport(eps, int(times[w]), "ok", mode, int(start_list.size), t_cap,
                        worst_start=int(start_list[w]), per_start=times)


def tv_curves(G, starts, t_max: int, block: int = _BLOCK) -> dict:
    """Aggregate TV-to-stationarity curves over ``starts`` for ``t = 0..t_max``.

    Returns ``t``, ``max_tv``, ``mean_tv``, ``sem`` arrays.  Starts are
    processed in a fixed order so the result is reproducible.  Every
    per-start curve is checked to be non-increasing.
    """
    k = kernel_of(G)
    _require_connected(k.graph)
    n = k.n
    pi = stationary(k.graph)
    starts = as_vertex_set(k.graph, starts)
    total = np.zeros(t_max + 1)
    total_sq = np.zeros(t_max + 1)
    worst = np.zeros(t_max + 1)
    for lo in range(0, starts.size, block):
        chunk = starts[lo:lo + block]
        B = chunk.size
        X = np.zeros((n, B))
        X[chunk, np.arange(B)] = 1.0
        Y = np.zeros_like(X)
        tv = 1.0 - pi[chunk]
        prev = tv.copy()
        total[0] += tv.sum()
        total_sq[0] += (tv * tv).sum()
        worst[0] = max(worst[0], tv.max())
        tv = np.zeros(B)
        for t in range(1, t_max + 1):
            _kernels.step_block(k.in_indptr, k.in_indices, k.in_weights, X, Y, pi, tv)
            X, Y = Y, X
            if np.any(tv > prev + 1e-12):
                raise MonotonicityError("TV distance increased along an exact run")
            prev[:] = tv
            total[t] += tv.sum()
            total_sq[t] += (tv * tv).sum()
            worst[t] = max(worst[t], tv.max())
    cnt = starts.size
    mean = total / cnt
    if cnt > 1:
        var = np.maximum(total_sq / cnt - mean * mean, 0.0) * cnt / (cnt - 1)
        sem = np.sqrt(var / cnt)
    else:
        sem = np.zeros_like(mean)
    return {"t": np.arange(t_max + 1), "max_tv": worst, "mean_tv": mean, "sem": sem}


def avg_mixing_time(G, eps: float = DEFAULT_EPS, mode: str = "exact", sample_size: int = 256,
                    seed=0, t_cap: int | None = None) -> MixingReport:
    """Average mixing time ``t̄_mix(G, eps)``.

    ``mode="exact"`` averages over every start; ``mode="sampled"`` over
    ``sample_size`` starts drawn uniformly without replacement, and the
    curve then carries the standard error of the mean TV.  The horizon
    doubles until the mean curve reaches ``eps`` or passes ``t_cap``.
    """
    _check_eps(eps)
    k = kernel_of(G)
    _require_connected(k.graph)
    n = k.n
    t_cap = default_t_cap(n) if t_cap is None else int(t_cap)
    if mode == "exact" or sample_size >= n:
        starts = np.arange(n)
        mode = "exact"
    elif mode == "sampled":
        if sample_size < 1:
            raise ValueError("sample_size must be positive")
        starts = np.sort(make_rng(seed).choice(n, size=sample_size, replace=False))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    horizon = min(16, t_cap)
    while True:
        curve = tv_curves(k, starts, horizon)
        hit = np.flatnonzero(curve["mean_tv"] <= eps)
        if hit.size:
            t = int(hit[0])
            trimmed = {key: val[:t + 1] for key, val in curve.items()}
            if mode == "exact":
                trimmed["sem"] = np.zeros(t + 1)
            return MixingReport(eps, t, "ok", mode, int(starts.size), t_cap, curve=trimmed)
        if horizon >= t_cap:
            return MixingReport(eps, None, "cap", mode, int(starts.size), t_cap, curve=curve)
        horizon = min(2 * horizon, t_cap)


_SPECTRAL_GUARD = 1e-8  # TV values this close to eps are not trusted
_SPECTRAL_TAIL = 1e-14  # bound on the TV error from dropped eigenvalues


class _SpectralTV:
    """All-start TV distances ``d_s(t)`` from one dense eigendecomposition.

    With ``S = D^{1/2} P D^{-1/2} = V Λ V^T`` and the ``π`` eigenvector
    removed, ``P^t(s, j) - π_j = sqrt(π_j / π_s) (V_{-1} Λ^t V_{-1}^T)_{sj}``.
    Eigenvalues with ``λ^t / sqrt(π_min)`` below the tail bound are dropped;
    by Cauchy-Schwarz the dropped part moves each ``d_s(t)`` by less than
    that bound.
    """

    def __init__(self, k: LazyKernel, chunk: int = 1024):
        import scipy.linalg as sla

        G = k.graph
        self.pi = stationary(G)
        self.sq = np.sqrt(self.pi)
        s = 1.0 / np.sqrt(k.degrees)
        S = (sp.diags(s) @ k._adj @ sp.diags(s)).toarray()
        S *= 0.5
        S[np.diag_indices(k.n)] += 0.5
        w, V = sla.eigh(S, overwrite_a=True, check_finite=False)
        del S
        # drop the top (stationary) pair; lazy spectra lie in [0, 1]
        self.w = np.clip(w[:-1], 0.0, 1.0)[::-1].copy()
        self.V = np.ascontiguousarray(V[:, :-1][:, ::-1])
        self.scale = 1.0 / math.sqrt(float(self.pi.min()))
        self.chunk = chunk

    def __call__(self, t: int) -> np.ndarray:
        with np.errstate(under="ignore"):
            lam = self.w ** t
        keep = int(np.count_nonzero(lam * self.scale > _SPECTRAL_TAIL))
        n = self.sq.size
        if keep == 0:
            return np.zeros(n)
        Vk = self.V[:, :keep]
        W = Vk * lam[:keep]
        d = np.empty(n)
        for a in range(0, n, self.chunk):
            E = W[a:a + self.chunk] @ Vk.T
            d[a:a + self.chunk] = np.abs(E) @ self.sq
        return 0.5 * d / self.sq


def _first_crossing(f, eps: float, guess: int, t_cap: int):
    """Smallest ``t <= t_cap`` with ``f(t) <= eps`` for non-increasing ``f``.

    Returns ``None`` past the cap and raises ``ArithmeticError`` when a
    deciding value lies within the guard band around ``eps``.
    """

    def below(t):
        v = f(t)
        if abs(v - eps) <= _SPECTRAL_GUARD:
            raise ArithmeticError(f"TV at t={t} is within {_SPECTRAL_GUARD} of eps")
        return v < eps

    hi = min(max(guess, 1), t_cap)
    while not below(hi):
        if hi >= t_cap:
            return None
        hi = min(2 * hi, t_cap)
    lo = hi // 2
    while lo > 0 and below(lo):
        hi, lo = lo, lo // 2
    if lo == 0 and below(0):
        return 0
    # invariant: f(lo) > eps >= f(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if below(mid):
            hi = mid
        else:
            lo = mid
    return hi


def mixing_times_spectral(G, eps: float = DEFAULT_EPS,
                          t_cap: int | None = None) -> tuple[MixingReport, MixingReport]:
    """Exact ``(t_mix, t̄_mix)`` from a dense eigendecomposition.

    Both TV curves are non-increasing, so each crossing is found by
    bracketing and bisection on ``t``; one evaluation covers every start at
    once.  Costs ``O(n^3)`` time and ``O(n^2)`` memory, which beats the
    per-start evolution on slowly mixing graphs with a few thousand
    vertices.  If a deciding TV value falls within ``1e-8`` of ``eps`` the
    result is recomputed by exact evolution instead.
    """
    _check_eps(eps)
    k = kernel_of(G)
    _require_connected(k.graph)
    n = k.n
    t_cap = default_t_cap(n) if t_cap is None else int(t_cap)
    if n == 1:
        return (MixingReport(eps, 0, "ok", "exact", 1, t_cap, worst_start=0),
                MixingReport(eps, 0, "ok", "exact", 1, t_cap))
    tv = _SpectralTV(k)
    cache: dict[int, np.ndarray] = {}

    def curve(t):
        if t not in cache:
            cache[t] = tv(t)
        return cache[t]

    # relaxation-time scale as the bracketing guess
    gap = 1.0 - float(tv.w[0])
    guess = int(min(t_cap, max(1.0, math.log(1.0 / (2.0 * eps)) / max(gap, 1e-300))))
    try:
        t_w = _first_crossing(lambda t: float(curve(t).max()), eps, guess, t_cap)
        t_a = _first_crossing(lambda t: float(curve(t).mean()), eps, max(1, guess // 4), t_cap)
    except ArithmeticError:
        return mixing_time(k, eps, t_cap), avg_mixing_time(k, eps, t_cap=t_cap)
    if t_w is None:
        worst = MixingReport(eps, None, "cap", "exact", n, t_cap)
    else:
        worst = MixingReport(eps, t_w, "ok", "exact", n, t_cap,
                             worst_start=int(np.argmax(curve(t_w - 1))) if t_w else 0)
    avg = (MixingReport(eps, None, "cap", "exact", n, t_cap) if t_a is None
           else MixingReport(eps, t_a, "ok", "exact", n, t_cap))
    return worst, avg


# -- hitting times ----------------------------------------------------------


def hitting_survival(G, target, mu0, t_max: int, *, with_absorbed: bool = False):
    """``P[τ(mu0, target) > t]`` for ``t = 0..t_max``.

    Absorbing iteration: mass landing on the target is removed after every
    step.  With ``with_absorbed`` the cumulative removed mass is returned
    as well (the two always sum to one).
    """
    k = kernel_of(G)
    tgt = as_vertex_set(k.graph, target)
    if tgt.size == 0:
        raise ValueError("target must be nonempty")
    mu = check_distribution(mu0, k.n).astype(np.float64, copy=True)
    target = np.zeros(k.n, dtype=np.bool_)
    target[tgt] = True
    surv = np.empty(t_max + 1)
    absorbed = np.empty(t_max + 1)
    _kernels.absorb_evolve(k.in_indptr, k.in_indices, k.in_weights, mu, target, surv, absorbed)
    return (surv, absorbed) if with_absorbed else surv


# -- Monte Carlo ------------------------------------------------------------


def _expanded_neighbours(k: LazyKernel):
    cached = getattr(k, "_expanded", None)
    if cached is None:
        G = k.graph
        ind = np.repeat(G.indices, G.weights)
        ptr = np.zeros(G.n + 1, dtype=np.int64)
        np.cumsum(G.degrees, out=ptr[1:])
        cached = k._expanded = (ptr, ind)
    return cached


def simulate_walks(kernel, starts, steps: int, seed) -> np.ndarray:
    """Independent lazy walks, one per entry of ``starts``.

    Returns an ``(steps + 1, len(starts))`` array of positions.  A move
    picks a neighbour uniformly from the multiset of incident edges.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    k = kernel_of(kernel)
    starts = np.asarray(starts, dtype=np.int64).ravel()
    if starts.size and (starts.min() < 0 or starts.max() >= k.n):
        raise ValueError("start vertex out of range")
    ptr, ind = _expanded_neighbours(k)
    deg = k.graph.degrees
    rng = make_rng(seed)
    out = np.empty((steps + 1, starts.size), dtype=np.int64)
    x = starts.copy()
    out[0] = x
    for t in range(1, steps + 1):
        move = rng.random(x.size) < 0.5
        pick = rng.random(x.size)
        j = ptr[x] + np.minimum((pick * deg[x]).astype(np.int64), deg[x] - 1)
        x = np.where(move, ind[j], x)
        out[t] = x
    return out


def simulate_walk(kernel, start: int, steps: int, seed) -> np.ndarray:
    """Single lazy-walk trajectory of length ``steps + 1``."""
    return simulate_walks(kernel, [start], steps, seed)[:, 0]


# -- ball-growth lower bound ------------------------------------------------


@dataclass
class BallGrowth:
    k: int
    radii: np.ndarray = field(repr=False)
    reference: float


def ball_growth_lower_bound(G: MultiGraph, dbar: float, *, detail: bool = False):
    """Largest ``k`` such that at least half of the vertices ``v`` have
    ``|N^k(v)| <= n/2``.

    Every such vertex leaves at least half the vertex set unreachable in
    ``k`` steps, the usual certificate that average mixing takes at least
    ``k`` steps.  One truncated BFS per vertex gives its largest admissible
    radius exactly.  ``dbar`` (an upper bound on the average degree) only
    feeds the reference scale ``log(n) / log(2·dbar)`` reported with
    ``detail=True``.
    """
    if dbar < 1:
        raise ValueError("dbar must be at least 1")
    n = G.n
    radii = _kernels.ball_radii(G.indptr, G.indices, n // 2)
    need = (n + 1) // 2
    k = int(np.sort(radii)[::-1][need - 1]) if n else 0
    k = max(k, 0)
    if detail:
        return BallGrowth(k, radii, math.log(max(n, 2)) / math.log(2 * dbar) if dbar > 0.5 else math.inf)
    return k
