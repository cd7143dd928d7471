"""First-visit diagnostics for a single target vertex.

For a target ``u`` the walk killed on ``u`` is governed by ``P_u``, the
lazy kernel with row and column ``u`` removed.  Its spectral radius
``λ_u`` should describe the hitting time from stationarity,
``P[τ(π, u) > t] ≈ λ_u^t``, with ``1 - λ_u ≈ π(u) / R_T(u)``.  This module
measures how far a concrete graph is from both approximations and reports
the mixing and stationary-mass hypotheses under which they are expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import MultiGraph, induced_subgraph, is_connected
from .walk import hitting_survival, kernel_of, stationary

__all__ = [
    "reduced_kernel",
    "LambdaResult",
    "lambda_u",
    "returns_RT",
    "survival_from_stationary",
    "hp1_discrepancy",
    "FvtlReport",
    "fvtl_report",
    "low_hitting_mass",
    "is_cut_vertex",
    "ConvergenceError",
]

GRID_CAP = 10**6
DENSE_HP1_MAX = 2000


class ConvergenceError(RuntimeError):
    pass


def _check(G: MultiGraph, u: int) -> int:
    if G.n < 2:
        raise ValueError("need at least two vertices")
    if not 0 <= u < G.n:
        raise ValueError(f"vertex {u} out of range")
    if not is_connected(G):
        raise ValueError("graph must be connected")
    return int(u)


def reduced_kernel(G: MultiGraph, u: int) -> sp.csr_matrix:
    """``P_u``: the lazy kernel without row and column ``u``.

    Rows keep the original order with ``u`` skipped.  Row sums fall short of
    one by exactly ``P(v, u)``.
    """
    u = _check(G, u)
    P = kernel_of(G).matrix()
    keep = np.r_[0:u, u + 1:G.n]
    return P[keep][:, keep].tocsr()


def is_cut_vertex(G: MultiGraph, u: int) -> bool:
    """True when ``G - u`` is disconnected (``P_u`` is then reducible)."""
    if G.n <= 2:
        return False
    rest = np.r_[0:u, u + 1:G.n]
    sub, _ = induced_subgraph(G, rest)
    return not is_connected(sub)


@dataclass
class LambdaResult:
    value: float
    iterations: int
    reducible: bool
    residual: float


def lambda_u(G: MultiGraph, u: int, tol: float = 1e-10, max_iter: int = 10**6) -> LambdaResult:
    """Spectral radius of ``P_u`` by power iteration.

    ``P_u`` is reversible with respect to ``π`` restricted to ``V - u``, so
    ``A = D^{1/2} P_u D^{-1/2}`` (``D = diag π``) is symmetric with the same
    spectrum, all of it in ``[0, 1)``.  Iterating ``A`` from ``sqrt(π)``
    and stopping once the Rayleigh residual ``|Ax - qx|`` is below ``tol``
    pins an eigenvalue to within ``tol``; the start vector is positive, so
    that eigenvalue is the Perron one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = _check(G, u)
    Pu = reduced_kernel(G, u)
    pi = np.delete(stationary(G), u)
    s = np.sqrt(pi)
    A = sp.diags(s) @ Pu @ sp.diags(1.0 / s)
    A = ((A + A.T) * 0.5).tocsr()
    x = s / np.linalg.norm(s)
    q, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        y = A @ x
        q = float(x @ y)
        res = float(np.linalg.norm(y - q * x))
        if res <= tol:
            return LambdaResult(q, it, is_cut_vertex(G, u), res)
        x = y / np.linalg.norm(y)
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps (residual {res:.3g})")


def returns_RT(G: MultiGraph, u: int, T: int) -> float:
    """``R_T(u) = Σ_{t=0..T} μ_t^u(u)``, the expected visits to ``u`` up to ``T``."""
    if T < 0:
        raise ValueError("T must be non-negative")
    k = kernel_of(G)
    mu = np.zeros(k.n)
    mu[u] = 1.0
    total = 1.0
    for _ in range(T):
        mu = k.push(mu)
        total += mu[u]
    return total


def survival_from_stationary(G: MultiGraph, u: int, t_max: int) -> np.ndarray:
    """``P[τ(π, u) > t]`` for ``t = 0..t_max``."""
    return hitting_survival(G, [u], stationary(G), t_max)


def hp1_discrepancy(G: MultiGraph, T: int, *, sample: int = 64, seed=0) -> dict:
    """``max_{x,y} |μ_T^x(y) - π(y)|``.

    Exact by dense repeated squaring of ``P`` when ``n <= 2000``; otherwise
    over ``sample`` evenly spaced starts, flagged as sampled.
    """
    k = kernel_of(G)
    cache = k.__dict__.setdefault("_hp1", {})
    if T in cache:
        return cache[T]
    pi = stationary(G)
    n = k.n
    if n <= DENSE_HP1_MAX:
        P = k.matrix().toarray()
        R = np.eye(n)
        e, B = T, P
        while e:
            if e & 1:
                R = R @ B
            e >>= 1
            if e:
                B = B @ B
        val, mode = float(np.max(np.abs(R - pi[None, :]))), "exact"
    else:
        starts = np.unique(np.linspace(0, n - 1, min(sample, n)).astype(np.int64))
        X = np.zeros((n, starts.size))
        X[starts, np.arange(starts.size)] = 1.0
        for _ in range(T):
            X = k.push(X)
        val, mode = float(np.max(np.abs(X - pi[:, None]))), "sampled"
    out = {"value": val, "mode": mode, "starts": n if mode == "exact" else int(min(sample, n))}
    cache[T] = out
    return out


@dataclass
class FvtlReport:
    u: int
    T: int
    lambda_u: float
    R_T: float
    stat_hitting: float
    stat_prob: float
    reducible: bool
    hp: dict
    grid_max: int
    iterations: int
    survival: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"u": self.u, "T": self.T, "lambda_u": self.lambda_u, "R_T": self.R_T,
                "stat_hitting": self.stat_hitting, "stat_prob": self.stat_prob,
                "reducible": self.reducible, "hp": self.hp, "grid_max": self.grid_max,
                "iterations": self.iterations}


def default_T(n: int) -> int:
    return int(math.ceil(math.log(n) ** 6))


def fvtl_report(G: MultiGraph, u: int, T: int | None = None, t_grid: int | None = None,
                tol: float = 1e-10, hp1_threshold: float | None = None,
                hp1: bool = True) -> FvtlReport:
    """All first-visit statistics for target ``u``.

    ``stat_hitting = sup_t |P[τ(π,u) > t] / λ_u^t - 1|`` over
    ``t = 0..t_grid`` (default ``ceil(20/(1-λ_u))``, capped at ``10^6``);
    ``stat_prob = |(1-λ_u) / (π(u)/R_T(u)) - 1|``.  The hypotheses are
    reported, never enforced: HP1 the worst entrywise distance from ``π``
    at time ``T`` against ``n^-3`` by default, HP2 ``T·π_max``, HP2'
    ``T·π(u)``, HP3 ``π_min·n^2``.
    """
    u = _check(G, u)
    n = G.n
    T = default_T(n) if T is None else int(T)
    lam = lambda_u(G, u, tol)
    if t_grid is None:
        t_grid = min(int(math.ceil(20.0 / (1.0 - lam.value))), GRID_CAP)
    surv = survival_from_stationary(G, u, t_grid)
    powers = lam.value ** np.arange(t_grid + 1, dtype=np.float64)
    live = powers > 0
    stat_hit = float(np.max(np.abs(surv[live] / powers[live] - 1.0)))
    R = returns_RT(G, u, T)
    pi = stationary(G)
    stat_prob = abs((1.0 - lam.value) / (pi[u] / R) - 1.0)
    thr = n ** -3.0 if hp1_threshold is None else hp1_threshold
    hp = {
        "HP2": {"value": T * float(pi.max())},
        "HP2_prime": {"value": T * float(pi[u])},
        "HP3": {"value": float(pi.min()) * n * n},
    }
    if hp1:
        h = dict(hp1_discrepancy(G, T))
        h["threshold"] = thr
        h["ok"] = h["value"] <= thr
        hp["HP1"] = h
    return FvtlReport(u, T, lam.value, R, stat_hit, stat_prob, lam.reducible, hp,
                      t_grid, lam.iterations, surv)


def low_hitting_mass(G: MultiGraph, u: int, t0: int) -> float:
    """``(1/n) Σ_v P[τ(δ_v, u) <= t0]``, from a single absorbing evolution
    of the uniform distribution (the survival functional is linear in the
    start)."""
    if t0 < 0:
        raise ValueError("t0 must be non-negative")
    k = kernel_of(G)
    mu = np.full(k.n, 1.0 / k.n)
    return 1.0 - float(hitting_survival(k.graph, [u], mu, t0)[-1])
