"""Compiled inner loops.  Pure functions over CSR arrays."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def step_block(indptr, indices, w, X, Y, pi, tv):
    """``Y = X`` pushed one lazy step; ``tv[b] = d_TV(Y[:, b], pi)``.

    ``X`` holds one distribution per column.  Row ``j`` of the CSR arrays
    lists the in-neighbours ``i`` of ``j`` with weight ``P(i, j)``.
    """
    n, B = X.shape
    for b in range(B):
        tv[b] = 0.0
    for j in range(n):
        for b in range(B):
            Y[j, b] = 0.5 * X[j, b]
        for p in range(indptr[j], indptr[j + 1]):
            i = indices[p]
            wij = w[p]
            for b in range(B):
                Y[j, b] += wij * X[i, b]
        pj = pi[j]
        for b in range(B):
            tv[b] += abs(Y[j, b] - pj)
    for b in range(B):
        tv[b] *= 0.5


@numba.njit(cache=True, nogil=True)
def ball_radii(indptr, indices, limit):
    """Largest ``r`` with ``|N^r(v)| <= limit`` for every vertex ``v``.

    ``-1`` if even ``{v}`` is too big; ``n`` if the whole component fits.
    """
    n = indptr.size - 1
    out = np.empty(n, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    for v in range(n):
        if limit < 1:
            out[v] = -1
            continue
        stamp[v] = v
        frontier[0] = v
        fsize = 1
        count = 1
        r = 0
        while True:
            nsize = 0
            over = False
            for a in range(fsize):
                x = frontier[a]
                for p in range(indptr[x], indptr[x + 1]):
                    y = indices[p]
                    if stamp[y] != v:
                        stamp[y] = v
                        nxt[nsize] = y
                        nsize += 1
                        if count + nsize > limit:
                            over = True
                            break
                if over:
                    break
            if over:
                out[v] = r
                break
            if nsize == 0:
                out[v] = n
                break
            count += nsize
            r += 1
            for a in range(nsize):
                frontier[a] = nxt[a]
            fsize = nsize
    return out


@numba.njit(cache=True, nogil=True)
def absorb_evolve(indptr, indices, w, mu, target, surv, absorbed):
    """Lazy-walk evolution of ``mu`` with mass on ``target`` removed after
    every step.  Fills ``surv[t]`` (mass alive) and ``absorbed[t]``
    (cumulative mass removed) for ``t = 0..len(surv)-1``; ``mu`` is
    overwritten with the final live mass."""
    n = mu.size
    nxt = np.empty(n)
    gone = 0.0
    for i in range(n):
        if target[i]:
            gone += mu[i]
            mu[i] = 0.0
    total = 0.0
    for i in range(n):
        total += mu[i]
    surv[0] = total
    absorbed[0] = gone
    for t in range(1, surv.size):
        total = 0.0
        for j in range(n):
            acc = 0.5 * mu[j]
            for p in range(indptr[j], indptr[j + 1]):
                acc += w[p] * mu[indices[p]]
            if target[j]:
                gone += acc
                acc = 0.0
            nxt[j] = acc
            total += acc
        for j in range(n):
            mu[j] = nxt[j]
        surv[t] = total
        absorbed[t] = gone
