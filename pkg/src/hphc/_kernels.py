"""Compiled inner loops for the simulators.

Profiles arrive as an int64 threshold table ``thr`` of shape (rows, 3) holding
cumulative cut points (up, up+down, up+down+left) in units of 2^eff, where a
step draws an eff-bit integer x. Row lookup: ``period > 0`` uses j mod period,
otherwise rows [0, n_tab) cover j in [lo, lo + n_tab), row n_tab is every j
below and row n_tab + 1 every j above.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _row(j, lo, n_tab, period):
    if period > 0:
        return j % period
    if j < lo:
        return n_tab
    if j >= lo + n_tab:
        return n_tab + 1
    return j - lo


@njit(cache=True, nogil=True)
def kernel_path(words, bits, n, thr, lo, n_tab, period, state, out_k, out_j):
    """Advance ``n`` steps; ``state`` = [k, j] is updated in place."""
    k = state[0]
    j = state[1]
    if bits == 64:
        spw = 1
        mask = np.uint64(0)
    else:
        spw = 64 // bits
        mask = np.uint64((1 << bits) - 1)
    ub = np.uint64(bits)
    for i in range(n):
        w = words[i // spw]
        if bits == 64:
            x = np.int64(w >> np.uint64(11))
        else:
            x = np.int64((w >> (np.uint64(i % spw) * ub)) & mask)
        r = _row(j, lo, n_tab, period)
        if x < thr[r, 0]:
            j += 1
        elif x < thr[r, 1]:
            j -= 1
        elif x < thr[r, 2]:
            k -= 1
        else:
            k += 1
        out_k[i] = k
        out_j[i] = j
    state[0] = k
    state[1] = j


@njit(cache=True, nogil=True)
def construction_path(s1_words, s2_words, unif, n, state, out_k, out_j):
    """Interlaced HPHC construction for ``n`` lattice moves.

    ``state`` = [k, j, pending, i1, i2, iu]; pending < 0 means a fresh
    geometric run is due before the next move (the walk sits on a row j >= 0
    after a vertical step).  i1, i2 are bit cursors into the two word buffers
    and iu a cursor into ``unif``; they are advanced in place so the caller can
    carry unused draws into the next chunk.
    """
    k = state[0]
    j = state[1]
    pending = state[2]
    i1 = state[3]
    i2 = state[4]
    iu = state[5]
    one = np.uint64(1)
    for i in range(n):
        if pending < 0:
            # inverse CDF of P(Y = m) = 2^-(m+1), u in (0, 1]
            pending = np.int64(math.floor(-math.log2(unif[iu])))
            iu += 1
        if pending > 0:
            b = (s1_words[i1 // 64] >> np.uint64(i1 % 64)) & one
            i1 += 1
            k += 1 if b else -1
            pending -= 1
        else:
            b = (s2_words[i2 // 64] >> np.uint64(i2 % 64)) & one
            i2 += 1
            j += 1 if b else -1
            pending = -1 if j >= 0 else 0
        out_k[i] = k
        out_j[i] = j
    state[0] = k
    state[1] = j
    state[2] = pending
    state[3] = i1
    state[4] = i2
    state[5] = iu


@njit(cache=True, nogil=True)
def count_visits(path_k, path_j, n, t0, sites_k, sites_j, counts, checkpoints, snaps, cp):
    """Tally visits of ``path`` (times t0+1 .. t0+n) to the tracked sites.

    ``counts`` accumulates in place; whenever the time index hits
    ``checkpoints[cp]`` the running counts are copied to ``snaps[cp]``.
    Returns the advanced checkpoint cursor.
    """
    ns = sites_k.shape[0]
    nc = checkpoints.shape[0]
    for i in range(n):
        k = path_k[i]
        j = path_j[i]
        for s in range(ns):
            if k == sites_k[s] and j == sites_j[s]:
                counts[s] += 1
        t = t0 + i + 1
        while cp < nc and checkpoints[cp] == t:
            for s in range(ns):
                snaps[cp, s] = counts[s]
            cp += 1
    return cp


@njit(cache=True, nogil=True)
def kernel_endpoints(words, bits, steps, thr, lo, n_tab, period, k0, j0, out_k, out_j):
    """Endpoints of independent replicas; row r of ``words`` feeds replica r."""
    state = np.empty(2, dtype=np.int64)
    pk = np.empty(steps, dtype=np.int64)
    pj = np.empty(steps, dtype=np.int64)
    for r in range(words.shape[0]):
        state[0] = k0
        state[1] = j0
        kernel_path(words[r], bits, steps, thr, lo, n_tab, period, state, pk, pj)
        out_k[r] = state[0]
        out_j[r] = state[1]


@njit(cache=True, nogil=True)
def construction_endpoints(s1, s2, unif, steps, out_k, out_j):
    state = np.empty(6, dtype=np.int64)
    pk = np.empty(steps, dtype=np.int64)
    pj = np.empty(steps, dtype=np.int64)
    for r in range(s1.shape[0]):
        state[:] = 0
        state[2] = -1
        construction_path(s1[r], s2[r], unif[r], steps, state, pk, pj)
        out_k[r] = state[0]
        out_j[r] = state[1]
