"""Compiled twin of the local-search layer.

Every ``_a_*`` function mirrors the matching ``*_apply`` in ``local_search``:
it writes the neighbour into ``out`` and returns False where the Python
version returns None.  ``search`` runs the same first-improvement loop with
the cost taken straight from the compiled decoder.  Tests compare both
layers move by move.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._kernel import decode_cost

INF = math.inf

# move codes, in the order of local_search.ALL_MOVES
L1, L2, L3, L4, L5, L6, L7, TWO_OPT, OR_OPT, RELOCATE = range(10)


@njit(cache=True)
def _truck_at(g, i):
    return i < 0 or i >= g.shape[0] or g[i] > 0


@njit(cache=True)
def _positions(g, pos):
    for i in range(g.shape[0]):
        pos[abs(g[i])] = i


@njit(cache=True)
def _same(a, b):
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            return False
    return True


@njit(cache=True)
def _insert_without(g, skip, k, value, out):
    """out = g with index ``skip`` removed and ``value`` inserted at ``k``."""
    n = g.shape[0]
    t = 0
    for s in range(n):
        if s == skip:
            continue
        if t == k:
            t += 1
        out[t] = g[s]
        t += 1
    out[k] = value


# ---------------------------------------------------------------- explicit moves

@njit(cache=True)
def _a_l1(g, pos, node, elig, out):
    i = pos[node]
    if g[i] < 0 or not (_truck_at(g, i - 1) and _truck_at(g, i + 1)) or not elig[node]:
        return False
    out[:] = g
    out[i] = -node
    return True


@njit(cache=True)
def _a_l2(g, pos, drone, after, out):
    i = pos[drone]
    if g[i] > 0 or drone == after:
        return False
    if after == 0:
        k = 0
    else:
        pa = pos[after]
        if g[pa] < 0:
            return False
        k = (pa if pa < i else pa - 1) + 1
    # the gene following the insertion point in the shortened chromosome
    nxt = k if k < i else k + 1
    if nxt < g.shape[0] and g[nxt] < 0:
        return False
    _insert_without(g, i, k, -drone, out)
    return not _same(out, g)


@njit(cache=True)
def _a_l3(g, pos, truck, drone, elig, out):
    i, j = pos[truck], pos[drone]
    if g[i] < 0 or g[j] > 0 or not elig[truck]:
        return False
    out[:] = g
    out[i] = drone
    out[j] = -truck
    return True


@njit(cache=True)
def _a_l4(g, pos, v1, u2, out):
    """Reverse the genes from truck node ``v1`` through truck node ``u2``."""
    i, j = pos[v1], pos[u2]
    out[:] = g
    for t in range(j - i + 1):
        out[i + t] = g[j - t]
    return True


@njit(cache=True)
def _a_l5(g, pos, d1, d2, out):
    i, j = pos[d1], pos[d2]
    if d1 == d2 or g[i] > 0 or g[j] > 0:
        return False
    out[:] = g
    out[i] = d2
    out[j] = d1
    return True


@njit(cache=True)
def _a_l6(g, pos, d1, d2, convert, out):
    i, j = pos[d1], pos[d2]
    if d1 == d2 or g[i] > 0 or g[j] > 0:
        return False
    out[:] = g
    out[i] = -d2
    out[j] = -d1
    k = j if convert == d1 else i
    out[k] = abs(out[k])
    return True


@njit(cache=True)
def _a_l7(g, pos, d, j, before, out):
    if d == j or g[pos[d]] > 0 or g[pos[j]] > 0:
        return False
    k = pos[j]
    if not (_truck_at(g, k - 1) and _truck_at(g, k + 1)):
        return False
    i = pos[d]
    kr = k if k < i else k - 1
    _insert_without(g, i, kr if before else kr + 1, -d, out)
    # j now rides the truck
    for t in range(out.shape[0]):
        if out[t] == -j:
            out[t] = j
    return True


@njit(cache=True)
def _a_two_opt(g, i, j, out):
    if not (0 <= i < j < g.shape[0]):
        return False
    out[:] = g
    for t in range(j - i + 1):
        out[i + t] = g[j - t]
    return True


@njit(cache=True)
def _a_or_opt(g, pos, i, length, after, out):
    n = g.shape[0]
    if i + length > n:
        return False
    for t in range(i, i + length):
        if abs(g[t]) == after:
            return False
    if after == 0:
        k = 0
    else:
        pa = pos[after]
        k = (pa if pa < i else pa - length) + 1
    t = 0
    for s in range(n):
        if i <= s < i + length:
            continue
        if t == k:
            t += length
        out[t] = g[s]
        t += 1
    for s in range(length):
        out[k + s] = g[i + s]
    return not _same(out, g)


@njit(cache=True)
def _a_relocate(g, pos, node, after, elig, out):
    i = pos[node]
    v = g[i]
    if (v > 0 and not elig[node]) or node == after:
        return False
    if after == 0:
        k = 0
    else:
        pa = pos[after]
        k = (pa if pa < i else pa - 1) + 1
    _insert_without(g, i, k, -v, out)
    return True


# ---------------------------------------------------------------- samplers

@njit(cache=True)
def _pick(buf, m):
    return buf[np.random.randint(0, m)]


@njit(cache=True)
def _sample(move, g, pos, near_t, len_t, near_d, len_d, elig, buf, out):
    n = g.shape[0]
    m = 0
    if move == L1:
        for i in range(n):
            if g[i] > 0 and elig[g[i]] and _truck_at(g, i - 1) and _truck_at(g, i + 1):
                buf[m] = g[i]
                m += 1
        return m > 0 and _a_l1(g, pos, _pick(buf, m), elig, out)
    if move == L2:
        for i in range(n):
            if g[i] < 0:
                buf[m] = -g[i]
                m += 1
        if m == 0:
            return False
        d = _pick(buf, m)
        m = 1
        buf[0] = 0
        for t in range(len_d[d]):
            v = near_d[d, t]
            if v != d and g[pos[v]] > 0:
                buf[m] = v
                m += 1
        return _a_l2(g, pos, d, _pick(buf, m), out)
    if move == L3:
        for i in range(n):
            if g[i] > 0 and elig[g[i]]:
                buf[m] = g[i]
                m += 1
        if m == 0:
            return False
        t0 = _pick(buf, m)
        m = 0
        for t in range(len_t[t0]):
            v = near_t[t0, t]
            if g[pos[v]] < 0:
                buf[m] = v
                m += 1
        return m > 0 and _a_l3(g, pos, t0, _pick(buf, m), elig, out)
    if move == L4:
        # route index of every truck customer; depots are 0 and r - 1
        ridx = np.full(n + 2, -1, np.int64)
        route = np.empty(n + 2, np.int64)
        route[0] = 0
        r = 1
        for i in range(n):
            if g[i] > 0:
                route[r] = g[i]
                ridx[g[i]] = r
                r += 1
        route[r] = n + 1
        r += 1
        if r < 4:
            return False
        a = np.random.randint(0, r - 1)
        u1 = route[a]
        for t in range(len_t[u1]):
            v = near_t[u1, t]
            b = ridx[v]
            if b >= 0 and abs(b - a) >= 2 and b < r - 1:
                buf[m] = b
                m += 1
        if m == 0:
            return False
        b = _pick(buf, m)
        lo, hi = (a, b) if a < b else (b, a)
        return _a_l4(g, pos, route[lo + 1], route[hi], out)
    if move == L5 or move == L6:
        for i in range(n):
            if g[i] < 0:
                buf[m] = -g[i]
                m += 1
        if m < 2:
            return False
        d1 = _pick(buf, m)
        m = 0
        for t in range(len_d[d1]):
            v = near_d[d1, t]
            if g[pos[v]] < 0:
                buf[m] = v
                m += 1
        if m == 0:
            return False
        d2 = _pick(buf, m)
        if move == L5:
            return _a_l5(g, pos, d1, d2, out)
        return _a_l6(g, pos, d1, d2, d1 if np.random.random() < 0.5 else d2, out)
    if move == L7:
        for i in range(n):
            if g[i] < 0:
                buf[m] = -g[i]
                m += 1
        if m < 2:
            return False
        d = _pick(buf, m)
        m = 0
        for t in range(len_d[d]):
            v = near_d[d, t]
            k = pos[v]
            if g[k] < 0 and _truck_at(g, k - 1) and _truck_at(g, k + 1):
                buf[m] = v
                m += 1
        if m == 0:
            return False
        j = _pick(buf, m)
        return _a_l7(g, pos, d, j, np.random.random() < 0.5, out)
    if move == TWO_OPT:
        i = np.random.randint(0, n)
        prev = abs(g[i - 1]) if i > 0 else 0
        for t in range(len_t[prev]):
            k = pos[near_t[prev, t]]
            if k > i:
                buf[m] = k
                m += 1
        return m > 0 and _a_two_opt(g, i, _pick(buf, m), out)
    if move == OR_OPT:
        length = 1 if n < 3 or np.random.random() < 0.5 else 2
        i = np.random.randint(0, n - length + 1)
        head = abs(g[i])
        buf[0] = 0
        m = 1
        for t in range(len_t[head]):
            buf[m] = near_t[head, t]
            m += 1
        return _a_or_opt(g, pos, i, length, _pick(buf, m), out)
    # RELOCATE
    node = abs(g[np.random.randint(0, n)])
    buf[0] = 0
    m = 1
    for t in range(len_t[node]):
        buf[m] = near_t[node, t]
        m += 1
    return _a_relocate(g, pos, node, _pick(buf, m), elig, out)


# ---------------------------------------------------------------- search loop

@njit(cache=True)
def evaluate(g, T, D, fstsp, e, sL, sR, w1, w2):
    """(cost, class) with class 0 feasible, 1 adjacent drones, 2 out of range."""
    prev = 1
    for x in g:
        if x < 0 and prev < 0:
            return decode_cost(g, T, D, fstsp, e, sL, sR, w1, w2, True), 1
        prev = x
    c = decode_cost(g, T, D, fstsp, e, sL, sR, 1.0, 1.0, False)
    if c < INF:
        return c, 0
    return decode_cost(g, T, D, fstsp, e, sL, sR, w1, w2, True), 2


@njit(cache=True)
def seed(s):
    np.random.seed(s)


@njit(cache=True)
def sample_move(move, g, near_t, len_t, near_d, len_d, elig, out):
    pos = np.zeros(g.shape[0] + 2, np.int64)
    _positions(g, pos)
    buf = np.empty(g.shape[0] + 2, np.int64)
    return _sample(move, g, pos, near_t, len_t, near_d, len_d, elig, buf, out)


@njit(cache=True)
def search(genes, T, D, fstsp, e, sL, sR, w1, w2, near_t, len_t, near_d, len_d, elig,
           moves, samples, max_passes, rng_seed):
    """First-improvement descent; also returns the cheapest feasible neighbour seen."""
    np.random.seed(rng_seed)
    n = genes.shape[0]
    cur = genes.copy()
    cand = np.empty(n, np.int64)
    pos = np.zeros(n + 2, np.int64)
    buf = np.empty(n + 2, np.int64)
    _positions(cur, pos)
    cur_cost, cls = evaluate(cur, T, D, fstsp, e, sL, sR, w1, w2)
    feas = cur.copy()
    feas_cost = cur_cost if cls == 0 else INF
    if n < 2:
        return cur, cur_cost, feas, feas_cost
    order = moves.copy()
    for _ in range(max_passes):
        for k in range(order.shape[0] - 1, 0, -1):
            j = np.random.randint(0, k + 1)
            order[k], order[j] = order[j], order[k]
        improved = False
        for mv in order:
            for _s in range(samples):
                if not _sample(mv, cur, pos, near_t, len_t, near_d, len_d, elig, buf, cand):
                    continue
                c, cls = evaluate(cand, T, D, fstsp, e, sL, sR, w1, w2)
                if cls == 0 and c < feas_cost:
                    feas[:] = cand
                    feas_cost = c
                if c < cur_cost:
                    cur[:] = cand
                    cur_cost = c
                    _positions(cur, pos)
                    improved = True
        if not improved:
            break
    return cur, cur_cost, feas, feas_cost
