"""Compiled cost-only version of the rendezvous decoder.

Mirrors ``join._decode`` without recording operations.  The pure-Python
decoder stays the reference; tests compare both on random chromosomes.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

INF = math.inf


@njit(cache=True)
def _best_ll(a, r, s, truck, runs_head, runs_tail, inner_w, after, hi, cum, T, D,
             vmt, vll, nt, fstsp, stationary, limited, penalized, e, sL, sR, w2):
    ta = truck[a]
    head = D[ta, runs_head[r]] + inner_w[r]
    tail = runs_tail[r]
    best = INF
    lo = after[r] if stationary else after[r] + 1
    if lo < a:
        lo = a
    for k in range(lo, hi[r] + 1):
        sk = nt + r if k == after[r] else k
        tl = cum[k] - cum[a]
        dr = head + D[tail, truck[k]]
        if fstsp:
            dd = dr + sR
            for sigma in range(2):
                nxt = vll[sk] if sigma == 1 else vmt[sk]
                if nxt == INF:
                    continue
                tt = tl + sR + (sL if sigma == 1 else 0.0)
                ddp = dd
                if limited:
                    if penalized:
                        if tt > e:
                            tt += w2 * (tt - e)
                        if dd > e:
                            ddp = dd + w2 * (dd - e)
                    elif tt > e or dd > e:
                        continue
                v = (tt if tt > ddp else ddp) + nxt
                if v < best:
                    best = v
        else:
            if limited and dr > e:
                if not penalized:
                    continue
                dr += w2 * (dr - e)
            nxt = vll[sk] if vll[sk] < vmt[sk] else vmt[sk]
            v = (tl if tl > dr else dr) + nxt
            if v < best:
                best = v
    vll[s] = best


@njit(cache=True)
def decode_cost(genes, T, D, fstsp, e, sL, sR, w1, w2, penalized):
    n = genes.shape[0]
    end = T.shape[0] - 1
    truck = np.empty(n + 2, np.int64)
    runs_head = np.empty(n, np.int64)
    runs_tail = np.empty(n, np.int64)
    inner_w = np.zeros(n)
    after = np.empty(n, np.int64)
    nt = 1
    R = 0
    truck[0] = 0
    prev_neg = False
    mult = 1.0
    for i in range(n):
        g = genes[i]
        if g > 0:
            truck[nt] = g
            nt += 1
            prev_neg = False
        else:
            c = -g
            if prev_neg:
                if not penalized:
                    return -1.0
                inner_w[R - 1] += mult * D[runs_tail[R - 1], c]
                mult *= w1
                runs_tail[R - 1] = c
            else:
                runs_head[R] = c
                runs_tail[R] = c
                after[R] = nt - 1
                R += 1
                mult = w1
            prev_neg = True
    truck[nt] = end
    nt += 1
    last_t = nt - 1
    cum = np.zeros(nt)
    for t in range(1, nt):
        cum[t] = cum[t - 1] + T[truck[t - 1], truck[t]]
    hi = np.empty(max(R, 1), np.int64)
    for r in range(R):
        hi[r] = after[r + 1] if r + 1 < R else last_t
    ns = nt + R
    vmt = np.full(ns, INF)
    vll = np.full(ns, INF)
    vmt[last_t] = 0.0
    limited = e < INF
    stationary = not fstsp
    nxt_run = R
    r_ptr = R - 1
    for t in range(last_t - 1, -1, -1):
        if r_ptr >= 0 and after[r_ptr] == t:
            p = nt + r_ptr
            nx = vll[t + 1] if vll[t + 1] < vmt[t + 1] else vmt[t + 1]
            vmt[p] = T[truck[t], truck[t + 1]] + nx
            if r_ptr + 1 < R:
                _best_ll(t, r_ptr + 1, p, truck, runs_head, runs_tail, inner_w, after, hi, cum,
                         T, D, vmt, vll, nt, fstsp, stationary, limited, penalized, e, sL, sR, w2)
            nxt_run = r_ptr
            r_ptr -= 1
        if nxt_run == R or t < after[nxt_run]:
            nx = vll[t + 1] if vll[t + 1] < vmt[t + 1] else vmt[t + 1]
            vmt[t] = T[truck[t], truck[t + 1]] + nx
        if nxt_run < R:
            _best_ll(t, nxt_run, t, truck, runs_head, runs_tail, inner_w, after, hi, cum,
                     T, D, vmt, vll, nt, fstsp, stationary, limited, penalized, e, sL, sR, w2)
    return vmt[0] if vmt[0] < vll[0] else vll[0]
