"""Rendezvous decoder for type-aware chromosomes.

Given the truck/drone sequence fixed by a chromosome, a backward dynamic
program over truck positions picks the launch and landing node of every
drone sortie so that the completion time is minimal.

States are truck positions.  From a position the truck either moves on
with the drone aboard (MT) or launches the drone towards the next unserved
drone gene and picks it up further down the route (LL).  Every state keeps
two values, "MT first" and "LL first", so that the FSTSP relaunch setup
time at a landing node is charged exactly when the drone is relaunched
there.

For TSPD the drone may also land on the last truck node before the drone
gene (the truck may even stay put).  After such a landing the truck stands
before an already served drone gene; that situation gets its own state
per drone run so the gene is never served twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .chromosome import (ChromosomeError, FeasibilityClass, check,
                         has_adjacent_drones)
from .instance import Instance

INF = math.inf


@dataclass(frozen=True)
class Operation:
    launch: int
    chain: Tuple[int, ...]
    land: int
    relaunch: bool = False

    def __str__(self):
        return f"<{self.launch},{','.join(map(str, self.chain))},{self.land}>"


@dataclass
class DecodedSolution:
    completion_time: float
    operations: List[Operation]
    truck_route: List[int]
    range_violation: bool = False
    type1_violation: bool = False
    per_state_cost: Optional[List[float]] = field(default=None, repr=False)
    # indices into operations whose unpenalized times exceed the endurance
    violating: List[int] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not (self.range_violation or self.type1_violation) and math.isfinite(self.completion_time)


def _parse(genes: Sequence[int], end: int):
    truck = [0]
    runs: List[List[int]] = []
    after: List[int] = []
    cur = None
    for g in genes:
        if g > 0:
            truck.append(g)
            cur = None
        else:
            if cur is None:
                cur = []
                runs.append(cur)
                after.append(len(truck) - 1)
            cur.append(-g)
    truck.append(end)
    return truck, runs, after


def _decode(inst: Instance, genes: Sequence[int], w1: float, w2: float,
            penalized: bool, keep_states: bool = False) -> DecodedSolution:
    T, D = inst.T, inst.D
    prof = inst.profile
    fstsp = prof.is_fstsp
    e = prof.endurance
    limited = math.isfinite(e)
    sL, sR = prof.launch_setup, prof.retrieval
    stationary = prof.stationary_truck_rendezvous

    truck, runs, after = _parse(genes, inst.n + 1)
    nt, R = len(truck), len(runs)
    last_t = nt - 1
    if not penalized and any(len(r) > 1 for r in runs):
        raise ChromosomeError("adjacent drone genes need the penalized decoder")

    cum = [0.0] * nt
    for t in range(1, nt):
        cum[t] = cum[t - 1] + T[truck[t - 1]][truck[t]]

    inner_w = [0.0] * R
    inner_raw = [0.0] * R
    for r, chain in enumerate(runs):
        w, acc_w, acc_raw = w1, 0.0, 0.0
        for a, b in zip(chain, chain[1:]):
            d = D[a][b]
            acc_w += w * d
            acc_raw += d
            w *= w1
        inner_w[r] = acc_w
        inner_raw[r] = acc_raw
    hi = [after[r + 1] if r + 1 < R else last_t for r in range(R)]

    # state ids: 0..nt-1 regular truck positions, nt + r the position after[r]
    # once run r has already been served from there
    ns = nt + R
    vmt = [INF] * ns
    vll = [INF] * ns
    mt_next = [-1] * ns
    ll_land = [-1] * ns
    ll_branch = [0] * ns
    vmt[last_t] = 0.0

    def best_ll(a: int, r: int, s: int) -> None:
        # launch from truck position a to serve run r; store at state s
        ta = truck[a]
        chain = runs[r]
        head = D[ta][chain[0]] + inner_w[r]
        tail_node = chain[-1]
        Dtail = D[tail_node]
        ca = cum[a]
        best, land, br = INF, -1, 0
        lo = after[r] if stationary else after[r] + 1
        for k in range(lo, hi[r] + 1):
            if k < a:
                continue
            sk = nt + r if k == after[r] else k
            tl = cum[k] - ca
            dr = head + Dtail[truck[k]]
            if fstsp:
                dd = dr + sR
                for sigma, nxt in ((0, vmt[sk]), (1, vll[sk])):
                    if nxt == INF:
                        continue
                    tt = tl + sR + (sL if sigma else 0.0)
                    if limited:
                        if penalized:
                            if tt > e:
                                tt += w2 * (tt - e)
                            ddp = dd + w2 * (dd - e) if dd > e else dd
                        else:
                            if tt > e or dd > e:
                                continue
                            ddp = dd
                    else:
                        ddp = dd
                    v = (tt if tt > ddp else ddp) + nxt
                    if v < best:
                        best, land, br = v, sk, sigma
            else:
                if limited and dr > e:
                    if not penalized:
                        continue
                    dr += w2 * (dr - e)
                nm, nl = vmt[sk], vll[sk]
                if nl < nm:
                    nxt, sigma = nl, 1
                else:
                    nxt, sigma = nm, 0
                v = (tl if tl > dr else dr) + nxt
                if v < best:
                    best, land, br = v, sk, sigma
        vll[s] = best
        ll_land[s] = land
        ll_branch[s] = br

    run_at = {a: r for r, a in enumerate(after)}
    nxt_run = R
    for t in range(last_t - 1, -1, -1):
        r_here = run_at.get(t)
        if r_here is not None:
            # state after serving run r_here from t (t is the truck node just before it)
            p = nt + r_here
            vmt[p] = T[truck[t]][truck[t + 1]] + min(vmt[t + 1], vll[t + 1])
            mt_next[p] = t + 1
            if r_here + 1 < R:
                best_ll(t, r_here + 1, p)
            nxt_run = r_here
        if nxt_run == R or t < after[nxt_run]:
            vmt[t] = T[truck[t]][truck[t + 1]] + min(vmt[t + 1], vll[t + 1])
            mt_next[t] = t + 1
        if nxt_run < R:
            best_ll(t, nxt_run, t)

    total = min(vmt[0], vll[0])
    type1 = any(len(r) > 1 for r in runs)
    if total == INF:
        return DecodedSolution(INF, [], truck, True, type1,
                               [min(a, b) for a, b in zip(vmt, vll)] if keep_states else None)

    ops: List[Operation] = []
    violating: List[int] = []
    s, branch = 0, (1 if vll[0] < vmt[0] else 0)
    while s != last_t:
        if branch == 0:
            nxt = mt_next[s]
            s = nxt
            branch = 1 if vll[s] < vmt[s] else 0
            continue
        if s < nt:
            a, r = s, _first_run_after(after, s)
        else:
            r = s - nt + 1
            a = after[s - nt]
        land_state, sigma = ll_land[s], ll_branch[s]
        k = land_state if land_state < nt else after[land_state - nt]
        chain = runs[r]
        dr_raw = D[truck[a]][chain[0]] + inner_raw[r] + D[chain[-1]][truck[k]]
        if limited:
            if fstsp:
                tt = cum[k] - cum[a] + sR + (sL if sigma else 0.0)
                bad = tt > e or dr_raw + sR > e
            else:
                bad = dr_raw > e
            if bad:
                violating.append(len(ops))
        ops.append(Operation(truck[a], tuple(chain), truck[k], bool(sigma)))
        s, branch = land_state, sigma
    states = [min(a, b) for a, b in zip(vmt, vll)] if keep_states else None
    return DecodedSolution(total, ops, truck, bool(violating), type1, states, violating)


def _first_run_after(after: List[int], t: int) -> int:
    for r, a in enumerate(after):
        if a >= t:
            return r
    return len(after)


def join(inst: Instance, genes: Sequence[int], w1: float = 1.0, w2: float = 1.0,
         keep_states: bool = False, validate: bool = True) -> DecodedSolution:
    """Penalized decode: chains of drone genes and range excess are priced."""
    if w1 < 1 or w2 < 1:
        raise ValueError("penalty multipliers must be >= 1")
    if validate:
        check(genes, inst)
    return _decode(inst, genes, w1, w2, True, keep_states)


def join_feasible(inst: Instance, genes: Sequence[int], keep_states: bool = False,
                  validate: bool = True) -> DecodedSolution:
    """Exact decode restricted to single-customer, in-range sorties.

    Returns an infinite completion time (and ``range_violation``) when no
    rendezvous assignment respects the endurance limit.
    """
    if validate:
        check(genes, inst)
    if has_adjacent_drones(genes):
        raise ChromosomeError("adjacent drone genes need the penalized decoder")
    return _decode(inst, genes, 1.0, 1.0, False, keep_states)


def evaluate(inst: Instance, genes: Sequence[int], w1: float = 2.0, w2: float = 2.0,
             validate: bool = False) -> Tuple[DecodedSolution, FeasibilityClass]:
    """Decode with the cost the GA works with and classify the chromosome."""
    if validate:
        check(genes, inst)
    if has_adjacent_drones(genes):
        return _decode(inst, genes, w1, w2, True), FeasibilityClass.TYPE1
    sol = _decode(inst, genes, 1.0, 1.0, False)
    if math.isfinite(sol.completion_time):
        return sol, FeasibilityClass.FEASIBLE
    return _decode(inst, genes, w1, w2, True), FeasibilityClass.TYPE2


class Evaluator:
    """Memoised (cost, class) lookups used by the search layers.

    Feasible costs do not depend on the penalties and are cached by genes
    alone; penalized costs are cached together with the weights in force.
    The caches are bounded and evict oldest entries first.
    """

    def __init__(self, inst: Instance, maxsize: Optional[int] = None, compiled: bool = True):
        self.inst = inst
        self.maxsize = maxsize or max(4096, 4_000_000 // max(inst.n, 1))
        self._plain: dict = {}
        self._pen: dict = {}
        self.decodes = 0
        self.lookups = 0
        self._fast = None
        if compiled:
            from ._kernel import decode_cost
            T = np.array(inst.truck_time)
            D = np.array(inst.drone_time)
            p = inst.profile
            args = (p.is_fstsp, float(p.endurance), float(p.launch_setup), float(p.retrieval))
            self._fast = lambda g, w1, w2, pen: decode_cost(
                np.array(g, dtype=np.int64), T, D, *args, float(w1), float(w2), pen)

    def _cost(self, genes, w1: float, w2: float, penalized: bool) -> float:
        self.decodes += 1
        if self._fast is not None:
            return self._fast(genes, w1, w2, penalized)
        return _decode(self.inst, genes, w1, w2, penalized).completion_time

    def _store(self, cache: dict, key, value) -> None:
        if len(cache) >= self.maxsize:
            del cache[next(iter(cache))]
        cache[key] = value

    def __call__(self, genes: Tuple[int, ...], w1: float, w2: float) -> Tuple[float, FeasibilityClass]:
        self.lookups += 1
        hit = self._plain.get(genes)
        if hit is None:
            if has_adjacent_drones(genes):
                hit = (INF, FeasibilityClass.TYPE1)
            else:
                c = self._cost(genes, 1.0, 1.0, False)
                hit = (c, FeasibilityClass.FEASIBLE if c < INF else FeasibilityClass.TYPE2)
            self._store(self._plain, genes, hit)
        if hit[1] is FeasibilityClass.FEASIBLE:
            return hit
        key = (genes, w1, w2)
        c = self._pen.get(key)
        if c is None:
            c = self._cost(genes, w1, w2, True)
            self._store(self._pen, key, c)
        return c, hit[1]

    def cost(self, genes: Tuple[int, ...], w1: float, w2: float) -> float:
        return self(genes, w1, w2)[0]
