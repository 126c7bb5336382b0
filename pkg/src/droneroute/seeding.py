"""Initial solutions: TSP tour, exact partition of a fixed order, perturbation."""

from __future__ import annotations

import math
import random
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .chromosome import FeasibilityClass, Genes, enforce_eligibility
from .instance import Instance
from .population import PenaltyController, Population

INF = math.inf


def tour_cost(inst: Instance, order: Sequence[int]) -> float:
    T = inst.T
    route = [0, *order, inst.n + 1]
    return sum(T[a][b] for a, b in zip(route, route[1:]))


def _is_symmetric(inst: Instance) -> bool:
    m = inst.truck_time[: inst.n + 1, : inst.n + 1]
    return bool((m == m.T).all())


def build_tsp_tour(inst: Instance, rng: Optional[random.Random] = None,
                   max_rounds: int = 1000) -> List[int]:
    """Nearest-neighbour start polished by 2-opt and Or-opt until no move helps."""
    n = inst.n
    T = inst.T
    end = n + 1
    left = set(range(1, n + 1))
    cur, order = 0, []
    while left:
        nxt = min(left, key=lambda c: (T[cur][c], c))
        order.append(nxt)
        left.remove(nxt)
        cur = nxt
    if n < 3:
        return min(([*order], order[::-1]), key=lambda o: tour_cost(inst, o))

    sym = _is_symmetric(inst)
    route = [0, *order, end]
    for _ in range(max_rounds):
        improved = _two_opt_pass(route, T, sym) | _or_opt_pass(route, T)
        if not improved:
            break
    return route[1:-1]


def _two_opt_pass(route: List[int], T, sym: bool) -> bool:
    improved = False
    m = len(route)
    for i in range(1, m - 2):
        for j in range(i + 1, m - 1):
            a, b, c, d = route[i - 1], route[i], route[j], route[j + 1]
            if sym:
                delta = T[a][c] + T[b][d] - T[a][b] - T[c][d]
            else:
                seg = route[i:j + 1]
                old = T[a][b] + sum(T[x][y] for x, y in zip(seg, seg[1:])) + T[c][d]
                rev = seg[::-1]
                new = T[a][c] + sum(T[x][y] for x, y in zip(rev, rev[1:])) + T[b][d]
                delta = new - old
            if delta < -1e-10:
                route[i:j + 1] = route[i:j + 1][::-1]
                improved = True
    return improved


def _or_opt_pass(route: List[int], T) -> bool:
    improved = False
    for length in (1, 2, 3):
        i = 1
        while i + length < len(route):
            seg = route[i:i + length]
            a, b = route[i - 1], route[i + length]
            removed = T[a][seg[0]] + T[seg[-1]][b] - T[a][b]
            rest = route[:i] + route[i + length:]
            best, best_k = -1e-10, -1
            for k in range(len(rest) - 1):
                if k == i - 1:
                    continue
                u, v = rest[k], rest[k + 1]
                gain = removed - (T[u][seg[0]] + T[seg[-1]][v] - T[u][v])
                if gain > best:
                    best, best_k = gain, k
            if best_k >= 0:
                route[:] = rest[:best_k + 1] + seg + rest[best_k + 1:]
                improved = True
            i += 1
    return improved


def read_tour(path, n: int) -> List[int]:
    ids = [int(tok) for tok in Path(path).read_text().split()]
    if sorted(ids) != list(range(1, n + 1)):
        raise ValueError(f"tour file {path} is not a permutation of 1..{n}")
    return ids


def exact_partition(inst: Instance, tour: Sequence[int]) -> Tuple[Genes, float]:
    """Optimal truck/drone split of a fixed customer order.

    Shortest path over tour positions.  A state is a truck position ``p``
    plus a flag telling whether position ``p + 1`` is a drone customer that
    was already served (TSPD pickup on the node before it) and, for FSTSP,
    whether the next step must be a launch (relaunch setup paid) or must
    be a truck move.  O(n^3) arcs.
    """
    n = inst.n
    T, D = inst.T, inst.D
    elig = inst.eligible
    prof = inst.profile
    fstsp = prof.is_fstsp
    e = prof.endurance
    sL, sR = prof.launch_setup, prof.retrieval
    seq = [0, *tour, n + 1]
    last = n + 1
    cum = [0.0] * (n + 2)
    for p in range(1, n + 2):
        cum[p] = cum[p - 1] + T[seq[p - 1]][seq[p]]

    def skip_gain(j: int) -> float:
        # truck time saved by driving around position j
        return T[seq[j - 1]][seq[j]] + T[seq[j]][seq[j + 1]] - T[seq[j - 1]][seq[j + 1]]

    ANY, MT_ONLY, LL_ONLY = 0, 1, 2
    # cost[p][skip][mode]
    cost = [[[INF] * 3 for _ in range(2)] for _ in range(n + 2)]
    back = {}
    cost[0][0][ANY] = 0.0

    def relax(state, val, prev, op):
        p, s, m = state
        if val < cost[p][s][m] - 1e-12:
            cost[p][s][m] = val
            back[state] = (prev, op)

    for p in range(n + 1):
        for s in (0, 1):
            for m in (ANY, MT_ONLY, LL_ONLY):
                base = cost[p][s][m]
                if base == INF:
                    continue
                start = p + 2 if s else p + 1  # next truck-reachable position
                if m != LL_ONLY and start <= last:
                    leg = cum[start] - cum[p] - (skip_gain(p + 1) if s else 0.0)
                    relax((start, 0, ANY), base + leg, (p, s, m), None)
                if m == MT_ONLY:
                    continue
                pre_skip = skip_gain(p + 1) if s else 0.0
                # a drone customer never sits right after an already served one
                for j in range(p + 3 if s else p + 1, n + 1):
                    if not elig[seq[j]]:
                        continue
                    out = D[seq[p]][seq[j]]
                    # pickup on the node before j (TSPD only), truck never passes j
                    if not fstsp:
                        dr = out + D[seq[j]][seq[j - 1]]
                        if dr <= e:
                            tl = cum[j - 1] - cum[p] - pre_skip
                            relax((j - 1, 1, ANY), base + max(tl, dr), (p, s, m), (j, j - 1))
                    for b in range(j + 1, last + 1):
                        tl = cum[b] - cum[p] - pre_skip - skip_gain(j)
                        dr = out + D[seq[j]][seq[b]]
                        if fstsp:
                            if dr + sR > e:
                                continue
                            for relaunch, mode in ((False, MT_ONLY), (True, LL_ONLY)):
                                tt = tl + sR + (sL if relaunch else 0.0)
                                if tt > e:
                                    continue
                                relax((b, 0, mode), base + max(tt, dr + sR), (p, s, m), (j, b))
                        else:
                            if dr > e:
                                continue
                            relax((b, 0, ANY), base + max(tl, dr), (p, s, m), (j, b))
    best_state = min(((last, 0, ANY), (last, 0, MT_ONLY)), key=lambda st: cost[st[0]][st[1]][st[2]])
    total = cost[last][0][best_state[2]]
    drones = set()
    st = best_state
    while st != (0, 0, ANY):
        prev, op = back[st]
        if op is not None:
            drones.add(op[0])
        st = prev
    genes = tuple(-seq[p] if p in drones else seq[p] for p in range(1, n + 1))
    return genes, total


def perturb(base: Sequence[int], eligible: Sequence[bool], rng: random.Random) -> Genes:
    """One random neighbour of ``base`` in the style of the initial population."""
    w = list(base)
    n = len(w)
    if rng.random() < 0.5:
        for i in range(n):
            if rng.random() < 0.1:
                w[i] = -w[i]
            if rng.random() < 0.1 and n > 1:
                if i == 0:
                    k = 1
                elif i == n - 1:
                    k = n - 2
                else:
                    k = i + 1 if rng.random() < 0.5 else i - 1
                w[i], w[k] = w[k], w[i]
    else:
        i1, i2 = sorted((rng.randrange(n), rng.randrange(n)))
        seg = w[i1:i2 + 1]
        kind = rng.randrange(3)
        if kind == 0:
            seg.reverse()
        elif kind == 1:
            seg = [-g for g in seg]
        else:
            rng.shuffle(seg)
        w[i1:i2 + 1] = seg
    return enforce_eligibility(w, eligible)


def required_classes(inst: Instance) -> List[FeasibilityClass]:
    """Type-2 chromosomes only exist when the drone range is limited."""
    classes = [FeasibilityClass.FEASIBLE, FeasibilityClass.TYPE1]
    if inst.profile.limited_range:
        classes.append(FeasibilityClass.TYPE2)
    return classes


def _force_type1(base: Sequence[int], eligible, rng: random.Random) -> Optional[Genes]:
    pairs = [i for i in range(len(base) - 1) if eligible[abs(base[i])] and eligible[abs(base[i + 1])]]
    if not pairs:
        return None
    i = rng.choice(pairs)
    g = list(base)
    g[i], g[i + 1] = -abs(g[i]), -abs(g[i + 1])
    return tuple(g)


def _force_type2(base: Sequence[int], eligible, evaluate, rng: random.Random) -> Optional[Genes]:
    # make isolated far customers drone customers until the range breaks
    g = [abs(x) for x in base]
    idx = [i for i in range(len(g)) if eligible[g[i]]]
    rng.shuffle(idx)
    for i in idx:
        if (i > 0 and g[i - 1] < 0) or (i + 1 < len(g) and g[i + 1] < 0):
            continue
        g[i] = -g[i]
        if evaluate(tuple(g))[1] is FeasibilityClass.TYPE2:
            return tuple(g)
    return None


def fill_population(pop: Population, base: Genes, evaluate, eligible, rng: random.Random,
                    max_attempts: Optional[int] = None) -> bool:
    """Perturb ``base`` until every subpopulation holds ``mu`` members.

    Perturbations that land in an already full class are dropped unless they
    beat the feasible incumbent; the return value says whether one did.  After
    ``max_attempts`` tries the remaining gaps are patched with constructed
    chromosomes where possible.
    """
    max_attempts = max_attempts if max_attempts is not None else 10_000 * pop.mu
    attempts = 0
    improved = False
    while pop.underfull() and attempts < max_attempts:
        attempts += 1
        g = perturb(base, eligible, rng)
        c, cls = evaluate(g)
        if len(pop.subpops[cls]) < pop.mu or (
                cls is FeasibilityClass.FEASIBLE and pop.best is not None and c < pop.best.cost):
            improved |= pop.add(g, c, cls)
    for cls in pop.underfull():
        tries = 0
        while len(pop.subpops[cls]) < pop.mu and tries < 100 * pop.mu:
            tries += 1
            seed = perturb(base, eligible, rng)
            if cls is FeasibilityClass.TYPE1:
                g = _force_type1(seed, eligible, rng)
            elif cls is FeasibilityClass.TYPE2:
                g = _force_type2(seed, eligible, evaluate, rng)
            else:
                g = tuple(abs(x) for x in seed)
            if g is None:
                continue
            c, got = evaluate(g)
            if got is cls:
                improved |= pop.add(g, c, cls)
    return improved


def initial_population(inst: Instance, mu: int, lam: int, evaluate, rng: random.Random,
                       tour: Optional[Sequence[int]] = None, elite_frac: float = 0.2,
                       penalties: Optional[PenaltyController] = None) -> Population:
    """Partition a TSP tour, then fill the subpopulations with its perturbations."""
    pop = Population(required_classes(inst), mu, lam, elite_frac, penalties)
    order = list(tour) if tour is not None else build_tsp_tour(inst, rng)
    seed, _ = exact_partition(inst, order)
    pop.origin = seed
    c, cls = evaluate(seed)
    pop.add(seed, c, cls)
    fill_population(pop, seed, evaluate, inst.eligible, rng)
    return pop
