"""Brute-force references for small instances.

Nothing here reuses the decoder: rendezvous choices are enumerated
explicitly and every candidate is timed by walking the truck route.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .instance import Instance

MAX_CANDIDATES = 10 ** 7


class OracleLimitError(RuntimeError):
    pass


@dataclass
class OracleResult:
    optimum: float
    # (launch, drone customer, land) triples; nodes use n + 1 for the return depot
    operations: List[Tuple[int, int, int]] = field(default_factory=list)
    genes: Optional[Tuple[int, ...]] = None
    candidates: int = 0


def _op_time(inst: Instance, truck_leg: float, drone_leg: float, relaunch: bool) -> Optional[float]:
    p = inst.profile
    e = p.endurance
    if p.is_fstsp:
        tt = truck_leg + p.retrieval + (p.launch_setup if relaunch else 0.0)
        dd = drone_leg + p.retrieval
        if tt > e or dd > e:
            return None
        return max(tt, dd)
    if drone_leg > e:
        return None
    return max(truck_leg, drone_leg)


def enumerate_rendezvous(inst: Instance, genes: Sequence[int]) -> OracleResult:
    """Best launch/land assignment for a fixed sequence, by enumeration."""
    n = inst.n
    end = n + 1
    seq = [0] + [abs(g) for g in genes] + [end]
    is_drone = [False] + [g < 0 for g in genes] + [False]
    for p in range(1, len(seq) - 1):
        if is_drone[p] and is_drone[p + 1]:
            raise ValueError("enumeration needs a chromosome without adjacent drone genes")
    truck_pos = [p for p in range(len(seq)) if not is_drone[p]]
    drone_pos = [p for p in range(len(seq)) if is_drone[p]]
    T, D = inst.T, inst.D
    stationary = not inst.profile.is_fstsp

    def truck_between(a: int, b: int) -> float:
        nodes = [seq[p] for p in truck_pos if a <= p <= b]
        return sum(T[x][y] for x, y in zip(nodes, nodes[1:]))

    def choices(m: int, earliest: int):
        d = drone_pos[m]
        nxt = drone_pos[m + 1] if m + 1 < len(drone_pos) else len(seq)
        launches = [p for p in truck_pos if earliest <= p < d]
        after = [p for p in truck_pos if d < p < nxt]
        before = max(p for p in truck_pos if p < d)
        for a in launches:
            lands = list(after)
            if stationary and before >= a:
                lands.insert(0, before)
            for b in lands:
                yield a, b

    count = 0
    best = math.inf
    best_ops: List[Tuple[int, int, int]] = []

    def timed(ops: List[Tuple[int, int, int]]) -> float:
        total = 0.0
        cursor = 0
        for idx, (a, d, b) in enumerate(ops):
            total += truck_between(cursor, a)
            relaunch = idx + 1 < len(ops) and ops[idx + 1][0] == b
            t = _op_time(inst, truck_between(a, b), D[seq[a]][seq[d]] + D[seq[d]][seq[b]], relaunch)
            if t is None:
                return math.inf
            total += t
            cursor = b
        total += truck_between(cursor, len(seq) - 1)
        return total

    def rec(m: int, earliest: int, ops: List[Tuple[int, int, int]]):
        nonlocal count, best, best_ops
        if m == len(drone_pos):
            count += 1
            if count > MAX_CANDIDATES:
                raise OracleLimitError("too many rendezvous candidates")
            t = timed(ops)
            if t < best:
                best, best_ops = t, list(ops)
            return
        for a, b in choices(m, earliest):
            ops.append((a, drone_pos[m], b))
            rec(m + 1, b, ops)
            ops.pop()

    rec(0, 0, [])
    triples = [(seq[a], seq[d], seq[b]) for a, d, b in best_ops]
    return OracleResult(best, triples, tuple(genes), count)


def exhaustive_tspd(inst: Instance, max_n: int = 8) -> OracleResult:
    """Global optimum over every chromosome and rendezvous choice.

    Depth-first search over partial routes (truck moves and sorties) with a
    running-time bound; all times are nonnegative, so a partial route at or
    above the incumbent cannot improve it.

    Only routes a chromosome can express are searched.  A drone gene sits
    behind some truck gene (its slot) and two drone genes never share a
    slot.  A sortie launched at truck index ``a`` and landing at ``b`` may
    use slot ``a .. b-1``, or slot ``b`` itself when the truck may wait
    (TSPD).  Taking the earliest free slot is always best, which leaves a
    single flag to track: whether the slot of the current truck node is
    taken.
    """
    n = inst.n
    if n > max_n:
        raise OracleLimitError(f"exhaustive search limited to n <= {max_n}")
    end = n + 1
    T, D = inst.T, inst.D
    elig = inst.eligible
    stationary_ok = not inst.profile.is_fstsp
    best = [math.inf, None]
    visits = [0]

    def close(pending, relaunch):
        if pending is None:
            return 0.0
        return _op_time(inst, pending[0], pending[1], relaunch)

    def dfs(v, rest, elapsed, pending, slot_taken, plan):
        visits[0] += 1
        if visits[0] > MAX_CANDIDATES:
            raise OracleLimitError("search budget exhausted")
        lb = close(pending, False)
        if lb is None or elapsed + lb >= best[0]:
            return
        if not rest:
            total = elapsed + lb + T[v][end]
            if total < best[0]:
                best[0], best[1] = total, plan
            return
        base = elapsed + lb
        for w in sorted(rest, key=T[v].__getitem__):
            t = base + T[v][w]
            if t < best[0]:
                dfs(w, rest - {w}, t, None, False, plan + (("truck", v, w),))
        ll = close(pending, True)
        if ll is None:
            return
        base = elapsed + ll
        for d in sorted(rest, key=D[v].__getitem__):
            if not elig[d]:
                continue
            out = D[v][d]
            if base + out >= best[0]:
                continue
            remaining = rest - {d}
            if stationary_ok and not slot_taken:
                dfs(v, remaining, base, (0.0, out + D[d][v]), True, plan + (("op", v, d, ()),))
            extend(v, d, out, v, 0.0, (), remaining, base, plan, slot_taken)

    def extend(v, d, out, cur, leg, path, remaining, base, plan, slot_taken):
        # with the launch slot taken the gene goes behind path[0], so a
        # one-node path ends with the landing slot taken as well
        if not remaining:
            if slot_taken and not path:
                return
            t_leg = leg + T[cur][end]
            t = _op_time(inst, t_leg, out + D[d][end], False)
            if t is not None and base + t < best[0]:
                best[0], best[1] = base + t, plan + (("op", v, d, path + (end,)),)
            return
        for w in sorted(remaining, key=T[cur].__getitem__):
            t_leg = leg + T[cur][w]
            if base + t_leg >= best[0]:
                continue
            p2 = path + (w,)
            dfs(w, remaining - {w}, base, (t_leg, out + D[d][w]), slot_taken and len(p2) == 1,
                plan + (("op", v, d, p2),))
            extend(v, d, out, w, t_leg, p2, remaining - {w}, base, plan, slot_taken)

    dfs(0, frozenset(range(1, n + 1)), 0.0, None, False, ())
    ops, genes = _encode_plan(best[1] or (), end)
    return OracleResult(best[0], ops, genes, visits[0])


def _encode_plan(plan, end: int):
    """Chromosome for a plan: each drone gene goes to its earliest free slot."""
    route = [0]
    sorties = []
    for step in plan:
        if step[0] == "truck":
            route.append(step[2])
        else:
            _, v, d, path = step
            a = len(route) - 1
            route.extend(path)
            sorties.append((v, d, a, len(route) - 1))
    if route[-1] != end:
        route.append(end)
    slots = {}
    last = -1
    for v, d, a, b in sorties:
        s = a if a > last else last + 1
        if s > b or route[s] == end:
            raise AssertionError("plan cannot be written as a chromosome")
        slots[s] = d
        last = s
    genes: List[int] = []
    for x, node in enumerate(route):
        if node not in (0, end):
            genes.append(node)
        if x in slots:
            genes.append(-slots[x])
    ops = [(v, d, route[b]) for v, d, a, b in sorties]
    return ops, tuple(genes)


def brute_force_over_chromosomes(inst: Instance) -> float:
    """Minimum of the rendezvous enumeration over all encodable chromosomes (tiny n)."""
    n = inst.n
    best = math.inf
    for perm in itertools.permutations(range(1, n + 1)):
        for signs in itertools.product((1, -1), repeat=n):
            genes = [c * s for c, s in zip(perm, signs)]
            if any(g < 0 and not inst.eligible[-g] for g in genes):
                continue
            if any(a < 0 and b < 0 for a, b in zip(genes, genes[1:])):
                continue
            best = min(best, enumerate_rendezvous(inst, genes).optimum)
    return best
