"""Chromosome neighbourhoods L1-L7, three classical moves and the improvement loop.

Each ``*_apply`` function performs one fully specified move and returns the
new gene tuple, or ``None`` when the move does not apply.  Samplers draw the
random arguments, restricting partner nodes to the closest customers.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chromosome import Genes
from .instance import Instance

L_MOVES = ("L1", "L2", "L3", "L4", "L5", "L6", "L7")
CLASSIC_MOVES = ("TwoOpt", "OrOpt", "Relocate")
ALL_MOVES = L_MOVES + CLASSIC_MOVES


def _pos(genes: Sequence[int]) -> Dict[int, int]:
    return {abs(g): i for i, g in enumerate(genes)}


def _truck_at(genes: Sequence[int], i: int) -> bool:
    # positions outside the chromosome are the depots
    return i < 0 or i >= len(genes) or genes[i] > 0


# ---------------------------------------------------------------- explicit moves

def l1_apply(genes: Sequence[int], node: int, eligible: Optional[Sequence[bool]] = None,
             pos=None) -> Optional[Genes]:
    """Make truck customer ``node`` a drone customer if both neighbours ride the truck."""
    i = (pos or _pos(genes))[node]
    if genes[i] < 0 or not (_truck_at(genes, i - 1) and _truck_at(genes, i + 1)):
        return None
    if eligible is not None and not eligible[node]:
        return None
    out = list(genes)
    out[i] = -node
    return tuple(out)


def l2_apply(genes: Sequence[int], drone: int, after: int, pos=None) -> Optional[Genes]:
    """Move drone customer ``drone`` between truck node ``after`` (0 = depot) and its truck successor."""
    p = pos or _pos(genes)
    if genes[p[drone]] > 0 or drone == after:
        return None
    rest = [g for g in genes if g != -drone]
    if after == 0:
        k = 0
    else:
        if after not in p or genes[p[after]] < 0:
            return None
        k = rest.index(after) + 1
    if not _truck_at(rest, k):
        return None
    rest.insert(k, -drone)
    out = tuple(rest)
    return None if out == tuple(genes) else out


def l3_apply(genes: Sequence[int], truck: int, drone: int,
             eligible: Optional[Sequence[bool]] = None, pos=None) -> Optional[Genes]:
    """Swap a truck and a drone customer; each position keeps its vehicle."""
    p = pos or _pos(genes)
    i, j = p[truck], p[drone]
    if genes[i] < 0 or genes[j] > 0:
        return None
    if eligible is not None and not eligible[truck]:
        return None
    out = list(genes)
    out[i], out[j] = drone, -truck
    return tuple(out)


def l4_apply(genes: Sequence[int], arc1: Tuple[int, int], arc2: Tuple[int, int],
             pos=None) -> Optional[Genes]:
    """Replace truck arcs (u1,v1), (u2,v2) by (u1,u2), (v1,v2).

    Everything from ``v1`` to ``u2`` in the chromosome is reversed, drone
    customers included.  Depots are 0 and ``n + 1``.
    """
    n = len(genes)
    route = [0] + [g for g in genes if g > 0] + [n + 1]
    idx = {v: k for k, v in enumerate(route)}
    (u1, v1), (u2, v2) = arc1, arc2
    if any(v not in idx for v in (u1, v1, u2, v2)):
        return None
    a, b = idx[u1], idx[u2]
    if idx[v1] != a + 1 or idx[v2] != b + 1:
        return None
    if a > b:
        return l4_apply(genes, arc2, arc1, pos)
    if b - a < 2:
        return None
    p = pos or _pos(genes)
    i, j = p[v1], p[u2]
    out = list(genes)
    out[i:j + 1] = out[i:j + 1][::-1]
    return tuple(out)


def l5_apply(genes: Sequence[int], d1: int, d2: int, pos=None) -> Optional[Genes]:
    """Swap two drone customers and make both ride the truck."""
    p = pos or _pos(genes)
    i, j = p[d1], p[d2]
    if d1 == d2 or genes[i] > 0 or genes[j] > 0:
        return None
    out = list(genes)
    out[i], out[j] = d2, d1
    return tuple(out)


def l6_apply(genes: Sequence[int], d1: int, d2: int, convert: int, pos=None) -> Optional[Genes]:
    """Swap two drone customers; only ``convert`` becomes a truck customer."""
    if convert not in (d1, d2):
        raise ValueError("convert must be one of the swapped customers")
    p = pos or _pos(genes)
    i, j = p[d1], p[d2]
    if d1 == d2 or genes[i] > 0 or genes[j] > 0:
        return None
    out = list(genes)
    out[i], out[j] = -d2, -d1
    k = j if convert == d1 else i
    out[k] = abs(out[k])
    return tuple(out)


def l7_apply(genes: Sequence[int], d: int, j: int, before: bool, pos=None) -> Optional[Genes]:
    """Drone ``j`` (with truck neighbours) joins the truck; drone ``d`` moves next to it."""
    p = pos or _pos(genes)
    if d == j or genes[p[d]] > 0 or genes[p[j]] > 0:
        return None
    k = p[j]
    if not (_truck_at(genes, k - 1) and _truck_at(genes, k + 1)):
        return None
    rest = [g for g in genes if g != -d]
    k = rest.index(-j)
    rest[k] = j
    rest.insert(k if before else k + 1, -d)
    return tuple(rest)


def two_opt_apply(genes: Sequence[int], i: int, j: int) -> Optional[Genes]:
    if not 0 <= i < j < len(genes):
        return None
    out = list(genes)
    out[i:j + 1] = out[i:j + 1][::-1]
    return tuple(out)


def or_opt_apply(genes: Sequence[int], i: int, length: int, after: int) -> Optional[Genes]:
    """Move ``genes[i:i+length]`` behind customer ``after`` (0 = front)."""
    block = list(genes[i:i + length])
    if len(block) != length or after in {abs(g) for g in block}:
        return None
    rest = list(genes[:i]) + list(genes[i + length:])
    k = 0 if after == 0 else _pos(rest)[after] + 1
    out = tuple(rest[:k] + block + rest[k:])
    return None if out == tuple(genes) else out


def relocate_apply(genes: Sequence[int], node: int, after: int,
                   eligible: Optional[Sequence[bool]] = None, pos=None) -> Optional[Genes]:
    """Move ``node`` behind ``after`` (0 = front) and switch its vehicle."""
    g = genes[(pos or _pos(genes))[node]]
    if g > 0 and eligible is not None and not eligible[node]:
        return None
    if node == after:
        return None
    rest = [x for x in genes if abs(x) != node]
    k = 0 if after == 0 else _pos(rest)[after] + 1
    rest.insert(k, -g)
    return tuple(rest)


# ---------------------------------------------------------------- random sampling

@dataclass
class MoveContext:
    inst: Instance
    n_close: int
    near_truck: List[List[int]]
    near_drone: List[List[int]]
    eligible: List[bool]

    @classmethod
    def build(cls, inst: Instance, n_close_frac: float = 0.3, n_close_min: int = 1) -> "MoveContext":
        # n_close_min optionally floors the neighbour count on small instances
        k = max(1, min(inst.n - 1, max(n_close_min, math.ceil(n_close_frac * inst.n))))
        nt = [row[:k] for row in inst.nearest("truck")]
        nd = [row[:k] for row in inst.nearest("drone")]
        return cls(inst, k, nt, nd, inst.eligible)


def _sample_l1(g, p, ctx, rng):
    n = len(g)
    cand = [g[i] for i in range(n) if g[i] > 0 and ctx.eligible[g[i]]
            and _truck_at(g, i - 1) and _truck_at(g, i + 1)]
    return l1_apply(g, rng.choice(cand), pos=p) if cand else None


def _drones(g):
    return [-x for x in g if x < 0]


def _sample_l2(g, p, ctx, rng):
    ds = _drones(g)
    if not ds:
        return None
    d = rng.choice(ds)
    opts = [v for v in [0, *ctx.near_drone[d]] if v == 0 or (v != d and g[p[v]] > 0)]
    return l2_apply(g, d, rng.choice(opts), pos=p) if opts else None


def _sample_l3(g, p, ctx, rng):
    trucks = [x for x in g if x > 0 and ctx.eligible[x]]
    if not trucks:
        return None
    t = rng.choice(trucks)
    opts = [v for v in ctx.near_truck[t] if g[p[v]] < 0]
    return l3_apply(g, t, rng.choice(opts), pos=p) if opts else None


def _sample_l4(g, p, ctx, rng):
    n = len(g)
    route = [0] + [x for x in g if x > 0] + [n + 1]
    if len(route) < 4:
        return None
    a = rng.randrange(len(route) - 1)
    idx = {v: k for k, v in enumerate(route)}
    u1 = route[a]
    opts = [v for v in ctx.near_truck[u1] if v in idx and abs(idx[v] - a) >= 2
            and idx[v] < len(route) - 1]
    if not opts:
        return None
    b = idx[rng.choice(opts)]
    return l4_apply(g, (u1, route[a + 1]), (route[b], route[b + 1]), p)


def _pick_two_drones(g, p, ctx, rng):
    ds = _drones(g)
    if len(ds) < 2:
        return None
    d1 = rng.choice(ds)
    opts = [v for v in ctx.near_drone[d1] if g[p[v]] < 0]
    if not opts:
        return None
    return d1, rng.choice(opts)


def _sample_l5(g, p, ctx, rng):
    pair = _pick_two_drones(g, p, ctx, rng)
    return l5_apply(g, *pair, pos=p) if pair else None


def _sample_l6(g, p, ctx, rng):
    pair = _pick_two_drones(g, p, ctx, rng)
    return l6_apply(g, pair[0], pair[1], rng.choice(pair), pos=p) if pair else None


def _sample_l7(g, p, ctx, rng):
    ds = _drones(g)
    if len(ds) < 2:
        return None
    d = rng.choice(ds)
    opts = [v for v in ctx.near_drone[d] if g[p[v]] < 0
            and _truck_at(g, p[v] - 1) and _truck_at(g, p[v] + 1)]
    if not opts:
        return None
    return l7_apply(g, d, rng.choice(opts), rng.random() < 0.5, pos=p)


def _sample_two_opt(g, p, ctx, rng):
    n = len(g)
    i = rng.randrange(n)
    prev = abs(g[i - 1]) if i > 0 else 0
    opts = [p[v] for v in ctx.near_truck[prev] if p[v] > i]
    return two_opt_apply(g, i, rng.choice(opts)) if opts else None


def _sample_or_opt(g, p, ctx, rng):
    n = len(g)
    length = 1 if n < 3 or rng.random() < 0.5 else 2
    i = rng.randrange(n - length + 1)
    head = abs(g[i])
    opts = [0, *ctx.near_truck[head]]
    return or_opt_apply(g, i, length, rng.choice(opts))


def _sample_relocate(g, p, ctx, rng):
    node = abs(rng.choice(g))
    return relocate_apply(g, node, rng.choice([0, *ctx.near_truck[node]]), ctx.eligible, p)


SAMPLERS: Dict[str, Callable] = {
    "L1": _sample_l1, "L2": _sample_l2, "L3": _sample_l3, "L4": _sample_l4,
    "L5": _sample_l5, "L6": _sample_l6, "L7": _sample_l7,
    "TwoOpt": _sample_two_opt, "OrOpt": _sample_or_opt, "Relocate": _sample_relocate,
}


def random_move(name: str, genes: Genes, ctx: MoveContext, rng: random.Random,
                pos: Optional[Dict[int, int]] = None) -> Optional[Genes]:
    return SAMPLERS[name](genes, pos or _pos(genes), ctx, rng)


def local_search(genes: Genes, cost: Callable[[Genes], float], ctx: MoveContext,
                 rng: random.Random, moves: Sequence[str] = ALL_MOVES,
                 samples: Optional[int] = None, max_passes: int = 20) -> Tuple[Genes, float]:
    """First-improvement descent over randomly ordered neighbourhoods.

    A pass tries ``samples`` random moves per neighbourhood (default n) and
    keeps any strict improvement.  Stops after a pass without improvement.
    """
    cur = tuple(genes)
    cur_cost = cost(cur)
    if len(cur) < 2:
        return cur, cur_cost
    samples = samples or len(cur)
    order = list(moves)
    pos = _pos(cur)
    for _ in range(max_passes):
        rng.shuffle(order)
        improved = False
        for name in order:
            sampler = SAMPLERS[name]
            for _ in range(samples):
                cand = sampler(cur, pos, ctx, rng)
                if cand is None:
                    continue
                c = cost(cand)
                if c < cur_cost:
                    cur, cur_cost = cand, c
                    pos = _pos(cur)
                    improved = True
        if not improved:
            break
    return cur, cur_cost


MOVE_CODES = {name: k for k, name in enumerate(ALL_MOVES)}


def _padded(rows: List[List[int]]):
    width = max(1, max(len(r) for r in rows))
    arr = np.zeros((len(rows), width), dtype=np.int64)
    for i, r in enumerate(rows):
        arr[i, :len(r)] = r
    return arr, np.array([len(r) for r in rows], dtype=np.int64)


class CompiledSearch:
    """``local_search`` run inside the compiled kernel.

    Same neighbourhoods and acceptance rule; the random stream is numpy's,
    seeded from ``rng`` per call.  ``__call__`` also returns the cheapest
    feasible chromosome evaluated, or ``None``.
    """

    def __init__(self, ctx: MoveContext, moves: Sequence[str] = ALL_MOVES,
                 samples: Optional[int] = None, max_passes: int = 20):
        inst = ctx.inst
        p = inst.profile
        self.T = np.array(inst.truck_time, dtype=float)
        self.D = np.array(inst.drone_time, dtype=float)
        self.prof = (p.is_fstsp, float(p.endurance), float(p.launch_setup), float(p.retrieval))
        self.near_t, self.len_t = _padded(ctx.near_truck)
        self.near_d, self.len_d = _padded(ctx.near_drone)
        self.elig = np.asarray(ctx.eligible, dtype=np.bool_)
        self.moves = np.array([MOVE_CODES[m] for m in moves], dtype=np.int64)
        self.samples = samples or inst.n
        self.max_passes = max_passes

    def __call__(self, genes: Genes, w1: float, w2: float, rng: random.Random):
        from ._lskernel import search
        cur, c, feas, fc = search(np.array(genes, dtype=np.int64), self.T, self.D, *self.prof,
                                  float(w1), float(w2), self.near_t, self.len_t, self.near_d,
                                  self.len_d, self.elig, self.moves, self.samples,
                                  self.max_passes, rng.randrange(2 ** 31))
        best = (tuple(int(x) for x in feas), float(fc)) if math.isfinite(fc) else None
        return tuple(int(x) for x in cur), float(c), best
