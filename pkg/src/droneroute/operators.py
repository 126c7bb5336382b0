"""Crossovers, mutations and repair on signed chromosomes.

Windows are 0-based inclusive index pairs ``(i1, i2)``; ``i1 > i2`` is an
empty window.
"""

from __future__ import annotations

import math
import random
from typing import List, Optional, Sequence, Tuple

from .chromosome import Genes, enforce_eligibility
from .instance import Instance
from .join import join, join_feasible

Window = Tuple[int, int]


def random_window(n: int, rng: random.Random) -> Window:
    a, b = rng.randrange(n), rng.randrange(n)
    return (a, b) if a <= b else (b, a)


def _fill_in_order(child: List[Optional[int]], donor: Sequence[int]) -> List[int]:
    placed = {abs(g) for g in child if g is not None}
    rest = iter(g for g in donor if abs(g) not in placed)
    return [g if g is not None else next(rest) for g in child]


def ox1(p1: Sequence[int], p2: Sequence[int], window: Window) -> Genes:
    """Classic order crossover: keep P1's slice, fill from P2 cyclically after the slice."""
    n = len(p1)
    i1, i2 = window
    if i1 > i2:
        return tuple(p2)
    child: List[Optional[int]] = [None] * n
    child[i1:i2 + 1] = p1[i1:i2 + 1]
    kept = {abs(g) for g in p1[i1:i2 + 1]}
    donor = [p2[(i2 + 1 + t) % n] for t in range(n)]
    fill = iter(g for g in donor if abs(g) not in kept)
    for t in range(n):
        pos = (i2 + 1 + t) % n
        if child[pos] is None:
            child[pos] = next(fill)
    return tuple(child)


def ox2(p1: Sequence[int], p2: Sequence[int], positions: Sequence[int]) -> Genes:
    """Order-based crossover: customers found at ``positions`` of P2 are
    re-ordered inside P1 to follow P2, carrying P2's signs."""
    chosen = [p2[i] for i in sorted(set(positions))]
    ids = {abs(g) for g in chosen}
    it = iter(chosen)
    return tuple(next(it) if abs(g) in ids else g for g in p1)


def tox1(p1: Sequence[int], p2: Sequence[int], window: Window, node_kind: str) -> Genes:
    """Copy P1's truck (or drone) genes inside the window, the rest from P2 in order."""
    if node_kind not in ("truck", "drone"):
        raise ValueError("node_kind must be 'truck' or 'drone'")
    want_truck = node_kind == "truck"
    i1, i2 = window
    child: List[Optional[int]] = [None] * len(p1)
    for i in range(i1, i2 + 1):
        if (p1[i] > 0) == want_truck:
            child[i] = p1[i]
    return tuple(_fill_in_order(child, p2))


def tox2(p1: Sequence[int], p2: Sequence[int], window: Window) -> Genes:
    """Copy P1's customers inside the window, the rest in P2's order; each
    customer then takes its sign from P2 if it sits inside the window and
    from P1 otherwise."""
    i1, i2 = window
    child: List[Optional[int]] = [None] * len(p1)
    child[i1:i2 + 1] = p1[i1:i2 + 1] if i1 <= i2 else []
    order = _fill_in_order(child, p2)
    s1 = {abs(g): g > 0 for g in p1}
    s2 = {abs(g): g > 0 for g in p2}
    out = []
    for i, g in enumerate(order):
        c = abs(g)
        positive = s2[c] if i1 <= i <= i2 else s1[c]
        out.append(c if positive else -c)
    return tuple(out)


CROSSOVERS = ("OX1", "OX2", "TOX1", "TOX2")


def crossover(p1: Sequence[int], p2: Sequence[int], rng: random.Random,
              eligible: Sequence[bool], method: Optional[str] = None) -> Genes:
    n = len(p1)
    method = method or rng.choice(CROSSOVERS)
    if method == "OX1":
        child = ox1(p1, p2, random_window(n, rng))
    elif method == "OX2":
        k = rng.randint(1, n)
        child = ox2(p1, p2, rng.sample(range(n), k))
    elif method == "TOX1":
        child = tox1(p1, p2, random_window(n, rng), rng.choice(("truck", "drone")))
    elif method == "TOX2":
        child = tox2(p1, p2, random_window(n, rng))
    else:
        raise ValueError(f"unknown crossover {method!r}")
    return enforce_eligibility(child, eligible)


def sign_mutation(genes: Sequence[int], rng: random.Random, eligible: Sequence[bool],
                  p: float = 0.1) -> Genes:
    out = [-g if rng.random() < p else g for g in genes]
    return enforce_eligibility(out, eligible)


def tour_mutation(genes: Sequence[int], rng: random.Random, window: Optional[Window] = None) -> Genes:
    """Scramble a contiguous window."""
    i1, i2 = window if window is not None else random_window(len(genes), rng)
    out = list(genes)
    seg = out[i1:i2 + 1]
    rng.shuffle(seg)
    out[i1:i2 + 1] = seg
    return tuple(out)


def mutate(genes: Sequence[int], rng: random.Random, eligible: Sequence[bool],
           sign_p: float = 0.1) -> Genes:
    if rng.random() < 0.5:
        return sign_mutation(genes, rng, eligible, sign_p)
    return tour_mutation(genes, rng)


def repair(genes: Sequence[int], inst: Instance, rng: random.Random,
           w1: float = 1.0, w2: float = 1.0) -> Genes:
    """Turn drone genes into truck genes until the chromosome decodes feasibly.

    Every run of adjacent drone genes keeps one randomly chosen member.
    Then, while the endurance cannot be met, the customers of the violating
    operations of the penalized decode ride the truck instead.
    """
    g = list(genes)
    i, n = 0, len(g)
    while i < n:
        if g[i] < 0:
            j = i
            while j + 1 < n and g[j + 1] < 0:
                j += 1
            if j > i:
                keep = rng.randint(i, j)
                for t in range(i, j + 1):
                    if t != keep:
                        g[t] = -g[t]
            i = j + 1
        else:
            i += 1
    while True:
        out = tuple(g)
        if math.isfinite(join_feasible(inst, out, validate=False).completion_time):
            return out
        sol = join(inst, out, w1, w2, validate=False)
        bad = {c for k in sol.violating for c in sol.operations[k].chain}
        if not bad:
            bad = {-rng.choice([x for x in g if x < 0])}
        g = [abs(x) if abs(x) in bad else x for x in g]
