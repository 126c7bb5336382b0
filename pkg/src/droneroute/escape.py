"""Buffer-based escape from a local optimum."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .chromosome import FeasibilityClass, Genes
from .local_search import ALL_MOVES, MoveContext, random_move

Evaluate = Callable[[Genes], Tuple[float, FeasibilityClass]]


@dataclass
class EscapeReport:
    improved: List[Tuple[Genes, float]]
    best_cost: float
    # buffer size after every iteration; only kept when requested
    sizes: Optional[List[int]] = None
    best_trace: Optional[List[float]] = None


@dataclass
class EscapeBuffer:
    capacity: int = 40
    items: Dict[Genes, Tuple[float, FeasibilityClass]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, genes: Genes) -> bool:
        return genes in self.items

    def add(self, genes: Genes, cost: float, cls: FeasibilityClass) -> None:
        if len(self.items) >= self.capacity:
            worst = max(self.items, key=lambda g: self.items[g][0])
            del self.items[worst]
        self.items[genes] = (cost, cls)


def escape_local_optima(local: Genes, evaluate: Evaluate, ctx: MoveContext, rng: random.Random,
                        moves: Sequence[str] = ALL_MOVES, capacity: int = 40,
                        epsilon: float = 0.05, max_iter: int = 10000,
                        record: bool = False) -> EscapeReport:
    """Random single moves from a buffer of near-optimal chromosomes.

    A new chromosome joins the buffer when it beats the best one seen so far
    or lies within ``epsilon`` (relative) of it; a full buffer drops its most
    expensive member.  Returns the feasible buffer members cheaper than
    ``local``.
    """
    local = tuple(local)
    c_local, cls_local = evaluate(local)
    buf = EscapeBuffer(capacity)
    buf.add(local, c_local, cls_local)
    best = c_local
    keys: List[Genes] = [local]
    sizes = [] if record else None
    trace = [] if record else None
    moves = list(moves)
    for _ in range(max_iter):
        if len(keys) != len(buf):
            keys = list(buf.items)
        w = keys[rng.randrange(len(keys))]
        cand = random_move(rng.choice(moves), w, ctx, rng)
        if cand is not None and cand not in buf:
            c, cls = evaluate(cand)
            if c < best:
                buf.add(cand, c, cls)
                best = c
                keys = list(buf.items)
            elif (c - best) / best < epsilon:
                buf.add(cand, c, cls)
                keys = list(buf.items)
        if record:
            sizes.append(len(buf))
            trace.append(best)
    # mirrored twins can decode a few ulps apart; only report real improvements
    bar = c_local - 1e-9 * abs(c_local)
    improved = [(g, c) for g, (c, cls) in buf.items.items()
                if cls is FeasibilityClass.FEASIBLE and c < bar]
    improved.sort(key=lambda t: t[1])
    return EscapeReport(improved, best, sizes, trace)
