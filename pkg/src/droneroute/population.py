"""Feasibility-keyed subpopulations, diversity-aware fitness and penalty control."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Optional, Sequence

from .chromosome import FeasibilityClass, Genes, hamming

F, T1, T2 = FeasibilityClass.FEASIBLE, FeasibilityClass.TYPE1, FeasibilityClass.TYPE2


@dataclass
class Member:
    genes: Genes
    cost: float
    fitness: float = math.nan
    # insertion counter, used to break ties deterministically
    stamp: int = 0


def diversity(member: Member, others: Iterable[Member], n_closest: int = 2) -> float:
    """Mean Hamming distance to the ``n_closest`` nearest other members."""
    d = sorted(hamming(member.genes, o.genes) for o in others if o is not member)
    if not d:
        return 0.0
    d = d[:n_closest]
    return sum(d) / len(d)


def fitness_value(cost: float, delta: float, elite_frac: float = 0.2) -> float:
    return cost * (1.0 - elite_frac) ** delta


def fitness(member: Member, subpop: Sequence[Member], elite_frac: float = 0.2) -> float:
    member.fitness = fitness_value(member.cost, diversity(member, subpop), elite_frac)
    return member.fitness


def refresh_fitness(subpop: Sequence[Member], elite_frac: float = 0.2) -> None:
    m = len(subpop)
    dist = [[0.0] * m for _ in range(m)]
    for i in range(m):
        gi = subpop[i].genes
        for j in range(i + 1, m):
            dist[i][j] = dist[j][i] = hamming(gi, subpop[j].genes)
    for i, mem in enumerate(subpop):
        row = sorted(dist[i][:i] + dist[i][i + 1:])[:2]
        delta = sum(row) / len(row) if row else 0.0
        mem.fitness = fitness_value(mem.cost, delta, elite_frac)


def best_by_fitness(subpop: Sequence[Member], k: int) -> List[Member]:
    return sorted(subpop, key=lambda m: (m.fitness, m.stamp))[:k]


def select_survivors(subpop: List[Member], mu: int, elite_frac: float = 0.2) -> List[Member]:
    """Keep the ``mu`` fittest; the cheapest member always survives."""
    if len(subpop) <= mu:
        return list(subpop)
    refresh_fitness(subpop, elite_frac)
    keep = best_by_fitness(subpop, mu)
    cheapest = min(subpop, key=lambda m: (m.cost, m.stamp))
    if cheapest not in keep:
        keep[-1] = cheapest
    return keep


@dataclass
class PenaltyController:
    w1: float = 2.0
    w2: float = 2.0
    xi_ref: float = 0.2
    zeta: float = 0.05
    eta_inc: float = 1.1
    eta_dec: float = 0.9
    w_min: float = 1.0
    w_max: float = 64.0
    window: Deque[FeasibilityClass] = field(default_factory=lambda: deque(maxlen=100))

    def record(self, cls: FeasibilityClass) -> None:
        self.window.append(cls)

    def proportions(self):
        m = len(self.window)
        if not m:
            return None
        f = sum(c is F for c in self.window) / m
        t1 = sum(c is T1 for c in self.window) / m
        return f, t1, 1.0 - f - t1

    def adjust(self) -> None:
        props = self.proportions()
        if props is None:
            return
        xf, xm, xr = props
        if xf < self.xi_ref - self.zeta:
            if xr < xm:
                self.w1 = min(self.eta_inc * self.w1, self.w_max)
            else:
                self.w2 = min(self.eta_inc * self.w2, self.w_max)
        elif xf > self.xi_ref + self.zeta:
            if xr < xm:
                self.w2 = max(self.eta_dec * self.w2, self.w_min)
            else:
                self.w1 = max(self.eta_dec * self.w1, self.w_min)


class Population:
    """Subpopulations keyed by feasibility class plus the feasible incumbent."""

    def __init__(self, classes: Sequence[FeasibilityClass], mu: int, lam: int,
                 elite_frac: float = 0.2, penalties: Optional[PenaltyController] = None):
        self.classes = tuple(classes)
        self.subpops: Dict[FeasibilityClass, List[Member]] = {c: [] for c in self.classes}
        self.mu, self.lam = mu, lam
        self.elite_frac = elite_frac
        self.penalties = penalties or PenaltyController()
        self.best: Optional[Member] = None
        self.origin: Optional[Genes] = None  # chromosome the population was grown from
        self._stamp = 0

    def __len__(self) -> int:
        return sum(len(s) for s in self.subpops.values())

    def sizes(self) -> Dict[str, int]:
        return {c.value: len(s) for c, s in self.subpops.items()}

    def members(self) -> List[Member]:
        return [m for c in self.classes for m in self.subpops[c]]

    def add(self, genes: Genes, cost: float, cls: FeasibilityClass) -> bool:
        """Insert a member; returns True when it improves the feasible incumbent."""
        if cls not in self.subpops:
            raise ValueError(f"no subpopulation for {cls}")
        self._stamp += 1
        m = Member(tuple(genes), cost, stamp=self._stamp)
        self.subpops[cls].append(m)
        if cls is F and (self.best is None or cost < self.best.cost):
            self.best = m
            return True
        return False

    def full(self, cls: FeasibilityClass) -> bool:
        return len(self.subpops[cls]) >= self.mu + self.lam

    def survivors(self, cls: FeasibilityClass) -> None:
        self.subpops[cls] = select_survivors(self.subpops[cls], self.mu, self.elite_frac)

    def tournament(self, rng: random.Random, k: int = 2) -> Member:
        """Best of ``k`` uniform draws (with replacement) over all subpopulations."""
        flat = [(c, m) for c in self.classes for m in self.subpops[c]]
        if not flat:
            raise ValueError("empty population")
        best = None
        for _ in range(k):
            c, m = flat[rng.randrange(len(flat))]
            f = fitness(m, self.subpops[c], self.elite_frac)
            if best is None or f < best.fitness:
                best = m
        return best

    def truncate(self, keep: int) -> None:
        for c in self.classes:
            self.subpops[c] = select_survivors(self.subpops[c], keep, self.elite_frac)

    def underfull(self) -> List[FeasibilityClass]:
        return [c for c in self.classes if len(self.subpops[c]) < self.mu]
