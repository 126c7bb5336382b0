"""Hybrid genetic algorithm driver."""

from __future__ import annotations

import dataclasses
import json
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .chromosome import FeasibilityClass, Genes
from .escape import escape_local_optima
from .instance import Instance
from .join import DecodedSolution, Evaluator, join_feasible
from .local_search import ALL_MOVES, CLASSIC_MOVES, CompiledSearch, MoveContext, local_search
from .operators import crossover, mutate, repair
from .population import PenaltyController
from .seeding import fill_population, initial_population

F = FeasibilityClass.FEASIBLE


@dataclass
class SolverConfig:
    mu: int = 15
    lam: int = 25
    zeta: float = 0.05
    eta_I: float = 1.1
    eta_D: float = 0.9
    n_elite_frac: float = 0.2
    n_best_frac: float = 0.3
    xi_ref: float = 0.2
    p_repair: float = 0.5
    p_mutation: float = 0.1
    n_close_frac: float = 0.3
    n_close_min: int = 1
    it_NI: int = 2500
    it_DIV: int = 100
    it_LOC: int = 1000
    k_tournament: int = 2
    w1_init: float = 2.0
    w2_init: float = 2.0
    w_min: float = 1.0
    w_max: float = 64.0
    sign_mutation_p: float = 0.1
    max_ls_passes: int = 20
    ls_samples: Optional[int] = None
    use_l_moves: bool = True
    compiled: bool = True
    escape: bool = False
    escape_capacity: int = 40
    escape_epsilon: float = 0.05
    escape_max_iter: int = 10000
    time_limit: Optional[float] = None
    max_iterations: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("zeta", "n_elite_frac", "n_best_frac", "xi_ref", "p_repair",
                     "p_mutation", "n_close_frac"):
            v = getattr(self, name)
            if not 0 < v <= 1 and not (name in ("p_repair", "p_mutation") and v == 0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if not self.eta_I > 1 > self.eta_D > 0:
            raise ValueError("need eta_I > 1 > eta_D > 0")
        if self.it_LOC < self.it_DIV:
            raise ValueError("it_LOC must be at least it_DIV")
        if self.mu < 1 or self.lam < 1 or self.k_tournament < 1:
            raise ValueError("mu, lambda and k_tournament must be positive")
        if not 1 <= self.w_min <= self.w_max:
            raise ValueError("need 1 <= w_min <= w_max")

    @property
    def moves(self) -> Sequence[str]:
        return ALL_MOVES if self.use_l_moves else CLASSIC_MOVES

    @property
    def n_best(self) -> int:
        return math.ceil(self.n_best_frac * self.mu)

    def to_dict(self) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SolverConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SolverConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)


@dataclass
class SolverResult:
    genes: Genes
    cost: float
    solution: DecodedSolution
    iterations: int
    elapsed: float
    trace: List[Dict[str, Any]] = field(default_factory=list)
    decodes: int = 0
    stopped_by: str = "it_NI"


def run(inst: Instance, cfg: Optional[SolverConfig] = None,
        tour: Optional[Sequence[int]] = None) -> SolverResult:
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    rng = random.Random(cfg.seed)
    ev = Evaluator(inst)
    pen = PenaltyController(cfg.w1_init, cfg.w2_init, cfg.xi_ref, cfg.zeta, cfg.eta_I,
                            cfg.eta_D, cfg.w_min, cfg.w_max)

    def evaluate(g: Genes):
        return ev(g, pen.w1, pen.w2)

    found: List[Any] = []

    def cost(g: Genes) -> float:
        # feasible chromosomes seen while searching from an infeasible start
        # would otherwise be lost when the penalized start is cheaper
        c, cls = ev(g, pen.w1, pen.w2)
        if cls is F and c < (found[0][1] if found else pop.best.cost):
            found[:] = [(g, c)]
        return c

    ctx = MoveContext.build(inst, cfg.n_close_frac, cfg.n_close_min)
    elig = inst.eligible
    pop = initial_population(inst, cfg.mu, cfg.lam, evaluate, rng, tour, cfg.n_elite_frac, pen)
    if pop.best is None:
        # the all-truck chromosome is always feasible
        g = tuple(sorted(abs(x) for x in pop.members()[0].genes)) if len(pop) else tuple(range(1, inst.n + 1))
        pop.add(g, *evaluate(g))
    moves = cfg.moves
    fast = CompiledSearch(ctx, moves, cfg.ls_samples, cfg.max_ls_passes) if cfg.compiled else None
    trace: List[Dict[str, Any]] = []
    it = no_improve = 0
    stopped = "it_NI"
    while no_improve < cfg.it_NI:
        if cfg.max_iterations is not None and it >= cfg.max_iterations:
            stopped = "max_iterations"
            break
        if cfg.time_limit is not None and time.perf_counter() - t0 > cfg.time_limit:
            stopped = "time_limit"
            break
        it += 1
        p1 = pop.tournament(rng, cfg.k_tournament)
        p2 = pop.tournament(rng, cfg.k_tournament)
        child = crossover(p1.genes, p2.genes, rng, elig)
        if rng.random() < cfg.p_mutation:
            child = mutate(child, rng, elig, cfg.sign_mutation_p)
        if fast is not None:
            child, _, seen = fast(child, pen.w1, pen.w2, rng)
            if seen is not None and seen[1] < pop.best.cost:
                found[:] = [seen]
        else:
            child, _ = local_search(child, cost, ctx, rng, moves, cfg.ls_samples, cfg.max_ls_passes)
        c, cls = evaluate(child)
        pen.record(cls)
        if cls is not F and rng.random() < cfg.p_repair:
            child = repair(child, inst, rng, pen.w1, pen.w2)
            c, cls = evaluate(child)
        improved = pop.add(child, c, cls)
        if found:
            g, cg = found.pop()
            if g != child and pop.add(g, cg, F):
                improved = True
                if pop.full(F):
                    pop.survivors(F)
        if pop.full(cls):
            if cls is not F:
                for m in pop.subpops[cls]:
                    m.cost = cost(m.genes)
            pop.survivors(cls)
        pen.adjust()
        no_improve = 0 if improved else no_improve + 1
        if no_improve and no_improve % cfg.it_DIV == 0:
            pop.truncate(cfg.n_best)
            # refill from the partitioned tour, as in the initial fill
            if fill_population(pop, pop.origin, evaluate, elig, rng):
                no_improve = 0
        if cfg.escape and no_improve and no_improve % cfg.it_LOC == 0:
            rep = escape_local_optima(pop.best.genes, evaluate, ctx, rng, moves,
                                      cfg.escape_capacity, cfg.escape_epsilon, cfg.escape_max_iter)
            for g, cg in rep.improved:
                if pop.add(g, cg, F):
                    no_improve = 0
            if pop.full(F):
                pop.survivors(F)
        trace.append({"iteration": it, "best": pop.best.cost, "w1": pen.w1, "w2": pen.w2,
                      "sizes": pop.sizes(), "offspring": cls.value})
    best = pop.best
    sol = join_feasible(inst, best.genes)
    return SolverResult(best.genes, sol.completion_time, sol, it, time.perf_counter() - t0,
                        trace, ev.decodes, stopped)
