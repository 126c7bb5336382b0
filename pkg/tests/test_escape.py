import random

from droneroute.chromosome import FeasibilityClass as FC
from droneroute.escape import EscapeBuffer, escape_local_optima
from droneroute.join import Evaluator
from droneroute.local_search import MoveContext
from droneroute.oracles import exhaustive_tspd

from conftest import random_genes, random_instance


def test_buffer_evicts_most_expensive():
    buf = EscapeBuffer(2)
    buf.add((1,), 5.0, FC.FEASIBLE)
    buf.add((2,), 9.0, FC.FEASIBLE)
    buf.add((3,), 7.0, FC.FEASIBLE)
    assert set(buf.items) == {(1,), (3,)}


def test_escape_properties_random_trials():
    for trial in range(10):
        rng = random.Random(trial)
        n = rng.randint(5, 8)
        inst = random_instance(n, 700 + trial)
        ev = Evaluator(inst)
        ctx = MoveContext.build(inst)
        evaluate = lambda g: ev(g, 2.0, 2.0)  # noqa: E731
        start = random_genes(n, rng)
        c0 = ev.cost(start, 2.0, 2.0)
        rep = escape_local_optima(start, evaluate, ctx, rng, max_iter=2000, record=True)
        assert max(rep.sizes) <= 40
        for g, c in rep.improved:
            assert c < c0 and ev(g, 2.0, 2.0) == (c, FC.FEASIBLE)
        opt = exhaustive_tspd(inst)
        rep = escape_local_optima(opt.genes, evaluate, ctx, rng, max_iter=2000)
        assert rep.improved == []


def test_first_improvement_is_returned(example):
    ev = Evaluator(example)
    ctx = MoveContext.build(example)
    rep = escape_local_optima((1, 2, 3, 4, 5), lambda g: ev(g, 2.0, 2.0), ctx, random.Random(0),
                              max_iter=500)
    assert rep.improved and all(c < 39 for _, c in rep.improved)
    assert rep.best_cost == rep.improved[0][1]
