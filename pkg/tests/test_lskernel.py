import random

import numpy as np
import pytest

from droneroute import _lskernel as K
from droneroute.chromosome import FeasibilityClass
from droneroute.instance import AssumptionProfile
from droneroute.join import Evaluator
from droneroute.local_search import (ALL_MOVES, CompiledSearch, MOVE_CODES, MoveContext,
                                     l1_apply, l2_apply, l3_apply, l4_apply, l5_apply, l6_apply,
                                     l7_apply, or_opt_apply, relocate_apply, two_opt_apply)

from conftest import random_genes, random_instance


def _arr(g):
    return np.array(g, dtype=np.int64)


def _pos(g):
    p = np.zeros(len(g) + 2, np.int64)
    for i, x in enumerate(g):
        p[abs(x)] = i
    return p


def _run(fn, g, *args):
    out = np.empty(len(g), np.int64)
    ok = fn(_arr(g), *args, out)
    return tuple(int(x) for x in out) if ok else None


def _route_arcs(g, rng):
    route = [0] + [x for x in g if x > 0] + [len(g) + 1]
    if len(route) < 4:
        return None
    a, b = sorted(rng.sample(range(len(route) - 1), 2))
    if b - a < 2:
        return None
    return (route[a], route[a + 1]), (route[b], route[b + 1]), route[a + 1], route[b]


@pytest.mark.parametrize("trial", range(40))
def test_apply_functions_match_reference(trial):
    rng = random.Random(trial)
    n = rng.randint(2, 12)
    elig = [rng.random() < 0.8 for _ in range(n + 2)]
    e = np.array(elig)
    for _ in range(200):
        g = random_genes(n, rng, allow_adjacent=True)
        p = _pos(g)
        a, b = rng.randint(1, n), rng.randint(1, n)
        after = rng.randint(0, n)
        assert _run(K._a_l1, g, p, a, e) == l1_apply(g, a, elig)
        assert _run(K._a_l2, g, p, a, after) == l2_apply(g, a, after)
        assert _run(K._a_l3, g, p, a, b, e) == l3_apply(g, a, b, elig)
        assert _run(K._a_l5, g, p, a, b) == l5_apply(g, a, b)
        conv = rng.choice((a, b))
        assert _run(K._a_l6, g, p, a, b, conv) == l6_apply(g, a, b, conv)
        before = rng.random() < 0.5
        assert _run(K._a_l7, g, p, a, b, before) == l7_apply(g, a, b, before)
        i, j = rng.randrange(n), rng.randrange(n)
        assert _run(K._a_two_opt, g, i, j) == two_opt_apply(g, i, j)
        length = rng.randint(1, 2)
        assert _run(K._a_or_opt, g, p, i, length, after) == or_opt_apply(g, i, length, after)
        assert _run(K._a_relocate, g, p, a, after, e) == relocate_apply(g, a, after, elig)
        arcs = _route_arcs(g, rng)
        if arcs:
            arc1, arc2, v1, u2 = arcs
            assert _run(K._a_l4, g, p, v1, u2) == l4_apply(g, arc1, arc2)


def _kernel_ctx(inst, frac=0.3):
    ctx = MoveContext.build(inst, frac)
    return ctx, CompiledSearch(ctx)


@pytest.mark.parametrize("move", ALL_MOVES)
def test_sampled_moves_are_valid_permutations(move):
    inst = random_instance(9, 3, profile=AssumptionProfile.fstsp(80.0), eligible_frac=0.7)
    ctx, cs = _kernel_ctx(inst)
    rng = random.Random(0)
    K.seed(1)
    hits = 0
    for _ in range(500):
        g = random_genes(9, rng)
        out = np.empty(9, np.int64)
        if not K.sample_move(MOVE_CODES[move], _arr(g), cs.near_t, cs.len_t, cs.near_d,
                             cs.len_d, cs.elig, out):
            continue
        hits += 1
        new = tuple(int(x) for x in out)
        assert sorted(abs(x) for x in new) == list(range(1, 10))
        assert new != g or move in ("TwoOpt",)
        # a customer only switches to the drone if it is eligible
        assert all(ctx.eligible[-x] for x in new if x < 0 and -x in g)
    assert hits > 0


def test_kernel_evaluate_matches_evaluator():
    rng = random.Random(5)
    for seed in range(6):
        inst = random_instance(8, seed, profile=AssumptionProfile.fstsp(60.0))
        ev = Evaluator(inst, compiled=False)
        cs = CompiledSearch(MoveContext.build(inst))
        classes = [FeasibilityClass.FEASIBLE, FeasibilityClass.TYPE1, FeasibilityClass.TYPE2]
        for _ in range(100):
            g = random_genes(8, rng, allow_adjacent=True)
            c, cls = K.evaluate(_arr(g), cs.T, cs.D, *cs.prof, 3.0, 1.5)
            ref, rcls = ev(g, 3.0, 1.5)
            assert classes[cls] is rcls
            assert c == pytest.approx(ref, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_compiled_search_never_worse_and_reports_feasible(seed):
    inst = random_instance(10, seed, profile=AssumptionProfile.fstsp(50.0), eligible_frac=0.8)
    ev = Evaluator(inst)
    cs = CompiledSearch(MoveContext.build(inst))
    rng = random.Random(seed)
    for _ in range(30):
        g = random_genes(10, rng, allow_adjacent=True)
        start = ev.cost(g, 2.0, 2.0)
        out, c, feas = cs(g, 2.0, 2.0, rng)
        assert c <= start
        assert c == pytest.approx(ev.cost(out, 2.0, 2.0))
        if feas is not None:
            fc, cls = ev(feas[0], 2.0, 2.0)
            assert cls is FeasibilityClass.FEASIBLE
            assert feas[1] == pytest.approx(fc)


def test_compiled_search_is_seeded():
    inst = random_instance(10, 1)
    cs = CompiledSearch(MoveContext.build(inst))
    g = random_genes(10, random.Random(2))
    assert cs(g, 2.0, 2.0, random.Random(7)) == cs(g, 2.0, 2.0, random.Random(7))
