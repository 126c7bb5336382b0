import math
import random

import numpy as np
import pytest

from droneroute._kernel import decode_cost
from droneroute.chromosome import ChromosomeError, FeasibilityClass
from droneroute.instance import AssumptionProfile
from droneroute.join import Evaluator, evaluate, join, join_feasible
from droneroute.oracles import enumerate_rendezvous

from conftest import random_genes, random_instance

END = 6  # return depot index of the five-customer example


def ops(sol):
    return [(o.launch, o.chain, o.land) for o in sol.operations]


def test_worked_example_is_25(example):
    sol = join(example, [-1, 2, -3, 4, -5])
    assert sol.completion_time == 25
    assert ops(sol) == [(0, (1,), 2), (2, (3,), 4), (4, (5,), END)]
    assert sol.truck_route == [0, 2, 4, END]


def test_truck_only_is_tour_time(example):
    sol = join_feasible(example, [1, 2, 3, 4, 5])
    assert sol.completion_time == 39 and sol.operations == []


def test_single_customer_shapes():
    inst = random_instance(1, 3)
    sol = join_feasible(inst, [-1])
    # the return depot shares the start location, so waiting at 0 is the same operation
    assert [(o.launch, o.chain) for o in sol.operations] == [(0, (1,))]
    assert sol.operations[0].land in (0, 2)
    assert sol.completion_time == pytest.approx(max(inst.T[0][2], inst.D[0][1] + inst.D[1][2]))
    assert join_feasible(inst, [1]).completion_time == pytest.approx(inst.T[0][1] + inst.T[1][2])


def test_ten_customer_chromosome_structure():
    inst = random_instance(10, 4)
    g = (4, -2, 6, 9, -5, 3, -8, 1, 10, -7)
    sol = join_feasible(inst, g)
    assert [o.chain for o in sol.operations] == [(2,), (5,), (8,), (7,)]
    route = sol.truck_route
    for o in sol.operations:
        assert route.index(o.launch) <= route.index(o.land)
    assert sol.completion_time == pytest.approx(enumerate_rendezvous(inst, g).optimum)


def test_multiplier_below_one_rejected(example):
    with pytest.raises(ValueError):
        join(example, [1, 2, 3, 4, 5], w1=0.5)


def test_feasible_decode_refuses_adjacent_drones(example):
    with pytest.raises(ChromosomeError):
        join_feasible(example, [-1, -2, 3, 4, 5])


def test_invalid_chromosome_rejected(example):
    with pytest.raises(ChromosomeError):
        join(example, [1, 1, 3, 4, 5])


def test_penalized_chain_costs_grow_with_w1(example):
    g = [-1, -2, 3, 4, 5]
    lo = join(example, g, w1=1.0).completion_time
    hi = join(example, g, w1=5.0).completion_time
    assert math.isfinite(lo) and hi >= lo


def test_range_violation_flags_type2():
    inst = random_instance(4, 8, profile=AssumptionProfile.tspd(endurance=1.0))
    sol, cls = evaluate(inst, (-1, 2, 3, 4))
    assert cls is FeasibilityClass.TYPE2 and sol.range_violation
    assert join_feasible(inst, (-1, 2, 3, 4)).completion_time == math.inf


@pytest.mark.parametrize("fstsp", [False, True])
@pytest.mark.parametrize("endurance", [math.inf, 60.0])
def test_join_matches_enumeration(fstsp, endurance):
    rng = random.Random(hash((fstsp, endurance)) & 0xFFFF)
    prof = AssumptionProfile.fstsp(endurance) if fstsp else AssumptionProfile.tspd(endurance)
    for k in range(25):
        n = rng.randint(4, 8)
        inst = random_instance(n, 1000 + k, alpha=rng.choice([1.0, 2.0, 3.0]), profile=prof)
        g = random_genes(n, rng)
        a = join_feasible(inst, g).completion_time
        b = enumerate_rendezvous(inst, g).optimum
        assert a == pytest.approx(b, rel=1e-9, abs=1e-9) or (a == b == math.inf)


@pytest.mark.parametrize("fstsp", [False, True])
def test_kernel_matches_reference_decoder(fstsp):
    rng = random.Random(7)
    for k in range(60):
        n = rng.randint(1, 12)
        e = rng.choice([math.inf, 40.0, 80.0])
        prof = AssumptionProfile.fstsp(e) if fstsp else AssumptionProfile.tspd(e)
        inst = random_instance(n, 2000 + k, profile=prof)
        g = random_genes(n, rng, allow_adjacent=True)
        w1, w2 = rng.uniform(1, 4), rng.uniform(1, 4)
        T = np.asarray(inst.truck_time, dtype=float)
        D = np.asarray(inst.drone_time, dtype=float)
        args = (np.array(g, dtype=np.int64), T, D, fstsp, e, prof.launch_setup, prof.retrieval)
        ref = join(inst, g, w1, w2).completion_time
        assert decode_cost(*args, w1, w2, True) == pytest.approx(ref, rel=1e-12)
        if not any(a < 0 and b < 0 for a, b in zip(g, g[1:])):
            ref = join_feasible(inst, g).completion_time
            assert decode_cost(*args, 1.0, 1.0, False) == pytest.approx(ref, rel=1e-12)


def test_evaluator_caches_and_classifies():
    inst = random_instance(6, 5, profile=AssumptionProfile.tspd(30.0))
    ev = Evaluator(inst)
    rng = random.Random(1)
    for _ in range(40):
        g = random_genes(6, rng, allow_adjacent=True)
        sol, cls = evaluate(inst, g, 2.0, 3.0)
        c, cls2 = ev(g, 2.0, 3.0)
        assert cls2 is cls
        assert c == pytest.approx(sol.completion_time, rel=1e-12)
    before = ev.decodes
    ev(g, 2.0, 3.0)
    assert ev.decodes == before
