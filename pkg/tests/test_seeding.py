import itertools
import math
import random

import pytest

from droneroute.chromosome import FeasibilityClass as FC
from droneroute.chromosome import has_adjacent_drones
from droneroute.instance import AssumptionProfile
from droneroute.join import Evaluator, join_feasible
from droneroute.seeding import (build_tsp_tour, exact_partition, initial_population, perturb,
                                read_tour, tour_cost)

from conftest import random_instance


def brute_truck(inst):
    return min(tour_cost(inst, p) for p in itertools.permutations(range(1, inst.n + 1)))


def test_example_tour_is_39(example):
    tour = build_tsp_tour(example, random.Random(0))
    assert tour_cost(example, tour) == 39 == brute_truck(example)


def test_tiny_tours():
    assert build_tsp_tour(random_instance(1, 0)) == [1]
    inst = random_instance(2, 0)
    assert tour_cost(inst, build_tsp_tour(inst)) == pytest.approx(brute_truck(inst))


def test_example_partition():
    from droneroute.instance import worked_example
    genes, cost = exact_partition(worked_example(), [1, 2, 3, 4, 5])
    assert genes == (-1, 2, -3, 4, -5) and cost == 25


def test_single_customer_partition():
    inst = random_instance(1, 4)
    genes, cost = exact_partition(inst, [1])
    best = min(join_feasible(inst, [1]).completion_time, join_feasible(inst, [-1]).completion_time)
    assert cost == pytest.approx(best)


@pytest.mark.parametrize("fstsp", [False, True])
def test_partition_is_optimal_over_signs(fstsp):
    rng = random.Random(8)
    for k in range(12):
        n = rng.randint(2, 8)
        e = rng.choice([math.inf, 50.0])
        prof = AssumptionProfile.fstsp(e) if fstsp else AssumptionProfile.tspd(e)
        inst = random_instance(n, 50 + k, profile=prof)
        tour = list(range(1, n + 1))
        rng.shuffle(tour)
        genes, cost = exact_partition(inst, tour)
        assert [abs(g) for g in genes] == tour
        assert join_feasible(inst, genes).completion_time == pytest.approx(cost)
        best = math.inf
        for signs in itertools.product((1, -1), repeat=n):
            g = [s * c for s, c in zip(signs, tour)]
            if not has_adjacent_drones(g):
                best = min(best, join_feasible(inst, g).completion_time)
        assert cost == pytest.approx(best)


def test_perturb_respects_eligibility():
    rng = random.Random(0)
    elig = [False, True, False, True, True, False]
    for _ in range(200):
        g = perturb((1, 2, 3, 4), elig, rng)
        assert sorted(map(abs, g)) == [1, 2, 3, 4]
        assert all(x > 0 or elig[-x] for x in g)


def test_read_tour(tmp_path):
    p = tmp_path / "tour.txt"
    p.write_text("3\n1\n2\n")
    assert read_tour(p, 3) == [3, 1, 2]
    p.write_text("3\n1\n")
    with pytest.raises(ValueError):
        read_tour(p, 3)


@pytest.mark.parametrize("endurance, classes", [
    (math.inf, {FC.FEASIBLE, FC.TYPE1}),
    (30.0, {FC.FEASIBLE, FC.TYPE1, FC.TYPE2}),
])
def test_initial_population_subpops(endurance, classes):
    inst = random_instance(10, 3, profile=AssumptionProfile.tspd(endurance))
    ev = Evaluator(inst)
    pop = initial_population(inst, 15, 25, lambda g: ev(g, 2.0, 2.0), random.Random(0))
    assert set(pop.classes) == classes
    # an improving perturbation is kept even when its class is already at mu
    assert all(15 <= len(pop.subpops[c]) < 40 for c in classes)
    for c in classes:
        for m in pop.subpops[c]:
            assert ev(m.genes, 2.0, 2.0)[1] is c
