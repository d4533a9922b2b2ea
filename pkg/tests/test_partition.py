import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import min_difference, random_instance
from radarshare.interference import CoherentTerms, coherent_terms, interference_coherent, interference_coherent_partition
from radarshare.partition import (PartitionInstance, PartitionSolution, best_partition, instance_from_terms,
                                  partition_to_phases, solve_bruteforce, solve_cga, solve_greedy, to_phase_partition)

values_strategy = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=10)


def check_solution(sol, values):
    assert sorted(sol.set1 + sol.set2) == list(range(len(values)))
    diff = abs(sum(values[i] for i in sol.set1) - sum(values[i] for i in sol.set2))
    assert abs(diff - sol.difference) <= 1e-12 * max(1.0, sum(values))


def test_worked_instance():
    values = (4, 5, 6, 7, 8)
    sol = solve_cga(PartitionInstance(values))
    assert sol.difference == 0.0
    assert sorted(values[i] for i in sol.set1) in ([7, 8], [4, 5, 6])
    assert sol.terminated_by in ("perfect", "prune_condition_2")
    check_solution(sol, values)


def test_greedy_trace():
    values = (4, 5, 6, 7, 8)
    sol = solve_greedy(PartitionInstance(values))
    assert sorted(values[i] for i in sol.set1) == [4, 5, 8]
    assert sorted(values[i] for i in sol.set2) == [6, 7]
    assert sol.difference == 4.0


@pytest.mark.parametrize("values, expected", [
    ((4, 5, 6, 7, 8), 0.0), ((10, 1), 9.0), ((3, 1, 1, 1), 0.0), ((7.5,), 7.5), ((1, 1), 0.0)])
def test_small_instances(values, expected):
    for solver in (solve_cga, solve_bruteforce):
        sol = solver(PartitionInstance(values))
        assert sol.difference == expected
        check_solution(sol, values)


def test_greedy_equal_values_even_count():
    assert solve_greedy(PartitionInstance((2.5,) * 6)).difference == 0.0
    assert solve_greedy(PartitionInstance((1, 1))).difference == 0.0


def test_invalid_instances():
    for bad in ((), (1.0, -1.0), (math.inf,), (math.nan,)):
        with pytest.raises(ValueError):
            PartitionInstance(bad)
    with pytest.raises(ValueError):
        PartitionInstance((1.0,), epsilon=-1.0)
    with pytest.raises(ValueError):
        solve_bruteforce(PartitionInstance((1.0,) * 25))


def test_default_epsilon_is_relative():
    assert PartitionInstance((1.0, 2.0, 3.0)).epsilon == pytest.approx(6e-9)


def test_cga_exact_against_bruteforce(rng):
    for _ in range(300):
        n = int(rng.integers(1, 13))
        values = tuple(rng.uniform(0, 100, size=n))
        cga = solve_cga(PartitionInstance(values, 0.0))
        brute = solve_bruteforce(PartitionInstance(values, 0.0))
        assert cga.difference == brute.difference
        check_solution(cga, values)
        check_solution(brute, values)
        assert 0 in brute.set1


def test_cga_exact_on_integer_instances(rng):
    for _ in range(200):
        n = int(rng.integers(1, 11))
        values = tuple(float(v) for v in rng.integers(0, 30, size=n))
        assert solve_cga(PartitionInstance(values, 0.0)).difference == min_difference(values)


@settings(max_examples=200, deadline=None)
@given(values_strategy)
def test_cga_properties(values):
    values = tuple(values)
    inst = PartitionInstance(values, 0.0)
    cga = solve_cga(inst)
    greedy = solve_greedy(inst)
    full = solve_cga(inst, prune=False)
    check_solution(cga, values)
    rounding = 1e-12 * max(1.0, sum(values))
    assert cga.difference <= greedy.difference + rounding
    # equivalent splits may differ by summation rounding only
    assert abs(full.difference - cga.difference) <= rounding
    assert cga.nodes_explored <= full.nodes_explored <= 2 ** (len(values) + 1)
    assert cga.nodes_explored <= 2 ** len(values) or len(values) == 1
    # the largest value is placed in set 1 at the root
    largest = max(range(len(values)), key=lambda i: (values[i], -i))
    assert largest in cga.set1 or values[largest] == 0


def test_default_epsilon_stops_early():
    values = tuple(float(v) for v in range(1, 13))
    pruned = solve_cga(PartitionInstance(values))
    full = solve_cga(PartitionInstance(values), prune=False)
    assert pruned.difference == full.difference == 0.0
    assert pruned.nodes_explored < full.nodes_explored


def test_swapped_solution():
    sol = PartitionSolution((0, 2), (1,), 1.0, 3, "perfect")
    assert sol.swapped().set1 == (1,) and sol.swapped().set2 == (0, 2)


def test_best_partition_helper():
    assert best_partition([4, 5, 6, 7, 8]).difference == 0.0


def test_phases_for_aligned_relay(rng):
    terms = CoherentTerms(2.0 * np.exp(0.4j), {0: 1.0 * np.exp(0.4j), 1: 3.0 * np.exp(0.4j)})
    phases = partition_to_phases(PartitionSolution((0, 1), (2,), 0.0), terms)
    assert phases.phi[0] == pytest.approx(0.0, abs=1e-12)
    assert phases.phi[1] == pytest.approx(math.pi, abs=1e-12)
    with pytest.raises(ValueError):
        partition_to_phases(PartitionSolution((1,), (0, 2), 0.0), terms)


def test_solution_to_phases_consistency(rng):
    for _ in range(200):
        ch, cfg, subset, alloc = random_instance(rng)
        terms = coherent_terms(ch, cfg, subset, alloc)
        sol = solve_cga(instance_from_terms(terms))
        if 0 not in sol.set1:
            sol = sol.swapped()
        part = to_phase_partition(sol, terms)
        direct = interference_coherent(terms, partition_to_phases(sol, terms))
        scale = (terms.abs_a + sum(terms.abs_b(k) for k in subset)) ** 2
        assert abs(direct - interference_coherent_partition(terms, part)) <= 1e-9 * max(part.interference,
                                                                                         1e-3 * scale)
        assert part.interference == pytest.approx(sol.difference ** 2, rel=1e-9, abs=1e-12 * scale)
