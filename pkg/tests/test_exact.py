import numpy as np
import pytest

from factories import random_problem, three_tier_toy
from v2xplace import (
    ComputeNode,
    DelayMatrix,
    Infeasible,
    PlacementProblem,
    ResourceVector,
    SearchBudgetExceeded,
    SearchSpaceTooLarge,
    ServiceInstance,
    UniqueServiceType,
    builtin_scenario,
    check_feasibility,
    evaluate_objective,
    instantiate,
    solve_bruteforce,
    solve_exact,
)

ONE = ResourceVector(1, 1, 1)


def test_three_tier_toy_optimum():
    problem = three_tier_toy()
    placement, stats = solve_exact(problem)
    assert placement.assignment == {1: 1, 2: 2, 3: 3}
    assert placement.objective_ms == 135.0
    assert stats.proven_optimal and stats.nodes_explored >= 1


def test_single_forced_assignment():
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], [ComputeNode(7, "RSU", ONE)], 3, DelayMatrix([[2.0], [4.0], [6.0]]))
    placement, _ = solve_exact(problem)
    assert placement.assignment == {0: 7}
    assert placement.objective_ms == 4.0


def test_bruteforce_counts_every_assignment():
    types = [UniqueServiceType("a", "CAM", 50.0, ONE), UniqueServiceType("b", "DENM", 50.0, ONE)]
    nodes = [ComputeNode(0, "RSU", ResourceVector(2, 2, 2)), ComputeNode(1, "RSU", ResourceVector(2, 2, 2))]
    problem = PlacementProblem(types, [ServiceInstance(0, "a"), ServiceInstance(1, "b")], nodes, 1, DelayMatrix([[1.0, 2.0]]))
    placement, stats = solve_bruteforce(problem)
    assert stats.nodes_explored == 4
    assert placement.assignment == {0: 0, 1: 0}


def test_bruteforce_ties_go_to_lexicographically_smallest():
    types = [UniqueServiceType("a", "CAM", 50.0, ONE), UniqueServiceType("b", "DENM", 50.0, ONE)]
    nodes = [ComputeNode(0, "RSU", ONE), ComputeNode(1, "RSU", ONE)]
    problem = PlacementProblem(types, [ServiceInstance(0, "a"), ServiceInstance(1, "b")], nodes, 1, DelayMatrix([[3.0, 3.0]]))
    assert solve_bruteforce(problem)[0].vector(problem) == (0, 1)
    assert solve_exact(problem)[0].vector(problem) == (0, 1)


def test_infeasible_when_no_node_meets_threshold():
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], [ComputeNode(0, "CORE", ONE)], 2, DelayMatrix([[5.0], [25.0]]))
    with pytest.raises(Infeasible):
        solve_bruteforce(problem)
    with pytest.raises(Infeasible):
        solve_exact(problem)


def test_bruteforce_guard():
    problem = instantiate(builtin_scenario("SMALL", 100, 0))
    with pytest.raises(SearchSpaceTooLarge):
        solve_bruteforce(problem)


def test_node_budget_returns_unproven_incumbent_or_raises():
    problem = instantiate(builtin_scenario("LARGE", 140, 7))
    placement, stats = solve_exact(problem, node_budget=20_000)
    assert not stats.proven_optimal
    assert not check_feasibility(problem, placement)
    with pytest.raises(SearchBudgetExceeded):
        solve_exact(problem, node_budget=1)


def test_empty_problem():
    problem = PlacementProblem([], [], [ComputeNode(0, "RSU", ONE)], 1, DelayMatrix([[1.0]]))
    placement, stats = solve_exact(problem)
    assert placement.assignment == {} and placement.objective_ms == 0.0 and stats.nodes_explored == 1


def test_agrees_with_bruteforce_on_random_instances():
    rng = np.random.default_rng(2024)
    n_feasible = 0
    for _ in range(150):
        problem = random_problem(rng)
        try:
            ref, ref_stats = solve_bruteforce(problem)
        except Infeasible:
            with pytest.raises(Infeasible):
                solve_exact(problem)
            continue
        n_feasible += 1
        got, stats = solve_exact(problem)
        assert got.objective_ms == ref.objective_ms
        assert got.assignment == ref.assignment  # same tie-breaking
        assert not check_feasibility(problem, got)
        assert got.objective_ms == evaluate_objective(problem, got)
        assert stats.nodes_explored <= ref_stats.nodes_explored
    assert n_feasible > 50


def test_exact_output_feasible_on_builtin():
    for n in (20, 60, 100):
        problem = instantiate(builtin_scenario("SMALL", n, 3))
        placement, stats = solve_exact(problem)
        assert stats.proven_optimal
        assert check_feasibility(problem, placement).feasible
