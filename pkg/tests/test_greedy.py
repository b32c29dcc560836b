import numpy as np
import pytest

from factories import random_problem, three_tier_toy
from v2xplace import (
    ComputeNode,
    DelayCheck,
    DelayMatrix,
    Infeasible,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    Tier,
    UniqueServiceType,
    builtin_scenario,
    check_feasibility,
    instantiate,
    solve_bruteforce,
    solve_exact,
    solve_greedy,
)

ONE = ResourceVector(1, 1, 1)


def test_three_tier_toy_matches_optimum():
    problem = three_tier_toy()
    ref, _ = solve_bruteforce(problem)
    placement, _ = solve_greedy(problem)
    assert placement.assignment == ref.assignment == {1: 1, 2: 2, 3: 3}
    assert placement.objective_ms == 135.0


def test_single_admissible_node_one_check():
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], [ComputeNode(0, "RSU", ONE)], 1, DelayMatrix([[3.0]]))
    placement, stats = solve_greedy(problem)
    assert placement.assignment == {0: 0}
    assert stats.nodes_explored == 1


def test_exact_fit_is_accepted():
    # an 8-core node takes an 8-core instance
    media = UniqueServiceType("m", "MEDIA", 150.0, ResourceVector(8, 14, 40))
    problem = PlacementProblem(
        [media], [ServiceInstance(0, "m")], [ComputeNode(0, "ENB", ResourceVector(8, 16, 240))], 1, DelayMatrix([[30.0]])
    )
    assert solve_greedy(problem)[0].assignment == {0: 0}


def test_stuck_instance_is_reported():
    t = UniqueServiceType("a", "CAM", 20.0, ResourceVector(2, 2, 2), redundancy_requirement=2)
    nodes = [ComputeNode(0, "RSU", ResourceVector(2, 2, 2)), ComputeNode(1, "ENB", ResourceVector(2, 2, 2))]
    problem = PlacementProblem(
        [t], [ServiceInstance(5, "a"), ServiceInstance(6, "a")], nodes, 1, DelayMatrix([[3.0, 30.0]])
    )
    with pytest.raises(Infeasible) as info:
        solve_greedy(problem)
    assert info.value.instance == 6


def test_mean_mode_can_break_worst_case_constraint():
    # mean 15 ms passes a 20 ms mean check, worst vehicle at 28 ms does not
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    nodes = [ComputeNode(0, "ENB", ONE), ComputeNode(1, "CORE", ONE)]
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], nodes, 2, DelayMatrix([[2.0, 60.0], [28.0, 70.0]]))
    placement, _ = solve_greedy(problem, DelayCheck.MEAN)
    assert placement.assignment == {0: 0}
    assert check_feasibility(problem, placement).kinds() == {"delay"}
    with pytest.raises(Infeasible):
        solve_greedy(problem, "MAX")


def test_node_ties_break_to_lowest_node_id():
    t = UniqueServiceType("a", "DENM", 50.0, ONE)
    nodes = [ComputeNode(3, "RSU", ONE), ComputeNode(1, "RSU", ONE)]
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], nodes, 1, DelayMatrix([[4.0, 4.0]]))
    assert solve_greedy(problem)[0].assignment == {0: 1}


def test_dominated_by_exact_and_feasible_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(150):
        problem = random_problem(rng)
        try:
            greedy, stats = solve_greedy(problem)
        except Infeasible:
            continue
        assert check_feasibility(problem, greedy).feasible
        assert stats.nodes_explored <= 2 * len(problem.nodes) * len(problem.instances)
        optimum, _ = solve_exact(problem)
        assert greedy.objective_ms >= optimum.objective_ms


def test_deterministic():
    problem = instantiate(builtin_scenario("LARGE", 220, 5))
    a, sa = solve_greedy(problem)
    b, sb = solve_greedy(problem)
    assert a == b and sa.nodes_explored == sb.nodes_explored


def test_cam_lands_on_rsu_in_large_scenario():
    problem = instantiate(builtin_scenario("LARGE", 300, 1))
    placement, _ = solve_greedy(problem)
    tiers = {c.id: c.tier for c in problem.nodes}
    for inst in problem.instances_of("CAM"):
        assert tiers[placement.assignment[inst.id]] is Tier.RSU
