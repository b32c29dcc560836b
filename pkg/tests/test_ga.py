import numpy as np
import pytest

from factories import random_problem
from v2xplace import (
    ComputeNode,
    DelayMatrix,
    GaConfig,
    Infeasible,
    Placement,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    UniqueServiceType,
    builtin_scenario,
    check_feasibility,
    instantiate,
    solve_exact,
    solve_ga,
)
from v2xplace.ga import PopulationScorer

ONE = ResourceVector(1, 1, 1)


def test_single_instance_single_node_found_in_first_generation():
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], [ComputeNode(0, "RSU", ONE)], 1, DelayMatrix([[3.0]]))
    placement, stats = solve_ga(problem, GaConfig(generations=5))
    assert placement.assignment == {0: 0}
    assert stats.generation_found == 0


def test_violation_counts_match_feasibility_report():
    rng = np.random.default_rng(5)
    for _ in range(40):
        problem = random_problem(rng)
        pop = rng.integers(0, len(problem.nodes), size=(16, len(problem.instances)))
        counts = PopulationScorer(problem).violations(pop)
        for row, n in zip(pop, counts):
            assignment = {s.id: problem.nodes[k].id for s, k in zip(problem.instances, row)}
            assert n == len(check_feasibility(problem, Placement(assignment)))


def test_best_fitness_never_increases():
    problem = instantiate(builtin_scenario("SMALL", 60, 8))
    for seed in range(5):
        _, stats = solve_ga(problem, GaConfig(seed=seed, generations=60))
        hist = np.array(stats.best_fitness)
        assert len(hist) == 61
        assert np.all(np.diff(hist) <= 0)


def test_seeded_determinism():
    problem = instantiate(builtin_scenario("SMALL", 40, 2))
    a, sa = solve_ga(problem, GaConfig(seed=17, generations=50))
    b, sb = solve_ga(problem, GaConfig(seed=17, generations=50))
    assert a == b and sa.best_fitness == sb.best_fitness


def test_small_scenario_feasible_and_dominated_by_exact():
    feasible = 0
    for seed in range(100):
        problem = instantiate(builtin_scenario("SMALL", 20, 1000 + seed))
        try:
            placement, _ = solve_ga(problem, GaConfig(seed=seed))
        except Infeasible:
            continue
        feasible += 1
        assert check_feasibility(problem, placement).feasible
        assert placement.objective_ms >= solve_exact(problem)[0].objective_ms
    assert feasible >= 95


def test_infeasible_problem_raises():
    t = UniqueServiceType("a", "CAM", 20.0, ONE)
    problem = PlacementProblem([t], [ServiceInstance(0, "a")], [ComputeNode(0, "CORE", ONE)], 1, DelayMatrix([[80.0]]))
    with pytest.raises(Infeasible):
        solve_ga(problem, GaConfig(generations=3))


@pytest.mark.parametrize(
    "kwargs",
    [dict(population_size=1), dict(crossover_rate=1.5), dict(mutation_rate=-0.1), dict(penalty_weight=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        GaConfig(**kwargs)
