import math

import numpy as np
import pytest

from factories import three_tier_toy
from v2xplace import (
    ComputeNode,
    DelayMatrix,
    EmptyHistogram,
    Placement,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    Tier,
    UniqueServiceType,
    builtin_scenario,
    delay_histogram,
    evaluate_objective,
    experiment_report,
    instantiate,
    per_type_avg_delay,
    solve_exact,
    solve_greedy,
    utilization,
)
from v2xplace.metrics import histogram_of


def test_utilization_single_cam_on_edge_node():
    cam = UniqueServiceType("CAM", "CAM", 20.0, ResourceVector(2, 3.5, 4))
    problem = PlacementProblem(
        [cam], [ServiceInstance(0, "CAM")], [ComputeNode(0, "RSU", ResourceVector(8, 16, 240))], 1, DelayMatrix([[3.0]])
    )
    util = utilization(problem, Placement({0: 0}))
    assert util["cpu"] == 0.25
    assert util["memory"] == 0.21875
    assert util["storage"] == pytest.approx(4 / 240, rel=1e-12)


def test_utilization_of_empty_placement_is_zero():
    problem = three_tier_toy()
    assert utilization(problem, Placement({})) == {"cpu": 0.0, "memory": 0.0, "storage": 0.0}


def test_constant_delays_give_constant_type_means_and_one_bin():
    problem = three_tier_toy(vehicles=4, core=7.0, enb=7.0, rsu=7.0)
    placement = Placement({1: 1, 2: 2, 3: 3})
    assert per_type_avg_delay(problem, placement) == {"s1": 7.0, "s2": 7.0, "s3": 7.0}
    h = delay_histogram(problem, placement, "s2")
    assert np.count_nonzero(h.mass) == 1 and h.mass.sum() == 1.0


def test_aggregate_identity_and_cam_range():
    for seed in range(10):
        problem = instantiate(builtin_scenario("SMALL", 20, seed))
        placement, _ = solve_exact(problem)
        per_type = per_type_avg_delay(problem, placement)
        total = sum(len(problem.instances_of(t)) * v for t, v in per_type.items())
        assert total == pytest.approx(evaluate_objective(problem, placement), rel=1e-9)
        assert 1.0 <= per_type["CAM"] <= 10.0


def test_histograms_respect_thresholds():
    problem = instantiate(builtin_scenario("SMALL", 100, 4))
    placement, _ = solve_greedy(problem)
    for t in problem.types:
        h = delay_histogram(problem, placement, t.id, bin_width_ms=5.0)
        assert h.mass.sum() == pytest.approx(1.0)
        assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0)
        support = h.edges[:-1][h.mass > 0]
        assert support.min() >= 0 and support.max() < t.delay_threshold_ms


def test_histogram_errors():
    problem = three_tier_toy()
    with pytest.raises(EmptyHistogram):
        delay_histogram(problem, Placement({}), "s1")
    with pytest.raises(ValueError):
        histogram_of([1.0], bin_width_ms=0)


def test_histogram_csv():
    text = histogram_of([1.0, 2.0, 6.0], 5.0).to_csv().splitlines()
    assert text[0] == "bin_left,bin_right,density"
    assert len(text) == 3
    left, right, dens = map(float, text[1].split(","))
    assert (left, right) == (0.0, 5.0) and dens == pytest.approx(2 / 3 / 5)


def test_report_rows():
    problem = instantiate(builtin_scenario("SMALL", 40, 1))
    placement, stats = solve_exact(problem)
    report = experiment_report(problem, placement, "EXACT", 1, stats.runtime_ms, stats.nodes_explored)
    row = report.flat(["CAM", "DENM", "MEDIA"])
    assert row["feasible"] == 1 and list(row)[-1] == "runtime_ms"
    assert 0 <= row["util_cpu"] <= 1
    assert report.to_dict()["per_type_delay_samples_ms"]["CAM"].__len__() == 40 * 2
    failed = experiment_report(problem, None, "GA", 1)
    assert not failed.feasible and math.isnan(failed.aggregate_avg_delay_ms)


def test_cam_hosted_on_rsu_small_scenario():
    for seed in range(10):
        problem = instantiate(builtin_scenario("SMALL", 80, seed))
        placement, _ = solve_exact(problem)
        tiers = {c.id: c.tier for c in problem.nodes}
        assert all(tiers[placement.assignment[s.id]] is Tier.RSU for s in problem.instances_of("CAM"))
