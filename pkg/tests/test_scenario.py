import json
import warnings

import numpy as np
import pytest

from v2xplace import Builtin, InfeasibleSpec, InvalidSpec, ScenarioSpec, Tier, builtin_scenario, instantiate
from v2xplace.scenario import sample_delays, vehicle_positions


@pytest.mark.parametrize(
    "which, vehicles, nodes, red",
    [("SMALL", 20, 10, 1), ("SMALL", 100, 10, 5), ("LARGE", 140, 30, 7), ("LARGE", 300, 30, 15)],
)
def test_builtin_node_and_instance_counts(which, vehicles, nodes, red):
    spec = builtin_scenario(which, vehicles, 1)
    assert spec.node_count == nodes
    assert spec.redundancy() == red
    assert not spec.nonstandard


def test_builtin_is_deterministic():
    assert builtin_scenario("SMALL", 20, 5) == builtin_scenario("SMALL", 20, 5)


def test_builtin_flags_unlisted_vehicle_count():
    with pytest.warns(UserWarning):
        spec = builtin_scenario(Builtin.SMALL, 30, 0)
    assert spec.nonstandard


def test_builtin_rejects_nonpositive_vehicles():
    with pytest.raises(InvalidSpec):
        builtin_scenario("SMALL", 0, 0)


def test_instantiate_sixty_vehicles():
    problem = instantiate(builtin_scenario("SMALL", 60, 3))
    assert len(problem.instances) == 9
    for t in problem.types:
        assert len(problem.instances_of(t.id)) == 3 == t.redundancy_requirement


def test_delays_stay_in_tier_ranges():
    spec = builtin_scenario("LARGE", 300, 12)
    problem = instantiate(spec)
    d = problem.delay_matrix.delays_ms
    for k, node in enumerate(problem.nodes):
        lo, hi = spec.delay_ranges_ms[node.tier]
        assert np.all((d[:, k] >= lo) & (d[:, k] <= hi))
    rsu = [k for k, c in enumerate(problem.nodes) if c.tier is Tier.RSU]
    assert d[:, rsu].min() >= 1 and d[:, rsu].max() <= 10


def test_equal_seeds_bit_identical_and_different_seeds_differ():
    a = instantiate(builtin_scenario("SMALL", 40, 77))
    b = instantiate(builtin_scenario("SMALL", 40, 77))
    assert a.delay_matrix.delays_ms.tobytes() == b.delay_matrix.delays_ms.tobytes()
    for s in range(100):
        x = instantiate(builtin_scenario("SMALL", 20, 2 * s)).delay_matrix
        y = instantiate(builtin_scenario("SMALL", 20, 2 * s + 1)).delay_matrix
        assert x != y


def test_each_entry_keyed_by_seed_vehicle_node():
    # entry (v, c) does not depend on how many vehicles or nodes are generated
    tiers = [Tier.RSU, Tier.ENB, Tier.CORE, Tier.RSU]
    ranges = {Tier.RSU: (1.0, 10.0), Tier.ENB: (20.0, 40.0), Tier.CORE: (60.0, 130.0)}
    big = sample_delays(9, tiers, ranges, 50)
    small = sample_delays(9, tiers[:2], ranges, 7)
    assert np.array_equal(big[:7, :2], small)
    # rows can be produced in any order
    row = sample_delays(9, tiers, ranges, 31)[30]
    assert np.array_equal(row, big[30])


def test_redundancy_exceeding_nodes_is_infeasible_spec():
    spec = ScenarioSpec(vehicle_count=20, core_nodes=1, enb_nodes=0, rsu_nodes=1, redundancy_override=3)
    with pytest.raises(InfeasibleSpec):
        instantiate(spec)


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        ScenarioSpec(vehicle_count=10, delay_ranges_ms={"CORE": (5, 5), "ENB": (1, 2), "RSU": (1, 2)})
    with pytest.raises(InvalidSpec):
        ScenarioSpec(vehicle_count=10, seed=-1)


def test_spec_json_roundtrip(tmp_path):
    spec = builtin_scenario("LARGE", 180, 4)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    again = ScenarioSpec.load(path)
    assert again == spec
    assert instantiate(again).to_dict() == instantiate(spec).to_dict()


def test_spec_from_builtin_shorthand():
    spec = ScenarioSpec.from_dict({"builtin": "SMALL", "vehicle_count": 60, "seed": 5, "rsu_nodes": 7})
    assert spec.rsu_nodes == 7 and spec.core_nodes == 2 and spec.seed == 5


def test_vehicle_positions_equally_spaced():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = builtin_scenario("SMALL", 20, 0)
    pos = vehicle_positions(spec)
    assert pos.shape == (20, 2)
    lane0 = pos[pos[:, 0] == 0, 1]
    assert np.allclose(np.diff(lane0), 0.2)
    assert pos[:, 1].max() < spec.lane_length_km
