"""Seeded scenario generation for the small (Scenario 1) and large (Scenario 2) highway setups.

Delay sampling uses numpy's Philox counter-based generator.  Row ``v`` of the
delay matrix is drawn from ``Philox(key=seed, counter=[0, v, 0, 0])``; entry
``(v, c)`` is the ``c``-th double of that stream scaled into the tier range of
node ``c``.  Rows never overlap (the counter's low word advances only within a
row), so each entry is a function of ``(seed, v, c)`` alone and rows may be
generated in any order.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import (
    ComputeNode,
    DelayMatrix,
    PlacementError,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    ServiceName,
    Tier,
    UniqueServiceType,
)


class InvalidSpec(PlacementError, ValueError):
    pass


class InfeasibleSpec(PlacementError, ValueError):
    pass


class Builtin(str, enum.Enum):
    SMALL = "SMALL"
    LARGE = "LARGE"


CORE_CAPACITY = ResourceVector(32, 64, 240)
EDGE_CAPACITY = ResourceVector(8, 16, 240)

DEFAULT_CATALOG = (
    UniqueServiceType("CAM", ServiceName.CAM, 20.0, ResourceVector(2, 3.5, 4)),
    UniqueServiceType("DENM", ServiceName.DENM, 50.0, ResourceVector(4, 7, 4)),
    UniqueServiceType("MEDIA", ServiceName.MEDIA, 150.0, ResourceVector(8, 14, 40)),
)

DEFAULT_DELAY_RANGES = {Tier.CORE: (60.0, 130.0), Tier.ENB: (20.0, 40.0), Tier.RSU: (1.0, 10.0)}

VEHICLES_PER_INSTANCE = 20

_BUILTINS = {
    # lane length km, (core, eNB, RSU) node counts, listed vehicle counts
    Builtin.SMALL: (2.0, (2, 3, 5), (20, 40, 60, 80, 100)),
    Builtin.LARGE: (8.0, (7, 8, 15), (140, 180, 220, 260, 300)),
}

SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class ScenarioSpec:
    vehicle_count: int
    seed: int = 0
    lane_count: int = 2
    lane_length_km: float = 2.0
    core_nodes: int = 2
    enb_nodes: int = 3
    rsu_nodes: int = 5
    core_capacity: ResourceVector = CORE_CAPACITY
    enb_capacity: ResourceVector = EDGE_CAPACITY
    rsu_capacity: ResourceVector = EDGE_CAPACITY
    service_catalog: tuple[UniqueServiceType, ...] = DEFAULT_CATALOG
    delay_ranges_ms: Mapping[Tier, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_DELAY_RANGES))
    # instances per type = ceil(vehicle_count / redundancy_divisor), unless overridden
    redundancy_divisor: int = VEHICLES_PER_INSTANCE
    redundancy_override: int | None = None
    # set when a builtin scenario is asked for a vehicle count it does not list
    nonstandard: bool = False

    def __post_init__(self):
        ranges = {Tier(k): (float(lo), float(hi)) for k, (lo, hi) in dict(self.delay_ranges_ms).items()}
        object.__setattr__(self, "delay_ranges_ms", ranges)
        object.__setattr__(self, "service_catalog", tuple(self.service_catalog))
        if self.vehicle_count < 1:
            raise InvalidSpec(f"vehicle_count must be >= 1, got {self.vehicle_count}")
        for name in ("lane_count", "core_nodes", "enb_nodes", "rsu_nodes"):
            if getattr(self, name) < 0:
                raise InvalidSpec(f"{name} must be >= 0")
        if self.lane_length_km < 0:
            raise InvalidSpec("lane_length_km must be >= 0")
        if not 0 <= self.seed <= SEED_MAX:
            raise InvalidSpec("seed must fit in an unsigned 64-bit integer")
        for tier in Tier:
            if tier not in ranges:
                raise InvalidSpec(f"missing delay range for tier {tier.value}")
            lo, hi = ranges[tier]
            if not (0 < lo < hi and math.isfinite(hi)):
                raise InvalidSpec(f"delay range for {tier.value} must satisfy 0 < low < high")
        if self.redundancy_divisor < 1:
            raise InvalidSpec("redundancy_divisor must be >= 1")
        if self.redundancy_override is not None and self.redundancy_override < 1:
            raise InvalidSpec("redundancy_override must be >= 1")

    @property
    def node_count(self) -> int:
        return self.core_nodes + self.enb_nodes + self.rsu_nodes

    def redundancy(self) -> int:
        if self.redundancy_override is not None:
            return self.redundancy_override
        return math.ceil(self.vehicle_count / self.redundancy_divisor)

    def replace(self, **changes) -> ScenarioSpec:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "vehicle_count": self.vehicle_count,
            "seed": self.seed,
            "lane_count": self.lane_count,
            "lane_length_km": self.lane_length_km,
            "core_nodes": self.core_nodes,
            "enb_nodes": self.enb_nodes,
            "rsu_nodes": self.rsu_nodes,
            "core_capacity": self.core_capacity.to_dict(),
            "enb_capacity": self.enb_capacity.to_dict(),
            "rsu_capacity": self.rsu_capacity.to_dict(),
            "service_catalog": [
                {
                    "id": t.id,
                    "name": t.name.value,
                    "delay_threshold_ms": t.delay_threshold_ms,
                    "demand": t.demand.to_dict(),
                }
                for t in self.service_catalog
            ],
            "delay_ranges_ms": {k.value: list(v) for k, v in self.delay_ranges_ms.items()},
            "redundancy_divisor": self.redundancy_divisor,
            "redundancy_override": self.redundancy_override,
            "nonstandard": self.nonstandard,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ScenarioSpec:
        """Build a spec from a JSON-style mapping.

        ``{"builtin": "SMALL", "vehicle_count": 40, "seed": 3}`` starts from a
        builtin scenario; any other keys override its fields.
        """
        data = dict(data)
        base: dict = {}
        if "builtin" in data:
            which = Builtin(data.pop("builtin"))
            spec = builtin_scenario(which, int(data.get("vehicle_count", 20)), int(data.get("seed", 0)))
            base = {f.name: getattr(spec, f.name) for f in dataclasses.fields(cls)}
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise InvalidSpec(f"unknown scenario fields: {sorted(unknown)}")
        for key in ("core_capacity", "enb_capacity", "rsu_capacity"):
            if key in data:
                data[key] = ResourceVector(**data[key])
        if "service_catalog" in data:
            data["service_catalog"] = [
                UniqueServiceType(
                    id=str(t.get("id", t["name"])),
                    name=t["name"],
                    delay_threshold_ms=float(t["delay_threshold_ms"]),
                    demand=ResourceVector(**t["demand"]),
                )
                for t in data["service_catalog"]
            ]
        return cls(**{**base, **data})

    @classmethod
    def load(cls, path) -> ScenarioSpec:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def builtin_scenario(which: Builtin | str, vehicle_count: int, seed: int = 0) -> ScenarioSpec:
    """Table-driven parameters of the small or large highway scenario."""
    which = Builtin(which)
    if vehicle_count <= 0:
        raise InvalidSpec(f"vehicle_count must be >= 1, got {vehicle_count}")
    lane_km, (n_core, n_enb, n_rsu), listed = _BUILTINS[which]
    nonstandard = vehicle_count not in listed
    if nonstandard:
        warnings.warn(f"{which.value} scenario is defined for {listed} vehicles, got {vehicle_count}", stacklevel=2)
    return ScenarioSpec(
        vehicle_count=vehicle_count,
        seed=seed,
        lane_count=2,
        lane_length_km=lane_km,
        core_nodes=n_core,
        enb_nodes=n_enb,
        rsu_nodes=n_rsu,
        nonstandard=nonstandard,
    )


def builtin_vehicle_counts(which: Builtin | str) -> tuple[int, ...]:
    return _BUILTINS[Builtin(which)][2]


def vehicle_positions(spec: ScenarioSpec) -> np.ndarray:
    """(lane, position_km) for each vehicle, equally spaced along the lanes.

    Informational only: delays do not depend on position.
    """
    lanes = max(spec.lane_count, 1)
    lane = np.arange(spec.vehicle_count) % lanes
    slot = np.arange(spec.vehicle_count) // lanes
    per_lane = math.ceil(spec.vehicle_count / lanes)
    pos = (slot + 0.5) * spec.lane_length_km / per_lane
    return np.column_stack([lane, pos])


def sample_delays(seed: int, tiers, ranges, vehicle_count: int) -> np.ndarray:
    low = np.array([ranges[t][0] for t in tiers])
    high = np.array([ranges[t][1] for t in tiers])
    out = np.empty((vehicle_count, len(tiers)))
    for v in range(vehicle_count):
        u = np.random.Generator(np.random.Philox(key=seed, counter=[0, v, 0, 0])).random(len(tiers))
        out[v] = low + (high - low) * u
    return out


def instantiate(spec: ScenarioSpec) -> PlacementProblem:
    nodes = []
    for tier, count, cap in (
        (Tier.CORE, spec.core_nodes, spec.core_capacity),
        (Tier.ENB, spec.enb_nodes, spec.enb_capacity),
        (Tier.RSU, spec.rsu_nodes, spec.rsu_capacity),
    ):
        start = len(nodes)
        nodes.extend(ComputeNode(start + k, tier, cap) for k in range(count))

    red = spec.redundancy()
    if red > len(nodes):
        raise InfeasibleSpec(f"{red} instances per type need {red} distinct nodes, only {len(nodes)} exist")

    types = [dataclasses.replace(t, redundancy_requirement=red) for t in spec.service_catalog]
    instances = [ServiceInstance(i, t.id) for i, t in enumerate(t for t in types for _ in range(red))]

    delays = sample_delays(spec.seed, [c.tier for c in nodes], spec.delay_ranges_ms, spec.vehicle_count)
    return PlacementProblem(types, instances, nodes, spec.vehicle_count, DelayMatrix(delays))
