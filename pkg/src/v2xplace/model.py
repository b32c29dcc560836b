"""Problem data types, objective and constraint checking for V2X service placement.

A problem places every service instance on exactly one compute node.  Each
vehicle sees a delay to each node that does not depend on which service it
talks to, so the delay table is ``vehicles x nodes``.  Instances are scored by
the mean delay over vehicles at their node and constrained by the worst
(maximum) delay over vehicles.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

RESOURCES = ("cpu", "memory", "storage")

# Slack on capacity comparisons so that sums like 0.1 + 0.2 still fit 0.3.
CAPACITY_RTOL = 1e-9


class PlacementError(Exception):
    """Base class for errors raised by this package."""


class InvalidProblem(PlacementError, ValueError):
    pass


class AssignmentIncomplete(PlacementError):
    pass


class DegenerateProblem(PlacementError):
    pass


class Infeasible(PlacementError):
    """No placement satisfies the constraints (or a heuristic failed to find one).

    ``instance`` names the instance a constructive heuristic got stuck on, if any.
    """

    def __init__(self, message: str = "no feasible placement", instance: int | None = None, stats=None):
        super().__init__(message)
        self.instance = instance
        self.stats = stats


class ServiceName(str, enum.Enum):
    CAM = "CAM"
    DENM = "DENM"
    MEDIA = "MEDIA"


class Tier(str, enum.Enum):
    CORE = "CORE"
    ENB = "ENB"
    RSU = "RSU"


def capacity_slack(cap):
    return CAPACITY_RTOL * np.maximum(1.0, np.abs(cap))


@dataclass(frozen=True)
class ResourceVector:
    cpu: float
    memory: float
    storage: float

    def __post_init__(self):
        for name in RESOURCES:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"resource {name} must be finite and >= 0, got {value!r}")

    @classmethod
    def zero(cls) -> ResourceVector:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, values) -> ResourceVector:
        cpu, memory, storage = (float(v) for v in values)
        return cls(cpu, memory, storage)

    def as_array(self) -> np.ndarray:
        return np.array([self.cpu, self.memory, self.storage], dtype=float)

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.cpu + other.cpu, self.memory + other.memory, self.storage + other.storage)

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        # Raises if any component would go negative.
        return ResourceVector(self.cpu - other.cpu, self.memory - other.memory, self.storage - other.storage)

    def __le__(self, other: ResourceVector) -> bool:
        return self.cpu <= other.cpu and self.memory <= other.memory and self.storage <= other.storage

    def __ge__(self, other: ResourceVector) -> bool:
        return other <= self

    def fits_in(self, other: ResourceVector) -> bool:
        """Component-wise ``self <= other`` (with a tiny relative slack for rounding)."""
        return bool(np.all(self.as_array() <= other.as_array() + capacity_slack(other.as_array())))

    def to_dict(self) -> dict:
        return {"cpu": self.cpu, "memory": self.memory, "storage": self.storage}


@dataclass(frozen=True)
class UniqueServiceType:
    id: str
    name: ServiceName
    delay_threshold_ms: float
    demand: ResourceVector
    redundancy_requirement: int = 1

    def __post_init__(self):
        object.__setattr__(self, "name", ServiceName(self.name))
        if not self.delay_threshold_ms > 0:
            raise ValueError(f"type {self.id}: delay threshold must be > 0")
        if not (self.demand.cpu > 0 and self.demand.memory > 0 and self.demand.storage > 0):
            raise ValueError(f"type {self.id}: every demand component must be > 0")
        if int(self.redundancy_requirement) != self.redundancy_requirement or self.redundancy_requirement < 1:
            raise ValueError(f"type {self.id}: redundancy requirement must be an integer >= 1")


@dataclass(frozen=True)
class ServiceInstance:
    id: int
    type_ref: str


@dataclass(frozen=True)
class ComputeNode:
    id: int
    tier: Tier
    capacity: ResourceVector

    def __post_init__(self):
        object.__setattr__(self, "tier", Tier(self.tier))
        if not (self.capacity.cpu > 0 and self.capacity.memory > 0 and self.capacity.storage > 0):
            raise ValueError(f"node {self.id}: every capacity component must be > 0")


@dataclass(frozen=True, eq=False)
class DelayMatrix:
    """Access delay in ms, indexed ``[vehicle, node]``."""

    delays_ms: np.ndarray

    def __post_init__(self):
        arr = np.array(self.delays_ms, dtype=float)
        if arr.ndim != 2:
            if arr.size == 0:
                arr = arr.reshape(0, 0)
            else:
                raise ValueError("delay matrix must be two-dimensional")
        if arr.size and not (np.all(np.isfinite(arr)) and np.all(arr > 0)):
            raise ValueError("delay matrix entries must be finite and > 0")
        arr.setflags(write=False)
        object.__setattr__(self, "delays_ms", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.delays_ms.shape

    def __eq__(self, other):
        if not isinstance(other, DelayMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.delays_ms, other.delays_ms))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PlacementProblem:
    """A complete placement instance.

    The number of instances listed for each type must equal that type's
    redundancy requirement, so placing every instance satisfies the
    redundancy constraint automatically.  Nodes and instances are referred to
    by position in the solvers; ids are only used at the edges.
    """

    types: tuple[UniqueServiceType, ...]
    instances: tuple[ServiceInstance, ...]
    nodes: tuple[ComputeNode, ...]
    vehicle_count: int
    delay_matrix: DelayMatrix

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not isinstance(self.delay_matrix, DelayMatrix):
            object.__setattr__(self, "delay_matrix", DelayMatrix(self.delay_matrix))
        if self.vehicle_count < 0:
            raise InvalidProblem("vehicle_count must be >= 0")

        type_ids = [t.id for t in self.types]
        if len(set(type_ids)) != len(type_ids):
            raise InvalidProblem("duplicate service type id")
        inst_ids = [s.id for s in self.instances]
        if len(set(inst_ids)) != len(inst_ids):
            raise InvalidProblem("duplicate instance id")
        node_ids = [c.id for c in self.nodes]
        if len(set(node_ids)) != len(node_ids):
            raise InvalidProblem("duplicate node id")

        expected = (self.vehicle_count, len(self.nodes))
        if self.delay_matrix.shape != expected and not (self.vehicle_count == 0 and self.delay_matrix.delays_ms.size == 0):
            raise InvalidProblem(f"delay matrix shape {self.delay_matrix.shape} != {expected}")

        counts = dict.fromkeys(type_ids, 0)
        for inst in self.instances:
            if inst.type_ref not in counts:
                raise InvalidProblem(f"instance {inst.id} references unknown type {inst.type_ref!r}")
            counts[inst.type_ref] += 1
        for t in self.types:
            if counts[t.id] != t.redundancy_requirement:
                raise InvalidProblem(
                    f"type {t.id}: {counts[t.id]} instances listed but redundancy requirement is "
                    f"{t.redundancy_requirement}"
                )
            if counts[t.id] > len(self.nodes):
                raise InvalidProblem(
                    f"type {t.id}: {counts[t.id]} instances cannot sit on distinct nodes, only {len(self.nodes)} nodes"
                )

    def __eq__(self, other):
        if not isinstance(other, PlacementProblem):
            return NotImplemented
        return (self.types, self.instances, self.nodes, self.vehicle_count, self.delay_matrix) == (
            other.types, other.instances, other.nodes, other.vehicle_count, other.delay_matrix
        )

    __hash__ = None

    # -- lookups -----------------------------------------------------------

    @cached_property
    def type_by_id(self) -> dict[str, UniqueServiceType]:
        return {t.id: t for t in self.types}

    @cached_property
    def node_index(self) -> dict[int, int]:
        return {c.id: k for k, c in enumerate(self.nodes)}

    @cached_property
    def instance_index(self) -> dict[int, int]:
        return {s.id: k for k, s in enumerate(self.instances)}

    def instances_of(self, type_id: str) -> list[ServiceInstance]:
        return [s for s in self.instances if s.type_ref == type_id]

    # -- precomputed arrays shared by the solvers -----------------------------

    @cached_property
    def node_mean_delay(self) -> np.ndarray:
        """Mean delay over vehicles, per node."""
        if self.vehicle_count == 0:
            raise DegenerateProblem("no vehicles: mean delay undefined")
        return self.delay_matrix.delays_ms.mean(axis=0)

    @cached_property
    def node_max_delay(self) -> np.ndarray:
        """Worst delay over vehicles, per node (zero when there are no vehicles)."""
        if self.vehicle_count == 0:
            return np.zeros(len(self.nodes))
        return self.delay_matrix.delays_ms.max(axis=0)

    @cached_property
    def instance_type_index(self) -> np.ndarray:
        pos = {t.id: k for k, t in enumerate(self.types)}
        return np.array([pos[s.type_ref] for s in self.instances], dtype=np.intp)

    @cached_property
    def instance_threshold(self) -> np.ndarray:
        return np.array([self.type_by_id[s.type_ref].delay_threshold_ms for s in self.instances], dtype=float)

    @cached_property
    def instance_demand(self) -> np.ndarray:
        return np.array([self.type_by_id[s.type_ref].demand.as_array() for s in self.instances]).reshape(-1, 3)

    @cached_property
    def node_capacity(self) -> np.ndarray:
        return np.array([c.capacity.as_array() for c in self.nodes]).reshape(-1, 3)

    def search_space_size(self) -> int:
        """Number of total assignments, ``|C| ** |S|``."""
        return len(self.nodes) ** len(self.instances)

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "types": [
                {
                    "id": t.id,
                    "name": t.name.value,
                    "delay_threshold_ms": t.delay_threshold_ms,
                    "demand": t.demand.to_dict(),
                    "redundancy_requirement": t.redundancy_requirement,
                }
                for t in self.types
            ],
            "instances": [{"id": s.id, "type_ref": s.type_ref} for s in self.instances],
            "nodes": [{"id": c.id, "tier": c.tier.value, "capacity": c.capacity.to_dict()} for c in self.nodes],
            "vehicle_count": self.vehicle_count,
            "delay_matrix": {"delays_ms": self.delay_matrix.delays_ms.tolist()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> PlacementProblem:
        return _problem_from_dict(data)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> PlacementProblem:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Placement:
    """Instance id -> node id, plus the objective value it achieves."""

    assignment: Mapping[int, int]
    objective_ms: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))

    @classmethod
    def from_vector(cls, problem: PlacementProblem, vector: Iterable[int]) -> Placement:
        """Build from node positions listed in instance order, scoring it."""
        assignment = {s.id: problem.nodes[int(k)].id for s, k in zip(problem.instances, vector)}
        return cls(assignment, evaluate_objective(problem, cls(assignment)))

    def vector(self, problem: PlacementProblem) -> tuple[int, ...]:
        """Node positions in instance order (requires a total assignment)."""
        return tuple(problem.node_index[self.assignment[s.id]] for s in problem.instances)

    def to_dict(self) -> dict:
        return {
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "objective_ms": None if math.isnan(self.objective_ms) else self.objective_ms,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> Placement:
        return _placement_from_dict(data)


# -- objective and constraints ------------------------------------------------


def evaluate_objective(problem: PlacementProblem, placement: Placement) -> float:
    """Aggregate average delay: sum over instances of the mean vehicle delay at their node.

    The sum is exactly rounded (``math.fsum``) so that any two placements using
    the same multiset of nodes score bit-identically.
    """
    missing = [s.id for s in problem.instances if placement.assignment.get(s.id) not in problem.node_index]
    if missing:
        raise AssignmentIncomplete(f"instances without a (known) node: {missing}")
    if not problem.instances:
        return 0.0
    if problem.vehicle_count == 0:
        raise DegenerateProblem("objective undefined without vehicles")
    means = problem.node_mean_delay
    return math.fsum(float(means[problem.node_index[placement.assignment[s.id]]]) for s in problem.instances)


class ConstraintKind(str, enum.Enum):
    DELAY = "delay"
    CAPACITY = "capacity"
    REDUNDANCY = "redundancy"
    ANTI_AFFINITY = "anti_affinity"
    PLACEMENT = "placement"


@dataclass(frozen=True)
class Violation:
    kind: ConstraintKind
    instance: int | None = None
    node: int | None = None
    type_id: str | None = None
    resource: str | None = None
    detail: str = ""

    def __str__(self):
        where = ", ".join(
            f"{k}={v}"
            for k, v in (("instance", self.instance), ("node", self.node), ("type", self.type_id), ("resource", self.resource))
            if v is not None
        )
        return f"{self.kind.value}[{where}] {self.detail}".rstrip()


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self):
        # Truthy when something is wrong, like a non-empty list.
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def of_kind(self, kind: ConstraintKind) -> list[Violation]:
        return [v for v in self.violations if v.kind is ConstraintKind(kind)]

    def kinds(self) -> set[ConstraintKind]:
        return {v.kind for v in self.violations}


def check_feasibility(problem: PlacementProblem, placement: Placement) -> FeasibilityReport:
    """List every violated constraint; an empty report means the placement is feasible.

    Instances mapped to an unknown node id count as unplaced.
    """
    out: list[Violation] = []
    node_pos = problem.node_index
    max_delay = problem.node_max_delay

    placed: dict[int, int] = {}
    for inst in problem.instances:
        node_id = placement.assignment.get(inst.id)
        if node_id is None:
            out.append(Violation(ConstraintKind.PLACEMENT, instance=inst.id, type_id=inst.type_ref, detail="not placed"))
        elif node_id not in node_pos:
            out.append(
                Violation(ConstraintKind.PLACEMENT, instance=inst.id, node=node_id, type_id=inst.type_ref, detail="unknown node")
            )
        else:
            placed[inst.id] = node_pos[node_id]
    extra = sorted(set(placement.assignment) - set(problem.instance_index))
    for inst_id in extra:
        out.append(Violation(ConstraintKind.PLACEMENT, instance=inst_id, detail="unknown instance"))

    # worst-case vehicle delay under the type's threshold
    for inst in problem.instances:
        if inst.id not in placed:
            continue
        k = placed[inst.id]
        threshold = problem.type_by_id[inst.type_ref].delay_threshold_ms
        if problem.vehicle_count and max_delay[k] > threshold:
            out.append(
                Violation(
                    ConstraintKind.DELAY,
                    instance=inst.id,
                    node=problem.nodes[k].id,
                    type_id=inst.type_ref,
                    detail=f"max delay {max_delay[k]:.6g} ms > {threshold:g} ms",
                )
            )

    # per-node, per-dimension capacity
    load = np.zeros((len(problem.nodes), 3))
    for inst in problem.instances:
        if inst.id in placed:
            load[placed[inst.id]] += problem.type_by_id[inst.type_ref].demand.as_array()
    cap = problem.node_capacity
    over = load > cap + capacity_slack(cap)
    for k, d in zip(*np.nonzero(over)):
        out.append(
            Violation(
                ConstraintKind.CAPACITY,
                node=problem.nodes[k].id,
                resource=RESOURCES[d],
                detail=f"load {load[k, d]:g} > capacity {cap[k, d]:g}",
            )
        )

    # redundancy floor per type
    for t in problem.types:
        n_placed = sum(1 for s in problem.instances if s.type_ref == t.id and s.id in placed)
        if n_placed < t.redundancy_requirement:
            out.append(
                Violation(
                    ConstraintKind.REDUNDANCY, type_id=t.id, detail=f"{n_placed} placed < {t.redundancy_requirement} required"
                )
            )

    # at most one instance of a type per node
    seen: dict[tuple[str, int], int] = {}
    for inst in problem.instances:
        if inst.id in placed:
            key = (inst.type_ref, placed[inst.id])
            seen[key] = seen.get(key, 0) + 1
    for (type_id, k), n in seen.items():
        if n > 1:
            out.append(
                Violation(ConstraintKind.ANTI_AFFINITY, node=problem.nodes[k].id, type_id=type_id, detail=f"{n} instances")
            )

    return FeasibilityReport(tuple(out))


# -- JSON interchange ----------------------------------------------------------


class SchemaError(PlacementError, ValueError):
    """A JSON document does not match the interchange schema; message carries the path."""


def _get(data, key, path):
    if not isinstance(data, Mapping):
        raise SchemaError(f"{path}: expected an object, got {type(data).__name__}")
    if key not in data:
        raise SchemaError(f"{path}: missing field {key!r}")
    return data[key]


def _resources(data, path) -> ResourceVector:
    try:
        return ResourceVector(*(float(_get(data, r, path)) for r in RESOURCES))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from None


def _problem_from_dict(data) -> PlacementProblem:
    try:
        types = []
        for i, t in enumerate(_get(data, "types", "$")):
            p = f"$.types[{i}]"
            types.append(
                UniqueServiceType(
                    id=str(_get(t, "id", p)),
                    name=_get(t, "name", p),
                    delay_threshold_ms=float(_get(t, "delay_threshold_ms", p)),
                    demand=_resources(_get(t, "demand", p), p + ".demand"),
                    redundancy_requirement=int(_get(t, "redundancy_requirement", p)),
                )
            )
        instances = [
            ServiceInstance(id=int(_get(s, "id", f"$.instances[{i}]")), type_ref=str(_get(s, "type_ref", f"$.instances[{i}]")))
            for i, s in enumerate(_get(data, "instances", "$"))
        ]
        nodes = [
            ComputeNode(
                id=int(_get(c, "id", f"$.nodes[{i}]")),
                tier=_get(c, "tier", f"$.nodes[{i}]"),
                capacity=_resources(_get(c, "capacity", f"$.nodes[{i}]"), f"$.nodes[{i}].capacity"),
            )
            for i, c in enumerate(_get(data, "nodes", "$"))
        ]
        matrix = _get(data, "delay_matrix", "$")
        if isinstance(matrix, Mapping):
            matrix = _get(matrix, "delays_ms", "$.delay_matrix")
        vehicle_count = int(_get(data, "vehicle_count", "$"))
        if vehicle_count == 0:
            matrix = np.zeros((0, len(nodes)))
        return PlacementProblem(types, instances, nodes, vehicle_count, DelayMatrix(matrix))
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid problem document: {exc}") from None


def _placement_from_dict(data) -> Placement:
    raw = _get(data, "assignment", "$")
    if not isinstance(raw, Mapping):
        raise SchemaError("$.assignment: expected an object mapping instance id to node id")
    try:
        assignment = {int(k): int(v) for k, v in raw.items()}
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"$.assignment: {exc}") from None
    objective = data.get("objective_ms")
    return Placement(assignment, float("nan") if objective is None else float(objective))


def load_json(path) -> dict:
    """Read a JSON file, turning decode errors into ``SchemaError`` with file:line:col."""
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_problem(path) -> PlacementProblem:
    try:
        return _problem_from_dict(load_json(path))
    except SchemaError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise SchemaError(f"{path}: {exc}") from None


def save_problem(problem: PlacementProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem.to_dict(), fh, indent=1)
        fh.write("\n")


def load_placement(path) -> Placement:
    try:
        return _placement_from_dict(load_json(path))
    except SchemaError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise SchemaError(f"{path}: {exc}") from None


def save_placement(placement: Placement, path, stats=None) -> None:
    doc = placement.to_dict()
    if stats is not None:
        doc["stats"] = stats.to_dict()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


@dataclass
class SolveStats:
    """Search effort of one solver call.

    ``nodes_explored`` is solver-specific: fathomed search nodes for the exact
    solvers, candidate checks for the greedy heuristic, fitness evaluations
    for the GA.
    """

    nodes_explored: int = 0
    runtime_ms: float = 0.0
    proven_optimal: bool = False

    def to_dict(self) -> dict:
        return {"nodes_explored": self.nodes_explored, "runtime_ms": self.runtime_ms, "proven_optimal": self.proven_optimal}
