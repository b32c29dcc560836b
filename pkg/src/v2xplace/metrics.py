"""Delay, utilization and histogram statistics of a placement."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .model import RESOURCES, Placement, PlacementError, PlacementProblem, evaluate_objective

DEFAULT_BIN_WIDTH_MS = 5.0


class EmptyHistogram(PlacementError):
    pass


def _positions(problem: PlacementProblem, placement: Placement) -> dict[int, int]:
    index = problem.node_index
    return {s.id: index[placement.assignment[s.id]] for s in problem.instances if placement.assignment.get(s.id) in index}


def per_type_avg_delay(problem: PlacementProblem, placement: Placement) -> dict[str, float]:
    """Mean over a type's instances of the per-instance mean vehicle delay; types without instances are omitted."""
    pos = _positions(problem, placement)
    means = problem.node_mean_delay
    out = {}
    for t in problem.types:
        values = [float(means[pos[s.id]]) for s in problem.instances_of(t.id) if s.id in pos]
        if values:
            out[t.id] = math.fsum(values) / len(values)
    return out


def utilization(problem: PlacementProblem, placement: Placement) -> dict[str, float]:
    """Per resource, the fraction of capacity in use averaged over all nodes (empty ones included)."""
    if not problem.nodes:
        return dict.fromkeys(RESOURCES, 0.0)
    load = np.zeros((len(problem.nodes), 3))
    for inst_id, k in _positions(problem, placement).items():
        inst = problem.instances[problem.instance_index[inst_id]]
        load[k] += problem.type_by_id[inst.type_ref].demand.as_array()
    frac = (load / problem.node_capacity).mean(axis=0)
    return {r: float(frac[i]) for i, r in enumerate(RESOURCES)}


def delay_samples(problem: PlacementProblem, placement: Placement, type_id: str) -> np.ndarray:
    """Every (vehicle, instance) delay for instances of ``type_id``."""
    pos = _positions(problem, placement)
    cols = [pos[s.id] for s in problem.instances_of(type_id) if s.id in pos]
    return problem.delay_matrix.delays_ms[:, cols].T.ravel()


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray  # probability per bin, sums to 1

    @property
    def density(self) -> np.ndarray:
        return self.mass / np.diff(self.edges)

    def rows(self):
        for lo, hi, d in zip(self.edges[:-1], self.edges[1:], self.density):
            yield float(lo), float(hi), float(d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "density"])
        w.writerows((repr(a), repr(b), repr(c)) for a, b, c in self.rows())
        return buf.getvalue()


def histogram_of(samples, bin_width_ms: float = DEFAULT_BIN_WIDTH_MS) -> Histogram:
    """Histogram on the grid ``k * bin_width_ms`` covering all samples."""
    if not bin_width_ms > 0:
        raise ValueError("bin width must be > 0")
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptyHistogram("no delay samples")
    lo = math.floor(samples.min() / bin_width_ms)
    hi = max(math.ceil(samples.max() / bin_width_ms), lo + 1)
    edges = np.arange(lo, hi + 1) * bin_width_ms
    counts, edges = np.histogram(samples, bins=edges)
    return Histogram(edges, counts / samples.size)


def delay_histogram(
    problem: PlacementProblem, placement: Placement, type_id: str, bin_width_ms: float = DEFAULT_BIN_WIDTH_MS
) -> Histogram:
    samples = delay_samples(problem, placement, type_id)
    if samples.size == 0:
        raise EmptyHistogram(f"type {type_id!r} has no placed instances")
    return histogram_of(samples, bin_width_ms)


@dataclass
class ExperimentReport:
    solver: str
    seed: int
    feasible: bool
    vehicle_count: int = 0
    aggregate_avg_delay_ms: float = float("nan")
    per_type_avg_delay_ms: dict[str, float] = field(default_factory=dict)
    per_resource_utilization: dict[str, float] = field(default_factory=dict)
    per_type_delay_samples_ms: dict[str, np.ndarray] = field(default_factory=dict)
    runtime_ms: float = float("nan")
    nodes_explored: int = 0
    status: str = "ok"

    def flat(self, type_ids=(), include_runtime: bool = True) -> dict:
        """One CSV row; per-type and per-resource maps become columns."""
        row = {
            "solver": self.solver,
            "seed": self.seed,
            "vehicle_count": self.vehicle_count,
            "feasible": int(self.feasible),
            "status": self.status,
            "nodes_explored": self.nodes_explored,
            "aggregate_avg_delay_ms": self.aggregate_avg_delay_ms,
        }
        for t in type_ids or sorted(self.per_type_avg_delay_ms):
            row[f"avg_delay_{t}_ms"] = self.per_type_avg_delay_ms.get(t, float("nan"))
        for r in RESOURCES:
            row[f"util_{r}"] = self.per_resource_utilization.get(r, float("nan"))
        if include_runtime:
            row["runtime_ms"] = self.runtime_ms
        return row

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "seed": self.seed,
            "vehicle_count": self.vehicle_count,
            "feasible": self.feasible,
            "status": self.status,
            "aggregate_avg_delay_ms": self.aggregate_avg_delay_ms,
            "per_type_avg_delay_ms": dict(self.per_type_avg_delay_ms),
            "per_resource_utilization": dict(self.per_resource_utilization),
            "per_type_delay_samples_ms": {k: v.tolist() for k, v in self.per_type_delay_samples_ms.items()},
            "runtime_ms": self.runtime_ms,
            "nodes_explored": self.nodes_explored,
        }


def experiment_report(
    problem: PlacementProblem,
    placement: Placement | None,
    solver: str,
    seed: int,
    runtime_ms: float = float("nan"),
    nodes_explored: int = 0,
    status: str | None = None,
) -> ExperimentReport:
    """Collect all metrics of one solver run; ``placement=None`` records an infeasible run."""
    if placement is None:
        return ExperimentReport(
            solver=solver,
            seed=seed,
            feasible=False,
            vehicle_count=problem.vehicle_count,
            runtime_ms=runtime_ms,
            nodes_explored=nodes_explored,
            status=status or "infeasible",
        )
    return ExperimentReport(
        solver=solver,
        seed=seed,
        feasible=True,
        vehicle_count=problem.vehicle_count,
        aggregate_avg_delay_ms=evaluate_objective(problem, placement),
        per_type_avg_delay_ms=per_type_avg_delay(problem, placement),
        per_resource_utilization=utilization(problem, placement),
        per_type_delay_samples_ms={t.id: delay_samples(problem, placement, t.id) for t in problem.types},
        runtime_ms=runtime_ms,
        nodes_explored=nodes_explored,
        status=status or "ok",
    )
