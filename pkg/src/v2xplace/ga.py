"""Genetic-algorithm baseline with a violation-count penalty."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields

import numpy as np

from .model import Infeasible, Placement, PlacementProblem, SolveStats, capacity_slack


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 200
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1 / number of instances
    penalty_weight: float = 1e5
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be > 0")

    @classmethod
    def from_dict(cls, data) -> GaConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GA settings: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class GaStats(SolveStats):
    # lowest penalized fitness in each generation's population (index 0 = initial population)
    best_fitness: list[float] = field(default_factory=list)
    generation_found: int = -1


class PopulationScorer:
    """Vectorised objective and violation counts for a population of assignment vectors.

    Violations are counted the same way ``check_feasibility`` reports them:
    one per instance over its delay threshold, one per (node, resource) over
    capacity, one per (node, type) hosting more than one instance.
    """

    def __init__(self, problem: PlacementProblem):
        self.n_nodes = len(problem.nodes)
        self.n_types = len(problem.types)
        self.mean = problem.node_mean_delay
        self.over_delay = problem.node_max_delay[None, :] > problem.instance_threshold[:, None]  # (S, C)
        self.demand = problem.instance_demand
        self.limit = problem.node_capacity + capacity_slack(problem.node_capacity)
        self.type_of = problem.instance_type_index

    def objective(self, pop: np.ndarray) -> np.ndarray:
        return self.mean[pop].sum(axis=1)

    def violations(self, pop: np.ndarray) -> np.ndarray:
        n_pop, n_inst = pop.shape
        delay = self.over_delay[np.arange(n_inst)[None, :], pop].sum(axis=1)

        load = np.zeros((n_pop, self.n_nodes, 3))
        rows = np.repeat(np.arange(n_pop), n_inst)
        np.add.at(load, (rows, pop.ravel()), np.tile(self.demand, (n_pop, 1)))
        capacity = (load > self.limit[None]).sum(axis=(1, 2))

        per_type = np.zeros((n_pop, self.n_types, self.n_nodes), dtype=np.intp)
        np.add.at(per_type, (rows, np.tile(self.type_of, n_pop), pop.ravel()), 1)
        affinity = (per_type > 1).sum(axis=(1, 2))
        return delay + capacity + affinity


def solve_ga(problem: PlacementProblem, config: GaConfig | None = None) -> tuple[Placement, GaStats]:
    """Evolve node-index chromosomes and return the best feasible one ever seen.

    Fitness is objective + ``penalty_weight`` x violations.  Each generation
    keeps the single best individual and fills the rest by tournament
    selection, one-point crossover and per-gene uniform-reset mutation.  The
    initial population is uniform random.
    """
    config = config or GaConfig()
    t0 = time.perf_counter()
    stats = GaStats()
    n_inst, n_nodes = len(problem.instances), len(problem.nodes)
    if n_inst == 0:
        stats.nodes_explored = 1
        stats.best_fitness.append(0.0)
        stats.generation_found = 0
        stats.runtime_ms = (time.perf_counter() - t0) * 1e3
        return Placement({}, 0.0), stats

    rng = np.random.default_rng(config.seed)
    scorer = PopulationScorer(problem)
    mutation = config.mutation_rate if config.mutation_rate is not None else 1.0 / n_inst
    size = config.population_size

    pop = rng.integers(0, n_nodes, size=(size, n_inst))
    best_vec = None
    best_obj = np.inf

    def score(pop):
        nonlocal best_vec, best_obj
        obj = scorer.objective(pop)
        viol = scorer.violations(pop)
        fit = obj + config.penalty_weight * viol
        stats.nodes_explored += len(pop)
        feasible = np.flatnonzero(viol == 0)
        if feasible.size:
            k = feasible[np.argmin(obj[feasible])]
            if obj[k] < best_obj:
                best_obj = float(obj[k])
                best_vec = pop[k].copy()
                return fit, True
        return fit, False

    fit, improved = score(pop)
    if improved:
        stats.generation_found = 0
    stats.best_fitness.append(float(fit.min()))

    for gen in range(1, config.generations + 1):
        elite = pop[np.argmin(fit)].copy()

        contestants = rng.integers(0, size, size=(2 * (size - 1), config.tournament_size))
        winners = contestants[np.arange(len(contestants)), np.argmin(fit[contestants], axis=1)]
        mums, dads = pop[winners[0::2]], pop[winners[1::2]]

        children = mums.copy()
        if n_inst > 1:
            cross = rng.random(size - 1) < config.crossover_rate
            cut = rng.integers(1, n_inst, size=size - 1)
            take_dad = cross[:, None] & (np.arange(n_inst)[None, :] >= cut[:, None])
            children = np.where(take_dad, dads, mums)

        reset = rng.random(children.shape) < mutation
        children = np.where(reset, rng.integers(0, n_nodes, size=children.shape), children)

        pop = np.vstack([elite[None, :], children])
        fit, improved = score(pop)
        if improved:
            stats.generation_found = gen
        stats.best_fitness.append(float(fit.min()))

    stats.runtime_ms = (time.perf_counter() - t0) * 1e3
    if best_vec is None:
        raise Infeasible("GA found no feasible individual", stats=stats)
    return Placement.from_vector(problem, best_vec), stats
