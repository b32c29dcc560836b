"""Experiment sweeps: generate, solve, measure, aggregate over repetitions, write CSV.

Every run gets a child seed derived from ``(master_seed, vehicle_count,
repetition)`` with ``numpy.random.SeedSequence``::

    SeedSequence([master_seed, vehicle_count, repetition]).generate_state(1, np.uint64)[0]

The scenario's delay matrix is sampled from that seed; the GA seed is derived
from it in the same way with the GA config seed appended, so adding or
removing a solver never changes any scenario.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exact import BRUTEFORCE_LIMIT, SearchBudgetExceeded, solve_exact
from .ga import GaConfig, solve_ga
from .greedy import DelayCheck, solve_greedy
from .metrics import DEFAULT_BIN_WIDTH_MS, Histogram, experiment_report
from .model import (
    RESOURCES,
    AssignmentIncomplete,
    DegenerateProblem,
    FeasibilityReport,
    Infeasible,
    PlacementProblem,
    check_feasibility,
    evaluate_objective,
    load_placement,
    load_problem,
)
from .scenario import Builtin, ScenarioSpec, builtin_scenario, builtin_vehicle_counts, instantiate

log = logging.getLogger(__name__)

RUNTIME_COLUMNS = ("runtime_ms", "runtime_ms_mean", "runtime_ms_std")


class Solver(str, enum.Enum):
    EXACT = "EXACT"
    GREEDY = "GREEDY"
    GA = "GA"


def child_seed(master_seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([master_seed, *keys]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RunConfig:
    scenario: Builtin | ScenarioSpec = Builtin.SMALL
    vehicle_counts: tuple[int, ...] = ()  # empty -> the builtin's listed counts
    solvers: tuple[Solver, ...] = (Solver.EXACT, Solver.GREEDY, Solver.GA)
    repetitions: int = 100
    master_seed: int = 0
    output_dir: Path | None = None
    greedy_delay_check: DelayCheck = DelayCheck.MAX
    ga: GaConfig = field(default_factory=GaConfig)
    force_exact: bool = False
    exact_node_budget: int = 1_000_000
    bin_width_ms: float = DEFAULT_BIN_WIDTH_MS
    json_mirror: bool = False

    def __post_init__(self):
        if not isinstance(self.scenario, ScenarioSpec):
            object.__setattr__(self, "scenario", Builtin(self.scenario))
        object.__setattr__(self, "solvers", tuple(Solver(s) for s in self.solvers))
        object.__setattr__(self, "greedy_delay_check", DelayCheck(self.greedy_delay_check))
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        if not self.vehicle_counts:
            if not isinstance(self.scenario, Builtin):
                raise ValueError("vehicle_counts required for a custom scenario")
            object.__setattr__(self, "vehicle_counts", builtin_vehicle_counts(self.scenario))
        object.__setattr__(self, "vehicle_counts", tuple(int(n) for n in self.vehicle_counts))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.solvers:
            raise ValueError("at least one solver is required")
        if any(n < 1 for n in self.vehicle_counts):
            raise ValueError("vehicle counts must be >= 1")

    def spec_for(self, vehicle_count: int, seed: int) -> ScenarioSpec:
        if isinstance(self.scenario, Builtin):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return builtin_scenario(self.scenario, vehicle_count, seed)
        return self.scenario.replace(vehicle_count=vehicle_count, seed=seed)

    @classmethod
    def from_dict(cls, data) -> RunConfig:
        data = dict(data)
        scenario = data.pop("scenario", "SMALL")
        if isinstance(scenario, dict):
            # vehicle_count is replaced per sweep point; custom specs need a placeholder to validate
            placeholder = {} if "builtin" in scenario else {"vehicle_count": 1}
            scenario = ScenarioSpec.from_dict({**placeholder, **scenario})
        ga = GaConfig.from_dict(data.pop("ga", {}))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown run settings: {sorted(unknown)}")
        return cls(scenario=scenario, ga=ga, **data)

    @classmethod
    def load(cls, path) -> RunConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class SweepSummary:
    runs: list[dict]
    summary: list[dict]
    histograms: dict[tuple[str, str, int], Histogram]
    skipped: list[str] = field(default_factory=list)

    def summary_row(self, solver: Solver | str, vehicle_count: int) -> dict:
        solver = Solver(solver).value
        for row in self.summary:
            if row["solver"] == solver and row["vehicle_count"] == vehicle_count:
                return row
        raise KeyError((solver, vehicle_count))


def run_solver(solver: Solver, problem: PlacementProblem, config: RunConfig, seed: int):
    """Run one solver, timing only the solver call.

    Returns ``(placement or None, nodes_explored, runtime_ms, status)``.
    """
    solver = Solver(solver)
    t0 = time.perf_counter()
    try:
        if solver is Solver.EXACT:
            budget = config.exact_node_budget if problem.search_space_size() > BRUTEFORCE_LIMIT else None
            placement, stats = solve_exact(problem, node_budget=budget)
            status = "ok" if stats.proven_optimal else "budget"
        elif solver is Solver.GREEDY:
            placement, stats = solve_greedy(problem, config.greedy_delay_check)
            status = "ok"
        else:
            ga = dataclasses.replace(config.ga, seed=child_seed(seed, config.ga.seed))
            placement, stats = solve_ga(problem, ga)
            status = "ok"
    except (Infeasible, SearchBudgetExceeded) as exc:
        runtime = (time.perf_counter() - t0) * 1e3
        explored = exc.stats.nodes_explored if exc.stats is not None else 0
        status = "infeasible" if isinstance(exc, Infeasible) else "budget"
        return None, explored, runtime, status
    runtime = (time.perf_counter() - t0) * 1e3
    return placement, stats.nodes_explored, runtime, status


def _exact_allowed(config: RunConfig, vehicle_count: int, skipped: list[str]) -> bool:
    if config.force_exact:
        return True
    if config.scenario is Builtin.LARGE:
        skipped.append(f"EXACT skipped for LARGE scenario at {vehicle_count} vehicles (use force_exact)")
        return False
    probe = instantiate(config.spec_for(vehicle_count, child_seed(config.master_seed, vehicle_count, 0)))
    if probe.search_space_size() <= BRUTEFORCE_LIMIT:
        return True
    try:
        _, stats = solve_exact(probe, node_budget=config.exact_node_budget)
    except Infeasible:
        return True
    except SearchBudgetExceeded:
        stats = None
    if stats is None or not stats.proven_optimal:
        skipped.append(
            f"EXACT skipped at {vehicle_count} vehicles: search exceeds {config.exact_node_budget} nodes (use force_exact)"
        )
        return False
    return True


class _HistogramAccumulator:
    def __init__(self, bin_width: float):
        self.bin_width = bin_width
        self.counts: dict[tuple, np.ndarray] = {}

    def add(self, key, samples: np.ndarray):
        if samples.size == 0:
            return
        bins = np.floor(samples / self.bin_width).astype(np.int64)
        counts = np.bincount(bins)
        acc = self.counts.get(key)
        if acc is None or acc.size < counts.size:
            grown = np.zeros(counts.size if acc is None else max(acc.size, counts.size), dtype=np.int64)
            if acc is not None:
                grown[: acc.size] = acc
            acc = grown
        acc[: counts.size] += counts
        self.counts[key] = acc

    def histograms(self) -> dict:
        out = {}
        for key, counts in sorted(self.counts.items()):
            nz = np.flatnonzero(counts)
            lo, hi = nz[0], nz[-1] + 1
            edges = np.arange(lo, hi + 1) * self.bin_width
            out[key] = Histogram(edges, counts[lo:hi] / counts.sum())
        return out


def run_sweep(config: RunConfig) -> SweepSummary:
    """Run every (vehicle count, repetition, solver) combination and aggregate.

    Infeasible runs are kept in ``runs`` with ``feasible=0`` and left out of
    the averages.  If ``config.output_dir`` is set, writes ``runs.csv``,
    ``summary.csv`` and ``histograms/<solver>_<type>_<vehicles>.csv`` there.
    """
    runs: list[dict] = []
    skipped: list[str] = []
    hist = _HistogramAccumulator(config.bin_width_ms)
    type_ids: list[str] | None = None

    for n in config.vehicle_counts:
        solvers = [s for s in config.solvers if s is not Solver.EXACT or _exact_allowed(config, n, skipped)]
        for rep in range(config.repetitions):
            seed = child_seed(config.master_seed, n, rep)
            problem = instantiate(config.spec_for(n, seed))
            if type_ids is None:
                type_ids = [t.id for t in problem.types]
            for solver in solvers:
                placement, explored, runtime, status = run_solver(solver, problem, config, seed)
                report = experiment_report(problem, placement, solver.value, seed, runtime, explored, status)
                for t, samples in report.per_type_delay_samples_ms.items():
                    hist.add((solver.value, t, n), samples)
                row = {
                    "vehicle_count": n,
                    "repetition": rep,
                    "seed": seed,
                    "solver": solver.value,
                    "n_nodes": len(problem.nodes),
                    "n_instances": len(problem.instances),
                }
                flat = report.flat(type_ids)
                del flat["solver"], flat["seed"], flat["vehicle_count"]
                row.update(flat)
                runs.append(row)
    for note in skipped:
        log.warning(note)

    order = {s: k for k, s in enumerate(Solver)}
    runs.sort(key=lambda r: (r["vehicle_count"], r["repetition"], order[Solver(r["solver"])]))
    summary = _summarize(runs, type_ids or [])
    result = SweepSummary(runs, summary, hist.histograms(), skipped)
    if config.output_dir is not None:
        write_outputs(result, config.output_dir, json_mirror=config.json_mirror)
    return result


def _summarize(runs: list[dict], type_ids: list[str]) -> list[dict]:
    metrics = ["aggregate_avg_delay_ms", *(f"avg_delay_{t}_ms" for t in type_ids), *(f"util_{r}" for r in RESOURCES)]
    metrics += ["nodes_explored", "runtime_ms"]
    groups: dict[tuple, list[dict]] = {}
    for r in runs:
        groups.setdefault((r["vehicle_count"], r["solver"]), []).append(r)
    order = {s.value: k for k, s in enumerate(Solver)}
    out = []
    for (n, solver), rows in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        ok = [r for r in rows if r["feasible"]]
        row = {"vehicle_count": n, "solver": solver, "runs": len(rows), "feasible_runs": len(ok)}
        for m in metrics:
            values = np.array([r[m] for r in ok], dtype=float)
            row[f"{m}_mean"] = float(values.mean()) if values.size else math.nan
            row[f"{m}_std"] = float(values.std(ddof=1)) if values.size > 1 else (0.0 if values.size else math.nan)
        out.append(row)
    return out


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(rows: list[dict], path: Path) -> None:
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})


def write_outputs(result: SweepSummary, out_dir: Path, json_mirror: bool = False) -> None:
    out_dir = Path(out_dir)
    hdir = out_dir / "histograms"
    hdir.mkdir(parents=True, exist_ok=True)
    write_csv(result.runs, out_dir / "runs.csv")
    write_csv(result.summary, out_dir / "summary.csv")
    for (solver, t, n), h in result.histograms.items():
        (hdir / f"{solver}_{t}_{n}.csv").write_text(h.to_csv())
    if json_mirror:
        (out_dir / "runs.json").write_text(json.dumps(result.runs, indent=1, allow_nan=True))
        (out_dir / "summary.json").write_text(json.dumps(result.summary, indent=1, allow_nan=True))


def strip_runtime_columns(csv_text: str) -> str:
    """Drop runtime columns so outputs of two identical sweeps can be compared byte for byte."""
    lines = list(csv.reader(csv_text.splitlines()))
    if not lines:
        return ""
    keep = [k for k, name in enumerate(lines[0]) if name not in RUNTIME_COLUMNS]
    return "\n".join(",".join(line[k] for k in keep) for line in lines) + "\n"


def validate_placement_file(problem_path, placement_path) -> tuple[FeasibilityReport, float | None]:
    """Check an externally produced placement against a problem file.

    Returns the feasibility report and the objective (``None`` when the
    assignment is not total).
    """
    problem = load_problem(problem_path)
    placement = load_placement(placement_path)
    report = check_feasibility(problem, placement)
    try:
        objective = evaluate_objective(problem, placement)
    except (AssignmentIncomplete, DegenerateProblem):
        objective = None
    return report, objective
