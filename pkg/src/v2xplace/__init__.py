"""Latency-aware placement of V2X services on core and edge compute nodes."""

from .exact import SearchBudgetExceeded, SearchSpaceTooLarge, solve_bruteforce, solve_exact
from .ga import GaConfig, GaStats, solve_ga
from .greedy import DelayCheck, solve_greedy
from .harness import RunConfig, Solver, SweepSummary, child_seed, run_sweep, validate_placement_file
from .metrics import (
    EmptyHistogram,
    ExperimentReport,
    Histogram,
    delay_histogram,
    experiment_report,
    per_type_avg_delay,
    utilization,
)
from .model import (
    AssignmentIncomplete,
    ComputeNode,
    ConstraintKind,
    DegenerateProblem,
    DelayMatrix,
    FeasibilityReport,
    Infeasible,
    InvalidProblem,
    Placement,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    ServiceName,
    SolveStats,
    Tier,
    UniqueServiceType,
    Violation,
    check_feasibility,
    evaluate_objective,
    load_placement,
    load_problem,
    save_placement,
    save_problem,
)
from .scenario import Builtin, InfeasibleSpec, InvalidSpec, ScenarioSpec, builtin_scenario, instantiate

__version__ = "0.1.0"
