"""Command line entry point: ``v2xplace {gen,solve,validate,sweep}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .exact import solve_bruteforce, solve_exact
from .ga import GaConfig, solve_ga
from .greedy import DelayCheck, solve_greedy
from .harness import RunConfig, Solver, run_sweep, validate_placement_file
from .model import Infeasible, PlacementError, load_problem, save_placement, save_problem
from .scenario import Builtin, ScenarioSpec, builtin_scenario, instantiate


def _add_ga_flags(p):
    g = p.add_argument_group("GA settings (override the config file)")
    g.add_argument("--ga-population", type=int, dest="population_size")
    g.add_argument("--ga-generations", type=int, dest="generations")
    g.add_argument("--ga-tournament", type=int, dest="tournament_size")
    g.add_argument("--ga-crossover", type=float, dest="crossover_rate")
    g.add_argument("--ga-mutation", type=float, dest="mutation_rate")
    g.add_argument("--ga-penalty", type=float, dest="penalty_weight")
    g.add_argument("--ga-seed", type=int, dest="ga_seed")


def _ga_overrides(args, base: GaConfig) -> GaConfig:
    changes = {
        k: getattr(args, k)
        for k in ("population_size", "generations", "tournament_size", "crossover_rate", "mutation_rate", "penalty_weight")
        if getattr(args, k) is not None
    }
    if args.ga_seed is not None:
        changes["seed"] = args.ga_seed
    return dataclasses.replace(base, **changes)


def cmd_gen(args) -> int:
    if args.config:
        spec = ScenarioSpec.load(args.config)
        if args.vehicles is not None or args.seed is not None:
            spec = spec.replace(
                vehicle_count=args.vehicles if args.vehicles is not None else spec.vehicle_count,
                seed=args.seed if args.seed is not None else spec.seed,
            )
    else:
        spec = builtin_scenario(args.scenario, args.vehicles or 20, args.seed or 0)
    problem = instantiate(spec)
    if args.output == "-":
        json.dump(problem.to_dict(), sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        save_problem(problem, args.output)
    return 0


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    solver = args.solver.upper()
    try:
        if solver == "EXACT":
            placement, stats = solve_exact(problem, node_budget=args.node_budget)
        elif solver == "BRUTEFORCE":
            placement, stats = solve_bruteforce(problem)
        elif solver == "GREEDY":
            placement, stats = solve_greedy(problem, args.delay_check)
        else:
            placement, stats = solve_ga(problem, _ga_overrides(args, GaConfig()))
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    if args.output == "-":
        doc = placement.to_dict()
        doc["stats"] = stats.to_dict()
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        save_placement(placement, args.output, stats)
    return 0


def cmd_validate(args) -> int:
    report, objective = validate_placement_file(args.problem, args.placement)
    for v in report:
        print(v)
    print(f"objective_ms: {objective if objective is not None else 'n/a'}")
    print("feasible" if report.feasible else f"infeasible: {len(report)} violation(s)")
    return 0 if report.feasible else 1


def cmd_sweep(args) -> int:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {}
    if args.scenario:
        changes["scenario"] = Builtin(args.scenario)
    if args.vehicles:
        changes["vehicle_counts"] = tuple(args.vehicles)
    elif args.scenario:
        changes["vehicle_counts"] = ()
    if args.solvers:
        changes["solvers"] = tuple(Solver(s.upper()) for s in args.solvers)
    for name in ("repetitions", "master_seed", "output_dir", "exact_node_budget"):
        if getattr(args, name) is not None:
            changes[name] = getattr(args, name)
    if args.delay_check:
        changes["greedy_delay_check"] = DelayCheck(args.delay_check)
    if args.force_exact:
        changes["force_exact"] = True
    if args.json:
        changes["json_mirror"] = True
    changes["ga"] = _ga_overrides(args, config.ga)
    config = dataclasses.replace(config, **changes)
    if config.output_dir is None:
        config = dataclasses.replace(config, output_dir="results")
    result = run_sweep(config)
    for note in result.skipped:
        print(note, file=sys.stderr)
    infeasible = sum(1 for r in result.runs if not r["feasible"])
    print(f"{len(result.runs)} runs written to {config.output_dir} ({infeasible} infeasible)")
    return 1 if infeasible else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2xplace", description="V2X service placement experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a problem file from a scenario")
    p.add_argument("--scenario", choices=[b.value for b in Builtin], default="SMALL")
    p.add_argument("--config", help="ScenarioSpec JSON file (instead of --scenario)")
    p.add_argument("--vehicles", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", default="-", help="output path, '-' for stdout (default)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one problem file")
    p.add_argument("problem")
    p.add_argument("--solver", default="GREEDY", type=str.upper, choices=["EXACT", "BRUTEFORCE", "GREEDY", "GA"])
    p.add_argument("--delay-check", default="MAX", type=str.upper, choices=["MAX", "MEAN"])
    p.add_argument("--node-budget", type=int, help="branch-and-bound node budget (EXACT)")
    p.add_argument("-o", "--output", default="-")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a placement file against a problem file")
    p.add_argument("problem")
    p.add_argument("placement")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run an experiment sweep")
    p.add_argument("--config", help="RunConfig JSON file")
    p.add_argument("--scenario", choices=[b.value for b in Builtin])
    p.add_argument("--vehicles", type=int, nargs="+")
    p.add_argument("--solvers", nargs="+", type=str.upper, choices=[s.value for s in Solver])
    p.add_argument("--repetitions", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--delay-check", type=str.upper, choices=["MAX", "MEAN"])
    p.add_argument("--force-exact", action="store_true")
    p.add_argument("--exact-node-budget", type=int)
    p.add_argument("--json", action="store_true", help="also write runs.json and summary.json")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (PlacementError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
