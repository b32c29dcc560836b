"""Exact placement: depth-first branch-and-bound, and a brute-force enumerator used as its oracle."""

from __future__ import annotations

import itertools
import math
import time

from .model import (
    Infeasible,
    Placement,
    PlacementError,
    PlacementProblem,
    SolveStats,
    capacity_slack,
    check_feasibility,
    evaluate_objective,
)

BRUTEFORCE_LIMIT = 10**7


class SearchSpaceTooLarge(PlacementError):
    pass


class SearchBudgetExceeded(PlacementError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


def solve_exact(problem: PlacementProblem, node_budget: int | None = None) -> tuple[Placement, SolveStats]:
    """Minimum aggregate-delay placement by branch-and-bound.

    Instances are branched in order of ascending delay threshold (then input
    order), trying admissible nodes cheapest-first.  A node is admissible for
    an instance when its worst vehicle delay is within the threshold, the
    instance still fits its remaining capacity, and it hosts no other instance
    of the same type.  Instances of one type are interchangeable, so they are
    forced onto increasing node positions; this keeps exactly one
    representative of each symmetric family, the lexicographically smallest.

    The bound adds, for every unassigned instance, the cheapest mean delay
    among nodes passing its delay check, ignoring capacity.  A subtree is cut
    only when its bound is strictly above the incumbent, so ties are still
    resolved towards the lexicographically smallest assignment vector.

    ``stats.nodes_explored`` counts fathomed search nodes: complete
    assignments scored, subtrees cut by the bound, and branches rejected as
    inadmissible.  Each corresponds to a distinct set of total assignments, so
    the count never exceeds ``|C| ** |S|``.

    With ``node_budget`` set, the search stops after that many fathomed nodes
    and returns the incumbent with ``proven_optimal=False``; if it has none,
    ``SearchBudgetExceeded`` is raised.
    """
    t0 = time.perf_counter()
    stats = SolveStats()
    n_inst, n_nodes = len(problem.instances), len(problem.nodes)

    if n_inst == 0:
        stats.nodes_explored = 1
        stats.proven_optimal = True
        stats.runtime_ms = (time.perf_counter() - t0) * 1e3
        return Placement({}, 0.0), stats

    mean = [float(x) for x in problem.node_mean_delay]
    worst = problem.node_max_delay
    thr = problem.instance_threshold
    tidx = [int(x) for x in problem.instance_type_index]
    demand = [tuple(float(x) for x in row) for row in problem.instance_demand]
    cap = problem.node_capacity
    limit = [tuple(float(x) for x in row) for row in cap + capacity_slack(cap)]

    order = sorted(range(n_inst), key=lambda s: (thr[s], s))
    candidates = []
    min_cost = []
    for s in order:
        ok = [c for c in range(n_nodes) if worst[c] <= thr[s]]
        ok.sort(key=lambda c: (mean[c], c))
        candidates.append(ok)
        min_cost.append(mean[ok[0]] if ok else math.inf)
    if math.isinf(max(min_cost)):
        stats.nodes_explored = 1
        stats.runtime_ms = (time.perf_counter() - t0) * 1e3
        raise Infeasible("some instance has no node within its delay threshold", stats=stats)

    load = [[0.0, 0.0, 0.0] for _ in range(n_nodes)]
    hosted = [set() for _ in range(n_nodes)]  # type indices on each node
    last_pos = {}  # type index -> node position of its latest instance on the path
    costs: list[float] = []
    assign = [-1] * n_inst

    best_obj = math.inf
    best_vec: tuple[int, ...] | None = None
    explored = 0
    stopped = False

    def dfs(depth: int) -> None:
        nonlocal best_obj, best_vec, explored, stopped
        s = order[depth]
        u = tidx[s]
        d0, d1, d2 = demand[s]
        floor_pos = last_pos.get(u, -1)
        rest = min_cost[depth + 1 :]
        for c in candidates[depth]:
            if stopped or (node_budget is not None and explored >= node_budget):
                stopped = True
                return
            ld = load[c]
            lim = limit[c]
            if c <= floor_pos or u in hosted[c] or ld[0] + d0 > lim[0] or ld[1] + d1 > lim[1] or ld[2] + d2 > lim[2]:
                explored += 1
                continue
            costs.append(mean[c])
            if depth + 1 == n_inst:
                explored += 1
                obj = math.fsum(costs)
                assign[s] = c
                vec = tuple(assign)
                if obj < best_obj or (obj == best_obj and vec < best_vec):
                    best_obj, best_vec = obj, vec
            elif math.fsum(costs + rest) > best_obj:
                explored += 1
            else:
                assign[s] = c
                ld[0] += d0
                ld[1] += d1
                ld[2] += d2
                hosted[c].add(u)
                prev = last_pos.get(u)
                last_pos[u] = c
                dfs(depth + 1)
                if prev is None:
                    del last_pos[u]
                else:
                    last_pos[u] = prev
                hosted[c].discard(u)
                ld[0] -= d0
                ld[1] -= d1
                ld[2] -= d2
            assign[s] = -1
            costs.pop()

    dfs(0)
    stats.nodes_explored = explored
    stats.proven_optimal = not stopped
    stats.runtime_ms = (time.perf_counter() - t0) * 1e3
    if best_vec is None:
        if stopped:
            raise SearchBudgetExceeded(f"no incumbent within {node_budget} search nodes", stats=stats)
        raise Infeasible(stats=stats)
    placement = Placement.from_vector(problem, best_vec)
    return placement, stats


def solve_bruteforce(problem: PlacementProblem, limit: int = BRUTEFORCE_LIMIT) -> tuple[Placement, SolveStats]:
    """Enumerate every total assignment, keep the cheapest feasible one.

    Assignments are visited in lexicographic order of their node-position
    vector and only a strictly better objective replaces the incumbent, so
    ties go to the lexicographically smallest vector.
    """
    size = problem.search_space_size()
    if size > limit:
        raise SearchSpaceTooLarge(f"{len(problem.nodes)}^{len(problem.instances)} = {size} assignments exceeds {limit}")
    t0 = time.perf_counter()
    stats = SolveStats()
    best = None
    for vec in itertools.product(range(len(problem.nodes)), repeat=len(problem.instances)):
        stats.nodes_explored += 1
        candidate = Placement({s.id: problem.nodes[k].id for s, k in zip(problem.instances, vec)})
        if check_feasibility(problem, candidate):
            continue
        obj = evaluate_objective(problem, candidate)
        if best is None or obj < best[0]:
            best = (obj, candidate)
    stats.runtime_ms = (time.perf_counter() - t0) * 1e3
    if best is None:
        raise Infeasible(stats=stats)
    stats.proven_optimal = True
    return Placement(best[1].assignment, best[0]), stats

