"""Greedy placement heuristic: least delay-tolerant service types first, each instance on the
closest node that can still take it."""

from __future__ import annotations

import enum
import time

from .model import Infeasible, Placement, PlacementProblem, SolveStats, capacity_slack


class DelayCheck(str, enum.Enum):
    MAX = "MAX"  # worst vehicle delay, as in the exact model
    MEAN = "MEAN"  # mean vehicle delay, the statistic the heuristic ranks nodes by


def solve_greedy(problem: PlacementProblem, delay_check: DelayCheck | str = DelayCheck.MAX) -> tuple[Placement, SolveStats]:
    """Place instances type by type in ascending order of delay threshold.

    Each type starts with every node as a candidate.  An instance takes the
    candidate with the lowest mean delay whose remaining capacity covers its
    demand and whose delay statistic (``delay_check``) is within the
    threshold; a rejected node is skipped for that instance only.  A node that
    accepts an instance is removed from the type's candidates, so no node
    hosts two instances of one type.

    ``stats.nodes_explored`` is the number of candidate checks made.  Raises
    ``Infeasible`` naming the first instance that runs out of candidates.
    """
    t0 = time.perf_counter()
    check = DelayCheck(delay_check)
    stats = SolveStats()
    if not problem.instances:
        stats.runtime_ms = (time.perf_counter() - t0) * 1e3
        return Placement({}, 0.0), stats

    mean = problem.node_mean_delay.tolist()
    stat = mean if check is DelayCheck.MEAN else problem.node_max_delay.tolist()
    # remaining capacity per node, slack already added
    remaining = (problem.node_capacity + capacity_slack(problem.node_capacity)).tolist()
    node_ids = [n.id for n in problem.nodes]
    by_closeness = sorted(range(len(problem.nodes)), key=lambda c: (mean[c], node_ids[c]))  # ties: lowest node id

    vector = [-1] * len(problem.instances)
    types = sorted(problem.types, key=lambda t: t.delay_threshold_ms)  # stable: input order on ties
    members = {t.id: [] for t in problem.types}
    for k, inst in enumerate(problem.instances):
        members[inst.type_ref].append(k)

    for t in types:
        d0, d1, d2 = t.demand.cpu, t.demand.memory, t.demand.storage
        threshold = t.delay_threshold_ms
        candidates = list(by_closeness)
        for k in members[t.id]:
            for pos, c in enumerate(candidates):
                stats.nodes_explored += 1
                rem = remaining[c]
                if stat[c] <= threshold and d0 <= rem[0] and d1 <= rem[1] and d2 <= rem[2]:
                    vector[k] = c
                    rem[0] -= d0
                    rem[1] -= d1
                    rem[2] -= d2
                    del candidates[pos]
                    break
            else:
                stats.runtime_ms = (time.perf_counter() - t0) * 1e3
                inst_id = problem.instances[k].id
                raise Infeasible(f"instance {inst_id} ({t.id}) fits no remaining node", instance=inst_id, stats=stats)

    placement = Placement.from_vector(problem, vector)
    stats.runtime_ms = (time.perf_counter() - t0) * 1e3
    return placement, stats
