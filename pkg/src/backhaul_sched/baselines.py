"""Comparison schemes: random relay choice, throughput-greedy STDMA and
QoS-aware independent-set scheduling (MQIS). STDMA and MQIS give blocked
flows no path."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .channel import LinkBudget
from .contention import ContentionGraph
from .model import Scenario, Topology
from .relay_selection import BACKHAUL, NO_PATH, Path, PathAssignment
from .scheduler import (FlowProgress, ScheduleMatrix, ScheduleResult, advance, budget_for,
                        make_progress, metrics_for, schedule_flows)


class Scheme(str, Enum):
    RAQS = "raqs"
    RANDOM_RELAY = "random"
    STDMA = "stdma"
    MQIS = "mqis"


def backhaul_only_paths(flows) -> PathAssignment:
    return {f.flow_id: NO_PATH if f.blocked else BACKHAUL for f in flows}


def random_relay_paths(seed: int, topology: Topology, flows) -> PathAssignment:
    """Each blocked flow gets a relay drawn uniformly from all relays; repeats allowed."""
    rng = np.random.default_rng(seed)
    relays = topology.relay_ids
    paths = {}
    for f in flows:
        if not f.blocked:
            paths[f.flow_id] = BACKHAUL
        elif not relays:
            paths[f.flow_id] = NO_PATH
        else:
            paths[f.flow_id] = Path("relay", relays[int(rng.integers(len(relays)))])
    return paths


def mqis_priority(f: int, g: ContentionGraph, progress: list[FlowProgress]) -> tuple:
    return (progress[f].current_xi, g.degree(f), f)


def mqis_schedule(scenario: Scenario, sigma: float, budget: LinkBudget | None = None) -> ScheduleResult:
    return schedule_flows(scenario, backhaul_only_paths(scenario.flows), sigma, mqis_priority, budget)


def stdma_select(budget: LinkBudget, progress: list[FlowProgress], pending) -> tuple[list[int], list[float]]:
    """Greedy by interference-free rate; keep an addition only if the slot's sum
    rate strictly grows. Returns the chosen flows and the accepted sum rates."""
    order = sorted(pending, key=lambda f: (-budget.free_rate(progress[f].current_link), f))
    chosen: list[int] = []
    used: set[int] = set()
    sums = [0.0]
    for f in order:
        link = progress[f].current_link
        if used & set(link):
            continue
        cand = sorted(chosen + [f])
        total = float(budget.rates([progress[g].current_link for g in cand]).sum())
        if total > sums[-1]:
            chosen = cand
            used |= set(link)
            sums.append(total)
    return chosen, sums


def stdma_schedule(scenario: Scenario, sigma: float | None = None,
                   budget: LinkBudget | None = None) -> ScheduleResult:
    """``sigma`` is accepted for a uniform interface and ignored."""
    paths = backhaul_only_paths(scenario.flows)
    frame = scenario.frame
    budget = budget or budget_for(scenario, paths)
    progress = make_progress(scenario, paths, budget, drop_over_budget=False)
    matrix = ScheduleMatrix.empty(len(scenario.flows), frame.num_slots)
    segments = []
    i = 0
    while i < frame.num_slots:
        pending = [p.flow_id for p in progress if p.hops and not p.completed]
        chosen, _ = stdma_select(budget, progress, pending)
        if not chosen:
            break
        seg, _ = advance(chosen, progress, budget, matrix, i, frame)
        segments.append(seg)
        i += seg.length
    return ScheduleResult(matrix, progress, metrics_for(progress, paths, frame), paths, budget,
                          segments)
