"""Exhaustive optimum for tiny instances (at most a few flows and slots).

The search walks slots in order and, per slot, every combination of at most
one hop per flow that shares no node. A relay's second hop opens only once the
first hop has met the demand, a hop stops once it meets the demand, and bits
are booked with the same per-slot accounting as the heuristic scheduler.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, LinkBudget
from .model import FrameConfig, Scenario, generate_flows, generate_topology
from .relay_selection import PathAssignment, select_relays
from .scheduler import (ACTIVE, DONE, ScheduleMatrix, budget_for, make_progress, reached,
                        run_schedule, slots_to_reach)

MAX_FLOWS = 3
MAX_SLOTS = 8


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TinyInstance:
    scenario: Scenario
    paths: PathAssignment


@dataclass
class OracleResult:
    matrix: ScheduleMatrix
    completed: int
    throughput_bps: float
    nodes: int


def generate_tiny_instance(seed: int, max_flows: int = MAX_FLOWS, max_slots: int = MAX_SLOTS,
                           beta: float = 0.53) -> TinyInstance:
    rng = np.random.default_rng(seed)
    n_flows = int(rng.integers(1, max_flows + 1))
    k = int(rng.integers(1, max_slots + 1))
    n_blocked = int(rng.integers(0, n_flows + 1))
    s_topo, s_flow = (int(x) for x in rng.integers(0, 2**31, size=2))
    topo = generate_topology(s_topo, n_bs=4, relay_mean=4.0, area_side=60.0)
    # no scheduling phase, so demand maps to about 0.2K..0.6K slots per hop
    flows = generate_flows(s_flow, topo, n_flows, (0.3e9, 8e9), n_blocked)
    scenario = Scenario(topo, flows, FrameConfig(k, 18.0, 0.0), ChannelParams(), seed)
    return TinyInstance(scenario, select_relays(scenario.channel, topo, flows, beta))


def _check_size(inst: TinyInstance, max_flows: int, max_slots: int) -> None:
    if len(inst.scenario.flows) > max_flows or inst.scenario.frame.num_slots > max_slots:
        raise ValueError(f"instance exceeds the oracle budget ({max_flows} flows, {max_slots} slots)")


def solve_optimal(inst: TinyInstance, node_budget: int = 2_000_000, max_flows: int = MAX_FLOWS,
                  max_slots: int = MAX_SLOTS) -> OracleResult:
    """Maximise completed flows; ties go to higher system throughput, then to
    the first schedule in enumeration order."""
    _check_size(inst, max_flows, max_slots)
    sc = inst.scenario
    frame = sc.frame
    K, dt = frame.num_slots, frame.slot_time
    budget = budget_for(sc, inst.paths)
    progress = make_progress(sc, inst.paths, budget, drop_over_budget=False)
    flows = [p for p in progress if p.hops]
    F = len(sc.flows)
    need = {p.flow_id: p.need for p in flows}
    hops = {p.flow_id: p.hops for p in flows}
    free = {(p.flow_id, h): budget.free_rate(l) * dt for p in flows for h, l in enumerate(p.hops)}

    bits = {(p.flow_id, h): 0.0 for p in flows for h in range(len(p.hops))}
    best = {"I": -1, "tp": -1.0, "configs": None}
    trail: list[tuple[tuple[int, int], ...]] = []
    seen: set = set()
    nodes = 0

    def complete(fid):
        return all(reached(bits[fid, h], need[fid]) for h in range(len(hops[fid])))

    def delivered():
        return sum(bits[p.flow_id, len(p.hops) - 1] for p in flows)

    def options():
        per_flow = []
        for p in flows:
            fid = p.flow_id
            opts = [None]
            for h in range(len(p.hops)):
                if reached(bits[fid, h], need[fid]):
                    continue
                if h == 1 and not reached(bits[fid, 0], need[fid]):
                    continue
                opts.append((fid, h))
            per_flow.append(opts)
        out = []
        for combo in itertools.product(*per_flow):
            units = tuple(u for u in combo if u is not None)
            if not units:
                continue
            used = [n for fid, h in units for n in hops[fid][h]]
            if len(used) == len(set(used)):
                out.append(units)
        out.sort(key=lambda u: (-len(u), u))
        return out

    def bound(slot):
        left = K - slot
        ub_i, ub_tp = 0, 0.0
        for p in flows:
            fid = p.flow_id
            slots = sum(slots_to_reach(bits[fid, h], need[fid], free[fid, h]) for h in range(len(p.hops)))
            ub_i += slots <= left
            last = len(p.hops) - 1
            b = bits[fid, last]
            ub_tp += b if reached(b, need[fid]) else b + left * free[fid, last]
        return ub_i, ub_tp

    def leaf():
        i_val = sum(complete(p.flow_id) for p in flows)
        tp = delivered()
        if (i_val, tp) > (best["I"], best["tp"]):
            best.update(I=i_val, tp=tp, configs=list(trail))

    def dfs(slot):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise OracleBudgetExceeded(f"more than {node_budget} search nodes")
        key = (slot, tuple(round(bits[u], 3) for u in sorted(bits)))
        if key in seen:
            return
        seen.add(key)
        if slot == K:
            leaf()
            return
        ub_i, ub_tp = bound(slot)
        if ub_i < best["I"] or (ub_i == best["I"] and ub_tp <= best["tp"]):
            return
        opts = options()
        if not opts:
            leaf()
            return
        for units in opts:
            links = [hops[fid][h] for fid, h in units]
            per = budget.rates(links) * dt
            for u, p in zip(units, per):
                bits[u] += float(p)
            trail.append(units)
            dfs(slot + 1)
            trail.pop()
            for u, p in zip(units, per):
                bits[u] -= float(p)
        # an idle slot here is equivalent to ending the schedule early
        leaf()

    dfs(0)
    matrix = _matrix_from(best["configs"] or [], F, K, budget, hops, need, dt)
    return OracleResult(matrix, best["I"], best["tp"] / frame.superframe, nodes)


def _matrix_from(configs, F: int, K: int, budget: LinkBudget, hops, need, dt) -> ScheduleMatrix:
    m = ScheduleMatrix.empty(F, K)
    acc: dict[tuple[int, int], float] = {}
    finished: set[int] = set()
    for i, units in enumerate(configs):
        per = budget.rates([hops[fid][h] for fid, h in units]) * dt
        for (fid, h), p in zip(units, per):
            m.state[fid, i] = ACTIVE
            m.hop[fid, i] = h + 1
            acc[fid, h] = acc.get((fid, h), 0.0) + float(p)
        for fid in hops:
            if fid not in finished and all(reached(acc.get((fid, h), 0.0), need[fid])
                                           for h in range(len(hops[fid]))):
                finished.add(fid)
                m.state[fid, i + 1:] = DONE
    return m


@dataclass
class GapRecord:
    seed: int
    n_flows: int
    n_slots: int
    oracle_completed: int
    heuristic_completed: int

    @property
    def gap(self) -> int:
        return self.oracle_completed - self.heuristic_completed


def oracle_gap(n_instances: int = 200, master_seed: int = 0, max_flows: int = MAX_FLOWS,
               max_slots: int = MAX_SLOTS, sigma: float = 0.01, beta: float = 0.53) -> list[GapRecord]:
    out = []
    for k in range(n_instances):
        seed = int(np.random.SeedSequence([master_seed, k]).generate_state(1)[0])
        inst = generate_tiny_instance(seed, max_flows, max_slots, beta)
        opt = solve_optimal(inst, max_flows=max_flows, max_slots=max_slots)
        heur = run_schedule(inst.scenario, inst.paths, sigma)
        out.append(GapRecord(seed, len(inst.scenario.flows), inst.scenario.frame.num_slots,
                             opt.completed, heur.metrics.completed_count))
    return out


def gap_summary(records) -> dict:
    gaps = np.array([r.gap for r in records], dtype=float)
    return {"instances": len(records), "mean_gap": float(gaps.mean()) if len(gaps) else 0.0,
            "max_gap": float(gaps.max()) if len(gaps) else 0.0,
            "heuristic_above_oracle": int((gaps < 0).sum())}
