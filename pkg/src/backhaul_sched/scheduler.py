"""Slot-by-slot concurrent scheduling of relay and backhaul paths with QoS tracking.

The loop is slot-synchronous, but between two rebuild events the active set
and therefore every rate is constant, so the engine advances directly to the
next slot in which some hop reaches its demand and fills the skipped columns
in one step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import Link, LinkBudget, link_budget
from .contention import ContentionGraph, build_graph
from .model import FrameConfig, Scenario
from .relay_selection import Path, PathAssignment

IDLE, ACTIVE, DONE = 0, 1, -1

# slack on the bits >= demand test so per-slot and per-segment sums agree
REL_TOL = 1e-12


def need_bits(qos: float, frame: FrameConfig) -> float:
    return qos * frame.superframe


def reached(bits: float, need: float) -> bool:
    return bits >= need * (1 - REL_TOL)


def slots_to_reach(bits: float, need: float, per_slot: float) -> float:
    """Fewest further slots at ``per_slot`` bits each until ``reached``; inf if never."""
    if reached(bits, need):
        return 0
    if not per_slot > 0:
        return math.inf
    n = max(1, math.ceil((need - bits) / per_slot))
    while not reached(bits + n * per_slot, need):
        n += 1
    while n > 1 and reached(bits + (n - 1) * per_slot, need):
        n -= 1
    return n


def slots_needed(qos: float, rate: float, frame: FrameConfig) -> float:
    """Planning estimate: ceil(q T_superframe / (R dt)); inf for a dead link."""
    return slots_to_reach(0.0, need_bits(qos, frame), rate * frame.slot_time)


@dataclass
class FlowProgress:
    flow_id: int
    qos: float
    hops: list[Link]
    need: float
    xi: list[float]
    bits: list[float] = field(default_factory=list)
    current_hop: int = 1
    completed: bool = False
    removed: bool = False

    def __post_init__(self):
        if not self.bits:
            self.bits = [0.0] * len(self.hops)

    @property
    def max_hop(self) -> int:
        return len(self.hops)

    @property
    def xi_total(self) -> float:
        return sum(self.xi) if self.xi else math.inf

    @property
    def current_link(self) -> Link:
        return self.hops[self.current_hop - 1]

    @property
    def current_xi(self) -> float:
        return self.xi[self.current_hop - 1]

    @property
    def schedulable(self) -> bool:
        return bool(self.hops) and not self.removed

    def throughput(self, frame: FrameConfig) -> list[float]:
        return [b / frame.superframe for b in self.bits]

    def delivered_bps(self, frame: FrameConfig) -> float:
        """Destination-side throughput: last hop of the path."""
        return self.bits[-1] / frame.superframe if self.bits else 0.0

    def hop_met(self, h: int) -> bool:
        return reached(self.bits[h - 1], self.need)


def flow_hops(flows, paths: PathAssignment) -> dict[int, list[Link]]:
    return {f.flow_id: paths[f.flow_id].hops(f) for f in flows}


def make_progress(scenario: Scenario, paths: PathAssignment, budget: LinkBudget,
                  drop_over_budget: bool = True) -> list[FlowProgress]:
    frame = scenario.frame
    out = []
    for f in scenario.flows:
        hops = paths[f.flow_id].hops(f)
        xi = [slots_needed(f.qos, budget.free_rate(h), frame) for h in hops]
        p = FlowProgress(f.flow_id, f.qos, hops, need_bits(f.qos, frame), xi)
        if drop_over_budget and p.xi_total > frame.num_slots:
            p.removed = True
        out.append(p)
    return out


def budget_for(scenario: Scenario, paths: PathAssignment) -> LinkBudget:
    links = [h for hops in flow_hops(scenario.flows, paths).values() for h in hops]
    return link_budget(scenario.channel, scenario.topology, links, scenario.blocked_pairs)


@dataclass
class ScheduleMatrix:
    state: np.ndarray  # F x K in {IDLE, ACTIVE, DONE}
    hop: np.ndarray  # F x K, hop number while ACTIVE else 0

    @classmethod
    def empty(cls, n_flows: int, n_slots: int) -> ScheduleMatrix:
        return cls(np.zeros((n_flows, n_slots), np.int8), np.zeros((n_flows, n_slots), np.int8))

    @property
    def shape(self):
        return self.state.shape

    def activity(self) -> np.ndarray:
        """Boolean (F, 2, K): [f, h-1, i] true when hop h of flow f runs in slot i."""
        on = self.state == ACTIVE
        return np.stack([on & (self.hop == 1), on & (self.hop == 2)], axis=1)

    def rows(self):
        """One tuple per slot: flow states followed by hop tags."""
        for i in range(self.state.shape[1]):
            yield tuple(int(v) for v in self.state[:, i]) + tuple(int(v) for v in self.hop[:, i])


@dataclass
class FlowRecord:
    flow_id: int
    path: str
    delivered_bps: float
    completed: bool


@dataclass
class MetricsReport:
    completed_count: int
    system_throughput_bps: float
    per_flow: list[FlowRecord]

    def to_dict(self) -> dict:
        return {"completed_count": self.completed_count,
                "system_throughput_bps": self.system_throughput_bps,
                "per_flow": [vars(r) for r in self.per_flow]}


def metrics_for(progress: list[FlowProgress], paths: PathAssignment, frame: FrameConfig) -> MetricsReport:
    recs = [FlowRecord(p.flow_id, str(paths[p.flow_id]), p.delivered_bps(frame), p.completed)
            for p in progress]
    return MetricsReport(sum(r.completed for r in recs), sum(r.delivered_bps for r in recs), recs)


@dataclass
class Segment:
    start: int
    length: int
    flows: tuple[int, ...]
    links: tuple[Link, ...]
    rates: np.ndarray


@dataclass
class ScheduleResult:
    matrix: ScheduleMatrix
    progress: list[FlowProgress]
    metrics: MetricsReport
    paths: PathAssignment
    budget: LinkBudget
    segments: list[Segment]


def advance(active: list[int], progress: list[FlowProgress], budget: LinkBudget,
            matrix: ScheduleMatrix, start: int, frame: FrameConfig,
            max_len: int | None = None) -> tuple[Segment, list[int]]:
    """Run ``active`` unchanged from slot ``start`` until some current hop meets
    its demand (or the frame ends). Returns the segment and the flows whose hop
    finished in its last slot; their DONE marks and hop advances are applied."""
    K = frame.num_slots
    links = tuple(progress[f].current_link for f in active)
    rates = budget.rates(links)
    per = rates * frame.slot_time
    n = K - start if max_len is None else min(max_len, K - start)
    for f, p in zip(active, per):
        pr = progress[f]
        n = min(n, slots_to_reach(pr.bits[pr.current_hop - 1], pr.need, float(p)))
    n = int(n)
    for f, p in zip(active, per):
        pr = progress[f]
        matrix.state[f, start:start + n] = ACTIVE
        matrix.hop[f, start:start + n] = pr.current_hop
        pr.bits[pr.current_hop - 1] += n * float(p)
    end = start + n
    finished = []
    for f in active:
        pr = progress[f]
        if pr.hop_met(pr.current_hop):
            finished.append(f)
            if pr.current_hop == pr.max_hop:
                pr.completed = True
                matrix.state[f, end:] = DONE
            else:
                pr.current_hop += 1
    return Segment(start, n, tuple(active), links, rates), finished


Priority = Callable[[int, ContentionGraph, list[FlowProgress]], tuple]


def raqs_priority(f: int, g: ContentionGraph, progress: list[FlowProgress]) -> tuple:
    """Second hops first, then lowest degree, then fewest slots for the hop, then id."""
    p = progress[f]
    return (p.current_hop != 2, g.degree(f), p.current_xi, f)


def greedy_independent_set(g: ContentionGraph, key) -> list[int]:
    """Repeatedly take the ``key``-minimal vertex and drop its closed neighbourhood.

    ``key(v, graph)`` sees the shrinking graph, so degrees are current.
    """
    g = g.copy()
    chosen = []
    while g:
        f = min(g.adj, key=lambda v: key(v, g))
        chosen.append(f)
        g.discard(g.adj[f] | {f})
    return chosen


def schedule_flows(scenario: Scenario, paths: PathAssignment, sigma: float,
                   priority: Priority = raqs_priority, budget: LinkBudget | None = None,
                   on_rebuild: Callable | None = None) -> ScheduleResult:
    frame = scenario.frame
    K = frame.num_slots
    budget = budget or budget_for(scenario, paths)
    progress = make_progress(scenario, paths, budget)
    matrix = ScheduleMatrix.empty(len(scenario.flows), K)
    live = [p.flow_id for p in progress if p.schedulable]
    active: list[int] = []
    segments = []
    i, rebuild = 0, True
    while i < K:
        if rebuild:
            current = {f: progress[f].current_link for f in live if not progress[f].completed}
            graph = build_graph(budget, current, sigma)
            invalid = set(active)
            for a in active:
                invalid |= graph.adj[a]
            g = graph.subgraph(set(current) - invalid)
            chosen = greedy_independent_set(g, lambda v, h: priority(v, h, progress))
            if on_rebuild is not None:
                on_rebuild(i, graph, active, chosen)
            active = sorted(active + chosen)
        if not active:
            break
        seg, finished = advance(active, progress, budget, matrix, i, frame)
        segments.append(seg)
        i += seg.length
        active = [f for f in active if f not in finished]
        rebuild = bool(finished)
    return ScheduleResult(matrix, progress, metrics_for(progress, paths, frame), paths, budget,
                          segments)


def run_schedule(scenario: Scenario, paths: PathAssignment, sigma: float,
                 budget: LinkBudget | None = None, on_rebuild=None) -> ScheduleResult:
    return schedule_flows(scenario, paths, sigma, raqs_priority, budget, on_rebuild)


def sum_rate_lower_bound(budget: LinkBudget, links, sigma: float) -> float:
    """Sum over the set of eta W log2(1 + S / (N0 W + (|V|-1) sigma))."""
    links = list(links)
    idx = [budget.index[l] for l in links]
    for a in idx:
        for b in idx:
            if a != b and budget.cross[a, b] > sigma:
                raise ValueError("pairwise interference exceeds sigma")
    p = budget.params
    sig = budget.signal[idx]
    denom = budget.noise + (len(links) - 1) * sigma
    return float(np.sum(p.efficiency * p.bandwidth_hz * np.log2(1 + sig / denom)))


@dataclass
class FeasibilityReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def feasibility_check(schedule: ScheduleMatrix | np.ndarray, paths: PathAssignment,
                      flows) -> FeasibilityReport:
    """Check a realized schedule against the half-duplex, same-path, hop-order
    and path-exclusivity constraints. Accepts a ScheduleMatrix or a raw
    (F, 2, K) boolean hop-activity array."""
    flows = list(flows)
    out = []
    state = None
    if isinstance(schedule, ScheduleMatrix):
        act = schedule.activity()
        state = schedule.state
    else:
        act = np.asarray(schedule, dtype=bool)
    F, _, K = act.shape
    hops = flow_hops(flows, paths)
    for f in flows:
        fid = f.flow_id
        a1, a2 = act[fid, 0], act[fid, 1]
        path: Path = paths[fid]
        if path.kind == "none" and (a1.any() or a2.any()):
            out.append(f"flow {fid}: transmits without a path")
        if path.kind == "backhaul" and a2.any():
            out.append(f"flow {fid}: second-hop activity on a backhaul path")
        both = np.flatnonzero(a1 & a2)
        if both.size:
            out.append(f"flow {fid}: both hops in slot {both[0]}")
        if path.kind == "relay" and a2.any():
            first2 = int(np.flatnonzero(a2)[0])
            if not a1[:first2].any() or a1[first2:].any():
                out.append(f"flow {fid}: hop 2 not strictly after hop 1 (slot {first2})")
        if state is not None:
            done = np.flatnonzero(state[fid] == DONE)
            if done.size and (state[fid, done[0]:] == ACTIVE).any():
                out.append(f"flow {fid}: active after done")
    flat = act.reshape(F * 2, K)
    cols, first = np.unique(flat, axis=1, return_index=True)
    for c in range(cols.shape[1]):
        used: dict[int, tuple[int, int]] = {}
        for row in np.flatnonzero(cols[:, c]):
            fid, h = divmod(int(row), 2)
            if h >= len(hops[fid]):
                continue
            link = hops[fid][h]
            for node in link:
                if node in used and used[node][0] != fid:
                    out.append(f"slot {first[c]}: flows {used[node][0]} and {fid} share node {node}")
                used.setdefault(node, (fid, h))
    return FeasibilityReport(out)
