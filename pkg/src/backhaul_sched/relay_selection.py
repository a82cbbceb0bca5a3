"""Relay choice for blocked flows: lens-region candidates, time-ratio filter and
repeated-relay elimination."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Link, aligned_rate
from .model import FlowSpec, Role, Topology


@dataclass(frozen=True)
class Path:
    kind: str  # "backhaul" | "relay" | "none"
    relay: int | None = None

    def __post_init__(self):
        if self.kind not in ("backhaul", "relay", "none"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if (self.kind == "relay") != (self.relay is not None):
            raise ValueError("relay paths and only relay paths carry a relay id")

    @property
    def max_hop(self) -> int:
        return {"backhaul": 1, "relay": 2, "none": 0}[self.kind]

    def hops(self, flow: FlowSpec) -> list[Link]:
        if self.kind == "backhaul":
            return [Link(flow.src, flow.dst)]
        if self.kind == "relay":
            return [Link(flow.src, self.relay), Link(self.relay, flow.dst)]
        return []

    def __str__(self):
        return f"relay:{self.relay}" if self.kind == "relay" else self.kind

    @classmethod
    def parse(cls, text: str) -> Path:
        if text.startswith("relay:"):
            return cls("relay", int(text.split(":", 1)[1]))
        return cls(text)


BACKHAUL = Path("backhaul")
NO_PATH = Path("none")

PathAssignment = dict[int, Path]


def lens_candidates(topology: Topology, flow: FlowSpec) -> list[int]:
    """Relays strictly closer than d(src, dst) to both endpoints."""
    relays = topology.relay_ids
    if not relays:
        return []
    pos = topology.positions
    d = topology.distance(flow.src, flow.dst)
    rp = pos[relays]
    d1 = np.hypot(*(rp - pos[flow.src]).T)
    d2 = np.hypot(*(rp - pos[flow.dst]).T)
    return [r for r, a, b in zip(relays, d1, d2) if a < d and b < d]


def time_ratio(params: ChannelParams, topology: Topology, flow: FlowSpec, relay: int) -> float:
    """(1/R_b) / (1/R_1 + 1/R_2) from interference-free rates, backhaul taken unobstructed."""
    if topology.role(relay) is not Role.RELAY:
        raise ValueError(f"node {relay} is not a relay")
    rb, r1, r2 = aligned_rate(params, [topology.distance(flow.src, flow.dst),
                                       topology.distance(flow.src, relay),
                                       topology.distance(relay, flow.dst)])
    if min(rb, r1, r2) <= 0 or not np.isfinite([rb, r1, r2]).all():
        raise ValueError("coincident nodes give a degenerate rate")
    return float((1 / rb) / (1 / r1 + 1 / r2))


@dataclass
class CandidateSets:
    can1: dict[int, list[int]] = field(default_factory=dict)
    # relay -> TR, ordered by TR descending (ties: lower relay id first)
    can2: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    can3: dict[int, int | None] = field(default_factory=dict)


def _ranked(pairs) -> list[tuple[int, float]]:
    return sorted(pairs, key=lambda p: (-p[1], p[0]))


def build_candidates(params: ChannelParams, topology: Topology, flows, beta: float) -> CandidateSets:
    if beta <= 0:
        raise ValueError("beta must be positive")
    out = CandidateSets()
    for f in flows:
        if not f.blocked:
            continue
        can1 = lens_candidates(topology, f)
        scored = [(r, time_ratio(params, topology, f, r)) for r in can1]
        can2 = _ranked((r, tr) for r, tr in scored if tr > beta)
        out.can1[f.flow_id] = can1
        out.can2[f.flow_id] = can2
        out.can3[f.flow_id] = can2[0][0] if can2 else None
    return out


def eliminate_repeats(candidates: CandidateSets, flows) -> PathAssignment:
    """Make relay assignments injective by pairwise conflict resolution.

    A flow with a single candidate keeps a contested relay over one with
    several; otherwise the higher TR wins (ties to the lower flow id). The
    loser drops the relay and moves to its best remaining candidate; if that
    one is held too, the new pair is resolved next. Flows that run out of
    candidates get no path.
    """
    can2 = {f: list(c) for f, c in candidates.can2.items()}
    tr = {f: dict(c) for f, c in can2.items()}
    assign: dict[int, int | None] = dict(candidates.can3)
    budget = sum(len(c) for c in can2.values()) + 1

    def holders(r):
        return sorted(f for f, a in assign.items() if a == r)

    def resolve(f1, f2, r):
        n1, n2 = len(can2[f1]), len(can2[f2])
        if (n1 == 1) == (n2 == 1):
            t1, t2 = tr[f1][r], tr[f2][r]
            winner = f1 if (t1, -f1) > (t2, -f2) else f2
        else:
            winner = f1 if n1 == 1 else f2
        loser = f2 if winner == f1 else f1
        can2[loser] = [p for p in can2[loser] if p[0] != r]
        assign[loser] = can2[loser][0][0] if can2[loser] else None
        return loser

    while True:
        contested = sorted({r for r in assign.values() if r is not None and len(holders(r)) > 1})
        if not contested:
            break
        r = contested[0]
        f1, f2 = holders(r)[:2]
        while True:
            budget -= 1
            if budget < 0:
                raise RuntimeError("repeated-relay elimination failed to terminate")
            loser = resolve(f1, f2, r)
            r = assign[loser]
            others = [f for f in holders(r) if f != loser] if r is not None else []
            if not others:
                break
            f1, f2 = sorted((others[0], loser))

    paths: PathAssignment = {}
    for f in flows:
        if not f.blocked:
            paths[f.flow_id] = BACKHAUL
        else:
            r = assign.get(f.flow_id)
            paths[f.flow_id] = Path("relay", r) if r is not None else NO_PATH
    return paths


def select_relays(params: ChannelParams, topology: Topology, flows, beta: float) -> PathAssignment:
    return eliminate_repeats(build_candidates(params, topology, flows, beta), flows)
