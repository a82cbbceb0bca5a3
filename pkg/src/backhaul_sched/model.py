"""Physical scenario: nodes, flows, superframe timing and seeded generators."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .channel import ChannelParams


class Role(str, Enum):
    BS = "bs"
    RELAY = "relay"


@dataclass(frozen=True)
class Node:
    index: int
    role: Role
    x: float
    y: float


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    area_side: float
    positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not any(n.role is Role.BS for n in self.nodes):
            raise ValueError("topology needs at least one base station")
        if [n.index for n in self.nodes] != list(range(len(self.nodes))):
            raise ValueError("node indices must be 0..N-1 in order")
        for n in self.nodes:
            if not (0.0 <= n.x <= self.area_side and 0.0 <= n.y <= self.area_side):
                raise ValueError(f"node {n.index} lies outside the area")
        pos = np.array([[n.x, n.y] for n in self.nodes], dtype=float).reshape(-1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def bs_ids(self) -> list[int]:
        return [n.index for n in self.nodes if n.role is Role.BS]

    @property
    def relay_ids(self) -> list[int]:
        return [n.index for n in self.nodes if n.role is Role.RELAY]

    def role(self, i: int) -> Role:
        return self.nodes[i].role

    def distance(self, a: int, b: int) -> float:
        na, nb = self.nodes[a], self.nodes[b]
        return math.hypot(na.x - nb.x, na.y - nb.y)


@dataclass(frozen=True)
class FrameConfig:
    num_slots: int = 3000
    slot_us: float = 18.0
    sched_us: float = 850.0

    def __post_init__(self):
        if self.num_slots < 1 or self.slot_us <= 0 or self.sched_us < 0:
            raise ValueError(f"invalid frame config {self}")

    @property
    def slot_time(self) -> float:
        return self.slot_us * 1e-6

    @property
    def scheduling_time(self) -> float:
        return self.sched_us * 1e-6

    @property
    def superframe(self) -> float:
        return self.scheduling_time + self.num_slots * self.slot_time


@dataclass(frozen=True)
class FlowSpec:
    flow_id: int
    src: int
    dst: int
    qos: float  # bits/s
    blocked: bool = False

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"flow {self.flow_id}: src == dst")
        if self.qos <= 0:
            raise ValueError(f"flow {self.flow_id}: qos must be positive")


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    flows: tuple[FlowSpec, ...]
    frame: FrameConfig = FrameConfig()
    channel: ChannelParams = ChannelParams()
    seed: int = 0

    def __post_init__(self):
        n = len(self.topology.nodes)
        for f in self.flows:
            for end in (f.src, f.dst):
                if not 0 <= end < n or self.topology.role(end) is not Role.BS:
                    raise ValueError(f"flow {f.flow_id}: endpoint {end} is not a base station")
        if [f.flow_id for f in self.flows] != list(range(len(self.flows))):
            raise ValueError("flow ids must be 0..F-1 in order")

    @property
    def blocked_pairs(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset((f.src, f.dst)) for f in self.flows if f.blocked)

    def to_dict(self) -> dict:
        return {
            "area_side": self.topology.area_side,
            "nodes": [{"id": n.index, "role": n.role.value, "x": n.x, "y": n.y}
                      for n in self.topology.nodes],
            "flows": [{"id": f.flow_id, "src": f.src, "dst": f.dst,
                       "qos_bps": f.qos, "blocked": f.blocked} for f in self.flows],
            "frame": {"K": self.frame.num_slots, "slot_us": self.frame.slot_us,
                      "sched_us": self.frame.sched_us},
            "channel": asdict(self.channel),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Scenario:
        nodes = tuple(Node(int(n["id"]), Role(n["role"]), float(n["x"]), float(n["y"]))
                      for n in doc["nodes"])
        flows = tuple(FlowSpec(int(f["id"]), int(f["src"]), int(f["dst"]),
                               float(f["qos_bps"]), bool(f["blocked"])) for f in doc["flows"])
        fr = doc["frame"]
        frame = FrameConfig(int(fr["K"]), float(fr["slot_us"]), float(fr["sched_us"]))
        channel = ChannelParams(**doc.get("channel", {}))
        return cls(Topology(nodes, float(doc["area_side"])), flows, frame, channel,
                   int(doc.get("seed", 0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        return cls.from_dict(json.loads(Path(path).read_text()))


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def generate_topology(seed: int, n_bs: int = 10, relay_mean: float = 30.0,
                      area_side: float = 100.0) -> Topology:
    """BSs uniform in the square; relay count ~ Poisson(relay_mean), positions uniform."""
    if n_bs < 2 or relay_mean < 0 or area_side <= 0:
        raise ValueError("need n_bs >= 2, relay_mean >= 0, area_side > 0")
    rng = np.random.default_rng(seed)
    bs = rng.uniform(0.0, area_side, size=(n_bs, 2))
    n_relay = int(rng.poisson(relay_mean))
    relays = rng.uniform(0.0, area_side, size=(n_relay, 2))
    nodes = [Node(i, Role.BS, float(x), float(y)) for i, (x, y) in enumerate(bs)]
    nodes += [Node(n_bs + j, Role.RELAY, float(x), float(y)) for j, (x, y) in enumerate(relays)]
    return Topology(tuple(nodes), float(area_side))


def generate_flows(seed: int, topology: Topology, n_flows: int = 10,
                   qos_range: tuple[float, float] = (1e9, 3e9),
                   n_blocked: int = 0) -> tuple[FlowSpec, ...]:
    """Random BS pairs with uniform QoS; ``n_blocked`` of them marked blocked.

    The blocked subset is the prefix of one random permutation, so for a fixed
    seed the blocked sets are nested as ``n_blocked`` grows.
    """
    if n_flows < 1:
        raise ValueError("n_flows must be >= 1")
    if not 0 <= n_blocked <= n_flows:
        raise ValueError(f"blocked > flows ({n_blocked} > {n_flows})")
    bs = topology.bs_ids
    if len(bs) < 2:
        raise ValueError("need at least two base stations")
    rng = np.random.default_rng(seed)
    ends = []
    for _ in range(n_flows):
        s, d = rng.choice(len(bs), size=2, replace=False)
        ends.append((bs[int(s)], bs[int(d)]))
    qos = rng.uniform(qos_range[0], qos_range[1], size=n_flows)
    blocked = set(rng.permutation(n_flows)[:n_blocked].tolist())
    return tuple(FlowSpec(i, s, d, float(q), i in blocked)
                 for i, ((s, d), q) in enumerate(zip(ends, qos)))


@dataclass(frozen=True)
class ScenarioParams:
    n_bs: int = 10
    relay_mean: float = 30.0
    area_side: float = 100.0
    n_flows: int = 10
    qos_range: tuple[float, float] = (1e9, 3e9)
    frame: FrameConfig = FrameConfig()
    channel: ChannelParams = ChannelParams()


def make_scenario(seed: int, n_blocked: int, params: ScenarioParams = ScenarioParams()) -> Scenario:
    topo_seed, flow_seed = np.random.SeedSequence(seed).generate_state(2)
    topo = generate_topology(int(topo_seed), params.n_bs, params.relay_mean, params.area_side)
    flows = generate_flows(int(flow_seed), topo, params.n_flows, params.qos_range, n_blocked)
    return Scenario(topo, flows, params.frame, params.channel, seed)
