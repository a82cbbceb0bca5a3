"""Contention graph over the current hops of flows."""
from __future__ import annotations

from dataclasses import dataclass, field

from .channel import ChannelParams, Link, LinkBudget, received_power


def in_contention(params: ChannelParams, topology, a: Link, b: Link, sigma: float,
                  blocked_pairs=frozenset()) -> bool:
    if a == b:
        raise ValueError("a link does not contend with itself")
    if a.shares_node(b):
        return True
    ab = received_power(params, topology, a.tx, a.rx, b.rx, b.tx, blocked_pairs)
    ba = received_power(params, topology, b.tx, b.rx, a.rx, a.tx, blocked_pairs)
    return max(ab, ba) > sigma


def _budget_contention(budget: LinkBudget, a: Link, b: Link, sigma: float) -> bool:
    if a.shares_node(b):
        return True
    ia, ib = budget.index[a], budget.index[b]
    return max(budget.cross[ia, ib], budget.cross[ib, ia]) > sigma


@dataclass
class ContentionGraph:
    adj: dict[int, set[int]] = field(default_factory=dict)
    sigma: float = 0.0

    def __len__(self):
        return len(self.adj)

    def __bool__(self):
        return bool(self.adj)

    def __contains__(self, v):
        return v in self.adj

    @property
    def vertices(self) -> list[int]:
        return sorted(self.adj)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in self.adj.items() for v in nb if u < v)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> set[int]:
        return set(self.adj[v])

    def copy(self) -> ContentionGraph:
        return ContentionGraph({v: set(nb) for v, nb in self.adj.items()}, self.sigma)

    def discard(self, vertices) -> None:
        vertices = set(vertices)
        for v in vertices:
            self.adj.pop(v, None)
        for nb in self.adj.values():
            nb -= vertices

    def subgraph(self, keep) -> ContentionGraph:
        keep = set(keep)
        return ContentionGraph({v: nb & keep for v, nb in self.adj.items() if v in keep}, self.sigma)

    def remove_closed_neighborhood(self, v: int) -> ContentionGraph:
        if v not in self.adj:
            raise KeyError(f"vertex {v} not in graph")
        g = self.copy()
        g.discard(self.adj[v] | {v})
        return g


def build_graph(budget: LinkBudget, current: dict[int, Link], sigma: float) -> ContentionGraph:
    """Vertices are flow ids, each standing for that flow's current hop."""
    ids = sorted(current)
    adj = {f: set() for f in ids}
    for i, f in enumerate(ids):
        for g in ids[i + 1:]:
            if _budget_contention(budget, current[f], current[g], sigma):
                adj[f].add(g)
                adj[g].add(f)
    return ContentionGraph(adj, sigma)
