import pytest

from backhaul_sched.model import FlowSpec, FrameConfig, Node, Role, Scenario, Topology


def make_topology(bs, relays=(), side=100.0):
    """Nodes from coordinate lists: BSs first, then relays."""
    nodes = [Node(i, Role.BS, float(x), float(y)) for i, (x, y) in enumerate(bs)]
    nodes += [Node(len(bs) + j, Role.RELAY, float(x), float(y)) for j, (x, y) in enumerate(relays)]
    return Topology(tuple(nodes), side)


def make_scenario_from(topo, ends, qos=2e9, blocked=(), frame=FrameConfig(), **kw):
    qs = qos if isinstance(qos, (list, tuple)) else [qos] * len(ends)
    flows = tuple(FlowSpec(i, s, d, q, i in blocked) for i, ((s, d), q) in enumerate(zip(ends, qs)))
    return Scenario(topo, flows, frame, **kw)


@pytest.fixture
def line3():
    # three BSs in a row, 20 m apart
    return make_topology([(10, 50), (30, 50), (50, 50)])
