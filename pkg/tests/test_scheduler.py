import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from backhaul_sched.channel import ChannelParams, Link, LinkBudget
from backhaul_sched.contention import ContentionGraph
from backhaul_sched.model import FrameConfig, make_scenario
from backhaul_sched.relay_selection import BACKHAUL, NO_PATH, Path, select_relays
from backhaul_sched.scheduler import (ACTIVE, DONE, IDLE, FlowProgress, ScheduleMatrix,
                                      feasibility_check, greedy_independent_set, raqs_priority,
                                      run_schedule, slots_needed, sum_rate_lower_bound)

from conftest import make_scenario_from, make_topology

P = ChannelParams()
F0 = FrameConfig()


def test_xi_example():
    sf = 850e-6 + 3000 * 18e-6
    assert sf == pytest.approx(0.05485)
    assert slots_needed(2e9, 12.6e9, F0) == math.ceil(2e9 * sf / (12.6e9 * 18e-6)) == 484


def test_xi_edge_cases():
    assert slots_needed(1.0, 12.6e9, F0) == 1
    assert slots_needed(1e9, 0.0, F0) == math.inf
    # R dt K < q T  =>  xi > K
    r = 1e9
    q = r * 3000 * 18e-6 / sf_() * 1.001
    assert slots_needed(q, r, F0) > 3000


def sf_():
    return 850e-6 + 3000 * 18e-6


def test_solo_flow():
    t = make_topology([(10, 50), (60, 50)])
    sc = make_scenario_from(t, [(0, 1)], qos=2e9)
    res = run_schedule(sc, {0: BACKHAUL}, 0.01)
    xi = res.progress[0].xi[0]
    r = res.budget.free_rate(Link(0, 1))
    assert xi == math.ceil(2e9 * sf_() / (r * 18e-6))
    row = res.matrix.state[0]
    assert (row[:xi] == ACTIVE).all() and (row[xi:] == DONE).all()
    assert res.metrics.completed_count == 1
    assert res.metrics.system_throughput_bps == pytest.approx(xi * r * 18e-6 / sf_(), rel=1e-12)


def test_flow_over_budget_removed():
    t = make_topology([(10, 50), (60, 50)])
    sc = make_scenario_from(t, [(0, 1)], qos=30e9)
    res = run_schedule(sc, {0: BACKHAUL}, 0.01)
    assert res.progress[0].removed
    assert (res.matrix.state == IDLE).all()
    assert res.metrics.completed_count == 0


def test_node_sharing_flows_serialize():
    t = make_topology([(10, 50), (60, 50), (10, 90)])
    sc = make_scenario_from(t, [(0, 1), (0, 2)], qos=1e9)
    res = run_schedule(sc, {0: BACKHAUL, 1: BACKHAUL}, 1e10)
    act = res.matrix.state == ACTIVE
    assert not (act[0] & act[1]).any()
    assert res.metrics.completed_count == 2


def test_relay_hop_order():
    t = make_topology([(10, 50), (90, 50)], [(50, 55)])
    sc = make_scenario_from(t, [(0, 1)], qos=2e9, blocked={0})
    res = run_schedule(sc, {0: Path("relay", 2)}, 0.01)
    a = res.matrix.activity()[0]
    last1 = np.flatnonzero(a[0]).max()
    first2 = np.flatnonzero(a[1]).min()
    assert first2 > last1
    assert res.progress[0].completed


def test_second_hop_preferred():
    g = ContentionGraph({0: {1, 2}, 1: {0, 2}, 2: {0, 1}})
    progress = [
        FlowProgress(0, 1e9, [Link(0, 9), Link(9, 1)], 1.0, [5, 900], current_hop=2),
        FlowProgress(1, 1e9, [Link(2, 3)], 1.0, [3]),
        FlowProgress(2, 1e9, [Link(4, 5)], 1.0, [4]),
    ]
    assert greedy_independent_set(g, lambda v, h: raqs_priority(v, h, progress)) == [0]
    progress[0].current_hop = 1
    assert greedy_independent_set(g, lambda v, h: raqs_priority(v, h, progress)) == [1]


def seeded_runs(n, sigma=0.01):
    for k in range(n):
        sc = make_scenario(1000 + k, k % 11)
        paths = select_relays(sc.channel, sc.topology, sc.flows, 0.53)
        log = []
        res = run_schedule(sc, paths, sigma, on_rebuild=lambda *a: log.append(a))
        yield sc, paths, res, log


def test_schedule_properties():
    for sc, paths, res, log in seeded_runs(40):
        assert feasibility_check(res.matrix, paths, sc.flows).ok
        for i, graph, active, chosen in log:
            for a in chosen:
                assert not graph.adj[a] & (set(chosen) | set(active))
        # completion soundness from independently re-accumulated bits
        bits = {}
        for seg in res.segments:
            for f, l, r in zip(seg.flows, seg.links, seg.rates):
                bits[f, l] = bits.get((f, l), 0.0) + seg.length * r * sc.frame.slot_time
        for p in res.progress:
            met = bool(p.hops) and all(bits.get((p.flow_id, l), 0.0) >= p.need * (1 - 1e-9)
                                       for l in p.hops)
            assert met == p.completed
        # done is sticky
        for f in range(len(sc.flows)):
            d = np.flatnonzero(res.matrix.state[f] == DONE)
            if d.size:
                assert (res.matrix.state[f, d[0]:] == DONE).all()


def test_lower_bound_examples():
    t = make_topology([(0, 0), (10, 0), (0, 90), (10, 90)])
    links = [Link(0, 1), Link(2, 3)]
    bud = LinkBudget(P, t, links)
    assert sum_rate_lower_bound(bud, links[:1], 0.01) == pytest.approx(bud.free_rate(links[0]), rel=1e-12)
    quiet = LinkBudget(ChannelParams(mui_factor=0.0), t, links)
    assert sum_rate_lower_bound(quiet, links, 0.0) == pytest.approx(quiet.free_rates.sum(), rel=1e-12)
    with pytest.raises(ValueError):
        sum_rate_lower_bound(bud, links, 0.0)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1e-6, 1e-4, 1e-2]))
@settings(max_examples=20, deadline=None)
def test_lower_bound_holds_on_segments(seed, sigma):
    sc = make_scenario(seed, seed % 11)
    paths = select_relays(sc.channel, sc.topology, sc.flows, 0.53)
    res = run_schedule(sc, paths, sigma)
    for seg in res.segments:
        assert seg.rates.sum() >= sum_rate_lower_bound(res.budget, seg.links, sigma) * (1 - 1e-12)


def fixture_paths():
    from backhaul_sched.model import FlowSpec
    flows = [FlowSpec(0, 0, 1, 1e9, True), FlowSpec(1, 2, 3, 1e9), FlowSpec(2, 1, 4, 1e9, True)]
    return flows, {0: Path("relay", 9), 1: BACKHAUL, 2: NO_PATH}


def test_feasibility_flags_both_hops():
    flows, paths = fixture_paths()
    a = np.zeros((3, 2, 4), bool)
    a[0, 0, 1] = a[0, 1, 1] = True
    rep = feasibility_check(a, paths, flows)
    assert not rep.ok and any("both hops" in v for v in rep.violations)


def test_feasibility_flags_hop_order():
    flows, paths = fixture_paths()
    a = np.zeros((3, 2, 4), bool)
    a[0, 1, 0] = True
    a[0, 0, 2] = True
    rep = feasibility_check(a, paths, flows)
    assert any("hop 2" in v for v in rep.violations)


def test_feasibility_flags_other_rules():
    flows, paths = fixture_paths()
    a = np.zeros((3, 2, 4), bool)
    a[2, 0, 0] = True  # no path
    a[1, 1, 0] = True  # backhaul second hop
    rep = feasibility_check(a, paths, flows)
    assert len(rep.violations) == 2
    # node 9 shared by both hops of relay flow is fine across slots; node 1 clash is not
    flows2 = [flows[0], flows[1].__class__(1, 9, 3, 1e9)]
    paths2 = {0: Path("relay", 9), 1: BACKHAUL}
    b = np.zeros((2, 2, 3), bool)
    b[0, 0, 0] = b[1, 0, 0] = True
    assert any("share node 9" in v for v in feasibility_check(b, paths2, flows2).violations)
    m = ScheduleMatrix.empty(3, 4)
    m.state[1, :] = [ACTIVE, DONE, ACTIVE, DONE]
    m.hop[1, :] = [1, 0, 1, 0]
    assert any("after done" in v for v in feasibility_check(m, paths, flows).violations)


def test_empty_schedule_is_feasible():
    flows, paths = fixture_paths()
    assert feasibility_check(np.zeros((3, 2, 5), bool), paths, flows)
