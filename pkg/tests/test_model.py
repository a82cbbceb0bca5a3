import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from backhaul_sched.model import (FrameConfig, Role, Scenario, ScenarioParams, distance,
                                  generate_flows, generate_topology, make_scenario)


def test_topology_defaults():
    t = generate_topology(7)
    assert len(t.bs_ids) == 10
    assert all(t.role(i) is Role.BS for i in range(10))
    assert t.relay_ids == list(range(10, len(t.nodes)))
    assert ((t.positions >= 0) & (t.positions <= 100)).all()


def test_zero_intensity():
    t = generate_topology(3, n_bs=2, relay_mean=0.0)
    assert len(t.bs_ids) == 2 and t.relay_ids == []


def test_topology_deterministic():
    assert generate_topology(11) == generate_topology(11)
    assert np.array_equal(generate_topology(11).positions, generate_topology(11).positions)
    assert generate_topology(11) != generate_topology(12)


@given(st.integers(0, 2**32 - 1), st.floats(1.0, 500.0))
@settings(max_examples=50, deadline=None)
def test_area_containment(seed, side):
    t = generate_topology(seed, area_side=side)
    assert ((t.positions >= 0) & (t.positions <= side)).all()


def test_relay_count_mean():
    counts = [len(generate_topology(s).relay_ids) for s in range(10_000)]
    assert abs(np.mean(counts) - 30.0) < 0.05 * 30.0


def test_flows_example():
    t = generate_topology(1)
    flows = generate_flows(2, t, 10, (1e9, 3e9), 5)
    assert len(flows) == 10
    assert sum(f.blocked for f in flows) == 5
    assert all(1e9 <= f.qos <= 3e9 for f in flows)
    assert all(f.src != f.dst and f.src in t.bs_ids and f.dst in t.bs_ids for f in flows)


def test_flows_blocked_extremes():
    t = generate_topology(1)
    assert not any(f.blocked for f in generate_flows(2, t, n_blocked=0))
    assert all(f.blocked for f in generate_flows(2, t, n_blocked=10))
    with pytest.raises(ValueError, match="blocked > flows"):
        generate_flows(2, t, n_blocked=11)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_blocked_sets_nested(seed):
    t = generate_topology(seed)
    sets = [{f.flow_id for f in generate_flows(seed, t, n_blocked=b) if f.blocked} for b in range(11)]
    for b in range(11):
        assert len(sets[b]) == b
    assert all(sets[b] <= sets[b + 1] for b in range(10))


def test_distance():
    assert distance((0, 0), (3, 4)) == 5.0
    assert distance((2.5, 7.0), (2.5, 7.0)) == 0.0
    assert distance((0, 0), (100, 100)) == pytest.approx(math.sqrt(20000), rel=1e-15)


@given(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)),
       st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)))
def test_distance_symmetric(a, b):
    assert distance(a, b) == distance(b, a)
    assert (distance(a, b) == 0) == (a == b)


def test_frame_superframe():
    f = FrameConfig()
    assert f.superframe == pytest.approx(850e-6 + 3000 * 18e-6, rel=1e-15)


def test_scenario_json_round_trip(tmp_path):
    sc = make_scenario(5, 4)
    p = tmp_path / "s.json"
    sc.save(p)
    back = Scenario.load(p)
    assert back == sc
    assert json.loads(p.read_text())["frame"] == {"K": 3000, "slot_us": 18.0, "sched_us": 850.0}


def test_make_scenario_paired_across_blocked():
    a, b = make_scenario(9, 2), make_scenario(9, 7)
    assert a.topology == b.topology
    assert [(f.src, f.dst, f.qos) for f in a.flows] == [(f.src, f.dst, f.qos) for f in b.flows]


def test_scenario_rejects_relay_endpoint():
    sc = make_scenario(0, 0, ScenarioParams(n_flows=2))
    relay = sc.topology.relay_ids[0]
    bad = sc.flows[0].__class__(0, relay, sc.flows[0].dst, 1e9)
    with pytest.raises(ValueError, match="not a base station"):
        Scenario(sc.topology, (bad,))
