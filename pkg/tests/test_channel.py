import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from backhaul_sched.channel import (AntennaPattern, ChannelParams, Link, LinkBudget, antenna_gain,
                                    antenna_gain_db, noise_power, received_power, shannon_rate,
                                    slot_rate)
from backhaul_sched.model import generate_topology

from conftest import make_topology

P = ChannelParams()
PAT = AntennaPattern.from_beamwidth(30.0)

# independent closed forms
G0_DB = 20 * math.log10(1.6162 / math.sin(math.radians(15.0)))
GSL_DB = -0.4111 * math.log(30.0) - 10.579


def test_gain_boresight():
    assert float(antenna_gain_db(PAT, 0.0)) == pytest.approx(G0_DB, rel=1e-9)
    assert G0_DB == pytest.approx(15.91, abs=0.01)


def test_gain_half_power():
    assert float(antenna_gain_db(PAT, 15.0)) == pytest.approx(G0_DB - 3.01, rel=1e-9)


def test_gain_sidelobe():
    assert float(antenna_gain_db(PAT, 90.0)) == pytest.approx(GSL_DB, rel=1e-9)
    assert GSL_DB == pytest.approx(-11.98, abs=0.01)
    assert PAT.main_lobe_deg / 2 == pytest.approx(39.0)


def test_gain_shape():
    th = np.linspace(0, PAT.main_lobe_deg / 2, 200)
    g = antenna_gain_db(PAT, th)
    assert (np.diff(g) <= 0).all()
    beyond = antenna_gain_db(PAT, np.linspace(39.01, 180, 50))
    assert np.all(beyond == GSL_DB)
    with pytest.raises(ValueError):
        antenna_gain_db(PAT, 181.0)


def test_noise():
    n = noise_power(P)
    assert 10 * math.log10(n) == pytest.approx(-134 + 10 * math.log10(1200), abs=1e-9)
    assert 10 * math.log10(n) == pytest.approx(-103.21, abs=0.01)
    assert n == pytest.approx(4.79e-11, rel=1e-3)
    assert noise_power(ChannelParams(bandwidth_hz=2400e6)) == pytest.approx(2 * n, rel=1e-12)
    assert noise_power(ChannelParams(noise_dbm_per_mhz=None)) == 0.0


def two_nodes(d):
    return make_topology([(10, 50), (10 + d, 50)])


def test_received_power_example():
    t = two_nodes(50.0)
    p = received_power(P, t, 0, 1, 1, 0)
    # hand calculation
    k = (0.005 / (4 * math.pi)) ** 2
    g0 = (1.6162 / math.sin(math.radians(15))) ** 2
    assert k == pytest.approx(1.583e-7, rel=1e-3)
    assert g0 == pytest.approx(38.99, rel=1e-3)
    assert p == pytest.approx(1000 * g0 * g0 * k / 2500, rel=1e-12)
    assert p == pytest.approx(9.6e-5, rel=0.01)


def test_received_power_inverse_square():
    t = make_topology([(0, 50), (25, 50), (50, 50)])
    near = received_power(P, t, 0, 1, 1, 0)
    far = received_power(P, t, 0, 2, 2, 0)
    assert far == pytest.approx(near / 4, rel=1e-12)


def test_interference_equals_signal_when_aligned():
    t = two_nodes(30.0)
    assert received_power(ChannelParams(mui_factor=1.0), t, 0, 1, 1, 0) == \
        received_power(P, t, 0, 1, 1, 0)
    # rho scales only unaligned pairs
    t3 = make_topology([(0, 0), (30, 0), (30, 30)])
    half = ChannelParams(mui_factor=0.5)
    assert received_power(half, t3, 0, 2, 1, 0) == pytest.approx(
        0.5 * received_power(P, t3, 0, 2, 1, 0), rel=1e-12)


def test_received_power_errors_and_blockage():
    t = two_nodes(30.0)
    with pytest.raises(ValueError):
        received_power(P, t, 0, 1, 0, 1)
    assert received_power(P, t, 0, 1, 1, 0, frozenset({frozenset((0, 1))})) == 0.0


def test_rate_example():
    r = float(shannon_rate(P, 2.0e6 * noise_power(P)))
    assert r == pytest.approx(0.5 * 1.2e9 * math.log2(1 + 2.0e6), rel=1e-12)
    assert r == pytest.approx(12.6e9, rel=0.01)
    t = two_nodes(50.0)
    assert slot_rate(P, t, Link(0, 1)) == pytest.approx(12.6e9, rel=0.01)


def test_identical_geometry_equal_rates():
    t = make_topology([(10, 10), (40, 10), (10, 70), (40, 70)])
    assert slot_rate(P, t, Link(0, 1)) == pytest.approx(slot_rate(P, t, Link(2, 3)), rel=1e-12)


def test_offset_reciprocity():
    # swapping tx and rx roles gives the same pair of angles, so the same power
    t = make_topology([(5, 5), (60, 20), (30, 80), (90, 90)])
    assert received_power(P, t, 0, 2, 1, 3) == pytest.approx(received_power(P, t, 1, 3, 0, 2), rel=1e-12)


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_slot_rate_monotone_under_interferers(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 100, size=(8, 2))
    t = make_topology(pts)
    links = [Link(0, 1), Link(2, 3), Link(4, 5), Link(6, 7)]
    prev = slot_rate(P, t, links[0])
    assert prev > 0
    for j in range(1, 4):
        cur = slot_rate(P, t, links[0], links[1:j + 1])
        assert cur <= prev
        prev = cur


def test_link_budget_matches_direct_calls():
    rng = np.random.default_rng(0)
    t = generate_topology(4)
    n = len(t.nodes)
    links = []
    while len(links) < 12:
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        if Link(a, b) not in links:
            links.append(Link(a, b))
    bud = LinkBudget(P, t, links)
    assert len(bud.signal) == 12
    for _ in range(50):
        k = int(rng.integers(1, 5))
        act = [links[i] for i in rng.choice(12, k, replace=False)]
        if any(x.shares_node(y) for i, x in enumerate(act) for y in act[i + 1:]):
            continue
        got = bud.rates(act)
        for i, l in enumerate(act):
            want = slot_rate(P, t, l, [o for o in act if o != l])
            assert got[i] == pytest.approx(want, rel=1e-12)


def test_link_budget_two_hops_and_blockage():
    t = make_topology([(10, 10), (80, 10)], [(45, 30)])
    hops = [Link(0, 2), Link(2, 1)]
    bud = LinkBudget(P, t, hops + [Link(0, 1)], frozenset({frozenset((0, 1))}))
    assert bud.signal[bud.index[Link(0, 1)]] == 0.0
    assert bud.free_rate(Link(0, 1)) == 0.0
    # node 2 transmits into its own receiver
    assert bud.interference(Link(2, 1), Link(0, 2)) == math.inf
    # 0 -> 1 is the blocked pair
    assert bud.interference(Link(0, 2), Link(2, 1)) == 0.0
