from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctmn import scenarios
from ctmn.core import compute_theta, product_form
from ctmn.statespace import enumerate_states
from ctmn.throughput import node_throughput
from ctmn.topology import Node, build_from_pairs

from oracles import bonding_throughput, plc


def analyze(sid, overrides=None):
    nodes, g = scenarios.build(sid, overrides)
    space = enumerate_states(g)
    dist = product_form(space, compute_theta(nodes))
    return space, dist, node_throughput(space, dist, nodes)


# exact values of the bonding closed forms at E[T]=0.1 ms, E[B]=50 us, E[L]=12000 bits:
# phi = 85/4, airtimes 48/85, 56/85, 42/85, 12/85, 1/85
BONDING_MBPS = {
    "A": 48 / 85 * 120.0,
    "B": 56 / 85 * 120.0,
    "C": 42 / 85 * 240.0,
    "D": 12 / 85 * 480.0,
    "E": 1 / 85 * 960.0,
}


def test_bonding_frozen_values_match_exact_oracle():
    x, phi = bonding_throughput(12000, Fraction("0.0001"), Fraction("0.00005"))
    assert phi == Fraction(85, 4)
    for k, v in BONDING_MBPS.items():
        assert float(x[k]) / 1e6 == pytest.approx(v, rel=1e-15)
    assert x["A"] == x["D"]


def test_bonding_throughput():
    _, _, report = analyze("wlan_bonding")
    for k, v in BONDING_MBPS.items():
        assert report[k] / 1e6 == pytest.approx(v, rel=1e-12)
    assert round(report["A"] / 1e6, 2) == 67.76
    assert round(report["E"] / 1e6, 2) == 11.29
    assert abs(report["A"] - report["D"]) / report["A"] < 1e-12
    assert report["C"] > report["B"] > report["A"]
    assert report["E"] == min(report.throughput)


def test_vehicular_pos2_equal():
    _, _, r = analyze("vehicular_pos2", {"eb": 1.7e-3})
    assert r["A"] == pytest.approx(r["B"], rel=1e-14) == pytest.approx(r["D"], rel=1e-14)


def test_plc_symmetry_and_typo_state():
    space, dist, r = analyze("plc_chain", {"eb": 2e-3})
    assert r["A"] == pytest.approx(r["E"], rel=1e-14)
    assert r["B"] == pytest.approx(r["D"], rel=1e-14)
    # B's airtime accumulates B and BE (BD is not a feasible state)
    theta = compute_theta(scenarios.build("plc_chain", {"eb": 2e-3})[0])
    pi = plc(*theta)
    assert r.airtime_of("B") == pytest.approx(pi["B"] + pi["BE"], rel=1e-12)
    assert r.airtime_of("A") == pytest.approx(pi["A"] + pi["AD"] + pi["AE"], rel=1e-12)
    assert r.airtime_of("C") == pytest.approx(pi["C"], rel=1e-12)


def test_starving_node_has_no_throughput():
    nodes = [Node("A", 1e12, 1.0, 1.0), Node("B", 1.0, 1.0, 1.0)]
    space = enumerate_states(build_from_pairs(nodes, [("A", "B")]))
    r = node_throughput(space, product_form(space, compute_theta(nodes)), nodes)
    assert r["A"] < 1e-11
    assert r.total == pytest.approx(r["A"] + r["B"])


@given(st.floats(0.01, 100))
def test_vehicular_pos1_ordering(theta):
    _, _, r = analyze("vehicular_pos1", {"eb": 3e-3 / theta})
    assert r["B"] == pytest.approx(r["D"], rel=1e-14)
    assert r["B"] > r["A"]


@given(st.floats(0.01, 100))
def test_plc_bottleneck(theta):
    _, _, r = analyze("plc_chain", {"eb": 1359.02e-6 / theta})
    assert r["C"] <= min(r["A"], r["B"], r["D"], r["E"])


def test_vehicular_starvation():
    _, _, r = analyze("vehicular_pos1", {"eb": 3e-6})
    assert r.airtime_of("A") < 0.01


@given(st.sampled_from([s.value for s in scenarios.ScenarioId]), st.floats(1e-6, 1e-1))
def test_report_invariants(sid, eb):
    nodes, g = scenarios.build(sid, {"eb": eb})
    space = enumerate_states(g)
    dist = product_form(space, compute_theta(nodes))
    r = node_throughput(space, dist, nodes)
    assert np.all((r.airtime >= 0) & (r.airtime <= 1 + 1e-15))
    members = space.membership()
    for i, n in enumerate(nodes):
        assert r.airtime[i] == pytest.approx(dist.pi[members[:, i]].sum(), rel=1e-14, abs=1e-300)
        assert r.throughput[i] == pytest.approx(n.packet_len_mean * n.service_rate * r.airtime[i], rel=1e-15)
