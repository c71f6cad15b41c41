import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netsecopt.attack_graph import Capability, Exploit, augment_with_targets, build
from netsecopt.risk_measures import hybrid, path, reach

from helpers import best_path, random_graph


def test_toy_targets_reachable_when_everything_is_routed(toy_graph):
    r = reach(toy_graph)
    assert {"4:1", "6:1"} <= r.reachable
    assert r.value == pytest.approx(210.0)
    assert r.normalized == pytest.approx(1.0)


def test_toy_severing_gateway_connection_cuts_exploit_zero(toy_graph):
    r = reach(toy_graph, [("0:2", "net:0>3:A")])
    assert "ex0" not in r.reachable
    assert not {"3:1", "4:1", "6:1"} & r.reachable


def test_all_severed_leaves_start(toy_graph):
    r = reach(toy_graph, toy_graph.edges)
    assert r.reachable == {"sigma", "0:2"}
    assert r.value == 0.0


def test_reach_threshold_disables_weak_exploits():
    caps = [Capability("a", 1, 1.0), Capability("b", 1, 2.0)]
    g = build(caps, [Exploit("x", probability=0.3)], [("a:1", "x")], [("x", "b:1")], ["a:1"])
    assert "b:1" in reach(g).reachable
    assert "b:1" not in reach(g, theta=0.5).reachable


def chain_graph(probs, impact=1.0):
    caps = [Capability("s", 1, 0.0)] + [Capability(f"c{k}", 1, impact)
                                        for k in range(1, len(probs) + 1)]
    ex = [Exploit(f"x{k}", probability=p) for k, p in enumerate(probs, 1)]
    pre = [(caps[k - 1].id, f"x{k}") for k in range(1, len(probs) + 1)]
    grant = [(f"x{k}", caps[k].id) for k in range(1, len(probs) + 1)]
    return build(caps, ex, pre, grant, ["s:1"])


def test_path_single_chain():
    g = augment_with_targets(chain_graph([0.5]))
    assert path(g) == pytest.approx(0.5)


def test_path_takes_best_of_parallel_chains():
    caps = [Capability("s", 1, 0.0), Capability("a", 1, 1.0), Capability("b", 1, 1.0),
            Capability("t", 1, 1.0)]
    ex = [Exploit("x", probability=0.3), Exploit("y", probability=0.4),
          Exploit("u", probability=1.0), Exploit("v", probability=1.0)]
    pre = [("s:1", "x"), ("s:1", "y"), ("a:1", "u"), ("b:1", "v")]
    grant = [("x", "a:1"), ("y", "b:1"), ("u", "t:1"), ("v", "t:1")]
    g = build(caps, ex, pre, grant, ["s:1"])
    # only t carries impact, so every path must end there
    g = augment_with_targets(g, {"t:1": 1.0})
    assert path(g) == pytest.approx(0.4)


def test_path_without_route_is_zero():
    caps = [Capability("s", 1, 0.0), Capability("a", 1, 1.0), Capability("b", 1, 0.0)]
    g = build(caps, [Exploit("x")], [("b:1", "x")], [("x", "a:1")], ["s:1"])
    assert path(augment_with_targets(g)) == 0.0


def test_path_requires_augmented_graph():
    with pytest.raises(ValueError):
        path(chain_graph([0.5]))


def test_path_ignores_and_semantics():
    # the only route to the valuable capability runs through an AND exploit
    # whose second prerequisite is unreachable
    caps = [Capability("s", 1, 0.0), Capability("dead", 1, 0.0), Capability("t", 1, 10.0)]
    g = build(caps, [Exploit("x", logic="AND", probability=0.8)],
              [("s:1", "x"), ("dead:1", "x")], [("x", "t:1")], ["s:1"])
    g = augment_with_targets(g)
    assert path(g) == pytest.approx(0.8)
    assert "x" not in reach(g).reachable


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_path_matches_path_enumeration(seed, cut_share):
    rng = np.random.default_rng(seed)
    g = augment_with_targets(random_graph(rng, max_nodes=10))
    severed = [e for e in g.edges if rng.random() < cut_share * 0.5]
    assert path(g, severed) == pytest.approx(best_path(g, severed), rel=1e-9, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_in_severing(seed):
    rng = np.random.default_rng(seed)
    g = augment_with_targets(random_graph(rng, max_nodes=14))
    small = [e for e in g.edges if rng.random() < 0.2]
    large = small + [e for e in g.edges if rng.random() < 0.3]
    assert reach(g, large).reachable <= reach(g, small).reachable
    p0, p1, p2 = path(g), path(g, small), path(g, large)
    assert p0 <= 1.0
    assert p0 >= p1 - 1e-15 and p1 >= p2 - 1e-15


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_hybrid_in_unit_interval(seed, beta):
    rng = np.random.default_rng(seed)
    g = augment_with_targets(random_graph(rng, max_nodes=12))
    severed = [e for e in g.edges if rng.random() < 0.3]
    h = hybrid(reach(g, severed).normalized, path(g, severed), beta)
    assert 0.0 <= h <= 1.0


def test_hybrid_rejects_bad_beta():
    with pytest.raises(ValueError):
        hybrid(0.5, 0.5, 1.5)


def test_severed_weight_is_epsilon():
    g = augment_with_targets(chain_graph([0.5]))
    assert path(g, [("s:1", "x1")], epsilon=1e-4) == pytest.approx(1e-4)
    assert math.log(path(g, [("s:1", "x1")])) == pytest.approx(math.log(1e-6))
