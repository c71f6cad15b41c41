from collections import Counter

import pytest

from netsecopt.attack_graph import build
from netsecopt.benchmark_gen import (DEVICE_CAPACITY, GATEWAY, LINK_CAPACITY, BadPodCount,
                                     GenSpec, exploitable_count, fat_tree, gen_traffic,
                                     gen_vulnerabilities, generate)
from netsecopt.instance import Instance, attack_graph
from netsecopt.network import NetworkInstance, validate

# (pods, hosts, switches including the gateway, bidirectional links)
TABLE = [(4, 16, 21, 52), (6, 54, 46, 171), (8, 128, 81, 400), (10, 250, 126, 775),
         (12, 432, 181, 1332)]


def typed(n, types=("A", "B")):
    return NetworkInstance(n.routers, n.hosts, n.gateways, n.links, types, n.flows,
                           n.device_capacity)


@pytest.mark.parametrize("k,hosts,switches,links", TABLE)
def test_fat_tree_counts(k, hosts, switches, links):
    n = fat_tree(k)
    assert len(n.hosts) == hosts == k ** 3 // 4
    assert len(n.routers) == switches == 5 * k * k // 4 + 1
    assert len(n.links) == links == 3 * k ** 3 // 4 + k * k // 4
    assert all(l.capacity == LINK_CAPACITY for l in n.links)
    assert all(n.device_capacity[r] == DEVICE_CAPACITY for r in n.routers)
    assert sum(1 for l in n.links if GATEWAY in (l.a, l.b)) == (k // 2) ** 2


@pytest.mark.parametrize("k", [2, 3, 0, -4, 5])
def test_bad_pod_count(k):
    with pytest.raises(BadPodCount):
        fat_tree(k)
    with pytest.raises(BadPodCount):
        GenSpec(pods=k)


@pytest.mark.parametrize("field,value", [("flows_per_host", 2), ("traffic_type_count", 4),
                                         ("exploitable_host_pct", 25),
                                         ("vulns_per_host_avg", 0.5), ("seed", -1)])
def test_spec_rejects_out_of_range(field, value):
    with pytest.raises(ValueError):
        GenSpec(**{field: value})


def test_thousand_eighty_flows():
    spec = GenSpec(pods=6, flows_per_host=10)
    flows = gen_traffic(typed(fat_tree(6)), spec)
    assert len(flows) == 1080
    # every demand is followed by its reverse
    for a, b in zip(flows[::2], flows[1::2]):
        assert (a.src, a.dst, a.traffic_type, a.quantity, a.value) == \
            (b.dst, b.src, b.traffic_type, b.quantity, b.value)


def test_traffic_distribution():
    n = typed(fat_tree(12))
    internal = total = small = 0
    values = Counter()
    for seed in range(24):
        demands = gen_traffic(n, GenSpec(pods=12, flows_per_host=10, seed=seed))[::2]
        total += len(demands)
        internal += sum(f.src != GATEWAY and f.dst != GATEWAY for f in demands)
        small += sum(f.quantity <= 10.0 for f in demands)
        values.update(f.value for f in demands)
    assert total >= 100_000
    assert abs(internal / total - 0.70) <= 0.01
    # the egress rule only ever turns large sizes into small ones
    assert small / total >= 0.89
    assert set(values) == {1.0, 2.0, 3.0, 5.0, 25.0}
    assert all(abs(v / total - 0.2) < 0.01 for v in values.values())


def test_traffic_fits_host_uplinks():
    for seed in range(5):
        n = typed(fat_tree(6))
        flows = gen_traffic(n, GenSpec(pods=6, flows_per_host=10, seed=seed))
        out = Counter()
        for f in flows:
            out[f.src] += f.quantity
        assert max(v for h, v in out.items() if h != GATEWAY) <= LINK_CAPACITY + 1e-9


def test_precondition_histogram():
    n = typed(fat_tree(12))
    hist = Counter()
    for seed in range(10):
        _, _, pre, _ = gen_vulnerabilities(n, GenSpec(pods=12, exploitable_host_pct=50,
                                                      vulns_per_host_avg=5.0, seed=seed))
        hist.update(Counter(Counter(e for _, e in pre).values()))
    total = sum(hist.values())
    assert total >= 10_000
    for k, p in ((1, 0.5), (2, 0.25), (3, 0.25)):
        assert abs(hist[k] / total - p) <= 0.02


def test_exploitable_count():
    assert exploitable_count(16, 50) == 8
    assert exploitable_count(54, 10) == 5


def test_singles_spread_over_hosts():
    spec = GenSpec(pods=4, exploitable_host_pct=50, vulns_per_host_avg=2.0, seed=3)
    _, exploits, pre, grant = gen_vulnerabilities(typed(fat_tree(4)), spec)
    assert len(exploits) == 16
    n_pre = Counter(e for _, e in pre)
    single_hosts = [post.split(":")[0] for e, post in grant if n_pre[e] == 1]
    assert len(set(single_hosts)) == min(len(single_hosts), 16)
    for e, post in grant:
        # singles grant privilege 1, chained exploits privilege 2 on the same host
        assert post.endswith(":1") if n_pre[e] == 1 else post.endswith(":2")


def test_impact_scaling():
    caps, _, _, _ = gen_vulnerabilities(typed(fat_tree(4)), GenSpec(seed=5))
    by = {c.id: c for c in caps}
    for c in caps:
        if c.privilege == 1:
            v = c.impact / 0.4
            assert v == int(round(v)) and 1 <= round(v) <= 100
            zero = by[f"{c.device}:0:A"]
            assert zero.impact == pytest.approx(0.2 * v)
            if f"{c.device}:2" in by:
                assert by[f"{c.device}:2"].impact == pytest.approx(v)


def test_probabilities_clamped():
    _, exploits, _, _ = gen_vulnerabilities(typed(fat_tree(8)), GenSpec(
        pods=8, exploitable_host_pct=50, vulns_per_host_avg=5.0))
    assert all(1e-3 <= e.probability <= 1.0 for e in exploits)
    assert all(e.logic == "AND" for e in exploits)


@pytest.mark.parametrize("seed", range(4))
def test_generated_instances_are_well_formed(seed):
    inst = generate(GenSpec(seed=seed, exploitable_host_pct=40, vulns_per_host_avg=3.0))
    validate(inst.network)
    g = attack_graph(inst)
    assert g.augmented and g.sigma in g.nodes
    # vulnerability exploits only use capabilities that exist
    ids = {c.id for c in inst.capabilities}
    assert all(c in ids for c, _ in inst.prereq_edges)
    assert all(c in ids for _, c in inst.grant_edges)
    build(inst.capabilities, inst.exploits, inst.prereq_edges, inst.grant_edges, inst.start)


def test_chained_prerequisites_were_achievable():
    _, exploits, pre, grant = gen_vulnerabilities(typed(fat_tree(6)), GenSpec(
        pods=6, exploitable_host_pct=30, vulns_per_host_avg=4.0, seed=9))
    touched = set()
    order = [e.id for e in exploits]
    pre_of = {}
    for c, e in pre:
        pre_of.setdefault(e, []).append(c)
    post_of = dict(grant)
    for e in order:
        if len(pre_of[e]) > 1:
            assert all(c in touched for c in pre_of[e])
        touched.update(pre_of[e])
        touched.add(post_of[e])


def test_generation_is_deterministic():
    spec = GenSpec(pods=6, flows_per_host=3, seed=123456789)
    a, b = generate(spec).to_json(), generate(spec).to_json()
    assert a == b
    assert generate(GenSpec(pods=6, flows_per_host=3, seed=1)).to_json() != a
    assert Instance.from_json(a).to_json() == a


def test_streams_are_independent():
    a = generate(GenSpec(seed=4, flows_per_host=1))
    b = generate(GenSpec(seed=4, flows_per_host=3))
    assert a.exploits == b.exploits and a.capabilities == b.capabilities
