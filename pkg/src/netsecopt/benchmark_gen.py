"""Seeded fat-tree instances with synthetic traffic and vulnerabilities.

All randomness comes from numpy's PCG64 bit generator seeded with
``[seed, stream]``; traffic and vulnerabilities use separate streams so that
changing one never perturbs the other.  Sampling order is fixed, so the same
:class:`GenSpec` yields byte-identical JSON on every platform.

Device naming for ``k`` pods::

    c{i}            core switches, i < (k/2)^2
    a{p}_{j}        aggregation switch j of pod p
    e{p}_{j}        edge switch j of pod p
    h{p}_{j}_{i}    host i under edge switch e{p}_{j}
    g0              gateway router, linked to every core switch
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .attack_graph import Capability, Exploit
from .instance import Instance
from .network import Flow, Link, NetworkInstance, validate

LINK_CAPACITY = 1000.0      # Mb/s
DEVICE_CAPACITY = 2000.0    # inbound plus outbound, 1 Gb/s each way
GATEWAY = "g0"
TYPE_NAMES = ("A", "B", "C")
FLOW_VALUES = (1, 2, 3, 5, 25)
INTERNAL_SHARE = 0.7
SMALL_SHARE = 0.9
SMALL_RANGE = (1.0, 10.0)       # Mb/s
LARGE_RANGE = (100.0, 1000.0)
PRIVILEGE_SCALE = (0.2, 0.4, 1.0)
PRECONDITION_COUNTS = (1, 2, 3)
PRECONDITION_PROBS = (0.5, 0.25, 0.25)
MIN_PROBABILITY = 1e-3

TRAFFIC_STREAM = 1
VULN_STREAM = 2


class BadPodCount(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    pods: int = 4
    flows_per_host: int = 1
    traffic_type_count: int = 2
    exploitable_host_pct: int = 20
    vulns_per_host_avg: float = 2.0
    seed: int = 0

    def __post_init__(self):
        _check_pods(self.pods)
        if self.flows_per_host not in (1, 3, 5, 10):
            raise ValueError("flows_per_host must be one of 1, 3, 5, 10")
        if self.traffic_type_count not in (1, 2, 3):
            raise ValueError("traffic_type_count must be 1, 2 or 3")
        if self.exploitable_host_pct not in (10, 20, 30, 40, 50):
            raise ValueError("exploitable_host_pct must be one of 10, 20, 30, 40, 50")
        if not 1.0 <= self.vulns_per_host_avg <= 5.0:
            raise ValueError("vulns_per_host_avg must lie in [1, 5]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


def _check_pods(k: int):
    if not isinstance(k, (int, np.integer)) or k < 4 or k % 2:
        raise BadPodCount(f"pod count must be an even integer >= 4, got {k!r}")


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([int(seed), stream]))


def fat_tree(k: int) -> NetworkInstance:
    _check_pods(k)
    half = k // 2
    cores = [f"c{i}" for i in range(half * half)]
    aggs, edges, hosts = [], [], []
    links = [Link(GATEWAY, c, LINK_CAPACITY) for c in cores]
    for p in range(k):
        pod_aggs = [f"a{p}_{j}" for j in range(half)]
        pod_edges = [f"e{p}_{j}" for j in range(half)]
        for j, a in enumerate(pod_aggs):
            links += [Link(a, cores[j * half + m], LINK_CAPACITY) for m in range(half)]
            links += [Link(a, e, LINK_CAPACITY) for e in pod_edges]
        for j, e in enumerate(pod_edges):
            hs = [f"h{p}_{j}_{i}" for i in range(half)]
            links += [Link(e, h, LINK_CAPACITY) for h in hs]
            hosts += hs
        aggs += pod_aggs
        edges += pod_edges
    routers = tuple([GATEWAY] + cores + aggs + edges)
    n = NetworkInstance(routers=routers, hosts=tuple(hosts), gateways=(GATEWAY,),
                        links=tuple(links), traffic_types=(), flows=(),
                        device_capacity={r: DEVICE_CAPACITY for r in routers})
    validate(n)
    return n


def _with(n: NetworkInstance, **kw) -> NetworkInstance:
    d = {f: getattr(n, f) for f in ("routers", "hosts", "gateways", "links", "traffic_types",
                                    "flows", "device_capacity")}
    d.update(kw)
    return NetworkInstance(**d)


def gen_traffic(n: NetworkInstance, spec: GenSpec) -> list:
    """Bidirectional demands, each emitted as a flow and its reverse."""
    rng = _rng(spec.seed, TRAFFIC_STREAM)
    types = TYPE_NAMES[:spec.traffic_type_count]
    hosts = list(n.hosts)
    gateway = n.gateways[0]
    egress = {h: 0.0 for h in hosts}
    flows = []
    for d in range(len(hosts) * spec.flows_per_host):
        # a host cannot drop its own traffic, so its uplink must carry all of
        # it: oversized draws fall back to a small size, then to new endpoints
        while True:
            if rng.random() < INTERNAL_SHARE:
                i, j = rng.choice(len(hosts), size=2, replace=False)
                src, dst = hosts[i], hosts[j]
            else:
                src, dst = gateway, hosts[rng.integers(len(hosts))]
            if rng.random() < SMALL_SHARE:
                size = rng.uniform(*SMALL_RANGE)
            else:
                size = rng.uniform(*LARGE_RANGE)
            used = max(egress.get(src, 0.0), egress.get(dst, 0.0))
            if used + size > LINK_CAPACITY:
                size = rng.uniform(*SMALL_RANGE)
            size = round(float(size), 3)
            if used + size <= LINK_CAPACITY:
                break
        for end in (src, dst):
            if end in egress:
                egress[end] += size
        t = types[rng.integers(len(types))]
        value = float(FLOW_VALUES[rng.integers(len(FLOW_VALUES))])
        flows.append(Flow(f"f{2 * d}", src, dst, t, size, value))
        flows.append(Flow(f"f{2 * d + 1}", dst, src, t, size, value))
    return flows


def exploitable_count(n_hosts: int, pct: int) -> int:
    return round(pct * n_hosts / 100)


def gen_vulnerabilities(n: NetworkInstance, spec: GenSpec):
    """Capabilities, exploits and their edges for a network.

    Returns ``(capabilities, exploits, prereq_edges, grant_edges)``.
    """
    rng = _rng(spec.seed, VULN_STREAM)
    types = list(n.traffic_types) or list(TYPE_NAMES[:spec.traffic_type_count])
    hosts = list(n.hosts)
    value = {h: int(rng.integers(1, 101)) for h in hosts}

    n_exploitable = exploitable_count(len(hosts), spec.exploitable_host_pct)
    # the first n_exploitable hosts of this order are the exploitable ones
    order = [hosts[i] for i in rng.permutation(len(hosts))]
    n_exploits = max(1, round(n_exploitable * spec.vulns_per_host_avg))
    counts = [int(c) for c in rng.choice(PRECONDITION_COUNTS, size=n_exploits, p=PRECONDITION_PROBS)]
    n_single = max(1, counts.count(1))
    multi_counts = [c for c in counts if c > 1][: n_exploits - n_single]

    caps: dict = {}

    def cap(h, level, t=None):
        c = Capability(h, level, PRIVILEGE_SCALE[level] * value[h], t)
        caps.setdefault(c.id, c)
        return c.id

    for h in hosts:
        for t in types:
            cap(h, 0, t)

    exploits, prereq, grant = [], [], []
    achievable: list = []   # capability ids touched by exploits so far, in creation order

    def touch(cid):
        if cid not in achievable:
            achievable.append(cid)

    # one single-step escalation per host; surplus exploits infect further hosts
    singles = []
    for k in range(n_single):
        h = order[k % len(order)]
        t = types[rng.integers(len(types))]
        pre, post = cap(h, 0, t), cap(h, 1)
        eid = f"v{len(exploits)}"
        exploits.append(Exploit(eid, logic="AND", probability=_probability(rng)))
        prereq.append((pre, eid))
        grant.append((eid, post))
        singles.append((eid, h))
        touch(pre)
        touch(post)

    for c in multi_counts:
        _, h = singles[rng.integers(len(singles))]
        first, post = cap(h, 1), cap(h, 2)
        pool = [x for x in achievable if x not in (first, post)]
        extra = rng.choice(len(pool), size=min(c - 1, len(pool)), replace=False) if pool else []
        pres = [first] + sorted(pool[i] for i in extra)
        eid = f"v{len(exploits)}"
        exploits.append(Exploit(eid, logic="AND", probability=_probability(rng)))
        prereq += [(p, eid) for p in pres]
        grant.append((eid, post))
        touch(post)

    return list(caps.values()), exploits, prereq, grant


def _probability(rng) -> float:
    return round(float(rng.uniform(MIN_PROBABILITY, 1.0)), 6)


def generate(spec: GenSpec) -> Instance:
    base = fat_tree(spec.pods)
    n = _with(base, traffic_types=TYPE_NAMES[:spec.traffic_type_count])
    n = _with(n, flows=tuple(gen_traffic(n, spec)))
    validate(n)
    caps, exploits, prereq, grant = gen_vulnerabilities(n, spec)
    start = Capability(GATEWAY, 2, 0.0)
    return Instance(n, tuple([start] + caps), tuple(exploits), tuple(prereq), tuple(grant),
                    (start.id,))
