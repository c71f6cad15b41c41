"""The seven-device driving example: three SDN routers, four hosts, six flows."""

from __future__ import annotations

from .attack_graph import Capability, Exploit
from .bip_model import ModelWeights
from .instance import Instance
from .network import Flow, Link, NetworkInstance

FLOWS = [
    ("f0", "0", "3", "A", 5.0),
    ("f1", "3", "4", "A", 1.0),
    ("f2", "3", "4", "B", 1.0),
    ("f3", "3", "5", "A", 2.0),
    ("f4", "3", "5", "B", 1.0),
    ("f5", "5", "6", "A", 2.0),
]

# (id, preconditions, grant)
EXPLOITS = [
    ("ex0", ["3:0:A"], "3:1"),
    ("ex1", ["5:0:A"], "5:1"),
    ("ex2", ["6:0:A", "5:1"], "6:1"),
    ("ex3", ["4:0:B", "3:1"], "4:1"),
]

# Type-specific firewalls are slightly cheaper than per-flow rules here, so a
# type-wide block is preferred whenever both achieve the same effect.
WEIGHTS = ModelWeights(alpha3=0.05)


def toy_network() -> NetworkInstance:
    hosts = ("3", "4", "5", "6")
    links = [Link("0", "1", 100.0), Link("0", "2", 100.0), Link("1", "2", 100.0)]
    links += [Link(r, h, 100.0) for h in hosts for r in ("1", "2")]
    flows = tuple(Flow(fid, s, d, t, 1.0, v) for fid, s, d, t, v in FLOWS)
    return NetworkInstance(routers=("0", "1", "2"), hosts=hosts, gateways=("0",),
                           links=tuple(links), traffic_types=("A", "B"), flows=flows)


def toy_instance() -> Instance:
    caps = [Capability("0", 2, 0.0)]
    caps += [Capability(h, 0, 1.0, t) for h, t in
             [("3", "A"), ("4", "A"), ("4", "B"), ("5", "A"), ("5", "B"), ("6", "A")]]
    caps += [Capability("3", 1, 2.0), Capability("5", 1, 2.0),
             Capability("4", 1, 100.0), Capability("6", 1, 100.0)]
    exploits, pre, grant = [], [], []
    for eid, needs, gives in EXPLOITS:
        exploits.append(Exploit(eid, logic="AND" if len(needs) > 1 else "OR", probability=1.0))
        pre += [(c, eid) for c in needs]
        grant.append((eid, gives))
    return Instance(toy_network(), tuple(caps), tuple(exploits), tuple(pre), tuple(grant),
                    ("0:2",), {"alpha3": WEIGHTS.alpha3})
