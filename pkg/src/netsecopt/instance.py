"""Problem instances: a network plus the vulnerabilities of its devices.

JSON layout::

    {"network": {...NetworkInstance...},
     "vulnerabilities": {"capabilities": [...], "exploits": [...], "start": [...]},
     "weights": {...optional model weight defaults...}}

Vulnerability exploits use the attack-graph record format.  Network
reachability exploits are never stored; they are derived from the flows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .attack_graph import (AttackGraph, Exploit, VULNERABILITY, augment_with_targets, build,
                           capability_from_record)
from .network import (NetworkInstance, derive_reachability_exploits, reachability_edges)


@dataclass(frozen=True, eq=False)
class Instance:
    network: NetworkInstance
    capabilities: tuple
    exploits: tuple
    prereq_edges: tuple
    grant_edges: tuple
    start: tuple
    weights: dict = field(default_factory=dict)   # model weight defaults for this instance

    def to_dict(self) -> dict:
        pre = {e.id: [] for e in self.exploits}
        gr = {e.id: [] for e in self.exploits}
        for c, e in self.prereq_edges:
            pre[e].append(c)
        for e, c in self.grant_edges:
            gr[e].append(c)
        caps = []
        for c in self.capabilities:
            rec = {"id": c.id, "device": c.device, "privilege": c.privilege, "impact": c.impact}
            if c.traffic_type is not None:
                rec["traffic_type"] = c.traffic_type
            caps.append(rec)
        exploits = [{"id": e.id, "kind": e.kind, "logic": e.logic, "probability": e.probability,
                     "preconditions": pre[e.id], "grants": gr[e.id]} for e in self.exploits]
        out = {"network": self.network.to_dict(),
               "vulnerabilities": {"capabilities": caps, "exploits": exploits,
                                   "start": list(self.start)}}
        if self.weights:
            out["weights"] = {k: self.weights[k] for k in sorted(self.weights)}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        net = NetworkInstance.from_dict(data["network"])
        vul = data.get("vulnerabilities", {})
        caps = tuple(capability_from_record(r) for r in vul.get("capabilities", []))
        exploits, pre, gr = [], [], []
        for r in vul.get("exploits", []):
            ex = Exploit(id=str(r["id"]), kind=r.get("kind", VULNERABILITY),
                         logic=r.get("logic", "AND"), probability=float(r.get("probability", 1.0)))
            exploits.append(ex)
            pre.extend((str(c), ex.id) for c in r.get("preconditions", []))
            gr.extend((ex.id, str(c)) for c in r.get("grants", []))
        return cls(net, caps, tuple(exploits), tuple(pre), tuple(gr),
                   tuple(str(s) for s in vul.get("start", [])),
                   {str(k): float(v) for k, v in data.get("weights", {}).items()})

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def attack_graph(inst: Instance, augment: bool = True) -> AttackGraph:
    """Full attack graph: vulnerabilities plus one reachability exploit per realized connection."""
    net_exploits = derive_reachability_exploits(inst.network)
    kept, pre, gr, created = reachability_edges(net_exploits, inst.capabilities)
    g = build(list(inst.capabilities) + created, list(inst.exploits) + kept,
              list(inst.prereq_edges) + pre, list(inst.grant_edges) + gr, inst.start)
    return augment_with_targets(g) if augment else g

