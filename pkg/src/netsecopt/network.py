"""Network instances: devices, links, capacities and typed valued flows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .attack_graph import NETWORK, Capability, Exploit, capability_id


class NetworkError(ValueError):
    pass


class UnknownDevice(NetworkError):
    pass


class NonPositiveCapacity(NetworkError):
    pass


class SelfLoopFlow(NetworkError):
    pass


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    capacity: float
    cost: float = 1.0


@dataclass(frozen=True)
class Flow:
    id: str
    src: str
    dst: str
    traffic_type: str
    quantity: float
    value: float


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    routers: tuple
    hosts: tuple
    gateways: tuple
    links: tuple
    traffic_types: tuple
    flows: tuple
    device_capacity: Mapping[str, float] = field(default_factory=dict)

    @property
    def devices(self) -> tuple:
        return self.routers + self.hosts

    def arcs(self) -> list:
        """Directed arcs ``(i, j, capacity, cost)``; each link yields both directions."""
        out = []
        for link in self.links:
            out.append((link.a, link.b, link.capacity, link.cost))
            out.append((link.b, link.a, link.capacity, link.cost))
        return out

    def flow(self, fid: str) -> Flow:
        for f in self.flows:
            if f.id == fid:
                return f
        raise KeyError(fid)

    # -- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "routers": list(self.routers),
            "hosts": list(self.hosts),
            "gateways": list(self.gateways),
            "links": [{"a": l.a, "b": l.b, "capacity": l.capacity, "cost": l.cost}
                      for l in self.links],
            "traffic_types": list(self.traffic_types),
            "flows": [{"id": f.id, "src": f.src, "dst": f.dst, "type": f.traffic_type,
                       "quantity": f.quantity, "value": f.value} for f in self.flows],
        }
        if self.device_capacity:
            out["device_capacity"] = {k: self.device_capacity[k] for k in sorted(self.device_capacity)}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "NetworkInstance":
        links = tuple(Link(str(l["a"]), str(l["b"]), float(l["capacity"]), float(l.get("cost", 1.0)))
                      for l in data.get("links", []))
        flows = tuple(
            Flow(str(f.get("id", f"f{k}")), str(f["src"]), str(f["dst"]),
                 str(f.get("type", f.get("traffic_type"))), float(f["quantity"]),
                 float(f.get("value", 1.0)))
            for k, f in enumerate(data.get("flows", [])))
        inst = cls(routers=tuple(map(str, data.get("routers", []))),
                   hosts=tuple(map(str, data.get("hosts", []))),
                   gateways=tuple(map(str, data.get("gateways", []))),
                   links=links,
                   traffic_types=tuple(map(str, data.get("traffic_types", []))),
                   flows=flows,
                   device_capacity={str(k): float(v)
                                    for k, v in data.get("device_capacity", {}).items()})
        validate(inst)
        return inst


def validate(n: NetworkInstance) -> None:
    routers, hosts = set(n.routers), set(n.hosts)
    if len(routers) != len(n.routers) or len(hosts) != len(n.hosts) or routers & hosts:
        raise NetworkError("device ids must be unique across routers and hosts")
    devices = routers | hosts
    for g in n.gateways:
        if g not in routers:
            raise UnknownDevice(f"gateway {g!r} is not a router")
    for link in n.links:
        for end in (link.a, link.b):
            if end not in devices:
                raise UnknownDevice(f"link ({link.a}, {link.b}) references unknown device {end!r}")
        if link.a == link.b:
            raise NetworkError(f"link ({link.a}, {link.b}) is a self loop")
        if not link.capacity > 0:
            raise NonPositiveCapacity(f"link ({link.a}, {link.b}) capacity must be positive")
    for dev, cap in n.device_capacity.items():
        if dev not in routers:
            raise UnknownDevice(f"device capacity given for unknown router {dev!r}")
        if not cap > 0:
            raise NonPositiveCapacity(f"device {dev} capacity must be positive")
    types = set(n.traffic_types)
    ids = set()
    for f in n.flows:
        if f.id in ids:
            raise NetworkError(f"duplicate flow id {f.id}")
        ids.add(f.id)
        for end in (f.src, f.dst):
            if end not in devices:
                raise UnknownDevice(f"flow {f.id} references unknown device {end!r}")
        if f.src == f.dst:
            raise SelfLoopFlow(f"flow {f.id} has identical source and destination")
        if f.traffic_type not in types:
            raise NetworkError(f"flow {f.id} has unknown traffic type {f.traffic_type!r}")
        if not f.quantity > 0:
            raise NetworkError(f"flow {f.id} quantity must be positive")
        if not f.value >= 0:
            raise NetworkError(f"flow {f.id} value must be non-negative")


def connection_triples(n: NetworkInstance) -> dict:
    """Map ``(src, dst, type)`` to the flow ids realizing it.

    Only connections that end at a host and start at a host or gateway can
    give an attacker a foothold, so only those are returned.
    """
    hosts = set(n.hosts)
    sources = hosts | set(n.gateways)
    out: dict = {}
    for f in n.flows:
        if f.dst in hosts and f.src in sources:
            out.setdefault((f.src, f.dst, f.traffic_type), []).append(f.id)
    return {k: out[k] for k in sorted(out)}


def network_exploit_id(src: str, dst: str, traffic_type: str) -> str:
    return f"net:{src}>{dst}:{traffic_type}"


def derive_reachability_exploits(n: NetworkInstance) -> list:
    """One OR exploit per realized connection triple, granting ``(dst, 0, type)``."""
    return [Exploit(id=network_exploit_id(s, d, t), kind=NETWORK, logic="OR", probability=1.0,
                    traffic_type=t, source_device=s, target_device=d)
            for s, d, t in connection_triples(n)]


def reachability_edges(exploits: Iterable[Exploit], capabilities: Iterable[Capability]):
    """Prerequisite and grant edges for network exploits.

    The attacker can use a connection from device ``k`` once it holds any
    privilege of level 1 or more on ``k``.  Exploits whose source has no such
    capability are dropped.  Returns (kept exploits, prereq edges, grant edges,
    missing privilege-0 capabilities to create).
    """
    by_device: dict = {}
    existing = set()
    for c in capabilities:
        existing.add(c.id)
        if c.privilege >= 1:
            by_device.setdefault(c.device, []).append(c.id)
    kept, prereq, grant, created = [], [], [], {}
    for ex in exploits:
        holders = sorted(by_device.get(ex.source_device, []))
        if not holders:
            continue
        kept.append(ex)
        prereq.extend((c, ex.id) for c in holders)
        target = capability_id(ex.target_device, 0, ex.traffic_type)
        if target not in existing and target not in created:
            created[target] = Capability(ex.target_device, 0, 0.0, ex.traffic_type)
        grant.append((ex.id, target))
    return kept, prereq, grant, list(created.values())
