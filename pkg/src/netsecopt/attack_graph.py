"""Attack dependency graphs.

An attack graph is bipartite: capability nodes (an attacker state on a device)
alternate with exploit nodes (transitions that consume prerequisite
capabilities and grant new ones).  Two artificial nodes are always present:
``sigma``, an always-on source that feeds every start capability, and ``mu``,
the single target used by the most-effective-path measure once the graph has
been augmented with per-capability target exploits.

For the bipartite check ``sigma`` behaves like an exploit (probability 1) and
``mu`` like a capability with zero impact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from . import _kernels

SIGMA = "sigma"
MU = "mu"

NETWORK = "network"
VULNERABILITY = "vulnerability"
TARGET = "target"
EXPLOIT_KINDS = (NETWORK, VULNERABILITY, TARGET)


class AttackGraphError(ValueError):
    """Base class for malformed attack graphs."""


class BipartiteViolation(AttackGraphError):
    pass


class DanglingEdge(AttackGraphError):
    pass


class EmptyStart(AttackGraphError):
    pass


class MalformedNode(AttackGraphError):
    pass


class UnknownNode(KeyError):
    pass


def capability_id(device, privilege: int, traffic_type: str | None = None) -> str:
    if traffic_type is None:
        return f"{device}:{privilege}"
    return f"{device}:{privilege}:{traffic_type}"


@dataclass(frozen=True)
class Capability:
    device: str
    privilege: int
    impact: float = 0.0
    traffic_type: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "device", str(self.device))
        if self.privilege not in (0, 1, 2):
            raise MalformedNode(f"privilege must be 0, 1 or 2, got {self.privilege!r}")
        if (self.traffic_type is not None) != (self.privilege == 0):
            raise MalformedNode(
                f"capability on {self.device}: traffic type is required for privilege 0 "
                "and forbidden otherwise")
        if not self.impact >= 0:
            raise MalformedNode(f"capability on {self.device}: impact must be >= 0")

    @property
    def id(self) -> str:
        return capability_id(self.device, self.privilege, self.traffic_type)


@dataclass(frozen=True)
class Exploit:
    id: str
    kind: str = VULNERABILITY
    logic: str = "AND"
    probability: float = 1.0
    traffic_type: str | None = None
    source_device: str | None = None
    target_device: str | None = None

    def __post_init__(self):
        if self.kind not in EXPLOIT_KINDS:
            raise MalformedNode(f"exploit {self.id}: unknown kind {self.kind!r}")
        if self.logic not in ("AND", "OR"):
            raise MalformedNode(f"exploit {self.id}: logic must be AND or OR")
        if self.kind == NETWORK:
            if self.logic != "OR":
                raise MalformedNode(f"network exploit {self.id} must be an OR node")
            if self.traffic_type is None or self.target_device is None:
                raise MalformedNode(f"network exploit {self.id} needs traffic_type and target_device")
        if not 0.0 < self.probability <= 1.0:
            raise MalformedNode(f"exploit {self.id}: probability must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class AttackGraph:
    """Validated, immutable attack graph. Construct with :func:`build`."""

    capabilities: Mapping[str, Capability]
    exploits: Mapping[str, Exploit]
    prereq_edges: frozenset
    grant_edges: frozenset
    start: tuple
    targets: Mapping[str, float] | None = None   # set once target exploits are added
    sigma: str = SIGMA
    mu: str = MU

    # -- structure -----------------------------------------------------------------

    @cached_property
    def nodes(self) -> tuple:
        return tuple(sorted([*self.capabilities, *self.exploits, self.sigma, self.mu]))

    @cached_property
    def edges(self) -> tuple:
        """All edges, sorted, including ``sigma -> start`` edges."""
        start_edges = {(self.sigma, c) for c in self.start}
        return tuple(sorted(self.prereq_edges | self.grant_edges | start_edges))

    @cached_property
    def _adjacency(self):
        pred = {n: [] for n in self.nodes}
        succ = {n: [] for n in self.nodes}
        for t, h in self.edges:
            succ[t].append(h)
            pred[h].append(t)
        return ({k: tuple(v) for k, v in pred.items()},
                {k: tuple(v) for k, v in succ.items()})

    def predecessors(self, node: str) -> frozenset:
        try:
            return frozenset(self._adjacency[0][node])
        except KeyError:
            raise UnknownNode(node) from None

    def successors(self, node: str) -> frozenset:
        try:
            return frozenset(self._adjacency[1][node])
        except KeyError:
            raise UnknownNode(node) from None

    def is_exploit(self, node: str) -> bool:
        return node in self.exploits or node == self.sigma

    def probability(self, node: str) -> float:
        ex = self.exploits.get(node)
        return ex.probability if ex is not None else 1.0

    def impact(self, node: str) -> float:
        cap = self.capabilities.get(node)
        return cap.impact if cap is not None else 0.0

    @property
    def augmented(self) -> bool:
        return self.targets is not None

    def network_edges(self) -> tuple:
        """Prerequisite edges ``(c, ex)`` into network-reachability exploits."""
        return tuple(e for e in sorted(self.prereq_edges) if self.exploits[e[1]].kind == NETWORK)

    # -- array view used by the kernels ---------------------------------------------

    @cached_property
    def arrays(self) -> "GraphArrays":
        return GraphArrays.from_graph(self)

    # -- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        preconds = {ex: [] for ex in self.exploits}
        grants = {ex: [] for ex in self.exploits}
        for c, ex in sorted(self.prereq_edges):
            preconds[ex].append(c)
        for ex, c in sorted(self.grant_edges):
            grants[ex].append(c)
        caps = []
        for cid in sorted(self.capabilities):
            cap = self.capabilities[cid]
            rec = {"id": cid, "device": cap.device, "privilege": cap.privilege,
                   "impact": cap.impact}
            if cap.traffic_type is not None:
                rec["traffic_type"] = cap.traffic_type
            caps.append(rec)
        exploits = []
        for eid in sorted(self.exploits):
            ex = self.exploits[eid]
            if ex.kind == TARGET:
                continue
            rec = {"id": eid, "kind": ex.kind, "logic": ex.logic, "probability": ex.probability,
                   "preconditions": preconds[eid], "grants": grants[eid]}
            for key in ("traffic_type", "source_device", "target_device"):
                if getattr(ex, key) is not None:
                    rec[key] = getattr(ex, key)
            exploits.append(rec)
        out = {"capabilities": caps, "exploits": exploits, "start": list(self.start)}
        if self.targets is not None:
            out["targets"] = {c: lam for c, lam in sorted(self.targets.items())}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttackGraph":
        caps = [capability_from_record(rec) for rec in data.get("capabilities", [])]
        exploits, prereq, grant = [], [], []
        for rec in data.get("exploits", []):
            ex = Exploit(
                id=str(rec["id"]), kind=rec.get("kind", VULNERABILITY),
                logic=rec.get("logic", "AND"), probability=float(rec.get("probability", 1.0)),
                traffic_type=rec.get("traffic_type"),
                source_device=_opt_str(rec.get("source_device")),
                target_device=_opt_str(rec.get("target_device")))
            exploits.append(ex)
            prereq.extend((str(c), ex.id) for c in rec.get("preconditions", []))
            grant.extend((ex.id, str(c)) for c in rec.get("grants", []))
        g = build(caps, exploits, prereq, grant, [str(s) for s in data.get("start", [])])
        if data.get("targets") is not None:
            g = augment_with_targets(g, {str(k): float(v) for k, v in data["targets"].items()})
        return g


def _opt_str(v):
    return None if v is None else str(v)


def capability_from_record(rec: Mapping) -> Capability:
    cap = Capability(device=str(rec["device"]), privilege=int(rec["privilege"]),
                     impact=float(rec.get("impact", 0.0)),
                     traffic_type=rec.get("traffic_type"))
    if "id" in rec and str(rec["id"]) != cap.id:
        raise MalformedNode(f"capability id {rec['id']!r} does not match its fields ({cap.id!r})")
    return cap


@dataclass(frozen=True, eq=False)
class GraphArrays:
    """Integer-indexed CSR view of an attack graph (node order = ``graph.nodes``)."""

    index: Mapping[str, int]
    kind: np.ndarray
    prob: np.ndarray
    fixed: np.ndarray
    impact: np.ndarray
    is_cap: np.ndarray
    tail: np.ndarray
    head: np.ndarray
    pred_ptr: np.ndarray
    pred_src: np.ndarray
    pred_edge: np.ndarray
    succ_ptr: np.ndarray
    succ_dst: np.ndarray
    succ_edge: np.ndarray
    indeg: np.ndarray

    @classmethod
    def from_graph(cls, g: AttackGraph) -> "GraphArrays":
        nodes = g.nodes
        index = {n: i for i, n in enumerate(nodes)}
        n = len(nodes)
        kind = np.zeros(n, dtype=np.int8)
        prob = np.ones(n)
        fixed = np.zeros(n, dtype=np.uint8)
        impact = np.zeros(n)
        is_cap = np.zeros(n, dtype=bool)
        for name, i in index.items():
            if name == g.sigma:
                kind[i] = _kernels.SOURCE
                fixed[i] = 1
            elif name in g.exploits:
                ex = g.exploits[name]
                kind[i] = _kernels.AND_EX if ex.logic == "AND" else _kernels.OR_EX
                prob[i] = ex.probability
            else:
                kind[i] = _kernels.CAP
                if name in g.capabilities:
                    is_cap[i] = True
                    impact[i] = g.capabilities[name].impact
        for s in g.start:
            fixed[index[s]] = 1
        m = len(g.edges)
        tail = np.fromiter((index[t] for t, _ in g.edges), dtype=np.int64, count=m)
        head = np.fromiter((index[h] for _, h in g.edges), dtype=np.int64, count=m)
        eids = np.arange(m, dtype=np.int64)
        order = np.lexsort((tail, head))
        pred_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(pred_ptr, head + 1, 1)
        pred_ptr = np.cumsum(pred_ptr)
        order_s = np.lexsort((head, tail))
        succ_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(succ_ptr, tail + 1, 1)
        succ_ptr = np.cumsum(succ_ptr)
        indeg = np.diff(pred_ptr)
        return cls(index=MappingProxyType(index), kind=kind, prob=prob, fixed=fixed,
                   impact=impact, is_cap=is_cap, tail=tail, head=head,
                   pred_ptr=pred_ptr, pred_src=tail[order].copy(), pred_edge=eids[order].copy(),
                   succ_ptr=succ_ptr, succ_dst=head[order_s].copy(), succ_edge=eids[order_s].copy(),
                   indeg=indeg.astype(np.int64))

    def edge_mask(self, g: AttackGraph, severed: Iterable = ()) -> np.ndarray:
        """uint8 mask over ``g.edges``; 0 for severed edges.

        Edges out of ``sigma`` stay on: start capabilities are always held.
        """
        on = np.ones(len(self.tail), dtype=np.uint8)
        if severed:
            pos = {e: i for i, e in enumerate(g.edges)}
            for e in severed:
                e = tuple(e)
                if e not in pos:
                    raise DanglingEdge(f"severed edge {e!r} is not in the graph")
                if e[0] != g.sigma:
                    on[pos[e]] = 0
        return on


def build(capabilities: Iterable[Capability], exploits: Iterable[Exploit],
          prereq_edges: Iterable, grant_edges: Iterable, start: Iterable[str]) -> AttackGraph:
    """Validate and assemble an :class:`AttackGraph`."""
    caps = {}
    for cap in capabilities:
        if cap.id in caps:
            raise MalformedNode(f"duplicate capability {cap.id}")
        caps[cap.id] = cap
    exs = {}
    for ex in exploits:
        if ex.id in exs or ex.id in caps:
            raise MalformedNode(f"duplicate node id {ex.id}")
        exs[ex.id] = ex
    if SIGMA in caps or SIGMA in exs or MU in caps or MU in exs:
        raise MalformedNode("node ids 'sigma' and 'mu' are reserved")

    prereq = frozenset((str(c), str(e)) for c, e in prereq_edges)
    grant = frozenset((str(e), str(c)) for e, c in grant_edges)
    for c, e in prereq:
        _check_edge(c, e, caps, exs, tail_is_cap=True)
    for e, c in grant:
        _check_edge(e, c, caps, exs, tail_is_cap=False)

    has_pre = {e for _, e in prereq}
    has_post = {e for e, _ in grant}
    for eid in exs:
        if eid not in has_pre or eid not in has_post:
            raise MalformedNode(f"exploit {eid} needs at least one prerequisite and one grant")

    start = tuple(sorted(set(map(str, start))))
    if not start:
        raise EmptyStart("the start set is empty")
    for s in start:
        if s not in caps:
            raise DanglingEdge(f"start capability {s!r} is not a known capability")

    return AttackGraph(capabilities=MappingProxyType(caps), exploits=MappingProxyType(exs),
                       prereq_edges=prereq, grant_edges=grant, start=start)


def _check_edge(tail, head, caps, exs, *, tail_is_cap: bool):
    for node in (tail, head):
        if node not in caps and node not in exs:
            raise DanglingEdge(f"edge ({tail}, {head}) references unknown node {node!r}")
    cap_end, ex_end = (tail, head) if tail_is_cap else (head, tail)
    if cap_end not in caps or ex_end not in exs:
        raise BipartiteViolation(f"edge ({tail}, {head}) does not join a capability and an exploit")


def normalized_impacts(g: AttackGraph) -> dict:
    """Impacts divided by the largest impact; zero-impact capabilities omitted."""
    top = max((c.impact for c in g.capabilities.values()), default=0.0)
    if top <= 0:
        return {}
    return {cid: c.impact / top for cid, c in sorted(g.capabilities.items()) if c.impact > 0}


def augment_with_targets(g: AttackGraph, normalized: Mapping[str, float] | None = None) -> AttackGraph:
    """Add one OR exploit ``target:<c>`` with probability Λ_c per positive-impact capability.

    Each auxiliary exploit has the single prerequisite ``c`` and grants ``mu``.
    """
    if g.augmented:
        raise AttackGraphError("graph already carries target exploits")
    lam = normalized_impacts(g) if normalized is None else dict(normalized)
    exploits = dict(g.exploits)
    prereq = set(g.prereq_edges)
    grant = set(g.grant_edges)
    targets = {}
    for cid in sorted(lam):
        if cid not in g.capabilities:
            raise DanglingEdge(f"target capability {cid!r} is not in the graph")
        if g.capabilities[cid].impact <= 0:
            continue
        value = float(lam[cid])
        if not 0.0 < value <= 1.0:
            raise MalformedNode(f"normalized impact of {cid} must lie in (0, 1]")
        eid = f"target:{cid}"
        exploits[eid] = Exploit(id=eid, kind=TARGET, logic="OR", probability=value)
        prereq.add((cid, eid))
        targets[cid] = value
    grant_mu = {(f"target:{cid}", g.mu) for cid in targets}
    # mu is not a registered capability; its edges are added after validation.
    return AttackGraph(capabilities=g.capabilities, exploits=MappingProxyType(exploits),
                       prereq_edges=frozenset(prereq), grant_edges=frozenset(grant | grant_mu),
                       start=g.start, targets=MappingProxyType(targets))
