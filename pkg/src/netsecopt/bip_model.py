"""Binary program coupling flow routing with attack-graph reachability.

Routing side: every flow is spawned at its source, travels over directed arcs
and either reaches its destination (and then the global sink ``t*``) or is
dropped by a flow-specific or type-specific firewall at some router.

Security side: reachability of attack-graph nodes follows AND/OR semantics
over arcs that are present; an arc into a network reachability exploit is
present exactly when the matching connection is delivered.  The most likely
attack path enters through the linear-programming dual of a shortest path
problem over ``-log`` edge weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .attack_graph import NETWORK, AttackGraph
from .milp import BINARY, CONTINUOUS, MilpProblem, MilpSolution, ProblemBuilder
from .network import NetworkInstance, connection_triples, network_exploit_id
from .risk_measures import path as path_value

SOURCE = "s*"
SINK = "t*"
REACH_TIEBREAK = 1e-9
FIREWALL_TIEBREAK = 1e-6


class FractionalSolution(ValueError):
    pass


class InfeasibleByConstruction(ValueError):
    pass


@dataclass(frozen=True)
class ModelWeights:
    alpha: float = 0.5
    beta: float = 0.5
    alpha0: float = 1.0
    alpha1: float = 0.01
    alpha2: float = 0.1
    alpha3: float = 0.1
    alpha4: float = 0.05
    beta0: float = 0.1
    epsilon: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ValueError("alpha and beta must lie in [0, 1]")
        if not 0.0 < self.epsilon <= 1e-3:
            raise ValueError("epsilon must lie in (0, 1e-3]")
        for k in ("alpha0", "alpha1", "alpha2", "alpha3", "alpha4", "beta0"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be non-negative")

    def replace(self, **kw) -> "ModelWeights":
        d = asdict(self)
        d.update(kw)
        return ModelWeights(**d)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelWeights":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown weight keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


def linearize_and(b: ProblemBuilder, name: str, out: int, ins: list) -> None:
    """``out = AND(ins)`` for binary columns."""
    for k, j in enumerate(ins):
        b.add_row(f"{name}:le{k}", [(out, 1.0), (j, -1.0)], "<=", 0.0)
    b.add_row(f"{name}:ge", [(out, 1.0)] + [(j, -1.0) for j in ins], ">=", 1.0 - len(ins))


def linearize_or(b: ProblemBuilder, name: str, out: int, ins: list) -> None:
    """``out = OR(ins)`` for binary columns; an empty OR forces 0."""
    for k, j in enumerate(ins):
        b.add_row(f"{name}:ge{k}", [(out, 1.0), (j, -1.0)], ">=", 0.0)
    b.add_row(f"{name}:le", [(out, 1.0)] + [(j, -1.0) for j in ins], "<=", 0.0)


@dataclass
class BipModel:
    problem: MilpProblem
    network: NetworkInstance
    graph: AttackGraph
    weights: ModelWeights
    cols: dict                      # family -> {index tuple: column}
    terms: dict                     # "Of" / "Od" / "Or" / "Op" -> {column: coefficient}
    path_block: bool = True
    arcs: list = field(default_factory=list)

    def col(self, family: str, *index) -> int:
        return self.cols[family][tuple(index)]

    def term_values(self, x: np.ndarray) -> dict:
        return {k: float(sum(c * x[j] for j, c in t.items())) for k, t in self.terms.items()}


def _structural_reach(g: AttackGraph, start: str, forward: bool) -> set:
    seen = {start}
    stack = [start]
    step = g.successors if forward else g.predecessors
    while stack:
        u = stack.pop()
        for v in step(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def build(n: NetworkInstance, g: AttackGraph, weights: ModelWeights) -> BipModel:
    if not g.augmented:
        raise ValueError("the attack graph must carry target exploits")
    bld = ProblemBuilder(name="netsecopt")
    cols: dict = {k: {} for k in ("rho", "b", "w", "beta", "theta", "v", "W", "N", "r", "a", "x", "y")}
    routers, hosts = list(n.routers), list(n.hosts)
    router_set, host_set = set(routers), set(hosts)
    arcs = [(i, j, cap, cost) for i, j, cap, cost in n.arcs()]
    out_arcs: dict = {d: [] for d in n.devices}
    in_arcs: dict = {d: [] for d in n.devices}
    for i, j, _, _ in arcs:
        out_arcs[i].append(j)
        in_arcs[j].append(i)

    def var(family, index, kind=BINARY, lower=0.0, upper=1.0):
        name = f"{family}[{','.join(map(str, index))}]"
        j = bld.add_var(name, kind, lower, upper)
        cols[family][tuple(index)] = j
        return j

    # -- routing variables -------------------------------------------------------------
    for f in n.flows:
        if not out_arcs[f.src] and f.src not in router_set:
            raise InfeasibleByConstruction(f"flow {f.id}: source {f.src} has no outgoing link")
        var("rho", (f.id, SOURCE, f.src))
        for i, j, _, _ in arcs:
            # hosts only emit their own flows; a destination only hands off to t*
            silent = (i in host_set and i not in (f.src, f.dst)) or i == f.dst
            var("rho", (f.id, i, j), upper=0.0 if silent else 1.0)
        var("rho", (f.id, f.dst, SINK))
        for i in routers:
            for fam in ("b", "w", "beta", "theta"):
                var(fam, (f.id, i))
    for i in routers:
        for t in n.traffic_types:
            var("v", (t, i))
        var("W", (i,))
    triples = connection_triples(n)
    for k in sorted(host_set | set(n.gateways)):
        for h in hosts:
            for t in n.traffic_types:
                realized = (k, h, t) in triples
                var("N", (k, h, t), upper=1.0 if realized else 0.0)

    rho = cols["rho"]
    for f in n.flows:
        fid, tau = f.id, f.traffic_type
        bld.add_row(f"spawn[{fid}]", [(rho[(fid, SOURCE, f.src)], 1.0)], "=", 1.0)
        for d in n.devices:
            ins = [rho[(fid, j, d)] for j in in_arcs[d]]
            outs = [rho[(fid, d, j)] for j in out_arcs[d]]
            if d == f.src:
                ins.append(rho[(fid, SOURCE, d)])
            if d == f.dst:
                outs.append(rho[(fid, d, SINK)])
            # a flow visits each device at most once, so "arrives" is the inbound sum
            bld.add_row(f"once[{fid},{d}]", [(j, 1.0) for j in ins], "<=", 1.0)
            if d in router_set:
                th, bt = cols["theta"][(fid, d)], cols["beta"][(fid, d)]
                bb, ww = cols["b"][(fid, d)], cols["w"][(fid, d)]
                bld.add_row(f"recv[{fid},{d}]", [(th, 1.0)] + [(j, -1.0) for j in ins], "=", 0.0)
                linearize_and(bld, f"typeblock[{fid},{d}]", bt, [th, cols["v"][(tau, d)]])
                linearize_or(bld, f"block[{fid},{d}]", bb, [ww, bt])
                bld.add_row(f"balance[{fid},{d}]",
                            [(j, 1.0) for j in ins] + [(j, -1.0) for j in outs] + [(bb, -1.0)],
                            "=", 0.0)
            else:
                bld.add_row(f"balance[{fid},{d}]",
                            [(j, 1.0) for j in ins] + [(j, -1.0) for j in outs], "=", 0.0)

    for i, j, cap, _ in arcs:
        bld.add_row(f"link[{i},{j}]", [(rho[(f.id, i, j)], f.quantity) for f in n.flows], "<=", cap)
    for i in routers:
        if i in n.device_capacity:
            terms = []
            for f in n.flows:
                terms += [(rho[(f.id, k, i)], f.quantity) for k in in_arcs[i]]
                terms += [(rho[(f.id, i, k)], f.quantity) for k in out_arcs[i]]
            bld.add_row(f"device[{i}]", terms, "<=", n.device_capacity[i])
        fw = [cols["w"][(f.id, i)] for f in n.flows] + [cols["v"][(t, i)] for t in n.traffic_types]
        linearize_or(bld, f"anyfw[{i}]", cols["W"][(i,)], fw)

    for (k, h, t), fids in triples.items():
        nn = cols["N"][(k, h, t)]
        delivered = [rho[(fid, h, SINK)] for fid in fids]
        if len(delivered) == 1:
            bld.add_row(f"conn[{k},{h},{t}]", [(nn, 1.0), (delivered[0], -1.0)], "=", 0.0)
        else:
            linearize_or(bld, f"conn[{k},{h},{t}]", nn, delivered)

    # -- attack graph reachability ---------------------------------------------------------
    for node in g.nodes:
        var("r", (node,))
    for t_, h_ in g.edges:
        a = var("a", (t_, h_))
        var("x", (t_, h_))
        ex = g.exploits.get(h_)
        if ex is not None and ex.kind == NETWORK:
            key = (ex.source_device, ex.target_device, ex.traffic_type)
            bld.add_row(f"channel[{t_},{h_}]", [(a, 1.0), (cols["N"][key], -1.0)], "=", 0.0)
        else:
            bld.fix(a, 1.0)
    r, x, a = cols["r"], cols["x"], cols["a"]
    bld.add_row("root", [(r[(g.sigma,)], 1.0)], "=", 1.0)
    for t_, h_ in g.edges:
        linearize_and(bld, f"traverse[{t_},{h_}]", x[(t_, h_)], [r[(t_,)], a[(t_, h_)]])
    for node in g.nodes:
        if node == g.sigma:
            continue
        ins = [x[(p, node)] for p in sorted(g.predecessors(node))]
        ex = g.exploits.get(node)
        if ex is not None and ex.logic == "AND":
            linearize_and(bld, f"reach[{node}]", r[(node,)], ins)
        else:
            linearize_or(bld, f"reach[{node}]", r[(node,)], ins)

    # -- most likely attack path (dual of the shortest path LP) ---------------------------
    fwd = _structural_reach(g, g.sigma, True)
    bwd = _structural_reach(g, g.mu, False)
    keep = fwd & bwd
    path_block = g.mu in keep
    log_eps = math.log(weights.epsilon)
    if path_block:
        bound = (len(g.edges) + 1) * abs(log_eps)
        for node in sorted(keep):
            lo, hi = (0.0, 0.0) if node == g.sigma else (-bound, bound)
            var("y", (node,), CONTINUOUS, lo, hi)
        y = cols["y"]
        for t_, h_ in g.edges:
            if t_ not in keep or h_ not in keep:
                continue
            log_p = math.log(g.probability(h_))
            bld.add_row(f"dual[{t_},{h_}]",
                        [(y[(t_,)], 1.0), (y[(h_,)], -1.0), (a[(t_, h_)], -(log_p - log_eps))],
                        ">=", log_eps)

    # -- objective --------------------------------------------------------------------------
    w = weights
    Of: dict = {}
    for f in n.flows:
        Of[rho[(f.id, f.dst, SINK)]] = -w.alpha0 * f.value
        for i, j, _, cost in arcs:
            if cost:
                Of[rho[(f.id, i, j)]] = Of.get(rho[(f.id, i, j)], 0.0) + w.alpha1 * cost
    Od: dict = {}
    for j in cols["w"].values():
        Od[j] = w.alpha2
    for j in cols["v"].values():
        Od[j] = w.alpha3
    for j in cols["W"].values():
        Od[j] = w.alpha4
    Or = {r[(c,)]: cap.impact for c, cap in g.capabilities.items() if cap.impact}
    Op = {cols["y"][(g.sigma,)]: 1.0, cols["y"][(g.mu,)]: -1.0} if path_block else {}
    sec = 1.0 - w.alpha
    for j, c in Of.items():
        bld.add_cost(j, w.alpha * c)
    for j, c in Od.items():
        bld.add_cost(j, sec * w.beta0 * c + FIREWALL_TIEBREAK)
    for j, c in Or.items():
        bld.add_cost(j, sec * w.beta * c)
    for j, c in Op.items():
        bld.add_cost(j, sec * (1.0 - w.beta) * c)
    for j in r.values():
        bld.add_cost(j, REACH_TIEBREAK)

    return BipModel(problem=bld.build(), network=n, graph=g, weights=weights, cols=cols,
                    terms={"Of": Of, "Od": Od, "Or": Or, "Op": Op}, path_block=path_block,
                    arcs=arcs)


# -- solution decoding -----------------------------------------------------------------------

@dataclass
class Configuration:
    routing: list
    firewalls: list
    blocked: list
    delivered: list
    blocked_at: dict
    objective_terms: dict
    status: str = "optimal"

    def to_dict(self) -> dict:
        return {"routing": self.routing, "firewalls": self.firewalls, "blocked": self.blocked,
                "delivered": self.delivered, "blocked_at": self.blocked_at,
                "objective_terms": self.objective_terms, "status": self.status}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Configuration":
        return cls(list(d["routing"]), list(d["firewalls"]), list(d["blocked"]),
                   list(d["delivered"]), dict(d.get("blocked_at", {})),
                   dict(d.get("objective_terms", {})), d.get("status", "optimal"))


def _check_integral(model: BipModel, x: np.ndarray):
    ints = model.problem.integer_mask
    frac = np.abs(x[ints] - np.round(x[ints]))
    if frac.size and frac.max() > 1e-6:
        j = int(np.flatnonzero(ints)[np.argmax(frac)])
        raise FractionalSolution(f"column {model.problem.col_names[j]} = {x[j]!r} is fractional")


def extract_configuration(model: BipModel, solution: MilpSolution) -> Configuration:
    if solution.values is None:
        raise FractionalSolution(f"no solution values (status {solution.status})")
    x = np.asarray(solution.values, dtype=float)
    _check_integral(model, x)
    on = lambda j: x[j] > 0.5  # noqa: E731
    n = model.network
    rho = model.cols["rho"]
    routers = set(n.routers)
    out_arcs: dict = {}
    for i, j, _, _ in model.arcs:
        out_arcs.setdefault(i, []).append(j)
    routing, blocked, delivered, blocked_at = [], [], [], {}
    for f in n.flows:
        cur, seen = f.src, set()
        while True:
            if cur in seen:
                raise FractionalSolution(f"flow {f.id} loops through {cur}")
            seen.add(cur)
            if cur in routers and on(model.col("b", f.id, cur)):
                blocked.append(f.id)
                blocked_at[f.id] = cur
                break
            if cur == f.dst and on(rho[(f.id, cur, SINK)]):
                delivered.append(f.id)
                break
            nxt = [j for j in out_arcs.get(cur, []) if on(rho[(f.id, cur, j)])]
            if len(nxt) != 1:
                raise FractionalSolution(f"flow {f.id} has {len(nxt)} next hops at {cur}")
            routing.append({"device": cur, "flow": f.id, "next_hop": nxt[0]})
            cur = nxt[0]
    firewalls = []
    for i in n.routers:
        for f in n.flows:
            if on(model.col("w", f.id, i)):
                firewalls.append({"device": i, "kind": "flow", "selector": f.id})
        for t in n.traffic_types:
            if on(model.col("v", t, i)):
                firewalls.append({"device": i, "kind": "type", "selector": t})
    values = model.term_values(x)
    w = model.weights
    if (1.0 - w.alpha) * (1.0 - w.beta) == 0.0:
        # the path block carries no weight, so its y columns are arbitrary
        p = path_value(model.graph, severed_arcs(model, x), w.epsilon)
        values["Op"] = math.log(p) if p > 0 else 0.0
    terms = {k: round(v, 12) + 0.0 for k, v in values.items()}
    return Configuration(routing, firewalls, blocked, delivered, blocked_at, terms, solution.status)


def severed_arcs(model: BipModel, x) -> set:
    """Attack-graph arcs switched off in a solution vector."""
    return {e for e, j in model.cols["a"].items() if x[j] < 0.5}


def severed_by_delivery(g: AttackGraph, n: NetworkInstance, delivered) -> set:
    """Arcs into reachability exploits whose connection carries no delivered flow."""
    flows = {f.id: f for f in n.flows}
    live = {(flows[fid].src, flows[fid].dst, flows[fid].traffic_type) for fid in delivered}
    out = set()
    for c, ex in g.network_edges():
        e = g.exploits[ex]
        if (e.source_device, e.target_device, e.traffic_type) not in live:
            out.add((c, ex))
    return out


__all__ = ["ModelWeights", "BipModel", "Configuration", "FractionalSolution",
           "InfeasibleByConstruction", "build", "extract_configuration", "linearize_and",
           "linearize_or", "severed_arcs", "severed_by_delivery", "network_exploit_id", "SOURCE", "SINK"]
