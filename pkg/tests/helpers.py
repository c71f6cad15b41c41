"""Random graph generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
from scipy.optimize import linprog

from netsecopt.attack_graph import Capability, Exploit, augment_with_targets, build
from netsecopt.instance import Instance
from netsecopt.milp.simplex import row_ranges
from netsecopt.network import Flow, NetworkInstance
from netsecopt.toy import toy_network

TOY_HOSTS = ("3", "4", "5", "6")


def random_polytree(rng, max_nodes=12, p_low=0.05):
    """Random acyclic graph with up to ``max_nodes`` capabilities and exploits.

    Start capabilities may feed any number of exploits; every other node has
    at most one successor.  Reconvergence then only happens through nodes
    that are certainly held, so reach probabilities are exact under the
    independence assumption.
    """
    n_total = int(rng.integers(3, max_nodes + 1))
    n_start = int(rng.integers(1, 3))
    caps = [Capability(f"s{i}", 1, float(rng.integers(0, 5))) for i in range(n_start)]
    exploits, pre, grant = [], [], []
    free = []           # non-start capabilities without a successor yet
    nodes = n_start
    k = 0
    while nodes + 2 <= n_total:
        eid = f"e{k}"
        k += 1
        n_pre = int(rng.integers(1, 3))
        pool = [c.id for c in caps[:n_start]] + free
        picks = rng.choice(len(pool), size=min(n_pre, len(pool)), replace=False)
        chosen = [pool[i] for i in picks]
        for c in chosen:
            if c in free:
                free.remove(c)
        logic = "AND" if len(chosen) > 1 and rng.random() < 0.5 else "OR"
        exploits.append(Exploit(eid, logic=logic, probability=float(rng.uniform(p_low, 1.0))))
        pre += [(c, eid) for c in chosen]
        c = Capability(f"c{k}", 1, float(rng.integers(0, 10)))
        caps.append(c)
        grant.append((eid, c.id))
        free.append(c.id)
        nodes += 2
    return build(caps, exploits, pre, grant, [c.id for c in caps[:n_start]])


def random_graph(rng, max_nodes=10, cyclic=True, and_share=0.4):
    """Random bipartite graph (cycles allowed) with up to ``max_nodes`` nodes."""
    n_total = int(rng.integers(3, max_nodes + 1))
    n_caps = max(2, n_total // 2)
    n_ex = max(1, n_total - n_caps)
    caps = [Capability(f"c{i}", 1, float(rng.integers(0, 10))) for i in range(n_caps)]
    n_start = int(rng.integers(1, min(2, n_caps - 1) + 1))
    exploits, pre, grant = [], [], []
    for k in range(n_ex):
        eid = f"e{k}"
        n_pre = int(rng.integers(1, 3))
        if cyclic:
            pre_pool = list(range(n_caps))
            post_pool = list(range(n_start, n_caps))
        else:
            # caps ordered; exploit k reads from lower ids and writes to higher ones
            cut = int(rng.integers(1, n_caps))
            pre_pool = list(range(0, cut))
            post_pool = list(range(max(cut, n_start), n_caps))
            if not post_pool:
                continue
        pres = rng.choice(pre_pool, size=min(n_pre, len(pre_pool)), replace=False)
        post = int(rng.choice(post_pool))
        logic = "AND" if len(pres) > 1 and rng.random() < and_share else "OR"
        exploits.append(Exploit(eid, logic=logic, probability=float(rng.uniform(0.05, 1.0))))
        pre += [(caps[int(i)].id, eid) for i in pres]
        grant.append((eid, caps[post].id))
    if not exploits:
        exploits.append(Exploit("e0", logic="OR", probability=0.5))
        pre.append((caps[0].id, "e0"))
        grant.append(("e0", caps[-1].id))
    return build(caps, exploits, pre, grant, [c.id for c in caps[:n_start]])


def chain(n, p, c):
    caps = [Capability("s", 1, 0.0)] + [Capability(f"c{k}", 1, c) for k in range(1, n + 1)]
    exploits = [Exploit(f"x{k}", probability=p) for k in range(1, n + 1)]
    pre = [(caps[k - 1].id, f"x{k}") for k in range(1, n + 1)]
    grant = [(f"x{k}", caps[k].id) for k in range(1, n + 1)]
    return build(caps, exploits, pre, grant, ["s:1"])


def monte_carlo(g, samples, rng, per_sample=False):
    """Fraction of samples in which each node is reached (acyclic graphs).

    Each exploit succeeds independently with its probability; an exploit
    fires if it succeeds and its prerequisites hold (all for AND, any for OR).
    """
    order = topological(g)
    held = {}
    for node in order:
        preds = sorted(g.predecessors(node))
        if node == g.sigma:
            held[node] = np.ones(samples, dtype=bool)
            continue
        if not g.is_exploit(node):
            v = np.zeros(samples, dtype=bool)
            for p in preds:
                v |= held[p]
            held[node] = v
            continue
        ex = g.exploits[node]
        ok = rng.random(samples) < ex.probability
        if ex.logic == "AND":
            for p in preds:
                ok &= held[p]
        else:
            any_pre = np.zeros(samples, dtype=bool)
            for p in preds:
                any_pre |= held[p]
            ok &= any_pre
        held[node] = ok
    if per_sample:
        return held
    return {k: float(v.mean()) for k, v in held.items()}


def monte_carlo_risk(g, samples, rng):
    """Sample mean of the total impact held, and its standard error."""
    held = monte_carlo(g, samples, rng, per_sample=True)
    total = np.zeros(samples)
    for c, cap in g.capabilities.items():
        if cap.impact:
            total += cap.impact * held[c]
    return float(total.mean()), float(total.std(ddof=1) / math.sqrt(samples))


def fixpoint_reach(g, severed=()):
    """Impact held by an attacker for whom every usable exploit succeeds."""
    severed = set(severed)
    held = {g.sigma}
    changed = True
    while changed:
        changed = False
        for node in g.nodes:
            if node in held:
                continue
            preds = [p for p in g.predecessors(node)
                     if (p, node) not in severed or p == g.sigma]
            if g.is_exploit(node) and g.exploits[node].logic == "AND":
                ok = len(preds) == len(g.predecessors(node)) and all(p in held for p in preds)
            else:
                ok = any(p in held for p in preds)
            if ok:
                held.add(node)
                changed = True
    return sum(cap.impact for c, cap in g.capabilities.items() if c in held)


def dijkstra_path(g, severed=(), epsilon=1e-6):
    """Most likely sigma-to-mu path by Dijkstra over -log edge weights."""
    severed = set(severed)
    dist = {g.sigma: 0.0}
    heap = [(0.0, g.sigma)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == g.mu:
            return math.exp(-d)
        for v in g.successors(u):
            w = g.probability(v) if g.is_exploit(v) else 1.0
            if (u, v) in severed and u != g.sigma:
                w = epsilon
            nd = d - math.log(w)
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return 0.0


def topological(g):
    indeg = {n: len(g.predecessors(n)) for n in g.nodes}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    out = []
    while ready:
        n = ready.pop(0)
        out.append(n)
        for m in sorted(g.successors(n)):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    if len(out) != len(indeg):
        raise ValueError("graph has a cycle")
    return out


def subset_bayes(probs):
    """Inclusion-exclusion over all non-empty subsets."""
    total = 0.0
    for r in range(1, len(probs) + 1):
        for sub in itertools.combinations(probs, r):
            total += (-1) ** (r + 1) * math.prod(sub)
    return total


def best_path(g, severed=(), epsilon=1e-6):
    """Largest product of edge weights over all simple sigma-to-mu paths."""
    severed = set(severed)
    best = 0.0

    def weight(t, h):
        if (t, h) in severed and t != g.sigma:
            return epsilon
        return g.probability(h) if g.is_exploit(h) else 1.0

    def dfs(node, seen, prod):
        nonlocal best
        if node == g.mu:
            best = max(best, prod)
            return
        for nxt in sorted(g.successors(node)):
            if nxt not in seen:
                seen.add(nxt)
                dfs(nxt, seen, prod * weight(node, nxt))
                seen.remove(nxt)

    dfs(g.sigma, {g.sigma}, 1.0)
    return best


def augmented(g):
    return augment_with_targets(g)


def enumerate_milp(problem):
    """Optimal objective by trying every binary assignment and solving the LP rest."""
    ints = np.flatnonzero(problem.integer_mask)
    conts = np.flatnonzero(~problem.integer_mask)
    A = problem.matrix.toarray()
    lo, hi = row_ranges(problem.row_senses, problem.rhs)
    best = math.inf
    if len(conts) == 0 and len(ints):
        # all binary: score every assignment at once
        X = ((np.arange(2 ** len(ints))[:, None] >> np.arange(len(ints))) & 1).astype(float)
        ok = np.all((X >= problem.lower[ints]) & (X <= problem.upper[ints]), axis=1)
        act = X @ A[:, ints].T
        ok &= np.all((act >= lo - 1e-9) & (act <= hi + 1e-9), axis=1)
        obj = X @ problem.cost[ints]
        return (float(obj[ok].min()) if ok.any() else math.inf) + problem.offset
    for bits in itertools.product((0.0, 1.0), repeat=len(ints)):
        xb = np.array(bits)
        if np.any(xb < problem.lower[ints]) or np.any(xb > problem.upper[ints]):
            continue
        fixed = A[:, ints] @ xb if len(ints) else np.zeros(A.shape[0])
        base = float(problem.cost[ints] @ xb) if len(ints) else 0.0
        if len(conts) == 0:
            act = fixed
            if np.all(act >= lo - 1e-9) and np.all(act <= hi + 1e-9):
                best = min(best, base)
            continue
        Ac = A[:, conts]
        A_ub, b_ub = [], []
        for r in range(A.shape[0]):
            if np.isfinite(hi[r]):
                A_ub.append(Ac[r])
                b_ub.append(hi[r] - fixed[r])
            if np.isfinite(lo[r]):
                A_ub.append(-Ac[r])
                b_ub.append(fixed[r] - lo[r])
        res = linprog(problem.cost[conts], A_ub=np.array(A_ub) if A_ub else None,
                      b_ub=np.array(b_ub) if b_ub else None,
                      bounds=list(zip(problem.lower[conts], problem.upper[conts])),
                      method="highs")
        if res.status == 0:
            best = min(best, base + res.fun)
    return best + problem.offset


def random_instance(rng):
    """Random flows and vulnerabilities on the seven-device network."""
    base = toy_network()
    pairs = [(s, d) for s in ("0",) + TOY_HOSTS for d in TOY_HOSTS if s != d]
    picks = rng.choice(len(pairs), size=int(rng.integers(1, 7)), replace=False)
    flows = []
    for k, i in enumerate(sorted(picks)):
        s, d = pairs[i]
        flows.append(Flow(f"f{k}", s, d, "AB"[int(rng.integers(2))], 1.0,
                          float(rng.integers(1, 6))))
    n = NetworkInstance(base.routers, base.hosts, base.gateways, base.links, base.traffic_types,
                        tuple(flows))
    caps = [Capability("0", 2, 0.0)]
    caps += [Capability(h, 0, float(rng.integers(0, 3)), t) for h in TOY_HOSTS for t in "AB"]
    caps += [Capability(h, 1, float(rng.integers(1, 20))) for h in TOY_HOSTS]
    exploits, pre, grant = [], [], []
    for k in range(int(rng.integers(1, 6))):
        h = TOY_HOSTS[int(rng.integers(4))]
        eid = f"x{k}"
        needs = [f"{h}:0:{'AB'[int(rng.integers(2))]}"]
        if rng.random() < 0.4:
            other = TOY_HOSTS[int(rng.integers(4))]
            if other != h:
                needs.append(f"{other}:1")
        exploits.append(Exploit(eid, logic="AND" if rng.random() < 0.5 else "OR",
                                probability=float(rng.uniform(0.05, 1.0))))
        pre += [(c, eid) for c in needs]
        grant.append((eid, f"{h}:1"))
    return Instance(n, tuple(caps), tuple(exploits), tuple(pre), tuple(grant), ("0:2",))
