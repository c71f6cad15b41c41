"""Exact cumulative risk by Bayesian propagation over an attack graph.

Acyclic parts are evaluated in topological order.  Strongly connected
components are resolved recursively.  An entry point is a node with a
predecessor outside the component that may be held.  A component without
entry points is unreachable; otherwise each entry point is valued on a copy
of the component where its own outgoing edges are removed, after which the
entry points are pinned and the remainder is evaluated the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .attack_graph import AttackGraph


class OutOfRange(ValueError):
    pass


def bayes(probs: Iterable[float]) -> float:
    """Probability that at least one of several independent events occurs."""
    q = 1.0
    for p in probs:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"probability {p!r} outside [0, 1]")
        q *= 1.0 - p
    return 1.0 - q


@dataclass(frozen=True)
class CumulativeScores:
    probability: Mapping[str, float]
    risk: float

    def __getitem__(self, node: str) -> float:
        return self.probability[node]


def _tarjan(nodes: np.ndarray, member: np.ndarray, succ_ptr, succ_dst, succ_edge, edge_on):
    """Strongly connected components of the subgraph induced by ``nodes``.

    Returned in topological order of the condensation (sources first).
    """
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = 0
    for root in nodes:
        root = int(root)
        if root in index:
            continue
        work = [(root, int(succ_ptr[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, k = work[-1]
            end = succ_ptr[v + 1]
            advanced = False
            while k < end:
                w = int(succ_dst[k])
                e = succ_edge[k]
                k += 1
                if not edge_on[e] or not member[w]:
                    continue
                if w not in index:
                    work[-1] = (v, k)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, int(succ_ptr[w])))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    out.reverse()
    return out


class _Evaluator:
    def __init__(self, arrays):
        self.a = arrays
        self.n = len(arrays.kind)
        self.depth_limit = self.n + len(arrays.tail) + 1

    def run(self, edge_on: np.ndarray) -> np.ndarray:
        P = np.zeros(self.n)
        fixed = self.a.fixed.copy()
        self._evaluate(np.arange(self.n, dtype=np.int64), edge_on, fixed, P, 0)
        return P

    def _evaluate(self, nodes, edge_on, fixed, P, depth):
        if depth > self.depth_limit:
            raise RuntimeError("cycle resolution exceeded its recursion bound")
        a = self.a
        member = np.zeros(self.n, dtype=bool)
        member[nodes] = True
        pending = []
        for comp in _tarjan(nodes, member, a.succ_ptr, a.succ_dst, a.succ_edge, edge_on):
            if len(comp) == 1:
                pending.append(comp[0])
                continue
            self._flush(pending, edge_on, fixed, P)
            pending = []
            self._cycle(comp, edge_on, fixed, P, depth)
        self._flush(pending, edge_on, fixed, P)

    def _flush(self, order, edge_on, fixed, P):
        if order:
            a = self.a
            _kernels.propagate(np.asarray(order, dtype=np.int64), a.pred_ptr, a.pred_src,
                               a.pred_edge, edge_on, a.kind, a.prob, fixed, P)

    def _cycle(self, comp: Sequence[int], edge_on, fixed, P, depth):
        a = self.a
        inside = set(comp)
        entries = []
        for v in comp:
            if fixed[v]:
                entries.append(v)
                continue
            # outside predecessors are already final; a zero-probability one opens no entry
            for k in range(a.pred_ptr[v], a.pred_ptr[v + 1]):
                u = int(a.pred_src[k])
                if edge_on[a.pred_edge[k]] and u not in inside and P[u] > 0.0:
                    entries.append(v)
                    break
        if not entries:
            P[comp] = 0.0
            return
        comp_arr = np.asarray(comp, dtype=np.int64)
        values = {}
        for x in entries:
            if fixed[x]:
                values[x] = 1.0
                continue
            cut = edge_on.copy()
            cut[a.succ_edge[a.succ_ptr[x]:a.succ_ptr[x + 1]]] = 0
            scratch = P.copy()
            self._evaluate(comp_arr, cut, fixed, scratch, depth + 1)
            values[x] = scratch[x]
        pinned = fixed.copy()
        for x, val in values.items():
            P[x] = val
            pinned[x] = 1
        # entries are left out of the node set, so the kernel never overwrites them
        rest = np.asarray([v for v in comp if v not in values], dtype=np.int64)
        if len(rest):
            self._evaluate(rest, edge_on, pinned, P, depth + 1)


def arisk(g: AttackGraph, severed: Iterable = ()) -> CumulativeScores:
    """Cumulative reach probabilities of every node, with ``severed`` edges removed."""
    a = g.arrays
    edge_on = a.edge_mask(g, severed)
    # unreachable nodes end at probability 0; dropping their edges first keeps
    # them from changing which nodes count as entry points of a cycle
    usable = np.ones(len(a.kind), dtype=np.uint8)
    live = np.asarray(_kernels.reach(a.succ_ptr, a.succ_dst, a.succ_edge, edge_on, a.kind,
                                     usable, a.indeg, a.index[g.sigma]), dtype=bool)
    edge_on = edge_on & (live[a.tail] & live[a.head]).astype(np.uint8)
    P = _Evaluator(a).run(edge_on)
    prob = {node: float(P[i]) for node, i in a.index.items()}
    return CumulativeScores(probability=prob, risk=float(np.dot(P[a.is_cap], a.impact[a.is_cap])))


def risk(g: AttackGraph, severed: Iterable = ()) -> float:
    """Expected impact: sum over capabilities of reach probability times impact."""
    return arisk(g, severed).risk
