"""Linearizable risk proxies: impact-weighted reachability and most likely attack path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .attack_graph import AttackGraph

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class ReachResult:
    reachable: frozenset
    value: float
    normalized: float


def reach(g: AttackGraph, severed: Iterable = (), theta: float = 0.0) -> ReachResult:
    """Least fixpoint of attacker reachability from ``sigma``.

    An exploit is usable only if its probability exceeds ``theta``.  OR nodes
    need one traversable inbound edge, AND exploits need all of them.
    """
    a = g.arrays
    edge_on = a.edge_mask(g, severed)
    usable = np.ones(len(a.kind), dtype=np.uint8)
    exploit = (a.kind == _kernels.AND_EX) | (a.kind == _kernels.OR_EX)
    usable[exploit & (a.prob <= theta)] = 0
    hit = _kernels.reach(a.succ_ptr, a.succ_dst, a.succ_edge, edge_on, a.kind, usable,
                         a.indeg, a.index[g.sigma])
    hit = np.asarray(hit, dtype=bool)
    names = g.nodes
    reachable = frozenset(names[i] for i in np.flatnonzero(hit))
    value = float(a.impact[hit & a.is_cap].sum())
    total = float(a.impact[a.is_cap].sum())
    return ReachResult(reachable, value, value / total if total > 0 else 0.0)


def edge_log_weights(g: AttackGraph, edge_on: np.ndarray, epsilon: float) -> np.ndarray:
    """Non-negative ``-log`` weight of each edge (order of ``g.edges``)."""
    a = g.arrays
    head_p = np.where(a.kind[a.head] == _kernels.CAP, 1.0, a.prob[a.head])
    w = -np.log(head_p)
    w[edge_on == 0] = -math.log(epsilon)
    # -log(1.0) may come out as -0.0
    return np.abs(w)


def path(g: AttackGraph, severed: Iterable = (), epsilon: float = DEFAULT_EPSILON) -> float:
    """Largest product of edge weights over any ``sigma`` to ``mu`` path, or 0 if none."""
    if not g.augmented:
        raise ValueError("path needs a graph augmented with target exploits")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    a = g.arrays
    w = edge_log_weights(g, a.edge_mask(g, severed), epsilon)
    d = _kernels.shortest_distance(a.succ_ptr, a.succ_dst, a.succ_edge, w,
                                   a.index[g.sigma], a.index[g.mu])
    return 0.0 if math.isinf(d) else math.exp(-d)


def hybrid(reach_normalized: float, path_value: float, beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    return beta * reach_normalized + (1.0 - beta) * path_value
