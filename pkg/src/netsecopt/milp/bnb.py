"""Best-first branch and bound over the binary columns."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .presolve import PresolveInfeasible, presolve
from .problem import GAP_LIMIT, INFEASIBLE, OPTIMAL, TIME_LIMIT, MilpSolution
from .simplex import DualSimplex

INT_TOL = 1e-6


@dataclass
class Limits:
    time_s: float = 600.0
    gap: float = 1e-4
    node_cap: int = 1_000_000


def gap_closed(incumbent: float, bound: float, gap: float) -> bool:
    return incumbent - bound <= max(gap * abs(incumbent), 1e-9)


def branch_and_bound(problem, limits: Limits | None = None) -> MilpSolution:
    limits = limits or Limits()
    deadline = time.monotonic() + limits.time_s
    try:
        red = presolve(problem)
    except PresolveInfeasible:
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, 0, "bnb")

    if red.matrix.shape[1] == 0:
        x = red.expand(np.zeros(0))
        obj = problem.objective(x)
        return MilpSolution(OPTIMAL, x, obj, obj, 0, "bnb")

    lp = DualSimplex(red.matrix, red.cost, red.lower, red.upper, red.row_lo, red.row_hi)
    int_cols = np.flatnonzero(red.integer)
    root_lb, root_ub = red.lower.copy(), red.upper.copy()

    incumbent_x = None
    incumbent = math.inf
    # heap entries: (parent bound, seq, bound changes, warm-start basis)
    heap = [(-math.inf, 0, (), None)]
    seq = 1
    nodes = 0
    status = None
    while heap:
        if time.monotonic() > deadline:
            status = TIME_LIMIT
            break
        if nodes >= limits.node_cap:
            status = GAP_LIMIT
            break
        best_open = heap[0][0]
        if incumbent_x is not None and gap_closed(incumbent, best_open, limits.gap):
            break
        bound, _, changes, basis = heapq.heappop(heap)
        if bound >= incumbent:
            continue
        lb, ub = root_lb.copy(), root_ub.copy()
        for j, lo, hi in changes:
            lb[j], ub[j] = lo, hi
        lp.set_bounds(lb, ub)
        res = lp.solve(basis, deadline=deadline)
        nodes += 1
        if res.status == "time-limit":
            heapq.heappush(heap, (bound, seq, changes, basis))
            seq += 1
            status = TIME_LIMIT
            break
        if res.status != "optimal":
            continue
        obj = res.objective + red.offset
        if obj >= incumbent - 1e-12:
            continue
        x = res.x
        xi = x[int_cols]
        frac = np.abs(xi - np.round(xi))
        if np.all(frac <= INT_TOL):
            x = x.copy()
            x[int_cols] = np.round(xi)
            incumbent_x, incumbent = x, obj
            continue
        dist = np.minimum(xi - np.floor(xi), np.ceil(xi) - xi)
        k = int(np.argmax(dist))  # first index among ties
        j = int(int_cols[k])
        down = changes + ((j, lb[j], math.floor(x[j])),)
        up = changes + ((j, math.ceil(x[j]), ub[j]),)
        heapq.heappush(heap, (obj, seq, down, res.basis))
        heapq.heappush(heap, (obj, seq + 1, up, res.basis))
        seq += 2

    open_bound = heap[0][0] if heap else math.inf
    if incumbent_x is None:
        if status is None:
            return MilpSolution(INFEASIBLE, None, math.inf, math.inf, nodes, "bnb")
        return MilpSolution(status, None, math.inf, open_bound, nodes, "bnb")
    bound = min(open_bound, incumbent)
    if status is None or gap_closed(incumbent, bound, limits.gap):
        status = OPTIMAL
    x_full = red.expand(incumbent_x)
    return MilpSolution(status, x_full, problem.objective(x_full), bound, nodes, "bnb")

