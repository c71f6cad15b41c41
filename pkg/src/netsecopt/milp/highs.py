"""Adapter to the HiGHS MIP solver bundled with SciPy."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .problem import GAP_LIMIT, INFEASIBLE, OPTIMAL, TIME_LIMIT, MilpSolution, Unbounded
from .simplex import row_ranges


def solve_highs(problem, limits) -> MilpSolution:
    lo, hi = row_ranges(problem.row_senses, problem.rhs)
    constraints = [LinearConstraint(problem.matrix, lo, hi)] if problem.num_rows else []
    res = milp(problem.cost, integrality=problem.integer_mask.astype(np.uint8),
               bounds=Bounds(problem.lower, problem.upper), constraints=constraints,
               options={"time_limit": float(limits.time_s), "mip_rel_gap": float(limits.gap),
                        "node_limit": int(limits.node_cap), "presolve": True,
                        "disp": False})
    if res.status == 3:
        raise Unbounded("objective is unbounded below")
    if res.status == 2:
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, 0, "highs")
    bound = getattr(res, "mip_dual_bound", None)
    bound = problem.offset + float(bound) if bound is not None else math.nan
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.x is None:
        status = TIME_LIMIT if res.status == 1 else GAP_LIMIT
        return MilpSolution(status, None, math.inf, bound, nodes, "highs")
    x = np.asarray(res.x, dtype=float)
    ints = problem.integer_mask
    x[ints] = np.round(x[ints])
    x = np.clip(x, problem.lower, problem.upper)
    obj = problem.objective(x)
    if res.status == 0:
        status = OPTIMAL
    elif res.status == 1:
        # time or node limit with an incumbent; distinguish by the reported message
        status = TIME_LIMIT if "time" in str(res.message).lower() else GAP_LIMIT
    else:
        status = GAP_LIMIT
    if math.isnan(bound):
        bound = obj
    return MilpSolution(status, x, obj, min(bound, obj), nodes, "highs")
