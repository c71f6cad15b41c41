"""Mixed binary linear programming: model container, solvers and file formats."""

from __future__ import annotations

from .bnb import Limits, branch_and_bound
from .highs import solve_highs
from .problem import (BINARY, CONTINUOUS, GAP_LIMIT, INFEASIBLE, OPTIMAL, TIME_LIMIT,
                      MalformedProblem, MilpProblem, MilpSolution, ProblemBuilder, Unbounded)

SOLVERS = ("auto", "bnb", "highs")

# Above this many binary columns the embedded solver is too slow to be the default.
AUTO_BNB_MAX_BINARIES = 400


def solve(problem: MilpProblem, limits: Limits | None = None, solver: str = "auto") -> MilpSolution:
    limits = limits or Limits()
    if solver == "auto":
        solver = "bnb" if int(problem.integer_mask.sum()) <= AUTO_BNB_MAX_BINARIES else "highs"
    if solver == "bnb":
        return branch_and_bound(problem, limits)
    if solver == "highs":
        return solve_highs(problem, limits)
    raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")


__all__ = [
    "BINARY", "CONTINUOUS", "GAP_LIMIT", "INFEASIBLE", "OPTIMAL", "TIME_LIMIT", "Limits",
    "MalformedProblem", "MilpProblem", "MilpSolution", "ProblemBuilder", "Unbounded",
    "branch_and_bound", "solve", "solve_highs", "SOLVERS",
]
