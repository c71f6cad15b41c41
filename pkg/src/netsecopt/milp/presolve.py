"""Singleton-row and fixed-column reductions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .simplex import row_ranges

FEAS_TOL = 1e-9


@dataclass
class Reduced:
    matrix: sp.csr_matrix
    cost: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    integer: np.ndarray
    offset: float
    keep_cols: np.ndarray
    keep_rows: np.ndarray
    fixed_values: np.ndarray  # full-length; valid where the column was removed

    def expand(self, x_reduced: np.ndarray) -> np.ndarray:
        x = self.fixed_values.copy()
        x[self.keep_cols] = x_reduced
        return x


class PresolveInfeasible(Exception):
    pass


def presolve(problem) -> Reduced:
    """Turn singleton rows into bounds and drop fixed columns, until nothing changes."""
    A = problem.matrix.tocsr()
    A.eliminate_zeros()
    n = problem.num_cols
    lo_r, hi_r = row_ranges(problem.row_senses, problem.rhs)
    lb = problem.lower.astype(float).copy()
    ub = problem.upper.astype(float).copy()
    integer = problem.integer_mask
    lb[integer] = np.ceil(lb[integer] - FEAS_TOL)
    ub[integer] = np.floor(ub[integer] + FEAS_TOL)
    if np.any(lb > ub + FEAS_TOL):
        raise PresolveInfeasible("column bounds cross")

    col_alive = np.ones(n, dtype=bool)
    row_alive = np.ones(A.shape[0], dtype=bool)
    indptr, indices, data = A.indptr, A.indices, A.data

    changed = True
    while changed:
        changed = False
        fixed_now = col_alive & (ub - lb <= 0)
        if fixed_now.any():
            col_alive &= ~fixed_now
            changed = True
        for i in np.flatnonzero(row_alive):
            cols = indices[indptr[i]:indptr[i + 1]]
            vals = data[indptr[i]:indptr[i + 1]]
            live = col_alive[cols]
            if live.sum() > 1:
                continue
            const = float(vals[~live] @ lb[cols[~live]]) if (~live).any() else 0.0
            lo, hi = lo_r[i] - const, hi_r[i] - const
            if not live.any():
                if lo > FEAS_TOL * (1 + abs(lo)) or hi < -FEAS_TOL * (1 + abs(hi)):
                    raise PresolveInfeasible(f"row {problem.row_names[i]} cannot be satisfied")
                row_alive[i] = False
                changed = True
                continue
            j = int(cols[live][0])
            a = float(vals[live][0])
            new_lo, new_hi = (lo / a, hi / a) if a > 0 else (hi / a, lo / a)
            if integer[j]:
                new_lo = math.ceil(new_lo - FEAS_TOL) if np.isfinite(new_lo) else new_lo
                new_hi = math.floor(new_hi + FEAS_TOL) if np.isfinite(new_hi) else new_hi
            if new_lo > lb[j]:
                lb[j] = new_lo
            if new_hi < ub[j]:
                ub[j] = new_hi
            if lb[j] > ub[j]:
                if lb[j] - ub[j] > FEAS_TOL * (1 + abs(lb[j])):
                    raise PresolveInfeasible(f"column {problem.col_names[j]} has no feasible value")
                ub[j] = lb[j]
            row_alive[i] = False
            changed = True

    keep_cols = np.flatnonzero(col_alive)
    keep_rows = np.flatnonzero(row_alive)
    fixed_values = np.where(col_alive, 0.0, lb)
    removed = ~col_alive
    shift = A[:, removed] @ lb[removed] if removed.any() else np.zeros(A.shape[0])
    offset = problem.offset + float(problem.cost[removed] @ lb[removed])
    return Reduced(
        matrix=A[keep_rows][:, keep_cols].tocsr(),
        cost=problem.cost[keep_cols].copy(),
        lower=lb[keep_cols], upper=ub[keep_cols],
        row_lo=lo_r[keep_rows] - shift[keep_rows], row_hi=hi_r[keep_rows] - shift[keep_rows],
        integer=integer[keep_cols], offset=offset,
        keep_cols=keep_cols, keep_rows=keep_rows, fixed_values=fixed_values)
