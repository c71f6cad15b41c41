"""Bounded revised dual simplex.

Solves ``min c.x`` subject to ``row_lo <= A x <= row_hi`` and
``lower <= x <= upper``.  Each row gets a logical column ``s = A x`` so the
working system is ``[A | -I] z = 0`` with every variable carrying bounds.
Infinite bounds on the side a variable must rest on are replaced by a large
artificial box; a finished solve that still leans on one means the problem is
unbounded.

The basis inverse is an LU factorization (SuperLU) followed by a product of
eta matrices, refreshed periodically.  The ratio test is Harris' two-pass
variant; after a run of degenerate steps the method switches to Bland's
smallest-index rule, which guarantees termination.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .problem import Unbounded

AT_LOWER, AT_UPPER, FREE_ZERO, BASIC = 0, 1, 2, 3

BIG = 1e7
PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
SHIFT_TOL = 1e-7
REFACTOR_EVERY = 50
DEGENERATE_RUN = 50


@dataclass
class Basis:
    basic: np.ndarray
    status: np.ndarray
    weights: np.ndarray | None = None  # dual steepest-edge row weights

    def copy(self) -> "Basis":
        w = None if self.weights is None else self.weights.copy()
        return Basis(self.basic.copy(), self.status.copy(), w)


@dataclass
class LPResult:
    status: str  # optimal | infeasible | time-limit | iteration-limit
    x: np.ndarray | None
    objective: float
    basis: Basis | None
    iterations: int


class _Factor:
    """LU of the basis followed by product-form eta updates."""

    def __init__(self, K: sp.csc_matrix, basic: np.ndarray):
        B = K[:, basic].tocsc()
        self.lu = splu(B, permc_spec="COLAMD", options={"SymmetricMode": False})
        self.etas = []

    def ftran(self, b: np.ndarray) -> np.ndarray:
        x = self.lu.solve(b)
        for r, col in self.etas:
            xr = x[r] / col[r]
            x -= xr * col
            x[r] = xr
        return x

    def btran(self, b: np.ndarray) -> np.ndarray:
        y = b.copy()
        for r, col in reversed(self.etas):
            y[r] = (y[r] - (col @ y - col[r] * y[r])) / col[r]
        return self.lu.solve(y, trans="T")

    def update(self, r: int, alpha_q: np.ndarray):
        self.etas.append((r, alpha_q.copy()))


class DualSimplex:
    def __init__(self, A, c, lower, upper, row_lo, row_hi):
        A = sp.csc_matrix(A, dtype=float)
        self.m, self.n = A.shape
        self.A = A
        self.At = A.T.tocsr()
        self.K = sp.hstack([A, -sp.identity(self.m, format="csc")], format="csc")
        self.K.sort_indices()
        self.c = np.concatenate([np.asarray(c, dtype=float), np.zeros(self.m)])
        self.set_bounds(lower, upper, row_lo, row_hi)

    def set_bounds(self, lower, upper, row_lo=None, row_hi=None):
        lb = np.asarray(lower, dtype=float)
        ub = np.asarray(upper, dtype=float)
        if row_lo is None:
            rlo, rhi = self.true_lb[self.n:], self.true_ub[self.n:]
        else:
            rlo, rhi = np.asarray(row_lo, dtype=float), np.asarray(row_hi, dtype=float)
        self.true_lb = np.concatenate([lb, rlo])
        self.true_ub = np.concatenate([ub, rhi])
        self.lb = np.where(np.isinf(self.true_lb), -BIG, self.true_lb)
        self.ub = np.where(np.isinf(self.true_ub), BIG, self.true_ub)

    # -- helpers ---------------------------------------------------------------------

    def _nonbasic_values(self, status: np.ndarray) -> np.ndarray:
        z = np.where(status == AT_UPPER, self.ub, self.lb)
        z[status == FREE_ZERO] = 0.0
        z[status == BASIC] = 0.0
        return z

    def slack_basis(self) -> Basis:
        N = self.n + self.m
        status = np.empty(N, dtype=np.int8)
        cs = self.c
        zero = cs == 0
        status[:] = np.where(cs < 0, AT_UPPER, AT_LOWER)
        # cost-free columns rest at 0 when it lies inside their bounds, else at
        # the nearer finite bound; this keeps artificial magnitudes out of x_B
        status[zero & np.isinf(self.true_lb) & np.isfinite(self.true_ub)] = AT_UPPER
        status[zero & (self.true_lb < 0) & (self.true_ub > 0)] = FREE_ZERO
        basic = np.arange(self.n, N, dtype=np.int64)
        status[basic] = BASIC
        return Basis(basic, status)

    # -- main loop ---------------------------------------------------------------------

    def solve(self, basis: Basis | None = None, max_iter: int = 100_000,
              deadline: float | None = None) -> LPResult:
        if basis is None:
            basis = self.slack_basis()
        else:
            basis = basis.copy()
        lb0, ub0 = self.lb.copy(), self.ub.copy()
        try:
            try:
                return self._run(basis, max_iter, deadline)
            except RuntimeError:
                # singular warm-start basis: start over from the logical basis
                self.lb, self.ub = lb0.copy(), ub0.copy()
                return self._run(self.slack_basis(), max_iter, deadline)
        finally:
            self.lb, self.ub = lb0, ub0

    def _run(self, basis: Basis, max_iter: int, deadline):
        basic, status = basis.basic, basis.status
        K, c = self.K, self.c
        m = self.m
        kp, ki, kx = K.indptr, K.indices, K.data
        weights = basis.weights if basis.weights is not None else np.ones(m)
        fixed = self.lb == self.ub
        iters = 0
        degenerate = 0
        bland = False
        while True:
            F = _Factor(K, basic)
            x_N = self._nonbasic_values(status)
            x_B = F.ftran(-(K @ x_N))
            y = F.btran(c[basic])
            d = c - K.T @ y
            d[basic] = 0.0
            if self._restore_dual_feasibility(d, status, fixed):
                x_N = self._nonbasic_values(status)
                x_B = F.ftran(-(K @ x_N))
            for _ in range(REFACTOR_EVERY):
                if iters >= max_iter:
                    return LPResult("iteration-limit", None, np.nan, None, iters)
                if deadline is not None and iters % 20 == 0 and time.monotonic() > deadline:
                    return LPResult("time-limit", None, np.nan, None, iters)
                lbB, ubB = self.lb[basic], self.ub[basic]
                below = lbB - x_B
                above = x_B - ubB
                infeas = np.maximum(below, above)
                cand = np.flatnonzero(infeas > PRIMAL_TOL)
                if len(cand) == 0:
                    if not F.etas:
                        return self._finish(basic, status, x_B, d, iters, weights)
                    break  # confirm optimality on a fresh factorization
                if bland:
                    r = int(cand[np.argmin(basic[cand])])
                else:
                    r = int(cand[np.argmax(infeas[cand] ** 2 / weights[cand])])
                to_lower = below[r] > 0
                e = np.zeros(m)
                e[r] = 1.0
                rho = F.btran(e)
                alpha = np.concatenate([self.At @ rho, -rho])
                alpha[basic] = 0.0
                sa = alpha if to_lower else -alpha
                elig = ((status == AT_LOWER) & (sa < -PIVOT_TOL)) | \
                       ((status == AT_UPPER) & (sa > PIVOT_TOL)) | \
                       ((status == FREE_ZERO) & (np.abs(sa) > PIVOT_TOL))
                elig &= ~fixed
                elig[basic] = False
                J = np.flatnonzero(elig)
                if len(J) == 0:
                    if F.etas:
                        break  # rule out accumulated update error first
                    bound = self.lb[basic[r]] if to_lower else self.ub[basic[r]]
                    if infeas[r] > SHIFT_TOL * (1.0 + abs(bound)):
                        return LPResult("infeasible", None, np.inf, None, iters)
                    # round-off sized violation: shift the bound onto the value
                    if to_lower:
                        self.lb[basic[r]] = x_B[r]
                    else:
                        self.ub[basic[r]] = x_B[r]
                    continue
                absd = np.abs(d[J])
                absd[status[J] == FREE_ZERO] = 0.0
                aa = np.abs(sa[J])
                if bland:
                    ratios = absd / aa
                    best = ratios.min()
                    ties = J[ratios <= best + 1e-12]
                    q = int(ties.min())
                else:
                    tmax = np.min((absd + DUAL_TOL) / aa)
                    ok = (absd / aa) <= tmax
                    q = int(J[ok][np.argmax(aa[ok])])
                alpha_rq = alpha[q]
                theta_d = d[q] / alpha_rq
                d -= theta_d * alpha
                d[q] = 0.0
                p = int(basic[r])
                d[p] = -theta_d
                if abs(theta_d) < 1e-12:
                    degenerate += 1
                    if degenerate > DEGENERATE_RUN:
                        bland = True
                else:
                    degenerate = 0
                col_q = np.zeros(m)
                col_q[ki[kp[q]:kp[q + 1]]] = kx[kp[q]:kp[q + 1]]
                alpha_q = F.ftran(col_q)
                tau = F.ftran(rho)
                ratio = alpha_q / alpha_q[r]
                w_r = weights[r]
                weights += ratio * (ratio * w_r - 2.0 * tau)
                np.maximum(weights, 1e-6, out=weights)
                weights[r] = max(w_r / alpha_q[r] ** 2, 1e-6)
                target = self.lb[p] if to_lower else self.ub[p]
                theta_p = (x_B[r] - target) / alpha_q[r]
                x_B -= theta_p * alpha_q
                xq_old = 0.0 if status[q] == FREE_ZERO else (
                    self.ub[q] if status[q] == AT_UPPER else self.lb[q])
                x_B[r] = xq_old + theta_p
                status[p] = AT_LOWER if to_lower else AT_UPPER
                status[q] = BASIC
                basic[r] = q
                F.update(r, alpha_q)
                iters += 1
                if self._restore_dual_feasibility(d, status, fixed):
                    x_N = self._nonbasic_values(status)
                    x_B = F.ftran(-(K @ x_N))

    def _restore_dual_feasibility(self, d, status, fixed) -> bool:
        """Flip nonbasic variables whose reduced cost has the wrong sign."""
        wrong_low = (status == AT_LOWER) & (d < -DUAL_TOL) & ~fixed
        wrong_up = (status == AT_UPPER) & (d > DUAL_TOL) & ~fixed
        free_bad = (status == FREE_ZERO) & (np.abs(d) > DUAL_TOL)
        if not (wrong_low.any() or wrong_up.any() or free_bad.any()):
            return False
        status[wrong_low] = AT_UPPER
        status[wrong_up] = AT_LOWER
        status[free_bad & (d > 0)] = AT_LOWER
        status[free_bad & (d < 0)] = AT_UPPER
        return True

    def _finish(self, basic, status, x_B, d, iters, weights) -> LPResult:
        z = self._nonbasic_values(status)
        lo = np.where(np.isinf(self.true_lb), -BIG, self.true_lb)
        hi = np.where(np.isinf(self.true_ub), BIG, self.true_ub)
        z = np.clip(z, lo, hi)
        z[basic] = np.clip(x_B, lo[basic], hi[basic])
        nb = status != BASIC
        art_low = nb & (status == AT_LOWER) & np.isinf(self.true_lb)
        art_up = nb & (status == AT_UPPER) & np.isinf(self.true_ub)
        if np.any((art_low | art_up) & (np.abs(d) > DUAL_TOL)):
            raise Unbounded("objective is unbounded below")
        x = z[: self.n]
        return LPResult("optimal", x, float(self.c[: self.n] @ x),
                        Basis(basic.copy(), status.copy(), weights.copy()), iters)


def row_ranges(senses, rhs):
    rhs = np.asarray(rhs, dtype=float)
    lo = np.full(len(rhs), -np.inf)
    hi = np.full(len(rhs), np.inf)
    for i, s in enumerate(senses):
        if s in ("<=", "="):
            hi[i] = rhs[i]
        if s in (">=", "="):
            lo[i] = rhs[i]
    return lo, hi


def solve_lp(problem, basis: Basis | None = None, deadline: float | None = None) -> LPResult:
    """Solve the continuous relaxation of a :class:`MilpProblem`."""
    lo, hi = row_ranges(problem.row_senses, problem.rhs)
    ds = DualSimplex(problem.matrix, problem.cost, problem.lower, problem.upper, lo, hi)
    res = ds.solve(basis, deadline=deadline)
    if res.status == "optimal":
        res.objective += problem.offset
    return res
