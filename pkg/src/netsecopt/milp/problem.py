"""Mixed binary/continuous linear programs (minimization)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

BINARY = "binary"
CONTINUOUS = "continuous"
SENSES = ("<=", "=", ">=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
GAP_LIMIT = "gap-limit"
TIME_LIMIT = "time-limit"


class MalformedProblem(ValueError):
    pass


class Unbounded(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class MilpProblem:
    """Immutable problem: ``min c.x + offset`` s.t. row constraints and column bounds."""

    col_names: tuple
    col_kinds: tuple
    lower: np.ndarray
    upper: np.ndarray
    cost: np.ndarray
    row_names: tuple
    row_senses: tuple
    rhs: np.ndarray
    matrix: sp.csr_matrix
    offset: float = 0.0
    name: str = "problem"

    @property
    def num_cols(self) -> int:
        return len(self.col_names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    @property
    def integer_mask(self) -> np.ndarray:
        return np.fromiter((k == BINARY for k in self.col_kinds), dtype=bool, count=self.num_cols)

    def column_index(self) -> dict:
        return {n: i for i, n in enumerate(self.col_names)}

    def objective(self, x) -> float:
        return float(self.cost @ np.asarray(x, dtype=float)) + self.offset

    def row_activity(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def max_violation(self, x) -> float:
        """Largest row or bound violation of point ``x``."""
        x = np.asarray(x, dtype=float)
        act = self.row_activity(x)
        viol = 0.0
        for sense, a, b in zip(self.row_senses, act, self.rhs):
            if sense == "<=":
                viol = max(viol, a - b)
            elif sense == ">=":
                viol = max(viol, b - a)
            else:
                viol = max(viol, abs(a - b))
        if len(x):
            viol = max(viol, float(np.max(self.lower - x)), float(np.max(x - self.upper)))
        return viol

    def with_bounds(self, lower=None, upper=None) -> "MilpProblem":
        return MilpProblem(self.col_names, self.col_kinds,
                           self.lower if lower is None else np.asarray(lower, dtype=float),
                           self.upper if upper is None else np.asarray(upper, dtype=float),
                           self.cost, self.row_names, self.row_senses, self.rhs, self.matrix,
                           self.offset, self.name)

    def structurally_equal(self, other: "MilpProblem", tol: float = 0.0) -> bool:
        if (self.col_names != other.col_names or self.col_kinds != other.col_kinds
                or self.row_names != other.row_names or self.row_senses != other.row_senses):
            return False
        close = (lambda a, b: np.array_equal(a, b)) if tol == 0 else (
            lambda a, b: np.allclose(a, b, rtol=tol, atol=tol))
        diff = (self.matrix - other.matrix)
        mat_ok = diff.nnz == 0 or np.max(np.abs(diff.data)) <= tol
        return (close(self.lower, other.lower) and close(self.upper, other.upper)
                and close(self.cost, other.cost) and close(self.rhs, other.rhs)
                and mat_ok and abs(self.offset - other.offset) <= tol)


@dataclass
class ProblemBuilder:
    """Incremental construction of a :class:`MilpProblem`."""

    name: str = "problem"
    _names: list = field(default_factory=list)
    _kinds: list = field(default_factory=list)
    _lower: list = field(default_factory=list)
    _upper: list = field(default_factory=list)
    _cost: list = field(default_factory=list)
    _index: dict = field(default_factory=dict)
    _row_names: list = field(default_factory=list)
    _senses: list = field(default_factory=list)
    _rhs: list = field(default_factory=list)
    _rows: list = field(default_factory=list)
    _cols: list = field(default_factory=list)
    _vals: list = field(default_factory=list)
    offset: float = 0.0

    def add_var(self, name: str, kind: str = CONTINUOUS, lower: float = 0.0,
                upper: float = np.inf, cost: float = 0.0) -> int:
        if name in self._index:
            raise MalformedProblem(f"duplicate column {name!r}")
        if kind not in (BINARY, CONTINUOUS):
            raise MalformedProblem(f"unknown column kind {kind!r}")
        if kind == BINARY:
            lower, upper = max(0.0, lower), min(1.0, upper)
        if lower > upper:
            raise MalformedProblem(f"column {name!r} has lower > upper")
        j = len(self._names)
        self._index[name] = j
        self._names.append(name)
        self._kinds.append(kind)
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        self._cost.append(float(cost))
        return j

    def var(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def fix(self, j: int, value: float):
        self._lower[j] = self._upper[j] = float(value)

    def add_cost(self, j: int, value: float):
        self._cost[j] += float(value)

    def add_row(self, name: str, terms: Iterable, sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise MalformedProblem(f"unknown row sense {sense!r}")
        i = len(self._row_names)
        merged: dict = {}
        for j, a in terms:
            if not 0 <= j < len(self._names):
                raise MalformedProblem(f"row {name!r} references unknown column {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        for j in sorted(merged):
            if merged[j] != 0.0:
                self._rows.append(i)
                self._cols.append(j)
                self._vals.append(merged[j])
        self._row_names.append(name)
        self._senses.append(sense)
        self._rhs.append(float(rhs))
        return i

    def build(self) -> MilpProblem:
        if len(set(self._row_names)) != len(self._row_names):
            raise MalformedProblem("duplicate row names")
        m, n = len(self._row_names), len(self._names)
        mat = sp.csr_matrix((np.asarray(self._vals, dtype=float),
                             (np.asarray(self._rows, dtype=np.int64),
                              np.asarray(self._cols, dtype=np.int64))), shape=(m, n))
        mat.sum_duplicates()
        mat.sort_indices()
        return MilpProblem(tuple(self._names), tuple(self._kinds), np.asarray(self._lower),
                           np.asarray(self._upper), np.asarray(self._cost), tuple(self._row_names),
                           tuple(self._senses), np.asarray(self._rhs), mat, float(self.offset),
                           self.name)


@dataclass(frozen=True)
class MilpSolution:
    status: str
    values: np.ndarray | None
    objective: float
    bound: float
    nodes: int = 0
    solver: str = ""

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def value_map(self, problem: MilpProblem) -> Mapping[str, float]:
        if self.values is None:
            return {}
        return dict(zip(problem.col_names, self.values.tolist()))
