"""Instance in, configuration and risk figures out; plus alpha/beta sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields

from . import bip_model, exact_risk, risk_measures
from .attack_graph import AttackGraph
from .bip_model import ModelWeights
from .instance import Instance, attack_graph
from .milp import GAP_LIMIT, OPTIMAL, TIME_LIMIT, Limits, solve
from .network import NetworkInstance


class SolverLimitReached(RuntimeError):
    pass


@dataclass
class RiskReport:
    status: str
    delivered_value: float
    total_value: float
    risk: float
    reach: float
    reach_norm: float
    path: float
    hybrid: float
    severed: list = field(default_factory=list)
    probabilities: dict = field(default_factory=dict)

    def to_dict(self, probabilities: bool = True) -> dict:
        d = asdict(self)
        d["severed"] = [list(e) for e in self.severed]
        if not probabilities:
            d.pop("probabilities")
        return d


def instance_weights(inst: Instance, **overrides) -> ModelWeights:
    base = ModelWeights.from_dict(inst.weights) if inst.weights else ModelWeights()
    return base.replace(**{k: v for k, v in overrides.items() if v is not None})


def evaluate(g: AttackGraph, severed=(), beta: float = 0.5,
             epsilon: float = risk_measures.DEFAULT_EPSILON) -> dict:
    """Exact risk, Reach, Path and their hybrid on a graph with ``severed`` arcs removed."""
    scores = exact_risk.arisk(g, severed)
    r = risk_measures.reach(g, severed)
    p = risk_measures.path(g, severed, epsilon) if g.augmented else 0.0
    return {"risk": scores.risk, "reach": r.value, "reach_norm": r.normalized, "path": p,
            "hybrid": risk_measures.hybrid(r.normalized, p, beta),
            "probabilities": dict(scores.probability)}


def evaluate_delivery(n: NetworkInstance, g: AttackGraph, delivered, beta: float,
                      epsilon: float, status: str = OPTIMAL) -> RiskReport:
    severed = sorted(bip_model.severed_by_delivery(g, n, delivered))
    figures = evaluate(g, severed, beta, epsilon)
    values = {f.id: f.value for f in n.flows}
    return RiskReport(status=status, delivered_value=sum(values[f] for f in delivered),
                      total_value=sum(values.values()), severed=severed, **figures)


def solve_instance(inst: Instance, weights: ModelWeights, limits: Limits | None = None,
                   solver: str = "auto", graph: AttackGraph | None = None):
    """Build and solve the joint model; return ``(Configuration, RiskReport)``.

    Raises :class:`SolverLimitReached` if the solver stops without any
    integral solution.
    """
    g = graph if graph is not None else attack_graph(inst)
    model = bip_model.build(inst.network, g, weights)
    sol = solve(model.problem, limits, solver)
    if not sol.has_solution:
        if sol.status in (TIME_LIMIT, GAP_LIMIT):
            raise SolverLimitReached(f"solver stopped ({sol.status}) without a solution")
        raise bip_model.InfeasibleByConstruction(f"model is {sol.status}")
    config = bip_model.extract_configuration(model, sol)
    report = evaluate_delivery(inst.network, g, config.delivered, weights.beta, weights.epsilon,
                               sol.status)
    return config, report


# -- sweeps ------------------------------------------------------------------------------

@dataclass
class SweepRow:
    alpha: float
    beta: float
    delivered_value: float
    functionality_norm: float
    risk_exact: float
    risk_norm: float
    reach: float
    path: float
    hybrid: float
    blocked_internal: int
    blocked_external: int
    solve_status: str
    solve_time_s: float | None = None


COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass
class SweepResult:
    rows: list
    baseline_value: float
    baseline_risk: float

    @property
    def all_optimal(self) -> bool:
        return all(r.solve_status == OPTIMAL for r in self.rows)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def _ratio(x: float, base: float) -> float:
    return x / base if base > 0 else 0.0


def _blocked_split(n: NetworkInstance, blocked) -> tuple:
    hosts = set(n.hosts)
    internal = sum(1 for fid in blocked if {n.flow(fid).src, n.flow(fid).dst} <= hosts)
    return internal, len(blocked) - internal


def sweep(inst: Instance, alphas, betas, limits: Limits | None = None, solver: str = "auto",
          weights: ModelWeights | None = None, timing: bool = False) -> SweepResult:
    """One row per (alpha, beta), ordered by alpha then beta.

    Normalizers come from the alpha = 1 run, where no security term is
    active.  All alpha = 1 rows reuse that run since beta does not enter the
    objective there.
    """
    alphas = sorted(set(float(a) for a in alphas))
    betas = sorted(set(float(b) for b in betas))
    if not alphas or not betas:
        raise ValueError("need at least one alpha and one beta")
    if any(not 0.0 < a <= 1.0 for a in alphas):
        raise ValueError("alphas must lie in (0, 1]")
    weights = weights or instance_weights(inst)
    g = attack_graph(inst)

    def run(alpha, beta):
        t0 = time.perf_counter()
        config, rep = solve_instance(inst, weights.replace(alpha=alpha, beta=beta), limits,
                                     solver, g)
        return config, rep, time.perf_counter() - t0

    base_config, base, base_time = run(1.0, betas[0])
    rows = []
    for alpha in alphas:
        for beta in betas:
            if alpha == 1.0:
                config, rep, dt = base_config, base, base_time
                # hybrid depends on beta even when the configuration does not
                rep = evaluate_delivery(inst.network, g, config.delivered, beta, weights.epsilon,
                                        base.status)
            else:
                config, rep, dt = run(alpha, beta)
            bi, be = _blocked_split(inst.network, config.blocked)
            rows.append(SweepRow(
                alpha=alpha, beta=beta, delivered_value=rep.delivered_value,
                functionality_norm=_ratio(rep.delivered_value, base.delivered_value),
                risk_exact=rep.risk, risk_norm=_ratio(rep.risk, base.risk),
                reach=rep.reach_norm, path=rep.path, hybrid=rep.hybrid,
                blocked_internal=bi, blocked_external=be, solve_status=rep.status,
                solve_time_s=round(dt, 3) if timing else None))
    return SweepResult(rows, base.delivered_value, base.risk)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 10) + 0.0)
    return str(v)


def report(result: SweepResult, fmt: str = "csv") -> str:
    if not result.rows:
        raise ValueError("empty sweep")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in result.rows:
            w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        out = []
        for r in result.rows:
            d = asdict(r)
            out.append({k: (round(v, 10) + 0.0 if isinstance(v, float) and math.isfinite(v) else v)
                        for k, v in d.items()})
        return json.dumps(out, indent=1) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
