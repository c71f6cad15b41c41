"""Command line entry point: generate, solve, sweep, evaluate, export.

Exit codes: 0 success, 2 invalid input, 3 solver limit reached (partial
results are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from .attack_graph import AttackGraph, AttackGraphError, augment_with_targets
from .benchmark_gen import GenSpec, generate
from .bip_model import ModelWeights, build
from .instance import Instance, attack_graph
from .milp import GAP_LIMIT, OPTIMAL, TIME_LIMIT, Limits
from .milp.mpsio import NameTooLong, to_lp, to_mps
from .network import NetworkError
from .toy import toy_instance

EXIT_OK, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3
DEFAULT_ALPHAS = [round(0.1 * i, 1) for i in range(1, 11)]

log = logging.getLogger("netsecopt")


class InputError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_instance(path: str) -> Instance:
    return Instance.from_dict(_load_json(path))


def _weights(args, inst: Instance | None) -> ModelWeights:
    w = pipeline.instance_weights(inst) if inst is not None else ModelWeights()
    if getattr(args, "weights", None):
        data = _load_json(args.weights)
        ModelWeights.from_dict({**w.__dict__, **data})   # rejects unknown keys
        w = w.replace(**data)
    return w.replace(**{k: v for k, v in (("alpha", getattr(args, "alpha", None)),
                                         ("beta", getattr(args, "beta", None))) if v is not None})


def _limits(args) -> Limits:
    return Limits(time_s=args.time_limit, gap=args.gap)


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _export(model_problem, fmt: str, mangle):
    if fmt == "lp":
        return to_lp(model_problem, mangle)
    return to_mps(model_problem, "free" if fmt == "free-mps" else "fixed", mangle)


def _write_export(exp, path: str):
    Path(path).write_text(exp.text)
    if exp.names:
        Path(path + ".names.json").write_text(exp.sidecar_json() + "\n")
    if exp.lossy:
        log.warning("some coefficients were rounded to fit fixed-form MPS fields")


# -- subcommands -------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.toy:
        inst = toy_instance()
    else:
        inst = generate(GenSpec(pods=args.pods, flows_per_host=args.flows_per_host,
                                traffic_type_count=args.types,
                                exploitable_host_pct=args.vuln_pct,
                                vulns_per_host_avg=args.vulns_per_host, seed=args.seed))
    _emit(inst.to_json(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    weights = _weights(args, inst)
    if args.solver == "external":
        if not args.mps_out:
            raise InputError("--solver external needs --mps-out PATH")
        model = build(inst.network, attack_graph(inst), weights)
        _write_export(_export(model.problem, "mps", None), args.mps_out)
        return EXIT_OK
    try:
        config, rep = pipeline.solve_instance(inst, weights, _limits(args), args.solver)
    except pipeline.SolverLimitReached as exc:
        log.error("%s", exc)
        return EXIT_LIMIT
    out = config.to_dict()
    out["report"] = rep.to_dict(probabilities=False)
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    return EXIT_OK if rep.status == OPTIMAL else EXIT_LIMIT


def cmd_sweep(args) -> int:
    inst = _load_instance(args.instance)
    weights = _weights(args, inst)
    try:
        result = pipeline.sweep(inst, args.alphas, args.betas, _limits(args), args.solver,
                                weights, timing=args.timing)
    except pipeline.SolverLimitReached as exc:
        log.error("%s", exc)
        return EXIT_LIMIT
    _emit(pipeline.report(result, args.format), args.out)
    limited = any(r.solve_status in (GAP_LIMIT, TIME_LIMIT) for r in result.rows)
    return EXIT_LIMIT if limited else EXIT_OK


def cmd_evaluate(args) -> int:
    data = _load_json(args.graph)
    delivered = None
    if "network" in data:
        inst = Instance.from_dict(data)
        g = attack_graph(inst)
        if args.config:
            delivered = _load_json(args.config)["delivered"]
        else:
            delivered = [f.id for f in inst.network.flows]
        rep = pipeline.evaluate_delivery(inst.network, g, delivered, args.beta, args.epsilon)
        out = rep.to_dict()
    else:
        g = AttackGraph.from_dict(data)
        if not g.augmented:
            g = augment_with_targets(g)
        out = pipeline.evaluate(g, (), args.beta, args.epsilon)
    _emit(json.dumps(out, indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = _load_instance(args.instance)
    model = build(inst.network, attack_graph(inst), _weights(args, inst))
    exp = _export(model.problem, args.format, False if args.no_mangle else None)
    if args.out:
        _write_export(exp, args.out)
    else:
        sys.stdout.write(exp.text)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------------

def _model_flags(p):
    p.add_argument("--alpha", type=float, help="functionality weight in [0, 1]")
    p.add_argument("--beta", type=float, help="Reach share of the security term in [0, 1]")
    p.add_argument("--weights", metavar="FILE", help="JSON object of model weights")


def _solver_flags(p, external: bool = False):
    choices = ["auto", "bnb", "highs"] + (["external"] if external else [])
    p.add_argument("--solver", choices=choices, default="auto")
    p.add_argument("--time-limit", type=float, default=600.0, metavar="SECONDS")
    p.add_argument("--gap", type=float, default=1e-4)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netsecopt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a fat-tree or toy instance")
    p.add_argument("--toy", action="store_true", help="emit the seven-device example")
    p.add_argument("--pods", type=int, default=4)
    p.add_argument("--flows-per-host", type=int, default=1)
    p.add_argument("--types", type=int, default=2)
    p.add_argument("--vuln-pct", type=int, default=20)
    p.add_argument("--vulns-per-host", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="optimize one instance")
    p.add_argument("instance")
    _model_flags(p)
    _solver_flags(p, external=True)
    p.add_argument("--mps-out", metavar="PATH", help="with --solver external: write MPS and exit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve over a grid of alpha and beta")
    p.add_argument("instance")
    _model_flags(p)
    _solver_flags(p)
    p.add_argument("--alphas", type=_floats, default=DEFAULT_ALPHAS)
    p.add_argument("--betas", type=_floats, default=[0.5])
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--timing", action="store_true", help="fill the solve_time_s column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="exact risk, Reach and Path of a graph or configuration")
    p.add_argument("graph", help="attack graph JSON or instance JSON")
    p.add_argument("--config", help="configuration JSON (instance input only)")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("export", help="write the model as MPS or LP")
    p.add_argument("instance")
    _model_flags(p)
    p.add_argument("--format", choices=["mps", "free-mps", "lp"], default="mps")
    p.add_argument("--no-mangle", action="store_true",
                   help="fail instead of renaming columns that do not fit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, NetworkError, AttackGraphError, NameTooLong, KeyError, TypeError,
            ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
