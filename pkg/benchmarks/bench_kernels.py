"""Compare the Cython and pure-Python graph kernels.

Reach and Path run on a generated fat-tree attack graph.  Exact risk runs on
a large random layered DAG: the generated graphs have many multi-entry
cycles, where the recursive cycle evaluation dominates and the kernel does not.

    python benchmarks/bench_kernels.py --pods 8 --repeat 5
"""

import argparse
import time

import numpy as np

from netsecopt import _kernels, exact_risk, risk_measures
from netsecopt.attack_graph import Capability, Exploit, build
from netsecopt.benchmark_gen import GenSpec, generate
from netsecopt.instance import attack_graph


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def layered_dag(layers: int, width: int, seed: int = 0):
    """Alternating capability/exploit layers with random fan-in of up to three."""
    rng = np.random.default_rng(seed)
    caps = [Capability(f"d{i}", 1, float(rng.integers(1, 101))) for i in range(width)]
    exploits, pre, grant = [], [], []
    prev = [c.id for c in caps]
    for layer in range(layers):
        nxt = []
        for i in range(width):
            eid = f"x{layer}_{i}"
            logic = "AND" if rng.random() < 0.5 else "OR"
            exploits.append(Exploit(eid, logic=logic, probability=float(rng.uniform(0.05, 1.0))))
            for j in rng.choice(len(prev), size=int(rng.integers(1, 4)), replace=False):
                pre.append((prev[j], eid))
            c = Capability(f"d{layer}_{i}", 2, float(rng.integers(1, 101)))
            caps.append(c)
            grant.append((eid, c.id))
            nxt.append(c.id)
        prev = nxt
    return build(caps, exploits, pre, grant, [caps[i].id for i in range(width)])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pods", type=int, default=8)
    ap.add_argument("--flows-per-host", type=int, default=10)
    ap.add_argument("--vuln-pct", type=int, default=50)
    ap.add_argument("--vulns-per-host", type=float, default=5.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--dag-layers", type=int, default=200)
    ap.add_argument("--dag-width", type=int, default=100)
    args = ap.parse_args(argv)

    spec = GenSpec(pods=args.pods, flows_per_host=args.flows_per_host, traffic_type_count=3,
                   exploitable_host_pct=args.vuln_pct, vulns_per_host_avg=args.vulns_per_host,
                   seed=args.seed)
    g = attack_graph(generate(spec))
    g.arrays  # build the array view outside the timed region
    dag = layered_dag(args.dag_layers, args.dag_width, args.seed)
    dag.arrays
    print(f"fat-tree graph: {len(g.nodes)} nodes, {len(g.edges)} edges")
    print(f"layered DAG:    {len(dag.nodes)} nodes, {len(dag.edges)} edges")

    tasks = {
        "arisk": lambda: exact_risk.arisk(dag),
        "reach": lambda: risk_measures.reach(g),
        "path": lambda: risk_measures.path(g),
    }
    timings = {}
    for name in sorted(_kernels.BACKENDS):
        with _kernels.use_backend(name):
            timings[name] = {task: best_of(fn, args.repeat) for task, fn in tasks.items()}
    print(f"{'task':<8}" + "".join(f"{b:>12}" for b in sorted(timings)) + "     speedup")
    for task in tasks:
        row = [timings[b][task] for b in sorted(timings)]
        speed = ""
        if "cython" in timings:
            speed = f"{timings['python'][task] / timings['cython'][task]:10.1f}x"
        print(f"{task:<8}" + "".join(f"{t * 1e3:10.2f}ms" for t in row) + speed)


if __name__ == "__main__":
    main()
