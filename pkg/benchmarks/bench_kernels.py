"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--nodes 20000] [--repeat 3]

Times Dijkstra and PageRank on a random sparse digraph, and the full
state-importance analysis on a simulated workload, once per backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vakg import kernels
from vakg.analytics import state_importance
from vakg.ingest import replay
from vakg.model import Lane
from vakg.simulator import ScenarioConfig, generate


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_csr(n, degree, seed):
    rng = np.random.default_rng(seed)
    m = n * degree
    return kernels.CSR.from_edges(n, rng.integers(0, n, m), rng.integers(0, n, m), rng.random(m) + 0.1)


def importance_workload(users, seed):
    events, _ = generate(ScenarioConfig(seed=seed, users=users, steps=(20, 40), alphabet=60,
                                        motifs={"divergence": 2, "backtrack": 2}))
    graph = replay(events)
    goal = max((n for n in graph.nodes.values() if n.lane is Lane.HUMAN_STATE), key=lambda n: n.id).id
    return graph, goal


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nodes", type=int, default=20000)
    p.add_argument("--degree", type=int, default=5)
    p.add_argument("--users", type=int, default=40)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    csr = random_csr(args.nodes, args.degree, args.seed)
    graph, goal = importance_workload(args.users, args.seed)
    cases = {
        "dijkstra": lambda b: kernels.dijkstra(csr, 0, backend=b),
        "pagerank": lambda b: kernels.pagerank(csr, 0.85, 1e-9, 100, backend=b),
        "importance": lambda b: state_importance(graph, goal, backend=b),
    }
    backends = sorted(kernels.BACKENDS)
    print(f"graph: {args.nodes} nodes, {csr.indices.size} edges; importance: {len(graph)} nodes, {args.users} sessions")
    print(f"{'kernel':<12}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        times = {b: best_of(args.repeat, lambda: fn(b)) for b in backends}
        row = f"{name:<12}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>11.1f}x"
        print(row)
    if "compiled" not in kernels.BACKENDS:
        print("compiled kernels not built; reinstall with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
