"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (bad log, invalid graph, no
path, ...), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import queries, simulator
from .errors import VakgError
from .ingest import replay
from .storage import FORMATS, export_graph, import_graphml, load_log, write_log
from .validation import validate


def _graph(path: str):
    return replay(load_log(path))


def _emit(doc, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_ingest(args) -> int:
    graph = _graph(args.log)
    doc = graph.counts()
    doc["digest"] = graph.digest()
    _emit(doc)
    return 0


def cmd_validate(args) -> int:
    problems = validate(_graph(args.log))
    _emit({"valid": not problems, "violations": [p.to_dict() for p in problems]})
    return 1 if problems else 0


def cmd_export(args) -> int:
    data = export_graph(_graph(args.log), args.format)
    if args.output and args.output != "-":
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0


def cmd_import(args) -> int:
    data = sys.stdin.buffer.read() if args.graphml == "-" else Path(args.graphml).read_bytes()
    graph = import_graphml(data)
    problems = validate(graph)
    doc = graph.counts()
    doc["digest"] = graph.digest()
    doc["violations"] = [p.to_dict() for p in problems]
    _emit(doc)
    return 1 if problems else 0


def cmd_analyze(args) -> int:
    graph = _graph(args.log)
    if args.analysis == "pagerank":
        doc = queries.pagerank_doc(graph, args.lane, args.damping, args.tolerance, args.max_iter)
    elif args.analysis == "shortest-path":
        doc = queries.path_doc(graph, args.source, args.target, args.weight, args.lane)
    elif args.analysis == "motifs":
        doc = queries.motifs_doc(graph)
    elif args.analysis == "importance":
        cohort = [s for s in args.cohort.split(",") if s] if args.cohort else None
        doc = queries.importance_doc(graph, args.goal, cohort)
    else:
        doc = queries.stats_doc(graph)
    _emit(doc)
    return 0


def cmd_simulate(args) -> int:
    config = simulator.ScenarioConfig(
        seed=args.seed,
        users=args.users,
        steps=(args.steps_min, args.steps_max),
        alphabet=args.alphabet,
        motifs={k: getattr(args, k) for k in simulator.MOTIF_KEYS},
    )
    events, truth = simulator.generate(config)
    write_log(args.out, events)
    simulator.write_ground_truth(simulator.truth_path(args.out), truth)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    config = ServiceConfig.from_env(data_dir=Path(args.data_dir) if args.data_dir else None, listen=args.listen)
    config.fsync = not args.no_fsync
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vakg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="replay a log and print graph counts")
    s.add_argument("log")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("validate", help="replay a log and check graph invariants")
    s.add_argument("log")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("export", help="export the replayed graph")
    s.add_argument("log")
    s.add_argument("--format", choices=FORMATS, default="graphml")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("import", help="load a GraphML export ('-' for stdin) and validate it")
    s.add_argument("graphml")
    s.set_defaults(func=cmd_import)

    a = sub.add_parser("analyze", help="run an analysis over a log")
    asub = a.add_subparsers(dest="analysis", required=True)
    s = asub.add_parser("pagerank")
    s.add_argument("log")
    s.add_argument("--lane", default="computer_state")
    s.add_argument("--damping", type=float, default=0.85)
    s.add_argument("--tolerance", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=100)
    s = asub.add_parser("shortest-path")
    s.add_argument("log")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--weight", choices=("hop", "wall_clock"), default="hop")
    s.add_argument("--lane")
    s = asub.add_parser("motifs")
    s.add_argument("log")
    s = asub.add_parser("importance")
    s.add_argument("log")
    s.add_argument("--goal", required=True)
    s.add_argument("--cohort", help="comma-separated session ids (default: all)")
    s = asub.add_parser("stats")
    s.add_argument("log")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="write a synthetic log and its ground-truth sidecar")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--users", type=int, default=3)
    s.add_argument("--steps-min", type=int, default=4)
    s.add_argument("--steps-max", type=int, default=10)
    s.add_argument("--alphabet", type=int, default=12)
    for k in simulator.MOTIF_KEYS:
        s.add_argument(f"--{k}", type=int, default=1 if k != "convergence" else 0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--data-dir")
    s.add_argument("--listen")
    s.add_argument("--no-fsync", action="store_true")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except VakgError as exc:
        _emit({"error": exc.to_dict()}, sys.stderr)
        return 1
    except OSError as exc:
        _emit({"error": {"code": "IOError", "message": str(exc)}}, sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
