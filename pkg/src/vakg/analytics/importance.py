"""Which computer states a cohort needed to reach a human-side goal.

The search graph, built per cohort session from its merged step timeline:

* ``C -> U -> C'`` for each computer update (AppliesTo, Produces);
* ``C -> H`` where ``C`` is the computer state in effect just before the
  human update ``H`` (what the user was looking at when acting);
* ``H -> C`` where ``C`` is the computer state right after ``H``'s step;
* ``H -> K`` for the human state ``K`` that ``H`` produces.

Each session starts from its initial computer state. Removing a computer
state ``s`` lengthens or cuts each session's shortest route to the goal.
For a session with baseline length ``d0`` and length ``d`` without ``s``,
the degradation is ``(d - d0) / d``, or 1 when the goal becomes
unreachable. Importance of ``s`` is the mean degradation over the sessions
that reach the goal at all, hence 1.0 exactly when ``s`` cuts every one of
them off and 0.0 when no shortest route needs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .. import kernels
from ..errors import IllegalLane, UnknownNode, UnknownSession, UnreachableGoal
from ..graph import VakgGraph
from ..model import Lane, Side, StateNode


@dataclass(frozen=True)
class SearchGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]
    sources: Tuple[Tuple[str, str], ...]  # (session id, start node)


def search_graph(graph: VakgGraph, cohort: Iterable[str]) -> SearchGraph:
    nodes, edges, sources = set(), set(), []
    for sid in sorted(cohort):
        if sid not in graph.sessions:
            raise UnknownSession(f"unknown session {sid!r}", session_id=sid)
        cursor = graph.sessions[sid]
        computer = {n.step: n for n in graph.chain(sid, Side.COMPUTER)}
        human = {n.step: n for n in graph.chain(sid, Side.HUMAN)}
        state = cursor.initial[Side.COMPUTER]
        nodes.add(state)
        sources.append((sid, state))
        for step in sorted(computer.keys() | human.keys()):
            before = state
            cu = computer.get(step)
            if cu is not None:
                state = graph.produced_state(cu.id)
                nodes.update((cu.id, state))
                edges.update(((before, cu.id), (cu.id, state)))
            hu = human.get(step)
            if hu is not None:
                knowledge = graph.produced_state(hu.id)
                nodes.update((hu.id, knowledge))
                edges.update(((before, hu.id), (hu.id, state), (hu.id, knowledge)))
    return SearchGraph(tuple(sorted(nodes)), tuple(sorted(edges)), tuple(sources))


def _degradation(base: float, now: float) -> float:
    if math.isinf(now):
        return 1.0
    return (now - base) / now


def state_importance(graph: VakgGraph, goal: str, cohort: Optional[Iterable[str]] = None,
                     backend: str | None = None) -> List[Tuple[str, float]]:
    """Rank cohort computer states by how much removing them hurts reaching ``goal``."""
    node = graph.nodes.get(goal)
    if node is None:
        raise UnknownNode(f"goal {goal} is not in the graph", node=goal)
    if node.side is not Side.HUMAN:
        raise IllegalLane(f"goal must be a human-side node, got {node.lane.value}")
    cohort = sorted(graph.sessions) if cohort is None else sorted(set(cohort))
    sg = search_graph(graph, cohort)
    if goal not in sg.nodes:
        raise UnreachableGoal(f"no cohort session reaches {goal}")
    index = {n: i for i, n in enumerate(sg.nodes)}
    csr = kernels.CSR.from_edges(
        len(sg.nodes), [index[a] for a, _ in sg.edges], [index[b] for _, b in sg.edges]
    )
    g = index[goal]
    starts = sorted({index[s] for _, s in sg.sources})
    base = {s: float(kernels.dijkstra(csr, s, backend=backend)[g]) for s in starts}
    sessions = [index[s] for _, s in sg.sources if not math.isinf(base[index[s]])]
    if not sessions:
        raise UnreachableGoal(f"no cohort session reaches {goal}")

    candidates = [n for n in sg.nodes if isinstance(graph.nodes[n], StateNode)
                  and graph.nodes[n].lane is Lane.COMPUTER_STATE]
    blocked = np.zeros(len(sg.nodes), dtype=np.uint8)
    ranked = []
    for cand in candidates:
        c = index[cand]
        blocked[c] = 1
        cache = {}
        total = 0.0
        for s in sessions:
            if s not in cache:
                cache[s] = float(kernels.dijkstra(csr, s, blocked, backend=backend)[g])
            total += _degradation(base[s], cache[s])
        blocked[c] = 0
        ranked.append((cand, total / len(sessions)))
    ranked.sort(key=lambda kv: (-kv[1], kv[0]))
    return ranked
