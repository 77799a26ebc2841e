import random

import pytest

from helpers import cfp, hfp, script, session_events
from oracles import all_simple_paths
from vakg.analytics import Projection, make_view, project, shortest_path
from vakg.analytics.projection import ViewEdge
from vakg.errors import NoPath, UnknownNode, WeightUnavailable
from vakg.graph import VakgGraph
from vakg.ingest import replay
from vakg.model import Lane


def synthetic(n, arcs):
    names = [f"n{i:02d}" for i in range(n)]
    return make_view(VakgGraph(), names, [ViewEdge(names[u], names[v], "Transition") for u, v in arcs]), names


def cs_view(sessions):
    return project(replay(script(sessions)), Projection.lane(Lane.COMPUTER_STATE))


def test_same_node():
    view = cs_view({"s1": ["B", "E"]})
    r = shortest_path(view, cfp("B"), cfp("B"))
    assert r.nodes == (cfp("B"),) and r.weight == 0


def test_three_versus_five_hops(backend):
    view = cs_view({"s1": ["B", "p1", "p2", "E"], "s2": ["B", "q1", "q2", "q3", "q4", "E"]})
    r = shortest_path(view, cfp("B"), cfp("E"), backend=backend)
    assert r.nodes == (cfp("B"), cfp("p1"), cfp("p2"), cfp("E"))
    assert r.weight == 3 and r.weight_tag == "hop"
    # exhaustive check on the same view
    idx = view.index
    arcs = [(idx[e.source], idx[e.target], 1.0) for e in view.edges]
    assert min(w for w, _ in all_simple_paths(len(view), arcs, idx[cfp("B")], idx[cfp("E")])) == 3


def test_no_path_and_unknown():
    view = cs_view({"s1": ["a", "b"], "s2": ["c", "d"]})
    with pytest.raises(NoPath):
        shortest_path(view, cfp("a"), cfp("d"))
    with pytest.raises(NoPath):
        shortest_path(view, cfp("b"), cfp("a"))
    with pytest.raises(UnknownNode):
        shortest_path(view, cfp("a"), "nowhere")


def test_ties_break_lexicographically(backend):
    # 0 -> {1, 2, 3} -> 4, all two hops
    view, names = synthetic(5, [(0, 3), (0, 1), (0, 2), (3, 4), (2, 4), (1, 4)])
    assert shortest_path(view, names[0], names[4], backend=backend).nodes == (names[0], names[1], names[4])


@pytest.mark.parametrize("seed", range(60))
def test_matches_exhaustive_search(seed, backend):
    rng = random.Random(seed)
    n = rng.randint(2, 9)
    arcs = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(1, 3 * n))]
    view, names = synthetic(n, arcs)
    paths = all_simple_paths(n, [(u, v, 1.0) for u, v in arcs], 0, n - 1)
    if not paths:
        with pytest.raises(NoPath):
            shortest_path(view, names[0], names[-1], backend=backend)
        return
    best = min(paths)
    r = shortest_path(view, names[0], names[-1], backend=backend)
    assert r.weight == best[0]
    assert r.nodes == tuple(names[i] for i in best[1])


def test_wall_clock_weights(backend):
    g = replay(session_events("s1", ["a", "b", "c", "d"], wall=True))
    view = project(g, Projection.lane(Lane.COMPUTER_UPDATE))
    first, last = view.nodes[0], view.nodes[-1]
    r = shortest_path(view, first, last, weight="wall_clock", backend=backend)
    assert r.weight == 2.0 and r.weight_tag == "wall_clock" and len(r.nodes) == 3


def test_wall_clock_needs_timestamps():
    g = replay(session_events("s1", ["a", "b", "c"]))
    view = project(g, Projection.lane(Lane.COMPUTER_UPDATE))
    with pytest.raises(WeightUnavailable):
        shortest_path(view, view.nodes[0], view.nodes[-1], weight="wall_clock")
    state_view = project(g, Projection.lane(Lane.COMPUTER_STATE))
    with pytest.raises(WeightUnavailable):
        shortest_path(state_view, cfp("a"), cfp("c"), weight="wall_clock")
    with pytest.raises(WeightUnavailable):
        shortest_path(state_view, cfp("a"), cfp("c"), weight="furlongs")


def test_path_follows_view_edges(backend):
    g = replay(script({"s1": ["a", "b", "c", "a"], "s2": ["b", "d"]}, {"s1": {0: "k1", 2: "k2"}}))
    view = project(g)
    r = shortest_path(view, cfp("a"), hfp("k2"), backend=backend)
    arcs = {(e.source, e.target) for e in view.edges}
    assert all(pair in arcs for pair in zip(r.nodes, r.nodes[1:]))
    assert r.weight == len(r.nodes) - 1
