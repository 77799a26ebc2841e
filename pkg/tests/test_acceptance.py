"""Acceptance criteria, one marked group per criterion.

``pytest tests/test_acceptance.py`` prints a PASS/FAIL line per criterion in
the terminal summary.
"""

import math
import random
import time
from collections import Counter

import numpy as np
import pytest
from fastapi.testclient import TestClient

from helpers import MOTIF_EXPECTED, MOTIF_FIXTURES, cfp, hfp, script, session_events
from oracles import all_simple_path_minima, brute_motifs, dense_pagerank, importance_oracle
from test_motifs import sequences_from_events
from vakg.analytics import Projection, detect_motifs, make_view, pagerank, project, shortest_path, state_importance
from vakg.analytics.projection import ViewEdge
from vakg.errors import NoPath
from vakg.graph import VakgGraph
from vakg.ingest import GraphBuilder, replay
from vakg.model import EdgeKind, Lane, UpdateNode
from vakg.service import ServiceConfig, create_app
from vakg.simulator import ScenarioConfig, generate
from vakg.storage import export_graph, import_graphml, load_log
from vakg.validation import validate


def crit(number, title):
    return pytest.mark.acceptance(number, title)


def seeded_config(seed, max_states=10, max_sessions=4):
    rng = random.Random(10_000 + seed)
    users = rng.randint(1, max_sessions)
    alphabet = rng.randint(3, max_states)
    motifs, budget = {}, alphabet - 1
    for kind, cost in (("divergence", 3), ("convergence", 3), ("backtrack", 3), ("loop", 2)):
        if kind in ("divergence", "convergence") and users < 2:
            continue
        if rng.random() < 0.5 and cost <= budget and (kind != "loop" or users >= 1):
            motifs[kind] = 1
            budget -= cost
    return ScenarioConfig(seed=seed, users=users, steps=(3, 10), alphabet=alphabet, motifs=motifs)


# 1 ------------------------------------------------------------------------

@crit(1, "shared-state reproduction")
def test_identical_sessions_share_states():
    start = time.perf_counter()
    labels = [f"v{i}" for i in range(11)]
    knowledge = {k: f"k{k % 4}" for k in range(10)}
    single = replay(script({"s1": labels}, {"s1": knowledge}))
    double = replay(script({"s1": labels, "s2": labels}, {"s1": knowledge, "s2": knowledge}))
    elapsed = time.perf_counter() - start

    def count(g, state):
        return sum(1 for n in g.nodes.values() if n.lane.is_state == state)

    assert count(single, False) == 20
    assert count(double, True) == count(single, True)
    assert count(double, False) == 2 * count(single, False)
    assert elapsed < 1.0


# 2 ------------------------------------------------------------------------

@crit(2, "motif fixtures A-D")
@pytest.mark.parametrize("name", sorted(MOTIF_FIXTURES))
def test_motif_fixture(name):
    start = time.perf_counter()
    hits = detect_motifs(replay(script(MOTIF_FIXTURES[name])))
    elapsed = time.perf_counter() - start
    motif, anchor, sessions = MOTIF_EXPECTED[name]
    assert [(h.motif.value, h.anchor, h.sessions) for h in hits] == [(motif, cfp(anchor), sessions)]
    assert elapsed < 1.0


# 3 ------------------------------------------------------------------------

@crit(3, "motif oracle equivalence")
def test_motifs_equal_brute_force():
    start = time.perf_counter()
    checked = 0
    for seed in range(150):
        cfg = seeded_config(seed)
        events, _ = generate(cfg)
        got = {h.key for h in detect_motifs(replay(events))}
        want = set()
        for lane, seqs in sequences_from_events(events).items():
            want |= brute_motifs(seqs, lane)
        assert got == want, f"seed {seed}"
        checked += 1
    assert checked >= 100
    assert time.perf_counter() - start < 30.0


# 4 ------------------------------------------------------------------------

def random_projected_view(rng):
    """A contracted state lane of a random multi-session log, at most 12 nodes."""
    alphabet = [f"c{i}" for i in range(rng.randint(2, 12))]
    sessions = {f"s{i}": [rng.choice(alphabet) for _ in range(rng.randint(2, 8))] for i in range(rng.randint(1, 4))}
    humans = {sid: {k: f"h{rng.randrange(5)}" for k in range(len(seq)) if rng.random() < 0.3}
              for sid, seq in sessions.items()}
    g = replay(script(sessions, humans))
    lane = rng.choice([Lane.COMPUTER_STATE, Lane.COMPUTER_STATE, Lane.HUMAN_STATE])
    return project(g, Projection.lane(lane))


@crit(4, "Dijkstra oracle")
def test_shortest_path_equals_exhaustive_minimum():
    start = time.perf_counter()
    rng = random.Random(4)
    graphs = pairs = 0
    while graphs < 250:
        view = random_projected_view(rng)
        if not 2 <= len(view) <= 12:
            continue
        graphs += 1
        arcs = [(view.index[e.source], view.index[e.target], 1.0) for e in view.edges]
        for _ in range(3):
            s = rng.randrange(len(view))
            minima = all_simple_path_minima(len(view), arcs, s)
            t = rng.randrange(len(view))
            if math.isinf(minima[t]):
                with pytest.raises(NoPath):
                    shortest_path(view, view.nodes[s], view.nodes[t])
            else:
                assert shortest_path(view, view.nodes[s], view.nodes[t]).weight == minima[t]
            pairs += 1
    assert graphs >= 200
    assert time.perf_counter() - start < 30.0


# 5 ------------------------------------------------------------------------

def synthetic_view(n, arcs):
    names = [f"n{i:02d}" for i in range(n)]
    return make_view(VakgGraph(), names, [ViewEdge(names[u], names[v], "Transition") for u, v in arcs]), names


@crit(5, "PageRank")
def test_pagerank_against_dense_oracle(backend):
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(1, 15)
        arcs = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 3 * n))]
        view, names = synthetic_view(n, arcs)
        scores = pagerank(view, backend=backend).scores
        assert abs(sum(scores.values()) - 1.0) <= 1e-9
        want = dense_pagerank(n, [(u, v, 1.0) for u, v in arcs])
        assert np.abs(np.array([scores[x] for x in names]) - want).max() <= 1e-8
    for seed in range(30):
        g = replay(generate(seeded_config(seed))[0])
        for lane in Lane:
            scores = pagerank(project(g, Projection.lane(lane)), backend=backend).scores
            assert abs(sum(scores.values()) - 1.0) <= 1e-9


@crit(5, "PageRank")
@pytest.mark.parametrize("n", [1, 2, 3, 5, 12, 50])
def test_pagerank_uniform_on_cycles(n, backend):
    view, _ = synthetic_view(n, [(i, (i + 1) % n) for i in range(n)])
    for score in pagerank(view, backend=backend).scores.values():
        assert abs(score - 1.0 / n) <= 1e-9


# 6 ------------------------------------------------------------------------

def property_corpus():
    for seed in range(60):
        yield generate(seeded_config(seed))[0]
    rng = random.Random(6)
    for _ in range(40):
        alphabet = [f"c{i}" for i in range(rng.randint(1, 6))]
        events = []
        for i in range(rng.randint(1, 3)):
            comp = [rng.choice(alphabet) for _ in range(rng.randint(1, 6))]
            hum = {k: f"h{rng.randrange(3)}" for k in range(7) if rng.random() < 0.4}
            events.extend(session_events(f"s{i}", comp, hum))
        yield events


@crit(6, "FSM structural invariants")
def test_validate_after_every_ingest():
    for events in property_corpus():
        builder = GraphBuilder()
        for event in events:
            builder.ingest(event)
            assert validate(builder.graph) == []
        g = builder.graph
        applies = Counter(e.target for e in g.edges if e.kind is EdgeKind.APPLIES_TO)
        produces = Counter(e.source for e in g.edges if e.kind is EdgeKind.PRODUCES)
        for node in g.nodes.values():
            if isinstance(node, UpdateNode):
                assert applies[node.id] == 1 and produces[node.id] == 1


# 7 ------------------------------------------------------------------------

@crit(7, "determinism and durability")
def test_replay_deterministic_and_graphml_roundtrip():
    for events in property_corpus():
        a, b = replay(events), replay(events)
        assert a.structurally_equal(b)
        assert import_graphml(export_graph(a, "graphml")).structurally_equal(a)


@crit(7, "determinism and durability")
def test_service_restart_loses_nothing(tmp_path):
    events, _ = generate(ScenarioConfig(seed=77, users=3, motifs={"divergence": 1, "backtrack": 1}))
    acked = []
    cfg = ServiceConfig(data_dir=tmp_path, fsync=True)
    with TestClient(create_app(cfg)) as c:
        for e in events[: len(events) * 2 // 3]:
            url = "/v1/sessions" if e.kind.value == "SessionStart" else f"/v1/sessions/{e.session_id}/events"
            r = c.post(url, json=e.to_dict())
            assert 200 <= r.status_code < 300
            acked.append(e)
    # the client is gone without any shutdown handshake beyond the response
    with TestClient(create_app(cfg)) as c:
        restored = import_graphml(c.get("/v1/graph/export").content)
    assert load_log(tmp_path / "events.jsonl") == acked
    assert restored.structurally_equal(replay(acked))


# 8 ------------------------------------------------------------------------

@crit(8, "state importance")
def test_articulation_points_score_one():
    events = script({"s1": ["a", "p", "m", "e"], "s2": ["a", "q", "m", "e"]},
                    {"s1": {3: "goal"}, "s2": {3: "goal"}})
    got = dict(state_importance(replay(events), hfp("goal")))
    for label in ("a", "m", "e"):
        assert got[cfp(label)] == 1.0


@crit(8, "state importance")
def test_unused_states_score_zero():
    events = script({"s1": ["a", "b"], "s2": ["a", "x", "y"]}, {"s1": {1: "goal"}})
    got = dict(state_importance(replay(events), hfp("goal")))
    assert got[cfp("x")] == 0.0 and got[cfp("y")] == 0.0


@crit(8, "state importance")
@pytest.mark.parametrize("sessions", [
    {"s1": ["B", "L", "E"], "s2": ["B", "R", "E"]},
    {"s1": ["B", "L", "E"], "s2": ["B", "R", "R2", "E"]},
])
def test_diamond_matches_oracle(sessions, backend):
    humans = {sid: {len(seq) - 1: "goal"} for sid, seq in sessions.items()}
    events = script(sessions, humans)
    got = dict(state_importance(replay(events), hfp("goal"), backend=backend))
    want = importance_oracle(events, hfp("goal"))
    assert set(got) == set(want)
    for state, value in want.items():
        assert abs(got[state] - value) <= 1e-12
