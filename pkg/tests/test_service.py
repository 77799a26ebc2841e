import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from helpers import cfp, cs, hfp, hs, session_events
from oracles import dense_pagerank
from vakg.errors import BindFailure, ConfigError
from vakg.ingest import replay
from vakg.service import ServiceConfig, create_app, serve
from vakg.simulator import ScenarioConfig, generate
from vakg.storage import import_graphml, load_log


def client(tmp_path, **kw):
    return TestClient(create_app(ServiceConfig(data_dir=tmp_path, fsync=False, **kw)))


def post_all(c, events):
    for e in events:
        body = e.to_dict()
        if e.kind.value == "SessionStart":
            r = c.post("/v1/sessions", json=body)
            assert r.status_code == 201, r.text
            assert r.json()["session_id"] == e.session_id
        else:
            r = c.post(f"/v1/sessions/{e.session_id}/events", json=body)
            assert r.status_code == 200, r.text


def test_start_and_step(tmp_path):
    with client(tmp_path) as c:
        events = session_events("s1", ["a", "b"], {0: "k1"})
        r = c.post("/v1/sessions", json=events[0].to_dict())
        assert r.status_code == 201 and r.json()["session_id"] == "s1"
        r = c.post("/v1/sessions/s1/events", json=events[1].to_dict())
        assert r.status_code == 200
        doc = r.json()
        assert doc["step"] == 0 and doc["state_ids"] == {"computer": cfp("b"), "human": hfp("k1")}


def test_error_mapping(tmp_path):
    with client(tmp_path, max_body_size=4096) as c:
        events = session_events("s1", ["a", "b", "c"])
        c.post("/v1/sessions", json=events[0].to_dict())
        r = c.post("/v1/sessions/s1/events", json=events[2].to_dict())
        assert r.status_code == 409 and r.json()["code"] == "OutOfOrderSeq"
        assert "message" in r.json()
        r = c.post("/v1/sessions", json=events[0].to_dict())
        assert r.status_code == 409 and r.json()["code"] == "DuplicateSessionStart"
        r = c.post("/v1/sessions/zz/events", json={"kind": "SessionEnd", "seq": 1})
        assert r.status_code == 404 and r.json()["code"] == "UnknownSession"
        bad = events[1].to_dict()
        bad["computer_part"]["ops"] = ["E"]
        r = c.post("/v1/sessions/s1/events", json=bad)
        assert r.status_code == 422 and r.json()["code"] == "IllegalOps"
        r = c.post("/v1/sessions/s1/events", content=b"{not json")
        assert r.status_code == 400 and r.json()["code"] == "InvalidEvent"
        r = c.post("/v1/sessions/other/events", json=events[1].to_dict())
        assert r.status_code == 400
        r = c.post("/v1/sessions/s1/events", content=b" " * 5000)
        assert r.status_code == 413
        r = c.post("/v1/sessions", json=events[1].to_dict())
        assert r.status_code == 400


def test_pagerank_against_oracle(tmp_path):
    events, truth = generate(ScenarioConfig(seed=21, users=3, motifs={"divergence": 1, "loop": 1}))
    with client(tmp_path) as c:
        post_all(c, events)
        r = c.get("/v1/analytics/pagerank", params={"lane": "computer_state"})
        assert r.status_code == 200
        scores = r.json()["scores"]
    assert abs(sum(scores.values()) - 1.0) <= 1e-9
    # transition multigraph straight from the generator's sequences
    seqs = [lanes["ComputerState"] for lanes in truth.sequences.values()]
    nodes = sorted({s for seq in seqs for s in seq})
    idx = {n: i for i, n in enumerate(nodes)}
    arcs = [(idx[a], idx[b], 1.0) for seq in seqs for a, b in zip(seq, seq[1:])]
    want = dense_pagerank(len(nodes), arcs)
    assert set(scores) == set(nodes)
    assert np.abs(np.array([scores[n] for n in nodes]) - want).max() < 1e-8


def test_other_analytics(tmp_path):
    events = session_events("s1", ["a", "b", "a"], {1: "goal"}, wall=True)
    with client(tmp_path) as c:
        post_all(c, events)
        r = c.get("/v1/analytics/shortest-path", params={"from": cfp("a"), "to": cfp("b"), "lane": "computer_state"})
        assert r.status_code == 200 and r.json()["path"]["weight"] == 1
        r = c.get("/v1/analytics/shortest-path", params={"from": cfp("b"), "to": "nope"})
        assert r.status_code == 404
        r = c.get("/v1/analytics/shortest-path", params={"to": cfp("b")})
        assert r.status_code == 400
        hits = c.get("/v1/analytics/motifs").json()["hits"]
        assert [h["motif"] for h in hits] == ["Loop"]
        imp = c.get("/v1/analytics/importance", params={"goal": hfp("goal")}).json()["importance"]
        assert imp[0]["importance"] == 1.0
        r = c.get("/v1/analytics/importance", params={"goal": cfp("a")})
        assert r.status_code == 422
        st = c.get("/v1/analytics/stats").json()["sessions"]["s1"]
        assert st["computer_updates"] == 2 and st["wall_clock_span"] == 1.0
        r = c.get("/v1/analytics/pagerank", params={"lane": "sideways"})
        assert r.status_code == 400


def test_export(tmp_path):
    events = session_events("s1", ["a", "b"], {0: "k"})
    with client(tmp_path) as c:
        post_all(c, events)
        r = c.get("/v1/graph/export", params={"format": "graphml"})
        assert r.status_code == 200
        assert import_graphml(r.content).structurally_equal(replay(events))
        assert c.get("/v1/graph/export", params={"format": "dot"}).text.startswith("digraph")
        assert c.get("/v1/graph/export", params={"format": "csv"}).text.startswith("source,target")
        assert c.get("/v1/graph/export", params={"format": "gexf"}).status_code == 400


def test_restart_keeps_acknowledged_events(tmp_path):
    events, _ = generate(ScenarioConfig(seed=2, users=2, motifs={"backtrack": 1}))
    half = len(events) // 2
    with client(tmp_path) as c:
        post_all(c, events[:half])
        before = c.get("/v1/graph/export").content
    # a new process over the same data directory
    with client(tmp_path) as c:
        assert c.get("/v1/graph/export").content == before
        post_all(c, events[half:])
    assert load_log(tmp_path / "events.jsonl") == events
    with client(tmp_path) as c:
        graph = import_graphml(c.get("/v1/graph/export").content)
    assert graph.structurally_equal(replay(events))


def test_rejected_events_are_not_logged(tmp_path):
    events = session_events("s1", ["a", "b"])
    with client(tmp_path) as c:
        post_all(c, events[:1])
        c.post("/v1/sessions/s1/events", json=events[2].to_dict())
    assert load_log(tmp_path / "events.jsonl") == events[:1]


def test_config(tmp_path, monkeypatch):
    monkeypatch.setenv("VAKG_DATA_DIR", str(tmp_path / "d"))
    monkeypatch.setenv("VAKG_LISTEN", "0.0.0.0:9001")
    cfg = ServiceConfig.from_env()
    assert cfg.host_port == ("0.0.0.0", 9001)
    cfg.check()
    assert (tmp_path / "d").is_dir()
    with pytest.raises(ConfigError):
        ServiceConfig(tmp_path, listen="nowhere").check()
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        ServiceConfig(blocker / "sub").check()


def test_bind_failure(tmp_path):
    import socket
    with socket.create_server(("127.0.0.1", 0)) as sock:
        port = sock.getsockname()[1]
        with pytest.raises(BindFailure):
            serve(ServiceConfig(tmp_path, listen=f"127.0.0.1:{port}"))
