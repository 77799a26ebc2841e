import pytest

from helpers import cs, hs
from vakg.errors import IllegalLane, IllegalOps, NoNodesAtStep, SessionClosed, StepConflict, UnknownSession
from vakg.graph import VakgGraph, add_sync, add_transition, upsert_state
from vakg.model import Edge, EdgeKind, Lane, OperationKind, Side, UpdateNode, update_id
from vakg.validation import validate


def opened():
    g = VakgGraph()
    g.open_session("s1", "u1", cs("start"), hs("none"))
    return g


def test_upsert_is_idempotent():
    g = VakgGraph()
    fp, created = upsert_state(g, Lane.COMPUTER_STATE, {"a": 1})
    again, created2 = upsert_state(g, Lane.COMPUTER_STATE, {"a": 1})
    assert (created, created2) == (True, False)
    assert fp == again and len(g) == 1


def test_upsert_distinct_payloads():
    g = VakgGraph()
    upsert_state(g, Lane.COMPUTER_STATE, {"a": 1})
    upsert_state(g, Lane.COMPUTER_STATE, {"a": 2})
    assert len(g) == 2


def test_upsert_rejects_update_lane():
    with pytest.raises(IllegalLane):
        upsert_state(VakgGraph(), Lane.HUMAN_UPDATE, {})


def test_first_transition_is_step_zero():
    g = opened()
    start = g.sessions["s1"].initial[Side.COMPUTER]
    t = add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("next"))
    node = g.nodes[t.update_id]
    assert node.step == 0 and node.id == update_id("s1", Lane.COMPUTER_UPDATE, 0) == "(s1, ComputerUpdate, 0)"
    assert g.applied_state(t.update_id) == start
    assert g.sessions["s1"].current[Side.COMPUTER] == t.state_id


def test_return_to_initial_state_reuses_node():
    g = opened()
    start = g.sessions["s1"].initial[Side.COMPUTER]
    add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("elsewhere"))
    t = add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("start"))
    assert t.state_id == start and not t.created


def test_three_transitions_chain_of_two():
    g = opened()
    for label in "abc":
        add_transition(g, "s1", Side.COMPUTER, ["A"], {}, cs(label))
    nexts = [e for e in g.edges if e.kind is EdgeKind.TEMPORAL_NEXT]
    assert len(nexts) == 2
    assert [(g.nodes[e.source].step, g.nodes[e.target].step) for e in nexts] == [(0, 1), (1, 2)]


def test_transition_errors():
    g = opened()
    with pytest.raises(UnknownSession):
        add_transition(g, "nope", Side.COMPUTER, ["V"], {}, {})
    with pytest.raises(IllegalOps):
        add_transition(g, "s1", Side.COMPUTER, ["E"], {}, {})
    with pytest.raises(IllegalOps):
        add_transition(g, "s1", Side.HUMAN, ["V"], {}, {})
    with pytest.raises(IllegalOps):
        add_transition(g, "s1", Side.HUMAN, [], {}, {})
    g.close_session("s1")
    with pytest.raises(SessionClosed):
        add_transition(g, "s1", Side.COMPUTER, ["V"], {}, {})


def test_both_sides_share_a_step_but_not_twice():
    g = opened()
    add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("a"))
    add_transition(g, "s1", Side.HUMAN, ["P"], {}, hs("b"), step=0)
    with pytest.raises(StepConflict):
        add_transition(g, "s1", Side.HUMAN, ["P"], {}, hs("c"), step=0)
    with pytest.raises(StepConflict):
        add_transition(g, "s1", Side.HUMAN, ["P"], {}, hs("c"), step=5)


def test_sync_update_to_update():
    g = opened()
    c = add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("a"))
    h = add_transition(g, "s1", Side.HUMAN, ["P"], {}, hs("b"), step=0)
    assert add_sync(g, "s1", 0) == 1
    sync = [e for e in g.edges if e.kind is EdgeKind.SYNC]
    assert sync == [Edge(EdgeKind.SYNC, h.update_id, c.update_id, session="s1", step=0)]


def test_sync_computer_only_links_human_state():
    g = opened()
    c = add_transition(g, "s1", Side.COMPUTER, ["A"], {}, cs("a"))
    assert add_sync(g, "s1", 0) == 1
    (edge,) = [e for e in g.edges if e.kind is EdgeKind.SYNC]
    assert edge.source == g.sessions["s1"].current[Side.HUMAN]
    assert edge.target == c.update_id


def test_sync_is_idempotent_and_needs_nodes():
    g = opened()
    add_transition(g, "s1", Side.COMPUTER, ["A"], {}, cs("a"))
    assert add_sync(g, "s1", 0) == 1
    assert add_sync(g, "s1", 0) == 0
    with pytest.raises(NoNodesAtStep):
        add_sync(g, "s1", 3)
    with pytest.raises(UnknownSession):
        add_sync(g, "zz", 0)


def test_validate_empty_graph():
    assert validate(VakgGraph()) == []


def test_validate_missing_produces_names_the_node():
    g = opened()
    start = g.sessions["s1"].initial[Side.COMPUTER]
    node = UpdateNode(update_id("s1", Lane.COMPUTER_UPDATE, 0), Lane.COMPUTER_UPDATE, "s1", "u1", 0,
                      frozenset({OperationKind.VISUALIZATION}))
    g.add_node(node)
    g.add_edge(Edge(EdgeKind.APPLIES_TO, start, node.id))
    g.sessions["s1"].next_step = 1
    report = validate(g)
    assert len(report) == 1
    assert report[0].subject == node.id and report[0].rule == "produces"


def test_validate_catches_tampering():
    g = opened()
    add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("a"))
    # state whose id does not match its payload
    from vakg.model import StateNode
    g.add_node(StateNode("f" * 64, Lane.COMPUTER_STATE, {"x": 1}))
    rules = {v.rule for v in validate(g)}
    assert "fingerprint" in rules


def test_validate_catches_cross_side_edge():
    g = opened()
    h = add_transition(g, "s1", Side.HUMAN, ["X"], {}, hs("a"))
    g.add_edge(Edge(EdgeKind.APPLIES_TO, g.sessions["s1"].initial[Side.COMPUTER], h.update_id))
    rules = [v.rule for v in validate(g)]
    assert "applies-to" in rules


def test_copy_and_digest():
    g = opened()
    add_transition(g, "s1", Side.COMPUTER, ["V"], {}, cs("a"))
    h = g.copy()
    assert h.structurally_equal(g) and h.digest() == g.digest()
    add_transition(h, "s1", Side.COMPUTER, ["V"], {}, cs("b"))
    assert h.digest() != g.digest()
    assert len(g.edges) == 2
