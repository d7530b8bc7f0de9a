"""Call-graph construction, SCCs (against a reachability oracle), and the
four termination policies on the bundled corpus."""

from __future__ import annotations

import random

from miniver import corpus_dir
from miniver.ast import DUMMY_SPAN
from miniver.callgraph import (
    CallGraph, DIRECT, Edge, FIRST_ORDER, HIGHER_ORDER, LAMBDA_IN_CYCLE,
    Mode, OVERAPPROX, RECURSIVE_FIELD_INITIALIZER, SELF_CONTRACT_USE,
    build_call_graph, check_termination, sccs,
)
from miniver.parser import parse
from miniver.typecheck import typecheck


def load(name: str):
    path = corpus_dir() / name
    return typecheck(parse(path.read_text(), str(path)))


def named_edges(tp, graph):
    return {
        (tp.callables[e.src].name, tp.callables[e.dst].name, e.kind)
        for e in graph.edges
    }


def test_direct_self_recursion_edges():
    tp = load("gobra_exploit.moo")
    assert named_edges(tp, build_call_graph(tp, FIRST_ORDER)) == {
        ("recurse", "recurse", DIRECT),
        ("test", "recurse", DIRECT),
    }


def test_mutual_recursion_edges():
    tp = load("key_exploit.moo")
    assert named_edges(tp, build_call_graph(tp, FIRST_ORDER)) == {
        ("recurse1", "recurse2", DIRECT),
        ("recurse2", "recurse1", DIRECT),
        ("test", "recurse1", DIRECT),
    }


def test_lambda_invoke_has_no_first_order_edge():
    tp = load("omega_exploit.moo")
    graph = build_call_graph(tp, FIRST_ORDER)
    lam = tp.callable_named("lambda#0")
    assert not any(e.src == lam.id for e in graph.edges)


def test_overapprox_recovers_lambda_self_cycle():
    tp = load("omega_exploit.moo")
    graph = build_call_graph(tp, OVERAPPROX)
    lam = tp.callable_named("lambda#0")
    assert graph.has_self_edge(lam.id, kinds={HIGHER_ORDER})
    # the self-application has exactly one signature-matching target
    assert [e.dst for e in graph.edges if e.src == lam.id] == [lam.id]


def test_overapprox_contains_first_order():
    for path in sorted(corpus_dir().glob("*.moo")):
        tp = typecheck(parse(path.read_text(), str(path)))
        first = {(e.src, e.dst) for e in build_call_graph(tp, FIRST_ORDER).edges}
        over = {(e.src, e.dst) for e in build_call_graph(tp, OVERAPPROX).edges}
        assert first <= over, path.name


def test_scc_examples():
    tp = load("gobra_exploit.moo")
    components = sccs(build_call_graph(tp, FIRST_ORDER))
    by_names = {
        frozenset(tp.callables[m].name for m in c.members): c.is_nontrivial
        for c in components
    }
    assert by_names == {frozenset({"recurse"}): True, frozenset({"test"}): False}

    tp = load("key_exploit.moo")
    components = sccs(build_call_graph(tp, FIRST_ORDER))
    nontrivial = [c for c in components if c.is_nontrivial]
    assert len(nontrivial) == 1
    assert {tp.callables[m].name for m in nontrivial[0].members} == {
        "recurse1", "recurse2"
    }


def test_scc_of_empty_graph():
    assert sccs(CallGraph(nodes=[], edges=[])) == []


def test_scc_against_reachability_oracle():
    rng = random.Random(42)
    for _ in range(200):
        n = rng.randrange(1, 13)
        nodes = list(range(n))
        edges = [
            Edge(u, v, DIRECT, DUMMY_SPAN)
            for u in nodes
            for v in nodes
            if rng.random() < 0.2
        ]
        graph = CallGraph(nodes=nodes, edges=edges)
        # oracle: transitive closure by repeated squaring of the relation
        reach = {(e.src, e.dst) for e in edges}
        changed = True
        while changed:
            changed = False
            for (a, b) in list(reach):
                for (c, d) in list(reach):
                    if b == c and (a, d) not in reach:
                        reach.add((a, d))
                        changed = True
        expected = {}
        for u in nodes:
            key = frozenset(
                [u] + [v for v in nodes if (u, v) in reach and (v, u) in reach]
            )
            expected.setdefault(key, set()).add(u)
        got = {frozenset(c.members) for c in sccs(graph)}
        assert got == set(expected.keys())
        for c in sccs(graph):
            want = len(c.members) > 1 or (c.members[0], c.members[0]) in reach
            assert c.is_nontrivial == want


def test_partial_mode_checks_nothing():
    for name in ("gobra_exploit.moo", "key_exploit.moo", "omega_exploit.moo"):
        assert check_termination(load(name), Mode.PARTIAL) == []


def test_self_check_flags_contracted_self_call_only():
    tp = load("gobra_exploit.moo")
    diags = check_termination(tp, Mode.SELF_CHECK)
    assert [(tp.callables[d.callable].name, d.kind) for d in diags] == [
        ("recurse", SELF_CONTRACT_USE)
    ]
    # mutual recursion slips through a direct-self-edge check
    assert check_termination(load("key_exploit.moo"), Mode.SELF_CHECK) == []
    # an uncontracted self-call has no contract to abuse
    assert check_termination(load("fact.moo"), Mode.SELF_CHECK) == []


def test_callgraph_mode_on_hidden_recursion():
    assert check_termination(load("omega_exploit.moo"), Mode.CALLGRAPH) == []
    tp = load("omega_direct.moo")
    diags = check_termination(tp, Mode.CALLGRAPH)
    assert {d.kind for d in diags} == {RECURSIVE_FIELD_INITIALIZER}


def test_sound_mode_rejects_lambda_cycle():
    tp = load("omega_exploit.moo")
    diags = check_termination(tp, Mode.SOUND)
    assert [(tp.callables[d.callable].name, d.kind) for d in diags] == [
        ("lambda#0", LAMBDA_IN_CYCLE)
    ]


def test_sound_mode_accepts_measured_recursion():
    assert check_termination(load("fact.moo"), Mode.SOUND) == []


def test_cycle_diagnostics_are_closed_walks():
    for name in ("gobra_exploit.moo", "key_exploit.moo", "omega_direct.moo"):
        tp = load(name)
        for mode in (Mode.CALLGRAPH, Mode.SOUND):
            graph = build_call_graph(
                tp, OVERAPPROX if mode == Mode.SOUND else FIRST_ORDER
            )
            succ = {(e.src, e.dst) for e in graph.edges}
            for d in check_termination(tp, mode):
                assert d.cycle, (name, d)
                if len(d.cycle) == 1:
                    continue
                closed = d.cycle + [d.cycle[0]]
                for a, b in zip(closed, closed[1:]):
                    assert (a, b) in succ, (name, d)
