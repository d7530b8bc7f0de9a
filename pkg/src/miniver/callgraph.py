"""Call graphs over MiniOO callables, SCCs, and the termination policies.

Two edge policies:

  first_order  - one direct edge per syntactic call / method call /
                 constructor invocation; applying a function value
                 (Invoke) contributes no edge.
  overapprox   - additionally, every Invoke site yields higher_order edges
                 to every lambda/function/method whose signature matches
                 the applied arrow type, and a field initializer that
                 mentions its own field gets an initializer_ref self-edge.

Four termination-checking modes of increasing strictness: PARTIAL checks
nothing; SELF_CHECK flags only callables whose contract is used by a
direct self-call; CALLGRAPH rejects every first-order cycle; SOUND works
on the over-approximated graph and demands a decreases measure from every
cycle member (lambdas cannot carry one and are rejected outright).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import ast
from .ast import ArrowType, Span
from .typecheck import (
    ABSTRACT_METHOD, CONSTRUCTOR, FIELD_INIT, FUNCTION, LAMBDA, METHOD,
    CallableInfo, TypedProgram,
)


class Mode(str, Enum):
    PARTIAL = "partial"
    SELF_CHECK = "self-check"
    CALLGRAPH = "callgraph"
    SOUND = "sound"


FIRST_ORDER = "first_order"
OVERAPPROX = "overapprox"

DIRECT = "direct"
HIGHER_ORDER = "higher_order"
INITIALIZER_REF = "initializer_ref"

# Diagnostic kinds.
SELF_CONTRACT_USE = "self_contract_use"
CONTRACT_CYCLE = "contract_cycle"
RECURSIVE_FIELD_INITIALIZER = "recursive_field_initializer"
MISSING_DECREASES = "missing_decreases"
LAMBDA_IN_CYCLE = "lambda_in_cycle"


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str
    site: Span


@dataclass
class CallGraph:
    nodes: list  # callable ids in enumeration order
    edges: list  # list[Edge]

    def successors(self, node: int):
        return [e.dst for e in self.edges if e.src == node]

    def has_self_edge(self, node: int, kinds=None) -> bool:
        return any(
            e.src == node and e.dst == node and (kinds is None or e.kind in kinds)
            for e in self.edges
        )


@dataclass
class SCC:
    members: list  # sorted callable ids
    is_nontrivial: bool


@dataclass
class TerminationDiagnostic:
    callable: int
    kind: str
    cycle: list  # callable ids; nonempty and closed for cycle kinds
    site: Span


def _own_exprs(root):
    """Expressions belonging to one callable: like ast.walk_exprs but does
    not descend into nested lambda bodies (those are separate callables).
    The Lambda node itself is still yielded."""
    if root is None:
        return
    if isinstance(root, ast.Block):
        for s in root.stmts:
            yield from _own_exprs(s)
    elif isinstance(root, ast.VarDecl):
        yield from _own_exprs(root.init)
    elif isinstance(root, ast.FieldAssign):
        yield from _own_exprs(root.value)
    elif isinstance(root, ast.Return):
        yield from _own_exprs(root.value)
    elif isinstance(root, ast.If):
        yield from _own_exprs(root.cond)
        yield from _own_exprs(root.then)
        yield from _own_exprs(root.orelse)
    elif isinstance(root, ast.ExprStmt):
        yield from _own_exprs(root.expr)
    else:
        yield root
        if isinstance(root, ast.Binary):
            yield from _own_exprs(root.lhs)
            yield from _own_exprs(root.rhs)
        elif isinstance(root, ast.Unary):
            yield from _own_exprs(root.operand)
        elif isinstance(root, (ast.Call, ast.New)):
            for a in root.args:
                yield from _own_exprs(a)
        elif isinstance(root, ast.MethodCall):
            yield from _own_exprs(root.receiver)
            for a in root.args:
                yield from _own_exprs(a)
        elif isinstance(root, ast.FieldAccess):
            yield from _own_exprs(root.receiver)
        elif isinstance(root, ast.Invoke):
            yield from _own_exprs(root.fn)
            for a in root.args:
                yield from _own_exprs(a)
        elif isinstance(root, ast.Lambda):
            pass  # nested lambda body belongs to the lambda callable


def _decl_to_callable(tp: TypedProgram) -> dict:
    return {id(c.decl): c for c in tp.callables}


def _ctor_callables(tp: TypedProgram) -> dict:
    return {
        c.owner: c for c in tp.callables if c.kind == CONSTRUCTOR
    }


def mentions_field(expr, field_decl, tp: TypedProgram) -> bool:
    """True if the expression (including nested lambda bodies) contains a
    field access resolving to field_decl."""
    for node in ast.walk_exprs(expr):
        if isinstance(node, ast.FieldAccess) and tp.resolution.get(id(node)) is field_decl:
            return True
    return False


def build_call_graph(tp: TypedProgram, policy: str = FIRST_ORDER) -> CallGraph:
    if policy not in (FIRST_ORDER, OVERAPPROX):
        raise ValueError(f"unknown policy {policy!r}")
    by_decl = _decl_to_callable(tp)
    ctors = _ctor_callables(tp)
    edges = []
    for c in tp.callables:
        for node in _own_exprs(c.body):
            if isinstance(node, (ast.Call, ast.MethodCall)):
                target = by_decl.get(id(tp.resolution.get(id(node))))
                if target is not None:
                    edges.append(Edge(c.id, target.id, DIRECT, node.span))
            elif isinstance(node, ast.New):
                ctor = ctors.get(node.class_name)
                if ctor is not None:
                    edges.append(Edge(c.id, ctor.id, DIRECT, node.span))
            elif isinstance(node, ast.Invoke) and policy == OVERAPPROX:
                arrow = tp.types[id(node.fn)]
                if isinstance(arrow, ArrowType):
                    for target in tp.callables:
                        if target.kind in (LAMBDA, FUNCTION, METHOD, ABSTRACT_METHOD) \
                                and target.signature() == arrow:
                            edges.append(Edge(c.id, target.id, HIGHER_ORDER, node.span))
        if policy == OVERAPPROX and c.kind == FIELD_INIT:
            if mentions_field(c.body, c.decl, tp):
                edges.append(Edge(c.id, c.id, INITIALIZER_REF, c.span))
    return CallGraph(nodes=[c.id for c in tp.callables], edges=edges)


def sccs(graph: CallGraph):
    """Strongly connected components (iterative Tarjan). The partition is
    deterministic: members sorted ascending, components ordered by their
    lowest callable id."""
    succ = {n: [] for n in graph.nodes}
    for e in graph.edges:
        succ[e.src].append(e.dst)
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = [0]

    for root in graph.nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = lowlink[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                members = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    members.append(m)
                    if m == node:
                        break
                members.sort()
                nontrivial = len(members) > 1 or graph.has_self_edge(members[0])
                components.append(SCC(members, nontrivial))
    components.sort(key=lambda s: s.members[0])
    return components


def _cycle_through(graph: CallGraph, start: int, scc_members) -> list:
    """A shortest closed walk from start back to start inside its SCC."""
    allowed = set(scc_members)
    succ = {}
    for e in graph.edges:
        if e.src in allowed and e.dst in allowed:
            succ.setdefault(e.src, []).append(e.dst)
    if start in succ.get(start, []):
        return [start]
    # BFS for the shortest path from a successor of start back to start.
    from collections import deque

    queue = deque([(n, [start, n]) for n in sorted(set(succ.get(start, [])))])
    seen = set()
    while queue:
        node, path = queue.popleft()
        if node == start:
            return path[:-1]
        if node in seen:
            continue
        seen.add(node)
        for nxt in sorted(set(succ.get(node, []))):
            queue.append((nxt, path + [nxt]))
    return [start]


def check_termination(tp: TypedProgram, mode: Mode):
    """Termination diagnostics for the selected mode. PARTIAL returns none
    by definition; see the module docstring for the other policies."""
    if mode == Mode.PARTIAL:
        return []
    diags = []
    if mode == Mode.SELF_CHECK:
        graph = build_call_graph(tp, FIRST_ORDER)
        for c in tp.callables:
            if c.ensures and graph.has_self_edge(c.id, kinds={DIRECT}):
                diags.append(
                    TerminationDiagnostic(c.id, SELF_CONTRACT_USE, [c.id], c.span)
                )
        return diags
    if mode == Mode.CALLGRAPH:
        graph = build_call_graph(tp, FIRST_ORDER)
        for component in sccs(graph):
            if not component.is_nontrivial:
                continue
            for member in component.members:
                cyc = _cycle_through(graph, member, component.members)
                diags.append(
                    TerminationDiagnostic(
                        member, CONTRACT_CYCLE, cyc, tp.callables[member].span
                    )
                )
        diags.extend(_initializer_diags(tp))
        return sorted(diags, key=lambda d: (d.callable, d.kind))
    if mode == Mode.SOUND:
        graph = build_call_graph(tp, OVERAPPROX)
        for component in sccs(graph):
            if not component.is_nontrivial:
                continue
            for member in component.members:
                info = tp.callables[member]
                cyc = _cycle_through(graph, member, component.members)
                if info.kind == LAMBDA:
                    diags.append(
                        TerminationDiagnostic(member, LAMBDA_IN_CYCLE, cyc, info.span)
                    )
                elif info.kind == FIELD_INIT:
                    # covered by the initializer diagnostic below when the
                    # field mentions itself; a longer cycle still needs one
                    if not mentions_field(info.body, info.decl, tp):
                        diags.append(
                            TerminationDiagnostic(member, MISSING_DECREASES, cyc, info.span)
                        )
                elif info.decreases is None:
                    diags.append(
                        TerminationDiagnostic(member, MISSING_DECREASES, cyc, info.span)
                    )
        diags.extend(_initializer_diags(tp))
        return sorted(diags, key=lambda d: (d.callable, d.kind))
    raise ValueError(f"unknown mode {mode!r}")


def _initializer_diags(tp: TypedProgram):
    out = []
    for c in tp.callables:
        if c.kind == FIELD_INIT and mentions_field(c.body, c.decl, tp):
            out.append(
                TerminationDiagnostic(c.id, RECURSIVE_FIELD_INITIALIZER, [c.id], c.span)
            )
    return out
