"""Verification-condition generation.

The calculus is a weakest-precondition pass over anormalized bodies with
the modular call rule: at a call site the callee's contract is assumed --
its requires clauses become proof obligations, its ensures clauses become
assumptions about the bound result. Function-value application (Invoke)
and `new` merely havoc their result. Ghost statements use the same rules
as non-ghost ones; ghostness influences only the erasable_origin flag on
the emitted obligations, never their strength.

In SOUND mode every call from a callable to a callee inside the same
over-approximated SCC additionally yields two obligations: the caller's
measure is nonnegative under the path condition, and the callee's measure
instantiated with the actual arguments is strictly below the caller's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast
from .ast import BoolType, IntType, NamedType, Span, UnitType
from .callgraph import Mode, OVERAPPROX, build_call_graph, sccs
from .errors import MalformedBlockError
from .formula import (
    AndF, BoolVar, Cmp, FALSE, ForallF, Formula, ImpliesF, LinTerm, NotF,
    TRUE, conj, subst,
)
from .typecheck import (
    ABSTRACT_METHOD, CONSTRUCTOR, FIELD_INIT, LAMBDA, CallableInfo,
    TypedProgram,
)

# VC kinds.
POSTCONDITION = "postcondition"
CALLEE_PRECONDITION = "callee_precondition"
DECREASES_BOUND = "decreases_bound"
DECREASES_NONNEG = "decreases_nonneg"
TRAIT_CONTRACT = "trait_contract"

RESULT = "result"


@dataclass
class VerificationCondition:
    owner: int  # CallableId
    kind: str
    formula: Formula
    origin: Span
    erasable_origin: bool = False


@dataclass
class ContractSpec:
    requires: list  # list[Formula] over param names
    ensures: list  # list[Formula] over param names + "result"
    decreases: Optional[LinTerm]
    params: list  # list[ast.Param]
    return_type: Optional[object]


@dataclass
class ContractEnv:
    specs: dict  # CallableId -> ContractSpec
    by_decl: dict  # id(decl) -> CallableInfo


# ------------------------------------------------- expression -> formula/term

def _vtype_str(t) -> str:
    if isinstance(t, IntType):
        return "int"
    if isinstance(t, BoolType):
        return "bool"
    if isinstance(t, NamedType):
        return t.name
    if isinstance(t, UnitType):
        return "unit"
    return "opaque"


def _field_path(e) -> str:
    if isinstance(e, ast.VarRef):
        return e.name
    if isinstance(e, ast.ThisExpr):
        return "this"
    if isinstance(e, ast.FieldAccess):
        return f"{_field_path(e.receiver)}.{e.name}"
    raise MalformedBlockError(f"impure term in formula position: {e!r}")


def int_term(e) -> LinTerm:
    """Linear term of a pure integer expression. Const-field projections
    become opaque compound variables ("o.f"); objects are immutable so the
    projection is a stable value."""
    if isinstance(e, ast.IntLit):
        return LinTerm.of_const(e.value)
    if isinstance(e, ast.VarRef):
        return LinTerm.of_var(e.name)
    if isinstance(e, ast.ResultExpr):
        return LinTerm.of_var(RESULT)
    if isinstance(e, ast.FieldAccess):
        return LinTerm.of_var(_field_path(e))
    if isinstance(e, ast.Unary) and e.op == "-":
        return int_term(e.operand).scale(-1)
    if isinstance(e, ast.Binary):
        if e.op == "+":
            return int_term(e.lhs).add(int_term(e.rhs))
        if e.op == "-":
            return int_term(e.lhs).sub(int_term(e.rhs))
        if e.op == "*":
            if isinstance(e.lhs, ast.IntLit) or (
                isinstance(e.lhs, ast.Unary) and isinstance(e.lhs.operand, ast.IntLit)
            ):
                return int_term(e.rhs).scale(int_term(e.lhs).const)
            return int_term(e.lhs).scale(int_term(e.rhs).const)
    raise MalformedBlockError(f"not a linear integer expression: {e!r}")


def bool_formula(e) -> Formula:
    """Formula of a pure boolean expression."""
    if isinstance(e, ast.BoolLit):
        return TRUE if e.value else FALSE
    if isinstance(e, ast.VarRef):
        return BoolVar(e.name)
    if isinstance(e, ast.ResultExpr):
        return BoolVar(RESULT)
    if isinstance(e, ast.FieldAccess):
        return BoolVar(_field_path(e))
    if isinstance(e, ast.Unary) and e.op == "!":
        return NotF(bool_formula(e.operand))
    if isinstance(e, ast.Binary):
        if e.op == "&&":
            return AndF(bool_formula(e.lhs), bool_formula(e.rhs))
        if e.op == "||":
            from .formula import OrF

            return OrF(bool_formula(e.lhs), bool_formula(e.rhs))
        if e.op == "==>":
            return ImpliesF(bool_formula(e.lhs), bool_formula(e.rhs))
        if e.op in ("==", "!=", "<", "<=", ">", ">="):
            return Cmp(e.op, int_term(e.lhs), int_term(e.rhs))
    raise MalformedBlockError(f"not a boolean expression: {e!r}")


# ------------------------------------------------------------- contract env

def build_contract_env(tp: TypedProgram) -> ContractEnv:
    specs = {}
    for c in tp.callables:
        specs[c.id] = ContractSpec(
            requires=[bool_formula(r) for r in c.requires],
            ensures=[bool_formula(e) for e in c.ensures],
            decreases=int_term(c.decreases) if c.decreases is not None else None,
            params=c.params,
            return_type=c.return_type,
        )
    return ContractEnv(specs=specs, by_decl={id(c.decl): c for c in tp.callables})


def _formula_subst_for_actuals(spec: ContractSpec, actuals, result_var: Optional[str]):
    """Substitution mapping contract parameter names (and `result`) to the
    terms of the actual arguments; parameters of reference type cannot
    occur in contracts and are skipped."""
    mapping = {}
    for p, a in zip(spec.params, actuals):
        if isinstance(p.type, IntType):
            mapping[p.name] = int_term(a)
        elif isinstance(p.type, BoolType):
            mapping[p.name] = bool_formula(a)
    if result_var is not None:
        if isinstance(spec.return_type, IntType):
            mapping[RESULT] = LinTerm.of_var(result_var)
        elif isinstance(spec.return_type, BoolType):
            mapping[RESULT] = BoolVar(result_var)
    return mapping


# ------------------------------------------------------------- anormalization

_CALL_NODES = (ast.Call, ast.MethodCall, ast.Invoke, ast.New)


class _Anormalizer:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.counter = 0

    def fresh(self) -> str:
        name = f"$t{self.counter}"
        self.counter += 1
        return name

    def block(self, block: ast.Block) -> ast.Block:
        return ast.Block(self.stmts(block.stmts), block.span)

    def stmts(self, stmts) -> list:
        out = []
        for s in stmts:
            self.stmt(s, out)
        return out

    def stmt(self, s, out) -> None:
        if isinstance(s, ast.VarDecl):
            if isinstance(s.init, _CALL_NODES):
                init = self.hoist_children(s.init, s.ghost, out)
            else:
                init = self.hoist(s.init, s.ghost, out)
            out.append(ast.VarDecl(s.name, s.ghost, init, s.span, var_type=s.var_type))
        elif isinstance(s, ast.FieldAssign):
            value = self.hoist(s.value, False, out)
            out.append(ast.FieldAssign(s.field_name, value, s.span))
        elif isinstance(s, ast.Return):
            value = self.hoist(s.value, False, out) if s.value is not None else None
            out.append(ast.Return(value, s.span))
        elif isinstance(s, ast.If):
            cond = self.hoist(s.cond, False, out)
            then = self.block(s.then)
            orelse = self.block(s.orelse) if s.orelse is not None else None
            out.append(ast.If(cond, then, orelse, s.span))
        elif isinstance(s, ast.ExprStmt):
            if isinstance(s.expr, _CALL_NODES):
                call = self.hoist_children(s.expr, False, out)
                temp = self.fresh()
                out.append(
                    ast.VarDecl(temp, False, call, s.span, var_type=self.tp.types[id(s.expr)])
                )
            else:
                expr = self.hoist(s.expr, False, out)
                out.append(ast.ExprStmt(expr, s.span))
        else:
            raise TypeError(s)

    def hoist(self, e, ghost: bool, out):
        """Replace every call-like node in e (at any depth) by a fresh
        temporary bound just before the enclosing statement."""
        if isinstance(e, _CALL_NODES):
            inner = self.hoist_children(e, ghost, out)
            temp = self.fresh()
            out.append(
                ast.VarDecl(temp, ghost, inner, e.span, var_type=self.tp.types[id(e)])
            )
            ref = ast.VarRef(temp, e.span)
            return ref
        if isinstance(e, ast.Binary):
            lhs = self.hoist(e.lhs, ghost, out)
            rhs = self.hoist(e.rhs, ghost, out)
            return ast.Binary(e.op, lhs, rhs, e.span)
        if isinstance(e, ast.Unary):
            return ast.Unary(e.op, self.hoist(e.operand, ghost, out), e.span)
        if isinstance(e, ast.FieldAccess):
            fa = ast.FieldAccess(self.hoist(e.receiver, ghost, out), e.name, e.span)
            self.tp.resolution[id(fa)] = self.tp.resolution.get(id(e))
            return fa
        # atoms and lambdas (lambda bodies belong to their own callable)
        return e

    def hoist_children(self, e, ghost: bool, out):
        """Hoist the sub-calls of a call-like node, keeping the node itself
        in place (it becomes the entire initializer of a VarDecl)."""
        if isinstance(e, ast.Call):
            node = ast.Call(e.name, [self.hoist(a, ghost, out) for a in e.args], e.span)
        elif isinstance(e, ast.MethodCall):
            node = ast.MethodCall(
                self.hoist(e.receiver, ghost, out),
                e.name,
                [self.hoist(a, ghost, out) for a in e.args],
                e.span,
            )
        elif isinstance(e, ast.Invoke):
            node = ast.Invoke(
                self.hoist(e.fn, ghost, out),
                [self.hoist(a, ghost, out) for a in e.args],
                e.span,
            )
        elif isinstance(e, ast.New):
            node = ast.New(e.class_name, [self.hoist(a, ghost, out) for a in e.args], e.span)
        else:
            raise TypeError(e)
        self.tp.types[id(node)] = self.tp.types[id(e)]
        if id(e) in self.tp.resolution:
            self.tp.resolution[id(node)] = self.tp.resolution[id(e)]
        return node


def anormalize(block: ast.Block, tp: TypedProgram) -> ast.Block:
    """Hoist every call so it occurs only as the entire initializer of a
    VarDecl; evaluation order preserved; temporaries inherit the ghost flag
    of the enclosing statement."""
    return _Anormalizer(tp).block(block)


# ------------------------------------------------------------------------ wp

class _WpContext:
    def __init__(self, tp: TypedProgram, env: ContractEnv, owner: CallableInfo,
                 mode: Mode, same_scc):
        self.tp = tp
        self.env = env
        self.owner = owner
        self.mode = mode
        self.same_scc = same_scc or set()
        self.var_types = {p.name: p.type for p in owner.params}
        self.side_vcs = []
        self.wrappers = []  # forward-context wrappers for decreases VCs

    def decl_type(self, s: ast.VarDecl):
        if s.var_type is not None:
            return s.var_type
        return self.tp.types[id(s.init)]

    def post(self) -> Formula:
        return conj(self.env.specs[self.owner.id].ensures)

    # --- decreases side obligations ------------------------------------

    def wrap(self, inner: Formula) -> Formula:
        out = inner
        for kind, *rest in reversed(self.wrappers):
            if kind == "guard":
                out = ImpliesF(rest[0], out)
            else:
                var, vtype, ens = rest
                out = ForallF(var, vtype, ImpliesF(ens, out))
        return ImpliesF(conj(self.env.specs[self.owner.id].requires), out)

    def emit_decreases(self, callee: CallableInfo, actuals, site: Span, ghost: bool) -> None:
        if self.mode != Mode.SOUND or callee.id not in self.same_scc:
            return
        own_spec = self.env.specs[self.owner.id]
        callee_spec = self.env.specs[callee.id]
        if own_spec.decreases is None or callee_spec.decreases is None:
            return  # missing_decreases is reported by the callgraph module
        caller_m = own_spec.decreases
        mapping = _formula_subst_for_actuals(callee_spec, actuals, None)
        # Substitute actuals into the callee's measure only; the caller's
        # measure is already over the caller's parameters.
        callee_m = Cmp("<", callee_spec.decreases.subst_all(mapping), caller_m)
        self.side_vcs.append(
            VerificationCondition(
                self.owner.id, DECREASES_NONNEG,
                self.wrap(Cmp(">=", caller_m, LinTerm.of_const(0))),
                site, ghost,
            )
        )
        self.side_vcs.append(
            VerificationCondition(
                self.owner.id, DECREASES_BOUND, self.wrap(callee_m), site, ghost
            )
        )


def wp(stmts, post: Formula, ctx: _WpContext) -> Formula:
    """Weakest precondition of a statement list with fall-through/return
    postcondition `post` (over `result` for value returns)."""
    if not stmts:
        return post
    s, rest = stmts[0], stmts[1:]
    if isinstance(s, ast.Return):
        # `rest` may be a shared continuation appended after a returning
        # branch (see _continuation); a return never falls through to it.
        if s.value is None:
            return post
        rt = ctx.owner.return_type
        if isinstance(rt, IntType):
            return subst(post, {RESULT: int_term(s.value)})
        if isinstance(rt, BoolType):
            return subst(post, {RESULT: bool_formula(s.value)})
        return post  # reference-typed results cannot occur in contracts
    if isinstance(s, ast.If):
        cond = bool_formula(s.cond)
        ctx.wrappers.append(("guard", cond))
        then_wp = wp(list(s.then.stmts) + _continuation(s.then, rest), post, ctx)
        ctx.wrappers.pop()
        ctx.wrappers.append(("guard", NotF(cond)))
        else_stmts = list(s.orelse.stmts) if s.orelse is not None else []
        else_wp = wp(else_stmts + _continuation(s.orelse, rest), post, ctx)
        ctx.wrappers.pop()
        return AndF(ImpliesF(cond, then_wp), ImpliesF(NotF(cond), else_wp))
    if isinstance(s, ast.VarDecl):
        return _wp_vardecl(s, rest, post, ctx)
    if isinstance(s, (ast.ExprStmt, ast.FieldAssign)):
        return wp(rest, post, ctx)
    raise TypeError(s)


def _continuation(block, rest):
    # Branches that end in return never fall through; sharing `rest` with
    # both branches is sound because the returning branch ignores it.
    return list(rest)


def _wp_vardecl(s: ast.VarDecl, rest, post: Formula, ctx: _WpContext) -> Formula:
    t = ctx.decl_type(s)
    ctx.var_types[s.name] = t
    vt = _vtype_str(t)
    if vt == "unit":
        vt = "int"  # unit binders never occur in formulas
    init = s.init
    if isinstance(init, (ast.Call, ast.MethodCall)):
        callee = ctx.env.by_decl[id(ctx.tp.resolution[id(init)])]
        spec = ctx.env.specs[callee.id]
        actuals = list(init.args)
        ctx.emit_decreases(callee, actuals, s.span, s.ghost)
        mapping = _formula_subst_for_actuals(spec, actuals, s.name)
        pre = subst(conj(spec.requires), _formula_subst_for_actuals(spec, actuals, None))
        ens = subst(conj(spec.ensures), mapping)
        ctx.wrappers.append(("forall", s.name, vt, ens))
        q = wp(rest, post, ctx)
        ctx.wrappers.pop()
        return AndF(pre, ForallF(s.name, vt, ImpliesF(ens, q)))
    if isinstance(init, (ast.Invoke, ast.New)):
        # Havoc: a value is merely assumed to exist; no facts about it.
        ctx.wrappers.append(("forall", s.name, vt, TRUE))
        q = wp(rest, post, ctx)
        ctx.wrappers.pop()
        return ForallF(s.name, vt, q)
    # Pure initializer: substitute.
    q = wp(rest, post, ctx)
    if isinstance(t, IntType):
        return subst(q, {s.name: int_term(init)})
    if isinstance(t, BoolType):
        return subst(q, {s.name: bool_formula(init)})
    return q  # reference-typed locals cannot occur in formulas


# ------------------------------------------------------------- per callable

def _contains_contract_call(block: ast.Block) -> bool:
    for node in ast.walk_exprs(block):
        if isinstance(node, (ast.Call, ast.MethodCall, ast.New)):
            return True
    return False


def _same_scc_sets(tp: TypedProgram):
    graph = build_call_graph(tp, OVERAPPROX)
    scc_of = {}
    for component in sccs(graph):
        if not component.is_nontrivial:
            continue
        members = set(component.members)
        for m in component.members:
            scc_of[m] = members
    return scc_of


def vcs_for_callable(callable_info: CallableInfo, tp: TypedProgram,
                     env: ContractEnv, mode: Mode,
                     scc_of: Optional[dict] = None) -> list:
    """Obligations for one callable. Abstract methods and lambdas yield
    none; constructors and field initializers only carry obligations for
    the calls inside them."""
    c = callable_info
    if c.kind in (ABSTRACT_METHOD, LAMBDA) or c.body is None:
        return []
    if mode == Mode.SOUND and scc_of is None:
        scc_of = _same_scc_sets(tp)
    same_scc = (scc_of or {}).get(c.id)
    ctx = _WpContext(tp, env, c, mode, same_scc)
    if c.kind == FIELD_INIT:
        block = ast.Block([ast.ExprStmt(c.body, c.span)], c.span)
    else:
        block = c.body
    if c.kind in (CONSTRUCTOR, FIELD_INIT):
        if not _contains_contract_call(block):
            return ctx.side_vcs
        body = anormalize(block, tp)
        formula = wp(body.stmts, TRUE, ctx)
        return [
            VerificationCondition(c.id, CALLEE_PRECONDITION, formula, c.span)
        ] + ctx.side_vcs
    body = anormalize(block, tp)
    spec = env.specs[c.id]
    formula = ImpliesF(conj(spec.requires), wp(body.stmts, ctx.post(), ctx))
    return [VerificationCondition(c.id, POSTCONDITION, formula, c.span)] + ctx.side_vcs


def vcs_for_program(tp: TypedProgram, mode: Mode) -> list:
    """All obligations, in callable enumeration order, followed by one
    trait-contract-match obligation per implemented method (the declared
    contract must be structurally identical to the trait's)."""
    env = build_contract_env(tp)
    scc_of = _same_scc_sets(tp) if mode == Mode.SOUND else {}
    out = []
    for c in tp.callables:
        out.extend(vcs_for_callable(c, tp, env, mode, scc_of))
    for decl in tp.program.decls:
        if not isinstance(decl, ast.ClassDecl) or decl.implements is None:
            continue
        trait = tp.traits[decl.implements]
        impls = {m.name: m for m in decl.methods}
        for tm in trait.methods:
            impl = impls.get(tm.name)
            if impl is None:
                continue
            matches = (
                impl.requires == tm.requires
                and impl.ensures == tm.ensures
                and impl.decreases == tm.decreases
            )
            owner = env.by_decl[id(impl)]
            out.append(
                VerificationCondition(
                    owner.id, TRAIT_CONTRACT, TRUE if matches else FALSE, impl.span
                )
            )
    return out
