"""Ghost erasure and a fuel-bounded tree-walking interpreter.

The interpreter executes the program exactly as given; callers decide
whether to erase ghost code first. Fuel counts call-frame entries only
(function, method, constructor, lambda), so undetected non-termination
surfaces as FuelExhausted with a meaningful frame count.

Dynamic contract checking applies to the entry callable: its requires
clauses are evaluated on entry and its ensures clauses on return with
`result` bound. The violation report carries the actually returned value
(the punchline of a statically verified, dynamically violated contract).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

from . import ast
from .ast import Span
from .errors import MiniverError
from .typecheck import TypedProgram, typecheck


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class IntV:
    value: int


@dataclass(frozen=True)
class BoolV:
    value: bool


@dataclass
class ObjectV:
    class_name: str
    fields: dict  # complete and immutable after construction


@dataclass
class ClosureV:
    lambda_node: ast.Lambda
    env: "Env"


@dataclass(frozen=True)
class UnitV:
    pass


UNIT_VALUE = UnitV()


def render_value(v) -> str:
    if isinstance(v, IntV):
        return str(v.value)
    if isinstance(v, BoolV):
        return "true" if v.value else "false"
    if isinstance(v, ObjectV):
        return f"<{v.class_name}>"
    if isinstance(v, ClosureV):
        return "<closure>"
    return "unit"


# ---------------------------------------------------------------- outcomes

@dataclass
class Returned:
    value: object


@dataclass
class ContractViolation:
    callable: str
    clause_kind: str  # "requires" | "ensures"
    clause_index: int
    site: Span
    returned: Optional[object] = None  # value actually returned (ensures only)


@dataclass
class FuelExhausted:
    consumed: int


@dataclass
class RuntimeFailure:
    kind: str  # unbound-entry, arity-mismatch, unbound-field, no-method
    site: Optional[Span] = None


@dataclass
class Fuel:
    budget: int
    consumed: int = 0

    def tick(self) -> None:
        if self.consumed >= self.budget:
            raise _OutOfFuel()
        self.consumed += 1


# ---------------------------------------------------------------- erasure

class GhostDependencyError(MiniverError):
    """Non-ghost code depends on a ghost variable (defense in depth; the
    frontend rejects this already)."""


def erase(tp: TypedProgram) -> TypedProgram:
    """Drop every ghost VarDecl; all non-ghost code is preserved verbatim.
    The result is re-typechecked, so it is a complete TypedProgram, and
    erase is idempotent."""
    program = copy.deepcopy(tp.program)
    for decl in program.decls:
        _erase_decl(decl)
    try:
        return typecheck(program)
    except Exception as exc:  # the only way erasure can break typing
        raise GhostDependencyError(
            f"non-ghost code depends on erased ghost state: {exc}"
        ) from exc


def _erase_decl(decl) -> None:
    if isinstance(decl, ast.FunctionDecl):
        if decl.body is not None:
            _erase_block(decl.body)
    elif isinstance(decl, ast.TraitDecl):
        pass
    elif isinstance(decl, ast.ClassDecl):
        if decl.constructor is not None:
            _erase_block(decl.constructor.body)
        for m in decl.methods:
            if m.body is not None:
                _erase_block(m.body)


def _erase_block(block: ast.Block) -> None:
    kept = []
    for s in block.stmts:
        if isinstance(s, ast.VarDecl) and s.ghost:
            continue
        if isinstance(s, ast.If):
            _erase_block(s.then)
            if s.orelse is not None:
                _erase_block(s.orelse)
        kept.append(s)
    block.stmts = kept


# ---------------------------------------------------------------- interpreter

class _OutOfFuel(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class _Failure(Exception):
    def __init__(self, kind: str, site=None):
        self.kind = kind
        self.site = site


class Env:
    def __init__(self, parent: Optional["Env"] = None):
        self.parent = parent
        self.bindings = {}

    def lookup(self, name: str):
        env = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        return None

    def bind(self, name: str, value) -> None:
        self.bindings[name] = value


@dataclass
class _TailCall:
    """A call in tail position, returned to the frame loop instead of
    recursing in Python — the corpus's infinite recursions are all tail
    calls, so fuel exhaustion is observable at any budget."""

    target: object  # FunctionDecl or ClosureV
    args: list
    this: object = None


class _Interpreter:
    def __init__(self, tp: TypedProgram, fuel: Fuel):
        self.tp = tp
        self.fuel = fuel

    # --- calls ----------------------------------------------------------

    def call_function(self, target, args, this=None):
        """Frame loop: runs `target` and keeps going while the result is a
        tail call. `target` is a FunctionDecl (with `this` for methods) or
        a ClosureV."""
        while True:
            self.fuel.tick()
            if isinstance(target, ClosureV):
                env = Env(target.env)
                for p, a in zip(target.lambda_node.params, args):
                    env.bind(p.name, a)
                result = self.eval_tail_expr(target.lambda_node.body, env)
            else:
                env = Env()
                if this is not None:
                    env.bind("this", this)
                for p, a in zip(target.params, args):
                    env.bind(p.name, a)
                result = self.exec_block(target.body, env)
            if isinstance(result, _TailCall):
                target, args, this = result.target, result.args, result.this
                continue
            return result

    def exec_block(self, block: ast.Block, env: Env):
        try:
            self.exec_stmts(block.stmts, env)
        except _ReturnSignal as r:
            return r.value
        return UNIT_VALUE

    def eval_tail_expr(self, e, env: Env):
        """Evaluate an expression in tail position; call-like expressions
        become _TailCall values for the frame loop."""
        if isinstance(e, ast.Call):
            decl = self.tp.resolution[id(e)]
            return _TailCall(decl, [self.eval_expr(a, env) for a in e.args])
        if isinstance(e, ast.MethodCall):
            recv = self.eval_expr(e.receiver, env)
            args = [self.eval_expr(a, env) for a in e.args]
            return _TailCall(self.method_decl(recv, e.name, e.span), args, recv)
        if isinstance(e, ast.Invoke):
            fn = self.eval_expr(e.fn, env)
            if not isinstance(fn, ClosureV):
                raise _Failure("no-method", e.span)
            return _TailCall(fn, [self.eval_expr(a, env) for a in e.args])
        return self.eval_expr(e, env)

    def exec_stmts(self, stmts, env: Env) -> None:
        for s in stmts:
            self.exec_stmt(s, env)

    def exec_stmt(self, s, env: Env) -> None:
        if isinstance(s, ast.VarDecl):
            env.bind(s.name, self.eval_expr(s.init, env))
        elif isinstance(s, ast.FieldAssign):
            this = env.lookup("this")
            this.fields[s.field_name] = self.eval_expr(s.value, env)
        elif isinstance(s, ast.Return):
            value = self.eval_tail_expr(s.value, env) if s.value is not None else UNIT_VALUE
            raise _ReturnSignal(value)
        elif isinstance(s, ast.If):
            cond = self.eval_expr(s.cond, env)
            branch = s.then if cond.value else s.orelse
            if branch is not None:
                self.exec_stmts(branch.stmts, Env(env))
        elif isinstance(s, ast.ExprStmt):
            self.eval_expr(s.expr, env)
        else:
            raise TypeError(s)

    # --- expressions ------------------------------------------------------

    def eval_expr(self, e, env: Env):
        if isinstance(e, ast.IntLit):
            return IntV(e.value)
        if isinstance(e, ast.BoolLit):
            return BoolV(e.value)
        if isinstance(e, ast.VarRef):
            v = env.lookup(e.name)
            if v is None:
                raise _Failure("unbound-variable", e.span)
            return v
        if isinstance(e, ast.ResultExpr):
            return env.lookup("result")
        if isinstance(e, ast.ThisExpr):
            return env.lookup("this")
        if isinstance(e, ast.Binary):
            return self.eval_binary(e, env)
        if isinstance(e, ast.Unary):
            v = self.eval_expr(e.operand, env)
            return BoolV(not v.value) if e.op == "!" else IntV(-v.value)
        if isinstance(e, ast.Call):
            decl = self.tp.resolution[id(e)]
            args = [self.eval_expr(a, env) for a in e.args]
            return self.call_function(decl, args)
        if isinstance(e, ast.MethodCall):
            recv = self.eval_expr(e.receiver, env)
            args = [self.eval_expr(a, env) for a in e.args]
            return self.dispatch(recv, e.name, args, e.span)
        if isinstance(e, ast.FieldAccess):
            recv = self.eval_expr(e.receiver, env)
            if not isinstance(recv, ObjectV) or e.name not in recv.fields:
                raise _Failure("unbound-field", e.span)
            return recv.fields[e.name]
        if isinstance(e, ast.Invoke):
            fn = self.eval_expr(e.fn, env)
            args = [self.eval_expr(a, env) for a in e.args]
            return self.invoke_closure(fn, args, e.span)
        if isinstance(e, ast.Lambda):
            return ClosureV(e, env)
        if isinstance(e, ast.New):
            args = [self.eval_expr(a, env) for a in e.args]
            return self.construct(e.class_name, args, e.span)
        raise TypeError(e)

    def eval_binary(self, e: ast.Binary, env: Env):
        op = e.op
        if op == "&&":
            lhs = self.eval_expr(e.lhs, env)
            return self.eval_expr(e.rhs, env) if lhs.value else BoolV(False)
        if op == "||":
            lhs = self.eval_expr(e.lhs, env)
            return BoolV(True) if lhs.value else self.eval_expr(e.rhs, env)
        if op == "==>":
            lhs = self.eval_expr(e.lhs, env)
            return self.eval_expr(e.rhs, env) if lhs.value else BoolV(True)
        a = self.eval_expr(e.lhs, env).value
        b = self.eval_expr(e.rhs, env).value
        if op == "+":
            return IntV(a + b)
        if op == "-":
            return IntV(a - b)
        if op == "*":
            return IntV(a * b)
        if op == "==":
            return BoolV(a == b)
        if op == "!=":
            return BoolV(a != b)
        if op == "<":
            return BoolV(a < b)
        if op == "<=":
            return BoolV(a <= b)
        if op == ">":
            return BoolV(a > b)
        return BoolV(a >= b)

    def method_decl(self, recv, name: str, site: Span):
        if not isinstance(recv, ObjectV):
            raise _Failure("no-method", site)
        cls = self.tp.classes.get(recv.class_name)
        decl = next((m for m in cls.methods if m.name == name), None) if cls else None
        if decl is None or decl.body is None:
            raise _Failure("no-method", site)
        return decl

    def dispatch(self, recv, name: str, args, site: Span):
        return self.call_function(self.method_decl(recv, name, site), args, this=recv)

    def invoke_closure(self, fn, args, site: Span):
        if not isinstance(fn, ClosureV):
            raise _Failure("no-method", site)
        return self.call_function(fn, args)

    def construct(self, class_name: str, args, site: Span):
        cls = self.tp.classes[class_name]
        obj = ObjectV(class_name, {})
        env = Env()
        env.bind("this", obj)
        for f in cls.fields:
            if f.init is not None:
                obj.fields[f.name] = self.eval_expr(f.init, env)
        if cls.constructor is not None:
            self.fuel.tick()
            cenv = Env()
            cenv.bind("this", obj)
            for p, a in zip(cls.constructor.params, args):
                cenv.bind(p.name, a)
            self.exec_stmts(cls.constructor.body.stmts, cenv)
        return obj


def eval_program(tp: TypedProgram, entry: str, args, fuel: Fuel,
                 check_contracts: bool = False):
    """Run `entry(args)` and report the Outcome. The program is executed
    as given; erase() first for runtime (ghost-free) semantics."""
    decl = tp.functions.get(entry)
    if decl is None:
        return RuntimeFailure("unbound-entry")
    if len(args) != len(decl.params):
        return RuntimeFailure("arity-mismatch", decl.span)
    interp = _Interpreter(tp, fuel)
    env = Env()
    for p, a in zip(decl.params, args):
        env.bind(p.name, a)
    try:
        if check_contracts:
            for i, clause in enumerate(decl.requires):
                if not interp.eval_expr(clause, env).value:
                    return ContractViolation(entry, "requires", i, clause.span)
        value = interp.call_function(decl, args)
        if check_contracts:
            env.bind("result", value)
            for i, clause in enumerate(decl.ensures):
                if not interp.eval_expr(clause, env).value:
                    return ContractViolation(
                        entry, "ensures", i, clause.span, returned=value
                    )
        return Returned(value)
    except _OutOfFuel:
        return FuelExhausted(fuel.budget)
    except _Failure as f:
        return RuntimeFailure(f.kind, f.site)


# Alias matching the operation vocabulary used elsewhere.
run = eval_program
