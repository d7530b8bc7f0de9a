"""Name resolution and type checking for MiniOO.

Produces a TypedProgram: the (lightly normalized) AST plus expression
types, reference resolutions, and the enumerated callables. Two
normalizations happen here because they need type information:

  * `recv.f(args)` where `f` is a function-valued field becomes
    Invoke(FieldAccess(recv, f), args);
  * `x(args)` where `x` is a local/param of function type becomes
    Invoke(VarRef(x), args).

Errors are collected (not raised one at a time) and reported together via
TypeCheckError.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast
from .ast import (
    ArrowType, BOOL, BoolType, INT, IntType, NamedType, Span, UNIT,
)
from .errors import MiniverError

# Error categories.
UNRESOLVED = "unresolved-name"
MISMATCH = "type-mismatch"
NONLINEAR = "nonlinear-multiplication"
RESULT_MISUSE = "result-misuse"
FIELD_UNASSIGNED = "field-unassigned"
GHOST_MISUSE = "ghost-misuse"
CONTRACT_IMPURE = "contract-impure"
DUPLICATE = "duplicate-name"

_ERROR_TYPE = NamedType("<error>")


@dataclass
class TypeErrorInfo:
    category: str
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.span}: {self.category}: {self.message}"


class TypeCheckError(MiniverError):
    def __init__(self, errors):
        super().__init__(f"{len(errors)} type error(s)")
        self.errors = errors

    def __str__(self) -> str:
        return "\n".join(str(e) for e in self.errors)


# Callable kinds.
FUNCTION = "function"
METHOD = "method"
ABSTRACT_METHOD = "abstract_method"
CONSTRUCTOR = "constructor"
LAMBDA = "lambda"
FIELD_INIT = "field_init"


@dataclass
class CallableInfo:
    id: int
    name: str
    kind: str
    owner: Optional[str]
    params: list
    return_type: Optional[object]  # None for constructors / unit functions
    requires: list
    ensures: list
    decreases: Optional[object]
    body: object  # Block for functions/methods/ctors, Expr for lambda/field_init, None for abstract
    decl: object
    span: Span

    @property
    def label(self) -> str:
        return f"{self.name}#{self.id}"

    def signature(self) -> ArrowType:
        ret = self.return_type if self.return_type is not None else UNIT
        return ArrowType(tuple(p.type for p in self.params), ret)


@dataclass
class TypedProgram:
    program: ast.Program
    types: dict  # id(expr) -> Type
    resolution: dict  # id(node) -> declaration object
    callables: list  # list[CallableInfo], CallableId == index
    lambda_callable: dict  # id(Lambda node) -> CallableInfo
    functions: dict  # name -> FunctionDecl
    classes: dict  # name -> ClassDecl
    traits: dict  # name -> TraitDecl

    def type_of(self, expr) -> object:
        return self.types[id(expr)]

    def resolve(self, node) -> object:
        return self.resolution[id(node)]

    def callable_named(self, name: str) -> CallableInfo:
        for c in self.callables:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass
class _Ctx:
    owner_class: Optional[str] = None
    kind: str = FUNCTION  # FUNCTION/METHOD/CONSTRUCTOR/FIELD_INIT
    contract: Optional[str] = None  # "requires" | "ensures" | "decreases"
    contract_decl: Optional[ast.FunctionDecl] = None
    ghost: bool = False


class _Scope:
    """Lexical scope chain for locals/params within one callable."""

    def __init__(self, parent=None):
        self.parent = parent
        self.bindings = {}  # name -> (type, ghost, decl)

    def lookup(self, name: str):
        scope = self
        while scope is not None:
            if name in scope.bindings:
                return scope.bindings[name]
            scope = scope.parent
        return None

    def declare(self, name: str, type_, ghost: bool, decl) -> None:
        self.bindings[name] = (type_, ghost, decl)


class _Checker:
    def __init__(self, program: ast.Program):
        self.program = program
        self.errors = []
        self.types = {}
        self.resolution = {}
        self.functions = {}
        self.classes = {}
        self.traits = {}
        self.callables = []
        self.lambda_callable = {}
        self._current_lambda_scope = None

    def error(self, category: str, message: str, span: Span) -> None:
        self.errors.append(TypeErrorInfo(category, message, span))

    # ------------------------------------------------------------- driver

    def run(self) -> TypedProgram:
        self.collect_decls()
        if not self.errors:
            self.check_decl_types()
        for decl in self.program.decls:
            if isinstance(decl, ast.FunctionDecl):
                self.add_callable(FUNCTION, decl.name, None, decl)
                self.check_function(decl, owner=None)
            elif isinstance(decl, ast.TraitDecl):
                for m in decl.methods:
                    self.add_callable(ABSTRACT_METHOD, f"{decl.name}.{m.name}", decl.name, m)
                    self.check_contracts(m)
            elif isinstance(decl, ast.ClassDecl):
                self.check_class(decl)
        if self.errors:
            raise TypeCheckError(self.errors)
        return TypedProgram(
            program=self.program,
            types=self.types,
            resolution=self.resolution,
            callables=self.callables,
            lambda_callable=self.lambda_callable,
            functions=self.functions,
            classes=self.classes,
            traits=self.traits,
        )

    def add_callable(self, kind: str, name: str, owner, decl) -> CallableInfo:
        if isinstance(decl, ast.FunctionDecl):
            params = decl.params
            ret = decl.return_type
            req, ens, dec = decl.requires, decl.ensures, decl.decreases
            body = decl.body
        elif isinstance(decl, ast.Constructor):
            params, ret = decl.params, None
            req, ens, dec = [], [], None
            body = decl.body
        elif isinstance(decl, ast.FieldDecl):
            params, ret = [], decl.type
            req, ens, dec = [], [], None
            body = decl.init
        elif isinstance(decl, ast.Lambda):
            params = decl.params
            ret = None  # patched after body is typed
            req, ens, dec = [], [], None
            body = decl.body
        else:
            raise TypeError(decl)
        info = CallableInfo(
            id=len(self.callables), name=name, kind=kind, owner=owner,
            params=params, return_type=ret, requires=req, ensures=ens,
            decreases=dec, body=body, decl=decl, span=decl.span,
        )
        self.callables.append(info)
        return info

    # ---------------------------------------------------- top-level tables

    def collect_decls(self) -> None:
        for decl in self.program.decls:
            if decl.name in self.functions or decl.name in self.classes or decl.name in self.traits:
                self.error(DUPLICATE, f"duplicate top-level name {decl.name!r}", decl.span)
                continue
            if isinstance(decl, ast.FunctionDecl):
                self.functions[decl.name] = decl
            elif isinstance(decl, ast.TraitDecl):
                self.traits[decl.name] = decl
                seen = set()
                for m in decl.methods:
                    if m.name in seen:
                        self.error(DUPLICATE, f"duplicate method {m.name!r}", m.span)
                    seen.add(m.name)
            elif isinstance(decl, ast.ClassDecl):
                self.classes[decl.name] = decl
                seen = set()
                for f in decl.fields:
                    if f.name in seen:
                        self.error(DUPLICATE, f"duplicate field {f.name!r}", f.span)
                    seen.add(f.name)
                seen = set()
                for m in decl.methods:
                    if m.name in seen:
                        self.error(DUPLICATE, f"duplicate method {m.name!r}", m.span)
                    seen.add(m.name)

    def resolve_type(self, t, span: Span):
        if isinstance(t, NamedType):
            if t.name not in self.classes and t.name not in self.traits:
                self.error(UNRESOLVED, f"unknown type {t.name!r}", span)
        elif isinstance(t, ArrowType):
            for p in t.params:
                self.resolve_type(p, span)
            self.resolve_type(t.ret, span)

    def check_decl_types(self) -> None:
        for decl in self.program.decls:
            if isinstance(decl, ast.FunctionDecl):
                self.check_signature_types(decl)
            elif isinstance(decl, ast.TraitDecl):
                for m in decl.methods:
                    self.check_signature_types(m)
            elif isinstance(decl, ast.ClassDecl):
                for f in decl.fields:
                    self.resolve_type(f.type, f.span)
                if decl.constructor is not None:
                    for p in decl.constructor.params:
                        self.resolve_type(p.type, p.span)
                for m in decl.methods:
                    self.check_signature_types(m)
                if decl.implements is not None:
                    self.check_implements(decl)

    def check_signature_types(self, decl: ast.FunctionDecl) -> None:
        seen = set()
        for p in decl.params:
            if p.name in seen:
                self.error(DUPLICATE, f"duplicate parameter {p.name!r}", p.span)
            seen.add(p.name)
            self.resolve_type(p.type, p.span)
        if decl.return_type is not None:
            self.resolve_type(decl.return_type, decl.span)

    def check_implements(self, decl: ast.ClassDecl) -> None:
        trait = self.traits.get(decl.implements)
        if trait is None:
            self.error(UNRESOLVED, f"unknown trait {decl.implements!r}", decl.span)
            return
        methods = {m.name: m for m in decl.methods}
        for tm in trait.methods:
            impl = methods.get(tm.name)
            if impl is None:
                self.error(
                    MISMATCH,
                    f"class {decl.name!r} does not implement {trait.name}.{tm.name}",
                    decl.span,
                )
                continue
            want = tuple(p.type for p in tm.params)
            got = tuple(p.type for p in impl.params)
            if want != got or impl.return_type != tm.return_type:
                self.error(
                    MISMATCH,
                    f"signature of {decl.name}.{tm.name} differs from {trait.name}.{tm.name}",
                    impl.span,
                )

    # -------------------------------------------------------- declarations

    def check_class(self, decl: ast.ClassDecl) -> None:
        for f in decl.fields:
            if f.init is not None:
                info = self.add_callable(FIELD_INIT, f"{decl.name}.{f.name}.init", decl.name, f)
                ctx = _Ctx(owner_class=decl.name, kind=FIELD_INIT)
                new_init, t = self.check_expr(f.init, _Scope(), ctx, info)
                f.init = new_init
                info.body = new_init
                self.require_type(t, f.type, f.span, "field initializer")
        if decl.constructor is not None:
            ctor = decl.constructor
            info = self.add_callable(CONSTRUCTOR, f"{decl.name}.constructor", decl.name, ctor)
            scope = _Scope()
            self.bind_params(ctor.params, scope)
            ctx = _Ctx(owner_class=decl.name, kind=CONSTRUCTOR)
            self.check_block(ctor.body, scope, ctx, expected_return=None, callable_info=info)
        self.check_definite_assignment(decl)
        for m in decl.methods:
            self.add_callable(METHOD, f"{decl.name}.{m.name}", decl.name, m)
            self.check_function(m, owner=decl.name)

    def check_function(self, decl: ast.FunctionDecl, owner: Optional[str]) -> None:
        info = self.callables[-1]
        self.check_contracts(decl)
        scope = _Scope()
        self.bind_params(decl.params, scope)
        ctx = _Ctx(owner_class=owner, kind=METHOD if owner else FUNCTION)
        returns = self.check_block(
            decl.body, scope, ctx, expected_return=decl.return_type, callable_info=info
        )
        if decl.return_type is not None and not returns:
            self.error(MISMATCH, f"function {decl.name!r} may finish without a return", decl.span)

    def bind_params(self, params, scope: _Scope) -> None:
        for p in params:
            scope.declare(p.name, p.type, False, p)

    # ------------------------------------------------------------ contracts

    def check_contracts(self, decl: ast.FunctionDecl) -> None:
        scope = _Scope()
        self.bind_params(decl.params, scope)
        for label, exprs in (("requires", decl.requires), ("ensures", decl.ensures)):
            for i, e in enumerate(exprs):
                ctx = _Ctx(contract=label, contract_decl=decl)
                new_e, t = self.check_expr(e, scope, ctx, None)
                exprs[i] = new_e
                self.require_type(t, BOOL, new_e.span, f"{label} clause")
        if decl.decreases is not None:
            ctx = _Ctx(contract="decreases", contract_decl=decl)
            new_e, t = self.check_expr(decl.decreases, scope, ctx, None)
            decl.decreases = new_e
            self.require_type(t, INT, new_e.span, "decreases clause")

    # ------------------------------------------------------------ statements

    def check_block(self, block: ast.Block, scope: _Scope, ctx: _Ctx,
                    expected_return, callable_info) -> bool:
        inner = _Scope(scope)
        returned = False
        for s in block.stmts:
            if returned:
                self.error(MISMATCH, "unreachable statement after return", s.span)
                returned = False
            returned = self.check_stmt(s, inner, ctx, expected_return, callable_info)
        return returned

    def check_stmt(self, s, scope: _Scope, ctx: _Ctx, expected_return, callable_info) -> bool:
        if isinstance(s, ast.VarDecl):
            init_ctx = _Ctx(owner_class=ctx.owner_class, kind=ctx.kind, ghost=s.ghost)
            new_init, t = self.check_expr(s.init, scope, init_ctx, callable_info)
            s.init = new_init
            if scope.lookup(s.name) is not None:
                self.error(DUPLICATE, f"{s.name!r} shadows an existing binding", s.span)
            scope.declare(s.name, t, s.ghost, s)
            return False
        if isinstance(s, ast.FieldAssign):
            if ctx.kind != CONSTRUCTOR:
                self.error(MISMATCH, "field assignment outside constructor", s.span)
                self.check_expr(s.value, scope, ctx, callable_info)
                return False
            cls = self.classes[ctx.owner_class]
            fdecl = next((f for f in cls.fields if f.name == s.field_name), None)
            new_v, t = self.check_expr(s.value, scope, ctx, callable_info)
            s.value = new_v
            if fdecl is None:
                self.error(UNRESOLVED, f"unknown field {s.field_name!r}", s.span)
            else:
                self.require_type(t, fdecl.type, s.span, "field assignment")
                self.resolution[id(s)] = fdecl
            return False
        if isinstance(s, ast.Return):
            if ctx.kind == CONSTRUCTOR:
                self.error(MISMATCH, "return not allowed in constructor", s.span)
                return True
            if expected_return is None:
                if s.value is not None:
                    new_v, _ = self.check_expr(s.value, scope, ctx, callable_info)
                    s.value = new_v
                    self.error(MISMATCH, "return with a value in a function without a return type", s.span)
            else:
                if s.value is None:
                    self.error(MISMATCH, "return without a value", s.span)
                else:
                    new_v, t = self.check_expr(s.value, scope, ctx, callable_info)
                    s.value = new_v
                    self.require_type(t, expected_return, s.span, "return value")
            return True
        if isinstance(s, ast.If):
            new_c, t = self.check_expr(s.cond, scope, ctx, callable_info)
            s.cond = new_c
            self.require_type(t, BOOL, s.cond.span, "if condition")
            r1 = self.check_block(s.then, scope, ctx, expected_return, callable_info)
            r2 = (
                self.check_block(s.orelse, scope, ctx, expected_return, callable_info)
                if s.orelse is not None
                else False
            )
            return r1 and r2
        if isinstance(s, ast.ExprStmt):
            new_e, _ = self.check_expr(s.expr, scope, ctx, callable_info)
            s.expr = new_e
            return False
        raise TypeError(s)

    # ---------------------------------------------------------- expressions

    def set_type(self, e, t):
        self.types[id(e)] = t
        return e, t

    def require_type(self, actual, expected, span: Span, what: str) -> None:
        if actual == _ERROR_TYPE or expected == _ERROR_TYPE:
            return
        if actual != expected:
            self.error(MISMATCH, f"{what}: expected {expected}, got {actual}", span)

    def check_expr(self, e, scope: _Scope, ctx: _Ctx, callable_info):
        """Typecheck e; returns (possibly rewritten node, type)."""
        if isinstance(e, ast.IntLit):
            return self.set_type(e, INT)
        if isinstance(e, ast.BoolLit):
            return self.set_type(e, BOOL)
        if isinstance(e, ast.VarRef):
            binding = scope.lookup(e.name)
            if binding is None:
                self.error(UNRESOLVED, f"unknown variable {e.name!r}", e.span)
                return self.set_type(e, _ERROR_TYPE)
            t, ghost, decl = binding
            if e.name == "_":
                self.error(UNRESOLVED, "'_' is never readable", e.span)
                return self.set_type(e, _ERROR_TYPE)
            if ghost and not ctx.ghost:
                self.error(GHOST_MISUSE, f"non-ghost code reads ghost variable {e.name!r}", e.span)
            if ctx.contract is not None and not isinstance(t, (IntType, BoolType)):
                self.error(CONTRACT_IMPURE, "contracts may only mention int/bool parameters", e.span)
            self.resolution[id(e)] = decl
            return self.set_type(e, t)
        if isinstance(e, ast.ResultExpr):
            decl = ctx.contract_decl
            if ctx.contract != "ensures" or decl is None or decl.return_type is None:
                self.error(RESULT_MISUSE, "'result' is only available in ensures clauses of functions with a return type", e.span)
                return self.set_type(e, _ERROR_TYPE)
            if not isinstance(decl.return_type, (IntType, BoolType)):
                self.error(CONTRACT_IMPURE, "contracts may only mention an int/bool result", e.span)
            return self.set_type(e, decl.return_type)
        if isinstance(e, ast.ThisExpr):
            if ctx.contract is not None:
                self.error(CONTRACT_IMPURE, "'this' is not allowed in contracts", e.span)
                return self.set_type(e, _ERROR_TYPE)
            if ctx.owner_class is None:
                self.error(UNRESOLVED, "'this' outside a class", e.span)
                return self.set_type(e, _ERROR_TYPE)
            return self.set_type(e, NamedType(ctx.owner_class))
        if isinstance(e, ast.Binary):
            return self.check_binary(e, scope, ctx, callable_info)
        if isinstance(e, ast.Unary):
            new_op, t = self.check_expr(e.operand, scope, ctx, callable_info)
            e.operand = new_op
            want = BOOL if e.op == "!" else INT
            self.require_type(t, want, e.span, f"operand of {e.op!r}")
            return self.set_type(e, want)
        if isinstance(e, ast.Call):
            return self.check_call(e, scope, ctx, callable_info)
        if isinstance(e, ast.MethodCall):
            return self.check_method_call(e, scope, ctx, callable_info)
        if isinstance(e, ast.FieldAccess):
            if ctx.contract is not None:
                self.error(CONTRACT_IMPURE, "field access is not allowed in contracts", e.span)
                return self.set_type(e, _ERROR_TYPE)
            new_r, _ = self.check_expr(e.receiver, scope, ctx, callable_info)
            e.receiver = new_r
            return self.check_field_lookup(e)
        if isinstance(e, ast.Invoke):
            if ctx.contract is not None:
                self.error(CONTRACT_IMPURE, "function application is not allowed in contracts", e.span)
                return self.set_type(e, _ERROR_TYPE)
            new_fn, ft = self.check_expr(e.fn, scope, ctx, callable_info)
            e.fn = new_fn
            if not isinstance(ft, ArrowType):
                if ft != _ERROR_TYPE:
                    self.error(MISMATCH, f"cannot apply a value of type {ft}", e.span)
                return self.set_type(e, _ERROR_TYPE)
            self.check_args(e.args, ft.params, e, scope, ctx, callable_info)
            return self.set_type(e, ft.ret)
        if isinstance(e, ast.Lambda):
            return self.check_lambda(e, scope, ctx, callable_info)
        if isinstance(e, ast.New):
            return self.check_new(e, scope, ctx, callable_info)
        raise TypeError(e)

    def check_binary(self, e: ast.Binary, scope, ctx, callable_info):
        new_l, lt = self.check_expr(e.lhs, scope, ctx, callable_info)
        new_r, rt = self.check_expr(e.rhs, scope, ctx, callable_info)
        e.lhs, e.rhs = new_l, new_r
        op = e.op
        if op in ("&&", "||", "==>"):
            self.require_type(lt, BOOL, e.lhs.span, f"left operand of {op!r}")
            self.require_type(rt, BOOL, e.rhs.span, f"right operand of {op!r}")
            return self.set_type(e, BOOL)
        if op in ("==", "!=", "<", "<=", ">", ">="):
            self.require_type(lt, INT, e.lhs.span, f"left operand of {op!r}")
            self.require_type(rt, INT, e.rhs.span, f"right operand of {op!r}")
            return self.set_type(e, BOOL)
        if op == "*":
            self.require_type(lt, INT, e.lhs.span, "left operand of '*'")
            self.require_type(rt, INT, e.rhs.span, "right operand of '*'")
            if not (_is_literal_int(e.lhs) or _is_literal_int(e.rhs)):
                self.error(NONLINEAR, "'*' requires an integer-literal operand", e.span)
            return self.set_type(e, INT)
        # + or -
        self.require_type(lt, INT, e.lhs.span, f"left operand of {op!r}")
        self.require_type(rt, INT, e.rhs.span, f"right operand of {op!r}")
        return self.set_type(e, INT)

    def check_call(self, e: ast.Call, scope, ctx, callable_info):
        if ctx.contract is not None:
            self.error(CONTRACT_IMPURE, "calls are not allowed in contracts", e.span)
            return self.set_type(e, _ERROR_TYPE)
        binding = scope.lookup(e.name)
        if binding is not None:
            t, ghost, decl = binding
            if isinstance(t, ArrowType):
                # Application of a function-valued local: rewrite to Invoke.
                ref = ast.VarRef(e.name, e.span)
                if ghost and not ctx.ghost:
                    self.error(GHOST_MISUSE, f"non-ghost code reads ghost variable {e.name!r}", ref.span)
                self.resolution[id(ref)] = decl
                self.set_type(ref, t)
                inv = ast.Invoke(ref, e.args, e.span)
                self.check_args(inv.args, t.params, inv, scope, ctx, callable_info)
                return self.set_type(inv, t.ret)
        fdecl = self.functions.get(e.name)
        if fdecl is None:
            self.error(UNRESOLVED, f"unknown function {e.name!r}", e.span)
            for i, a in enumerate(e.args):
                e.args[i], _ = self.check_expr(a, scope, ctx, callable_info)
            return self.set_type(e, _ERROR_TYPE)
        self.resolution[id(e)] = fdecl
        self.check_args(e.args, tuple(p.type for p in fdecl.params), e, scope, ctx, callable_info)
        return self.set_type(e, fdecl.return_type if fdecl.return_type is not None else UNIT)

    def check_args(self, args, param_types, site, scope, ctx, callable_info) -> None:
        if len(args) != len(param_types):
            self.error(MISMATCH, f"expected {len(param_types)} argument(s), got {len(args)}", site.span)
        for i, a in enumerate(args):
            new_a, t = self.check_expr(a, scope, ctx, callable_info)
            args[i] = new_a
            if i < len(param_types):
                self.require_type(t, param_types[i], new_a.span, f"argument {i + 1}")

    def check_method_call(self, e: ast.MethodCall, scope, ctx, callable_info):
        if ctx.contract is not None:
            self.error(CONTRACT_IMPURE, "calls are not allowed in contracts", e.span)
            return self.set_type(e, _ERROR_TYPE)
        new_r, rt = self.check_expr(e.receiver, scope, ctx, callable_info)
        e.receiver = new_r
        if rt == _ERROR_TYPE:
            return self.set_type(e, _ERROR_TYPE)
        if not isinstance(rt, NamedType):
            self.error(MISMATCH, f"cannot call a method on a value of type {rt}", e.span)
            return self.set_type(e, _ERROR_TYPE)
        cls = self.classes.get(rt.name)
        trait = self.traits.get(rt.name)
        methods = cls.methods if cls is not None else (trait.methods if trait else [])
        mdecl = next((m for m in methods if m.name == e.name), None)
        if mdecl is not None:
            self.resolution[id(e)] = mdecl
            self.check_args(e.args, tuple(p.type for p in mdecl.params), e, scope, ctx, callable_info)
            return self.set_type(e, mdecl.return_type if mdecl.return_type is not None else UNIT)
        if cls is not None:
            fdecl = next((f for f in cls.fields if f.name == e.name), None)
            if fdecl is not None and isinstance(fdecl.type, ArrowType):
                fa = ast.FieldAccess(e.receiver, e.name, e.span)
                self.resolution[id(fa)] = fdecl
                self.set_type(fa, fdecl.type)
                inv = ast.Invoke(fa, e.args, e.span)
                self.check_args(inv.args, fdecl.type.params, inv, scope, ctx, callable_info)
                return self.set_type(inv, fdecl.type.ret)
        self.error(UNRESOLVED, f"{rt.name!r} has no method {e.name!r}", e.span)
        return self.set_type(e, _ERROR_TYPE)

    def check_field_lookup(self, e: ast.FieldAccess):
        rt = self.types.get(id(e.receiver), _ERROR_TYPE)
        if rt == _ERROR_TYPE:
            return self.set_type(e, _ERROR_TYPE)
        if not isinstance(rt, NamedType) or rt.name not in self.classes:
            self.error(MISMATCH, f"no fields on a value of type {rt}", e.span)
            return self.set_type(e, _ERROR_TYPE)
        cls = self.classes[rt.name]
        fdecl = next((f for f in cls.fields if f.name == e.name), None)
        if fdecl is None:
            self.error(UNRESOLVED, f"class {rt.name!r} has no field {e.name!r}", e.span)
            return self.set_type(e, _ERROR_TYPE)
        self.resolution[id(e)] = fdecl
        return self.set_type(e, fdecl.type)

    def check_lambda(self, e: ast.Lambda, scope, ctx, callable_info):
        if ctx.contract is not None:
            self.error(CONTRACT_IMPURE, "lambdas are not allowed in contracts", e.span)
            return self.set_type(e, _ERROR_TYPE)
        n = sum(1 for c in self.callables if c.kind == LAMBDA)
        info = self.add_callable(LAMBDA, f"lambda#{n}", ctx.owner_class, e)
        self.lambda_callable[id(e)] = info
        inner = _Scope(scope)
        seen = set()
        for p in e.params:
            if p.name in seen:
                self.error(DUPLICATE, f"duplicate parameter {p.name!r}", p.span)
            seen.add(p.name)
            self.resolve_type(p.type, p.span)
            inner.declare(p.name, p.type, False, p)
        new_body, bt = self.check_expr(e.body, inner, ctx, info)
        e.body = new_body
        info.body = new_body
        info.return_type = bt
        return self.set_type(e, ArrowType(tuple(p.type for p in e.params), bt))

    def check_new(self, e: ast.New, scope, ctx, callable_info):
        if ctx.contract is not None:
            self.error(CONTRACT_IMPURE, "'new' is not allowed in contracts", e.span)
            return self.set_type(e, _ERROR_TYPE)
        cls = self.classes.get(e.class_name)
        if cls is None:
            kind = "trait" if e.class_name in self.traits else "name"
            self.error(
                UNRESOLVED if kind == "name" else MISMATCH,
                f"cannot instantiate {kind} {e.class_name!r}",
                e.span,
            )
            for i, a in enumerate(e.args):
                e.args[i], _ = self.check_expr(a, scope, ctx, callable_info)
            return self.set_type(e, _ERROR_TYPE)
        self.resolution[id(e)] = cls
        params = (
            tuple(p.type for p in cls.constructor.params)
            if cls.constructor is not None
            else ()
        )
        self.check_args(e.args, params, e, scope, ctx, callable_info)
        return self.set_type(e, NamedType(cls.name))

    # -------------------------------------------------- definite assignment

    def check_definite_assignment(self, decl: ast.ClassDecl) -> None:
        initialized = {f.name for f in decl.fields if f.init is not None}
        need = [f for f in decl.fields if f.init is None]
        if decl.constructor is None:
            for f in need:
                self.error(
                    FIELD_UNASSIGNED,
                    f"field {f.name!r} has no initializer and no constructor assigns it",
                    f.span,
                )
            return
        must, _may = self._da_stmts(decl.constructor.body.stmts, frozenset(), initialized)
        for f in need:
            if f.name not in must:
                self.error(
                    FIELD_UNASSIGNED,
                    f"field {f.name!r} is not assigned on every constructor path",
                    f.span,
                )

    def _da_stmts(self, stmts, must, initialized):
        may = set(must)
        must = set(must)
        for s in stmts:
            if isinstance(s, ast.FieldAssign):
                if s.field_name in may or s.field_name in initialized:
                    self.error(
                        FIELD_UNASSIGNED,
                        f"field {s.field_name!r} may be assigned more than once",
                        s.span,
                    )
                must.add(s.field_name)
                may.add(s.field_name)
            elif isinstance(s, ast.If):
                m1, y1 = self._da_stmts(s.then.stmts, frozenset(must), initialized)
                m2, y2 = (
                    self._da_stmts(s.orelse.stmts, frozenset(must), initialized)
                    if s.orelse is not None
                    else (set(must), set(may))
                )
                must = m1 & m2
                may = y1 | y2 | may
        return must, may


def _is_literal_int(e) -> bool:
    if isinstance(e, ast.IntLit):
        return True
    return isinstance(e, ast.Unary) and e.op == "-" and isinstance(e.operand, ast.IntLit)


def typecheck(program: ast.Program) -> TypedProgram:
    """Resolve and type a parsed Program.

    Raises TypeCheckError carrying the full list of TypeErrorInfo on any
    failure; mutates the Program in place for the two call-form rewrites.
    """
    return _Checker(program).run()
