"""AST for MiniOO.

Every node carries a Span; spans are excluded from equality so that
structural comparison (used by the parser round-trip tests and the
trait-contract match check) ignores source locations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    file: str
    start: int
    end: int
    line: int  # 1-based
    col: int  # 1-based

    def __repr__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


DUMMY_SPAN = Span("<none>", 0, 0, 1, 1)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class IntType:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class UnitType:
    """Type of calls to functions without a return type. Not denotable."""

    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class NamedType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrowType:
    params: tuple
    ret: "Type"

    def __str__(self) -> str:
        ps = ", ".join(str(p) for p in self.params)
        return f"({ps}) -> {self.ret}"


Type = Union[IntType, BoolType, UnitType, NamedType, ArrowType]

INT = IntType()
BOOL = BoolType()
UNIT = UnitType()


# ---------------------------------------------------------------- expressions

@dataclass
class IntLit:
    value: int
    span: Span = field(compare=False)


@dataclass
class BoolLit:
    value: bool
    span: Span = field(compare=False)


@dataclass
class VarRef:
    name: str
    span: Span = field(compare=False)


@dataclass
class ResultExpr:
    span: Span = field(compare=False)


@dataclass
class ThisExpr:
    span: Span = field(compare=False)


@dataclass
class Binary:
    op: str  # + - * == != < <= > >= && || ==>
    lhs: "Expr"
    rhs: "Expr"
    span: Span = field(compare=False)


@dataclass
class Unary:
    op: str  # ! -
    operand: "Expr"
    span: Span = field(compare=False)


@dataclass
class Call:
    """Call of a named top-level function: f(args)."""

    name: str
    args: list
    span: Span = field(compare=False)


@dataclass
class MethodCall:
    """recv.name(args). The typechecker rewrites this to
    Invoke(FieldAccess(...)) when name resolves to a function-valued field."""

    receiver: "Expr"
    name: str
    args: list
    span: Span = field(compare=False)


@dataclass
class FieldAccess:
    receiver: "Expr"
    name: str
    span: Span = field(compare=False)


@dataclass
class Invoke:
    """Application of a function-valued expression."""

    fn: "Expr"
    args: list
    span: Span = field(compare=False)


@dataclass
class Lambda:
    params: list  # list[Param]
    body: "Expr"
    span: Span = field(compare=False)


@dataclass
class New:
    class_name: str
    args: list
    span: Span = field(compare=False)


Expr = Union[
    IntLit, BoolLit, VarRef, ResultExpr, ThisExpr, Binary, Unary,
    Call, MethodCall, FieldAccess, Invoke, Lambda, New,
]


# ---------------------------------------------------------------- statements

@dataclass
class Block:
    stmts: list
    span: Span = field(compare=False)


@dataclass
class VarDecl:
    name: str
    ghost: bool
    init: Expr
    span: Span = field(compare=False)
    # Filled by anormalization for synthesized temporaries; user decls get
    # their type from the typechecker's expression map.
    var_type: Optional[Type] = field(default=None, compare=False)


@dataclass
class FieldAssign:
    """this.field := value (constructor bodies only)."""

    field_name: str
    value: Expr
    span: Span = field(compare=False)


@dataclass
class Return:
    value: Optional[Expr]
    span: Span = field(compare=False)


@dataclass
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block]
    span: Span = field(compare=False)


@dataclass
class ExprStmt:
    expr: Expr
    span: Span = field(compare=False)


Stmt = Union[VarDecl, FieldAssign, Return, If, ExprStmt]


# ---------------------------------------------------------------- declarations

@dataclass
class Param:
    name: str
    type: Type
    span: Span = field(compare=False)


@dataclass
class FunctionDecl:
    name: str
    params: list  # list[Param]
    return_type: Optional[Type]
    requires: list  # list[Expr]
    ensures: list  # list[Expr]
    decreases: Optional[Expr]
    body: Optional[Block]  # None only for trait method signatures
    owner: Optional[str]  # class/trait name for methods
    span: Span = field(compare=False)


@dataclass
class FieldDecl:
    name: str
    type: Type
    init: Optional[Expr]
    span: Span = field(compare=False)


@dataclass
class Constructor:
    params: list  # list[Param]
    body: Block
    span: Span = field(compare=False)


@dataclass
class TraitDecl:
    name: str
    methods: list  # list[FunctionDecl], all abstract (body=None)
    span: Span = field(compare=False)


@dataclass
class ClassDecl:
    name: str
    implements: Optional[str]
    fields: list  # list[FieldDecl]
    constructor: Optional[Constructor]
    methods: list  # list[FunctionDecl]
    span: Span = field(compare=False)


Decl = Union[FunctionDecl, TraitDecl, ClassDecl]


@dataclass
class Program:
    decls: list
    span: Span = field(compare=False)


def walk_exprs(node):
    """Yield every expression node reachable from `node` (an Expr, Stmt,
    Block, declaration, or Program), including lambda bodies."""
    if node is None:
        return
    if isinstance(node, Program):
        for d in node.decls:
            yield from walk_exprs(d)
    elif isinstance(node, FunctionDecl):
        for e in node.requires:
            yield from walk_exprs(e)
        for e in node.ensures:
            yield from walk_exprs(e)
        yield from walk_exprs(node.decreases)
        yield from walk_exprs(node.body)
    elif isinstance(node, TraitDecl):
        for m in node.methods:
            yield from walk_exprs(m)
    elif isinstance(node, ClassDecl):
        for f in node.fields:
            yield from walk_exprs(f.init)
        if node.constructor is not None:
            yield from walk_exprs(node.constructor.body)
        for m in node.methods:
            yield from walk_exprs(m)
    elif isinstance(node, Block):
        for s in node.stmts:
            yield from walk_exprs(s)
    elif isinstance(node, VarDecl):
        yield from walk_exprs(node.init)
    elif isinstance(node, FieldAssign):
        yield from walk_exprs(node.value)
    elif isinstance(node, Return):
        yield from walk_exprs(node.value)
    elif isinstance(node, If):
        yield from walk_exprs(node.cond)
        yield from walk_exprs(node.then)
        yield from walk_exprs(node.orelse)
    elif isinstance(node, ExprStmt):
        yield from walk_exprs(node.expr)
    else:
        # expression node
        yield node
        if isinstance(node, Binary):
            yield from walk_exprs(node.lhs)
            yield from walk_exprs(node.rhs)
        elif isinstance(node, Unary):
            yield from walk_exprs(node.operand)
        elif isinstance(node, Call):
            for a in node.args:
                yield from walk_exprs(a)
        elif isinstance(node, MethodCall):
            yield from walk_exprs(node.receiver)
            for a in node.args:
                yield from walk_exprs(a)
        elif isinstance(node, FieldAccess):
            yield from walk_exprs(node.receiver)
        elif isinstance(node, Invoke):
            yield from walk_exprs(node.fn)
            for a in node.args:
                yield from walk_exprs(a)
        elif isinstance(node, Lambda):
            yield from walk_exprs(node.body)
        elif isinstance(node, New):
            for a in node.args:
                yield from walk_exprs(a)
