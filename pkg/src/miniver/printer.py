"""Pretty printer for MiniOO ASTs.

Output re-parses to a structurally identical Program; the round-trip is a
test invariant for the whole corpus.
"""

from __future__ import annotations

from . import ast

# Binding strengths, loosest first. Matches the parser's precedence ladder.
_PREC = {
    "==>": 1,
    "||": 2,
    "&&": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6,
}
_UNARY_PREC = 7
_RIGHT_ASSOC = {"==>"}
# Comparisons chain left-associatively in the parser; re-parenthesize the
# right operand of a comparison to survive the round trip.
_NON_ASSOC_RHS = {"==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "||", "&&"}


def print_type(t) -> str:
    if isinstance(t, ast.ArrowType):
        params = ", ".join(print_type(p) for p in t.params)
        return f"({params}) -> {print_type(t.ret)}"
    return str(t)


def print_expr(e, parent_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < parent_prec:
        return f"({text})"
    return text


def _expr(e):
    if isinstance(e, ast.IntLit):
        return str(e.value), 99
    if isinstance(e, ast.BoolLit):
        return ("true" if e.value else "false"), 99
    if isinstance(e, ast.VarRef):
        return e.name, 99
    if isinstance(e, ast.ResultExpr):
        return "result", 99
    if isinstance(e, ast.ThisExpr):
        return "this", 99
    if isinstance(e, ast.Binary):
        prec = _PREC[e.op]
        if e.op in _RIGHT_ASSOC:
            lhs = print_expr(e.lhs, prec + 1)
            rhs = print_expr(e.rhs, prec)
        else:
            lhs = print_expr(e.lhs, prec)
            rhs = print_expr(e.rhs, prec + 1)
        return f"{lhs} {e.op} {rhs}", prec
    if isinstance(e, ast.Unary):
        return f"{e.op}{print_expr(e.operand, _UNARY_PREC)}", _UNARY_PREC
    if isinstance(e, ast.Call):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"{e.name}({args})", 8
    if isinstance(e, ast.MethodCall):
        recv = print_expr(e.receiver, 8)
        args = ", ".join(print_expr(a) for a in e.args)
        return f"{recv}.{e.name}({args})", 8
    if isinstance(e, ast.FieldAccess):
        return f"{print_expr(e.receiver, 8)}.{e.name}", 8
    if isinstance(e, ast.Invoke):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"{print_expr(e.fn, 8)}({args})", 8
    if isinstance(e, ast.Lambda):
        params = ", ".join(f"{p.name}: {print_type(p.type)}" for p in e.params)
        # Lambda binds loosest of all; parenthesize unless at top level.
        return f"({params}) => {print_expr(e.body)}", 0
    if isinstance(e, ast.New):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"new {e.class_name}({args})", 8
    raise TypeError(f"not an expression: {e!r}")


def _specs(decl: ast.FunctionDecl, indent: str) -> list:
    lines = []
    for r in decl.requires:
        lines.append(f"{indent}requires {print_expr(r)}")
    for en in decl.ensures:
        lines.append(f"{indent}ensures {print_expr(en)}")
    if decl.decreases is not None:
        lines.append(f"{indent}decreases {print_expr(decl.decreases)}")
    return lines


def _stmt(s, indent: str) -> list:
    if isinstance(s, ast.VarDecl):
        kw = "ghost var" if s.ghost else "var"
        return [f"{indent}{kw} {s.name} := {print_expr(s.init)};"]
    if isinstance(s, ast.FieldAssign):
        return [f"{indent}this.{s.field_name} := {print_expr(s.value)};"]
    if isinstance(s, ast.Return):
        if s.value is None:
            return [f"{indent}return;"]
        return [f"{indent}return {print_expr(s.value)};"]
    if isinstance(s, ast.If):
        lines = [f"{indent}if {print_expr(s.cond)} {{"]
        lines += _block_body(s.then, indent + "    ")
        if s.orelse is not None:
            lines.append(f"{indent}}} else {{")
            lines += _block_body(s.orelse, indent + "    ")
        lines.append(f"{indent}}}")
        return lines
    if isinstance(s, ast.ExprStmt):
        return [f"{indent}{print_expr(s.expr)};"]
    raise TypeError(f"not a statement: {s!r}")


def _block_body(block: ast.Block, indent: str) -> list:
    lines = []
    for s in block.stmts:
        lines += _stmt(s, indent)
    return lines


def _func(decl: ast.FunctionDecl, indent: str) -> list:
    params = ", ".join(f"{p.name}: {print_type(p.type)}" for p in decl.params)
    head = f"{indent}func {decl.name}({params})"
    if decl.return_type is not None:
        head += f" -> {print_type(decl.return_type)}"
    lines = [head]
    lines += _specs(decl, indent + "    ")
    if decl.body is None:
        lines[-1] += ";" if len(lines) > 1 else ""
        if len(lines) == 1:
            lines[0] += ";"
        return lines
    lines.append(f"{indent}{{")
    lines += _block_body(decl.body, indent + "    ")
    lines.append(f"{indent}}}")
    return lines


def pretty_print(program: ast.Program) -> str:
    """Render a Program as MiniOO source text."""
    lines = []
    for decl in program.decls:
        if lines:
            lines.append("")
        if isinstance(decl, ast.FunctionDecl):
            lines += _func(decl, "")
        elif isinstance(decl, ast.TraitDecl):
            lines.append(f"trait {decl.name} {{")
            for m in decl.methods:
                lines += _func(m, "    ")
            lines.append("}")
        elif isinstance(decl, ast.ClassDecl):
            head = f"class {decl.name}"
            if decl.implements is not None:
                head += f" implements {decl.implements}"
            lines.append(head + " {")
            for f in decl.fields:
                init = f" := {print_expr(f.init)}" if f.init is not None else ""
                lines.append(f"    const {f.name}: {print_type(f.type)}{init};")
            if decl.constructor is not None:
                params = ", ".join(
                    f"{p.name}: {print_type(p.type)}"
                    for p in decl.constructor.params
                )
                lines.append(f"    constructor({params}) {{")
                lines += _block_body(decl.constructor.body, "        ")
                lines.append("    }")
            for m in decl.methods:
                lines += _func(m, "    ")
            lines.append("}")
        else:
            raise TypeError(f"not a declaration: {decl!r}")
    return "\n".join(lines) + "\n"
