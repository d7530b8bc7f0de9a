"""Recursive-descent parser for MiniOO.

Grammar summary (see README for the full grammar):

    program   := decl*
    decl      := func | trait | class
    func      := "func" IDENT "(" params? ")" ("->" type)? spec* block
    spec      := "requires" expr | "ensures" expr | "decreases" expr
    trait     := "trait" IDENT "{" absfunc* "}"
    absfunc   := "func" IDENT "(" params? ")" "->" type spec* ";"
    class     := "class" IDENT ("implements" IDENT)? "{" field* ctor? func* "}"
    field     := "const" IDENT ":" type (":=" expr)? ";"
    ctor      := "constructor" "(" params? ")" block
    block     := "{" stmt* "}"
    stmt      := ("ghost")? "var" IDENT ":=" expr ";"
               | "this" "." IDENT ":=" expr ";"
               | "return" expr? ";"
               | "if" expr block ("else" block)?
               | expr ";"

Expression precedence, loosest first: "==>" (right-assoc), "||", "&&",
comparisons, additive, multiplicative, unary, postfix, primary.
"""

from __future__ import annotations

from typing import Optional

from . import ast
from .ast import Span
from .errors import ParseError
from .lexer import Token, tokenize

_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


# Each nesting level costs ~10 Python frames through the precedence
# chain; the cap must keep worst-case parses well under the interpreter's
# recursion limit.
_MAX_DEPTH = 64


class _Parser:
    def __init__(self, tokens, file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file
        self.depth = 0

    def _enter(self) -> None:
        # Bounds recursion so pathological nesting fails with a ParseError
        # instead of blowing the interpreter stack.
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ParseError("nesting too deep", self.peek().span)

    # ------------------------------------------------------------- helpers

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, context: str = "") -> Token:
        tok = self.peek()
        if tok.kind != kind:
            where = f" in {context}" if context else ""
            raise ParseError(
                f"expected {kind!r}{where}, found {tok.text or 'end of input'!r}",
                tok.span,
            )
        return self.advance()

    def span_from(self, start: Span) -> Span:
        end_tok = self.tokens[max(self.pos - 1, 0)]
        return Span(self.file, start.start, end_tok.span.end, start.line, start.col)

    # ---------------------------------------------------------------- decls

    def parse_program(self) -> ast.Program:
        start = self.peek().span
        decls = []
        while not self.at("eof"):
            decls.append(self.parse_decl())
        return ast.Program(decls, self.span_from(start))

    def parse_decl(self):
        tok = self.peek()
        if tok.kind == "func":
            return self.parse_func(owner=None)
        if tok.kind == "trait":
            return self.parse_trait()
        if tok.kind == "class":
            return self.parse_class()
        raise ParseError(
            f"expected 'func', 'trait' or 'class', found {tok.text or 'end of input'!r}",
            tok.span,
        )

    def parse_func(self, owner: Optional[str], abstract: bool = False):
        start = self.expect("func").span
        name = self.expect("ident", "function name").text
        self.expect("(", "parameter list")
        params = self.parse_params()
        self.expect(")", "parameter list")
        return_type = None
        if self.at("->"):
            self.advance()
            return_type = self.parse_type()
        elif abstract:
            raise ParseError("trait method signature requires '->'", self.peek().span)
        requires, ensures, decreases = self.parse_specs()
        if abstract:
            self.expect(";", "trait method signature")
            body = None
        else:
            body = self.parse_block()
        return ast.FunctionDecl(
            name, params, return_type, requires, ensures, decreases,
            body, owner, self.span_from(start),
        )

    def parse_specs(self):
        requires, ensures = [], []
        decreases = None
        while self.peek().kind in ("requires", "ensures", "decreases"):
            kw = self.advance()
            expr = self.parse_expr()
            if kw.kind == "requires":
                requires.append(expr)
            elif kw.kind == "ensures":
                ensures.append(expr)
            else:
                if decreases is not None:
                    raise ParseError("duplicate decreases clause", kw.span)
                decreases = expr
        return requires, ensures, decreases

    def parse_params(self):
        params = []
        if self.at(")"):
            return params
        while True:
            tok = self.peek()
            if tok.kind != "ident":
                raise ParseError(
                    f"expected parameter name or ')', found {tok.text or 'end of input'!r}",
                    tok.span,
                )
            name = self.advance().text
            self.expect(":", "parameter")
            ptype = self.parse_type()
            params.append(ast.Param(name, ptype, self.span_from(tok.span)))
            if self.at(","):
                self.advance()
            else:
                return params

    def parse_trait(self) -> ast.TraitDecl:
        start = self.expect("trait").span
        name = self.expect("ident", "trait name").text
        self.expect("{", "trait body")
        methods = []
        while self.at("func"):
            methods.append(self.parse_func(owner=name, abstract=True))
        self.expect("}", "trait body")
        return ast.TraitDecl(name, methods, self.span_from(start))

    def parse_class(self) -> ast.ClassDecl:
        start = self.expect("class").span
        name = self.expect("ident", "class name").text
        implements = None
        if self.at("implements"):
            self.advance()
            implements = self.expect("ident", "implements clause").text
        self.expect("{", "class body")
        fields = []
        while self.at("const"):
            fields.append(self.parse_field())
        constructor = None
        if self.at("constructor"):
            cstart = self.advance().span
            self.expect("(", "constructor")
            params = self.parse_params()
            self.expect(")", "constructor")
            body = self.parse_block()
            constructor = ast.Constructor(params, body, self.span_from(cstart))
        methods = []
        while self.at("func"):
            methods.append(self.parse_func(owner=name))
        self.expect("}", "class body")
        return ast.ClassDecl(
            name, implements, fields, constructor, methods, self.span_from(start)
        )

    def parse_field(self) -> ast.FieldDecl:
        start = self.expect("const").span
        name = self.expect("ident", "field name").text
        self.expect(":", "field declaration")
        ftype = self.parse_type()
        init = None
        if self.at(":="):
            self.advance()
            init = self.parse_expr()
        self.expect(";", "field declaration")
        return ast.FieldDecl(name, ftype, init, self.span_from(start))

    # ---------------------------------------------------------------- types

    def parse_type(self):
        self._enter()
        try:
            return self._parse_type_inner()
        finally:
            self.depth -= 1

    def _parse_type_inner(self):
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return ast.INT
        if tok.kind == "bool":
            self.advance()
            return ast.BOOL
        if tok.kind == "ident":
            self.advance()
            return ast.NamedType(tok.text)
        if tok.kind == "(":
            self.advance()
            params = []
            if not self.at(")"):
                while True:
                    params.append(self.parse_type())
                    if self.at(","):
                        self.advance()
                    else:
                        break
            self.expect(")", "function type")
            self.expect("->", "function type")
            ret = self.parse_type()
            return ast.ArrowType(tuple(params), ret)
        raise ParseError(
            f"expected a type, found {tok.text or 'end of input'!r}", tok.span
        )

    # ----------------------------------------------------------- statements

    def parse_block(self) -> ast.Block:
        self._enter()
        try:
            start = self.expect("{", "block").span
            stmts = []
            while not self.at("}"):
                if self.at("eof"):
                    raise ParseError(
                        "unterminated block, expected '}'", self.peek().span
                    )
                stmts.append(self.parse_stmt())
            self.expect("}")
            return ast.Block(stmts, self.span_from(start))
        finally:
            self.depth -= 1

    def parse_stmt(self):
        tok = self.peek()
        if tok.kind in ("ghost", "var"):
            ghost = tok.kind == "ghost"
            start = self.advance().span
            if ghost:
                self.expect("var", "ghost variable declaration")
            name = self.expect("ident", "variable declaration").text
            self.expect(":=", "variable declaration")
            init = self.parse_expr()
            self.expect(";", "variable declaration")
            return ast.VarDecl(name, ghost, init, self.span_from(start))
        if tok.kind == "return":
            start = self.advance().span
            value = None
            if not self.at(";"):
                value = self.parse_expr()
            self.expect(";", "return statement")
            return ast.Return(value, self.span_from(start))
        if tok.kind == "if":
            start = self.advance().span
            cond = self.parse_expr()
            then = self.parse_block()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.parse_block()
            return ast.If(cond, then, orelse, self.span_from(start))
        if (
            tok.kind == "this"
            and self.peek(1).kind == "."
            and self.peek(2).kind == "ident"
            and self.peek(3).kind == ":="
        ):
            start = self.advance().span
            self.advance()  # .
            field_name = self.advance().text
            self.advance()  # :=
            value = self.parse_expr()
            self.expect(";", "field assignment")
            return ast.FieldAssign(field_name, value, self.span_from(start))
        start = tok.span
        expr = self.parse_expr()
        self.expect(";", "expression statement")
        return ast.ExprStmt(expr, self.span_from(start))

    # ---------------------------------------------------------- expressions

    def parse_expr(self):
        self._enter()
        try:
            return self.parse_implies()
        finally:
            self.depth -= 1

    def parse_implies(self):
        lhs = self.parse_or()
        if self.at("==>"):
            start = lhs.span
            self.advance()
            rhs = self.parse_implies()  # right-assoc
            return ast.Binary("==>", lhs, rhs, self.span_from(start))
        return lhs

    def parse_or(self):
        lhs = self.parse_and()
        while self.at("||"):
            self.advance()
            rhs = self.parse_and()
            lhs = ast.Binary("||", lhs, rhs, self.span_from(lhs.span))
        return lhs

    def parse_and(self):
        lhs = self.parse_comparison()
        while self.at("&&"):
            self.advance()
            rhs = self.parse_comparison()
            lhs = ast.Binary("&&", lhs, rhs, self.span_from(lhs.span))
        return lhs

    def parse_comparison(self):
        lhs = self.parse_additive()
        while self.peek().kind in _COMPARISONS:
            op = self.advance().kind
            rhs = self.parse_additive()
            lhs = ast.Binary(op, lhs, rhs, self.span_from(lhs.span))
        return lhs

    def parse_additive(self):
        lhs = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.parse_multiplicative()
            lhs = ast.Binary(op, lhs, rhs, self.span_from(lhs.span))
        return lhs

    def parse_multiplicative(self):
        lhs = self.parse_unary()
        while self.at("*"):
            self.advance()
            rhs = self.parse_unary()
            lhs = ast.Binary("*", lhs, rhs, self.span_from(lhs.span))
        return lhs

    def parse_unary(self):
        tok = self.peek()
        if tok.kind in ("!", "-"):
            self._enter()
            try:
                self.advance()
                operand = self.parse_unary()
                return ast.Unary(tok.kind, operand, self.span_from(tok.span))
            finally:
                self.depth -= 1
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.at("("):
                self.advance()
                args = self.parse_args()
                self.expect(")", "argument list")
                if isinstance(expr, ast.VarRef):
                    expr = ast.Call(expr.name, args, self.span_from(expr.span))
                else:
                    expr = ast.Invoke(expr, args, self.span_from(expr.span))
            elif self.at("."):
                self.advance()
                name = self.expect("ident", "member access").text
                if self.at("("):
                    self.advance()
                    args = self.parse_args()
                    self.expect(")", "argument list")
                    expr = ast.MethodCall(expr, name, args, self.span_from(expr.span))
                else:
                    expr = ast.FieldAccess(expr, name, self.span_from(expr.span))
            else:
                return expr

    def parse_args(self):
        args = []
        if self.at(")"):
            return args
        while True:
            args.append(self.parse_expr())
            if self.at(","):
                self.advance()
            else:
                return args

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return ast.IntLit(int(tok.text), tok.span)
        if tok.kind in ("true", "false"):
            self.advance()
            return ast.BoolLit(tok.kind == "true", tok.span)
        if tok.kind == "ident":
            self.advance()
            return ast.VarRef(tok.text, tok.span)
        if tok.kind == "result":
            self.advance()
            return ast.ResultExpr(tok.span)
        if tok.kind == "this":
            self.advance()
            return ast.ThisExpr(tok.span)
        if tok.kind == "new":
            start = self.advance().span
            name = self.expect("ident", "new expression").text
            self.expect("(", "new expression")
            args = self.parse_args()
            self.expect(")", "new expression")
            return ast.New(name, args, self.span_from(start))
        if tok.kind == "(":
            if self.is_lambda_start():
                return self.parse_lambda()
            self.advance()
            expr = self.parse_expr()
            self.expect(")", "parenthesized expression")
            return expr
        raise ParseError(
            f"expected an expression, found {tok.text or 'end of input'!r}", tok.span
        )

    def is_lambda_start(self) -> bool:
        # At '('. A lambda is "()" "=>" or "(" IDENT ":" ...
        if self.peek(1).kind == ")" and self.peek(2).kind == "=>":
            return True
        return self.peek(1).kind == "ident" and self.peek(2).kind == ":"

    def parse_lambda(self) -> ast.Lambda:
        start = self.expect("(").span
        params = self.parse_params()
        self.expect(")", "lambda parameters")
        self.expect("=>", "lambda")
        body = self.parse_expr()
        return ast.Lambda(params, body, self.span_from(start))


def parse(source: str, file: str = "<input>") -> ast.Program:
    """Parse MiniOO source text into a Program.

    Raises ParseError (with a span and an expected-token message) on any
    malformed input; never raises anything else on any text.
    """
    tokens = tokenize(source, file)
    return _Parser(tokens, file).parse_program()
