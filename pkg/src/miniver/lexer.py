"""Tokenizer for MiniOO source text."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Span
from .errors import ParseError

KEYWORDS = {
    "func", "trait", "class", "implements", "constructor", "const",
    "ghost", "var", "return", "if", "else",
    "requires", "ensures", "decreases",
    "true", "false", "result", "this", "new",
    "int", "bool",
}

# Longest match first.
SYMBOLS = [
    "==>", "->", "=>", ":=", "==", "!=", "<=", ">=", "&&", "||",
    "(", ")", "{", "}", ";", ":", ",", ".",
    "<", ">", "+", "-", "*", "!",
]


@dataclass
class Token:
    kind: str  # "ident", "int", keyword, or symbol text; "eof"
    text: str
    span: Span


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(source: str, file: str = "<input>") -> list:
    tokens = []
    i = 0
    line = 1
    line_start = 0
    n = len(source)

    def span(start: int, end: int, start_line: int, start_col: int) -> Span:
        return Span(file, start, end, start_line, start_col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch.isspace():
            i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        col = i - line_start + 1
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], span(i, j, line, col)))
            i = j
            continue
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(source[j]):
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, span(i, j, line, col)))
            i = j
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(sym, sym, span(i, i + len(sym), line, col)))
                i += len(sym)
                break
        else:
            raise ParseError(
                f"unexpected character {ch!r}",
                span(i, i + 1, line, col),
            )
    tokens.append(Token("eof", "", span(n, n, line, n - line_start + 1)))
    return tokens
