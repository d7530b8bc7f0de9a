"""Logical formulas over linear integer arithmetic with boolean structure.

Formulas are immutable. Variables are plain strings; the VC generator also
uses compound names ("o.f" for const-field projections, "$t0" for
anormalization temporaries), which are opaque identifiers here.

The prefix notation used by `dump` / `parse_formula`:

    (forall x:int F)   (=> F G)   (and F G)   (or F G)   (not F)
    (cmp <= t1 t2)     true       false       x            (bool atom)
    terms: (+ c (* k x) ...)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import EvalError

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


# ---------------------------------------------------------------- linear terms

@dataclass(frozen=True)
class LinTerm:
    """constant + sum of coeff * var. Zero coefficients are never stored."""

    const: int
    coeffs: tuple  # sorted tuple of (var, coeff), coeff != 0

    def __post_init__(self):
        assert all(c != 0 for _, c in self.coeffs)

    @staticmethod
    def of_const(c) -> "LinTerm":
        return LinTerm(c, ())

    @staticmethod
    def of_var(name: str, coeff=1) -> "LinTerm":
        if coeff == 0:
            return LinTerm(0, ())
        return LinTerm(0, ((name, coeff),))

    @staticmethod
    def make(const, coeff_map) -> "LinTerm":
        items = tuple(sorted((v, c) for v, c in coeff_map.items() if c != 0))
        return LinTerm(const, items)

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def add(self, other: "LinTerm") -> "LinTerm":
        m = self.coeff_dict()
        for v, c in other.coeffs:
            m[v] = m.get(v, 0) + c
        return LinTerm.make(self.const + other.const, m)

    def sub(self, other: "LinTerm") -> "LinTerm":
        return self.add(other.scale(-1))

    def scale(self, k) -> "LinTerm":
        if k == 0:
            return LinTerm(0, ())
        return LinTerm.make(self.const * k, {v: c * k for v, c in self.coeffs})

    def subst(self, var: str, term: "LinTerm") -> "LinTerm":
        m = self.coeff_dict()
        k = m.pop(var, 0)
        if k == 0:
            return self
        return LinTerm.make(self.const, m).add(term.scale(k))

    def subst_all(self, mapping: dict) -> "LinTerm":
        """Simultaneous substitution of variables by linear terms."""
        out = LinTerm.of_const(self.const)
        for v, c in self.coeffs:
            t = mapping.get(v)
            if isinstance(t, LinTerm):
                out = out.add(t.scale(c))
            else:
                out = out.add(LinTerm.of_var(v, c))
        return out

    def vars(self) -> set:
        return {v for v, _ in self.coeffs}

    def evaluate(self, assignment) -> Union[int, Fraction]:
        total = self.const
        for v, c in self.coeffs:
            if v not in assignment:
                raise EvalError(f"unbound variable {v!r}")
            total += c * assignment[v]
        return total

    def dump(self) -> str:
        parts = [str(self.const)]
        parts += [f"(* {c} {v})" for v, c in self.coeffs]
        return "(+ " + " ".join(parts) + ")"


ZERO = LinTerm.of_const(0)


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class NotF:
    body: "Formula"


@dataclass(frozen=True)
class AndF:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class OrF:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class ImpliesF:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class ForallF:
    var: str
    vtype: str  # "int", "bool", or a class/trait name
    body: "Formula"


@dataclass(frozen=True)
class Cmp:
    op: str  # one of CMP_OPS
    lhs: LinTerm
    rhs: LinTerm


@dataclass(frozen=True)
class BoolVar:
    name: str


@dataclass(frozen=True)
class RefEq:
    # Reserved for object-identity atoms; the frontend currently rejects
    # contracts over reference types, so this is never generated.
    lhs: str
    rhs: str


Formula = Union[TrueF, FalseF, NotF, AndF, OrF, ImpliesF, ForallF, Cmp, BoolVar, RefEq]

TRUE = TrueF()
FALSE = FalseF()


def conj(formulas) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return TRUE
    out = formulas[0]
    for f in formulas[1:]:
        out = AndF(out, f)
    return out


def free_vars(f: Formula) -> set:
    if isinstance(f, (TrueF, FalseF)):
        return set()
    if isinstance(f, NotF):
        return free_vars(f.body)
    if isinstance(f, (AndF, OrF, ImpliesF)):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, ForallF):
        return free_vars(f.body) - {f.var}
    if isinstance(f, Cmp):
        return f.lhs.vars() | f.rhs.vars()
    if isinstance(f, BoolVar):
        return {f.name}
    if isinstance(f, RefEq):
        return {f.lhs, f.rhs}
    raise TypeError(f)


_fresh_counter = [0]


def fresh_name(base: str) -> str:
    _fresh_counter[0] += 1
    return f"{base}!{_fresh_counter[0]}"


def subst(f: Formula, mapping: dict) -> Formula:
    """Capture-avoiding substitution. `mapping` sends an integer variable to
    a LinTerm or a boolean variable to a Formula."""
    if not mapping:
        return f
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, NotF):
        return NotF(subst(f.body, mapping))
    if isinstance(f, AndF):
        return AndF(subst(f.lhs, mapping), subst(f.rhs, mapping))
    if isinstance(f, OrF):
        return OrF(subst(f.lhs, mapping), subst(f.rhs, mapping))
    if isinstance(f, ImpliesF):
        return ImpliesF(subst(f.lhs, mapping), subst(f.rhs, mapping))
    if isinstance(f, ForallF):
        mapping = {v: t for v, t in mapping.items() if v != f.var}
        if not mapping:
            return f
        introduced = set()
        for t in mapping.values():
            introduced |= t.vars() if isinstance(t, LinTerm) else free_vars(t)
        var, body = f.var, f.body
        if var in introduced:
            renamed = fresh_name(var)
            renaming = (
                BoolVar(renamed) if f.vtype == "bool" else LinTerm.of_var(renamed)
            )
            body = subst(body, {var: renaming})
            var = renamed
        return ForallF(var, f.vtype, subst(body, mapping))
    if isinstance(f, Cmp):
        return Cmp(f.op, f.lhs.subst_all(mapping), f.rhs.subst_all(mapping))
    if isinstance(f, BoolVar):
        t = mapping.get(f.name)
        if t is None:
            return f
        if isinstance(t, LinTerm):
            # an int substitution never touches a bool atom
            return f
        return t
    if isinstance(f, RefEq):
        return f
    raise TypeError(f)


# ---------------------------------------------------------------- evaluation

def _cmp(op: str, a, b) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_formula(f: Formula, assignment: dict, forall_bound: Optional[int] = None) -> bool:
    """Evaluate under an assignment of ints/bools to variables.

    Arithmetic is exact (Python integers). Forall nodes are rejected unless
    `forall_bound` is given, in which case int binders are enumerated over
    [-forall_bound, forall_bound] and bool binders over both values; this
    bounded mode exists for test oracles only.
    """
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, NotF):
        return not eval_formula(f.body, assignment, forall_bound)
    if isinstance(f, AndF):
        return eval_formula(f.lhs, assignment, forall_bound) and eval_formula(
            f.rhs, assignment, forall_bound
        )
    if isinstance(f, OrF):
        return eval_formula(f.lhs, assignment, forall_bound) or eval_formula(
            f.rhs, assignment, forall_bound
        )
    if isinstance(f, ImpliesF):
        return (not eval_formula(f.lhs, assignment, forall_bound)) or eval_formula(
            f.rhs, assignment, forall_bound
        )
    if isinstance(f, ForallF):
        if f.var not in free_vars(f.body):
            return eval_formula(f.body, assignment, forall_bound)
        if forall_bound is None:
            raise EvalError("cannot evaluate a quantifier without a bound")
        values = (
            (False, True)
            if f.vtype == "bool"
            else range(-forall_bound, forall_bound + 1)
        )
        inner = dict(assignment)
        for v in values:
            inner[f.var] = v
            if not eval_formula(f.body, inner, forall_bound):
                return False
        return True
    if isinstance(f, Cmp):
        return _cmp(f.op, f.lhs.evaluate(assignment), f.rhs.evaluate(assignment))
    if isinstance(f, BoolVar):
        if f.name not in assignment:
            raise EvalError(f"unbound variable {f.name!r}")
        v = assignment[f.name]
        if not isinstance(v, bool):
            raise EvalError(f"variable {f.name!r} is not boolean")
        return v
    if isinstance(f, RefEq):
        raise EvalError("RefEq atoms are not evaluable")
    raise TypeError(f)


# ---------------------------------------------------------------- prefix text

def dump(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, NotF):
        return f"(not {dump(f.body)})"
    if isinstance(f, AndF):
        return f"(and {dump(f.lhs)} {dump(f.rhs)})"
    if isinstance(f, OrF):
        return f"(or {dump(f.lhs)} {dump(f.rhs)})"
    if isinstance(f, ImpliesF):
        return f"(=> {dump(f.lhs)} {dump(f.rhs)})"
    if isinstance(f, ForallF):
        return f"(forall {f.var}:{f.vtype} {dump(f.body)})"
    if isinstance(f, Cmp):
        return f"(cmp {f.op} {f.lhs.dump()} {f.rhs.dump()})"
    if isinstance(f, BoolVar):
        return f.name
    if isinstance(f, RefEq):
        return f"(refeq {f.lhs} {f.rhs})"
    raise TypeError(f)


def _sexp_tokens(text: str):
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


class _SexpParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.tokens):
            raise ValueError("unexpected end of formula text")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ValueError(f"expected {tok!r}, got {got!r}")

    def formula(self) -> Formula:
        tok = self.next()
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok != "(":
            return BoolVar(tok)
        head = self.next()
        if head == "not":
            out = NotF(self.formula())
        elif head == "and":
            out = AndF(self.formula(), self.formula())
        elif head == "or":
            out = OrF(self.formula(), self.formula())
        elif head == "=>":
            out = ImpliesF(self.formula(), self.formula())
        elif head == "forall":
            binder = self.next()
            var, _, vtype = binder.partition(":")
            out = ForallF(var, vtype or "int", self.formula())
        elif head == "cmp":
            op = self.next()
            if op not in CMP_OPS:
                raise ValueError(f"unknown comparison {op!r}")
            out = Cmp(op, self.term(), self.term())
        elif head == "refeq":
            out = RefEq(self.next(), self.next())
        else:
            raise ValueError(f"unknown form {head!r}")
        self.expect(")")
        return out

    def term(self) -> LinTerm:
        self.expect("(")
        self.expect("+")
        const = int(self.next())
        coeffs = {}
        while True:
            tok = self.next()
            if tok == ")":
                return LinTerm.make(const, coeffs)
            if tok != "(":
                raise ValueError(f"expected a (* k x) factor, got {tok!r}")
            self.expect("*")
            k = int(self.next())
            v = self.next()
            coeffs[v] = coeffs.get(v, 0) + k
            self.expect(")")


def parse_formula(text: str) -> Formula:
    """Parse the prefix notation produced by dump(); round-trips exactly."""
    parser = _SexpParser(_sexp_tokens(text))
    out = parser.formula()
    if parser.pos != len(parser.tokens):
        raise ValueError("trailing tokens after formula")
    return out
