"""Typechecker tests: name resolution, the call-form rewrites, the
linearity/ghost/result rules, and the full-coverage invariants."""

from __future__ import annotations

import pytest

from miniver import ast, corpus_dir
from miniver.parser import parse
from miniver.typecheck import (
    ABSTRACT_METHOD, CONSTRUCTOR, CONTRACT_IMPURE, DUPLICATE, FIELD_INIT,
    FUNCTION, GHOST_MISUSE, LAMBDA, METHOD, NONLINEAR, RESULT_MISUSE,
    TypeCheckError, UNRESOLVED, typecheck,
)


def check(src: str):
    return typecheck(parse(src, "<t>"))


def errors_of(src: str):
    with pytest.raises(TypeCheckError) as exc:
        check(src)
    return {e.category for e in exc.value.errors}


def corpus_programs():
    return {p.name: typecheck(parse(p.read_text(), str(p)))
            for p in sorted(corpus_dir().glob("*.moo"))}


def test_omega_callables():
    tp = corpus_programs()["omega_exploit.moo"]
    kinds = {(c.name, c.kind) for c in tp.callables}
    assert kinds == {
        ("Uninhabited.get", ABSTRACT_METHOD),
        ("Omega.constructor", CONSTRUCTOR),
        ("lambda#0", LAMBDA),
        ("test", FUNCTION),
    }


def test_omega_invoke_typed_as_trait():
    tp = corpus_programs()["omega_exploit.moo"]
    test = tp.functions["test"]
    ghost_u = test.body.stmts[1]
    assert isinstance(ghost_u.init, ast.Invoke)
    assert tp.type_of(ghost_u.init) == ast.NamedType("Uninhabited")


def test_method_call_on_arrow_field_becomes_invoke():
    tp = corpus_programs()["omega_exploit.moo"]
    lam = tp.callable_named("lambda#0")
    assert isinstance(lam.body, ast.Invoke)
    assert isinstance(lam.body.fn, ast.FieldAccess)


def test_nonlinear_multiplication_rejected():
    assert NONLINEAR in errors_of("func f(x: int) -> int { return x * x; }")


def test_literal_multiplication_accepted():
    check("func f(x: int) -> int { return 3 * x; }")
    check("func f(x: int) -> int { return x * -2; }")


def test_result_outside_ensures_rejected():
    assert RESULT_MISUSE in errors_of("func f() -> int { return result; }")
    assert RESULT_MISUSE in errors_of(
        "func f() -> int requires result == 0 { return 0; }"
    )


def test_result_without_return_type_rejected():
    assert RESULT_MISUSE in errors_of("func f() ensures result == 0 { return; }")


def test_ghost_readable_only_from_ghost_code():
    assert GHOST_MISUSE in errors_of(
        "func f() -> int { ghost var g := 1; return g; }"
    )
    # ghost-to-ghost flow is fine
    check("func f() -> int { ghost var g := 1; ghost var h := g; return 0; }")


def test_blank_is_never_readable():
    assert UNRESOLVED in errors_of("func f() -> int { var _ := 1; return _; }")


def test_shadowing_rejected():
    assert DUPLICATE in errors_of(
        "func f(x: int) -> int { var x := 1; return x; }"
    )


def test_calls_in_contracts_rejected():
    assert CONTRACT_IMPURE in errors_of(
        "func g() -> int { return 0; } func f() -> int ensures result == g() { return 0; }"
    )


def test_missing_return_rejected():
    assert errors_of("func f(b: bool) -> int { if b { return 1; } }")


def test_unknown_name_rejected():
    assert UNRESOLVED in errors_of("func f() -> int { return g(); }")


def test_typed_coverage_on_corpus():
    """Every expression node is typed and every reference resolved."""
    for name, tp in corpus_programs().items():
        for decl in tp.program.decls:
            for root in _bodies(decl):
                for e in ast.walk_exprs(root):
                    assert id(e) in tp.types, (name, e)
                    if isinstance(e, (ast.Call, ast.New)):
                        assert id(e) in tp.resolution, (name, e)


def test_ghost_flag_only_on_vardecl_in_corpus():
    for name, tp in corpus_programs().items():
        for c in tp.callables:
            assert all(isinstance(p, ast.Param) for p in c.params)
        for decl in tp.program.decls:
            for root in _bodies(decl):
                for node in _stmts(root):
                    if getattr(node, "ghost", False):
                        assert isinstance(node, ast.VarDecl), name


def _bodies(decl):
    if isinstance(decl, ast.FunctionDecl) and decl.body is not None:
        yield decl.body
    if isinstance(decl, ast.ClassDecl):
        for f in decl.fields:
            if f.init is not None:
                yield f.init
        if decl.constructor is not None:
            yield decl.constructor.body
        for m in decl.methods:
            if m.body is not None:
                yield m.body


def _stmts(root):
    if isinstance(root, ast.Block):
        for s in root.stmts:
            yield s
            yield from _stmts(s)
    elif isinstance(root, ast.If):
        yield from _stmts(root.then)
        if root.orelse is not None:
            yield from _stmts(root.orelse)


def test_trait_signature_mismatch_rejected():
    src = """
trait T {
  func get() -> int;
}

class C implements T {
  func get() -> bool {
    return true;
  }
}
"""
    assert errors_of(src)


def test_corpus_typechecks():
    assert len(corpus_programs()) == 7
