"""Runtime tests: ghost erasure, fuel-bounded evaluation, dynamic
contract checks, and the divergence-made-observable property."""

from __future__ import annotations

from miniver import ast, corpus_dir
from miniver.parser import parse
from miniver.runtime import (
    BoolV, ContractViolation, Fuel, FuelExhausted, IntV, Returned,
    RuntimeFailure, UnitV, erase, eval_program,
)
from miniver.typecheck import typecheck


def load(name: str):
    path = corpus_dir() / name
    return typecheck(parse(path.read_text(), str(path)))


def run(tp, entry, args=(), fuel=10**6, check=False):
    return eval_program(tp, entry, list(args), Fuel(fuel), check_contracts=check)


# -------------------------------------------------------------- erasure

def test_erase_empties_ghost_only_body():
    erased = erase(load("gobra_exploit.moo"))
    body = erased.functions["test"].body
    assert body.stmts == [ast.Return(None, body.span)]


def test_erase_keeps_non_ghost_statements():
    erased = erase(load("omega_exploit.moo"))
    stmts = erased.functions["test"].body.stmts
    assert len(stmts) == 2
    assert isinstance(stmts[0], ast.VarDecl) and stmts[0].name == "o"
    assert isinstance(stmts[0].init, ast.New)
    assert isinstance(stmts[1], ast.Return)


def test_erase_is_identity_on_ghost_free_programs():
    tp = load("straightline.moo")
    assert erase(tp).program == tp.program


def test_erase_is_idempotent():
    for name in ("gobra_exploit.moo", "bad_client.moo", "omega_exploit.moo"):
        once = erase(load(name))
        assert erase(once).program == once.program


# ------------------------------------------------------------------ eval

def test_verified_false_contract_is_dynamically_violated():
    outcome = run(erase(load("bad_client.moo")), "bad", check=True)
    assert isinstance(outcome, ContractViolation)
    assert outcome.callable == "bad"
    assert outcome.clause_kind == "ensures"
    assert outcome.clause_index == 0
    assert outcome.returned == IntV(1)


def test_erased_exploit_terminates_normally():
    outcome = run(erase(load("gobra_exploit.moo")), "test")
    assert outcome == Returned(UnitV())


def test_unerased_recursion_exhausts_fuel():
    outcome = run(load("gobra_exploit.moo"), "recurse", fuel=1000)
    assert outcome == FuelExhausted(1000)


def test_divergence_becomes_observable_without_erasure():
    for name in ("gobra_exploit.moo", "key_exploit.moo", "omega_exploit.moo"):
        tp = load(name)
        assert isinstance(run(tp, "test", fuel=10**4), FuelExhausted), name
        fuel = Fuel(10**4)
        outcome = eval_program(erase(tp), "test", [], fuel)
        assert isinstance(outcome, Returned), name
        assert fuel.consumed < 10, name


def test_requires_violation_detected_on_entry():
    outcome = run(erase(load("fact.moo")), "fact", [IntV(-1)], check=True)
    assert isinstance(outcome, ContractViolation)
    assert outcome.clause_kind == "requires"


def test_fact_computes_powers_of_two():
    tp = erase(load("fact.moo"))
    for n, want in [(0, 1), (1, 2), (5, 32)]:
        assert run(tp, "fact", [IntV(n)], check=True) == Returned(IntV(want))


def test_fuel_monotonicity():
    tp = erase(load("bad_client.moo"))
    fuel = Fuel(10**6)
    base = eval_program(tp, "bad", [], fuel, check_contracts=True)
    needed = fuel.consumed
    for budget in (needed, needed + 1, needed + 100):
        again = eval_program(tp, "bad", [], Fuel(budget), check_contracts=True)
        assert again == base


def test_determinism():
    tp = erase(load("straightline.moo"))
    runs = [run(tp, "clamp_sign", [IntV(-7)]) for _ in range(3)]
    assert runs == [Returned(IntV(-1))] * 3


def test_closures_capture_environment():
    src = """
func apply(f: (int) -> int, x: int) -> int {
  return f(x);
}

func main(k: int) -> int {
  var add_k := (x: int) => x + k;
  return apply(add_k, 10);
}
"""
    tp = typecheck(parse(src, "<t>"))
    assert run(tp, "main", [IntV(5)]) == Returned(IntV(15))


def test_method_dispatch_and_fields():
    src = """
class Counter {
  const start: int;

  constructor(s: int) {
    this.start := s;
  }

  func bump() -> int {
    return this.start + 1;
  }
}

func main(s: int) -> int {
  var c := new Counter(s);
  return c.bump();
}
"""
    tp = typecheck(parse(src, "<t>"))
    assert run(tp, "main", [IntV(41)]) == Returned(IntV(42))


def test_runtime_failures():
    tp = load("straightline.moo")
    assert run(tp, "nope") == RuntimeFailure("unbound-entry")
    outcome = run(tp, "double", [])
    assert isinstance(outcome, RuntimeFailure)
    assert outcome.kind == "arity-mismatch"


def test_boolean_arguments_and_short_circuit():
    src = """
func pick(b: bool, x: int) -> int {
  if b || 1 == crash_free(x) {
    return 1;
  }
  return 0;
}

func crash_free(x: int) -> int {
  return x;
}
"""
    tp = typecheck(parse(src, "<t>"))
    assert run(tp, "pick", [BoolV(True), IntV(0)]) == Returned(IntV(1))
    assert run(tp, "pick", [BoolV(False), IntV(7)]) == Returned(IntV(0))
