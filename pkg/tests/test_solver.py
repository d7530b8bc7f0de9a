"""Solver tests: Fourier–Motzkin elimination, validity checking with its
soundness/honesty properties, the brute-force oracle, and the prefix
round-trip used by the dump format."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from miniver.errors import PolarityError
from miniver.formula import (
    AndF, BoolVar, Cmp, FALSE, ForallF, ImpliesF, LinTerm, NotF, OrF, TRUE,
    dump, eval_formula, parse_formula,
)
from miniver.solver import (
    Counterexample, EQ, LE, Proved, SatOverRationals, Unknown,
    UnsatOverRationals, brute_force, check_polarity, fm_eliminate, is_valid,
)


def lin(const=0, **coeffs):
    return LinTerm.make(const, coeffs)


# ------------------------------------------------------------------- FM

def test_fm_empty_interval():
    # x <= 1 and x >= 2
    constraints = [(lin(-1, x=1), LE), (lin(2, x=-1), LE)]
    assert fm_eliminate(constraints) == UnsatOverRationals()


def test_fm_equality_has_rational_witness():
    result = fm_eliminate([(lin(-1, x=2), EQ)])
    assert isinstance(result, SatOverRationals)
    assert result.witness["x"] == Fraction(1, 2)


def test_fm_vacuous():
    result = fm_eliminate([])
    assert isinstance(result, SatOverRationals)
    assert result.witness == {}


def test_fm_witness_honesty_random():
    rng = random.Random(11)
    names = ["x", "y", "z"]
    for _ in range(300):
        constraints = []
        for _ in range(rng.randrange(1, 6)):
            coeffs = {v: rng.randrange(-3, 4) for v in rng.sample(names, rng.randrange(1, 4))}
            coeffs = {v: c for v, c in coeffs.items() if c}
            term = LinTerm.make(rng.randrange(-5, 6), coeffs)
            constraints.append((term, rng.choice([LE, EQ])))
        result = fm_eliminate(constraints)
        if isinstance(result, SatOverRationals):
            for term, rel in constraints:
                value = term.evaluate({v: result.witness.get(v, Fraction(0))
                                       for v in term.vars()})
                assert (value == 0) if rel == EQ else (value <= 0)


# -------------------------------------------------------------- is_valid

def test_vacuous_implication_under_forall():
    assert is_valid(ForallF("t0", "int", ImpliesF(FALSE, FALSE))) == Proved()


def test_constant_falsehood():
    verdict = is_valid(Cmp("==", LinTerm.of_const(1), LinTerm.of_const(0)))
    assert verdict == Counterexample({})


def test_antisymmetry():
    x = LinTerm.of_var("x")
    zero = LinTerm.of_const(0)
    f = ImpliesF(AndF(Cmp(">=", x, zero), Cmp("<=", x, zero)), Cmp("==", x, zero))
    assert is_valid(f) == Proved()


def test_counterexample_is_concrete_and_honest():
    x = LinTerm.of_var("x")
    f = Cmp("<=", x, LinTerm.of_const(3))
    verdict = is_valid(f)
    assert isinstance(verdict, Counterexample)
    assert eval_formula(f, verdict.assignment) is False


def test_boolean_structure():
    p, q = BoolVar("p"), BoolVar("q")
    assert is_valid(ImpliesF(AndF(p, q), p)) == Proved()
    verdict = is_valid(ImpliesF(OrF(p, q), p))
    assert isinstance(verdict, Counterexample)
    assert verdict.assignment["q"] is True and verdict.assignment["p"] is False


def test_integer_gap_is_unknown_not_proved():
    # 2x == 1 has a rational solution but no integer one; refuting it needs
    # integer reasoning that Fourier-Motzkin does not provide.
    x = LinTerm.of_var("x")
    f = Cmp("!=", x.scale(2), LinTerm.of_const(1))
    verdict = is_valid(f)
    assert isinstance(verdict, Unknown)
    assert verdict.rational_witness["x"] == Fraction(1, 2)


def test_forall_instantiates_as_fresh_free_variable():
    x = LinTerm.of_var("x")
    assert is_valid(ForallF("x", "int", Cmp("==", x, x))) == Proved()
    verdict = is_valid(ForallF("x", "int", Cmp("<=", x, LinTerm.of_const(0))))
    assert not isinstance(verdict, Proved)


def test_negative_polarity_forall_rejected():
    with pytest.raises(PolarityError):
        is_valid(NotF(ForallF("x", "int", TRUE)))
    with pytest.raises(PolarityError):
        is_valid(ImpliesF(ForallF("x", "int", TRUE), TRUE))


def test_determinism():
    x = LinTerm.of_var("x")
    f = Cmp("<=", x, LinTerm.of_const(3))
    assert is_valid(f) == is_valid(f)


# ------------------------------------------------------------ brute force

def test_brute_force_examples():
    assert brute_force(Cmp("==", LinTerm.of_const(1), LinTerm.of_const(0)), 5) == {}
    x = LinTerm.of_var("x")
    assert brute_force(Cmp("==", x.add(LinTerm.of_const(0)), x), 10) is None


def test_brute_force_finds_boundary():
    x = LinTerm.of_var("x")
    found = brute_force(Cmp("<=", x, LinTerm.of_const(3)), 10)
    assert found is not None
    assert eval_formula(Cmp("<=", x, LinTerm.of_const(3)), found) is False


# --------------------------------------------------------------- round trip

ROUND_TRIP_CASES = [
    TRUE,
    FALSE,
    BoolVar("p"),
    NotF(BoolVar("p")),
    Cmp("<=", LinTerm.make(3, {"x": 2, "y": -1}), LinTerm.of_const(0)),
    AndF(TRUE, OrF(FALSE, BoolVar("q"))),
    ImpliesF(Cmp("==", LinTerm.of_var("n"), LinTerm.of_const(0)), FALSE),
    ForallF("t0", "int", ImpliesF(FALSE, FALSE)),
    ForallF("o", "Omega", ForallF("u", "Uninhabited", TRUE)),
]


@pytest.mark.parametrize("f", ROUND_TRIP_CASES, ids=[dump(f) for f in ROUND_TRIP_CASES])
def test_prefix_round_trip(f):
    assert parse_formula(dump(f)) == f


# --------------------------------------------------- randomized soundness

def random_formula(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        names = ["x", "y", "z"]
        coeffs = {v: rng.randrange(-3, 4) for v in rng.sample(names, rng.randrange(0, 4))}
        lhs = LinTerm.make(rng.randrange(-3, 4), {v: c for v, c in coeffs.items() if c})
        rhs = LinTerm.of_const(rng.randrange(-3, 4))
        return Cmp(rng.choice(["==", "!=", "<", "<=", ">", ">="]), lhs, rhs)
    shape = rng.randrange(4)
    if shape == 0:
        return NotF(random_formula(rng, depth - 1))
    a, b = random_formula(rng, depth - 1), random_formula(rng, depth - 1)
    return [AndF, OrF, ImpliesF][shape - 1](a, b)


def test_soundness_against_oracle_smoke():
    rng = random.Random(5)
    for _ in range(200):
        f = random_formula(rng, rng.randrange(1, 4))
        if is_valid(f) == Proved():
            assert brute_force(f, 10) is None, dump(f)
