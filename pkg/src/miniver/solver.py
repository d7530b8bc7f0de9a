"""Validity checking for generated verification conditions.

Sound-for-validity over quantifier-free linear integer arithmetic with
boolean structure:

  * negate, convert to NNF; the negation of a positive-polarity Forall is
    existential and is replaced by a fresh free (skolem) variable;
  * expand to DNF (VCs are tiny; a hard cap guards pathological input);
  * each disjunct: boolean-literal consistency, then rational
    satisfiability of the linear atoms by Fourier-Motzkin elimination.

All disjuncts rationally unsatisfiable => Proved (sound over the
integers a fortiori). Otherwise an integer counterexample is searched by
rounding rational witnesses; failing that the verdict is Unknown, which
the pipeline treats as a verification failure.

Arithmetic is exact throughout (ints and fractions.Fraction).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import CapacityError, PolarityError
from .formula import (
    AndF, BoolVar, Cmp, FalseF, ForallF, Formula, ImpliesF, LinTerm, NotF,
    OrF, RefEq, TrueF, eval_formula, free_vars, fresh_name, subst,
)

MAX_DISJUNCTS = 10**5
MAX_ROUNDING_VARS = 8
MAX_BRUTE_VARS = 6

# Constraint relations: term <= 0, term < 0, term = 0.
LE, LT, EQ = "le", "lt", "eq"


@dataclass(frozen=True)
class Proved:
    pass


@dataclass(frozen=True)
class Counterexample:
    assignment: dict


@dataclass(frozen=True)
class Unknown:
    rational_witness: dict


@dataclass(frozen=True)
class SatOverRationals:
    witness: dict  # var -> Fraction


@dataclass(frozen=True)
class UnsatOverRationals:
    pass


# ------------------------------------------------------------ Fourier-Motzkin

def _eval_term(term: LinTerm, assignment: dict) -> Fraction:
    total = Fraction(term.const)
    for v, c in term.coeffs:
        total += Fraction(c) * assignment[v]
    return total


def _holds(term: LinTerm, rel: str, assignment: dict) -> bool:
    val = _eval_term(term, assignment)
    if rel == LE:
        return val <= 0
    if rel == LT:
        return val < 0
    return val == 0


def fm_eliminate(constraints):
    """Decide rational satisfiability of constraints (LinTerm, rel) meaning
    term <= 0 / term < 0 / term = 0.

    Returns SatOverRationals with a verified witness, or UnsatOverRationals.
    Equalities are eliminated by substitution first; then variables are
    eliminated in ascending order of occurrence count.
    """
    original = list(constraints)
    work = list(original)
    eq_subs = []  # (var, LinTerm) in elimination order
    elim = []  # (var, lowers, uppers): bound exprs with strictness

    # Phase 1: substitute equalities away.
    while True:
        eq = next(
            (c for c in work if c[1] == EQ and c[0].coeffs), None
        )
        if eq is None:
            break
        term, _ = eq
        var, a = term.coeffs[0]
        # a*var + rest = 0  =>  var = -rest / a
        rest = LinTerm.make(term.const, {v: c for v, c in term.coeffs if v != var})
        expr = _scale_fraction(rest, Fraction(-1, 1) / Fraction(a))
        eq_subs.append((var, expr))
        work = [(t.subst(var, expr), rel) for t, rel in work if (t, rel) != eq]
        ok, work = _drop_constants(work)
        if not ok:
            return UnsatOverRationals()
    ok, work = _drop_constants(work)
    if not ok:
        return UnsatOverRationals()

    # Phase 2: eliminate variables from the inequalities.
    while True:
        counts = {}
        for t, _ in work:
            for v in t.vars():
                counts[v] = counts.get(v, 0) + 1
        if not counts:
            break
        var = min(counts, key=lambda v: (counts[v], v))
        lowers, uppers, rest = [], [], []
        for t, rel in work:
            a = t.coeff_dict().get(var, 0)
            if a == 0:
                rest.append((t, rel))
                continue
            strict = rel == LT
            # a*var + r <= 0:  a>0 -> var <= -r/a (upper); a<0 -> var >= -r/a
            r = LinTerm.make(t.const, {v: c for v, c in t.coeffs if v != var})
            bound = _scale_fraction(r, Fraction(-1, 1) / Fraction(a))
            if a > 0:
                uppers.append((bound, strict))
            else:
                lowers.append((bound, strict))
        new = rest
        for lo, sl in lowers:
            for hi, su in uppers:
                new.append((lo.sub(hi), LT if (sl or su) else LE))
        ok, new = _drop_constants(new)
        if not ok:
            return UnsatOverRationals()
        elim.append((var, lowers, uppers))
        work = new

    # Phase 3: reconstruct a witness by back-substitution.
    witness = {}
    all_vars = set()
    for t, _ in original:
        all_vars |= t.vars()
    touched = {v for v, _, _ in elim} | {v for v, _ in eq_subs}
    for v in sorted(all_vars - touched):
        witness[v] = Fraction(0)
    for var, lowers, uppers in reversed(elim):
        los = [(_eval_term(b, witness), s) for b, s in lowers]
        his = [(_eval_term(b, witness), s) for b, s in uppers]
        if los and his:
            lo = max(v for v, _ in los)
            hi = min(v for v, _ in his)
            witness[var] = lo if lo == hi else (lo + hi) / 2
        elif los:
            witness[var] = max(v for v, _ in los) + 1
        elif his:
            witness[var] = min(v for v, _ in his) - 1
        else:
            witness[var] = Fraction(0)
    for var, expr in reversed(eq_subs):
        witness[var] = _eval_term(expr, witness)
    # Witness honesty: verified by evaluation before returning.
    assert all(_holds(t, rel, witness) for t, rel in original)
    return SatOverRationals(witness)


def _scale_fraction(term: LinTerm, k: Fraction) -> LinTerm:
    return LinTerm.make(
        Fraction(term.const) * k, {v: Fraction(c) * k for v, c in term.coeffs}
    )


def _drop_constants(constraints):
    """Remove variable-free constraints, failing if one is violated."""
    out = []
    for t, rel in constraints:
        if t.coeffs:
            out.append((t, rel))
            continue
        c = t.const
        sat = c <= 0 if rel == LE else (c < 0 if rel == LT else c == 0)
        if not sat:
            return False, []
    return True, out


# ------------------------------------------------------------ NNF / polarity

def check_polarity(f: Formula, positive: bool = True) -> None:
    """Reject Forall in negative position."""
    if isinstance(f, (TrueF, FalseF, Cmp, BoolVar, RefEq)):
        return
    if isinstance(f, NotF):
        check_polarity(f.body, not positive)
    elif isinstance(f, (AndF, OrF)):
        check_polarity(f.lhs, positive)
        check_polarity(f.rhs, positive)
    elif isinstance(f, ImpliesF):
        check_polarity(f.lhs, not positive)
        check_polarity(f.rhs, positive)
    elif isinstance(f, ForallF):
        if not positive:
            raise PolarityError("universal quantifier in negative position")
        check_polarity(f.body, positive)
    else:
        raise TypeError(f)


def _nnf_negated(f: Formula, neg: bool, skolems: dict) -> Formula:
    """NNF of (neg ? not f : f), replacing negatively-occurring Foralls
    (existentials of the negation) by fresh free variables."""
    if isinstance(f, TrueF):
        return FalseF() if neg else f
    if isinstance(f, FalseF):
        return TrueF() if neg else f
    if isinstance(f, NotF):
        return _nnf_negated(f.body, not neg, skolems)
    if isinstance(f, AndF):
        a = _nnf_negated(f.lhs, neg, skolems)
        b = _nnf_negated(f.rhs, neg, skolems)
        return OrF(a, b) if neg else AndF(a, b)
    if isinstance(f, OrF):
        a = _nnf_negated(f.lhs, neg, skolems)
        b = _nnf_negated(f.rhs, neg, skolems)
        return AndF(a, b) if neg else OrF(a, b)
    if isinstance(f, ImpliesF):
        if neg:
            return AndF(
                _nnf_negated(f.lhs, False, skolems),
                _nnf_negated(f.rhs, True, skolems),
            )
        return OrF(
            _nnf_negated(f.lhs, True, skolems),
            _nnf_negated(f.rhs, False, skolems),
        )
    if isinstance(f, ForallF):
        if not neg:
            raise PolarityError("universal quantifier in negative position")
        sk = fresh_name(f.var)
        skolems[sk] = f.vtype
        replacement = BoolVar(sk) if f.vtype == "bool" else LinTerm.of_var(sk)
        return _nnf_negated(subst(f.body, {f.var: replacement}), True, skolems)
    if isinstance(f, Cmp):
        return Cmp(_NEGATE_CMP[f.op], f.lhs, f.rhs) if neg else f
    if isinstance(f, BoolVar):
        return NotF(f) if neg else f
    if isinstance(f, RefEq):
        raise CapacityError("RefEq atoms are not supported by the solver")
    raise TypeError(f)


_NEGATE_CMP = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _dnf(f: Formula):
    """DNF of an NNF formula as a list of literal lists."""
    if isinstance(f, TrueF):
        return [[]]
    if isinstance(f, FalseF):
        return []
    if isinstance(f, OrF):
        return _dnf(f.lhs) + _dnf(f.rhs)
    if isinstance(f, AndF):
        left = _dnf(f.lhs)
        right = _dnf(f.rhs)
        if len(left) * len(right) > MAX_DISJUNCTS:
            raise CapacityError("DNF expansion exceeds the disjunct budget")
        return [a + b for a in left for b in right]
    if isinstance(f, (Cmp, BoolVar)) or (
        isinstance(f, NotF) and isinstance(f.body, BoolVar)
    ):
        return [[f]]
    raise TypeError(f"not in NNF: {f!r}")


def _constraints_of_cmp(atom: Cmp):
    """Return the list of constraint alternatives for one comparison atom;
    `!=` yields two (< and >), every other op yields one."""
    t = atom.lhs.sub(atom.rhs)
    if atom.op == "<=":
        return [[(t, LE)]]
    if atom.op == "<":
        return [[(t, LT)]]
    if atom.op == ">=":
        return [[(t.scale(-1), LE)]]
    if atom.op == ">":
        return [[(t.scale(-1), LT)]]
    if atom.op == "==":
        return [[(t, EQ)]]
    # !=
    return [[(t, LT)], [(t.scale(-1), LT)]]


def _int_vars(f: Formula) -> set:
    if isinstance(f, Cmp):
        return f.lhs.vars() | f.rhs.vars()
    if isinstance(f, NotF):
        return _int_vars(f.body)
    if isinstance(f, (AndF, OrF, ImpliesF)):
        return _int_vars(f.lhs) | _int_vars(f.rhs)
    if isinstance(f, ForallF):
        return _int_vars(f.body) - {f.var}
    return set()


def _bool_vars(f: Formula) -> set:
    if isinstance(f, BoolVar):
        return {f.name}
    if isinstance(f, NotF):
        return _bool_vars(f.body)
    if isinstance(f, (AndF, OrF, ImpliesF)):
        return _bool_vars(f.lhs) | _bool_vars(f.rhs)
    if isinstance(f, ForallF):
        return _bool_vars(f.body) - {f.var}
    return set()


def is_valid(formula: Formula):
    """Decide validity. Proved is sound: it is returned only when the
    negation is unsatisfiable over the rationals (hence over the integers).
    """
    check_polarity(formula)
    skolems = {}
    negqf = _nnf_negated(formula, True, skolems)
    disjuncts = _dnf(negqf)

    sat_results = []  # (bool assignment, rational witness)
    for lits in disjuncts:
        bools = {}
        consistent = True
        alternatives = [[]]
        for lit in lits:
            if isinstance(lit, BoolVar) or (
                isinstance(lit, NotF) and isinstance(lit.body, BoolVar)
            ):
                name = lit.name if isinstance(lit, BoolVar) else lit.body.name
                want = isinstance(lit, BoolVar)
                if bools.get(name, want) != want:
                    consistent = False
                    break
                bools[name] = want
            else:
                options = _constraints_of_cmp(lit)
                if len(alternatives) * len(options) > MAX_DISJUNCTS:
                    raise CapacityError("DNF expansion exceeds the disjunct budget")
                alternatives = [a + o for a in alternatives for o in options]
        if not consistent:
            continue
        for constraints in alternatives:
            res = fm_eliminate(constraints)
            if isinstance(res, SatOverRationals):
                sat_results.append((dict(bools), res.witness))
                break  # one rational witness per disjunct is enough

    if not sat_results:
        return Proved()

    quantified = bool(skolems)
    int_names = sorted(v for v in _int_vars(negqf))
    bool_names = sorted(_bool_vars(negqf))
    for bools, witness in sat_results:
        candidate = _integer_candidate(
            negqf, formula, int_names, bool_names, bools, witness, quantified
        )
        if candidate is not None:
            return Counterexample(candidate)
    bools, witness = sat_results[0]
    full = {v: witness.get(v, Fraction(0)) for v in int_names}
    full.update({v: bools.get(v, False) for v in bool_names})
    return Unknown(full)


def _integer_candidate(negqf, original, int_names, bool_names, bools, witness, quantified):
    if len(int_names) > MAX_ROUNDING_VARS:
        return None
    per_var = []
    for v in int_names:
        w = witness.get(v, Fraction(0))
        lo = w.numerator // w.denominator  # floor
        hi = -((-w.numerator) // w.denominator)  # ceil
        per_var.append((lo,) if lo == hi else (lo, hi))
    for combo in itertools.product(*per_var):
        assignment = dict(zip(int_names, combo))
        assignment.update({v: bools.get(v, False) for v in bool_names})
        if eval_formula(negqf, assignment):
            # Counterexample honesty: the assignment must falsify the
            # original formula. Directly checkable when quantifier-free;
            # for quantified formulas the skolemized negation being true
            # is the witnessed refutation.
            if not quantified:
                restricted = {
                    v: assignment[v] for v in free_vars(original) if v in assignment
                }
                for v in free_vars(original) - set(restricted):
                    restricted[v] = 0
                if eval_formula(original, restricted):
                    continue
                return restricted
            return assignment
    return None


def brute_force(formula: Formula, bound: int) -> Optional[dict]:
    """Exhaustive falsification oracle: enumerate integer values in
    [-bound, bound] and both booleans for every free variable; return the
    first falsifying assignment or None. Quantifiers are evaluated by the
    same bounded enumeration. Test oracle only."""
    int_names = sorted(_int_vars(formula))
    bool_names = sorted(_bool_vars(formula))
    if len(int_names) + len(bool_names) > MAX_BRUTE_VARS:
        raise CapacityError(f"brute_force supports at most {MAX_BRUTE_VARS} variables")
    int_domain = range(-bound, bound + 1)
    domains = [int_domain] * len(int_names) + [(False, True)] * len(bool_names)
    names = int_names + bool_names
    for combo in itertools.product(*domains):
        assignment = dict(zip(names, combo))
        if not eval_formula(formula, assignment, forall_bound=bound):
            return assignment
    return None
