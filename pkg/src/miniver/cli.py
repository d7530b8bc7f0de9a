"""Command-line surface: verify / run / graph / matrix.

Exit codes: 0 success (all verified / returned / all cells match),
1 rejection, contract violation, or matrix mismatch, 2 input error
(parse, type, I/O, manifest), 3 fuel exhausted (run only).
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import __version__
from .callgraph import (
    DIRECT, FIRST_ORDER, HIGHER_ORDER, Mode, OVERAPPROX, build_call_graph,
    check_termination, sccs,
)
from .errors import MiniverError, ParseError
from .parser import parse
from .printer import print_expr
from .runtime import (
    BoolV, ContractViolation, Fuel, FuelExhausted, IntV, Returned,
    RuntimeFailure, erase, eval_program, render_value,
)
from .solver import Counterexample, Proved, is_valid
from .typecheck import TypeCheckError, typecheck
from .vcgen import vcs_for_program
from .formula import dump


# ------------------------------------------------------------------ pipeline

@dataclass
class Report:
    file: str
    mode: str
    callables: list  # [{"name", "verdict", "reasons": [...]}]
    summary: dict = field(default_factory=dict)

    @property
    def all_verified(self) -> bool:
        return self.summary.get("rejected", 0) == 0

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "mode": self.mode,
            "callables": self.callables,
            "summary": self.summary,
        }


class InputError(Exception):
    """Anything that should exit with code 2."""


def _load(path: str):
    try:
        source = Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    try:
        return typecheck(parse(source, file=str(path)))
    except (ParseError, TypeCheckError) as exc:
        raise InputError(str(exc)) from exc


def verify_file(path: str, mode: Mode) -> Report:
    """Full verification pipeline for one file; raises InputError on
    frontend failure."""
    tp = _load(path)
    reasons = {c.id: [] for c in tp.callables}
    for d in check_termination(tp, mode):
        cycle = " -> ".join(tp.callables[m].label for m in d.cycle + d.cycle[:1])
        reasons[d.callable].append({
            "kind": d.kind,
            "detail": f"cycle {cycle}" if d.cycle else "",
            "line": d.site.line,
            "col": d.site.col,
        })
    for vc in vcs_for_program(tp, mode):
        verdict = is_valid(vc.formula)
        if isinstance(verdict, Proved):
            continue
        if isinstance(verdict, Counterexample):
            assign = ", ".join(
                f"{k} = {v}" for k, v in sorted(verdict.assignment.items())
            )
            kind, detail = "vc_failed", f"{vc.kind} falsified by {{{assign}}}"
        else:
            kind, detail = "vc_unknown", f"{vc.kind} not decided"
        reasons[vc.owner].append({
            "kind": kind,
            "detail": detail,
            "line": vc.origin.line,
            "col": vc.origin.col,
        })
    callables = [
        {
            "name": c.name,
            "verdict": "verified" if not reasons[c.id] else "rejected",
            "reasons": reasons[c.id],
        }
        for c in tp.callables
    ]
    verified = sum(1 for c in callables if c["verdict"] == "verified")
    return Report(
        file=str(path),
        mode=mode.value,
        callables=callables,
        summary={"verified": verified, "rejected": len(callables) - verified},
    )


def _render_report_text(report: Report) -> str:
    lines = [f"{report.file} [{report.mode}]"]
    for c in report.callables:
        lines.append(f"  {c['name']}: {c['verdict']}")
        for r in c["reasons"]:
            where = f" (line {r['line']}, col {r['col']})" if r["line"] else ""
            detail = f": {r['detail']}" if r["detail"] else ""
            lines.append(f"    - {r['kind']}{detail}{where}")
    s = report.summary
    lines.append(f"  summary: {s['verified']} verified, {s['rejected']} rejected")
    return "\n".join(lines)


# ----------------------------------------------------------------- commands

@click.group()
@click.version_option(__version__)
def main() -> None:
    """MiniOO contract verifier and interpreter."""


_MODES = [m.value for m in Mode]


@main.command()
@click.argument("path", type=click.Path())
@click.option("--mode", type=click.Choice(_MODES), default=Mode.SOUND.value,
              show_default=True, help="Termination policy.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@click.option("--dump-vcs", is_flag=True,
              help="Print every verification condition before the verdicts.")
def verify(path: str, mode: str, fmt: str, dump_vcs: bool) -> None:
    """Verify PATH under the chosen termination policy."""
    try:
        if dump_vcs:
            tp = _load(path)
            for vc in vcs_for_program(tp, Mode(mode)):
                owner = tp.callables[vc.owner]
                origin = f"{vc.origin.line}:{vc.origin.col}"
                click.echo(f"{owner.label} {vc.kind} {origin}: {dump(vc.formula)}")
        report = verify_file(path, Mode(mode))
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if fmt == "json":
        click.echo(json.dumps(report.to_json(), indent=2))
    else:
        click.echo(_render_report_text(report))
    sys.exit(0 if report.all_verified else 1)


def _parse_value(text: str):
    if text == "true":
        return BoolV(True)
    if text == "false":
        return BoolV(False)
    try:
        return IntV(int(text))
    except ValueError:
        raise InputError(f"argument {text!r} is neither an integer nor a boolean")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--entry", required=True, help="Top-level function to run.")
@click.option("--arg", "args", multiple=True,
              help="Argument (integer or true/false); repeatable.")
@click.option("--fuel", type=click.IntRange(min=1), default=10**6,
              show_default=True, help="Budget of call-frame entries.")
@click.option("--no-erase", is_flag=True,
              help="Execute ghost code instead of erasing it.")
@click.option("--check-contracts", is_flag=True,
              help="Check the entry function's requires/ensures dynamically.")
def run(path: str, entry: str, args, fuel: int, no_erase: bool,
        check_contracts: bool) -> None:
    """Run an entry function of PATH (ghost-erased by default)."""
    try:
        tp = _load(path)
        if not no_erase:
            tp = erase(tp)
        values = [_parse_value(a) for a in args]
    except (InputError, MiniverError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    budget = Fuel(fuel)
    outcome = eval_program(tp, entry, values, budget,
                           check_contracts=check_contracts)
    if isinstance(outcome, Returned):
        click.echo(f"returned {render_value(outcome.value)} "
                   f"({budget.consumed} frames)")
        sys.exit(0)
    if isinstance(outcome, ContractViolation):
        decl = tp.functions[entry]
        clauses = decl.requires if outcome.clause_kind == "requires" else decl.ensures
        clause = print_expr(clauses[outcome.clause_index])
        msg = f"{outcome.callable}: {outcome.clause_kind} {clause} violated"
        if outcome.returned is not None:
            msg += f"; returned {render_value(outcome.returned)}"
        click.echo(msg)
        sys.exit(1)
    if isinstance(outcome, FuelExhausted):
        click.echo(f"fuel exhausted after {outcome.consumed} frames")
        sys.exit(3)
    click.echo(f"error: {outcome.kind}", err=True)
    sys.exit(2)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--overapprox", is_flag=True,
              help="Include higher-order and initializer edges.")
@click.option("--dot", is_flag=True, help="Emit Graphviz DOT.")
def graph(path: str, overapprox: bool, dot: bool) -> None:
    """Print the call graph (and its SCCs) of PATH."""
    try:
        tp = _load(path)
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    g = build_call_graph(tp, OVERAPPROX if overapprox else FIRST_ORDER)
    label = {c.id: c.label for c in tp.callables}
    if dot:
        style = {DIRECT: "solid", HIGHER_ORDER: "dashed"}
        lines = ["digraph callgraph {"]
        for n in g.nodes:
            lines.append(f'  n{n} [label="{label[n]}"];')
        for e in g.edges:
            lines.append(
                f'  n{e.src} -> n{e.dst} [style={style.get(e.kind, "dotted")}];'
            )
        lines.append("}")
        click.echo("\n".join(lines))
        sys.exit(0)
    click.echo("nodes:")
    for n in g.nodes:
        click.echo(f"  {label[n]}")
    click.echo("edges:")
    for e in g.edges:
        click.echo(f"  {label[e.src]} -> {label[e.dst]} [{e.kind}]")
    click.echo("sccs:")
    for component in sccs(g):
        kind = "nontrivial" if component.is_nontrivial else "trivial"
        members = ", ".join(label[m] for m in component.members)
        click.echo(f"  {{{members}}} ({kind})")
    sys.exit(0)


@main.command()
@click.argument("corpus", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path(), default=None,
              help="Expected-verdict manifest (default: CORPUS/expected.json).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
def matrix(corpus: str, manifest_path, fmt: str) -> None:
    """Replay the expected-verdict matrix over a corpus directory."""
    corpus_path = Path(corpus)
    manifest_file = Path(manifest_path) if manifest_path else corpus_path / "expected.json"
    try:
        entries = json.loads(manifest_file.read_text())
        if not isinstance(entries, list):
            raise InputError("manifest must be a JSON list")
        results = []
        for entry in entries:
            file, mode = entry["file"], Mode(entry["mode"])
            report = verify_file(str(corpus_path / file), mode)
            actual = "verified" if report.all_verified else "rejected"
            ok = actual == entry["expected"]
            if ok and "reason_kind" in entry:
                kinds = {
                    r["kind"] for c in report.callables for r in c["reasons"]
                }
                ok = entry["reason_kind"] in kinds
            results.append({
                "file": file,
                "mode": mode.value,
                "expected": entry["expected"],
                "actual": actual,
                "match": ok,
            })
    except (InputError, OSError, KeyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    mismatches = [r for r in results if not r["match"]]
    if fmt == "json":
        click.echo(json.dumps({"cells": results,
                               "mismatches": len(mismatches)}, indent=2))
    else:
        for r in results:
            status = "ok" if r["match"] else "MISMATCH"
            click.echo(f"{r['file']:>20} {r['mode']:>10} "
                       f"expected={r['expected']:<8} actual={r['actual']:<8} {status}")
        click.echo(f"{len(results)} cells, {len(mismatches)} mismatches")
    sys.exit(0 if not mismatches else 1)


if __name__ == "__main__":
    main()
