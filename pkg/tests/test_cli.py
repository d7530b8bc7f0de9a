"""CLI tests: exit-code contract, JSON report schema, DOT output, and the
matrix harness (including its self-test against a wrong manifest)."""

from __future__ import annotations

import json

import jsonschema
import pytest
from click.testing import CliRunner

from miniver import corpus_dir
from miniver.cli import main
from miniver.formula import parse_formula

REPORT_SCHEMA = {
    "type": "object",
    "required": ["file", "mode", "callables", "summary"],
    "properties": {
        "file": {"type": "string"},
        "mode": {"enum": ["partial", "self-check", "callgraph", "sound"]},
        "callables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "verdict", "reasons"],
                "properties": {
                    "name": {"type": "string"},
                    "verdict": {"enum": ["verified", "rejected"]},
                    "reasons": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["kind", "detail", "line", "col"],
                            "properties": {
                                "kind": {
                                    "enum": [
                                        "vc_failed", "vc_unknown",
                                        "self_contract_use", "contract_cycle",
                                        "recursive_field_initializer",
                                        "missing_decreases", "lambda_in_cycle",
                                        "type_error",
                                    ]
                                },
                                "detail": {"type": "string"},
                                "line": {"type": "integer"},
                                "col": {"type": "integer"},
                            },
                        },
                    },
                },
            },
        },
        "summary": {
            "type": "object",
            "required": ["verified", "rejected"],
            "properties": {
                "verified": {"type": "integer"},
                "rejected": {"type": "integer"},
            },
        },
    },
}


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def corpus(name: str) -> str:
    return str(corpus_dir() / name)


def test_verify_exit_codes():
    assert invoke("verify", corpus("gobra_exploit.moo"), "--mode", "partial").exit_code == 0
    assert invoke("verify", corpus("gobra_exploit.moo"), "--mode", "sound").exit_code == 1
    assert invoke("verify", "/nonexistent.moo").exit_code == 2


def test_verify_defaults_to_sound_mode():
    result = invoke("verify", corpus("gobra_exploit.moo"))
    assert result.exit_code == 1
    assert "missing_decreases" in result.output


def test_verify_rejects_type_errors_with_exit_2():
    runner = CliRunner()
    with runner.isolated_filesystem():
        with open("bad.moo", "w") as fh:
            fh.write("func f(x: int) -> int { return x * x; }\n")
        result = runner.invoke(main, ["verify", "bad.moo"])
        assert result.exit_code == 2
        assert "nonlinear" in result.output


@pytest.mark.parametrize("name,mode", [
    ("gobra_exploit.moo", "partial"),
    ("omega_exploit.moo", "sound"),
    ("straightline.moo", "callgraph"),
    ("fact.moo", "self-check"),
])
def test_json_reports_validate_against_schema(name, mode):
    result = invoke("verify", corpus(name), "--mode", mode, "--format", "json")
    report = json.loads(result.output)
    jsonschema.validate(report, REPORT_SCHEMA)
    for entry in report["callables"]:
        assert (entry["verdict"] == "verified") == (entry["reasons"] == [])
    assert report["summary"]["verified"] + report["summary"]["rejected"] == len(
        report["callables"]
    )


def test_text_and_json_verdicts_agree():
    for mode in ("partial", "sound"):
        text = invoke("verify", corpus("bad_client.moo"), "--mode", mode)
        data = json.loads(
            invoke("verify", corpus("bad_client.moo"), "--mode", mode,
                   "--format", "json").output
        )
        for entry in data["callables"]:
            assert f"{entry['name']}: {entry['verdict']}" in text.output


def test_dump_vcs_lines_round_trip():
    result = invoke("verify", corpus("gobra_exploit.moo"), "--mode", "partial",
                    "--dump-vcs")
    vc_lines = [l for l in result.output.splitlines() if ": (" in l]
    assert len(vc_lines) == 2
    for line in vc_lines:
        head, formula_text = line.split(": ", 1)
        assert "postcondition" in head
        parse_formula(formula_text)  # parses back


def test_run_exit_codes():
    assert invoke("run", corpus("bad_client.moo"), "--entry", "bad",
                  "--check-contracts").exit_code == 1
    assert invoke("run", corpus("gobra_exploit.moo"), "--entry", "test",
                  "--fuel", "10000").exit_code == 0
    assert invoke("run", corpus("gobra_exploit.moo"), "--entry", "recurse",
                  "--fuel", "1000", "--no-erase").exit_code == 3
    assert invoke("run", corpus("fact.moo"), "--entry", "missing").exit_code == 2


def test_run_reports_violated_clause_and_value():
    result = invoke("run", corpus("bad_client.moo"), "--entry", "bad",
                    "--check-contracts")
    assert "ensures result == 0 violated" in result.output
    assert "returned 1" in result.output


def test_run_with_arguments():
    result = invoke("run", corpus("fact.moo"), "--entry", "fact", "--arg", "5")
    assert result.exit_code == 0
    assert "returned 32" in result.output


def test_graph_text_lists_scc():
    result = invoke("graph", corpus("key_exploit.moo"))
    assert result.exit_code == 0
    assert "recurse1#0, recurse2#1" in result.output
    assert "(nontrivial)" in result.output


def test_graph_first_order_misses_lambda_cycle():
    first = invoke("graph", corpus("omega_exploit.moo")).output
    assert "lambda#0#2 -> lambda#0#2" not in first
    over = invoke("graph", corpus("omega_exploit.moo"), "--overapprox").output
    assert "lambda#0#2 -> lambda#0#2 [higher_order]" in over


def test_graph_dot_styles():
    dot = invoke("graph", corpus("omega_direct.moo"), "--overapprox", "--dot").output
    assert dot.startswith("digraph")
    assert "style=dashed" in dot  # higher-order edge
    assert "style=dotted" in dot  # initializer self-reference
    assert "style=solid" in dot


def test_matrix_bundled_corpus_matches():
    result = invoke("matrix", str(corpus_dir()))
    assert result.exit_code == 0, result.output
    assert "28 cells, 0 mismatches" in result.output


def test_matrix_detects_wrong_cell():
    runner = CliRunner()
    entries = json.loads((corpus_dir() / "expected.json").read_text())
    entries[0]["expected"] = (
        "rejected" if entries[0]["expected"] == "verified" else "verified"
    )
    with runner.isolated_filesystem():
        with open("wrong.json", "w") as fh:
            json.dump(entries, fh)
        result = runner.invoke(
            main, ["matrix", str(corpus_dir()), "--manifest", "wrong.json"]
        )
        assert result.exit_code == 1
        assert "MISMATCH" in result.output


def test_matrix_empty_manifest():
    runner = CliRunner()
    with runner.isolated_filesystem():
        with open("empty.json", "w") as fh:
            fh.write("[]")
        result = runner.invoke(
            main, ["matrix", str(corpus_dir()), "--manifest", "empty.json"]
        )
        assert result.exit_code == 0
        assert "0 cells, 0 mismatches" in result.output


def test_matrix_bad_manifest_is_input_error():
    runner = CliRunner()
    with runner.isolated_filesystem():
        with open("broken.json", "w") as fh:
            fh.write("{not json")
        result = runner.invoke(
            main, ["matrix", str(corpus_dir()), "--manifest", "broken.json"]
        )
        assert result.exit_code == 2


def test_matrix_json_format():
    data = json.loads(invoke("matrix", str(corpus_dir()), "--format", "json").output)
    assert data["mismatches"] == 0
    assert len(data["cells"]) == 28
