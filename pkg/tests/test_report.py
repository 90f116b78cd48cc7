import json

import jsonschema
import pytest

from gasmet import __version__
from gasmet.report import EMITTERS, Report, analyze_paths, analyze_source, definition_hash, emit_json, emit_sarif, emit_text

from conftest import DATA

SCHEMA = json.loads((DATA / "sarif-2.1.0-subset.schema.json").read_text())

LOOP = """pragma solidity ^0.8.0;
contract C {
    uint256 total;
    function f() public {
        for (uint256 i; i < 3; i++) { total += i; }
    }
}
"""


@pytest.fixture
def in_data(monkeypatch):
    monkeypatch.chdir(DATA)


def _sarif(report):
    doc = json.loads(emit_sarif(report))
    jsonschema.validate(doc, SCHEMA)
    return doc


def test_sarif_loop_finding_is_valid():
    doc = _sarif(Report([analyze_source(LOOP, "loop.sol")]))
    results = doc["runs"][0]["results"]
    assert [r["ruleId"] for r in results] == ["CS1"]
    region = results[0]["locations"][0]["physicalLocation"]["region"]
    assert region["startLine"] == 5
    assert region["endColumn"] > region["startColumn"]


def test_sarif_lists_every_rule_once():
    rules = _sarif(Report())["runs"][0]["tool"]["driver"]["rules"]
    assert [r["id"] for r in rules] == [f"CS{i}" for i in range(1, 20)]


def test_two_findings_give_two_results():
    src = "contract C { uint a = 0; bool b = false; }"
    report = Report([analyze_source(src, "c.sol")])
    assert len(report.findings) == 2
    assert len(_sarif(report)["runs"][0]["results"]) == 2


@pytest.mark.parametrize("fmt", sorted(EMITTERS))
def test_empty_report_renders(fmt):
    out = EMITTERS[fmt](Report())
    assert out.endswith(b"\n")
    if fmt != "text":
        json.loads(out)
    else:
        assert out == b"0 file(s), 0 finding(s)\n"


def test_json_shape():
    doc = json.loads(emit_json(Report([analyze_source(LOOP, "loop.sol")])))
    assert doc["schema_version"] == 1
    assert doc["tool"] == {"name": "gasmet", "version": __version__, "definitions": definition_hash()}
    assert doc["totals"]["by_smell"] == {"CS1": 1}
    (f,) = doc["files"]
    assert f["parse_ok"] is True and f["metrics"]["ma"] == 0


@pytest.mark.parametrize("fmt, suffix", [("json", "json"), ("sarif", "sarif"), ("text", "txt")])
def test_minicorpus_matches_golden(in_data, fmt, suffix):
    out = EMITTERS[fmt](analyze_paths(["minicorpus"]))
    assert out == (DATA / "golden" / f"minicorpus_analyze.{suffix}").read_bytes()


def test_output_is_byte_stable(in_data):
    first = [e(analyze_paths(["minicorpus"])) for e in EMITTERS.values()]
    second = [e(analyze_paths(["minicorpus"])) for e in EMITTERS.values()]
    assert first == second


def test_minicorpus_totals(in_data):
    t = analyze_paths(["minicorpus"]).totals()
    assert t["files"] == 18 and t["parse_failures"] == 1 and t["findings"] == 31
    assert t["by_smell"] == {"CS1": 5, "CS2": 1, "CS4": 14, "CS5": 3, "CS9": 4, "CS17": 3, "CS19": 1}
    assert t["by_severity"] == {"info": 7, "warning": 24}


def test_text_lines_have_locations():
    text = emit_text(Report([analyze_source(LOOP, "loop.sol")])).decode()
    assert text.splitlines()[0].startswith("loop.sol:5:")
    assert "[CS1]" in text


def test_unreadable_path_is_a_parse_failure(tmp_path):
    report = analyze_paths([tmp_path / "gone.sol"])
    (fr,) = report.files
    assert not fr.parse_ok and "cannot read file" in fr.diagnostics[0].message
