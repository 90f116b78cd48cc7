import json

import pytest

from gasmet.cli import main

CLEAN = "pragma solidity ^0.8.0;\ncontract C {\n    uint256 x;\n    function f() external { x = 1; }\n}\n"
INFO_ONLY = (
    "pragma solidity ^0.8.0;\ncontract C {\n    uint8 a;\n    uint256 x;\n    uint8 b;\n"
    "    function f() external { a = 1; x = 1; b = 1; }\n}\n"
)
WARNING = "pragma solidity ^0.8.0;\ncontract C {\n    uint256 x = 0;\n    function f() external { x = 1; }\n}\n"
BROKEN = "contract C { function f() public { } uint = ; }\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


@pytest.mark.parametrize(
    "source, fail_on, code",
    [
        (CLEAN, "warning", 0),
        (CLEAN, "info", 0),
        (INFO_ONLY, "warning", 0),
        (INFO_ONLY, "info", 1),
        (INFO_ONLY, "none", 0),
        (WARNING, "warning", 1),
        (WARNING, "info", 1),
        (WARNING, "none", 0),
    ],
)
def test_fail_on_truth_table(write, capsys, source, fail_on, code):
    assert main(["analyze", write("c.sol", source), "--fail-on", fail_on]) == code


def test_strict_parse(write, capsys):
    path = write("b.sol", BROKEN)
    assert main(["analyze", path, "--fail-on", "none"]) == 0
    assert main(["analyze", path, "--fail-on", "none", "--strict-parse"]) == 3


def test_missing_path_is_usage_error(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "missing.sol")]) == 2


def test_unknown_format_is_usage_error(write, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", write("c.sol", CLEAN), "--format", "xml"])
    assert exc.value.code == 2


def test_bad_rules_file_is_usage_error(write, capsys):
    rules = write("rules.txt", "no_such_key = 1\n")
    assert main(["analyze", write("c.sol", CLEAN), "--rules", rules]) == 2


def test_output_file(write, tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["analyze", write("c.sol", WARNING), "--format", "json", "-o", str(out), "--fail-on", "none"])
    assert json.loads(out.read_text())["totals"]["findings"] == 1
    assert capsys.readouterr().out == ""


def _stats_inputs(tmp_path, n=6):
    src = tmp_path / "src"
    src.mkdir()
    gas = ["id,gas_used"]
    for i in range(n):
        body = "".join(f"    uint256 v{j};\n" for j in range(i))
        body += "".join(f"    function g{k}() {'public' if k % 2 else 'external'} {{}}\n" for k in range(1 + i % 3))
        (src / f"c{i}.sol").write_text(f"pragma solidity ^0.8.0;\ncontract C{i} {{\n{body}}}\n")
        gas.append(f"c{i},{50000 + 1000 * i}")
    (tmp_path / "gas.csv").write_text("\n".join(gas) + "\n")
    assert main(["corpus", str(src), "--out", str(tmp_path / "m.csv")]) == 0
    return str(tmp_path / "m.csv"), str(tmp_path / "gas.csv")


def test_stats_end_to_end(tmp_path, capsys):
    metrics, gas = _stats_inputs(tmp_path)
    capsys.readouterr()
    out = tmp_path / "s.json"
    assert main(["stats", "--metrics", metrics, "--gas", gas, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    summary = capsys.readouterr().out
    assert "GV rho=1.000" in summary
    assert "LI excluded: constant column (every value is 0), correlation undefined" in summary
    assert "li" in doc["excluded_constant_columns"]
    assert doc["matrix"]["gv"]["gas_cost"]["rho"] == 1.0


def test_stats_alpha_one_marks_every_cell_significant(tmp_path, capsys):
    metrics, gas = _stats_inputs(tmp_path)
    out = tmp_path / "s.json"
    assert main(["stats", "--metrics", metrics, "--gas", gas, "--alpha", "1.0", "--out", str(out)]) == 0
    matrix = json.loads(out.read_text())["matrix"]
    cells = [c for row in matrix.values() for c in row.values() if c["rho"] is not None]
    assert len(cells) > 3 and all(c["significant"] for c in cells)


def test_stats_join_failure_exits_one(tmp_path, capsys):
    metrics, _ = _stats_inputs(tmp_path)
    gas = tmp_path / "other.csv"
    gas.write_text("id,gas_used\nzzz,1\n")
    assert main(["stats", "--metrics", metrics, "--gas", str(gas)]) == 1
    assert "join produced no rows" in capsys.readouterr().err


def test_stats_bad_gas_file_exits_one(tmp_path, capsys):
    metrics, _ = _stats_inputs(tmp_path)
    gas = tmp_path / "bad.csv"
    gas.write_text("id,gas_used\nc1,-1\n")
    assert main(["stats", "--metrics", metrics, "--gas", str(gas)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_stats_bad_alpha(tmp_path, capsys):
    metrics, gas = _stats_inputs(tmp_path)
    assert main(["stats", "--metrics", metrics, "--gas", gas, "--alpha", "0"]) == 2


def test_corpus_jobs_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GASMET_JOBS", "2")
    src = tmp_path / "s"
    src.mkdir()
    for i in range(3):
        (src / f"a{i}.sol").write_text("contract A {}\n")
    assert main(["corpus", str(src)]) == 0
    assert capsys.readouterr().out.count("\n") == 4
