import pytest

from gasmet.metrics import compute_metrics
from gasmet.parser import parse
from gasmet.rules import RuleConfig, parse_rules
from gasmet.smells import (
    call_chain_depths,
    detect,
    detect_cs1,
    detect_cs17,
    detect_cs19,
    detect_cs2,
    detect_cs4,
    detect_cs5,
    detect_cs9,
    detect_threshold_generic,
)
from gasmet.metrics import contract_facts


def ids(findings):
    return [f.smell_id for f in findings]


CS1_FIXTURE = """pragma solidity ^0.8.0;
contract C {
    uint total;
    function f(uint n) public {
        for (uint i = 0; i < n; i++) { total += 1; }
    }
}"""


def test_cs1_located_at_compound_assignment():
    (finding,) = detect_cs1(parse(CS1_FIXTURE, "c.sol"))
    assert (finding.span.start_line, finding.span.start_col) == (5, 40)
    assert finding.severity == "warning"


def test_cs1_local_accumulator_is_clean():
    src = "contract C { uint total; function f(uint n) public { uint total = 0; for (uint i; i < n; i++) { total += 1; } } }"
    assert detect_cs1(parse(src)) == []


def test_cs1_nested_loops():
    src = """contract C { uint t; function f() public {
        for (uint i; i < 2; i++) { t++; for (uint j; j < 2; j++) { t++; } } } }"""
    assert len(detect_cs1(parse(src))) == 2


def test_cs1_writes_through_index_and_member():
    src = "contract C { uint[] a; mapping(uint => uint) m; function f() public { while (true) { a[0] = 1; m[1] += 2; } } }"
    assert len(detect_cs1(parse(src))) == 2


def _contract_with_public(n):
    fns = " ".join(f"function f{i}() public {{}}" for i in range(n))
    return parse(f"contract C {{ {fns} }}")


def test_cs2_threshold():
    unit = _contract_with_public(11)
    assert ids(detect_cs2(unit, compute_metrics(unit), RuleConfig())) == ["CS2"]
    unit = _contract_with_public(2)
    assert detect_cs2(unit, compute_metrics(unit), RuleConfig()) == []
    cfg = parse_rules("threshold.CS2 = 1")
    assert len(detect_cs2(unit, compute_metrics(unit), cfg)) == 1


@pytest.mark.parametrize(
    "stmt, expected",
    [("uint i = 0;", 1), ("uint i;", 0), ("bool done = false;", 1), ('string memory s = "";', 1), ("uint i = 1;", 0)],
)
def test_cs4(stmt, expected):
    unit = parse(f"contract C {{ function f() public {{ {stmt} }} }}")
    assert len(detect_cs4(unit)) == expected


def test_cs5_directive_and_call_sites():
    src = """library L { function inc(uint x) internal pure returns (uint) { return x + 1; } }
    contract C { using L for uint; function f(uint a) public pure returns (uint) { return L.inc(a) + a.inc(); } }"""
    found = detect_cs5(parse(src))
    assert len(found) == 3 and {f.severity for f in found} == {"info"}


def test_cs5_without_libraries():
    assert detect_cs5(parse("contract C { function f() public {} }")) == []


def test_cs9_cases():
    src = """contract C {
        function a() public returns (uint) { uint r = 1; return r; }
        function b() public returns (uint y) { y = 2; }
        function c() public returns (uint) { return 3; }
    }"""
    found = detect_cs9(parse(src))
    assert len(found) == 1 and found[0].span.start_line == 2


@pytest.mark.parametrize(
    "decls, expected",
    [("uint8 a; uint256 x; uint8 b;", 1), ("uint8 a; uint8 b; uint256 x;", 0), ("uint8 a;", 0), ("bool a; address b; uint x;", 0)],
)
def test_cs17_slot_simulation(decls, expected):
    assert len(detect_cs17(parse(f"contract C {{ {decls} }}"))) == expected


def test_cs17_ignores_constants():
    # constants take no slot, so nothing separates a and b
    assert detect_cs17(parse("contract C { uint8 a; uint256 constant X = 1; uint8 b; }")) == []


CHAIN = """contract C {
    function f() public { g(); }
    function g() internal { h(); }
    function h() internal { k(); }
    function k() internal {}
    function r() public { r(); }
}"""


def test_cs19_chain_depth():
    unit = parse(CHAIN)
    found = detect_cs19(unit, compute_metrics(unit), RuleConfig())
    assert ids(found) == ["CS19"]
    depths, cycles = call_chain_depths(contract_facts(unit, unit.contracts[0]))
    assert depths["f"] == 4 and depths["k"] == 1
    assert cycles == [("r",)]


def test_cs19_recursion_alone_does_not_fire():
    unit = parse("contract C { function f() public { f(); } }")
    assert detect_cs19(unit, compute_metrics(unit), RuleConfig()) == []


def test_generic_threshold_rule_is_strict():
    unit = parse("contract C { function f() public { for (;;) {} while (true) {} } }")
    metrics = compute_metrics(unit)
    cfg = parse_rules("metric.CS3 = nlf\nthreshold.CS3 = 1")
    (finding,) = detect_threshold_generic("CS3", "nlf", unit, metrics, cfg)
    assert dict(finding.evidence) == {"metric": "nlf", "value": 2, "threshold": 1.0}
    cfg = parse_rules("metric.CS3 = nlf\nthreshold.CS3 = 2")
    assert detect_threshold_generic("CS3", "nlf", unit, metrics, cfg) == []


def test_detect_respects_enabled_set():
    unit = parse(CS1_FIXTURE)
    assert ids(detect(unit)) == ["CS1", "CS4"]
    assert detect(unit, cfg=parse_rules("enabled =")) == []
    assert ids(detect(unit, cfg=parse_rules("enabled = CS4"))) == ["CS4"]


def test_findings_sorted_by_line_then_smell():
    unit = parse(CS1_FIXTURE)
    found = detect(unit)
    assert found == sorted(found, key=lambda f: f.sort_key())


def test_locality_removing_a_finding_line_removes_it():
    src = CS1_FIXTURE.splitlines()
    for finding in detect(parse(CS1_FIXTURE)):
        line = finding.span.start_line
        pruned = "\n".join(l if i + 1 != line else "" for i, l in enumerate(src))
        remaining = [(f.smell_id, f.span.start_line) for f in detect(parse(pruned))]
        assert (finding.smell_id, line) not in remaining
