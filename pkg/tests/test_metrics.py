from fractions import Fraction

import pytest

from gasmet.metrics import (
    COUNT_FIELDS,
    ContractScope,
    classify_call,
    compute_metrics,
    is_default_value,
    per_contract_metrics,
    sum_vectors,
)
from gasmet.nodes import Call, Identifier, Literal, elementary, walk
from gasmet.parser import parse

from conftest import MINICORPUS

REFERENCE_CONTRACT = (
    "contract C { uint public a; bool b; event E(address indexed w, uint v); "
    "function f() public { for (uint i = 0; i < 10; i++) { a += 1; } } }"
)


def test_empty_file():
    m = compute_metrics(parse(""))
    assert all(getattr(m, f) == 0 for f in COUNT_FIELDS)
    assert (m.iff, m.ec, m.bv, m.ma) == (0, 0, 0, 0)
    assert m.parse_ok


def test_worked_example_counts():
    m = compute_metrics(parse(REFERENCE_CONTRACT))
    got = {f: getattr(m, f) for f in COUNT_FIELDS}
    assert got == dict(pm=2, gv=2, ip=1, ne=1, nlf=1, aci=2, az=1, rlv=0, nu=1, li=0)
    assert m.bv == Fraction(1, 3)
    assert (m.ma, m.iff, m.ec) == (0, 0, 0)


def test_library_example():
    m = compute_metrics(parse("library L { function id(uint x) internal pure returns (uint) { uint y = x; return y; } }"))
    assert (m.li, m.iff, m.rlv, m.gv) == (1, 1, 1, 0)


def test_iff_private_switch():
    src = "contract C { function a() internal {} function b() private {} function c() public {} }"
    assert compute_metrics(parse(src)).iff == Fraction(1, 3)
    assert compute_metrics(parse(src), iff_include_private=True).iff == Fraction(2, 3)


def test_constants_count_as_global_variables():
    m = compute_metrics(parse("contract C { uint constant K = 1; uint immutable T; uint s; }"))
    assert m.gv == 3 and m.gv_constant == 2


def test_nested_loops_and_post_expression():
    src = "contract C { function f() public { uint s; for (uint i; i < 3; i++) { while (s < 9) { s += 1; } } } }"
    m = compute_metrics(parse(src))
    assert m.nlf == 2
    assert m.aci == 2  # i++ and s += 1


def test_loop_init_and_condition_are_outside_the_loop():
    m = compute_metrics(parse("contract C { function f() public { uint i; for (i = 0; i < 3; ) { } } }"))
    assert m.aci == 0
    assert m.az == 1


def test_rlv_requires_local_binding():
    src = """contract C {
        uint s;
        function a() public returns (uint) { uint x = 1; return x; }
        function b(uint p) public returns (uint) { return p; }
        function c() public returns (uint) { return s; }
        function d() public returns (uint r) { r = 1; return r; }
        function e() public returns (uint) { uint x = 1; uint y = 2; if (x > y) { return x; } return y; }
    }"""
    assert compute_metrics(parse(src)).rlv == 2


@pytest.mark.parametrize(
    "text, kind, type_name, expected",
    [
        ("0", "number", "uint256", True),
        ("0x00", "number", "uint8", True),
        ("0e0", "number", "int", True),
        ("1", "number", "uint8", False),
        ("false", "bool", "bool", True),
        ("true", "bool", "bool", False),
        ('""', "string", "string", True),
        ('"a"', "string", "string", False),
        ('hex""', "hex", "bytes", True),
        ("0", "number", "bytes32", True),
        ("0", "number", "address", True),
    ],
)
def test_is_default_value_literals(text, kind, type_name, expected):
    lit = Literal(span=None, kind=kind, text=text)
    assert is_default_value(lit, elementary(type_name)) is expected


def test_is_default_value_casts_and_identifiers():
    unit = parse("contract C { address a = address(0); bytes4 b = bytes4(0); uint c = x; uint d = uint(0); }")
    vars_ = unit.contracts[0].state_vars
    assert [is_default_value(v.initializer, v.type_ref) for v in vars_] == [True, True, False, True]


def _calls(src):
    unit = parse(src)
    contract = unit.contracts[-1]
    scope = ContractScope.build(unit, contract)
    found = {}
    for fn in contract.functions:
        for node in walk(fn.body):
            if isinstance(node, Call):
                callee = node.callee
                label = callee.name if isinstance(callee, Identifier) else getattr(callee, "member", "?")
                found[label] = classify_call(node, scope)
    return found


def test_classify_call_examples():
    found = _calls(
        """
        contract Vault { function withdraw(uint x) external {} }
        contract C {
            Vault other;
            function helper(uint x) internal {}
            function f(uint x) public {
                other.withdraw(x);
                helper(x);
                require(x > 0);
                this.helper2();
                payable(msg.sender).transfer(x);
                abi.encode(x);
                keccak256("");
                uint(x);
            }
            function helper2() external {}
        }
        """
    )
    assert found["withdraw"] == "external"
    assert found["helper"] == "internal"
    assert found["require"] == "builtin"
    assert found["helper2"] == "external"
    assert found["transfer"] == "external"
    assert found["encode"] == "builtin"
    assert found["keccak256"] == "builtin"
    assert found["uint"] == "builtin"


def test_builtin_calls_leave_ec_denominator():
    m = compute_metrics(parse("contract C { function f(uint a) public { require(a > 0); assert(a < 9); } }"))
    assert m.total_calls == 0 and m.ec == 0


def test_inherited_functions_are_internal_calls():
    found = _calls("contract B { function h() internal {} } contract C is B { function f() public { h(); super.h(); } }")
    assert found == {"h": "internal"}


def test_two_contracts_hand_counts():
    unit = parse((MINICORPUS / "two_contracts.sol").read_text())
    vectors = dict(per_contract_metrics(unit))
    first, second = vectors["First"], vectors["Second"]
    assert (first.pm, first.gv, first.ip, first.ne, first.nu, first.sloc) == (1, 1, 1, 1, 1, 8)
    assert (first.bv, first.total_calls, first.ec) == (1, 1, 0)
    assert (second.pm, second.gv, second.ma, second.iff, second.sloc) == (1, 1, 1, 0, 9)
    total = compute_metrics(unit)
    assert total.bv == Fraction(1, 2) and total.ma == Fraction(1, 2)
    for f in COUNT_FIELDS:
        assert getattr(total, f) == getattr(first, f) + getattr(second, f)


def test_additivity_of_two_files():
    a = compute_metrics(parse("contract A { uint x; }"))
    b = compute_metrics(parse("contract B { uint y; }"))
    assert sum_vectors([a, b]).gv == 2


def test_to_dict_rounds_ratios():
    d = compute_metrics(parse(REFERENCE_CONTRACT)).to_dict()
    assert d["bv"] == 0.333333 and d["gv"] == 2


def test_failed_parse_still_yields_metrics():
    m = compute_metrics(parse("pragma solidity ^0.8.0; contract C { uint a; uint = 5; uint b; }"))
    assert not m.parse_ok and m.gv == 2
