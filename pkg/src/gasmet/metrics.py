"""The GasMet metric suite.

One pass over each contract (:func:`contract_facts`) collects the located
facts every metric is counted from: loops, assignment sites, default-value
initialisations, calls and their classes, variable declarations. The smell
detectors read the same facts, so a CS4 finding exists exactly when AZ
counts a site and a CS9 finding exactly when RLV counts a function.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .lexer import is_elementary_type_name
from .nodes import (
    Assignment,
    Block,
    Call,
    CatchClause,
    ContractDef,
    Expr,
    FunctionDef,
    Identifier,
    IndexAccess,
    Literal,
    LocalVar,
    Loop,
    MemberAccess,
    NewExpr,
    Node,
    Return,
    RevertStmt,
    SourceUnit,
    StateVarDecl,
    TupleExpr,
    TypeRef,
    Unary,
    VarDeclStmt,
    is_assignment_like,
    iter_children,
)

__all__ = [
    "COUNT_FIELDS",
    "METRIC_NAMES",
    "RATIO_FIELDS",
    "ContractScope",
    "MetricVector",
    "classify_call",
    "compute_metrics",
    "contract_facts",
    "is_default_value",
    "per_contract_metrics",
]

COUNT_FIELDS = ("pm", "gv", "ip", "ne", "nlf", "aci", "az", "rlv", "nu", "li")
RATIO_FIELDS = ("iff", "ec", "bv", "ma")
DENOMINATORS = ("total_functions", "total_calls", "total_var_decls", "total_state_vars")
METRIC_NAMES = COUNT_FIELDS + RATIO_FIELDS

BUILTIN_FUNCTIONS = frozenset(
    "require assert revert keccak256 sha3 sha256 ripemd160 ecrecover addmod mulmod "
    "blockhash gasleft selfdestruct suicide type".split()
)
BUILTIN_NAMESPACES = frozenset({"abi", "bytes", "string", "block", "msg", "tx"})
LOW_LEVEL_MEMBERS = frozenset({"call", "delegatecall", "staticcall", "send", "transfer", "callcode"})
ARRAY_MEMBERS = frozenset({"push", "pop"})
VALUE_MEMBERS = frozenset({"value", "gas"})


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


@dataclass
class MetricVector:
    """GasMet metrics for one contract or one file.

    Ratios are derived from integer numerators and denominators, so they
    are exact and additivity holds on the underlying counts.
    """

    pm: int = 0
    gv: int = 0
    ip: int = 0
    ne: int = 0
    nlf: int = 0
    aci: int = 0
    az: int = 0
    rlv: int = 0
    nu: int = 0
    li: int = 0
    sloc: int = 0
    total_functions: int = 0
    total_calls: int = 0
    total_var_decls: int = 0
    total_state_vars: int = 0
    n_internal_functions: int = 0
    n_external_calls: int = 0
    n_bool_vars: int = 0
    n_mapping_array_vars: int = 0
    gv_constant: int = 0  # constant/immutable state variables, included in gv
    parse_ok: bool = True

    @property
    def iff(self) -> Fraction:
        return _ratio(self.n_internal_functions, self.total_functions)

    @property
    def ec(self) -> Fraction:
        return _ratio(self.n_external_calls, self.total_calls)

    @property
    def bv(self) -> Fraction:
        return _ratio(self.n_bool_vars, self.total_var_decls)

    @property
    def ma(self) -> Fraction:
        return _ratio(self.n_mapping_array_vars, self.total_state_vars)

    def get(self, name: str) -> float:
        value = getattr(self, name)
        return float(value) if isinstance(value, Fraction) else value

    def __add__(self, other: "MetricVector") -> "MetricVector":
        merged = {}
        for f in dataclasses.fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            merged[f.name] = (a and b) if f.name == "parse_ok" else a + b
        return MetricVector(**merged)

    def to_dict(self) -> dict:
        out: dict = {"parse_ok": self.parse_ok, "sloc": self.sloc}
        for name in COUNT_FIELDS:
            out[name] = getattr(self, name)
        for name in RATIO_FIELDS:
            out[name] = round(float(getattr(self, name)), 6)
        for name in DENOMINATORS:
            out[name] = getattr(self, name)
        out["gv_constant"] = self.gv_constant
        return out


# --------------------------------------------------------------------------
# default values


def _is_zero_number(lit: Literal) -> bool:
    text = lit.text.replace("_", "")
    if text[:2] in ("0x", "0X"):
        digits = text[2:]
        return bool(digits) and int(digits, 16) == 0
    try:
        return Decimal(text) == 0
    except InvalidOperation:
        return False


def _is_empty_string(lit: Literal) -> bool:
    text = lit.text
    if text.startswith(("hex", "unicode")):
        text = text[3:] if text.startswith("hex") else text[7:]
    return text in ('""', "''")


def _strip_casts(expr: Expr) -> Expr:
    while (
        isinstance(expr, Call)
        and isinstance(expr.callee, Identifier)
        and (is_elementary_type_name(expr.callee.name) or expr.callee.name == "payable")
        and len(expr.args) == 1
    ):
        expr = expr.args[0]
    return expr


def is_default_value(expr: Optional[Expr], target_type: Optional[TypeRef]) -> bool:
    """Whether ``expr`` is the zero value of ``target_type``.

    With an unknown target type the literal alone decides; a zero literal
    can only be assigned to types whose default it is.
    """
    if expr is None:
        return False
    expr = _strip_casts(expr)
    if not isinstance(expr, Literal):
        return False
    name = ""
    if target_type is not None:
        if target_type.variant != "elementary":
            return False
        name = target_type.name
    if expr.kind == "number":
        if not _is_zero_number(expr):
            return False
        return not name or name not in ("bool", "string", "bytes")
    if expr.kind == "bool":
        return expr.text == "false" and (not name or name == "bool")
    if expr.kind in ("string", "hex"):
        if not _is_empty_string(expr):
            return False
        return not name or name in ("string", "bytes") or name.startswith("bytes")
    return False


# --------------------------------------------------------------------------
# scopes and call classification


@dataclass
class ContractScope:
    """Names visible inside one contract, including its in-file bases."""

    contract: ContractDef
    callables: set[str] = field(default_factory=set)  # functions, modifiers, events
    state_vars: dict[str, TypeRef] = field(default_factory=dict)
    libraries: set[str] = field(default_factory=set)
    type_names: set[str] = field(default_factory=set)
    structs: dict[str, dict[str, TypeRef]] = field(default_factory=dict)
    functions: dict[str, list[FunctionDef]] = field(default_factory=dict)
    bound_libraries: set[str] = field(default_factory=set)

    @classmethod
    def build(cls, unit: SourceUnit, contract: ContractDef) -> "ContractScope":
        scope = cls(contract)
        by_name = {c.name: c for c in unit.contracts}
        for c in unit.contracts:
            scope.type_names.add(c.name)
            if c.kind == "library":
                scope.libraries.add(c.name)
            for s in c.structs:
                scope.type_names.add(s.name)
                scope.structs[s.name] = {p.name: p.type_ref for p in s.fields}
                scope.structs[f"{c.name}.{s.name}"] = scope.structs[s.name]
            scope.type_names.update(e.name for e in c.enums)
        for c in linearize(contract, by_name):
            for fn in c.functions + c.modifiers:
                if fn.name:
                    scope.callables.add(fn.name)
                    scope.functions.setdefault(fn.name, []).append(fn)
            scope.callables.update(e.name for e in c.events)
            scope.callables.update(c.errors)
            for v in c.state_vars:
                scope.state_vars.setdefault(v.name, v.type_ref)
            for u in c.using_directives:
                scope.bound_libraries.add(u.library)
        return scope


def linearize(contract: ContractDef, by_name: dict[str, ContractDef]) -> list[ContractDef]:
    """The contract followed by its transitive in-file bases, each once."""
    seen: list[ContractDef] = []
    stack = [contract]
    while stack:
        c = stack.pop()
        if any(c is s for s in seen):
            continue
        seen.append(c)
        for base in reversed(c.base_names):
            if base in by_name:
                stack.append(by_name[base])
    return seen


def classify_call(call: Call, scope: ContractScope) -> str:
    """Classify a call expression as internal, external or builtin.

    Bare-name calls are jumps (internal) unless they are builtins or type
    conversions. Member calls are external unless the base is ``super``, a
    builtin namespace, or a name declared as a function, modifier or event
    of the contract.
    """
    callee = call.callee
    if isinstance(callee, Identifier):
        name = callee.name
        if name in BUILTIN_FUNCTIONS or name == "payable" or is_elementary_type_name(name):
            return "builtin"
        if name in scope.type_names and name not in scope.callables:
            return "builtin"
        return "internal"
    if isinstance(callee, NewExpr):
        return "builtin"
    if isinstance(callee, Call):
        inner = callee.callee
        if isinstance(inner, MemberAccess) and inner.member in VALUE_MEMBERS:
            return "external"
        if callee.options and isinstance(inner, MemberAccess):
            return classify_call(Call(span=call.span, callee=inner, args=call.args), scope)
        return "internal"
    if isinstance(callee, MemberAccess):
        base, member = callee.base, callee.member
        if isinstance(base, Identifier):
            if base.name == "this":
                return "external"
            if base.name == "super":
                return "internal"
            if base.name in BUILTIN_NAMESPACES:
                return "builtin"
        if isinstance(base, Call) and isinstance(base.callee, Identifier) and base.callee.name == "type":
            return "builtin"
        if member in LOW_LEVEL_MEMBERS:
            return "external"
        if member in VALUE_MEMBERS or member in ARRAY_MEMBERS:
            return "builtin"
        if isinstance(base, Identifier) and base.name in scope.callables:
            return "internal"
        return "external"
    return "internal"


# --------------------------------------------------------------------------
# fact collection


@dataclass
class AssignmentSite:
    expr: Expr
    function: Optional[FunctionDef]
    in_loop: bool


@dataclass
class DefaultSite:
    node: Node  # the initialised declaration or the assignment
    name: str
    function: Optional[FunctionDef]


@dataclass
class ReturnLocalSite:
    function: FunctionDef
    ret: Return
    name: str


@dataclass
class CallSite:
    call: Call
    kind: str
    function: Optional[FunctionDef]


@dataclass
class ContractFacts:
    contract: ContractDef
    scope: ContractScope
    loops: list[Loop] = field(default_factory=list)
    assignments: list[AssignmentSite] = field(default_factory=list)
    defaults: list[DefaultSite] = field(default_factory=list)
    return_locals: list[ReturnLocalSite] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    local_decls: list[LocalVar] = field(default_factory=list)
    initializer_sites: int = 0

    @property
    def loop_assignments(self) -> list[AssignmentSite]:
        return [a for a in self.assignments if a.in_loop]

    @property
    def rlv_functions(self) -> list[FunctionDef]:
        seen: list[FunctionDef] = []
        for site in self.return_locals:
            if not any(site.function is f for f in seen):
                seen.append(site.function)
        return seen


class _FunctionWalker:
    def __init__(self, facts: ContractFacts, fn: Optional[FunctionDef]) -> None:
        self.facts = facts
        self.fn = fn
        self.names: dict[str, TypeRef] = {}
        self.body_locals: set[str] = set()
        if fn is not None:
            for p in fn.params + fn.returns:
                if p.name:
                    self.names[p.name] = p.type_ref
            if fn.body is not None:
                for node in _walk_all(fn.body):
                    if isinstance(node, VarDeclStmt):
                        for d in node.decls:
                            if d is not None:
                                self.names[d.name] = d.type_ref
                                self.body_locals.add(d.name)
                    elif isinstance(node, CatchClause):
                        for p in node.params:
                            if p.name:
                                self.names[p.name] = p.type_ref

    def type_of(self, expr: Expr) -> Optional[TypeRef]:
        if isinstance(expr, Identifier):
            if expr.name in self.names:
                return self.names[expr.name]
            return self.facts.scope.state_vars.get(expr.name)
        if isinstance(expr, IndexAccess) and not expr.is_slice:
            base = self.type_of(expr.base)
            if base is None:
                return None
            if base.variant == "mapping":
                return base.value
            if base.variant == "array":
                return base.base
            return None
        if isinstance(expr, MemberAccess):
            base = self.type_of(expr.base)
            if base is not None and base.variant == "user_defined":
                fields = self.facts.scope.structs.get(base.name)
                if fields is not None:
                    return fields.get(expr.member)
        return None

    def visit(self, node: Node, in_loop: bool) -> None:
        facts = self.facts
        if isinstance(node, Loop):
            facts.loops.append(node)
            if node.init is not None:
                self.visit(node.init, in_loop)
            if node.condition is not None:
                self.visit(node.condition, in_loop)
            if node.post is not None:
                self.visit(node.post, True)
            self.visit(node.body, True)
            return
        if is_assignment_like(node):
            facts.assignments.append(AssignmentSite(node, self.fn, in_loop))
            if isinstance(node, Assignment) and node.op == "=":
                self.check_default_assignment(node)
        elif isinstance(node, VarDeclStmt):
            facts.local_decls.extend(d for d in node.decls if d is not None)
            if node.initializer is not None:
                facts.initializer_sites += 1
                self.check_default_decl(node)
        elif isinstance(node, RevertStmt) and isinstance(node.call, Call):
            # `revert E(...)` builds error data; nothing is called
            facts.calls.append(CallSite(node.call, "builtin", self.fn))
            for arg in node.call.args:
                self.visit(arg, in_loop)
            return
        elif isinstance(node, Call):
            facts.calls.append(CallSite(node, classify_call(node, facts.scope), self.fn))
        elif isinstance(node, Return) and self.fn is not None:
            value = node.value
            if isinstance(value, Identifier) and value.name in self.body_locals:
                facts.return_locals.append(ReturnLocalSite(self.fn, node, value.name))
        for child in iter_children(node):
            self.visit(child, in_loop)

    def check_default_decl(self, stmt: VarDeclStmt) -> None:
        init = stmt.initializer
        decls = stmt.decls
        if len(decls) == 1 and decls[0] is not None:
            if is_default_value(init, decls[0].type_ref):
                self.facts.defaults.append(DefaultSite(stmt, decls[0].name, self.fn))
        elif isinstance(init, TupleExpr) and len(init.items) == len(decls):
            for decl, item in zip(decls, init.items):
                if decl is not None and is_default_value(item, decl.type_ref):
                    self.facts.defaults.append(DefaultSite(stmt, decl.name, self.fn))

    def check_default_assignment(self, node: Assignment) -> None:
        lhs, rhs = node.lhs, node.rhs
        if isinstance(lhs, TupleExpr) and isinstance(rhs, TupleExpr) and len(lhs.items) == len(rhs.items):
            for target, value in zip(lhs.items, rhs.items):
                if target is not None and is_default_value(value, self.type_of(target)):
                    self.facts.defaults.append(DefaultSite(node, _describe(target), self.fn))
        elif not isinstance(lhs, TupleExpr) and is_default_value(rhs, self.type_of(lhs)):
            self.facts.defaults.append(DefaultSite(node, _describe(lhs), self.fn))


def _describe(expr: Expr) -> str:
    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, MemberAccess):
        return f"{_describe(expr.base)}.{expr.member}"
    if isinstance(expr, IndexAccess):
        return f"{_describe(expr.base)}[...]"
    return "<expression>"


def _walk_all(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(iter_children(current))


def contract_facts(unit: SourceUnit, contract: ContractDef) -> ContractFacts:
    facts = ContractFacts(contract, ContractScope.build(unit, contract))
    state_walker = _FunctionWalker(facts, None)
    for var in contract.state_vars:
        if var.initializer is not None:
            facts.initializer_sites += 1
            if is_default_value(var.initializer, var.type_ref):
                facts.defaults.append(DefaultSite(var, var.name, None))
            state_walker.visit(var.initializer, False)
    for fn in contract.functions + contract.modifiers:
        if fn.body is not None:
            _FunctionWalker(facts, fn).visit(fn.body, False)
    return facts


# --------------------------------------------------------------------------
# metric computation


def _contract_vector(facts: ContractFacts, iff_include_private: bool) -> MetricVector:
    contract = facts.contract
    internal = {"internal", "private"} if iff_include_private else {"internal"}
    state_vars: list[StateVarDecl] = contract.state_vars
    decl_types = [v.type_ref for v in state_vars] + [d.type_ref for d in facts.local_decls]
    return MetricVector(
        pm=sum(v.visibility == "public" for v in state_vars)
        + sum(f.effective_visibility == "public" for f in contract.functions),
        gv=len(state_vars),
        gv_constant=sum(v.is_constant or v.is_immutable for v in state_vars),
        ip=sum(p.indexed for e in contract.events for p in e.params),
        ne=len(contract.events),
        nlf=len(facts.loops),
        aci=len(facts.loop_assignments),
        az=len(facts.defaults),
        rlv=len(facts.rlv_functions),
        nu=sum(t.is_elementary and t.width is not None and t.width < 32 for t in decl_types),
        li=int(contract.kind == "library") + len(contract.using_directives),
        total_functions=len(contract.functions),
        n_internal_functions=sum(f.effective_visibility in internal for f in contract.functions),
        total_calls=sum(c.kind != "builtin" for c in facts.calls),
        n_external_calls=sum(c.kind == "external" for c in facts.calls),
        total_var_decls=len(decl_types),
        n_bool_vars=sum(t.is_bool for t in decl_types),
        total_state_vars=len(state_vars),
        n_mapping_array_vars=sum(v.type_ref.variant in ("mapping", "array") for v in state_vars),
    )


def per_contract_metrics(unit: SourceUnit, iff_include_private: bool = False) -> list[tuple[str, MetricVector]]:
    out = []
    for contract in unit.contracts:
        vector = _contract_vector(contract_facts(unit, contract), iff_include_private)
        vector.parse_ok = unit.parse_ok
        span = contract.span
        vector.sloc = sum(span.start_line <= line <= span.end_line for line in unit.code_lines)
        out.append((contract.name, vector))
    return out


def sum_vectors(vectors: Iterable[MetricVector]) -> MetricVector:
    total = MetricVector()
    for v in vectors:
        total = total + v
    return total


def compute_metrics(unit: SourceUnit, iff_include_private: bool = False) -> MetricVector:
    """File-level metrics: contract counts summed, ratios from summed parts."""
    total = sum_vectors(v for _, v in per_contract_metrics(unit, iff_include_private))
    total.sloc = unit.sloc
    total.parse_ok = unit.parse_ok
    return total
