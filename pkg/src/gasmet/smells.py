"""Cost-smell detectors.

Each detector returns :class:`SmellFinding` records located in the analysed
file. :func:`detect` runs the enabled detectors and returns their union in a
stable order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lexer import Span
from .metrics import (
    ContractFacts,
    MetricVector,
    compute_metrics,
    contract_facts,
    per_contract_metrics,
)
from .nodes import (
    Call,
    ContractDef,
    FunctionDef,
    Identifier,
    MemberAccess,
    SourceUnit,
    StateVarDecl,
    VarDeclStmt,
    assigned_target,
    root_identifier,
    walk,
)
from .rules import GENERIC, RULEBOOK, RuleConfig, smell_number

__all__ = [
    "SmellFinding",
    "call_chain_depths",
    "detect",
    "detect_cs1",
    "detect_cs17",
    "detect_cs19",
    "detect_cs2",
    "detect_cs4",
    "detect_cs5",
    "detect_cs9",
    "detect_threshold_generic",
]


@dataclass(frozen=True)
class SmellFinding:
    smell_id: str
    span: Span
    message: str
    severity: str
    evidence: tuple[tuple[str, object], ...] = field(default=())
    contract: str = ""

    def sort_key(self) -> tuple:
        return (self.span.file_id, self.span.start_line, smell_number(self.smell_id), self.span.start_col, self.message)

    def to_dict(self) -> dict:
        return {
            "smell_id": self.smell_id,
            "severity": self.severity,
            "message": self.message,
            "contract": self.contract,
            **self.span.to_dict(),
            "evidence": {k: v for k, v in self.evidence},
        }


def _finding(smell_id: str, span: Span, message: str, contract: str, **evidence: object) -> SmellFinding:
    return SmellFinding(
        smell_id,
        span,
        message,
        RULEBOOK[smell_id].severity,
        tuple(sorted(evidence.items())),
        contract,
    )


def _all_facts(unit: SourceUnit) -> list[ContractFacts]:
    return [contract_facts(unit, c) for c in unit.contracts]


def function_local_names(fn: Optional[FunctionDef]) -> set[str]:
    """Parameters, named returns and every local declared in the body."""
    if fn is None:
        return set()
    names = {p.name for p in fn.params + fn.returns if p.name}
    if fn.body is not None:
        for node in walk(fn.body):
            if isinstance(node, VarDeclStmt):
                names.update(d.name for d in node.decls if d is not None)
    return names


# --------------------------------------------------------------------------
# bespoke detectors


def detect_cs1(unit: SourceUnit, facts: Optional[list[ContractFacts]] = None) -> list[SmellFinding]:
    """State variable assigned or incremented inside a loop body."""
    findings = []
    for cf in facts if facts is not None else _all_facts(unit):
        locals_cache: dict[int, set[str]] = {}
        for site in cf.loop_assignments:
            name = root_identifier(assigned_target(site.expr))
            if name is None or name not in cf.scope.state_vars:
                continue
            key = id(site.function)
            if key not in locals_cache:
                locals_cache[key] = function_local_names(site.function)
            if name in locals_cache[key]:
                continue
            findings.append(
                _finding(
                    "CS1",
                    site.expr.span,
                    f"state variable '{name}' is written inside a loop; accumulate in a local and write once",
                    cf.contract.name,
                    variable=name,
                )
            )
    return findings


def detect_cs2(
    unit: SourceUnit, metrics: Optional[MetricVector] = None, cfg: Optional[RuleConfig] = None
) -> list[SmellFinding]:
    """Contract whose public member count exceeds the configured threshold."""
    cfg = cfg or RuleConfig()
    threshold = cfg.threshold("CS2")
    findings = []
    for contract, (name, vector) in zip(unit.contracts, per_contract_metrics(unit)):
        if vector.pm > threshold:
            findings.append(
                _finding(
                    "CS2",
                    contract.span,
                    f"contract '{name}' has {vector.pm} public members (threshold {threshold:g})",
                    name,
                    pm=vector.pm,
                    threshold=threshold,
                )
            )
    return findings


def detect_cs4(unit: SourceUnit, facts: Optional[list[ContractFacts]] = None) -> list[SmellFinding]:
    """Declaration or assignment that stores the type's default value."""
    findings = []
    for cf in facts if facts is not None else _all_facts(unit):
        for site in cf.defaults:
            findings.append(
                _finding(
                    "CS4",
                    site.node.span,
                    f"'{site.name}' is explicitly set to its default value",
                    cf.contract.name,
                    variable=site.name,
                )
            )
    return findings


def detect_cs5(unit: SourceUnit, facts: Optional[list[ContractFacts]] = None) -> list[SmellFinding]:
    """Using-directives and calls routed through a library."""
    findings = []
    by_name = {c.name: c for c in unit.contracts}
    for cf in facts if facts is not None else _all_facts(unit):
        contract = cf.contract
        for directive in contract.using_directives:
            findings.append(
                _finding(
                    "CS5",
                    directive.span,
                    f"'using {directive.library} for {directive.target}': a library lowers deployment cost "
                    "but every external library call costs more to execute",
                    contract.name,
                    library=directive.library,
                )
            )
        # functions reachable through `using L for T` with L defined in this file
        bound = {
            fn.name: lib
            for lib in sorted(cf.scope.bound_libraries)
            if lib in by_name
            for fn in by_name[lib].functions
        }
        libraries = cf.scope.libraries | cf.scope.bound_libraries
        for site in cf.calls:
            callee = site.call.callee
            if not isinstance(callee, MemberAccess):
                continue
            base = callee.base
            if isinstance(base, Identifier) and base.name in libraries:
                library = base.name
            elif callee.member in bound and not (isinstance(base, Identifier) and base.name in cf.scope.type_names):
                library = bound[callee.member]
            else:
                continue
            findings.append(
                _finding(
                    "CS5",
                    site.call.span,
                    f"call to library function '{library}.{callee.member}'",
                    contract.name,
                    library=library,
                )
            )
    return findings


def detect_cs9(unit: SourceUnit, facts: Optional[list[ContractFacts]] = None) -> list[SmellFinding]:
    """Function that returns a body-local variable rather than a named return."""
    findings = []
    for cf in facts if facts is not None else _all_facts(unit):
        seen: list[FunctionDef] = []
        for site in cf.return_locals:
            if any(site.function is f for f in seen):
                continue
            seen.append(site.function)
            label = site.function.name or site.function.kind
            findings.append(
                _finding(
                    "CS9",
                    site.ret.span,
                    f"function '{label}' returns local '{site.name}'; a named return value avoids the extra local",
                    cf.contract.name,
                    function=label,
                    variable=site.name,
                )
            )
    return findings


def _slot_width(var: StateVarDecl) -> Optional[int]:
    t = var.type_ref
    return t.width if t.is_elementary else None


def detect_cs17(unit: SourceUnit) -> list[SmellFinding]:
    """Two packable state variables split by a full-slot variable.

    Slots are assigned sequentially in declaration order. A finding is
    reported once per contract, located at the first separating variable.
    """
    findings = []
    for contract in unit.contracts:
        layout = [v for v in contract.state_vars if not (v.is_constant or v.is_immutable)]
        slots, used = [], 32
        slot = -1
        for var in layout:
            width = _slot_width(var)
            if width is None or width >= 32:
                slot += 1
                slots.append(slot)
                used = 32
                continue
            if used + width > 32:
                slot += 1
                used = 0
            slots.append(slot)
            used += width
        hit = None
        for i, a in enumerate(layout):
            wa = _slot_width(a)
            if wa is None or wa >= 32:
                continue
            for j in range(i + 1, len(layout)):
                b = layout[j]
                wb = _slot_width(b)
                if wb is None or wb >= 32 or slots[i] == slots[j] or wa + wb > 32:
                    continue
                separators = [v for v in layout[i + 1 : j] if (_slot_width(v) or 32) >= 32]
                if separators:
                    hit = (a, b, separators[0])
                    break
            if hit:
                break
        if hit:
            a, b, sep = hit
            findings.append(
                _finding(
                    "CS17",
                    sep.span,
                    f"'{a.name}' and '{b.name}' fit in one storage slot but '{sep.name}' separates them; "
                    "declare them next to each other",
                    contract.name,
                    slots_used=(slots[-1] + 1) if slots else 0,
                    first=a.name,
                    second=b.name,
                    separator=sep.name,
                )
            )
    return findings


def call_chain_depths(cf: ContractFacts) -> tuple[dict[str, int], list[tuple[str, ...]]]:
    """Longest internal call chain (counted in functions) from each function.

    Calls back into a function already on the current chain are cycles; they
    stop the chain and are returned separately.
    """
    own = {f.name for f in cf.contract.functions if f.name}
    edges: dict[str, set[str]] = {name: set() for name in own}
    for site in cf.calls:
        fn = site.function
        if fn is None or fn.kind == "modifier" or fn.name not in own or site.kind != "internal":
            continue
        callee = site.call.callee
        if isinstance(callee, Identifier) and callee.name in own:
            edges[fn.name].add(callee.name)
    cycles: list[tuple[str, ...]] = []
    memo: dict[str, int] = {}

    def depth(name: str, stack: list[str]) -> tuple[int, bool]:
        if name in memo:
            return memo[name], False
        stack.append(name)
        best, touched_cycle = 1, False
        for callee in sorted(edges[name]):
            if callee in stack:
                cycle = tuple(stack[stack.index(callee):])
                if cycle not in cycles:
                    cycles.append(cycle)
                touched_cycle = True
                continue
            d, c = depth(callee, stack)
            best = max(best, 1 + d)
            touched_cycle = touched_cycle or c
        stack.pop()
        if not touched_cycle:
            memo[name] = best
        return best, touched_cycle

    depths = {name: depth(name, [])[0] for name in sorted(own)}
    return depths, cycles


def detect_cs19(
    unit: SourceUnit,
    metrics: Optional[MetricVector] = None,
    cfg: Optional[RuleConfig] = None,
    facts: Optional[list[ContractFacts]] = None,
) -> list[SmellFinding]:
    cfg = cfg or RuleConfig()
    threshold = cfg.threshold("CS19")
    findings = []
    for cf in facts if facts is not None else _all_facts(unit):
        depths, cycles = call_chain_depths(cf)
        if not depths:
            continue
        root = max(sorted(depths), key=lambda n: depths[n])
        if depths[root] <= threshold:
            continue
        fn = next(f for f in cf.contract.functions if f.name == root)
        evidence = {"depth": depths[root], "threshold": threshold}
        if cycles:
            evidence["cycles"] = tuple("->".join(c) for c in cycles)
        findings.append(
            _finding(
                "CS19",
                fn.span,
                f"call chain starting at '{root}' is {depths[root]} functions deep (threshold {threshold:g})",
                cf.contract.name,
                **evidence,
            )
        )
    return findings


def _file_span(unit: SourceUnit) -> Span:
    return Span(unit.file_id, 1, 1, max(unit.raw_line_count, 1), 1)


def detect_threshold_generic(
    smell_id: str, metric: str, unit: SourceUnit, metrics: MetricVector, cfg: RuleConfig
) -> list[SmellFinding]:
    """One finding when ``metric`` strictly exceeds the smell's threshold."""
    if smell_id not in cfg.enabled:
        return []
    threshold = cfg.threshold(smell_id)
    value = metrics.get(metric)
    if not value > threshold:
        return []
    return [
        _finding(
            smell_id,
            _file_span(unit),
            f"{metric} = {value:g} exceeds the {smell_id} threshold {threshold:g}",
            "",
            metric=metric,
            value=value,
            threshold=threshold,
        )
    ]


def detect(
    unit: SourceUnit, metrics: Optional[MetricVector] = None, cfg: Optional[RuleConfig] = None
) -> list[SmellFinding]:
    """Run every enabled detector; findings ordered by (file, line, smell)."""
    cfg = cfg or RuleConfig()
    if metrics is None:
        metrics = compute_metrics(unit, cfg.iff_include_private)
    facts = _all_facts(unit)
    runners = {
        "CS1": lambda: detect_cs1(unit, facts),
        "CS2": lambda: detect_cs2(unit, metrics, cfg),
        "CS4": lambda: detect_cs4(unit, facts),
        "CS5": lambda: detect_cs5(unit, facts),
        "CS9": lambda: detect_cs9(unit, facts),
        "CS17": lambda: detect_cs17(unit),
        "CS19": lambda: detect_cs19(unit, metrics, cfg, facts),
    }
    findings: list[SmellFinding] = []
    for smell_id, run in runners.items():
        if smell_id in cfg.enabled:
            findings.extend(run())
    for smell_id in GENERIC:
        if smell_id in cfg.metrics:
            findings.extend(detect_threshold_generic(smell_id, cfg.metrics[smell_id], unit, metrics, cfg))
    findings.sort(key=SmellFinding.sort_key)
    return findings
