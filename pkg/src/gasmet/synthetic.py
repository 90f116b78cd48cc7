"""Random, syntactically valid Solidity contracts for fuzzing and planted studies."""

from __future__ import annotations

import random
from pathlib import Path
from dataclasses import dataclass

PRAGMAS = ("^0.4.24", "^0.5.0", "^0.6.12", ">=0.7.0 <0.9.0", "^0.8.4")
SMALL_TYPES = ("uint8", "uint16", "uint32", "uint64", "uint128", "bool", "address", "bytes4", "int64")
FULL_TYPES = ("uint256", "uint", "int256", "bytes32")
VISIBILITIES = ("public", "internal", "private", "")


@dataclass
class GeneratorConfig:
    """Upper bounds for the random contract shape."""

    max_state_vars: int = 8
    max_functions: int = 6
    max_events: int = 3
    max_statements: int = 6
    libraries: bool = True
    external_calls: bool = True


class _Gen:
    def __init__(self, rng: random.Random, cfg: GeneratorConfig, pragma: str):
        self.rng = rng
        self.cfg = cfg
        self.pragma = pragma
        self.modern = not pragma.startswith("^0.4")
        self.lines: list[str] = []
        self.state: list[tuple[str, str]] = []  # (name, type) of writable elementary state vars
        self.functions: list[str] = []
        self.events: list[tuple[str, int]] = []

    def emit(self, text: str, indent: int = 1) -> None:
        self.lines.append("    " * indent + text)

    def default_for(self, ty: str) -> str:
        if ty == "bool":
            return "false"
        if ty == "address":
            return "address(0)"
        if ty.startswith("bytes"):
            return f"{ty}(0)"
        return "0"

    def value_for(self, ty: str) -> str:
        if ty == "bool":
            return self.rng.choice(("true", "false"))
        if ty == "address":
            return "msg.sender"
        if ty.startswith("bytes"):
            return f"{ty}(0)"
        return str(self.rng.randint(0, 9))

    def state_var(self, i: int, public_ok: bool = True) -> None:
        r = self.rng.random()
        name = f"s{i}"
        vis = self.rng.choice(VISIBILITIES if public_ok else VISIBILITIES[1:])
        vis = f" {vis}" if vis else ""
        if r < 0.15:
            self.emit(f"mapping(address => uint256){vis} {name};")
        elif r < 0.25:
            self.emit(f"uint256[]{vis} {name};")
        elif r < 0.32:
            ty = self.rng.choice(("uint256", "uint8"))
            self.emit(f"{ty}{vis} constant {name} = {self.rng.randint(1, 99)};")
        else:
            ty = self.rng.choice(SMALL_TYPES + FULL_TYPES)
            init = ""
            if self.rng.random() < 0.3:
                init = " = " + (self.default_for(ty) if self.rng.random() < 0.5 else self.value_for(ty))
            self.emit(f"{ty}{vis} {name}{init};")
            self.state.append((name, ty))

    def event(self, i: int) -> None:
        params = []
        n_indexed = 0
        for j in range(self.rng.randint(0, 3)):
            idx = self.rng.random() < 0.4 and n_indexed < 3
            n_indexed += idx
            params.append(f"uint256{' indexed' if idx else ''} a{j}")
        name = f"E{i}"
        self.emit(f"event {name}({', '.join(params)});")
        self.events.append((name, len(params)))

    def statement(self, locals_: list[str], depth: int) -> None:
        rng = self.rng
        choice = rng.randrange(10)
        indent = depth + 2
        if choice == 0 and self.state:
            name, ty = rng.choice(self.state)
            self.emit(f"{name} = {self.value_for(ty)};", indent)
        elif choice == 1 and depth < 2:
            var = f"i{len(locals_)}_{depth}"
            kind = rng.randrange(3)
            if kind == 0:
                self.emit(f"for (uint256 {var} = 0; {var} < 3; {var}++) {{", indent)
            elif kind == 1:
                self.emit(f"uint256 {var} = 0;", indent)
                self.emit(f"while ({var} < 3) {{", indent)
                self.emit(f"{var}++;", indent + 1)
            else:
                self.emit(f"uint256 {var} = 0;", indent)
                self.emit("do {", indent)
                self.emit(f"{var} += 1;", indent + 1)
            inner = list(locals_)
            for _ in range(rng.randint(1, 2)):
                self.statement(inner, depth + 1)
            self.emit("}" if kind < 2 else f"}} while ({var} < 3);", indent)
        elif choice == 2:
            name = f"v{len(locals_)}_{depth}_{rng.randrange(1000)}"
            ty = rng.choice(("uint256", "bool", "address", "uint8"))
            init = self.default_for(ty) if rng.random() < 0.4 else self.value_for(ty)
            self.emit(f"{ty} {name} = {init};", indent)
            if ty == "uint256":
                locals_.append(name)
        elif choice == 3 and self.functions:
            self.emit(f"{rng.choice(self.functions)}();", indent)
        elif choice == 4 and self.events:
            name, n = rng.choice(self.events)
            args = ", ".join(str(rng.randint(0, 9)) for _ in range(n))
            kw = "emit " if self.modern or rng.random() < 0.5 else ""
            self.emit(f"{kw}{name}({args});", indent)
        elif choice == 5:
            self.emit(f"require({rng.randint(0, 9)} < {rng.randint(10, 20)});", indent)
        elif choice == 6 and self.cfg.external_calls:
            if rng.random() < 0.5:
                self.emit("msg.sender.transfer(1);" if not self.modern else "payable(msg.sender).transfer(1);", indent)
            else:
                self.emit("this.ping();", indent)
        elif choice == 7 and depth < 2:
            self.emit(f"if ({rng.randint(0, 9)} > {rng.randint(0, 9)}) {{", indent)
            self.statement(list(locals_), depth + 1)
            self.emit("} else {", indent)
            self.statement(list(locals_), depth + 1)
            self.emit("}", indent)
        elif choice == 8 and locals_:
            self.emit(f"{rng.choice(locals_)} += 1;", indent)
        else:
            self.emit(f"uint256 t{rng.randrange(10**6)} = {rng.randint(1, 9)} * {rng.randint(1, 9)};", indent)

    def function(self, i: int) -> None:
        rng = self.rng
        name = f"f{i}"
        vis = rng.choice(("public", "external", "internal", "private"))
        returns = ""
        ret_kind = rng.randrange(3)
        if ret_kind == 1:
            returns = " returns (uint256)"
        elif ret_kind == 2:
            returns = " returns (uint256 out)"
        self.emit(f"function {name}() {vis}{returns} {{")
        locals_: list[str] = []
        for _ in range(rng.randint(0, self.cfg.max_statements)):
            self.statement(locals_, 0)
        if ret_kind == 1:
            if rng.random() < 0.5:
                self.emit("uint256 r = 1;", 2)
                self.emit("return r;", 2)
            else:
                self.emit("return 1;", 2)
        elif ret_kind == 2:
            self.emit("out = 2;", 2)
        self.emit("}")
        if vis in ("internal", "private") and ret_kind == 0:
            self.functions.append(name)

    def contract(self, name: str, n_state: int) -> str:
        rng = self.rng
        cfg = self.cfg
        with_lib = cfg.libraries and rng.random() < 0.3
        if with_lib:
            self.lines.append("library MathLib {")
            self.emit("function inc(uint256 x) internal pure returns (uint256) {")
            self.emit("return x + 1;", 2)
            self.emit("}")
            self.lines.append("}")
            self.lines.append("")
        self.lines.append(f"contract {name} {{")
        if with_lib:
            self.emit("using MathLib for uint256;")
        for i in range(n_state):
            self.state_var(i)
        for i in range(rng.randint(0, cfg.max_events)):
            self.event(i)
        old_ctor = self.pragma.startswith(("^0.4", "^0.5", "^0.6"))
        ctor = "constructor() public {" if old_ctor else "constructor() {"
        if rng.random() < 0.5:
            self.emit(ctor)
            if self.state:
                nm, ty = rng.choice(self.state)
                self.emit(f"{nm} = {self.value_for(ty)};", 2)
            self.emit("}")
        self.emit("function ping() external {}")
        for i in range(rng.randint(0, cfg.max_functions)):
            self.function(i)
        self.lines.append("}")
        return "\n".join([f"pragma solidity {self.pragma};", ""] + self.lines) + "\n"


def random_contract(rng: random.Random, cfg: GeneratorConfig | None = None, name: str = "Gen") -> str:
    """One syntactically valid source file with a random mix of constructs."""
    cfg = cfg or GeneratorConfig()
    gen = _Gen(rng, cfg, rng.choice(PRAGMAS))
    return gen.contract(name, rng.randint(0, cfg.max_state_vars))


def planted_contract(gv: int, rng: random.Random, name: str = "Planted") -> str:
    """A library-free contract with exactly ``gv`` state variables."""
    cfg = GeneratorConfig(libraries=False)
    gen = _Gen(rng, cfg, rng.choice(PRAGMAS[1:]))
    return gen.contract(name, gv)


def mutate(source: str, rng: random.Random) -> str:
    """Damage ``source``: truncate, drop or duplicate a slice, or splice in junk."""
    if not source:
        return rng.choice(("{", "}", "(", '"', "/*"))
    n = len(source)
    a, b = sorted(rng.randrange(n + 1) for _ in range(2))
    op = rng.randrange(5)
    if op == 0:
        return source[:a]
    if op == 1:
        return source[:a] + source[b:]
    if op == 2:
        return source[:a] + source[a:b] + source[a:]
    if op == 3:
        junk = "".join(rng.choice('{}()[];,"\'/*=+-<>!~@#\\\n\t abc0x9') for _ in range(rng.randint(1, 12)))
        return source[:a] + junk + source[a:]
    # bracket storm exercises nesting limits
    return source[:a] + "(" * rng.randint(1, 400) + source[a:]


def planted_gas(gv: int) -> int:
    """Deployment gas as a strictly increasing function of GV."""
    return 53_000 + 20_000 * gv + 150 * gv * gv


def write_planted_corpus(directory: "str | Path", n: int, seed: int = 0, max_gv: int = 40) -> list[tuple[str, int]]:
    """Write ``n`` planted contracts and return ``(id, gas_used)`` rows."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        gv = rng.randint(0, max_gv)
        cid = f"planted_{i:04d}"
        (out / f"{cid}.sol").write_text(planted_contract(gv, rng, name=f"P{i}"), encoding="utf-8")
        rows.append((cid, planted_gas(gv)))
    return rows
