"""AST node types produced by :mod:`gasmet.parser`.

Every node carries a :class:`~gasmet.lexer.Span`. Child traversal is
generic (:func:`iter_children` / :func:`walk`) and driven by dataclass
fields, so detectors never need per-node visitor boilerplate.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .lexer import Diagnostic, Span


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class TypeRef:
    """A syntactic type.

    ``variant`` is one of elementary, mapping, array, user_defined,
    function_type, opaque.
    """

    variant: str
    name: str = ""
    width: Optional[int] = None  # storage width in bytes, elementary only
    key: Optional["TypeRef"] = None
    value: Optional["TypeRef"] = None
    base: Optional["TypeRef"] = None
    length: Optional[str] = None  # fixed array length, source text

    @property
    def is_elementary(self) -> bool:
        return self.variant == "elementary"

    @property
    def is_bool(self) -> bool:
        return self.variant == "elementary" and self.name == "bool"

    def __str__(self) -> str:
        if self.variant == "mapping":
            return f"mapping({self.key} => {self.value})"
        if self.variant == "array":
            return f"{self.base}[{self.length or ''}]"
        return self.name


def elementary_width(name: str) -> int:
    """Storage width in bytes of an elementary type name."""
    if name == "bool":
        return 1
    if name in ("address", "address payable"):
        return 20
    if name in ("string", "bytes", "uint", "int"):
        return 32
    if name == "byte":
        return 1
    for prefix in ("uint", "int"):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return int(name[len(prefix):]) // 8
    if name.startswith("bytes") and name[5:].isdigit():
        return int(name[5:])
    if name in ("fixed", "ufixed"):
        return 16
    for prefix in ("ufixed", "fixed"):
        if name.startswith(prefix):
            bits = name[len(prefix):].split("x")[0]
            if bits.isdigit():
                return int(bits) // 8
    return 32


def elementary(name: str) -> TypeRef:
    return TypeRef("elementary", name=name, width=elementary_width(name))


OPAQUE_TYPE = TypeRef("opaque", name="var")


# --------------------------------------------------------------------------
# base


@dataclass(eq=True)
class Node:
    span: Span = field(compare=False)


def iter_children(node: Node) -> Iterator[Node]:
    for f in dataclasses.fields(node):
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, (list, tuple)):
            for item in value:
                if isinstance(item, Node):
                    yield item
                elif isinstance(item, tuple):
                    yield from (x for x in item if isinstance(x, Node))


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal including ``node`` itself."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(iter_children(current))))


# --------------------------------------------------------------------------
# expressions


@dataclass(eq=True)
class Expr(Node):
    pass


@dataclass(eq=True)
class Identifier(Expr):
    name: str


@dataclass(eq=True)
class Literal(Expr):
    kind: str  # number | string | hex | bool
    text: str
    unit: Optional[str] = None


@dataclass(eq=True)
class MemberAccess(Expr):
    base: Expr
    member: str


@dataclass(eq=True)
class Call(Expr):
    callee: Expr
    args: list[Expr]
    arg_names: Optional[list[str]] = None
    options: list[tuple[str, Expr]] = field(default_factory=list)


ASSIGNMENT_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>="})


@dataclass(eq=True)
class Assignment(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(eq=True)
class Unary(Expr):
    op: str
    operand: Expr
    prefix: bool = True

    @property
    def mutates(self) -> bool:
        return self.op in ("++", "--")


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class IndexAccess(Expr):
    base: Expr
    index: Optional[Expr] = None
    end: Optional[Expr] = None
    is_slice: bool = False


@dataclass(eq=True)
class TupleExpr(Expr):
    items: list[Optional[Expr]]
    is_array: bool = False


@dataclass(eq=True)
class Conditional(Expr):
    condition: Expr
    if_true: Expr
    if_false: Expr


@dataclass(eq=True)
class NewExpr(Expr):
    type_ref: TypeRef


def is_assignment_like(expr: Node) -> bool:
    """Assignments and ++/-- both write their target."""
    return isinstance(expr, Assignment) or (isinstance(expr, Unary) and expr.mutates)


def assigned_target(expr: Expr) -> Expr:
    return expr.lhs if isinstance(expr, Assignment) else expr.operand


def root_identifier(expr: Optional[Expr]) -> Optional[str]:
    """Name at the root of an index/member chain: ``a[i].b`` -> ``a``."""
    while isinstance(expr, (IndexAccess, MemberAccess)):
        expr = expr.base
    return expr.name if isinstance(expr, Identifier) else None


# --------------------------------------------------------------------------
# statements


@dataclass(eq=True)
class Stmt(Node):
    pass


@dataclass(eq=True)
class Block(Stmt):
    statements: list[Stmt]
    unchecked: bool = False


@dataclass(eq=True)
class If(Stmt):
    condition: Expr
    then: Stmt
    else_: Optional[Stmt] = None


@dataclass(eq=True)
class Loop(Stmt):
    """for / while / do-while share one shape; while loops have no init/post."""

    kind: str  # for | while | do-while
    init: Optional[Stmt]
    condition: Optional[Expr]
    post: Optional[Expr]
    body: Stmt


@dataclass(eq=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(eq=True)
class Emit(Stmt):
    call: Expr


@dataclass(eq=True)
class RevertStmt(Stmt):
    call: Expr


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=True)
class LocalVar(Node):
    name: str
    type_ref: TypeRef
    location: Optional[str] = None


@dataclass(eq=True)
class VarDeclStmt(Stmt):
    decls: list[Optional[LocalVar]]
    initializer: Optional[Expr] = None


@dataclass(eq=True)
class Jump(Stmt):
    kind: str  # break | continue | throw | placeholder


@dataclass(eq=True)
class Opaque(Stmt):
    reason: str  # assembly | unparsed


@dataclass(eq=True)
class CatchClause(Node):
    name: str
    params: list["Param"]
    body: Block


@dataclass(eq=True)
class Try(Stmt):
    call: Expr
    returns: list["Param"]
    body: Block
    catches: list[CatchClause]


# --------------------------------------------------------------------------
# declarations


@dataclass(eq=True)
class Param(Node):
    name: str
    type_ref: TypeRef
    indexed: bool = False
    location: Optional[str] = None

    @property
    def named(self) -> bool:
        return bool(self.name)


@dataclass(eq=True)
class StateVarDecl(Node):
    name: str
    type_ref: TypeRef
    visibility: str = "unspecified"
    is_constant: bool = False
    is_immutable: bool = False
    initializer: Optional[Expr] = None

    @property
    def effective_visibility(self) -> str:
        return "internal" if self.visibility == "unspecified" else self.visibility


@dataclass(eq=True)
class ModifierInvocation(Node):
    name: str
    args: Optional[list[Expr]] = None


@dataclass(eq=True)
class FunctionDef(Node):
    name: str
    kind: str  # function | constructor | fallback | receive | modifier
    params: list[Param] = field(default_factory=list)
    returns: list[Param] = field(default_factory=list)
    visibility: str = "unspecified"
    mutability: str = "none"
    body: Optional[Block] = None
    modifiers: list[ModifierInvocation] = field(default_factory=list)
    effective_visibility: str = field(default="unspecified", compare=False)


@dataclass(eq=True)
class EventDef(Node):
    name: str
    params: list[Param]
    anonymous: bool = False


@dataclass(eq=True)
class StructDef(Node):
    name: str
    fields: list[Param]


@dataclass(eq=True)
class EnumDef(Node):
    name: str
    members: list[str]


@dataclass(eq=True)
class UsingDirective(Node):
    library: str
    target: str  # type text or "*"


@dataclass(eq=True)
class ContractDef(Node):
    kind: str  # contract | interface | library
    name: str
    base_names: list[str] = field(default_factory=list)
    state_vars: list[StateVarDecl] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)
    events: list[EventDef] = field(default_factory=list)
    modifiers: list[FunctionDef] = field(default_factory=list)
    using_directives: list[UsingDirective] = field(default_factory=list)
    structs: list[StructDef] = field(default_factory=list)
    enums: list[EnumDef] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    is_abstract: bool = False

    def callables(self) -> list[FunctionDef]:
        return self.functions + self.modifiers


@dataclass
class SourceUnit:
    file_id: str
    pragmas: list[tuple[str, str]] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    contracts: list[ContractDef] = field(default_factory=list)
    free_functions: list[FunctionDef] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    raw_line_count: int = 0
    sloc: int = 0
    code_lines: frozenset = field(default_factory=frozenset, repr=False, compare=False)

    @property
    def parse_ok(self) -> bool:
        return not any(d.severity == "error" and not d.recovered for d in self.diagnostics)

    @property
    def solidity_versions(self) -> list[str]:
        return [body for name, body in self.pragmas if name == "solidity"]

    def contract(self, name: str) -> ContractDef:
        for c in self.contracts:
            if c.name == name:
                return c
        raise KeyError(name)
