"""Fault-tolerant recursive-descent parser for Solidity 0.4 - 0.8 sources.

The parser accepts the syntactic union of the compiler generations: the
``emit`` and ``constructor`` keywords are optional, ``var`` and
``unchecked`` are accepted, old-style same-name constructors are recognised.
Inline assembly is kept as an opaque statement. On a syntax error the parser
records a diagnostic, skips to the next ``;`` or brace boundary and keeps
going, so a :class:`SourceUnit` is always returned.
"""

from __future__ import annotations

import re
from typing import Callable, Optional, TypeVar

from .lexer import Diagnostic, Span, Token, TokenKind, is_elementary_type_name, join_spans, lex
from .nodes import (
    ASSIGNMENT_OPS,
    OPAQUE_TYPE,
    Assignment,
    Binary,
    Block,
    Call,
    CatchClause,
    Conditional,
    ContractDef,
    Emit,
    EnumDef,
    EventDef,
    Expr,
    ExprStmt,
    FunctionDef,
    Identifier,
    If,
    IndexAccess,
    Jump,
    Literal,
    LocalVar,
    Loop,
    MemberAccess,
    ModifierInvocation,
    NewExpr,
    Opaque,
    Param,
    Return,
    RevertStmt,
    SourceUnit,
    StateVarDecl,
    Stmt,
    StructDef,
    Try,
    TupleExpr,
    TypeRef,
    Unary,
    UsingDirective,
    VarDeclStmt,
    elementary,
)

__all__ = ["ParseError", "effective_visibility", "parse", "pragma_allows_pre_050"]

T = TypeVar("T")

VISIBILITIES = ("public", "external", "internal", "private")
MUTABILITIES = ("view", "pure", "payable", "constant")
LOCATIONS = ("memory", "storage", "calldata")
UNITS = frozenset(
    "wei gwei szabo finney ether seconds minutes hours days weeks years".split()
)

# binary operator precedence, loosest first
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("|",),
    ("^",),
    ("&",),
    ("<<", ">>", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
    ("**",),
]


class ParseError(Exception):
    def __init__(self, message: str, token: Optional[Token]) -> None:
        super().__init__(message)
        self.token = token


class _Parser:
    def __init__(self, source: str, file_id: str) -> None:
        self.source = source
        self.file_id = file_id
        all_tokens, self.diagnostics = lex(source, file_id)
        self.all_tokens = all_tokens
        self.toks = [t for t in all_tokens if t.kind is not TokenKind.COMMENT]
        self.pos = 0
        self.contract_name = ""

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def text(self, k: int = 0) -> str:
        tok = self.peek(k)
        return tok.lexeme if tok is not None else ""

    def at(self, *lexemes: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.lexeme in lexemes and tok.kind not in (TokenKind.STRING, TokenKind.PRAGMA_BODY)

    def at_name(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind is TokenKind.IDENTIFIER

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of file", self.last())
        self.pos += 1
        return tok

    def accept(self, lexeme: str) -> Optional[Token]:
        if self.at(lexeme):
            return self.advance()
        return None

    def expect(self, lexeme: str) -> Token:
        if self.at(lexeme):
            return self.advance()
        tok = self.peek()
        found = "end of file" if tok is None else repr(tok.lexeme)
        raise ParseError(f"expected {lexeme!r}, found {found}", tok or self.last())

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.IDENTIFIER:
            return self.advance()
        found = "end of file" if tok is None else repr(tok.lexeme)
        raise ParseError(f"expected identifier, found {found}", tok or self.last())

    def last(self) -> Optional[Token]:
        return self.toks[self.pos - 1] if self.pos > 0 else (self.toks[0] if self.toks else None)

    def span_from(self, start: Token) -> Span:
        end = self.toks[self.pos - 1] if self.pos > 0 else start
        if end.offset < start.offset:
            end = start
        return join_spans(start.span, end.span)

    def error(self, message: str, tok: Optional[Token], recovered: bool) -> None:
        span = tok.span if tok is not None else Span(self.file_id, 1, 1, 1, 1)
        self.diagnostics.append(Diagnostic("error", span, message, recovered))

    def speculate(self, fn: Callable[[], T]) -> Optional[T]:
        """Run ``fn``; on failure restore the position and return None."""
        saved, n_diag = self.pos, len(self.diagnostics)
        try:
            return fn()
        except ParseError:
            self.pos = saved
            del self.diagnostics[n_diag:]
            return None

    def skip_region(self) -> None:
        """Skip to the next ';' (consumed) or brace boundary at nesting depth zero."""
        start = self.pos
        depth = 0
        while self.peek() is not None:
            lex_ = self.text()
            kind = self.peek().kind
            if kind in (TokenKind.STRING, TokenKind.PRAGMA_BODY):
                self.pos += 1
                continue
            if lex_ in ("(", "["):
                depth += 1
            elif lex_ in (")", "]"):
                depth = max(0, depth - 1)
            elif lex_ == "{":
                try:
                    self.skip_braces()
                except ParseError:
                    return
                if depth == 0:
                    return
                continue
            elif lex_ == "}":
                if self.pos == start:
                    self.pos += 1
                return
            elif lex_ == ";" and depth == 0:
                self.pos += 1
                return
            self.pos += 1

    def skip_braces(self) -> None:
        """Consume a balanced ``{ ... }`` group starting at the current token."""
        depth = 0
        while self.peek() is not None:
            tok = self.advance()
            if tok.kind in (TokenKind.STRING, TokenKind.PRAGMA_BODY):
                continue
            if tok.lexeme == "{":
                depth += 1
            elif tok.lexeme == "}":
                depth -= 1
                if depth == 0:
                    return
        raise ParseError("unexpected end of file, missing '}'", self.last())

    # -- source unit -------------------------------------------------------

    def parse_unit(self) -> SourceUnit:
        unit = SourceUnit(self.file_id)
        while self.peek() is not None:
            start = self.pos
            try:
                self.source_unit_item(unit)
            except ParseError as exc:
                self.error(str(exc), exc.token, recovered=False)
                self.pos = start
                self.skip_region()
                if self.pos == start:
                    self.pos += 1
        return unit

    def source_unit_item(self, unit: SourceUnit) -> None:
        tok = self.peek()
        word = tok.lexeme
        if word == "pragma":
            self.advance()
            name = self.advance().lexeme if self.peek() is not None else ""
            body = ""
            if self.peek() is not None and self.peek().kind is TokenKind.PRAGMA_BODY:
                body = self.advance().lexeme
            self.expect(";")
            unit.pragmas.append((name, body))
        elif word == "import":
            self.advance()
            path = ""
            while self.peek() is not None and not self.at(";"):
                t = self.advance()
                if t.kind is TokenKind.STRING and not path:
                    path = t.lexeme[1:-1]
            self.expect(";")
            unit.imports.append(path)
        elif word in ("contract", "interface", "library", "abstract"):
            unit.contracts.append(self.contract_def())
        elif word == "function":
            unit.free_functions.append(self.function_def())
        elif word == "struct":
            self.struct_def()
        elif word == "enum":
            self.enum_def()
        elif word == "event":
            self.event_def()
        elif word == "using":
            self.using_directive()
        elif self.is_error_def() or self.is_value_type_def():
            self.skip_region()
        elif word == ";":
            self.advance()
        else:
            # file-level constant
            self.state_var_decl()

    def is_error_def(self) -> bool:
        return self.text() == "error" and self.at_name(1) and self.text(2) == "("

    def is_value_type_def(self) -> bool:
        return self.text() == "type" and self.at_name(1) and self.text(2) == "is"

    # -- contracts ---------------------------------------------------------

    def contract_def(self) -> ContractDef:
        start = self.peek()
        is_abstract = bool(self.accept("abstract"))
        kind = self.advance().lexeme
        if kind not in ("contract", "interface", "library"):
            raise ParseError(f"expected contract kind, found {kind!r}", self.last())
        name = self.expect_name().lexeme
        contract = ContractDef(span=start.span, kind=kind, name=name, is_abstract=is_abstract)
        if self.accept("is"):
            while True:
                contract.base_names.append(self.path())
                if self.at("("):
                    self.call_args()
                if not self.accept(","):
                    break
        self.expect("{")
        self.contract_name = name
        while not self.at("}"):
            if self.peek() is None:
                self.error("unexpected end of file, missing '}'", self.last(), recovered=False)
                contract.span = self.span_from(start)
                return contract
            member_start = self.pos
            try:
                self.contract_member(contract)
            except ParseError as exc:
                self.error(str(exc), exc.token, recovered=False)
                self.pos = member_start
                self.skip_region()
        self.expect("}")
        self.contract_name = ""
        contract.span = self.span_from(start)
        return contract

    def contract_member(self, contract: ContractDef) -> None:
        word = self.text()
        if word == "function":
            fn = self.function_def()
            contract.functions.append(fn)
        elif word in ("constructor", "fallback", "receive") and self.text(1) == "(":
            contract.functions.append(self.function_def())
        elif word == "modifier":
            contract.modifiers.append(self.function_def())
        elif word == "event":
            contract.events.append(self.event_def())
        elif word == "struct":
            contract.structs.append(self.struct_def())
        elif word == "enum":
            contract.enums.append(self.enum_def())
        elif word == "using":
            contract.using_directives.append(self.using_directive())
        elif self.is_error_def():
            self.advance()
            contract.errors.append(self.advance().lexeme)
            self.skip_region()
        elif self.is_value_type_def():
            self.skip_region()
        elif word == ";":
            self.advance()
        else:
            contract.state_vars.append(self.state_var_decl())

    def path(self) -> str:
        parts = [self.expect_name().lexeme]
        while self.at(".") and self.at_name(1):
            self.advance()
            parts.append(self.advance().lexeme)
        return ".".join(parts)

    def state_var_decl(self) -> StateVarDecl:
        start = self.peek()
        type_ref = self.type_name()
        var = StateVarDecl(span=start.span, name="", type_ref=type_ref)
        while True:
            if self.at(*VISIBILITIES):
                var.visibility = self.advance().lexeme
            elif self.accept("constant"):
                var.is_constant = True
            elif self.accept("immutable"):
                var.is_immutable = True
            elif self.accept("override"):
                if self.at("("):
                    self.paren_group()
            elif self.at("transient"):
                self.advance()
            else:
                break
        var.name = self.expect_name().lexeme
        if self.accept("="):
            var.initializer = self.expression()
        self.expect(";")
        var.span = self.span_from(start)
        return var

    def paren_group(self) -> None:
        depth = 0
        while True:
            tok = self.advance()
            if tok.lexeme == "(":
                depth += 1
            elif tok.lexeme == ")":
                depth -= 1
                if depth == 0:
                    return

    def function_def(self) -> FunctionDef:
        start = self.advance()
        keyword = start.lexeme
        name = ""
        if keyword == "function":
            if not self.at("("):
                tok = self.advance()
                if tok.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                    raise ParseError(f"expected function name, found {tok.lexeme!r}", tok)
                name = tok.lexeme
            if name in ("fallback", "receive") and self.contract_name:
                kind = "function"
            elif not name:
                kind = "fallback"
            elif name == self.contract_name:
                kind = "constructor"
            else:
                kind = "function"
        elif keyword == "modifier":
            kind = "modifier"
            name = self.expect_name().lexeme
        else:
            kind = keyword
        fn = FunctionDef(span=start.span, name=name, kind=kind)
        if self.at("("):
            fn.params = self.param_list()
        elif kind != "modifier":
            raise ParseError(f"expected '(', found {self.text()!r}", self.peek() or self.last())
        while True:
            if self.at(*VISIBILITIES):
                fn.visibility = self.advance().lexeme
            elif self.at(*MUTABILITIES):
                fn.mutability = self.advance().lexeme
            elif self.accept("virtual"):
                pass
            elif self.accept("override"):
                if self.at("("):
                    self.paren_group()
            elif self.accept("returns"):
                fn.returns = self.param_list()
            elif self.at_name():
                mstart = self.peek()
                mname = self.path()
                args = self.call_args()[0] if self.at("(") else None
                fn.modifiers.append(ModifierInvocation(span=self.span_from(mstart), name=mname, args=args))
            else:
                break
        if self.at("{"):
            fn.body = self.block()
        else:
            self.expect(";")
        fn.span = self.span_from(start)
        return fn

    def param_list(self, allow_indexed: bool = False) -> list[Param]:
        self.expect("(")
        params: list[Param] = []
        if self.accept(")"):
            return params
        while True:
            pstart = self.peek()
            type_ref = self.type_name()
            param = Param(span=pstart.span, name="", type_ref=type_ref)
            while True:
                if self.at(*LOCATIONS):
                    param.location = self.advance().lexeme
                elif self.at("indexed"):
                    tok = self.advance()
                    if not allow_indexed:
                        self.error("'indexed' is only allowed on event parameters", tok, recovered=True)
                    param.indexed = True
                else:
                    break
            if self.at_name():
                param.name = self.advance().lexeme
            param.span = self.span_from(pstart)
            params.append(param)
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def event_def(self) -> EventDef:
        start = self.advance()
        name = self.expect_name().lexeme
        params = self.param_list(allow_indexed=True)
        anonymous = bool(self.accept("anonymous"))
        self.expect(";")
        return EventDef(span=self.span_from(start), name=name, params=params, anonymous=anonymous)

    def struct_def(self) -> StructDef:
        start = self.advance()
        name = self.expect_name().lexeme
        self.expect("{")
        fields: list[Param] = []
        while not self.at("}"):
            fstart = self.peek()
            if fstart is None:
                raise ParseError("unexpected end of file in struct", self.last())
            type_ref = self.type_name()
            fname = self.expect_name().lexeme
            self.expect(";")
            fields.append(Param(span=self.span_from(fstart), name=fname, type_ref=type_ref))
        self.expect("}")
        return StructDef(span=self.span_from(start), name=name, fields=fields)

    def enum_def(self) -> EnumDef:
        start = self.advance()
        name = self.expect_name().lexeme
        self.expect("{")
        members: list[str] = []
        while not self.at("}"):
            members.append(self.expect_name().lexeme)
            if not self.accept(","):
                break
        self.expect("}")
        return EnumDef(span=self.span_from(start), name=name, members=members)

    def using_directive(self) -> UsingDirective:
        start = self.advance()
        if self.at("{"):
            self.advance()
            names = []
            while not self.at("}"):
                names.append(self.path())
                if self.accept("as"):
                    self.advance()
                if not self.accept(","):
                    break
            self.expect("}")
            library = "{" + ", ".join(names) + "}"
        else:
            library = self.path()
        self.expect("for")
        if self.accept("*"):
            target = "*"
        else:
            target = str(self.type_name())
        if self.text() == "global":
            self.advance()
        self.expect(";")
        return UsingDirective(span=self.span_from(start), library=library, target=target)

    # -- types -------------------------------------------------------------

    def type_name(self) -> TypeRef:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected type name, found end of file", self.last())
        word = tok.lexeme
        if word == "mapping":
            self.advance()
            self.expect("(")
            key = self.type_name()
            if self.at_name():
                self.advance()
            self.expect("=>")
            value = self.type_name()
            if self.at_name():
                self.advance()
            self.expect(")")
            base = TypeRef("mapping", name="mapping", key=key, value=value)
        elif word == "function" and self.text(1) == "(":
            self.advance()
            self.param_list()
            while self.at(*VISIBILITIES) or self.at(*MUTABILITIES):
                self.advance()
            if self.accept("returns"):
                self.param_list()
            base = TypeRef("function_type", name="function")
        elif word == "var":
            self.advance()
            base = OPAQUE_TYPE
        elif tok.kind is TokenKind.KEYWORD and is_elementary_type_name(word):
            self.advance()
            if word == "address" and self.at("payable"):
                self.advance()
            base = elementary(word)
        elif tok.kind is TokenKind.IDENTIFIER:
            base = TypeRef("user_defined", name=self.path())
        else:
            raise ParseError(f"expected type name, found {word!r}", tok)
        while self.at("["):
            self.advance()
            length = None
            if not self.at("]"):
                lstart = self.pos
                self.expression()
                length = " ".join(t.lexeme for t in self.toks[lstart:self.pos])
            self.expect("]")
            base = TypeRef("array", name="array", base=base, length=length)
        return base

    # -- statements --------------------------------------------------------

    def block(self, unchecked: bool = False) -> Block:
        start = self.expect("{")
        statements: list[Stmt] = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unexpected end of file, missing '}'", self.last())
            statements.append(self.statement_recovering())
        self.expect("}")
        return Block(span=self.span_from(start), statements=statements, unchecked=unchecked)

    def statement_recovering(self) -> Stmt:
        start = self.pos
        try:
            return self.statement()
        except ParseError as exc:
            if start >= len(self.toks):
                raise
            self.error(str(exc), exc.token, recovered=True)
            self.pos = start
            self.skip_region()
            if self.pos == start:
                self.pos += 1
            first = self.toks[start]
            return Opaque(span=self.span_from(first), reason="unparsed")

    def statement(self) -> Stmt:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of file, expected a statement", self.last())
        word = tok.lexeme
        if tok.kind in (TokenKind.STRING, TokenKind.NUMBER):
            return self.simple_statement()
        if word == "{":
            return self.block()
        if word == "if":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement_recovering()
            else_ = self.statement_recovering() if self.accept("else") else None
            return If(span=self.span_from(tok), condition=cond, then=then, else_=else_)
        if word == "for":
            self.advance()
            self.expect("(")
            init = None if self.accept(";") else self.simple_statement()
            cond = None
            if not self.at(";"):
                cond = self.expression()
            self.expect(";")
            post = None if self.at(")") else self.expression()
            self.expect(")")
            body = self.statement_recovering()
            return Loop(span=self.span_from(tok), kind="for", init=init, condition=cond, post=post, body=body)
        if word == "while":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            body = self.statement_recovering()
            return Loop(span=self.span_from(tok), kind="while", init=None, condition=cond, post=None, body=body)
        if word == "do":
            self.advance()
            body = self.statement_recovering()
            self.expect("while")
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.expect(";")
            return Loop(span=self.span_from(tok), kind="do-while", init=None, condition=cond, post=None, body=body)
        if word == "return":
            self.advance()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return Return(span=self.span_from(tok), value=value)
        if word == "emit":
            self.advance()
            call = self.expression()
            self.expect(";")
            return Emit(span=self.span_from(tok), call=call)
        if word in ("break", "continue", "throw"):
            self.advance()
            self.expect(";")
            return Jump(span=self.span_from(tok), kind=word)
        if word == "_" and self.text(1) == ";":
            self.advance()
            self.advance()
            return Jump(span=self.span_from(tok), kind="placeholder")
        if word == "unchecked" and self.text(1) == "{":
            self.advance()
            inner = self.block(unchecked=True)
            inner.span = self.span_from(tok)
            return inner
        if word == "assembly":
            self.advance()
            if self.peek() is not None and self.peek().kind is TokenKind.STRING:
                self.advance()
            if self.at("("):
                self.paren_group()
            if not self.at("{"):
                raise ParseError("expected '{' after assembly", self.peek() or self.last())
            self.skip_braces()
            return Opaque(span=self.span_from(tok), reason="assembly")
        if word == "try":
            return self.try_statement()
        if word == "revert" and self.at_name(1):
            self.advance()
            call = self.expression()
            self.expect(";")
            return RevertStmt(span=self.span_from(tok), call=call)
        return self.simple_statement()

    def try_statement(self) -> Try:
        start = self.advance()
        call = self.expression()
        returns: list[Param] = []
        if self.accept("returns"):
            returns = self.param_list()
        body = self.block()
        catches: list[CatchClause] = []
        while self.at("catch"):
            cstart = self.advance()
            name = self.advance().lexeme if self.at_name() else ""
            params = self.param_list() if self.at("(") else []
            cbody = self.block()
            catches.append(CatchClause(span=self.span_from(cstart), name=name, params=params, body=cbody))
        return Try(span=self.span_from(start), call=call, returns=returns, body=body, catches=catches)

    def simple_statement(self) -> Stmt:
        """Variable declaration or expression statement, including the ';'."""
        start = self.peek()
        decl = self.speculate(self.var_decl_statement)
        if decl is not None:
            return decl
        expr = self.expression()
        self.expect(";")
        return ExprStmt(span=self.span_from(start), expr=expr)

    def var_decl_statement(self) -> VarDeclStmt:
        start = self.peek()
        if self.at("("):
            decls = self.tuple_decls()
            self.expect("=")
            init = self.expression()
        elif self.at("var") and self.text(1) == "(":
            self.advance()
            self.expect("(")
            decls = []
            while not self.at(")"):
                if self.at(","):
                    decls.append(None)
                else:
                    t = self.expect_name()
                    decls.append(LocalVar(span=t.span, name=t.lexeme, type_ref=OPAQUE_TYPE))
                if not self.accept(","):
                    break
            self.expect(")")
            self.expect("=")
            init = self.expression()
        else:
            decls = [self.local_var()]
            init = self.expression() if self.accept("=") else None
        self.expect(";")
        return VarDeclStmt(span=self.span_from(start), decls=decls, initializer=init)

    def local_var(self) -> LocalVar:
        start = self.peek()
        type_ref = self.type_name()
        location = self.advance().lexeme if self.at(*LOCATIONS) else None
        name = self.expect_name().lexeme
        return LocalVar(span=self.span_from(start), name=name, type_ref=type_ref, location=location)

    def tuple_decls(self) -> list[Optional[LocalVar]]:
        self.expect("(")
        decls: list[Optional[LocalVar]] = []
        while True:
            if self.at(",") or self.at(")"):
                decls.append(None)
            else:
                decls.append(self.local_var())
            if not self.accept(","):
                break
        self.expect(")")
        if not any(decls):
            raise ParseError("not a declaration", self.peek())
        return decls

    # -- expressions -------------------------------------------------------

    def expression(self) -> Expr:
        start = self.peek()
        lhs = self.conditional()
        if self.at(*ASSIGNMENT_OPS):
            op = self.advance().lexeme
            rhs = self.expression()
            return Assignment(span=self.span_from(start), op=op, lhs=lhs, rhs=rhs)
        return lhs

    def conditional(self) -> Expr:
        start = self.peek()
        cond = self.binary(0)
        if self.accept("?"):
            a = self.expression()
            self.expect(":")
            b = self.expression()
            return Conditional(span=self.span_from(start), condition=cond, if_true=a, if_false=b)
        return cond

    def binary(self, level: int) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        start = self.peek()
        left = self.binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.at(*ops):
            op = self.advance().lexeme
            # exponentiation is right-associative
            right = self.binary(level) if op == "**" else self.binary(level + 1)
            left = Binary(span=self.span_from(start), op=op, left=left, right=right)
        return left

    def unary(self) -> Expr:
        start = self.peek()
        if self.at("++", "--", "!", "-", "~", "+", "delete"):
            op = self.advance().lexeme
            operand = self.unary()
            return Unary(span=self.span_from(start), op=op, operand=operand, prefix=True)
        return self.postfix()

    def postfix(self) -> Expr:
        start = self.peek()
        expr = self.primary()
        while True:
            if self.at("."):
                self.advance()
                tok = self.advance()
                if tok.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                    raise ParseError(f"expected member name, found {tok.lexeme!r}", tok)
                expr = MemberAccess(span=self.span_from(start), base=expr, member=tok.lexeme)
            elif self.at("["):
                self.advance()
                index = end = None
                is_slice = False
                if not self.at("]") and not self.at(":"):
                    index = self.expression()
                if self.accept(":"):
                    is_slice = True
                    if not self.at("]"):
                        end = self.expression()
                self.expect("]")
                expr = IndexAccess(span=self.span_from(start), base=expr, index=index, end=end, is_slice=is_slice)
            elif self.at("("):
                args, names = self.call_args()
                expr = Call(span=self.span_from(start), callee=expr, args=args, arg_names=names)
            elif self.at("{") and self.at_name(1) and self.text(2) == ":":
                options = self.call_options()
                expr = Call(span=self.span_from(start), callee=expr, args=[], options=options)
                if self.at("("):
                    args, names = self.call_args()
                    expr.args, expr.arg_names = args, names
                    expr.span = self.span_from(start)
            elif self.at("++", "--"):
                op = self.advance().lexeme
                expr = Unary(span=self.span_from(start), op=op, operand=expr, prefix=False)
            else:
                return expr

    def call_options(self) -> list[tuple[str, Expr]]:
        self.expect("{")
        options = []
        while not self.at("}"):
            name = self.expect_name().lexeme
            self.expect(":")
            options.append((name, self.expression()))
            if not self.accept(","):
                break
        self.expect("}")
        return options

    def call_args(self) -> tuple[list[Expr], Optional[list[str]]]:
        self.expect("(")
        args: list[Expr] = []
        names: Optional[list[str]] = None
        if self.at("{"):
            self.advance()
            names = []
            while not self.at("}"):
                names.append(self.expect_name().lexeme)
                self.expect(":")
                args.append(self.expression())
                if not self.accept(","):
                    break
            self.expect("}")
        elif not self.at(")"):
            while True:
                args.append(self.expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return args, names

    def primary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of file in expression", self.last())
        kind, word = tok.kind, tok.lexeme
        if kind is TokenKind.NUMBER:
            self.advance()
            unit = None
            if self.at_name() and self.text() in UNITS:
                unit = self.advance().lexeme
            return Literal(span=self.span_from(tok), kind="number", text=word, unit=unit)
        if kind is TokenKind.STRING:
            parts = [self.advance().lexeme]
            while self.peek() is not None and self.peek().kind is TokenKind.STRING:
                parts.append(self.advance().lexeme)
            lit_kind = "hex" if parts[0].startswith("hex") else "string"
            return Literal(span=self.span_from(tok), kind=lit_kind, text=" ".join(parts))
        if word in ("true", "false"):
            self.advance()
            return Literal(span=tok.span, kind="bool", text=word)
        if word == "(":
            self.advance()
            items: list[Optional[Expr]] = []
            saw_comma = False
            while True:
                if self.at(",") or self.at(")"):
                    items.append(None)
                else:
                    items.append(self.expression())
                if not self.accept(","):
                    break
                saw_comma = True
            self.expect(")")
            if not saw_comma and items[0] is not None:
                return items[0]
            return TupleExpr(span=self.span_from(tok), items=items)
        if word == "[":
            self.advance()
            items = []
            while not self.at("]"):
                items.append(self.expression())
                if not self.accept(","):
                    break
            self.expect("]")
            return TupleExpr(span=self.span_from(tok), items=items, is_array=True)
        if word == "new":
            self.advance()
            type_ref = self.type_name()
            return NewExpr(span=self.span_from(tok), type_ref=type_ref)
        if kind is TokenKind.IDENTIFIER or (kind is TokenKind.KEYWORD and is_elementary_type_name(word)):
            self.advance()
            if word == "address" and self.at("payable"):
                self.advance()
            return Identifier(span=tok.span, name=word)
        if word == "payable" and self.text(1) == "(":
            self.advance()
            return Identifier(span=tok.span, name=word)
        raise ParseError(f"unexpected token {word!r} in expression", tok)


def parse(source: str, file_id: str = "<input>") -> SourceUnit:
    """Parse ``source`` into a :class:`SourceUnit`; never raises on bad input."""
    parser = _Parser(source, file_id)
    try:
        unit = parser.parse_unit()
    except RecursionError:
        unit = SourceUnit(file_id)
        span = Span(file_id, 1, 1, 1, 1)
        parser.diagnostics.append(Diagnostic("error", span, "input nested too deeply", recovered=False))
    unit.diagnostics = parser.diagnostics
    unit.raw_line_count = _raw_line_count(source)
    unit.code_lines = frozenset(
        line
        for tok in parser.all_tokens
        if tok.kind is not TokenKind.COMMENT
        for line in range(tok.span.start_line, tok.span.end_line + 1)
    )
    unit.sloc = len(unit.code_lines)
    versions = unit.solidity_versions
    for contract in unit.contracts:
        for fn in contract.functions:
            fn.effective_visibility = effective_visibility(fn, versions, unit.diagnostics)
    for fn in unit.free_functions:
        fn.effective_visibility = "internal"
    return unit


def _raw_line_count(source: str) -> int:
    if not source:
        return 0
    return source.count("\n") + (0 if source.endswith("\n") else 1)


# --------------------------------------------------------------------------
# pragma version handling

_COMPARATOR_RE = re.compile(r"(\^|~|>=|<=|>|<|=)?\s*v?(\d+)(?:\.(\d+|[xX*]))?(?:\.(\d+|[xX*]))?", re.ASCII)


def _satisfies_comparator(version: tuple[int, int, int], op: str, parts: list[Optional[str]]) -> bool:
    wild = [p is None or not p.isdigit() for p in parts]
    nums = [int(p) if p is not None and p.isdigit() else 0 for p in parts]
    target = tuple(nums)
    if op == "^":
        if nums[0] > 0:
            upper = (nums[0] + 1, 0, 0)
        elif nums[1] > 0 or wild[2]:
            upper = (0, nums[1] + 1, 0)
        else:
            upper = (0, 0, nums[2] + 1)
        return target <= version < upper
    if op == "~":
        return target <= version < (nums[0], nums[1] + 1, 0)
    if op == ">=":
        return version >= target
    if op == ">":
        return version > target
    if op == "<":
        return version < target
    if op == "<=":
        return version <= target
    # exact, honouring wildcards
    return all(w or v == n for v, n, w in zip(version, nums, wild))


def _satisfies(version: tuple[int, int, int], expression: str) -> bool:
    for alternative in expression.split("||"):
        comparators = _COMPARATOR_RE.findall(alternative)
        if not comparators:
            continue
        if all(
            _satisfies_comparator(version, op or "=", [major, minor or None, patch or None])
            for op, major, minor, patch in comparators
        ):
            return True
    return False


_PRE_050 = [(0, minor, patch) for minor in range(1, 5) for patch in range(0, 40)]


def pragma_allows_pre_050(versions: list[str]) -> bool:
    """True when no solidity pragma exists or some 0.4-or-older release satisfies all of them."""
    constraints = [v for v in versions if _COMPARATOR_RE.search(v)]
    if not constraints:
        return True
    return any(all(_satisfies(ver, c) for c in constraints) for ver in _PRE_050)


def effective_visibility(
    fn: FunctionDef, pragma_versions: list[str], diagnostics: Optional[list[Diagnostic]] = None
) -> str:
    """Visibility the compiler would apply to ``fn``.

    An unspecified visibility defaults to public for compilers before 0.5.
    Later compilers reject it, so it stays unspecified and a warning is
    appended to ``diagnostics``. Constructors are exempt from the warning
    because 0.7+ forbids a constructor visibility.
    """
    if fn.visibility != "unspecified":
        return fn.visibility
    if pragma_allows_pre_050(pragma_versions):
        return "public"
    if diagnostics is not None and fn.kind != "constructor":
        label = fn.name or fn.kind
        diagnostics.append(
            Diagnostic("warning", fn.span, f"function '{label}' has no visibility specifier", recovered=True)
        )
    return "unspecified"
