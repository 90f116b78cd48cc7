"""Tokenizer for Solidity source text.

The tokenizer is lossless: concatenating every token lexeme with the
whitespace between tokens reproduces the input exactly. Comments and pragma
bodies are kept as tokens so that SLOC counting and pragma inspection work
from the same stream the parser consumes.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Diagnostic",
    "Span",
    "Token",
    "TokenKind",
    "count_sloc",
    "lex",
    "tokenize",
]


@dataclass(frozen=True, order=True)
class Span:
    """A region of a file; lines and columns are 1-based, end is inclusive."""

    file_id: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "Span") -> bool:
        return (self.start_line, self.start_col) <= (other.start_line, other.start_col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)

    def to_dict(self) -> dict:
        return {
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


def join_spans(first: Span, last: Span) -> Span:
    return Span(first.file_id, first.start_line, first.start_col, last.end_line, last.end_col)


class TokenKind(str, Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    NUMBER = "number"
    STRING = "string"
    PUNCTUATION = "punctuation"
    COMMENT = "comment"
    PRAGMA_BODY = "pragma-body"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span
    offset: int

    @property
    def end_offset(self) -> int:
        return self.offset + len(self.lexeme)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    span: Span
    message: str
    recovered: bool = True

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "message": self.message,
            "recovered": self.recovered,
            **self.span.to_dict(),
        }


KEYWORDS = frozenset(
    """
    abstract anonymous as assembly break calldata catch constant constructor continue
    contract delete do else emit enum event external fallback false for function if
    immutable import indexed interface internal is library mapping memory modifier new
    override payable pragma private public pure receive return returns storage struct
    true try unchecked using var view virtual while throw
    """.split()
)

_ELEMENTARY_RE = re.compile(
    r"(?:bool|address|string|bytes|byte|uint(?:8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128"
    r"|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)?"
    r"|int(?:8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128"
    r"|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)?"
    r"|bytes(?:[1-9]|[12][0-9]|3[0-2])|u?fixed(?:\d+x\d+)?)"
)


def is_elementary_type_name(name: str) -> bool:
    return _ELEMENTARY_RE.fullmatch(name) is not None


_WHITESPACE = " \t\r\n\f\v"
_DIGITS = frozenset("0123456789")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(
    r"0[xX][0-9a-fA-F_]*|(?:[0-9][0-9_]*(?:\.[0-9][0-9_]*)?|\.[0-9][0-9_]*)(?:[eE]-?[0-9][0-9_]*)?"
)
_PUNCT = sorted(
    """>>>= >>> <<= >>= ** == != <= >= && || ++ -- += -= *= /= %= |= &= ^= << >> => -> :=
    { } ( ) [ ] ; , . ? : = + - * / % ! ~ & | ^ < > @""".split(),
    key=len,
    reverse=True,
)


class _Lines:
    def __init__(self, source: str) -> None:
        self.starts = [0] + [m.end() for m in re.finditer("\n", source)]

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.starts, offset) - 1
        return line + 1, offset - self.starts[line] + 1


class _Scanner:
    def __init__(self, source: str, file_id: str) -> None:
        self.src = source
        self.file_id = file_id
        self.lines = _Lines(source)
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []

    def span(self, start: int, end: int) -> Span:
        # end is exclusive; spans are inclusive so back up one character
        sl, sc = self.lines.position(start)
        el, ec = self.lines.position(max(start, end - 1))
        return Span(self.file_id, sl, sc, el, ec)

    def emit(self, kind: TokenKind, start: int, end: int) -> None:
        self.tokens.append(Token(kind, self.src[start:end], self.span(start, end), start))

    def error(self, start: int, end: int, message: str) -> None:
        self.diagnostics.append(Diagnostic("error", self.span(start, end), message, recovered=False))

    def line_end(self, pos: int) -> int:
        nl = self.src.find("\n", pos)
        return len(self.src) if nl < 0 else nl

    def run(self) -> None:
        src, n, pos = self.src, len(self.src), 0
        while pos < n:
            ch = src[pos]
            if ch in _WHITESPACE:
                pos += 1
                continue
            if src.startswith("//", pos):
                end = self.line_end(pos)
                # a trailing \r belongs to the newline, not the comment
                if end > pos and src[end - 1] == "\r":
                    end -= 1
                self.emit(TokenKind.COMMENT, pos, end)
                pos = end
                continue
            if src.startswith("/*", pos):
                close = src.find("*/", pos + 2)
                if close < 0:
                    end = self.line_end(pos)
                    self.emit(TokenKind.COMMENT, pos, end)
                    self.error(pos, end, "unterminated block comment")
                    pos = end
                else:
                    self.emit(TokenKind.COMMENT, pos, close + 2)
                    pos = close + 2
                continue
            m = _IDENT_RE.match(src, pos)
            if m:
                word = m.group()
                if word in ("hex", "unicode") and m.end() < n and src[m.end()] in "\"'":
                    pos = self.string(pos, m.end())
                    continue
                kind = TokenKind.KEYWORD if word in KEYWORDS or is_elementary_type_name(word) else TokenKind.IDENTIFIER
                self.emit(kind, pos, m.end())
                pos = m.end()
                if word == "pragma":
                    pos = self.pragma(pos)
                continue
            if ch in _DIGITS or (ch == "." and pos + 1 < n and src[pos + 1] in _DIGITS):
                m = _NUMBER_RE.match(src, pos)
                self.emit(TokenKind.NUMBER, pos, m.end())
                pos = m.end()
                continue
            if ch in "\"'":
                pos = self.string(pos, pos)
                continue
            for p in _PUNCT:
                if src.startswith(p, pos):
                    self.emit(TokenKind.PUNCTUATION, pos, pos + len(p))
                    pos += len(p)
                    break
            else:
                self.emit(TokenKind.PUNCTUATION, pos, pos + 1)
                self.error(pos, pos + 1, f"unexpected character {ch!r}")
                pos += 1

    def string(self, start: int, quote_pos: int) -> int:
        src, quote = self.src, self.src[quote_pos]
        i = quote_pos + 1
        while i < len(src):
            c = src[i]
            if c == "\\" and i + 1 < len(src) and src[i + 1] != "\n":
                i += 2
                continue
            if c == quote:
                self.emit(TokenKind.STRING, start, i + 1)
                return i + 1
            if c == "\n":
                break
            i += 1
        end = i
        if end > start and src[end - 1] == "\r":
            end -= 1
        self.emit(TokenKind.STRING, start, end)
        self.error(start, end, "unterminated string literal")
        return end

    def pragma(self, pos: int) -> int:
        """Consume `<name> <body>` after the pragma keyword, stopping at ';' or newline."""
        src = self.src
        while pos < len(src) and src[pos] in " \t":
            pos += 1
        m = _IDENT_RE.match(src, pos)
        if not m:
            return pos
        self.emit(TokenKind.IDENTIFIER, pos, m.end())
        pos = m.end()
        while pos < len(src) and src[pos] in " \t":
            pos += 1
        end = pos
        while end < len(src) and src[end] not in ";\n":
            end += 1
        while end > pos and src[end - 1] in _WHITESPACE:
            end -= 1
        if end > pos:
            self.emit(TokenKind.PRAGMA_BODY, pos, end)
        return end


def lex(source: str, file_id: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    """Tokenize and also return lexical diagnostics."""
    scanner = _Scanner(source, file_id)
    scanner.run()
    return scanner.tokens, scanner.diagnostics


def tokenize(source: str, file_id: str = "<input>") -> list[Token]:
    return lex(source, file_id)[0]


def count_sloc(source: str) -> int:
    """Number of lines holding at least one non-comment token."""
    lines: set[int] = set()
    for tok in tokenize(source):
        if tok.kind is TokenKind.COMMENT:
            continue
        lines.update(range(tok.span.start_line, tok.span.end_line + 1))
    return len(lines)
