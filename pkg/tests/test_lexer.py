from hypothesis import given, strategies as st

from gasmet.lexer import Span, TokenKind, count_sloc, lex, tokenize


def kinds(src):
    return [(t.kind, t.lexeme) for t in tokenize(src)]


def test_basic_token_kinds():
    toks = kinds('uint x = 0x1F; // note\nstring s = "a\\"b";')
    assert (TokenKind.KEYWORD, "uint") in toks or (TokenKind.IDENTIFIER, "uint") in toks
    assert (TokenKind.NUMBER, "0x1F") in toks
    assert (TokenKind.COMMENT, "// note") in toks
    assert (TokenKind.STRING, '"a\\"b"') in toks


def test_spans_are_one_based_and_inclusive():
    toks = tokenize("a\n  bcd")
    assert toks[0].span == Span("<input>", 1, 1, 1, 1)
    assert toks[1].span == Span("<input>", 2, 3, 2, 5)


def test_block_comment_spans_lines():
    (tok,) = tokenize("/* one\ntwo */")
    assert tok.kind is TokenKind.COMMENT
    assert (tok.span.start_line, tok.span.end_line) == (1, 2)


def test_pragma_body_is_one_token():
    toks = kinds("pragma solidity >=0.7.0 <0.9.0;")
    assert (TokenKind.PRAGMA_BODY, ">=0.7.0 <0.9.0") in [(k, l.strip()) for k, l in toks]


def test_unterminated_string_is_an_unrecovered_error():
    _, diags = lex('string s = "oops\nuint x;')
    assert diags and diags[0].severity == "error" and not diags[0].recovered


def test_unterminated_block_comment_reports():
    _, diags = lex("/* never closed")
    assert any(d.severity == "error" for d in diags)


def test_count_sloc_ignores_blank_and_comment_lines():
    src = "// header\n\npragma solidity ^0.8.0;\n/* a\n b */\ncontract C {} // tail\n"
    assert count_sloc(src) == 2


@given(st.text(max_size=200))
def test_lexing_is_lossless(src):
    toks, _ = lex(src)
    # every non-whitespace character is covered by exactly one token
    covered = set()
    for t in toks:
        span = range(t.offset, t.end_offset)
        assert not covered.intersection(span)
        covered.update(span)
        assert src[t.offset:t.end_offset] == t.lexeme
    for i, ch in enumerate(src):
        if i not in covered:
            assert ch in " \t\r\n\f\v"
