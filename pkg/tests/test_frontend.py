import re

import pytest
from hypothesis import given, settings, strategies as st

from golo_util import CORPUS, FIB, GOLDEN
from minigolo.errors import LexError, ParseError
from minigolo.lexer import render_tokens, tokenize
from minigolo.parser import Parser, parse, parse_source
from minigolo.syntax import FunctionDecl, If, Return, render_ast

OK_FILES = sorted((CORPUS / "ok").rglob("*.golo"))
BAD_SYNTAX = sorted((CORPUS / "bad-syntax").glob("*.golo"))


def kinds(source):
    return [(t.kind, t.lexeme) for t in tokenize(source)]


def test_int_plus_long_tokens():
    assert kinds("10 + 10_L") == [
        ("int-literal", "10"), ("operator", "+"), ("long-literal", "10_L"), ("eof", "")]


def test_long_literal_payload_excludes_suffix():
    tok = tokenize("120_L")[0]
    assert (tok.kind, tok.lexeme, tok.value) == ("long-literal", "120_L", 120)
    assert len(tokenize("120_L")) == 2


def test_empty_source_is_just_eof():
    assert kinds("") == [("eof", "")]


def test_double_and_string_values():
    toks = tokenize('3.25 "a\\tb\\n"')
    assert toks[0].kind == "double-literal" and toks[0].value == 3.25
    assert toks[1].kind == "string-literal" and toks[1].value == "a\tb\n"


@pytest.mark.parametrize("source, message", [
    ('"abc', "unterminated"),
    ('"ab\ncd"', "unterminated"),
    ("12abc", "malformed"),
    ("2147483648", "32 bits"),
    ("9223372036854775808_L", "64 bits"),
    ("a @ b", "unexpected character"),
])
def test_lex_errors(source, message):
    with pytest.raises(LexError) as info:
        tokenize(source)
    assert message in info.value.message
    assert info.value.line >= 1 and info.value.column >= 1


def test_largest_literals_accepted():
    assert tokenize("2147483647")[0].value == 2**31 - 1
    assert tokenize("9223372036854775807_L")[0].value == 2**63 - 1


def _gaps_are_trivia(source, tokens):
    pos = 0
    for t in tokens:
        gap = source[pos:t.offset]
        stripped = re.sub(r"#[^\n]*", "", gap)
        if stripped.strip():
            return False
        pos = t.offset + len(t.lexeme)
    return True


@pytest.mark.parametrize("path", OK_FILES, ids=lambda p: p.name)
def test_token_positions_and_reconstruction(path):
    source = path.read_text()
    tokens = tokenize(source)
    lines = source.split("\n")
    for t in tokens[:-1]:
        assert source.startswith(t.lexeme, t.offset)
        assert lines[t.line - 1][t.column - 1:].startswith(t.lexeme)
    assert [t.kind for t in tokens].count("eof") == 1
    assert _gaps_are_trivia(source, tokens)


identifiers = st.from_regex(r"[a-z_][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("and", "or", "not", "if", "else", "let", "var", "while", "list",
                        "true", "false", "null", "return", "local", "module", "import",
                        "struct", "augment", "function"))
atoms = st.one_of(
    identifiers,
    st.integers(0, 2**31 - 1).map(str),
    st.integers(0, 2**63 - 1).map(lambda n: f"{n}_L"),
    st.sampled_from(["+", "-", "==", "<=", "->", "(", ")", ":", "|", ",", "[", "]"]),
    st.text(alphabet="abc xyz", max_size=5).map(lambda s: f'"{s}"'),
)
trivia = st.sampled_from([" ", "\n", "  ", " # note\n", "\t"])


@settings(max_examples=200)
@given(st.lists(st.tuples(atoms, trivia), max_size=20))
def test_lexemes_rebuild_source(parts):
    source = "".join(a + t for a, t in parts)
    tokens = tokenize(source)
    assert _gaps_are_trivia(source, tokens)
    assert tokens[-1].kind == "eof"
    assert "".join(t.lexeme for t in tokens) == "".join(a for a, _ in parts)


def test_render_tokens_format():
    assert render_tokens(tokenize("10 + 10_L")) == (
        "1:1 int-literal 10\n1:4 operator +\n1:6 long-literal 10_L\n1:10 eof\n")


# -- parser ----------------------------------------------------------------------

def test_minimal_module():
    mod = parse_source("module m  function f = |n| { return n }")
    assert mod.name == "m"
    assert [f.name for f in mod.functions] == ["f"]
    assert mod.functions[0].params == ["n"]


def test_fib_declaration_shape():
    fn = parse_source(FIB).functions[0]
    assert isinstance(fn, FunctionDecl)
    assert (fn.name, fn.local, fn.params, fn.synthetic) == ("fib", True, ["n"], False)
    assert isinstance(fn.body.stmts[0], If)
    assert isinstance(fn.body.stmts[0].orelse.stmts[0], Return)


def test_unbalanced_block_expects_brace():
    with pytest.raises(ParseError) as info:
        parse_source("module m  function f = |n| {")
    assert "'}'" in info.value.expected


def test_parse_is_deterministic():
    for path in OK_FILES:
        src = path.read_text()
        assert render_ast(parse_source(src)) == render_ast(parse_source(src))


def test_lookahead_never_exceeds_two():
    for path in OK_FILES:
        p = Parser(tokenize(path.read_text()))
        p.module()
        assert p.max_lookahead <= 2


def test_render_ast_examples():
    text = render_ast(parse_source("module m function f = |n| -> n + 1"))
    assert "Binary +\n" in text
    lines = text.splitlines()
    i = next(k for k, line in enumerate(lines) if line.strip() == "Binary +")
    indent = len(lines[i]) - len(lines[i].lstrip())
    assert lines[i + 1] == " " * (indent + 2) + "Reference n"
    assert lines[i + 2] == " " * (indent + 2) + "Literal Int 1"


def test_fib_ast_golden():
    text = render_ast(parse_source(FIB))
    assert text.count("Function fib local") == 1
    assert text == (GOLDEN / "fib.ast").read_text()


def test_operator_precedence():
    text = render_ast(parse_source("module m function f = || -> not a or b and c == d < e + f * -g"))
    order = [line.strip() for line in text.splitlines() if line.strip().startswith(("Binary", "Unary"))]
    assert order == ["Binary or", "Unary not", "Binary and", "Binary ==", "Binary <",
                     "Binary +", "Binary *", "Unary -"]


def test_every_corpus_program_parses():
    for path in OK_FILES:
        parse(tokenize(path.read_text()))


@pytest.mark.parametrize("path", BAD_SYNTAX, ids=lambda p: p.name)
def test_bad_syntax_position_inside_file(path):
    source = path.read_text()
    with pytest.raises((ParseError, LexError)) as info:
        parse_source(source)
    lines = source.split("\n")
    err = info.value
    assert 1 <= err.line <= len(lines)
    assert 1 <= err.column <= len(lines[err.line - 1]) + 1
