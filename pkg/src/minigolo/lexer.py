"""Hand-written lexer.

Whitespace and ``#`` comments are skipped; everything else becomes a token
whose ``offset`` points at its first character, so the source can be rebuilt
from lexemes plus the skipped gaps.
"""

from dataclasses import dataclass

from .errors import LexError

KEYWORDS = frozenset({
    "module", "import", "struct", "augment", "local", "function",
    "let", "var", "if", "else", "while", "return",
    "true", "false", "null", "and", "or", "not", "list",
})

# Longest match first.
OPERATORS = ("==", "!=", "<=", ">=", "->", "+", "-", "*", "/", "%", "<", ">", "=")
PUNCTUATION = frozenset("(){}[],:|.")

INT_MAX = 2**31 - 1
LONG_MAX = 2**63 - 1

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\", "0": "\0"}


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int
    offset: int = 0
    value: object = None

    def describe(self):
        if self.kind == "eof":
            return "end of input"
        return f"{self.kind} '{self.lexeme}'"


def _is_ident_start(ch):
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch):
    return ch.isalnum() or ch == "_"


class _Scanner:
    def __init__(self, source):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens = []

    def advance(self, n=1):
        for _ in range(n):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def emit(self, kind, start, line, col, value=None):
        self.tokens.append(Token(kind, self.src[start:self.pos], line, col, start, value))

    def run(self):
        src = self.src
        n = len(src)
        while self.pos < n:
            ch = src[self.pos]
            if ch in " \t\r\n\f":
                self.advance()
            elif ch == "#":
                while self.pos < n and src[self.pos] != "\n":
                    self.advance()
            elif ch.isdigit():
                self.number()
            elif _is_ident_start(ch):
                self.word()
            elif ch == '"':
                self.string()
            else:
                self.symbol()
        self.tokens.append(Token("eof", "", self.line, self.col, self.pos))
        return self.tokens

    def word(self):
        start, line, col = self.pos, self.line, self.col
        while self.pos < len(self.src) and _is_ident_char(self.src[self.pos]):
            self.advance()
        text = self.src[start:self.pos]
        self.emit("keyword" if text in KEYWORDS else "identifier", start, line, col)

    def number(self):
        src = self.src
        start, line, col = self.pos, self.line, self.col

        def digits():
            while self.pos < len(src) and src[self.pos].isdigit():
                self.advance()

        def malformed(why):
            raise LexError(f"malformed numeric literal: {why}", line, col)

        digits()
        kind = "int-literal"
        if self.pos < len(src) and src[self.pos] == "." and \
                self.pos + 1 < len(src) and src[self.pos + 1].isdigit():
            self.advance()
            digits()
            kind = "double-literal"
            if self.pos < len(src) and src[self.pos] in "eE":
                self.advance()
                if self.pos < len(src) and src[self.pos] in "+-":
                    self.advance()
                if self.pos >= len(src) or not src[self.pos].isdigit():
                    malformed("missing exponent digits")
                digits()
        elif src.startswith("_L", self.pos):
            self.advance(2)
            kind = "long-literal"
        if self.pos < len(src) and _is_ident_char(src[self.pos]):
            while self.pos < len(src) and _is_ident_char(src[self.pos]):
                self.advance()
            malformed(repr(src[start:self.pos]))

        text = src[start:self.pos]
        if kind == "double-literal":
            value = float(text)
        elif kind == "long-literal":
            value = int(text[:-2])
            if value > LONG_MAX:
                malformed(f"{text} does not fit in 64 bits")
        else:
            value = int(text)
            if value > INT_MAX:
                malformed(f"{text} does not fit in 32 bits (use the _L suffix)")
        self.emit(kind, start, line, col, value)

    def string(self):
        src = self.src
        start, line, col = self.pos, self.line, self.col
        self.advance()
        chars = []
        while True:
            if self.pos >= len(src) or src[self.pos] == "\n":
                raise LexError("unterminated string literal", line, col)
            ch = src[self.pos]
            if ch == '"':
                self.advance()
                break
            if ch == "\\":
                if self.pos + 1 >= len(src) or src[self.pos + 1] not in _ESCAPES:
                    raise LexError("invalid escape sequence in string literal", self.line, self.col)
                chars.append(_ESCAPES[src[self.pos + 1]])
                self.advance(2)
                continue
            chars.append(ch)
            self.advance()
        self.emit("string-literal", start, line, col, "".join(chars))

    def symbol(self):
        start, line, col = self.pos, self.line, self.col
        for op in OPERATORS:
            if self.src.startswith(op, self.pos):
                self.advance(len(op))
                self.emit("operator", start, line, col)
                return
        if self.src[self.pos] in PUNCTUATION:
            self.advance()
            self.emit("punctuation", start, line, col)
            return
        raise LexError(f"unexpected character {self.src[self.pos]!r}", line, col)


def tokenize(source):
    """Split ``source`` into tokens, ending with exactly one ``eof`` token."""
    return _Scanner(source).run()


def render_tokens(tokens):
    lines = []
    for t in tokens:
        if t.kind == "eof":
            lines.append(f"{t.line}:{t.column} eof")
        else:
            lines.append(f"{t.line}:{t.column} {t.kind} {t.lexeme}")
    return "\n".join(lines) + "\n"
