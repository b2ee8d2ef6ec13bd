"""Recursive-descent LL(2) parser.

The parser only ever peeks at the current token and the one after it;
``max_lookahead`` records the deepest peek so tests can assert that bound.
"""

from . import syntax as ast
from .errors import ParseError
from .lexer import tokenize

LOOKAHEAD_LIMIT = 2

_COMPARISON = ("<", "<=", ">", ">=")
_EQUALITY = ("==", "!=")
_ADDITIVE = ("+", "-")
_MULTIPLICATIVE = ("*", "/", "%")

_EXPR_START_KINDS = ("int-literal", "long-literal", "double-literal", "string-literal", "identifier")
_EXPR_START_KEYWORDS = ("true", "false", "null", "not", "list")
_EXPR_START_SYMBOLS = ("(", "[", "|", "-", "->")


class Parser:
    def __init__(self, tokens):
        if not tokens or tokens[-1].kind != "eof":
            raise ValueError("token sequence must end with eof")
        self.tokens = tokens
        self.i = 0
        self.max_lookahead = 0

    # -- token helpers -------------------------------------------------

    def peek(self, k=0):
        assert k < LOOKAHEAD_LIMIT, "parser exceeded its lookahead bound"
        self.max_lookahead = max(self.max_lookahead, k + 1)
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, lexeme, k=0):
        t = self.peek(k)
        return t.lexeme == lexeme and t.kind in ("keyword", "operator", "punctuation")

    def next(self):
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, *expected):
        t = self.peek()
        raise ParseError(t.line, t.column, expected, t.describe())

    def expect(self, lexeme):
        if not self.at(lexeme):
            self.fail(f"'{lexeme}'")
        return self.next()

    def ident(self):
        t = self.peek()
        if t.kind != "identifier":
            self.fail("identifier")
        return self.next()

    @staticmethod
    def pos(tok):
        return (tok.line, tok.column)

    # -- declarations --------------------------------------------------

    def module(self):
        start = self.expect("module")
        mod = ast.AstModule(self.qname(), pos=self.pos(start))
        while self.at("import"):
            t = self.next()
            mod.imports.append(self.qname())
            mod.import_positions.append(self.pos(t))
        seen_functions = set()
        seen_structs = set()
        while self.peek().kind != "eof":
            if self.at("struct"):
                st = self.structure()
                self._unique(st.name, seen_structs | seen_functions, st.pos)
                seen_structs.add(st.name)
                mod.structures.append(st)
            elif self.at("augment"):
                mod.augmentations.append(self.augment())
            elif self.at("function") or self.at("local"):
                fn = self.function()
                self._unique(fn.name, seen_structs | seen_functions, fn.pos)
                seen_functions.add(fn.name)
                mod.functions.append(fn)
            else:
                self.fail("'struct'", "'augment'", "'function'", "'local'", "end of input")
        return mod

    def _unique(self, name, seen, pos):
        if name in seen:
            raise ParseError(pos[0], pos[1], [f"a name other than '{name}'"],
                             f"duplicate definition of '{name}'")

    def qname(self):
        parts = [self.ident().lexeme]
        while self.at("."):
            self.next()
            parts.append(self.ident().lexeme)
        return ".".join(parts)

    def structure(self):
        t = self.expect("struct")
        name = self.ident().lexeme
        self.expect("=")
        self.expect("{")
        fields = [self.ident().lexeme]
        while self.at(","):
            self.next()
            f = self.ident()
            if f.lexeme in fields:
                raise ParseError(f.line, f.column, ["a new field name"],
                                 f"duplicate field '{f.lexeme}'")
            fields.append(f.lexeme)
        self.expect("}")
        return ast.StructureDecl(name, fields, self.pos(t))

    def augment(self):
        t = self.expect("augment")
        target = self.qname()
        self.expect("{")
        fns = []
        while not self.at("}"):
            if not (self.at("function") or self.at("local")):
                self.fail("'function'", "'}'")
            fns.append(self.function())
        self.expect("}")
        return ast.AugmentDecl(target, fns, self.pos(t))

    def function(self):
        first = self.peek()
        local = False
        if self.at("local"):
            self.next()
            local = True
        self.expect("function")
        name = self.ident().lexeme
        self.expect("=")
        lam = self.lambda_()
        return ast.FunctionDecl(name, local, lam.params, lam.body, self.pos(first))

    def lambda_(self):
        start = self.peek()
        params = []
        if self.at("->"):
            # `-> expr` shorthand for a parameterless lambda
            pass
        else:
            self.expect("|")
            if not self.at("|"):
                params.append(self._param(params))
                while self.at(","):
                    self.next()
                    params.append(self._param(params))
            self.expect("|")
        if self.at("->"):
            arrow = self.next()
            expr = self.expression()
            body = ast.Block([ast.Return(expr, self.pos(arrow))], self.pos(arrow))
            return ast.Lambda(params, body, self.pos(start), expression_bodied=True)
        if self.at("{"):
            return ast.Lambda(params, self.block(), self.pos(start))
        self.fail("'{'", "'->'")

    def _param(self, seen):
        t = self.ident()
        if t.lexeme in seen:
            raise ParseError(t.line, t.column, ["a new parameter name"],
                             f"duplicate parameter '{t.lexeme}'")
        return t.lexeme

    # -- statements ----------------------------------------------------

    def block(self):
        t = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self.fail("'}'")
            stmts.append(self.statement())
        self.next()
        return ast.Block(stmts, self.pos(t))

    def statement(self):
        t = self.peek()
        p = self.pos(t)
        if self.at("let") or self.at("var"):
            self.next()
            name = self.ident().lexeme
            self.expect("=")
            cls = ast.Let if t.lexeme == "let" else ast.Var
            return cls(name, self.expression(), p)
        if t.kind == "identifier" and self.at("=", 1):
            self.next()
            self.next()
            return ast.Assign(t.lexeme, self.expression(), p)
        if self.at("if"):
            return self.if_statement()
        if self.at("while"):
            self.next()
            cond = self.expression()
            return ast.While(cond, self.block(), p)
        if self.at("return"):
            self.next()
            expr = self.expression() if self._starts_expression() else None
            return ast.Return(expr, p)
        return ast.ExprStmt(self.expression(), p)

    def if_statement(self):
        t = self.expect("if")
        cond = self.expression()
        then = self.block()
        orelse = None
        if self.at("else"):
            self.next()
            if self.at("if"):
                orelse = self.if_statement()
            elif self.at("{"):
                orelse = self.block()
            else:
                self.fail("'{'", "'if'")
        return ast.If(cond, then, orelse, self.pos(t))

    def _starts_expression(self):
        t = self.peek()
        if t.kind in _EXPR_START_KINDS:
            return True
        if t.kind == "keyword":
            return t.lexeme in _EXPR_START_KEYWORDS
        return t.kind in ("operator", "punctuation") and t.lexeme in _EXPR_START_SYMBOLS

    # -- expressions ---------------------------------------------------

    def expression(self):
        return self.or_expr()

    def _binary_level(self, operators, operand):
        lhs = operand()
        while self.peek().kind in ("operator", "keyword") and self.peek().lexeme in operators:
            t = self.next()
            lhs = ast.Binary(t.lexeme, lhs, operand(), self.pos(t))
        return lhs

    def or_expr(self):
        return self._binary_level(("or",), self.and_expr)

    def and_expr(self):
        return self._binary_level(("and",), self.equality)

    def equality(self):
        return self._binary_level(_EQUALITY, self.comparison)

    def comparison(self):
        return self._binary_level(_COMPARISON, self.additive)

    def additive(self):
        return self._binary_level(_ADDITIVE, self.multiplicative)

    def multiplicative(self):
        return self._binary_level(_MULTIPLICATIVE, self.unary)

    def unary(self):
        if self.at("-") or self.at("not"):
            t = self.next()
            return ast.Unary(t.lexeme, self.unary(), self.pos(t))
        return self.postfix()

    def postfix(self):
        expr = self.primary()
        while self.at(":"):
            colon = self.next()
            name = self.ident().lexeme
            self.expect("(")
            args = self.arguments(")")
            expr = ast.MethodCall(expr, name, args, self.pos(colon))
        return expr

    def arguments(self, closer):
        args = []
        if not self.at(closer):
            args.append(self.expression())
            while self.at(","):
                self.next()
                args.append(self.expression())
        self.expect(closer)
        return args

    def primary(self):
        t = self.peek()
        p = self.pos(t)
        kind = t.kind
        if kind == "int-literal":
            self.next()
            return ast.Literal("Int", t.value, p)
        if kind == "long-literal":
            self.next()
            return ast.Literal("Long", t.value, p)
        if kind == "double-literal":
            self.next()
            return ast.Literal("Double", t.value, p)
        if kind == "string-literal":
            self.next()
            return ast.Literal("Str", t.value, p)
        if kind == "identifier":
            self.next()
            if self.at("("):
                self.next()
                return ast.Call(t.lexeme, self.arguments(")"), p)
            return ast.Reference(t.lexeme, p)
        if kind == "keyword":
            if t.lexeme in ("true", "false"):
                self.next()
                return ast.Literal("Bool", t.lexeme == "true", p)
            if t.lexeme == "null":
                self.next()
                return ast.Literal("Null", None, p)
            if t.lexeme == "list":
                self.next()
                self.expect("[")
                return ast.ListLit(self.arguments("]"), p)
        if self.at("|") or self.at("->"):
            return self.lambda_()
        if self.at("("):
            self.next()
            inner = self.expression()
            self.expect(")")
            return inner
        if self.at("["):
            self.next()
            return ast.TupleLit(self.arguments("]"), p)
        self.fail("expression")


def parse(tokens):
    """Parse a token sequence (ending in eof) into an :class:`AstModule`."""
    parser = Parser(tokens)
    return parser.module()


def parse_source(source):
    return parse(tokenize(source))
