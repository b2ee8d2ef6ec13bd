"""Abstract syntax tree produced by the parser, plus a human-readable dump."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

Pos = Tuple[int, int]


class Node:
    pos: Pos


# Expressions

@dataclass
class Literal(Node):
    kind: str  # Int | Long | Double | Str | Bool | Null
    value: object
    pos: Pos = (0, 0)


@dataclass
class Reference(Node):
    name: str
    pos: Pos = (0, 0)


@dataclass
class Binary(Node):
    op: str
    lhs: Node
    rhs: Node
    pos: Pos = (0, 0)


@dataclass
class Unary(Node):
    op: str
    operand: Node
    pos: Pos = (0, 0)


@dataclass
class Call(Node):
    name: str
    args: List[Node]
    pos: Pos = (0, 0)


@dataclass
class MethodCall(Node):
    receiver: Node
    name: str
    args: List[Node]
    pos: Pos = (0, 0)


@dataclass
class Lambda(Node):
    params: List[str]
    body: "Block"
    pos: Pos = (0, 0)
    expression_bodied: bool = False


@dataclass
class TupleLit(Node):
    elements: List[Node]
    pos: Pos = (0, 0)


@dataclass
class ListLit(Node):
    elements: List[Node]
    pos: Pos = (0, 0)


# Statements

@dataclass
class Let(Node):
    name: str
    expr: Node
    pos: Pos = (0, 0)


@dataclass
class Var(Node):
    name: str
    expr: Node
    pos: Pos = (0, 0)


@dataclass
class Assign(Node):
    name: str
    expr: Node
    pos: Pos = (0, 0)


@dataclass
class If(Node):
    cond: Node
    then: "Block"
    orelse: Optional[Node] = None  # Block or nested If
    pos: Pos = (0, 0)


@dataclass
class While(Node):
    cond: Node
    body: "Block"
    pos: Pos = (0, 0)


@dataclass
class Return(Node):
    expr: Optional[Node] = None
    pos: Pos = (0, 0)


@dataclass
class ExprStmt(Node):
    expr: Node
    pos: Pos = (0, 0)


@dataclass
class Block(Node):
    stmts: List[Node]
    pos: Pos = (0, 0)


# Declarations

@dataclass
class FunctionDecl(Node):
    name: str
    local: bool
    params: List[str]
    body: Block
    pos: Pos = (0, 0)
    synthetic: bool = False


@dataclass
class StructureDecl(Node):
    name: str
    fields: List[str]
    pos: Pos = (0, 0)


@dataclass
class AugmentDecl(Node):
    target: str
    functions: List[FunctionDecl]
    pos: Pos = (0, 0)


@dataclass
class AstModule(Node):
    name: str
    imports: List[str] = field(default_factory=list)
    structures: List[StructureDecl] = field(default_factory=list)
    augmentations: List[AugmentDecl] = field(default_factory=list)
    functions: List[FunctionDecl] = field(default_factory=list)
    pos: Pos = (1, 1)
    import_positions: List[Pos] = field(default_factory=list)


def format_literal(kind, value):
    if kind == "Null":
        return "Literal Null"
    if kind == "Bool":
        return f"Literal Bool {'true' if value else 'false'}"
    if kind == "Str":
        return f"Literal Str {_quote(value)}"
    if kind == "Double":
        return f"Literal Double {value!r}"
    return f"Literal {kind} {value}"


def _quote(text):
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{out}"'


def render_ast(module):
    lines = []

    def emit(depth, text):
        lines.append("  " * depth + text)

    def function(fn, depth):
        header = f"Function {fn.name}"
        if fn.local:
            header += " local"
        emit(depth, header)
        emit(depth + 1, "Params" + "".join(" " + p for p in fn.params))
        node(fn.body, depth + 1)

    def node(n, depth):
        if isinstance(n, Literal):
            emit(depth, format_literal(n.kind, n.value))
        elif isinstance(n, Reference):
            emit(depth, f"Reference {n.name}")
        elif isinstance(n, Binary):
            emit(depth, f"Binary {n.op}")
            node(n.lhs, depth + 1)
            node(n.rhs, depth + 1)
        elif isinstance(n, Unary):
            emit(depth, f"Unary {n.op}")
            node(n.operand, depth + 1)
        elif isinstance(n, Call):
            emit(depth, f"Call {n.name}")
            for a in n.args:
                node(a, depth + 1)
        elif isinstance(n, MethodCall):
            emit(depth, f"MethodCall {n.name}")
            node(n.receiver, depth + 1)
            for a in n.args:
                node(a, depth + 1)
        elif isinstance(n, Lambda):
            emit(depth, "Lambda" + "".join(" " + p for p in n.params))
            node(n.body, depth + 1)
        elif isinstance(n, TupleLit):
            emit(depth, "Tuple")
            for e in n.elements:
                node(e, depth + 1)
        elif isinstance(n, ListLit):
            emit(depth, "List")
            for e in n.elements:
                node(e, depth + 1)
        elif isinstance(n, (Let, Var, Assign)):
            emit(depth, f"{type(n).__name__} {n.name}")
            node(n.expr, depth + 1)
        elif isinstance(n, If):
            emit(depth, "If")
            node(n.cond, depth + 1)
            node(n.then, depth + 1)
            if n.orelse is not None:
                node(n.orelse, depth + 1)
        elif isinstance(n, While):
            emit(depth, "While")
            node(n.cond, depth + 1)
            node(n.body, depth + 1)
        elif isinstance(n, Return):
            emit(depth, "Return")
            if n.expr is not None:
                node(n.expr, depth + 1)
        elif isinstance(n, ExprStmt):
            emit(depth, "ExprStmt")
            node(n.expr, depth + 1)
        elif isinstance(n, Block):
            emit(depth, "Block")
            for s in n.stmts:
                node(s, depth + 1)
        else:  # pragma: no cover
            raise TypeError(f"unknown AST node {n!r}")

    emit(0, f"Module {module.name}")
    for imp in module.imports:
        emit(1, f"Import {imp}")
    for st in module.structures:
        emit(1, f"Struct {st.name}" + "".join(" " + f for f in st.fields))
    for aug in module.augmentations:
        emit(1, f"Augment {aug.target}")
        for fn in aug.functions:
            function(fn, 2)
    for fn in module.functions:
        function(fn, 1)
    return "\n".join(lines) + "\n"
