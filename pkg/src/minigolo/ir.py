"""Intermediate representation and the passes that run over it.

``lower`` turns the AST into IR and resolves lexically scoped locals on the
way (each ``let``/``var``/parameter becomes a :class:`Binding`).  Names that
are not locals stay symbolic until ``check_references`` resolves them against
module functions, imports and builtins.  ``lift_closures`` then rewrites
every lambda into a synthetic top-level function whose captured variables
come first in its parameter list, and ``allocate_slots`` numbers frames for
the bytecode compiler.
"""

import copy
import itertools
from dataclasses import dataclass, field
from typing import List, Optional

from . import syntax as ast
from .errors import CaptureError
from .methods import BUILTIN_FUNCTION_NAMES
from .syntax import format_literal
from .values import Long

_binding_ids = itertools.count()


class Binding:
    """A parameter or local variable.  ``slot`` is filled in by allocate_slots."""

    __slots__ = ("name", "mutable", "pos", "slot", "uid")

    def __init__(self, name, mutable, pos, slot=-1):
        self.name = name
        self.mutable = mutable
        self.pos = pos
        self.slot = slot
        self.uid = next(_binding_ids)

    def __repr__(self):
        return f"Binding({self.name}#{self.uid}, slot={self.slot})"


@dataclass(frozen=True)
class Resolved:
    kind: str  # function | struct | builtin
    module: str
    name: str
    local: bool = False


# -- expressions -------------------------------------------------------

@dataclass(eq=False)
class Const:
    value: object
    pos: tuple


@dataclass(eq=False)
class LocalRef:
    binding: Binding
    pos: tuple


@dataclass(eq=False)
class GlobalRef:
    name: str
    pos: tuple
    target: Optional[Resolved] = None


@dataclass(eq=False)
class BinaryOp:
    op: str
    lhs: object
    rhs: object
    pos: tuple


@dataclass(eq=False)
class Logical:
    op: str  # and | or
    lhs: object
    rhs: object
    pos: tuple


@dataclass(eq=False)
class UnaryOp:
    op: str
    operand: object
    pos: tuple


@dataclass(eq=False)
class CallGlobal:
    name: str
    args: list
    pos: tuple
    target: Optional[Resolved] = None


@dataclass(eq=False)
class CallLocal:
    binding: Binding
    args: list
    pos: tuple


@dataclass(eq=False)
class MethodCall:
    receiver: object
    name: str
    args: list
    pos: tuple


@dataclass(eq=False)
class Lambda:
    params: List[Binding]
    body: "Block"
    pos: tuple
    captures: List[Binding] = field(default_factory=list)
    synthetic_name: str = ""


@dataclass(eq=False)
class MakeClosure:
    function: str
    captures: list  # LocalRef expressions evaluated in the creating frame
    pos: tuple


@dataclass(eq=False)
class MakeTuple:
    elements: list
    pos: tuple


@dataclass(eq=False)
class MakeList:
    elements: list
    pos: tuple


# -- statements ----------------------------------------------------------

@dataclass(eq=False)
class LetStmt:
    binding: Binding
    expr: object
    pos: tuple


@dataclass(eq=False)
class AssignStmt:
    name: str
    binding: Optional[Binding]
    expr: object
    pos: tuple
    captured: bool = False


@dataclass(eq=False)
class IfStmt:
    cond: object
    then: "Block"
    orelse: object
    pos: tuple


@dataclass(eq=False)
class WhileStmt:
    cond: object
    body: "Block"
    pos: tuple


@dataclass(eq=False)
class ReturnStmt:
    expr: object
    pos: tuple


@dataclass(eq=False)
class ExprStmt:
    expr: object
    pos: tuple


@dataclass(eq=False)
class Block:
    stmts: list
    pos: tuple


# -- containers ------------------------------------------------------------

@dataclass(eq=False)
class IrFunction:
    name: str
    params: List[Binding]
    body: Block
    pos: tuple
    local: bool = False
    synthetic: bool = False
    capture_count: int = 0
    local_slots: int = -1
    module: str = ""

    @property
    def arity(self):
        return len(self.params) - self.capture_count


@dataclass(eq=False)
class IrStructure:
    name: str
    fields: List[str]
    pos: tuple


@dataclass(eq=False)
class IrAugmentation:
    target: str
    functions: List[IrFunction]
    pos: tuple


@dataclass(eq=False)
class IrModule:
    name: str
    functions: List[IrFunction]
    structures: List[IrStructure]
    augmentations: List[IrAugmentation]
    imports: List[tuple]  # (qualified name, pos)

    def function(self, name):
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def all_functions(self):
        yield from self.functions
        for aug in self.augmentations:
            yield from aug.functions


@dataclass
class Diagnostic:
    message: str
    line: int
    column: int
    severity: str = "error"

    def format(self, filename="<source>"):
        return f"{filename}:{self.line}:{self.column}: {self.severity}: {self.message}"


# -- generic traversal -----------------------------------------------------

_CHILD_FIELDS = {
    BinaryOp: ("lhs", "rhs"), Logical: ("lhs", "rhs"), UnaryOp: ("operand",),
    CallGlobal: ("args",), CallLocal: ("args",), MethodCall: ("receiver", "args"),
    Lambda: ("body",), MakeClosure: ("captures",), MakeTuple: ("elements",),
    MakeList: ("elements",), LetStmt: ("expr",), AssignStmt: ("expr",),
    IfStmt: ("cond", "then", "orelse"), WhileStmt: ("cond", "body"),
    ReturnStmt: ("expr",), ExprStmt: ("expr",), Block: ("stmts",),
    Const: (), LocalRef: (), GlobalRef: (),
}


def children(node):
    for name in _CHILD_FIELDS[type(node)]:
        value = getattr(node, name)
        if value is None:
            continue
        if isinstance(value, list):
            yield from value
        else:
            yield value


def walk(node):
    """Pre-order traversal, descending into lambdas."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def _walk_scope(node):
    """Pre-order traversal that stops at (but yields) nested lambdas."""
    yield node
    for c in children(node):
        if type(c) is Lambda:
            yield c
        else:
            yield from _walk_scope(c)


# -- lowering --------------------------------------------------------------

class _Scope:
    def __init__(self, parent, lam=None):
        self.parent = parent
        self.lam = lam  # the Lambda node owning this scope, None for functions
        self.blocks = [{}]

    def declare(self, binding):
        self.blocks[-1][binding.name] = binding

    def find_here(self, name):
        for block in reversed(self.blocks):
            b = block.get(name)
            if b is not None:
                return b
        return None


class _Lowerer:
    def __init__(self, module_name):
        self.module_name = module_name
        self.scope = None
        self.lambdas = []

    def resolve(self, name):
        """Returns (binding, crossed_lambda_boundary) or (None, False)."""
        scope = self.scope
        crossed = []
        while scope is not None:
            b = scope.find_here(name)
            if b is not None:
                for lam in crossed:
                    if b not in lam.captures:
                        lam.captures.append(b)
                return b, bool(crossed)
            if scope.lam is not None:
                crossed.append(scope.lam)
            scope = scope.parent
        return None, False

    def function(self, decl, module_name, synthetic=False):
        self.scope = _Scope(None)
        params = [Binding(p, True, decl.pos) for p in decl.params]
        for b in params:
            self.scope.declare(b)
        body = self.block(decl.body, new_scope=False)
        self.scope = None
        return IrFunction(decl.name, params, body, decl.pos, local=decl.local,
                          synthetic=synthetic, module=module_name)

    def block(self, blk, new_scope=True):
        if new_scope:
            self.scope.blocks.append({})
        stmts = [self.stmt(s) for s in blk.stmts]
        if new_scope:
            self.scope.blocks.pop()
        return Block(stmts, blk.pos)

    def stmt(self, s):
        t = type(s)
        if t is ast.Let or t is ast.Var:
            expr = self.expr(s.expr)
            b = Binding(s.name, t is ast.Var, s.pos)
            self.scope.declare(b)
            return LetStmt(b, expr, s.pos)
        if t is ast.Assign:
            expr = self.expr(s.expr)
            b, crossed = self.resolve(s.name)
            return AssignStmt(s.name, b, expr, s.pos, captured=crossed)
        if t is ast.If:
            cond = self.expr(s.cond)
            then = self.block(s.then)
            orelse = None
            if isinstance(s.orelse, ast.If):
                orelse = self.stmt(s.orelse)
            elif s.orelse is not None:
                orelse = self.block(s.orelse)
            return IfStmt(cond, then, orelse, s.pos)
        if t is ast.While:
            return WhileStmt(self.expr(s.cond), self.block(s.body), s.pos)
        if t is ast.Return:
            return ReturnStmt(None if s.expr is None else self.expr(s.expr), s.pos)
        if t is ast.ExprStmt:
            return ExprStmt(self.expr(s.expr), s.pos)
        if t is ast.Block:
            return self.block(s)
        raise TypeError(f"unexpected statement {s!r}")  # pragma: no cover

    def expr(self, e):
        t = type(e)
        if t is ast.Literal:
            return Const(_literal_value(e), e.pos)
        if t is ast.Reference:
            b, _ = self.resolve(e.name)
            if b is not None:
                return LocalRef(b, e.pos)
            return GlobalRef(e.name, e.pos)
        if t is ast.Binary:
            lhs = self.expr(e.lhs)
            rhs = self.expr(e.rhs)
            if e.op in ("and", "or"):
                return Logical(e.op, lhs, rhs, e.pos)
            return BinaryOp(e.op, lhs, rhs, e.pos)
        if t is ast.Unary:
            return UnaryOp(e.op, self.expr(e.operand), e.pos)
        if t is ast.Call:
            b, _ = self.resolve(e.name)
            args = [self.expr(a) for a in e.args]
            if b is not None:
                return CallLocal(b, args, e.pos)
            return CallGlobal(e.name, args, e.pos)
        if t is ast.MethodCall:
            recv = self.expr(e.receiver)
            return MethodCall(recv, e.name, [self.expr(a) for a in e.args], e.pos)
        if t is ast.Lambda:
            lam = Lambda([], None, e.pos)
            self.lambdas.append(lam)
            self.scope = _Scope(self.scope, lam)
            lam.params = [Binding(p, True, e.pos) for p in e.params]
            for b in lam.params:
                self.scope.declare(b)
            lam.body = self.block(e.body, new_scope=False)
            self.scope = self.scope.parent
            return lam
        if t is ast.TupleLit:
            return MakeTuple([self.expr(x) for x in e.elements], e.pos)
        if t is ast.ListLit:
            return MakeList([self.expr(x) for x in e.elements], e.pos)
        raise TypeError(f"unexpected expression {e!r}")  # pragma: no cover


def _literal_value(lit):
    if lit.kind == "Long":
        return Long(lit.value)
    if lit.kind == "Int":
        return int(lit.value)
    if lit.kind == "Double":
        return float(lit.value)
    return lit.value


def lower(module):
    """Lower an :class:`AstModule` into an :class:`IrModule`."""
    lw = _Lowerer(module.name)
    functions = [lw.function(fn, module.name) for fn in module.functions]
    augmentations = []
    for aug in module.augmentations:
        fns = []
        for fn in aug.functions:
            ir_fn = lw.function(fn, module.name)
            ir_fn.name = f"{aug.target}.{fn.name}"
            fns.append(ir_fn)
        augmentations.append(IrAugmentation(aug.target, fns, aug.pos))
    for n, lam in enumerate(sorted(lw.lambdas, key=lambda lam: lam.pos)):
        lam.synthetic_name = f"__lambda${n}"
    structures = [IrStructure(s.name, list(s.fields), s.pos) for s in module.structures]
    imports = list(zip(module.imports, module.import_positions or [module.pos] * len(module.imports)))
    return IrModule(module.name, functions, structures, augmentations, imports)


# -- reference checking ----------------------------------------------------

def module_exports(ir):
    """Names another module may import: non-local functions and structures."""
    out = {}
    for fn in ir.functions:
        if not fn.local and not fn.synthetic:
            out[fn.name] = Resolved("function", ir.name, fn.name)
    for st in ir.structures:
        out[st.name] = Resolved("struct", ir.name, st.name)
    return out


def check_references(ir, imported=None):
    """Resolve global names in place; return one Diagnostic per offending site.

    ``imported`` maps qualified module names to their (lowered) IrModules.
    """
    imported = imported or {}
    diags = []
    own = {}
    for fn in ir.functions:
        own[fn.name] = Resolved("function", ir.name, fn.name, fn.local)
    for st in ir.structures:
        own[st.name] = Resolved("struct", ir.name, st.name)

    import_exports = []
    for qname, pos in ir.imports:
        mod = imported.get(qname)
        if mod is None:
            diags.append(Diagnostic(f"unknown module: {qname}", *pos))
        else:
            import_exports.append(module_exports(mod))

    def resolve(name, pos, as_call):
        hit = own.get(name)
        if hit is not None:
            return hit
        found = {e[name] for e in import_exports if name in e}
        if len(found) > 1:
            diags.append(Diagnostic(f"ambiguous reference: {name}", *pos))
            return None
        if found:
            return found.pop()
        if name in BUILTIN_FUNCTION_NAMES:
            if as_call:
                return Resolved("builtin", "", name)
            diags.append(Diagnostic(f"builtin function cannot be used as a value: {name}", *pos))
            return None
        diags.append(Diagnostic(f"undeclared reference: {name}", *pos))
        return None

    for fn in ir.all_functions():
        for node in walk(fn.body):
            t = type(node)
            if t is GlobalRef:
                target = resolve(node.name, node.pos, False)
                if target is not None and target.kind == "struct":
                    diags.append(Diagnostic(
                        f"structure cannot be used as a value: {node.name}", *node.pos))
                    target = None
                node.target = target
            elif t is CallGlobal:
                node.target = resolve(node.name, node.pos, True)
            elif t is AssignStmt:
                if node.binding is None:
                    if node.name in own or any(node.name in e for e in import_exports):
                        diags.append(Diagnostic(f"cannot assign to function: {node.name}", *node.pos))
                    else:
                        diags.append(Diagnostic(f"undeclared reference: {node.name}", *node.pos))
                elif not node.binding.mutable:
                    diags.append(Diagnostic(f"cannot assign to let binding: {node.name}", *node.pos))
    for aug in ir.augmentations:
        for fn in aug.functions:
            if len(fn.params) < 1:
                diags.append(Diagnostic(
                    f"augmentation method needs a receiver parameter: {fn.name}", *fn.pos))
    diags.sort(key=lambda d: (d.line, d.column, d.message))
    return diags


# -- closure lifting ---------------------------------------------------------

def _rename(node, mapping):
    for n in walk(node):
        if type(n) is LocalRef or type(n) is CallLocal:
            repl = mapping.get(n.binding)
            if repl is not None:
                n.binding = repl


def lift_closures(ir):
    """Return a copy of ``ir`` in which every Lambda became a synthetic function."""
    ir = copy.deepcopy(ir)
    lifted = []

    for fn in ir.all_functions():
        for node in walk(fn.body):
            if type(node) is AssignStmt and node.captured:
                raise CaptureError(
                    f"cannot assign to captured variable: {node.name}", *node.pos)

    def lift(node):
        # Post-order: the innermost lambdas are lifted first.
        for name in _CHILD_FIELDS[type(node)]:
            value = getattr(node, name)
            if value is None:
                continue
            if isinstance(value, list):
                setattr(node, name, [lift(v) for v in value])
            else:
                setattr(node, name, lift(value))
        if type(node) is not Lambda:
            return node
        fresh = [Binding(b.name, False, b.pos) for b in node.captures]
        _rename(node.body, dict(zip(node.captures, fresh)))
        lifted.append(IrFunction(
            node.synthetic_name, fresh + node.params, node.body, node.pos,
            local=True, synthetic=True, capture_count=len(fresh), module=ir.name))
        return MakeClosure(node.synthetic_name,
                           [LocalRef(b, node.pos) for b in node.captures], node.pos)

    for fn in ir.all_functions():
        fn.body = lift(fn.body)
    lifted.sort(key=lambda f: int(f.name.rsplit("$", 1)[1]))
    ir.functions.extend(lifted)
    return ir


# -- slot allocation ---------------------------------------------------------

def scope_layout(bindings, body):
    """Assign slots: ``bindings`` first, then every let/var in ``body`` in
    source order.  Nested lambdas are separate scopes and are skipped."""
    layout = {}
    for b in bindings:
        layout[b] = len(layout)
    for node in _walk_scope(body):
        if type(node) is LetStmt:
            layout[node.binding] = len(layout)
    return layout


def allocate_slots(fn):
    layout = scope_layout(fn.params, fn.body)
    for b, slot in layout.items():
        b.slot = slot
    fn.local_slots = len(layout)
    return fn


def lambda_count(ir):
    return sum(1 for fn in ir.all_functions() for n in walk(fn.body) if type(n) is Lambda)


# -- dump ----------------------------------------------------------------------

def _slot(b):
    return "?" if b.slot < 0 else str(b.slot)


def render_ir(ir):
    lines = []

    def emit(depth, text):
        lines.append("  " * depth + text)

    def function(fn, depth):
        header = f"Function {fn.name}"
        if fn.local:
            header += " local"
        if fn.synthetic:
            header += f" synthetic captures={fn.capture_count}"
        params = ",".join(f"{b.name}:{_slot(b)}" for b in fn.params)
        locals_ = "?" if fn.local_slots < 0 else str(fn.local_slots)
        emit(depth, f"{header} params=[{params}] locals={locals_}")
        node(fn.body, depth + 1)

    def node(n, depth):
        t = type(n)
        if t is Const:
            text = format_literal(_kind_label(n.value), n.value)
            emit(depth, text.replace("Literal", "Const", 1))
        elif t is LocalRef:
            emit(depth, f"Local {n.binding.name} slot={_slot(n.binding)}")
        elif t is GlobalRef:
            emit(depth, f"Global {n.name}" + _target(n.target))
        elif t is BinaryOp:
            emit(depth, f"Operator {n.op}")
        elif t is Logical:
            emit(depth, f"Logical {n.op}")
        elif t is UnaryOp:
            emit(depth, f"Unary {n.op}")
        elif t is CallGlobal:
            emit(depth, f"Call {n.name}" + _target(n.target))
        elif t is CallLocal:
            emit(depth, f"CallLocal {n.binding.name} slot={_slot(n.binding)}")
        elif t is MethodCall:
            emit(depth, f"MethodCall {n.name}")
        elif t is Lambda:
            caps = ",".join(b.name for b in n.captures)
            params = ",".join(b.name for b in n.params)
            emit(depth, f"Lambda {n.synthetic_name} captures=[{caps}] params=[{params}]")
        elif t is MakeClosure:
            emit(depth, f"MakeClosure {n.function} captures={len(n.captures)}")
        elif t is MakeTuple:
            emit(depth, "MakeTuple")
        elif t is MakeList:
            emit(depth, "MakeList")
        elif t is LetStmt:
            kw = "Var" if n.binding.mutable else "Let"
            emit(depth, f"{kw} {n.binding.name} slot={_slot(n.binding)}")
        elif t is AssignStmt:
            slot = "?" if n.binding is None else _slot(n.binding)
            emit(depth, f"Assign {n.name} slot={slot}")
        elif t is IfStmt:
            emit(depth, "If")
        elif t is WhileStmt:
            emit(depth, "While")
        elif t is ReturnStmt:
            emit(depth, "Return")
        elif t is ExprStmt:
            emit(depth, "ExprStmt")
        elif t is Block:
            emit(depth, "Block")
        for c in children(n):
            node(c, depth + 1)

    emit(0, f"IrModule {ir.name}")
    for qname, _ in ir.imports:
        emit(1, f"Import {qname}")
    for st in ir.structures:
        emit(1, f"Struct {st.name}" + "".join(" " + f for f in st.fields))
    for aug in ir.augmentations:
        emit(1, f"Augment {aug.target}")
        for fn in aug.functions:
            function(fn, 2)
    for fn in ir.functions:
        function(fn, 1)
    return "\n".join(lines) + "\n"


def _kind_label(v):
    if v is None:
        return "Null"
    return {int: "Int", Long: "Long", float: "Double", bool: "Bool", str: "Str"}[type(v)]


def _target(t):
    if t is None:
        return ""
    if t.kind == "builtin":
        return " -> builtin"
    return f" -> {t.kind} {t.module}.{t.name}"
