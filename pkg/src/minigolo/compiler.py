"""Compile lifted, slot-allocated IR into an untyped stack bytecode image.

Instructions carry no value kinds: every operand on the stack is a dynamic
value and every operator, named call and method call goes through its own
call site.  Only ``LOAD_CONST`` refers to a typed pool entry.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

from . import ir as IR
from .errors import CompileError
from .operators import BINARY_NAMES, OPERATOR_ARITY, UNARY_NAMES
from .values import FunctionRef, StructType, describe

MAX_INSTRUCTIONS = 2**31 - 1


class Op(enum.IntEnum):
    LOAD_CONST = 0
    LOAD_LOCAL = 1
    STORE_LOCAL = 2
    POP = 3
    DUP = 4
    JUMP = 5
    JUMP_IF_FALSE = 6
    RETURN = 7
    RETURN_NULL = 8
    CALL_FUNCTION = 9
    CALL_METHOD = 10
    CALL_OPERATOR = 11
    CALL_CLOSURE = 12
    MAKE_CLOSURE = 13
    MAKE_TUPLE = 14
    MAKE_LIST = 15


class Instruction(NamedTuple):
    op: Op
    a: object = None
    b: object = None
    c: object = None


@dataclass(frozen=True)
class CodeFunction:
    name: str
    params: Tuple[str, ...]
    capture_count: int
    local_slots: int
    instructions: Tuple[Instruction, ...]
    synthetic: bool
    module: str

    @property
    def arity(self):
        return len(self.params) - self.capture_count


@dataclass(frozen=True)
class CallSiteInfo:
    id: int
    kind: str  # operator | function | method
    name: str
    argc: int
    target: Optional[IR.Resolved] = None


@dataclass(frozen=True)
class CodeImage:
    constants: tuple
    functions: Tuple[CodeFunction, ...]
    entry: Optional[int]
    call_sites: Tuple[CallSiteInfo, ...]
    structures: Tuple[StructType, ...]
    augmentations: Tuple[Tuple[str, str, int], ...]  # (type name, method, function index)
    function_index: dict  # (module, name) -> index
    struct_index: dict  # (module, name) -> StructType

    @property
    def call_site_count(self):
        return len(self.call_sites)

    def function_named(self, name, module=None):
        for i, fn in enumerate(self.functions):
            if fn.name == name and (module is None or fn.module == module):
                return i
        raise KeyError(name)


def _const_key(v):
    t = type(v)
    if t is float:
        return (t, v.hex())
    if t is FunctionRef:
        return (t, v.index)
    return (t, v)


class _Linker:
    def __init__(self, modules):
        self.modules = modules
        self.constants = []
        self.const_index = {}
        self.sites = []
        self.function_index = {}
        self.struct_index = {}
        self.order = []
        for mod in modules:
            for fn in mod.all_functions():
                self.function_index[(mod.name, fn.name)] = len(self.order)
                self.order.append((mod, fn))
            for st in mod.structures:
                self.struct_index[(mod.name, st.name)] = StructType(st.name, st.fields)

    def const(self, v):
        key = _const_key(v)
        k = self.const_index.get(key)
        if k is None:
            k = len(self.constants)
            self.constants.append(v)
            self.const_index[key] = k
        return k

    def site(self, kind, name, argc, target=None):
        info = CallSiteInfo(len(self.sites), kind, name, argc, target)
        self.sites.append(info)
        return info.id

    def function_ref(self, target):
        idx = self.function_index[(target.module, target.name)]
        fn = self.order[idx][1]
        return FunctionRef(idx, fn.name, fn.arity)


class _FunctionCompiler:
    def __init__(self, linker, module):
        self.linker = linker
        self.module = module
        self.code = []

    def emit(self, op, a=None, b=None, c=None):
        self.code.append(Instruction(op, a, b, c))
        return len(self.code) - 1

    def patch(self, at, target):
        ins = self.code[at]
        self.code[at] = ins._replace(a=target)

    def here(self):
        return len(self.code)

    # statements

    def stmt(self, s):
        t = type(s)
        if t is IR.Block:
            for x in s.stmts:
                self.stmt(x)
        elif t is IR.LetStmt:
            self.expr(s.expr)
            self.emit(Op.STORE_LOCAL, s.binding.slot)
        elif t is IR.AssignStmt:
            self.expr(s.expr)
            self.emit(Op.STORE_LOCAL, s.binding.slot)
        elif t is IR.ExprStmt:
            self.expr(s.expr)
            self.emit(Op.POP)
        elif t is IR.ReturnStmt:
            if s.expr is None:
                self.emit(Op.RETURN_NULL)
            else:
                self.expr(s.expr)
                self.emit(Op.RETURN)
        elif t is IR.IfStmt:
            self.expr(s.cond)
            to_else = self.emit(Op.JUMP_IF_FALSE, None)
            self.stmt(s.then)
            if s.orelse is None:
                self.patch(to_else, self.here())
            else:
                to_end = self.emit(Op.JUMP, None)
                self.patch(to_else, self.here())
                self.stmt(s.orelse)
                self.patch(to_end, self.here())
        elif t is IR.WhileStmt:
            top = self.here()
            self.expr(s.cond)
            exit_jump = self.emit(Op.JUMP_IF_FALSE, None)
            self.stmt(s.body)
            self.emit(Op.JUMP, top)
            self.patch(exit_jump, self.here())
        else:  # pragma: no cover
            raise CompileError(f"cannot compile statement {t.__name__}", *s.pos)

    # expressions

    def expr(self, e):
        t = type(e)
        L = self.linker
        if t is IR.Const:
            self.emit(Op.LOAD_CONST, L.const(e.value))
        elif t is IR.LocalRef:
            self.emit(Op.LOAD_LOCAL, e.binding.slot)
        elif t is IR.GlobalRef:
            self.emit(Op.LOAD_CONST, L.const(L.function_ref(e.target)))
        elif t is IR.BinaryOp:
            self.expr(e.lhs)
            self.expr(e.rhs)
            name = BINARY_NAMES[e.op]
            self.emit(Op.CALL_OPERATOR, L.site("operator", name, 2), name)
        elif t is IR.UnaryOp:
            self.expr(e.operand)
            name = UNARY_NAMES[e.op]
            self.emit(Op.CALL_OPERATOR, L.site("operator", name, 1), name)
        elif t is IR.Logical:
            self.logical(e)
        elif t is IR.CallGlobal:
            for a in e.args:
                self.expr(a)
            site = L.site("function", e.name, len(e.args), e.target)
            self.emit(Op.CALL_FUNCTION, site, e.name, len(e.args))
        elif t is IR.CallLocal:
            self.emit(Op.LOAD_LOCAL, e.binding.slot)
            for a in e.args:
                self.expr(a)
            self.emit(Op.CALL_CLOSURE, len(e.args))
        elif t is IR.MethodCall:
            self.expr(e.receiver)
            for a in e.args:
                self.expr(a)
            site = L.site("method", e.name, len(e.args))
            self.emit(Op.CALL_METHOD, site, e.name, len(e.args))
        elif t is IR.MakeClosure:
            for c in e.captures:
                self.expr(c)
            idx = L.function_index[(self.module.name, e.function)]
            self.emit(Op.MAKE_CLOSURE, idx, len(e.captures))
        elif t is IR.MakeTuple:
            for x in e.elements:
                self.expr(x)
            self.emit(Op.MAKE_TUPLE, len(e.elements))
        elif t is IR.MakeList:
            for x in e.elements:
                self.expr(x)
            self.emit(Op.MAKE_LIST, len(e.elements))
        else:
            raise CompileError(f"cannot compile {t.__name__} (were closures lifted?)", *e.pos)

    def logical(self, e):
        # Both operands must be Bool; the VM's branch check enforces it.
        L = self.linker
        true_k = L.const(True)
        false_k = L.const(False)
        self.expr(e.lhs)
        if e.op == "and":
            f1 = self.emit(Op.JUMP_IF_FALSE, None)
            self.expr(e.rhs)
            f2 = self.emit(Op.JUMP_IF_FALSE, None)
            self.emit(Op.LOAD_CONST, true_k)
            end = self.emit(Op.JUMP, None)
            self.patch(f1, self.here())
            self.patch(f2, self.here())
            self.emit(Op.LOAD_CONST, false_k)
            self.patch(end, self.here())
        else:
            to_rhs = self.emit(Op.JUMP_IF_FALSE, None)
            self.emit(Op.LOAD_CONST, true_k)
            end1 = self.emit(Op.JUMP, None)
            self.patch(to_rhs, self.here())
            self.expr(e.rhs)
            f2 = self.emit(Op.JUMP_IF_FALSE, None)
            self.emit(Op.LOAD_CONST, true_k)
            end2 = self.emit(Op.JUMP, None)
            self.patch(f2, self.here())
            self.emit(Op.LOAD_CONST, false_k)
            self.patch(end1, self.here())
            self.patch(end2, self.here())


def compile(ir, imports=()):
    """Compile ``ir`` (plus any imported modules) into a :class:`CodeImage`.

    Every module must already be closure-lifted and slot-allocated.
    """
    modules = [ir, *imports]
    linker = _Linker(modules)
    functions = []
    for mod, fn in linker.order:
        if fn.local_slots < 0:
            IR.allocate_slots(fn)
        fc = _FunctionCompiler(linker, mod)
        fc.stmt(fn.body)
        fc.emit(Op.RETURN_NULL)
        if len(fc.code) > MAX_INSTRUCTIONS:
            raise CompileError(f"function {fn.name} is too large", *fn.pos)
        functions.append(CodeFunction(
            fn.name, tuple(b.name for b in fn.params), fn.capture_count, fn.local_slots,
            tuple(fc.code), fn.synthetic, mod.name))

    augmentations = []
    for mod in reversed(modules):
        for aug in mod.augmentations:
            for fn in aug.functions:
                method = fn.name.split(".", 1)[1]
                augmentations.append((aug.target, method, linker.function_index[(mod.name, fn.name)]))

    entry = linker.function_index.get((ir.name, "main"))
    return CodeImage(
        constants=tuple(linker.constants),
        functions=tuple(functions),
        entry=entry,
        call_sites=tuple(linker.sites),
        structures=tuple(linker.struct_index.values()),
        augmentations=tuple(augmentations),
        function_index=dict(linker.function_index),
        struct_index=dict(linker.struct_index),
    )


# -- disassembly -------------------------------------------------------------

def format_instruction(ins, image):
    op = ins.op
    if op is Op.LOAD_CONST:
        return f"LOAD_CONST k={ins.a} ({describe(image.constants[ins.a])})"
    if op in (Op.LOAD_LOCAL, Op.STORE_LOCAL):
        return f"{op.name} slot={ins.a}"
    if op in (Op.JUMP, Op.JUMP_IF_FALSE):
        return f"{op.name} target={ins.a}"
    if op is Op.CALL_OPERATOR:
        return f"CALL_OPERATOR site={ins.a} op={ins.b}"
    if op in (Op.CALL_FUNCTION, Op.CALL_METHOD):
        return f"{op.name} site={ins.a} name={ins.b} argc={ins.c}"
    if op is Op.CALL_CLOSURE:
        return f"CALL_CLOSURE argc={ins.a}"
    if op is Op.MAKE_CLOSURE:
        return f"MAKE_CLOSURE fn={ins.a} ({image.functions[ins.a].name}) capc={ins.b}"
    if op in (Op.MAKE_TUPLE, Op.MAKE_LIST):
        return f"{op.name} n={ins.a}"
    return op.name


def disassemble(image):
    lines = []
    for fn in image.functions:
        lines.append(f"== {fn.name}/{len(fn.params)} locals={fn.local_slots}")
        for i, ins in enumerate(fn.instructions):
            lines.append(f"{i}: {format_instruction(ins, image)}")
    return "\n".join(lines) + "\n"


# -- verifier ----------------------------------------------------------------

class VerifyError(Exception):
    pass


def stack_effect(ins):
    """(operands popped, results pushed)."""
    op = ins.op
    if op in (Op.LOAD_CONST, Op.LOAD_LOCAL):
        return 0, 1
    if op in (Op.STORE_LOCAL, Op.POP, Op.JUMP_IF_FALSE, Op.RETURN):
        return 1, 0
    if op is Op.DUP:
        return 1, 2
    if op in (Op.JUMP, Op.RETURN_NULL):
        return 0, 0
    if op is Op.CALL_FUNCTION:
        return ins.c, 1
    if op is Op.CALL_METHOD:
        return ins.c + 1, 1
    if op is Op.CALL_OPERATOR:
        return OPERATOR_ARITY[ins.b], 1
    if op is Op.CALL_CLOSURE:
        return ins.a + 1, 1
    if op is Op.MAKE_CLOSURE:
        return ins.b, 1
    if op in (Op.MAKE_TUPLE, Op.MAKE_LIST):
        return ins.a, 1
    raise VerifyError(f"unknown opcode {op!r}")


def verify_function(fn, image=None):
    """Abstract interpretation of stack depth; returns depth per reachable index."""
    code = fn.instructions
    depth = {0: 0}
    work = [0]
    while work:
        pc = work.pop()
        d = depth[pc]
        ins = code[pc]
        pops, pushes = stack_effect(ins)
        if d < pops:
            raise VerifyError(f"{fn.name}@{pc}: stack underflow")
        if ins.op is Op.RETURN and d != 1:
            raise VerifyError(f"{fn.name}@{pc}: RETURN with depth {d}")
        if ins.op is Op.RETURN_NULL and d != 0:
            raise VerifyError(f"{fn.name}@{pc}: RETURN_NULL with depth {d}")
        if ins.op in (Op.LOAD_LOCAL, Op.STORE_LOCAL) and not 0 <= ins.a < fn.local_slots:
            raise VerifyError(f"{fn.name}@{pc}: slot {ins.a} out of range")
        nd = d - pops + pushes
        if ins.op in (Op.RETURN, Op.RETURN_NULL):
            succ = []
        elif ins.op is Op.JUMP:
            succ = [ins.a]
        elif ins.op is Op.JUMP_IF_FALSE:
            succ = [pc + 1, ins.a]
        else:
            succ = [pc + 1]
        for s in succ:
            if not 0 <= s < len(code):
                raise VerifyError(f"{fn.name}@{pc}: jump target {s} out of range")
            if s in depth:
                if depth[s] != nd:
                    raise VerifyError(f"{fn.name}@{s}: inconsistent depth {depth[s]} vs {nd}")
            else:
                depth[s] = nd
                work.append(s)
    return depth


def verify(image):
    for fn in image.functions:
        verify_function(fn, image)
    ids = [ins.a for fn in image.functions for ins in fn.instructions
           if ins.op in (Op.CALL_FUNCTION, Op.CALL_METHOD, Op.CALL_OPERATOR)]
    if sorted(ids) != list(range(image.call_site_count)):
        raise VerifyError("call-site ids are not dense")
    return True
