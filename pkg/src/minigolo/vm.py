"""The stack-machine engine.

Instructions are decoded once into flat per-function arrays and never
changed afterwards; everything that adapts at run time lives in the call
sites.  Guest calls recurse on the host stack (one ``_run`` per frame).
"""

import functools
from dataclasses import dataclass, field

from .compiler import Op
from .dispatch import MONO, CallSite, CheckedCallSite, DispatchPolicy, GuardedHandle
from .errors import ArityError, GoloRuntimeError, StackOverflow, TypeMismatch
from .methods import (
    RuntimeContext, builtin_function_target, method_lookup, struct_constructor,
)
from .operators import OPERATOR_ARITY, lookup_operator
from .values import Closure, DynamicObject, FunctionRef, StructureInstance, kind_name

# Opcodes as plain ints for the dispatch loop.
LOAD_CONST = int(Op.LOAD_CONST)
LOAD_LOCAL = int(Op.LOAD_LOCAL)
STORE_LOCAL = int(Op.STORE_LOCAL)
POP = int(Op.POP)
DUP = int(Op.DUP)
JUMP = int(Op.JUMP)
JUMP_IF_FALSE = int(Op.JUMP_IF_FALSE)
RETURN = int(Op.RETURN)
RETURN_NULL = int(Op.RETURN_NULL)
CALL_FUNCTION = int(Op.CALL_FUNCTION)
CALL_METHOD = int(Op.CALL_METHOD)
CALL_OPERATOR = int(Op.CALL_OPERATOR)
CALL_CLOSURE = int(Op.CALL_CLOSURE)
MAKE_CLOSURE = int(Op.MAKE_CLOSURE)
MAKE_TUPLE = int(Op.MAKE_TUPLE)
MAKE_LIST = int(Op.MAKE_LIST)


@dataclass
class VmConfig:
    policy: DispatchPolicy = field(default_factory=lambda: MONO)
    max_call_depth: int = 100000
    dump_stats: bool = False
    checked_sites: bool = False

    def __post_init__(self):
        if self.max_call_depth < 1:
            raise ValueError("max_call_depth must be >= 1")


def truthiness_check(v):
    if v is True:
        return True
    if v is False:
        return False
    raise TypeMismatch(f"branch condition must be Bool, got {kind_name(v)}")


class _Decoded:
    __slots__ = ("name", "ops", "a", "b", "nparams", "nslots", "arity", "captures")

    def __init__(self, fn, image):
        self.name = fn.name
        self.nparams = len(fn.params)
        self.nslots = fn.local_slots
        self.arity = fn.arity
        self.captures = fn.capture_count
        ops, a, b = [], [], []
        for ins in fn.instructions:
            op = int(ins.op)
            ops.append(op)
            if ins.op is Op.LOAD_CONST:
                a.append(image.constants[ins.a])
                b.append(None)
            elif ins.op is Op.CALL_OPERATOR:
                a.append(ins.a)
                b.append(OPERATOR_ARITY[ins.b])
            elif ins.op in (Op.CALL_FUNCTION, Op.CALL_METHOD):
                a.append(ins.a)
                b.append(ins.c)
            else:
                a.append(ins.a)
                b.append(ins.b)
        self.ops = tuple(ops)
        self.a = tuple(a)
        self.b = tuple(b)


class BytecodeEngine:
    def __init__(self, image, config=None, out=None):
        self.image = image
        self.config = config or VmConfig()
        self.ctx = RuntimeContext(self.call_value, out)
        self.code = [_Decoded(fn, image) for fn in image.functions]
        self.depth = 0
        for type_name, method, idx in image.augmentations:
            fn = image.functions[idx]
            self.ctx.augmentations.register(type_name, method, FunctionRef(idx, fn.name, fn.arity))
        self.sites = [self._make_site(info) for info in image.call_sites]
        self._entries = [functools.partial(self._run, i) for i in range(len(self.code))]

    # -- call sites ----------------------------------------------------------

    def _make_site(self, info):
        cls = CheckedCallSite if self.config.checked_sites else CallSite
        if info.kind == "operator":
            resolver = _resolve_operator
        elif info.kind == "method":
            ctx = self.ctx
            resolver = lambda site, args: method_lookup(args[0], site.name, site.argc, ctx).invoke
        else:
            resolver = self._function_resolver(info)
        return cls(info.id, info.kind, info.name, info.argc, resolver, self.config.policy)

    def _function_resolver(self, info):
        target = info.target
        if target.kind == "builtin":
            ctx = self.ctx
            return lambda site, args: builtin_function_target(ctx, site.name, site.argc)
        if target.kind == "struct":
            ctor = struct_constructor(self.image.struct_index[(target.module, target.name)])
            return lambda site, args: ctor
        idx = self.image.function_index[(target.module, target.name)]
        return lambda site, args: self._entries[idx]

    def reset_sites(self):
        self.sites = [self._make_site(info) for info in self.image.call_sites]

    # -- calls -----------------------------------------------------------------

    def call_value(self, callee, args):
        t = type(callee)
        if t is FunctionRef:
            return self._run(callee.index, list(args))
        if t is Closure:
            if len(args) != callee.arity:
                raise ArityError(f"{callee.name} expects {callee.arity} argument(s), got {len(args)}")
            return self._run(callee.index, callee.captured + list(args))
        raise TypeMismatch(f"cannot call a value of kind {kind_name(callee)}")

    def call_user_function(self, index, args):
        return self._run(index, list(args))

    def call_function(self, name, args=()):
        return self._run(self.image.function_named(name, self.image.functions[0].module), list(args))

    def run_main(self, args=()):
        if self.image.entry is None:
            raise ArityError("module has no main function")
        entry = self.code[self.image.entry]
        return self._run(self.image.entry, [tuple(args)] if entry.nparams == 1 else [])

    def _run(self, fi, args):
        code = self.code[fi]
        if len(args) != code.nparams:
            if code.captures:
                raise ArityError(f"{code.name} expects {code.arity} argument(s), got {len(args) - code.captures}")
            raise ArityError(f"{code.name} expects {code.nparams} argument(s), got {len(args)}")
        self.depth += 1
        if self.depth > self.config.max_call_depth:
            self.depth -= 1
            raise StackOverflow(f"call depth exceeded {self.config.max_call_depth} calling {code.name}")
        locals_ = args
        if code.nslots > len(locals_):
            locals_.extend([None] * (code.nslots - len(locals_)))
        ops = code.ops
        A = code.a
        B = code.b
        sites = self.sites
        stack = []
        push = stack.append
        pop = stack.pop
        GH = GuardedHandle
        pc = 0
        try:
            while True:
                op = ops[pc]
                if op == LOAD_LOCAL:
                    push(locals_[A[pc]])
                    pc += 1
                elif op == LOAD_CONST:
                    push(A[pc])
                    pc += 1
                elif op == CALL_OPERATOR:
                    site = sites[A[pc]]
                    h = site.chain
                    if B[pc] == 2:
                        b = pop()
                        a = stack[-1]
                        ta = type(a)
                        tb = type(b)
                        while h.__class__ is GH:
                            if h.k0 is ta and h.k1 is tb:
                                site.hits += 1
                                stack[-1] = h.target(a, b)
                                break
                            h = h.next
                        else:
                            stack[-1] = site.miss([a, b])
                    else:
                        a = stack[-1]
                        ta = type(a)
                        while h.__class__ is GH:
                            if h.k0 is ta:
                                site.hits += 1
                                stack[-1] = h.target(a)
                                break
                            h = h.next
                        else:
                            stack[-1] = site.miss([a])
                    pc += 1
                elif op == JUMP_IF_FALSE:
                    v = pop()
                    if v is False:
                        pc = A[pc]
                    elif v is True:
                        pc += 1
                    else:
                        truthiness_check(v)
                elif op == CALL_FUNCTION:
                    site = sites[A[pc]]
                    argc = B[pc]
                    if argc:
                        args = stack[-argc:]
                        del stack[-argc:]
                    else:
                        args = []
                    h = site.chain
                    if h.__class__ is GH:
                        site.hits += 1
                        push(h.target(args))
                    else:
                        push(site.miss(args))
                    pc += 1
                elif op == RETURN:
                    return pop()
                elif op == STORE_LOCAL:
                    locals_[A[pc]] = pop()
                    pc += 1
                elif op == JUMP:
                    pc = A[pc]
                elif op == CALL_METHOD:
                    site = sites[A[pc]]
                    n = B[pc] + 1
                    args = stack[-n:]
                    del stack[-n:]
                    recv = args[0]
                    t = type(recv)
                    key = recv.shape if t is DynamicObject else recv.stype if t is StructureInstance else t
                    h = site.chain
                    while h.__class__ is GH:
                        if h.k0 is key:
                            site.hits += 1
                            push(h.target(args))
                            break
                        h = h.next
                    else:
                        push(site.miss(args))
                    pc += 1
                elif op == POP:
                    pop()
                    pc += 1
                elif op == RETURN_NULL:
                    return None
                elif op == CALL_CLOSURE:
                    argc = A[pc]
                    args = stack[-argc:] if argc else []
                    callee = stack[-argc - 1]
                    del stack[-argc - 1:]
                    push(self.call_value(callee, args))
                    pc += 1
                elif op == MAKE_CLOSURE:
                    fi = A[pc]
                    capc = B[pc]
                    captured = stack[-capc:] if capc else []
                    if capc:
                        del stack[-capc:]
                    target = self.code[fi]
                    push(Closure(fi, target.name, target.arity, captured))
                    pc += 1
                elif op == MAKE_TUPLE:
                    n = A[pc]
                    items = tuple(stack[-n:]) if n else ()
                    if n:
                        del stack[-n:]
                    push(items)
                    pc += 1
                elif op == MAKE_LIST:
                    n = A[pc]
                    items = stack[-n:] if n else []
                    if n:
                        del stack[-n:]
                    push(items)
                    pc += 1
                elif op == DUP:
                    push(stack[-1])
                    pc += 1
                else:  # pragma: no cover
                    raise RuntimeError(f"bad opcode {op}")
        except GoloRuntimeError as err:
            err.trace.append(f"  at {code.name} (instr {pc})")
            raise
        finally:
            self.depth -= 1


def _resolve_operator(site, args):
    return lookup_operator(site.name, *[type(a) for a in args])
