"""The self-specializing tree interpreter.

Every IR node becomes an executable node with an evaluation counter.
Expression nodes offer a generic ``execute`` (boxed result) and the raw
contracts ``execute_int/long/double/bool``, which either return an
unboxed number or raise :class:`UnexpectedKind` carrying the value that
did not fit.  Operator and local-write nodes specialize on the kinds they
observe and fall back to a generic state when a guess proves wrong;
call nodes keep a small per-node dispatch cache.

Host Python has no separate unboxed representation, so "boxing" is
modelled: :class:`BoxCounter` counts every numeric result handed out
through a generic contract by an operator node.
"""

from . import ir as IR
from .errors import ArityError, GoloRuntimeError, StackOverflow, TypeMismatch
from .methods import (
    RuntimeContext, builtin_function_target, method_discriminator, method_lookup,
    struct_constructor,
)
from .operators import BINARY_NAMES, UNARY_NAMES, lookup_operator
from .values import (
    Closure, FunctionRef, Long, StructType, kind_name, render,
)

RET = object()  # statement result: a Return executed; the value sits in frame[-1]

UNINITIALIZED = 0
SPECIALIZED = 1
GENERIC = 2

_RAW_ENTRY = {int: "execute_int", Long: "execute_long", float: "execute_double", bool: "execute_bool"}
_KIND_LABEL = {int: "Int", Long: "Long", float: "Double", bool: "Bool", str: "Str", None: "any"}


class UnexpectedKind(Exception):
    def __init__(self, value):
        super().__init__()
        self.value = value


class LatticeViolation(AssertionError):
    pass


class BoxCounter:
    def __init__(self, active=False):
        self.active = active
        self.count = 0

    def reset(self):
        self.count = 0


def _check_bool(v, what="branch condition"):
    if v is True or v is False:
        return v
    raise TypeMismatch(f"{what} must be Bool, got {kind_name(v)}")


# -- node base -----------------------------------------------------------------

class ExecNode:
    kind = "Node"

    def __init__(self, pos, fn):
        self.pos = pos
        self.fn = fn
        self.count = 0

    def children(self):
        return ()

    def state_label(self):
        return "-"

    def execute(self, frame):
        raise NotImplementedError

    def execute_int(self, frame):
        v = self.execute(frame)
        if type(v) is int:
            return v
        raise UnexpectedKind(v)

    def execute_long(self, frame):
        v = self.execute(frame)
        if type(v) is Long:
            return v
        raise UnexpectedKind(v)

    def execute_double(self, frame):
        v = self.execute(frame)
        if type(v) is float:
            return v
        raise UnexpectedKind(v)

    def execute_bool(self, frame):
        v = self.execute(frame)
        if v is True or v is False:
            return v
        raise UnexpectedKind(v)


class SpecializingNode(ExecNode):
    """Nodes with a specialization state; transitions only move forward."""

    def __init__(self, pos, fn, listener=None):
        super().__init__(pos, fn)
        self.state = UNINITIALIZED
        self.kinds = ()
        self.listener = listener

    def transition(self, state, kinds=()):
        old = (self.state, self.kinds)
        if state < self.state or (state == self.state and state == SPECIALIZED and kinds != self.kinds):
            raise LatticeViolation(f"{self.kind} {old} -> {(state, kinds)}")
        self.state = state
        self.kinds = kinds if state == SPECIALIZED else ()
        if self.listener is not None:
            self.listener(self, old, (self.state, self.kinds))

    def state_label(self):
        if self.state == UNINITIALIZED:
            return "uninitialized"
        if self.state == GENERIC:
            return "generic"
        return "specialized(" + ",".join(_KIND_LABEL.get(k, "?") for k in self.kinds) + ")"


# -- leaves --------------------------------------------------------------------

class LiteralNode(ExecNode):
    kind = "Literal"

    def __init__(self, value, pos, fn):
        super().__init__(pos, fn)
        self.value = value

    def execute(self, frame):
        self.count += 1
        return self.value


class LocalReadNode(ExecNode):
    kind = "LocalRead"

    def __init__(self, slot, pos, fn):
        super().__init__(pos, fn)
        self.slot = slot

    def execute(self, frame):
        self.count += 1
        return frame[self.slot]

    def execute_int(self, frame):
        self.count += 1
        v = frame[self.slot]
        if type(v) is int:
            return v
        raise UnexpectedKind(v)

    def execute_bool(self, frame):
        self.count += 1
        v = frame[self.slot]
        if v is True or v is False:
            return v
        raise UnexpectedKind(v)


# -- operators -----------------------------------------------------------------

def _specializable(name, ta, tb):
    numeric = (int, Long, float)
    if name in ("neg",):
        return ta in numeric
    if name == "not":
        return ta is bool
    if ta in numeric and tb in numeric:
        return True
    return name == "plus" and ta is str


class BinaryOpNode(SpecializingNode):
    kind = "BinaryOp"

    def __init__(self, op, lhs, rhs, pos, fn, engine):
        super().__init__(pos, fn, engine.listener)
        self.op = op
        self.name = BINARY_NAMES[op]
        self.lhs = lhs
        self.rhs = rhs
        self.boxes = engine.boxes
        self.core = None
        self.lx = None
        self.rx = None
        if not engine.specialize:
            self.transition(GENERIC)

    def children(self):
        return (self.lhs, self.rhs)

    def _generic(self, a, b):
        r = lookup_operator(self.name, type(a), type(b))(a, b)
        if self.boxes.active and type(r) in (int, Long, float):
            self.boxes.count += 1
        return r

    def _first(self, frame):
        a = self.lhs.execute(frame)
        b = self.rhs.execute(frame)
        ta = type(a)
        tb = type(b)
        if _specializable(self.name, ta, tb):
            # Str + anything specializes on the left operand only.
            kinds = (ta, None) if ta is str else (ta, tb)
            if ta is str:
                self.core = _concat
                self.lx = self._lhs_str
                self.rx = self.rhs.execute
            else:
                self.core = lookup_operator(self.name, ta, tb)
                self.lx = getattr(self.lhs, _RAW_ENTRY[ta])
                self.rx = getattr(self.rhs, _RAW_ENTRY[tb])
            self.transition(SPECIALIZED, kinds)
        else:
            self.transition(GENERIC)
        return self._generic(a, b)

    def _fail(self, a, b):
        self.transition(GENERIC)
        return self._generic(a, b)

    def _specialized(self, frame):
        """Raw result, or the generic result after a failed guard."""
        try:
            a = self.lx(frame)
        except UnexpectedKind as e:
            return self._fail(e.value, self.rhs.execute(frame))
        try:
            b = self.rx(frame)
        except UnexpectedKind as e:
            return self._fail(a, e.value)
        return self.core(a, b)

    def _lhs_str(self, frame):
        v = self.lhs.execute(frame)
        if type(v) is str:
            return v
        raise UnexpectedKind(v)

    def execute(self, frame):
        self.count += 1
        if self.state == SPECIALIZED:
            r = self._specialized(frame)
            if self.boxes.active and type(r) in (int, Long, float):
                self.boxes.count += 1
            return r
        if self.state == GENERIC:
            return self._generic(self.lhs.execute(frame), self.rhs.execute(frame))
        return self._first(frame)

    def _raw(self, frame, want):
        self.count += 1
        if self.state == SPECIALIZED:
            r = self._specialized(frame)
        elif self.state == GENERIC:
            r = self._generic(self.lhs.execute(frame), self.rhs.execute(frame))
        else:
            r = self._first(frame)
        if type(r) is want:
            return r
        raise UnexpectedKind(r)

    def execute_int(self, frame):
        return self._raw(frame, int)

    def execute_long(self, frame):
        return self._raw(frame, Long)

    def execute_double(self, frame):
        return self._raw(frame, float)

    def execute_bool(self, frame):
        return self._raw(frame, bool)


def _concat(a, b):
    return a + (b if type(b) is str else render(b))


class UnaryOpNode(SpecializingNode):
    kind = "UnaryOp"

    def __init__(self, op, operand, pos, fn, engine):
        super().__init__(pos, fn, engine.listener)
        self.name = UNARY_NAMES[op]
        self.operand = operand
        self.boxes = engine.boxes
        self.core = None
        self.ox = None
        if not engine.specialize:
            self.transition(GENERIC)

    def children(self):
        return (self.operand,)

    def _generic(self, a):
        r = lookup_operator(self.name, type(a))(a)
        if self.boxes.active and type(r) in (int, Long, float):
            self.boxes.count += 1
        return r

    def _compute(self, frame):
        if self.state == SPECIALIZED:
            try:
                return self.core(self.ox(frame))
            except UnexpectedKind as e:
                self.transition(GENERIC)
                return self._generic(e.value)
        a = self.operand.execute(frame)
        if self.state == UNINITIALIZED:
            ta = type(a)
            if _specializable(self.name, ta, None):
                self.core = lookup_operator(self.name, ta)
                self.ox = getattr(self.operand, _RAW_ENTRY[ta])
                self.transition(SPECIALIZED, (ta,))
            else:
                self.transition(GENERIC)
        return self._generic(a)

    def execute(self, frame):
        self.count += 1
        specialized = self.state == SPECIALIZED
        r = self._compute(frame)
        if specialized and self.boxes.active and type(r) in (int, Long, float):
            self.boxes.count += 1
        return r

    def execute_bool(self, frame):
        self.count += 1
        r = self._compute(frame)
        if r is True or r is False:
            return r
        raise UnexpectedKind(r)


class LogicalNode(ExecNode):
    kind = "Logical"

    def __init__(self, op, lhs, rhs, pos, fn):
        super().__init__(pos, fn)
        self.op = op
        self.lhs = lhs
        self.rhs = rhs

    def children(self):
        return (self.lhs, self.rhs)

    def execute(self, frame):
        self.count += 1
        a = _cond(self.lhs, frame)
        if self.op == "and":
            return _cond(self.rhs, frame) if a else False
        return True if a else _cond(self.rhs, frame)

    execute_bool = execute


def _cond(node, frame):
    try:
        return node.execute_bool(frame)
    except UnexpectedKind as e:
        return _check_bool(e.value)


# -- locals --------------------------------------------------------------------

class LocalWriteNode(SpecializingNode):
    """``let``/``var``/assignment.  Specializes on the kind of value stored."""

    kind = "LocalWrite"

    def __init__(self, slot, value, pos, fn, engine):
        super().__init__(pos, fn, engine.listener)
        self.slot = slot
        self.value = value
        self.vx = None
        if not engine.specialize:
            self.transition(GENERIC)

    def children(self):
        return (self.value,)

    def execute(self, frame):
        self.count += 1
        if self.state == SPECIALIZED:
            try:
                frame[self.slot] = self.vx(frame)
            except UnexpectedKind as e:
                self.transition(GENERIC)
                frame[self.slot] = e.value
            return None
        v = self.value.execute(frame)
        frame[self.slot] = v
        if self.state == UNINITIALIZED:
            entry = _RAW_ENTRY.get(type(v))
            if entry is not None:
                self.vx = getattr(self.value, entry)
                self.transition(SPECIALIZED, (type(v),))
            else:
                self.transition(GENERIC)
        return None


# -- statements ----------------------------------------------------------------

class BlockNode(ExecNode):
    kind = "Block"

    def __init__(self, stmts, pos, fn):
        super().__init__(pos, fn)
        self.stmts = tuple(stmts)

    def children(self):
        return self.stmts

    def execute(self, frame):
        self.count += 1
        for s in self.stmts:
            if s.execute(frame) is not None:
                return RET
        return None


class IfNode(ExecNode):
    kind = "If"

    def __init__(self, cond, then, orelse, pos, fn):
        super().__init__(pos, fn)
        self.cond = cond
        self.then = then
        self.orelse = orelse

    def children(self):
        return tuple(c for c in (self.cond, self.then, self.orelse) if c is not None)

    def execute(self, frame):
        self.count += 1
        try:
            c = self.cond.execute_bool(frame)
        except UnexpectedKind as e:
            c = _check_bool(e.value)
        if c:
            return self.then.execute(frame)
        if self.orelse is not None:
            return self.orelse.execute(frame)
        return None


class WhileNode(ExecNode):
    kind = "While"

    def __init__(self, cond, body, pos, fn):
        super().__init__(pos, fn)
        self.cond = cond
        self.body = body

    def children(self):
        return (self.cond, self.body)

    def execute(self, frame):
        self.count += 1
        cond = self.cond
        body = self.body
        while True:
            try:
                c = cond.execute_bool(frame)
            except UnexpectedKind as e:
                c = _check_bool(e.value)
            if not c:
                return None
            if body.execute(frame) is not None:
                return RET


class ReturnNode(ExecNode):
    kind = "Return"

    def __init__(self, expr, pos, fn):
        super().__init__(pos, fn)
        self.expr = expr

    def children(self):
        return () if self.expr is None else (self.expr,)

    def execute(self, frame):
        self.count += 1
        frame[-1] = None if self.expr is None else self.expr.execute(frame)
        return RET


class ExprStmtNode(ExecNode):
    kind = "ExprStmt"

    def __init__(self, expr, pos, fn):
        super().__init__(pos, fn)
        self.expr = expr

    def children(self):
        return (self.expr,)

    def execute(self, frame):
        self.count += 1
        self.expr.execute(frame)
        return None


# -- aggregates and closures ---------------------------------------------------

class MakeTupleNode(ExecNode):
    kind = "MakeTuple"

    def __init__(self, elements, pos, fn):
        super().__init__(pos, fn)
        self.elements = tuple(elements)

    def children(self):
        return self.elements

    def execute(self, frame):
        self.count += 1
        return tuple([e.execute(frame) for e in self.elements])


class MakeListNode(MakeTupleNode):
    kind = "MakeList"

    def execute(self, frame):
        self.count += 1
        return [e.execute(frame) for e in self.elements]


class MakeClosureNode(ExecNode):
    kind = "MakeClosure"

    def __init__(self, body, capture_slots, pos, fn):
        super().__init__(pos, fn)
        self.body = body
        self.capture_slots = tuple(capture_slots)

    def execute(self, frame):
        self.count += 1
        captured = [frame[s] for s in self.capture_slots]
        b = self.body
        return Closure(b.index, b.name, b.arity, captured, b)


# -- calls ---------------------------------------------------------------------

class DispatchNode(ExecNode):
    """Call node with an ordered (discriminator, target) cache of depth D."""

    def __init__(self, args, pos, fn, engine):
        super().__init__(pos, fn)
        self.args = tuple(args)
        self.engine = engine
        self.depth = engine.dispatch_depth
        self.cache = []
        self.megamorphic = not engine.specialize
        self.hits = 0
        self.misses = 0

    def children(self):
        return self.args

    def state_label(self):
        if self.megamorphic:
            return "megamorphic"
        if not self.cache:
            return "uninitialized"
        return f"cached({len(self.cache)})"

    def dispatch(self, disc, args, lookup):
        for key, target in self.cache:
            if key is disc:
                self.hits += 1
                return target
        self.misses += 1
        target = lookup(args)
        if not self.megamorphic:
            if len(self.cache) < self.depth:
                self.cache.append((disc, target))
            else:
                self.megamorphic = True
                self.cache.clear()
        return target


class CallNode(DispatchNode):
    """Call of a module-level name: function, structure constructor or builtin."""

    kind = "Call"

    def __init__(self, name, target, args, pos, fn, engine):
        super().__init__(args, pos, fn, engine)
        self.name = name
        self.target = target  # IR.Resolved

    def lookup(self, args):
        return self.engine.resolve_global(self.target, len(args))

    def execute(self, frame):
        self.count += 1
        args = [a.execute(frame) for a in self.args]
        cache = self.cache
        if cache and cache[0][0] is self.target:
            self.hits += 1
            return cache[0][1](args)
        return self.dispatch(self.target, args, self.lookup)(args)


class ClosureCallNode(DispatchNode):
    """Call of a function-valued local; keyed by the callee's code."""

    kind = "ClosureCall"

    def __init__(self, slot, args, pos, fn, engine):
        super().__init__(args, pos, fn, engine)
        self.slot = slot

    def execute(self, frame):
        self.count += 1
        callee = frame[self.slot]
        args = [a.execute(frame) for a in self.args]
        t = type(callee)
        if t is Closure or t is FunctionRef:
            disc = self.engine.bodies[callee.index]
        else:
            disc = t
        return self.dispatch(disc, args, lambda a: self.engine.callable_target(callee))(callee, args)


class MethodCallNode(DispatchNode):
    kind = "MethodCall"

    def __init__(self, receiver, name, args, pos, fn, engine):
        super().__init__(args, pos, fn, engine)
        self.receiver = receiver
        self.name = name
        self.argc = len(args)

    def children(self):
        return (self.receiver, *self.args)

    def lookup(self, args):
        return method_lookup(args[0], self.name, self.argc, self.engine.ctx).invoke

    def execute(self, frame):
        self.count += 1
        args = [self.receiver.execute(frame)]
        for a in self.args:
            args.append(a.execute(frame))
        disc = method_discriminator(args[0])
        for key, target in self.cache:
            if key is disc:
                self.hits += 1
                return target(args)
        return self.dispatch(disc, args, self.lookup)(args)


# -- functions -----------------------------------------------------------------

class FunctionBody:
    """A function or lambda: its node tree plus frame layout."""

    def __init__(self, index, name, nparams, ncaptures, pos, engine):
        self.index = index
        self.name = name
        self.nparams = nparams  # captures included
        self.captures = ncaptures
        self.arity = nparams - ncaptures
        self.pos = pos
        self.engine = engine
        self.root = None
        self.nslots = nparams
        self.pad = []

    def set_root(self, root, nslots):
        self.root = root
        self.nslots = nslots
        self.pad = [None] * (nslots - self.nparams + 1)  # + return slot

    def call(self, args):
        if len(args) != self.nparams:
            raise ArityError(
                f"{self.name} expects {self.arity} argument(s), got {len(args) - self.captures}")
        eng = self.engine
        eng.depth += 1
        if eng.depth > eng.max_call_depth:
            eng.depth -= 1
            raise StackOverflow(f"call depth exceeded {eng.max_call_depth} calling {self.name}")
        frame = args + self.pad
        try:
            if self.root.execute(frame) is RET:
                return frame[-1]
            return None
        except GoloRuntimeError as err:
            err.trace.append(f"  at {self.name} ({self.pos[0]}:{self.pos[1]})")
            raise
        finally:
            eng.depth -= 1

    def __repr__(self):
        return f"FunctionBody({self.name})"


class AstEngine:
    def __init__(self, modules, specialize=True, dispatch_depth=3, instrument_boxing=False,
                 max_call_depth=100000, out=None, listener=None):
        if dispatch_depth < 1:
            raise ValueError("dispatch depth must be >= 1")
        self.specialize = specialize
        self.dispatch_depth = dispatch_depth
        self.max_call_depth = max_call_depth
        self.boxes = BoxCounter(instrument_boxing)
        self.listener = listener
        self.depth = 0
        self.ctx = RuntimeContext(self.call_value, out)
        self.bodies = []
        self.functions = {}  # (module, name) -> FunctionBody
        self.structs = {}
        self.modules = list(modules)
        build_exec_tree(self, self.modules)

    # -- lookups -----------------------------------------------------------

    def resolve_global(self, target, argc):
        if target.kind == "builtin":
            return builtin_function_target(self.ctx, target.name, argc)
        if target.kind == "struct":
            return struct_constructor(self.structs[(target.module, target.name)])
        return self.functions[(target.module, target.name)].call

    def callable_target(self, callee):
        t = type(callee)
        if t is FunctionRef:
            call = self.bodies[callee.index].call
            return lambda c, args: call(args)
        if t is Closure:
            call = self.bodies[callee.index].call

            def run(c, args):
                if len(args) != c.arity:
                    raise ArityError(f"{c.name} expects {c.arity} argument(s), got {len(args)}")
                return call(c.captured + args)
            return run
        raise TypeMismatch(f"cannot call a value of kind {kind_name(callee)}")

    def call_value(self, callee, args):
        return self.callable_target(callee)(callee, list(args))

    def call_function(self, name, args=()):
        return self.functions[(self.modules[0].name, name)].call(list(args))

    def run_main(self, args=()):
        body = self.functions.get((self.modules[0].name, "main"))
        if body is None:
            raise ArityError("module has no main function")
        return body.call([tuple(args)] if body.nparams == 1 else [])

    # -- introspection -----------------------------------------------------

    def all_nodes(self):
        for body in self.bodies:
            stack = [body.root]
            while stack:
                n = stack.pop()
                yield body, n
                stack.extend(reversed(n.children()))

    def reset_counters(self):
        for _, n in self.all_nodes():
            n.count = 0


def dump_profile(engine, include_zero=False):
    rows = []
    for body, n in engine.all_nodes():
        if n.count or include_zero:
            rows.append((-n.count, body.name, n.pos[0], n.pos[1], n.kind, n.state_label()))
    rows.sort()
    return "".join(f"{-c}  {k}  {fn}:{line}:{col}  state={s}\n" for c, fn, line, col, k, s in rows)


# -- tree construction ---------------------------------------------------------

def build_exec_tree(engine, modules):
    """Populate ``engine.bodies``/``functions``/``structs`` from IR modules.

    Accepts unlifted IR (lambdas run in place, each with its own frame
    layout) and lifted IR (MakeClosure refers to a synthetic function).
    """
    pending = []
    for mod in modules:
        for st in mod.structures:
            engine.structs[(mod.name, st.name)] = StructType(st.name, st.fields)
        for fn in mod.all_functions():
            body = _new_body(engine, fn.name, len(fn.params), fn.capture_count, fn.pos)
            engine.functions[(mod.name, fn.name)] = body
            pending.append((mod, body, fn.params, fn.body))
    for mod in reversed(modules):
        for aug in mod.augmentations:
            for fn in aug.functions:
                body = engine.functions[(mod.name, fn.name)]
                engine.ctx.augmentations.register(
                    aug.target, fn.name.split(".", 1)[1], FunctionRef(body.index, body.name, body.arity))
    builder = _Builder(engine)
    for mod, body, params, block in pending:
        builder.build_body(mod, body, params, block)
    return engine


def _new_body(engine, name, nparams, ncaptures, pos):
    body = FunctionBody(len(engine.bodies), name, nparams, ncaptures, pos, engine)
    engine.bodies.append(body)
    return body


class _Builder:
    def __init__(self, engine):
        self.engine = engine

    def build_body(self, mod, body, bindings, block):
        layout = IR.scope_layout(bindings, block)
        saved = (getattr(self, "mod", None), getattr(self, "layout", None), getattr(self, "fn", None))
        self.mod, self.layout, self.fn = mod, layout, body.name
        body.set_root(self.node(block), len(layout))
        self.mod, self.layout, self.fn = saved

    def node(self, n):
        t = type(n)
        E = self.engine
        fn = self.fn
        if t is IR.Const:
            return LiteralNode(n.value, n.pos, fn)
        if t is IR.LocalRef:
            return LocalReadNode(self.layout[n.binding], n.pos, fn)
        if t is IR.GlobalRef:
            body = E.functions[(n.target.module, n.target.name)]
            return LiteralNode(FunctionRef(body.index, body.name, body.arity), n.pos, fn)
        if t is IR.BinaryOp:
            return BinaryOpNode(n.op, self.node(n.lhs), self.node(n.rhs), n.pos, fn, E)
        if t is IR.UnaryOp:
            return UnaryOpNode(n.op, self.node(n.operand), n.pos, fn, E)
        if t is IR.Logical:
            return LogicalNode(n.op, self.node(n.lhs), self.node(n.rhs), n.pos, fn)
        if t is IR.CallGlobal:
            return CallNode(n.name, n.target, [self.node(a) for a in n.args], n.pos, fn, E)
        if t is IR.CallLocal:
            return ClosureCallNode(self.layout[n.binding], [self.node(a) for a in n.args], n.pos, fn, E)
        if t is IR.MethodCall:
            return MethodCallNode(self.node(n.receiver), n.name, [self.node(a) for a in n.args],
                                  n.pos, fn, E)
        if t is IR.Lambda:
            body = _new_body(E, n.synthetic_name, len(n.captures) + len(n.params), len(n.captures), n.pos)
            slots = [self.layout[b] for b in n.captures]
            self.build_body(self.mod, body, n.captures + n.params, n.body)
            return MakeClosureNode(body, slots, n.pos, fn)
        if t is IR.MakeClosure:
            body = E.functions[(self.mod.name, n.function)]
            return MakeClosureNode(body, [self.layout[c.binding] for c in n.captures], n.pos, fn)
        if t is IR.MakeTuple:
            return MakeTupleNode([self.node(x) for x in n.elements], n.pos, fn)
        if t is IR.MakeList:
            return MakeListNode([self.node(x) for x in n.elements], n.pos, fn)
        if t is IR.LetStmt or t is IR.AssignStmt:
            return LocalWriteNode(self.layout[n.binding], self.node(n.expr), n.pos, fn, E)
        if t is IR.IfStmt:
            orelse = None if n.orelse is None else self.node(n.orelse)
            return IfNode(self.node(n.cond), self.node(n.then), orelse, n.pos, fn)
        if t is IR.WhileStmt:
            return WhileNode(self.node(n.cond), self.node(n.body), n.pos, fn)
        if t is IR.ReturnStmt:
            return ReturnNode(None if n.expr is None else self.node(n.expr), n.pos, fn)
        if t is IR.ExprStmt:
            return ExprStmtNode(self.node(n.expr), n.pos, fn)
        if t is IR.Block:
            return BlockNode([self.node(s) for s in n.stmts], n.pos, fn)
        raise TypeError(f"cannot build a node for {t.__name__}")  # pragma: no cover
