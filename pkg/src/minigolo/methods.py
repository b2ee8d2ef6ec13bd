"""Method resolution, builtin methods/functions and the augmentation registry.

Every dispatch target takes the full argument list, receiver first, and is
only valid for receivers matching the discriminator it was resolved for.
"""

import sys
import time

from .errors import ArityError, IndexOutOfBounds, NoSuchMethod, TypeMismatch
from .shapes import ShapeTree
from .values import (
    CALLABLE_TYPES, Closure, DynamicObject, FunctionRef, Long, StructureInstance,
    kind_name, render, type_name, wrap32,
)


class AugmentationRegistry:
    """(type name, method name) -> callable value; later registrations win."""

    def __init__(self):
        self._methods = {}

    def register(self, type_name, method_name, fn):
        if fn.arity < 1:
            raise ValueError(f"augmentation {type_name}.{method_name} needs a receiver parameter")
        self._methods[(type_name, method_name)] = fn

    def get(self, type_name, method_name):
        return self._methods.get((type_name, method_name))

    def __len__(self):
        return len(self._methods)


def augment_register(registry, type_name, method_name, fn):
    registry.register(type_name, method_name, fn)


class RuntimeContext:
    """Engine-owned state that builtins and method targets need.

    ``call_value(callable, args)`` is supplied by the engine and runs a
    function reference or closure with the given argument list.
    """

    def __init__(self, call_value, out=None):
        self.call_value = call_value
        self.out = out if out is not None else sys.stdout
        self.shapes = ShapeTree()
        self.augmentations = AugmentationRegistry()
        self.builtin_methods = _builtin_method_table(self)
        self.builtin_functions = _builtin_function_table(self)


class DispatchTarget:
    __slots__ = ("discriminator", "invoke", "description")

    def __init__(self, discriminator, invoke, description):
        self.discriminator = discriminator
        self.invoke = invoke
        self.description = description

    def __repr__(self):
        return f"DispatchTarget({self.description})"


def method_discriminator(receiver):
    """Shape for dynamic objects, structure type for structures, else host type."""
    t = type(receiver)
    if t is DynamicObject:
        return receiver.shape
    if t is StructureInstance:
        return receiver.stype
    return t


# -- helpers -------------------------------------------------------------

def _index(seq, i, method):
    if type(i) is not int and type(i) is not Long:
        raise TypeMismatch(f"{method} index must be Int, got {kind_name(i)}")
    if not 0 <= i < len(seq):
        raise IndexOutOfBounds(f"index {int(i)} out of bounds for length {len(seq)}")
    return int(i)


def _expect_bool(v, what):
    if type(v) is not bool:
        raise TypeMismatch(f"{what} must return Bool, got {kind_name(v)}")
    return v


def _to_int(v):
    t = type(v)
    if t is float:
        if v != v:
            return 0
        if v >= 2**31 - 1:
            return 2**31 - 1
        if v <= -2**31:
            return -2**31
        return int(v)
    return wrap32(int(v))


def _to_long(v):
    if type(v) is float:
        if v != v:
            return Long(0)
        if v >= 2.0**63:
            return Long(2**63 - 1)
        if v <= -2.0**63:
            return Long(-2**63)
        return Long(int(v))
    return Long(int(v))


def _builtin_method_table(ctx):
    call = ctx.call_value

    def seq_map(args):
        recv, f = args
        out = [call(f, [x]) for x in recv]
        return tuple(out) if type(recv) is tuple else out

    def seq_filter(args):
        recv, f = args
        out = [x for x in recv if _expect_bool(call(f, [x]), "filter predicate")]
        return tuple(out) if type(recv) is tuple else out

    def seq_reduce(args):
        recv, acc, f = args
        for x in list(recv):
            acc = call(f, [acc, x])
        return acc

    def list_add(args):
        args[0].append(args[1])
        return args[0]

    def list_set(args):
        recv = args[0]
        recv[_index(recv, args[1], "set")] = args[2]
        return recv

    def dyn_define(args):
        recv, name, value = args
        if type(name) is not str:
            raise TypeMismatch(f"define name must be Str, got {kind_name(name)}")
        _dyn_set(ctx, recv, name, value)
        return recv

    sequence = {
        ("size", 0): lambda a: len(a[0]),
        ("get", 1): lambda a: a[0][_index(a[0], a[1], "get")],
        ("isEmpty", 0): lambda a: len(a[0]) == 0,
        ("map", 1): seq_map,
        ("filter", 1): seq_filter,
        ("reduce", 2): seq_reduce,
    }
    numeric = {
        ("toDouble", 0): lambda a: float(a[0]),
        ("toInt", 0): lambda a: _to_int(a[0]),
        ("toLong", 0): lambda a: _to_long(a[0]),
    }
    return {
        tuple: dict(sequence),
        list: {**sequence, ("add", 1): list_add, ("set", 2): list_set},
        str: {
            ("length", 0): lambda a: len(a[0]),
            ("toUpperCase", 0): lambda a: a[0].upper(),
        },
        int: numeric,
        Long: numeric,
        float: numeric,
        DynamicObject: {("define", 2): dyn_define},
    }


def _dyn_set(ctx, obj, name, value):
    shape = ctx.shapes.define(obj.shape, name)
    slot = shape.properties[name]
    if slot == len(obj.slots):
        obj.slots.append(value)
    else:
        obj.slots[slot] = value
    obj.shape = shape


def _builtin_function_table(ctx):
    def println(args):
        ctx.out.write(render(args[0]) + "\n")

    def print_(args):
        ctx.out.write(render(args[0]))

    def range_(args):
        a, b = args
        if type(a) is not int or type(b) is not int:
            raise TypeMismatch(f"range bounds must be Int, got ({kind_name(a)}, {kind_name(b)})")
        return list(range(a, b))

    # name -> (arity or None for variadic, implementation)
    return {
        "println": (1, println),
        "print": (1, print_),
        "DynamicObject": (0, lambda args: DynamicObject(ctx.shapes.root)),
        "tuple": (None, tuple),
        "range": (2, range_),
        "currentTimeMillis": (0, lambda args: Long(int(time.time() * 1000))),
    }


BUILTIN_FUNCTION_NAMES = frozenset({
    "println", "print", "DynamicObject", "tuple", "range", "currentTimeMillis",
})


def builtin_function_target(ctx, name, argc):
    arity, impl = ctx.builtin_functions[name]
    if arity is not None and arity != argc:
        raise ArityError(f"{name} expects {arity} argument(s), got {argc}")
    return impl


def struct_constructor(stype):
    def construct(args):
        if len(args) != len(stype.fields):
            raise ArityError(f"{stype.name} expects {len(stype.fields)} argument(s), got {len(args)}")
        return StructureInstance(stype, args)
    return construct


# -- method lookup ---------------------------------------------------------

def method_lookup(receiver, name, argc, ctx):
    """Resolve ``receiver: name(...)`` with ``argc`` explicit arguments.

    Tiers, first hit wins: builtin methods of the receiver kind, structure
    field accessors, dynamic-object properties, augmentations.
    """
    disc = method_discriminator(receiver)
    t = type(receiver)

    table = ctx.builtin_methods.get(t)
    if table is not None:
        fn = table.get((name, argc))
        if fn is not None:
            return DispatchTarget(disc, fn, f"builtin {kind_name(receiver)}.{name}/{argc}")

    if t is StructureInstance:
        idx = receiver.stype.field_index.get(name)
        if idx is not None and argc == 0:
            return DispatchTarget(disc, lambda a: a[0].values[idx], f"getter {name}")
        if idx is not None and argc == 1:
            def setter(a):
                a[0].values[idx] = a[1]
                return a[0]
            return DispatchTarget(disc, setter, f"setter {name}")

    if t is DynamicObject:
        slot = receiver.shape.properties.get(name)
        if slot is not None:
            return DispatchTarget(disc, _property_accessor(ctx, name, slot, argc), f"property {name}")
        if argc == 1:
            def define_new(a):
                _dyn_set(ctx, a[0], name, a[1])
                return a[0]
            return DispatchTarget(disc, define_new, f"define {name}")

    fn = ctx.augmentations.get(type_name(receiver), name)
    if fn is not None:
        call = ctx.call_value
        return DispatchTarget(disc, lambda a: call(fn, a), f"augmentation {type_name(receiver)}.{name}")

    raise NoSuchMethod(f"no method {name}/{argc} on {type_name(receiver)}")


def _property_accessor(ctx, name, slot, argc):
    call = ctx.call_value

    def access(a):
        obj = a[0]
        value = obj.slots[slot]
        if type(value) in CALLABLE_TYPES:
            return call(value, a)
        if argc == 0:
            return value
        if argc == 1:
            obj.slots[slot] = a[1]
            return obj
        raise NoSuchMethod(f"no method {name}/{argc} on DynamicObject")
    return access


def is_callable_value(v):
    return type(v) is FunctionRef or type(v) is Closure

