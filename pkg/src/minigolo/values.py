"""The dynamic value universe.

Values are encoded on host types so that the common kinds cost nothing to
represent, and the exact host type doubles as the kind tag:

    Int     -> int (range-checked to 32 bits)
    Long    -> Long (an int subclass, 64 bits)
    Double  -> float
    Bool    -> bool
    Str     -> str
    Null    -> None
    Tuple   -> tuple
    List    -> list

Function references, closures, structure instances and dynamic objects get
their own classes below.  Code testing for a kind must use ``type(v) is ...``
because ``bool`` and ``Long`` both subclass ``int``.
"""

import enum


class Long(int):
    __slots__ = ()

    def __repr__(self):
        return f"Long({int(self)})"


class FunctionRef:
    __slots__ = ("index", "name", "arity")

    def __init__(self, index, name, arity):
        self.index = index
        self.name = name
        self.arity = arity

    def __repr__(self):
        return f"FunctionRef({self.name})"


class Closure:
    __slots__ = ("index", "name", "arity", "captured", "code")

    def __init__(self, index, name, arity, captured, code=None):
        self.index = index
        self.name = name
        self.arity = arity  # declared parameters, captures excluded
        self.captured = captured
        self.code = code  # engine-specific callable body

    def __repr__(self):
        return f"Closure({self.name}, captured={self.captured!r})"


class StructType:
    __slots__ = ("name", "fields", "field_index")

    def __init__(self, name, fields):
        self.name = name
        self.fields = tuple(fields)
        self.field_index = {f: i for i, f in enumerate(self.fields)}

    def __repr__(self):
        return f"StructType({self.name}, {self.fields})"


class StructureInstance:
    __slots__ = ("stype", "values")

    def __init__(self, stype, values):
        assert len(values) == len(stype.fields)
        self.stype = stype
        self.values = list(values)


class DynamicObject:
    __slots__ = ("shape", "slots")

    def __init__(self, shape):
        self.shape = shape
        self.slots = []


class Kind(enum.Enum):
    Int = "Int"
    Long = "Long"
    Double = "Double"
    Bool = "Bool"
    Str = "Str"
    Null = "Null"
    FunctionRef = "FunctionRef"
    Closure = "Closure"
    Tuple = "Tuple"
    List = "List"
    StructureInstance = "StructureInstance"
    DynamicObject = "DynamicObject"

    def __str__(self):
        return self.value


KIND_OF_TYPE = {
    int: Kind.Int,
    Long: Kind.Long,
    float: Kind.Double,
    bool: Kind.Bool,
    str: Kind.Str,
    type(None): Kind.Null,
    FunctionRef: Kind.FunctionRef,
    Closure: Kind.Closure,
    tuple: Kind.Tuple,
    list: Kind.List,
    StructureInstance: Kind.StructureInstance,
    DynamicObject: Kind.DynamicObject,
}
TYPE_OF_KIND = {k: t for t, k in KIND_OF_TYPE.items()}

NUMERIC_TYPES = (int, Long, float)
CALLABLE_TYPES = (FunctionRef, Closure)


def kind(v):
    try:
        return KIND_OF_TYPE[type(v)]
    except KeyError:
        raise TypeError(f"not a mini-language value: {v!r}") from None


def kind_name(v):
    return KIND_OF_TYPE[type(v)].value


def type_name(v):
    """Name used for augmentation lookup and error messages."""
    if type(v) is StructureInstance:
        return v.stype.name
    return KIND_OF_TYPE[type(v)].value


INT_MIN, INT_MAX = -2**31, 2**31 - 1
LONG_MIN, LONG_MAX = -2**63, 2**63 - 1


def wrap32(x):
    if INT_MIN <= x <= INT_MAX:
        return x
    return ((x + 2**31) & 0xFFFFFFFF) - 2**31


def wrap64(x):
    if LONG_MIN <= x <= LONG_MAX:
        return Long(x)
    return Long(((x + 2**63) & 0xFFFFFFFFFFFFFFFF) - 2**63)


def render(v):
    """Text rendering used by ``println`` and string concatenation."""
    return _render(v, set())


def _render(v, active):
    t = type(v)
    if t is str:
        return v
    if t is int or t is Long:
        return str(int(v))
    if t is bool:
        return "true" if v else "false"
    if v is None:
        return "null"
    if t is float:
        return repr(v)
    if t in (tuple, list, StructureInstance, DynamicObject):
        if id(v) in active:
            return "..."
        active.add(id(v))
        try:
            if t is tuple:
                return "[" + ", ".join(_render(e, active) for e in v) + "]"
            if t is list:
                return "list[" + ", ".join(_render(e, active) for e in v) + "]"
            if t is StructureInstance:
                body = ", ".join(f"{f}={_render(x, active)}"
                                 for f, x in zip(v.stype.fields, v.values))
                return f"struct {v.stype.name}{{{body}}}"
            body = ", ".join(f"{name}={_render(v.slots[i], active)}"
                             for name, i in v.shape.properties.items())
            return f"DynamicObject{{{body}}}"
        finally:
            active.discard(id(v))
    if t is FunctionRef:
        return f"<function {v.name}>"
    if t is Closure:
        return f"<closure {v.name}>"
    raise TypeError(f"not a mini-language value: {v!r}")


def describe(v):
    """Kind-tagged rendering, e.g. ``Int 10`` (used by dumps and disassembly)."""
    t = type(v)
    if t is str:
        out = v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
        return f'Str "{out}"'
    if v is None:
        return "Null"
    return f"{kind_name(v)} {render(v)}"
