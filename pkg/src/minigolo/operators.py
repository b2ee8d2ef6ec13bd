"""Operator semantics.

``lookup_operator`` is the slow path: it scans the rule table for the first
rule applicable to the observed operand kinds and returns a target that is
only valid for exactly those kinds.  Call sites cache such targets behind a
guard; ``apply_operator`` is the uncached composition of the two steps.
"""

import math

from .errors import DivisionByZero, NotNumeric, TypeMismatch
from .values import (
    KIND_OF_TYPE, NUMERIC_TYPES, FunctionRef, Kind, Long, render, wrap32, wrap64,
)

BINARY_NAMES = {
    "+": "plus", "-": "minus", "*": "times", "/": "divide", "%": "modulo",
    "==": "equals", "!=": "notequals", "<": "less", "<=": "lessorequals",
    ">": "more", ">=": "moreorequals",
}
UNARY_NAMES = {"-": "neg", "not": "not"}
OPERATOR_ARITY = {name: 2 for name in BINARY_NAMES.values()}
OPERATOR_ARITY.update({"neg": 1, "not": 1})

_NUMERIC_KINDS = (Kind.Int, Kind.Long, Kind.Double)


def promote(a, b):
    """Widest-wins numeric promotion over :class:`Kind` values."""
    if a not in _NUMERIC_KINDS or b not in _NUMERIC_KINDS:
        raise NotNumeric(f"cannot promote ({a}, {b}): not numeric")
    if a is Kind.Double or b is Kind.Double:
        return Kind.Double
    if a is Kind.Long or b is Kind.Long:
        return Kind.Long
    return Kind.Int


def _promote_types(ta, tb):
    return promote(KIND_OF_TYPE[ta], KIND_OF_TYPE[tb])


# -- integral helpers ----------------------------------------------------

def _trunc_div(a, b):
    if b == 0:
        raise DivisionByZero("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _trunc_mod(a, b):
    if b == 0:
        raise DivisionByZero("integer modulo by zero")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _float_div(a, b):
    a = float(a)
    b = float(b)
    try:
        return a / b
    except ZeroDivisionError:
        if a != a or a == 0.0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _float_mod(a, b):
    try:
        return math.fmod(float(a), float(b))
    except ValueError:
        return math.nan


# -- per-kind cores ------------------------------------------------------
# Each core assumes the operands already are of the kinds it was chosen for.

def int_plus(a, b):
    r = a + b
    if -2147483648 <= r <= 2147483647:
        return r
    return wrap32(r)


def int_minus(a, b):
    r = a - b
    if -2147483648 <= r <= 2147483647:
        return r
    return wrap32(r)


def int_times(a, b):
    return wrap32(a * b)


def int_divide(a, b):
    return wrap32(_trunc_div(a, b))


def int_modulo(a, b):
    return _trunc_mod(a, b)


def long_plus(a, b):
    return wrap64(a + b)


def long_minus(a, b):
    return wrap64(a - b)


def long_times(a, b):
    return wrap64(a * b)


def long_divide(a, b):
    return wrap64(_trunc_div(int(a), int(b)))


def long_modulo(a, b):
    return Long(_trunc_mod(int(a), int(b)))


def double_plus(a, b):
    return float(a) + float(b)


def double_minus(a, b):
    return float(a) - float(b)


def double_times(a, b):
    return float(a) * float(b)


_ARITH = {
    "plus": {Kind.Int: int_plus, Kind.Long: long_plus, Kind.Double: double_plus},
    "minus": {Kind.Int: int_minus, Kind.Long: long_minus, Kind.Double: double_minus},
    "times": {Kind.Int: int_times, Kind.Long: long_times, Kind.Double: double_times},
    "divide": {Kind.Int: int_divide, Kind.Long: long_divide, Kind.Double: _float_div},
    "modulo": {Kind.Int: int_modulo, Kind.Long: long_modulo, Kind.Double: _float_mod},
}


_INTEGRAL_COMPARE = {
    "less": lambda a, b: a < b,
    "lessorequals": lambda a, b: a <= b,
    "more": lambda a, b: a > b,
    "moreorequals": lambda a, b: a >= b,
    "equals": lambda a, b: a == b,
    "notequals": lambda a, b: a != b,
}

_DOUBLE_COMPARE = {
    "less": lambda a, b: float(a) < float(b),
    "lessorequals": lambda a, b: float(a) <= float(b),
    "more": lambda a, b: float(a) > float(b),
    "moreorequals": lambda a, b: float(a) >= float(b),
    "equals": lambda a, b: float(a) == float(b),
    "notequals": lambda a, b: float(a) != float(b),
}


def values_equal(a, b):
    """Structural equality for Str/Tuple, promotion for numerics, identity otherwise."""
    ta = type(a)
    tb = type(b)
    if ta in NUMERIC_TYPES and tb in NUMERIC_TYPES:
        if ta is float or tb is float:
            return float(a) == float(b)
        return int(a) == int(b)
    if ta is not tb:
        return False
    if ta is str or ta is bool or a is None:
        return a == b
    if ta is tuple:
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if ta is FunctionRef:
        return a.index == b.index
    return a is b


# -- rule table ----------------------------------------------------------

class OperatorRule:
    __slots__ = ("name", "applies", "build")

    def __init__(self, name, applies, build):
        self.name = name
        self.applies = applies
        self.build = build


def _numeric(ta, tb):
    return ta in NUMERIC_TYPES and tb in NUMERIC_TYPES


def _arith_builder(name):
    table = _ARITH[name]
    return lambda ta, tb: table[_promote_types(ta, tb)]


def _compare_builder(name):
    def build(ta, tb):
        if _promote_types(ta, tb) is Kind.Double:
            return _DOUBLE_COMPARE[name]
        return _INTEGRAL_COMPARE[name]
    return build


def _str_concat(ta, tb):
    if ta is str and tb is str:
        return lambda a, b: a + b
    if ta is str:
        return lambda a, b: a + render(b)
    return lambda a, b: render(a) + b


def _str_compare(name):
    return lambda ta, tb: _INTEGRAL_COMPARE[name]


def _always(result):
    return lambda a, b: result


def _values_differ(a, b):
    return not values_equal(a, b)


def _equality(negate):
    def build(ta, tb):
        if ta is not tb and not _numeric(ta, tb):
            return _always(negate)
        return _values_differ if negate else values_equal
    return build


def _build_rules():
    rules = []
    for name in ("plus", "minus", "times", "divide", "modulo"):
        rules.append(OperatorRule(name, _numeric, _arith_builder(name)))
    rules.append(OperatorRule("plus", lambda ta, tb: ta is str or tb is str, _str_concat))
    for name in ("less", "lessorequals", "more", "moreorequals"):
        rules.append(OperatorRule(name, _numeric, _compare_builder(name)))
        rules.append(OperatorRule(name, lambda ta, tb: ta is str and tb is str, _str_compare(name)))
    rules.append(OperatorRule("equals", _numeric, _compare_builder("equals")))
    rules.append(OperatorRule("notequals", _numeric, _compare_builder("notequals")))
    rules.append(OperatorRule("equals", lambda ta, tb: True, _equality(False)))
    rules.append(OperatorRule("notequals", lambda ta, tb: True, _equality(True)))
    rules.append(OperatorRule("neg", lambda ta, tb: ta is int, lambda ta, tb: lambda a: wrap32(-a)))
    rules.append(OperatorRule("neg", lambda ta, tb: ta is Long, lambda ta, tb: lambda a: wrap64(-a)))
    rules.append(OperatorRule("neg", lambda ta, tb: ta is float, lambda ta, tb: lambda a: -a))
    rules.append(OperatorRule("not", lambda ta, tb: ta is bool, lambda ta, tb: lambda a: not a))
    return tuple(rules)


RULES = _build_rules()


def mismatch(name, *types):
    kinds = ", ".join(KIND_OF_TYPE[t].value for t in types)
    return TypeMismatch(f"no operator {name}({kinds})")


def lookup_operator(name, ta, tb=None):
    """Full (uncached) resolution of operator ``name`` for host types ``ta``/``tb``."""
    for rule in RULES:
        if rule.name == name and rule.applies(ta, tb):
            return rule.build(ta, tb)
    if tb is None:
        raise mismatch(name, ta)
    raise mismatch(name, ta, tb)


def apply_operator(op, a, b):
    """Evaluate binary operator ``op`` (source spelling or canonical name)."""
    name = BINARY_NAMES.get(op, op)
    return lookup_operator(name, type(a), type(b))(a, b)


def apply_unary(op, a):
    name = UNARY_NAMES.get(op, op)
    return lookup_operator(name, type(a))(a)
