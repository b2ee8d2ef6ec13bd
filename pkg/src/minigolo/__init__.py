"""A small dynamic language with two engines: an inline-caching bytecode VM
and a self-specializing AST interpreter."""

from .errors import (
    ArityError, CompileTimeError, DivisionByZero, GoloRuntimeError, NoSuchMethod,
    StackOverflow, TypeMismatch,
)
from .interp import AstEngine
from .pipeline import compile_program, load_program, load_source
from .vm import BytecodeEngine, VmConfig

__version__ = "0.1.0"

__all__ = [
    "ArityError", "AstEngine", "BytecodeEngine", "CompileTimeError", "DivisionByZero",
    "GoloRuntimeError", "NoSuchMethod", "StackOverflow", "TypeMismatch", "VmConfig",
    "compile_program", "load_program", "load_source",
]
