"""Source files to checked IR, and checked IR to a runnable engine."""

import os
from dataclasses import dataclass, field

from . import ir as IR
from .compiler import compile as compile_image
from .errors import CheckError, CompileTimeError
from .lexer import tokenize
from .parser import parse


@dataclass
class Program:
    """A main module plus every module it (transitively) imports, all
    lowered and reference-checked.  Closures are not lifted yet."""

    main: IR.IrModule
    imports: dict = field(default_factory=dict)  # qualified name -> IrModule
    filename: str = "<source>"

    def modules(self):
        return [self.main, *self.imports.values()]


def frontend(source):
    return parse(tokenize(source))


def _module_file(base_dir, qname):
    parts = qname.split(".")
    for candidate in (os.path.join(base_dir, parts[-1] + ".golo"),
                      os.path.join(base_dir, *parts) + ".golo"):
        if os.path.isfile(candidate):
            return candidate
    return None


def load_source(source, filename="<source>", base_dir=None):
    """Parse, lower and check ``source`` and everything it imports.

    Imports ``a.b.c`` resolve to ``c.golo`` or ``a/b/c.golo`` next to the
    main file.  Raises a CompileTimeError subclass; for errors inside an
    imported file the exception's ``filename`` names that file.
    """
    if base_dir is None:
        base_dir = os.path.dirname(os.path.abspath(filename)) if filename != "<source>" else os.getcwd()
    main = _lower_file(source, filename)
    files = {None: filename}
    imports = {}
    pending = [qname for qname, _ in main.imports]
    while pending:
        qname = pending.pop(0)
        if qname in imports:
            continue
        path = _module_file(base_dir, qname)
        if path is None:
            continue  # reported by check_references as an unknown module
        with open(path, encoding="utf-8") as fh:
            mod = _lower_file(fh.read(), path)
        imports[qname] = mod
        files[qname] = path
        pending.extend(q for q, _ in mod.imports)

    for qname, mod in [(None, main), *imports.items()]:
        visible = {q: imports[q] for q, _ in mod.imports if q in imports}
        diags = IR.check_references(mod, visible)
        if diags:
            err = CheckError(diags)
            err.filename = files[qname]
            raise err
    return Program(main, imports, filename)


def _lower_file(source, filename):
    try:
        return IR.lower(frontend(source))
    except CompileTimeError as exc:
        exc.filename = filename
        raise


def load_program(path):
    with open(path, encoding="utf-8") as fh:
        source = fh.read()
    return load_source(source, path)


def lifted_modules(program):
    """Closure-lift and slot-allocate every module of ``program``."""
    out = []
    for mod in program.modules():
        lifted = IR.lift_closures(mod)
        for fn in lifted.all_functions():
            IR.allocate_slots(fn)
        out.append(lifted)
    return out


def compile_program(program):
    main, *rest = lifted_modules(program)
    return compile_image(main, rest)
