"""``minigolo`` command line: run, compile and bench."""

import argparse
import sys

from . import ir as IR
from .bench import BenchConfig, BenchError, emit_csv, run_bench
from .compiler import disassemble
from .dispatch import DispatchPolicy, format_site_stats
from .errors import CompileTimeError, GoloRuntimeError, StackOverflow
from .interp import AstEngine, dump_profile
from .lexer import render_tokens, tokenize
from .parser import parse
from .pipeline import compile_program, lifted_modules, load_program
from .runner import format_trace, run_deep
from .syntax import render_ast
from .vm import BytecodeEngine, VmConfig

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_COMPILE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="minigolo", description="mini-Golo toolchain")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a program")
    run.add_argument("file")
    run.add_argument("args", nargs="*", help="passed to main as a tuple of strings")
    run.add_argument("--engine", choices=("bytecode", "ast"), default="bytecode")
    run.add_argument("--cache-policy", default=None)
    run.add_argument("--no-specialize", action="store_true")
    run.add_argument("--dispatch-depth", type=int, default=None)
    run.add_argument("--dump-dispatch-stats", action="store_true")
    run.add_argument("--dump-profile", action="store_true")
    run.add_argument("--instrument-boxing", action="store_true")
    run.add_argument("--max-call-depth", type=int, default=100000)

    comp = sub.add_parser("compile", help="print an intermediate form")
    comp.add_argument("file")
    comp.add_argument("--emit", choices=("tokens", "ast", "ir", "bytecode"), required=True)

    bench = sub.add_parser("bench", help="run the micro-benchmarks")
    bench.add_argument("--suite", choices=("fib", "gcd", "fmr", "all"), default="all")
    bench.add_argument("--engine", choices=("bytecode", "ast", "all"), default="all")
    bench.add_argument("--warmup", type=int, default=3)
    bench.add_argument("--runs", type=int, default=10)
    bench.add_argument("--csv", default=None)
    bench.add_argument("--fib-n", type=int, default=25)
    bench.add_argument("--gcd-pairs", type=int, default=1000)
    bench.add_argument("--fmr-n", type=int, default=100000)
    bench.add_argument("--policies", default=None,
                       help="comma-separated bytecode policies (default mono,poly:2,none)")
    return p


def _validate_run(ns):
    if ns.engine == "bytecode":
        for flag, given in (("--no-specialize", ns.no_specialize),
                            ("--dispatch-depth", ns.dispatch_depth is not None),
                            ("--dump-profile", ns.dump_profile),
                            ("--instrument-boxing", ns.instrument_boxing)):
            if given:
                raise UsageError(f"{flag} requires --engine ast")
        try:
            ns.policy = DispatchPolicy.parse(ns.cache_policy or "mono")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        for flag, given in (("--cache-policy", ns.cache_policy is not None),
                            ("--dump-dispatch-stats", ns.dump_dispatch_stats)):
            if given:
                raise UsageError(f"{flag} requires --engine bytecode")
        if ns.dispatch_depth is None:
            ns.dispatch_depth = 3
        if ns.dispatch_depth < 1:
            raise UsageError("--dispatch-depth must be >= 1")
    if ns.max_call_depth < 1:
        raise UsageError("--max-call-depth must be >= 1")


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _compile_error(exc, default_name, err):
    err.write(exc.format(getattr(exc, "filename", default_name)) + "\n")
    return EXIT_COMPILE


def cmd_run(ns, out, err):
    _validate_run(ns)
    _read(ns.file)
    try:
        program = load_program(ns.file)
        if image_missing_main(program):
            raise CompileTimeError("module has no main function", 1, 1)
        if ns.engine == "bytecode":
            image = compile_program(program)
            config = VmConfig(ns.policy, ns.max_call_depth, ns.dump_dispatch_stats)
            engine = BytecodeEngine(image, config, out)
        else:
            engine = AstEngine(program.modules(), specialize=not ns.no_specialize,
                               dispatch_depth=ns.dispatch_depth,
                               instrument_boxing=ns.instrument_boxing,
                               max_call_depth=ns.max_call_depth, out=out)
    except CompileTimeError as exc:
        return _compile_error(exc, ns.file, err)

    status = EXIT_OK
    try:
        run_deep(engine.run_main, ns.args, max_call_depth=ns.max_call_depth)
    except GoloRuntimeError as exc:
        status = EXIT_RUNTIME
        out.flush()
        err.write(format_trace(exc) + "\n")
    except RecursionError:
        status = EXIT_RUNTIME
        out.flush()
        err.write(StackOverflow("host recursion limit reached").headline() + "\n")
    out.flush()
    if ns.engine == "bytecode" and ns.dump_dispatch_stats:
        err.write(format_site_stats(engine.sites))
    if ns.engine == "ast":
        if ns.dump_profile:
            err.write(dump_profile(engine))
        if ns.instrument_boxing:
            err.write(f"boxed-allocations: {engine.boxes.count}\n")
    return status


def image_missing_main(program):
    return all(fn.name != "main" for fn in program.main.functions)


def cmd_compile(ns, out, err):
    source = _read(ns.file)
    try:
        if ns.emit == "tokens":
            out.write(render_tokens(tokenize(source)))
        elif ns.emit == "ast":
            out.write(render_ast(parse(tokenize(source))))
        else:
            program = load_program(ns.file)
            if ns.emit == "ir":
                out.write(IR.render_ir(lifted_modules(program)[0]))
            else:
                out.write(disassemble(compile_program(program)))
    except CompileTimeError as exc:
        return _compile_error(exc, ns.file, err)
    return EXIT_OK


def cmd_bench(ns, out, err):
    suites = ("fib", "gcd", "fmr") if ns.suite == "all" else (ns.suite,)
    engines = ("ast", "bytecode") if ns.engine == "all" else (ns.engine,)
    kwargs = {}
    if ns.policies:
        kwargs["bytecode_policies"] = tuple(p.strip() for p in ns.policies.split(","))
    try:
        config = BenchConfig(suites, engines, warmup=ns.warmup, runs=ns.runs, fib_n=ns.fib_n,
                             gcd_pairs=ns.gcd_pairs, fmr_n=ns.fmr_n, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def progress(row):
        err.write(f"{row.suite} {row.engine} {row.policy}: median {row.median_ns / 1e6:.3f} ms\n")
        err.flush()

    try:
        rows = run_bench(config, progress)
    except BenchError as exc:
        err.write(f"error: benchmark: {exc}\n")
        return EXIT_RUNTIME
    out.write("suite,engine,policy,param,iterations,median_ns,p10_ns,p90_ns\n")
    for row in rows:
        out.write(row.csv() + "\n")
    if ns.csv:
        try:
            emit_csv(rows, ns.csv)
        except OSError as exc:
            err.write(f"error: cannot write {ns.csv}: {exc.strerror}\n")
            return EXIT_RUNTIME
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compile": cmd_compile, "bench": cmd_bench}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        return COMMANDS[ns.command](ns, out, err)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE


def entry():
    sys.exit(main())
