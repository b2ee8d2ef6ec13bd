"""Micro-benchmarks comparing this artifact's own engine configurations.

Each suite is a mini-language program exposing ``run``; the harness
compiles it once per configuration, checks the result against a Python
oracle, then times ``warmup + runs`` calls on the same engine instance so
that call-site caches and node specializations stay warm.
"""

import math
import random
import statistics
import time
from dataclasses import dataclass, field

from .dispatch import DispatchPolicy
from .interp import AstEngine
from .pipeline import compile_program, load_source
from .runner import run_deep
from .vm import BytecodeEngine, VmConfig

FIB_SOURCE = """\
module bench.Fib

function fib = |n| {
  if n <= 1 {
    return n
  } else {
    return fib(n - 1) + fib(n - 2)
  }
}

function run = |n| -> fib(n)
"""

GCD_SOURCE = """\
module bench.Gcd

function gcd = |a, b| {
  var x = a
  var y = b
  while y != 0 {
    let t = y
    y = x % y
    x = t
  }
  return x
}

function run = |pairs| {
  var total = 0_L
  var i = 0
  let n = pairs: size()
  while i < n {
    let p = pairs: get(i)
    total = total + gcd(p: get(0), p: get(1))
    i = i + 1
  }
  return total
}
"""

FMR_SOURCE = """\
module bench.Fmr

function run = |n| -> range(0, n)
  : filter(|x| -> x % 2 == 0)
  : map(|x| -> x: toLong() * x)
  : reduce(0_L, |acc, x| -> acc + x)
"""

SUITES = ("fib", "gcd", "fmr")
ENGINES = ("ast", "bytecode")
BYTECODE_POLICIES = ("mono", "none", "poly:2")
AST_MODES = ("generic", "specialized")
CSV_HEADER = "suite,engine,policy,param,iterations,median_ns,p10_ns,p90_ns"
GCD_SEED = 42


class BenchError(Exception):
    pass


@dataclass
class BenchConfig:
    suites: tuple = SUITES
    engines: tuple = ENGINES
    bytecode_policies: tuple = BYTECODE_POLICIES
    ast_modes: tuple = AST_MODES
    warmup: int = 3
    runs: int = 10
    fib_n: int = 25
    gcd_pairs: int = 1000
    fmr_n: int = 100000

    def __post_init__(self):
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for s in self.suites:
            if s not in SUITES:
                raise ValueError(f"unknown suite {s!r}")
        for e in self.engines:
            if e not in ENGINES:
                raise ValueError(f"unknown engine {e!r}")
        for p in self.bytecode_policies:
            DispatchPolicy.parse(p)
        for m in self.ast_modes:
            if m not in AST_MODES:
                raise ValueError(f"unknown ast mode {m!r}")


@dataclass
class BenchRow:
    suite: str
    engine: str
    policy: str
    param: str
    iterations: int
    median_ns: int
    p10_ns: int
    p90_ns: int
    samples: list = field(default_factory=list, repr=False, compare=False)

    def csv(self):
        return (f"{self.suite},{self.engine},{self.policy},{self.param},{self.iterations},"
                f"{self.median_ns},{self.p10_ns},{self.p90_ns}")


# -- oracles -------------------------------------------------------------------

def fib_oracle(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def gcd_pairs(count, seed=GCD_SEED):
    rng = random.Random(seed)
    return tuple((rng.randint(1, 10**9), rng.randint(1, 10**9)) for _ in range(count))


def gcd_oracle(pairs):
    return sum(math.gcd(a, b) for a, b in pairs)


def fmr_oracle(n):
    """Closed form of sum((2k)^2) over the even numbers in [0, n)."""
    m = (n - 1) // 2 if n > 0 else -1
    return 4 * m * (m + 1) * (2 * m + 1) // 6 if m >= 0 else 0


# -- suites --------------------------------------------------------------------

def _suite(name, config):
    if name == "fib":
        return FIB_SOURCE, [config.fib_n], fib_oracle(config.fib_n), f"n={config.fib_n}"
    if name == "gcd":
        pairs = gcd_pairs(config.gcd_pairs)
        return GCD_SOURCE, [pairs], gcd_oracle(pairs), f"seed={GCD_SEED};pairs={config.gcd_pairs}"
    return FMR_SOURCE, [config.fmr_n], fmr_oracle(config.fmr_n), f"n={config.fmr_n}"


def make_engine(program, engine, policy):
    if engine == "bytecode":
        return BytecodeEngine(compile_program(program), VmConfig(DispatchPolicy.parse(policy)))
    return AstEngine(program.modules(), specialize=(policy == "specialized"))


def _precheck(name, eng):
    # Small hand-checkable cases before any timing.
    if name == "gcd" and eng.call_function("gcd", [1071, 462]) != 21:
        raise BenchError("gcd pre-check failed: gcd(1071, 462) != 21")
    if name == "fmr" and eng.call_function("run", [10]) != 120:
        raise BenchError("fmr pre-check failed: n=10 should give 120")


def _percentiles(samples):
    if len(samples) == 1:
        return samples[0], samples[0], samples[0]
    q = statistics.quantiles(samples, n=10, method="inclusive")
    return int(statistics.median(samples)), int(q[0]), int(q[-1])


def configurations(config):
    out = []
    for engine in sorted(config.engines):
        policies = config.bytecode_policies if engine == "bytecode" else config.ast_modes
        for policy in sorted(policies):
            out.append((engine, policy))
    return out


def bench_one(name, engine, policy, config, clock=time.perf_counter_ns):
    source, args, expected, param = _suite(name, config)
    program = load_source(source, f"<bench {name}>")
    eng = make_engine(program, engine, policy)
    _precheck(name, eng)
    got = eng.call_function("run", list(args))
    if got != expected:
        raise BenchError(f"{name} on {engine}/{policy}: got {got}, expected {expected}")
    for _ in range(config.warmup):
        eng.call_function("run", list(args))
    samples = []
    for _ in range(config.runs):
        call_args = list(args)
        t0 = clock()
        eng.call_function("run", call_args)
        samples.append(clock() - t0)
    median, p10, p90 = _percentiles(samples)
    return BenchRow(name, engine, policy, param, config.runs, median, p10, p90, samples)


def run_bench(config, progress=None):
    rows = []
    for name in sorted(config.suites):
        for engine, policy in configurations(config):
            row = run_deep(bench_one, name, engine, policy, config)
            if progress is not None:
                progress(row)
            rows.append(row)
    return rows


def emit_csv(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv() + "\n")
