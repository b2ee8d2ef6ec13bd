"""Acceptance checks, one test per criterion.

Each test prints a ``PASS criterion N`` or ``FAIL criterion N`` line to the
terminal (even under output capture) before asserting.  Run them alone with

    pytest tests/test_acceptance.py -v

and add ``--extended`` for the fib 38..42 lines.
"""

import io
import random
import re
import time

import pytest

import minigolo.interp as interp_mod
import minigolo.operators as operators_mod
from golo_util import CONFIGS, CORPUS, GCD_SUB, cli, config_flags, engine_for
from minigolo.bench import FMR_SOURCE, GCD_SOURCE, BenchConfig, bench_one, fmr_oracle, gcd_pairs
from minigolo.dispatch import DispatchPolicy
from minigolo.errors import GoloRuntimeError
from minigolo.interp import GENERIC, SPECIALIZED, UNINITIALIZED, AstEngine
from minigolo.operators import BINARY_NAMES, apply_operator
from minigolo.pipeline import compile_program, load_program, load_source
from minigolo.runner import run_deep
from minigolo.shapes import ShapeTree
from minigolo.values import DynamicObject, Long
from minigolo.vm import BytecodeEngine, VmConfig

FIB_PROGRAM = """\
module samples.Concurrency

local function fib = |n| {
  if n <= 1 {
    return n
  } else {
    return fib(n - 1) + fib(n - 2)
  }
}

function main = |args| {
  let results = list[]
  let ns = [NS]
  var i = 0
  while i < ns: size() {
    let n = ns: get(i)
    results: add(n + " -> " + fib(n))
    i = i + 1
  }
  print(results: reduce("", |acc, next| -> acc + next + "\\n"))
}
"""

# Output block of the concurrent fib sample.
FIB_BLOCK = {
    30: 832040, 34: 5702887, 35: 9227465, 38: 39088169, 39: 63245986,
    40: 102334155, 41: 165580141, 42: 267914296,
}


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def _fib_check(tmp_path, ns, report, number):
    path = tmp_path / "fib_sample.golo"
    path.write_text(FIB_PROGRAM.replace("NS", ", ".join(map(str, ns))))
    want = "".join(f"{n} -> {FIB_BLOCK[n]}\n" for n in ns)
    bad = []
    times = []
    for engine, mode in CONFIGS:
        t0 = time.perf_counter()
        code, out, err = cli("run", str(path), *config_flags(engine, mode))
        times.append(f"{engine}/{mode} {time.perf_counter() - t0:.0f}s")
        if (code, out) != (0, want):
            bad.append(f"{engine}/{mode}: exit {code}, {out!r} {err[:200]!r}")
    report(number, not bad, f"fib {ns} on {len(CONFIGS)} configurations ({', '.join(times)})"
           + (f"; {bad}" if bad else ""))


# -- 1 -------------------------------------------------------------------------

def test_criterion_1_fib_output_block(tmp_path, report):
    _fib_check(tmp_path, [30, 34, 35], report, 1)


@pytest.mark.extended
def test_criterion_1_fib_output_block_extended(tmp_path, report):
    _fib_check(tmp_path, [38, 39, 40, 41, 42], report, "1 (extended)")


# -- 2 -------------------------------------------------------------------------

def test_criterion_2_differential_corpus(report):
    programs = sorted((CORPUS / "ok").glob("*.golo"))
    mismatches = []
    for path in programs:
        results = {(e, m): cli("run", str(path), *config_flags(e, m))[:2] for e, m in CONFIGS}
        if len(set(results.values())) != 1:
            mismatches.append(path.stem)

    # Every binary operator must meet every pairing of numeric kinds somewhere.
    seen = set()
    original = operators_mod.lookup_operator

    def spy(name, ta, tb=None):
        seen.add((name, ta, tb))
        return original(name, ta, tb)

    interp_mod.lookup_operator = spy
    try:
        for path in programs:
            eng = AstEngine(load_program(str(path)).modules(), specialize=False, out=io.StringIO())
            try:
                run_deep(eng.run_main, [])
            except GoloRuntimeError:
                pass
    finally:
        interp_mod.lookup_operator = original
    numeric = (int, Long, float)
    uncovered = [(n, a.__name__, b.__name__) for n in BINARY_NAMES.values()
                 for a in numeric for b in numeric if (n, a, b) not in seen]

    ok = len(programs) >= 30 and not mismatches and not uncovered
    report(2, ok, f"{len(programs)} programs x {len(CONFIGS)} configurations, "
                  f"mismatches={mismatches}, uncovered numeric pairs={len(uncovered)}")


# -- 3 -------------------------------------------------------------------------

MONO_LOOP = """\
module ic.Mono
function main = |args| {
  var i = 0
  var t = 0
  while i < 10000 {
    t = t + i % 7
    i = i + 1
  }
  println(t)
}
"""

ALTERNATING = """\
module ic.Alternate
function main = |args| {
  let vals = [3, 1.5]
  var i = 0
  var t = 0.0
  while i < 10000 {
    t = t + vals: get(i % 2) * 2
    i = i + 1
  }
  println(t)
}
"""

STAT = re.compile(r"site=(\d+) kind=(\w+) name=(\w+) hits=(\d+) misses=(\d+) "
                  r"relinks=(\d+) depth=(\d+) mega=(\w+)")


def _stats(tmp_path, source, policy):
    path = tmp_path / "ic.golo"
    path.write_text(source)
    code, out, err = cli("run", str(path), "--cache-policy", policy, "--dump-dispatch-stats")
    assert code == 0, err
    return out, [dict(zip(("id", "kind", "name", "hits", "misses", "relinks", "depth", "mega"), m.groups()))
                 for m in STAT.finditer(err)]


def test_criterion_3_inline_cache_counters(tmp_path, report):
    notes = []
    out, rows = _stats(tmp_path, MONO_LOOP, "mono")
    ops = [r for r in rows if r["kind"] == "operator"]
    for r in ops:
        hits, misses = int(r["hits"]), int(r["misses"])
        if misses != 1 or int(r["relinks"]) != 1 or hits / (hits + misses) < 0.999:
            notes.append(f"mono loop {r}")
    worst = min(int(r["hits"]) / (int(r["hits"]) + int(r["misses"])) for r in ops)

    out, rows = _stats(tmp_path, ALTERNATING, "mono")
    assert out == "45000.0\n"
    times = [r for r in rows if r["name"] == "times"]
    relinks_mono = int(times[0]["relinks"])
    if len(times) != 1 or abs(relinks_mono - 10000) > 1:
        notes.append(f"mono alternation relinks={relinks_mono}")

    out, rows = _stats(tmp_path, ALTERNATING, "poly:2")
    assert out == "45000.0\n"
    over = [r for r in rows if int(r["relinks"]) > 2]
    if over:
        notes.append(f"poly:2 sites over 2 relinks: {over}")
    relinks_poly = int([r for r in rows if r["name"] == "times"][0]["relinks"])

    report(3, not notes,
           f"{len(ops)} mono-loop operator sites, worst hit rate {worst:.5f}; "
           f"alternation relinks mono={relinks_mono} poly:2={relinks_poly}"
           + (f"; {notes}" if notes else ""))


# -- 4 -------------------------------------------------------------------------

def test_criterion_4_mono_beats_none_on_gcd(report):
    cfg = BenchConfig(suites=("gcd",), engines=("bytecode",), warmup=3, runs=10)
    mono = run_deep(bench_one, "gcd", "bytecode", "mono", cfg)
    none = run_deep(bench_one, "gcd", "bytecode", "none", cfg)
    ratio = none.median_ns / mono.median_ns

    # Fallback invocations on the same workload, counted on fresh engines.
    misses = {}
    for policy in ("mono", "none"):
        image = compile_program(load_source(GCD_SOURCE))
        eng = BytecodeEngine(image, VmConfig(DispatchPolicy.parse(policy)))
        run_deep(eng.call_function, "run", [gcd_pairs(1000)])
        misses[policy] = sum(s.misses for s in eng.sites)
    fraction = misses["mono"] / misses["none"]

    ok = ratio >= 2.0
    report(4, ok, f"gcd median mono {mono.median_ns / 1e6:.2f} ms, none {none.median_ns / 1e6:.2f} ms, "
                  f"ratio {ratio:.2f}x (need >= 2x); fallback invocations mono/none = "
                  f"{misses['mono']}/{misses['none']} = {fraction:.5%}")
    assert fraction < 0.001


# -- 5 -------------------------------------------------------------------------

def test_criterion_5_boxing(report):
    m = 10**4
    counts = {}
    for mode in ("specialized", "generic"):
        eng = engine_for(GCD_SUB, "ast", mode, instrument_boxing=True)
        eng.call_function("gcd", [3, 2])  # both branches seen once
        eng.boxes.reset()
        # gcd(m + 1, 1) runs the loop body exactly m times
        assert eng.call_function("gcd", [m + 1, 1]) == 1
        counts[mode] = eng.boxes.count
    ok = counts["specialized"] == 0 and counts["generic"] >= m
    report(5, ok, f"M={m}: specialized {counts['specialized']} boxes, "
                  f"no-specialize {counts['generic']} boxes")


# -- 6 -------------------------------------------------------------------------

def test_criterion_6_lattice_monotone(report):
    rng = random.Random(2024)
    ops = ["+", "-", "*", "/", "<", "==", "!="]
    pools = [lambda: rng.randint(-100, 100), lambda: Long(rng.randint(-100, 100)),
             lambda: rng.uniform(-100, 100), lambda: rng.choice(["a", "bc"]),
             lambda: rng.choice([True, False]), lambda: None]
    sources = {op: load_source(f"module lat\nfunction f = |a, b| -> a {op} b\n") for op in ops}
    violations = []
    wrong = []
    traces = 10**4
    order = {UNINITIALIZED: 0, SPECIALIZED: 1, GENERIC: 2}

    def listener(node, old, new):
        if order[new[0]] < order[old[0]] or (old[0] == new[0] == SPECIALIZED and old[1] != new[1]):
            violations.append((old, new))

    for _ in range(traces):
        op = rng.choice(ops)
        eng = AstEngine(sources[op].modules(), listener=listener)
        kinds = [rng.randrange(len(pools)) for _ in range(2)]
        for _ in range(rng.randint(1, 12)):
            if rng.random() < 0.3:
                kinds = [rng.randrange(len(pools)) for _ in range(2)]
            a, b = pools[kinds[0]](), pools[kinds[1]]()
            try:
                expected = ("ok", apply_operator(op, a, b))
            except GoloRuntimeError as exc:
                expected = ("err", type(exc))
            try:
                got = ("ok", eng.call_function("f", [a, b]))
            except GoloRuntimeError as exc:
                got = ("err", type(exc))
            if got != expected or (got[0] == "ok" and type(got[1]) is not type(expected[1])):
                wrong.append((op, a, b, got, expected))
    report(6, not violations and not wrong,
           f"{traces} random traces, {len(violations)} backward transitions, "
           f"{len(wrong)} result mismatches")


# -- 7 -------------------------------------------------------------------------

SHAPES_PROGRAM = """\
module shapes.Sharing
function build = |n| {
  let out = list[]
  var i = 0
  while i < n {
    let o = DynamicObject()
    o: define("name", i)
    o: define("age", i * 2)
    o: define("city", "x")
    out: add(o)
    i = i + 1
  }
  return out
}
function diverge = || {
  let a = DynamicObject(): define("name", 1): define("age", 2)
  let b = DynamicObject(): define("age", 2): define("name", 1)
  let c = DynamicObject(): define("name", 1): define("city", 2)
  return [a, b, c]
}
"""


def test_criterion_7_shape_sharing(report):
    notes = []
    for engine, mode in (("bytecode", "mono"), ("ast", "specialized")):
        eng = engine_for(SHAPES_PROGRAM, engine, mode)
        objs = eng.call_function("build", [100])
        ids = {o.shape.id for o in objs}
        if len(objs) != 100 or len(ids) != 1:
            notes.append(f"{engine}: {len(ids)} shape ids for 100 objects")
        a, b, c = eng.call_function("diverge", [])
        if len({a.shape.id, b.shape.id, c.shape.id}) != 3:
            notes.append(f"{engine}: divergent sequences share a shape")

    rng = random.Random(7)
    tree = ShapeTree()
    checked = 0
    for _ in range(2000):
        p = [rng.choice("abcde") for _ in range(rng.randint(0, 6))]
        q = [rng.choice("abcde") for _ in range(rng.randint(0, 6))]
        sp, sq = tree.root, tree.root
        for name in p:
            sp = tree.define(sp, name)
        for name in q:
            sq = tree.define(sq, name)
        same = list(dict.fromkeys(p)) == list(dict.fromkeys(q))
        if (sp.id == sq.id) != same:
            notes.append(f"sequences {p} {q}")
        checked += 1
    objs = []
    for _ in range(100):
        o = DynamicObject(tree.root)
        for name in ("x", "y", "z"):
            o.shape = tree.define(o.shape, name)
        objs.append(o)
    if len({o.shape.id for o in objs}) != 1:
        notes.append("API objects do not share a shape")
    report(7, not notes, f"100 objects share one shape on both engines; "
                         f"{checked} random sequence pairs" + (f"; {notes[:3]}" if notes else ""))


# -- 8 -------------------------------------------------------------------------

def test_criterion_8_bad_references(report):
    files = sorted((CORPUS / "bad-ref").glob("*.golo"))
    bad = []
    for path in files:
        ident, line = re.search(r"# expect: (\S+) (\d+)", path.read_text()).groups()
        for engine, mode in (("bytecode", "mono"), ("ast", "specialized")):
            code, out, err = cli("run", str(path), *config_flags(engine, mode))
            first = err.splitlines()[0] if err else ""
            if code != 2 or f":{line}:" not in first or not re.search(rf"\b{re.escape(ident)}\b", first):
                bad.append(f"{path.name} ({engine}): exit {code}, {first!r}")
    report(8, bool(files) and not bad, f"{len(files)} bad-ref files exit 2 naming identifier and line"
                                       + (f"; {bad}" if bad else ""))


# -- 9 -------------------------------------------------------------------------

def _oracle_script(n):
    total = 0
    for x in range(n):
        if x % 2 == 0:
            total += x * x
    return total


def test_criterion_9_fmr_oracle(report):
    n = 100000
    expected = _oracle_script(n)
    assert expected == fmr_oracle(n)
    got = {}
    for engine, mode in CONFIGS:
        eng = engine_for(FMR_SOURCE, engine, mode)
        got[f"{engine}/{mode}"] = run_deep(eng.call_function, "run", [n])
    bad = {k: v for k, v in got.items() if v != expected or type(v) is not Long}
    report(9, not bad, f"N={n}: expected {expected}, all {len(got)} configurations agree"
           if not bad else f"N={n}: expected {expected}, wrong: {bad}")
