import pytest

from golo_util import CORPUS
from minigolo import ir as IR
from minigolo.errors import CaptureError, CheckError
from minigolo.parser import parse_source
from minigolo.pipeline import lifted_modules, load_program, load_source

OK_FILES = sorted((CORPUS / "ok").glob("*.golo"))


def lowered(source):
    mod = IR.lower(parse_source(source))
    return mod, IR.check_references(mod)


def lifted(source):
    mod, diags = lowered(source)
    assert diags == []
    out = IR.lift_closures(mod)
    for fn in out.all_functions():
        IR.allocate_slots(fn)
    return out


def nodes_of(fn, kind):
    return [n for n in IR.walk(fn.body) if type(n) is kind]


def test_locals_resolve_to_bindings():
    mod, diags = lowered("module m function f = |n| { let a = n + 1  return a }")
    assert diags == []
    fn = mod.function("f")
    refs = nodes_of(fn, IR.LocalRef)
    assert [r.binding.name for r in refs] == ["n", "a"]
    assert refs[0].binding is fn.params[0]


def test_globals_resolve_to_functions_and_builtins():
    mod, diags = lowered("module m function g = || -> 1 function f = || { println(g()) }")
    assert diags == []
    calls = {c.name: c.target for c in nodes_of(mod.function("f"), IR.CallGlobal)}
    assert calls["g"] == IR.Resolved("function", "m", "g")
    assert calls["println"].kind == "builtin"


@pytest.mark.parametrize("source, message, line", [
    ("module m\nfunction f = || {\n  return zork\n}", "undeclared reference: zork", 3),
    ("module m\nfunction f = || {\n  let a = 1\n  a = 2\n}", "cannot assign to let binding: a", 4),
    ("module m\nfunction f = || {\n  q = 2\n}", "undeclared reference: q", 3),
    ("module m\nimport no.such.place\nfunction f = || -> 1", "unknown module: no.such.place", 2),
    ("module m\nfunction f = || {\n  return println\n}", "builtin function cannot be used as a value", 3),
])
def test_reference_diagnostics(source, message, line):
    _, diags = lowered(source)
    assert diags and diags[0].message.startswith(message)
    assert diags[0].line == line


def test_one_diagnostic_per_site_sorted():
    _, diags = lowered("module m\nfunction f = || {\n  zork()\n  zork()\n  return plugh\n}")
    assert [(d.line, d.message) for d in diags] == [
        (3, "undeclared reference: zork"), (4, "undeclared reference: zork"),
        (5, "undeclared reference: plugh")]


def test_shadowing_in_nested_block():
    mod, diags = lowered(
        "module m function f = |x| { var y = x  if true { let x = 2  y = x }  return y }")
    assert diags == []
    refs = nodes_of(mod.function("f"), IR.LocalRef)
    assert refs[0].binding is mod.function("f").params[0]
    assert refs[1].binding is not mod.function("f").params[0]


def test_lift_removes_every_lambda():
    for path in OK_FILES:
        for mod in lifted_modules(load_program(path)):
            assert IR.lambda_count(mod) == 0


def test_lifted_function_puts_captures_first():
    mod = lifted("module m function f = |k| { let g = |x| -> x + k  return g(1) }")
    synth = mod.function("__lambda$0")
    assert synth.synthetic and synth.local
    assert synth.capture_count == 1
    assert [b.name for b in synth.params] == ["k", "x"]
    assert synth.arity == 1
    mk = nodes_of(mod.function("f"), IR.MakeClosure)
    assert len(mk) == 1 and mk[0].function == "__lambda$0"
    assert mk[0].captures[0].binding is mod.function("f").params[0]


def test_nested_lambdas_named_in_source_order():
    src = "module m function f = |a| { let g = |b| { let h = |c| -> a + b + c  return h(1) }  let k = |d| -> d  return g(k(2)) }"
    mod = lifted(src)
    names = [fn.name for fn in mod.functions if fn.synthetic]
    assert names == ["__lambda$0", "__lambda$1", "__lambda$2"]
    assert [b.name for b in mod.function("__lambda$1").params] == ["a", "b", "c"]
    assert [b.name for b in mod.function("__lambda$0").params] == ["a", "b"]


def test_lifting_is_deterministic():
    for path in OK_FILES:
        a = [IR.render_ir(m) for m in lifted_modules(load_program(path))]
        b = [IR.render_ir(m) for m in lifted_modules(load_program(path))]
        assert a == b


def test_lift_leaves_input_untouched():
    mod, _ = lowered("module m function f = |k| -> |x| -> x + k")
    before = IR.render_ir(mod)
    IR.lift_closures(mod)
    assert IR.render_ir(mod) == before
    assert IR.lambda_count(mod) == 1


def test_assigning_captured_variable_is_rejected():
    mod, diags = lowered("module m\nfunction f = || {\n  var c = 0\n  let g = || { c = c + 1 }\n  return g\n}")
    assert diags == []
    with pytest.raises(CaptureError) as info:
        IR.lift_closures(mod)
    assert "c" in info.value.message and info.value.line == 4


def test_slots_params_then_lets_in_order():
    mod = lifted("module m function f = |a, b| { let x = 1  var y = 2  if a { let z = 3 }  return x }")
    fn = mod.function("f")
    assert fn.local_slots == 5
    layout = {b.name: b.slot for b in fn.params}
    layout.update({s.binding.name: s.binding.slot for s in nodes_of(fn, IR.LetStmt)})
    assert layout == {"a": 0, "b": 1, "x": 2, "y": 3, "z": 4}


def test_slots_are_dense_and_unique_over_corpus():
    for path in OK_FILES:
        for mod in lifted_modules(load_program(path)):
            for fn in mod.all_functions():
                slots = [b.slot for b in fn.params]
                slots += [s.binding.slot for s in nodes_of(fn, IR.LetStmt)]
                assert sorted(slots) == list(range(fn.local_slots))


def test_render_ir_shows_targets_and_slots():
    mod = lifted("module m function g = || -> 1 function f = |n| { let a = g() return a + n }")
    text = IR.render_ir(mod)
    assert "Call g -> function m.g" in text
    assert "Let a slot=1" in text
    assert "Function f params=[n:0] locals=2" in text


def test_import_resolution(tmp_path):
    (tmp_path / "util.golo").write_text("module lib.util\nfunction twice = |x| -> x * 2\nlocal function hidden = || -> 0\n")
    main = tmp_path / "main.golo"
    main.write_text("module app\nimport lib.util\nfunction main = |args| { println(twice(4)) }\n")
    program = load_program(str(main))
    assert list(program.imports) == ["lib.util"]
    call = nodes_of(program.main.function("main"), IR.CallGlobal)[1]
    assert call.target == IR.Resolved("function", "lib.util", "twice")


def test_local_functions_are_not_exported(tmp_path):
    (tmp_path / "util.golo").write_text("module lib.util\nlocal function hidden = || -> 0\n")
    main = tmp_path / "main.golo"
    main.write_text("module app\nimport lib.util\nfunction main = |args| -> hidden()\n")
    with pytest.raises(CheckError) as info:
        load_program(str(main))
    assert "hidden" in str(info.value)


def test_load_source_wraps_diagnostics():
    with pytest.raises(CheckError) as info:
        load_source("module m\nfunction main = |args| -> nope\n")
    assert info.value.diagnostics[0].line == 2
