import re

import pytest

from golo_util import CONFIGS, CORPUS, cli, config_flags

OK = sorted((CORPUS / "ok").glob("*.golo"))
BAD_SYNTAX = sorted((CORPUS / "bad-syntax").glob("*.golo"))
BAD_REF = sorted((CORPUS / "bad-ref").glob("*.golo"))


def expected(path):
    exit_file = path.with_suffix(".exit")
    code = int(exit_file.read_text()) if exit_file.exists() else 0
    err_file = path.with_suffix(".err")
    headline = err_file.read_text().strip() if err_file.exists() else None
    return path.with_suffix(".out").read_text(), code, headline


@pytest.mark.parametrize("engine, mode", CONFIGS, ids=[f"{e}-{m}" for e, m in CONFIGS])
@pytest.mark.parametrize("path", OK, ids=lambda p: p.stem)
def test_program_matches_golden(path, engine, mode):
    out, code, headline = expected(path)
    got_code, got_out, got_err = cli("run", str(path), *config_flags(engine, mode))
    assert got_out == out
    assert got_code == code
    if headline is None:
        assert got_err == ""
    else:
        assert got_err.splitlines()[0] == headline
        assert all(line.startswith("  at ") or line.startswith("  ...")
                   for line in got_err.splitlines()[1:])


@pytest.mark.parametrize("path", [p for p in OK if p.stem.startswith("err_")], ids=lambda p: p.stem)
def test_traces_agree_between_engine_modes(path):
    # Trace lines differ between engines (instruction vs source position)
    # but each engine must be insensitive to its own caching mode.
    for group in (CONFIGS[:3], CONFIGS[3:]):
        errs = {cli("run", str(path), *config_flags(e, m))[2] for e, m in group}
        assert len(errs) == 1


@pytest.mark.parametrize("path", BAD_SYNTAX, ids=lambda p: p.stem)
def test_bad_syntax_exits_2(path):
    lines = path.read_text().split("\n")
    for engine, mode in (CONFIGS[0], CONFIGS[3]):
        code, out, err = cli("run", str(path), *config_flags(engine, mode))
        assert code == 2 and out == ""
        m = re.match(r"(.+):(\d+):(\d+): error: ", err)
        assert m, err
        line, col = int(m.group(2)), int(m.group(3))
        assert 1 <= line <= len(lines)
        assert 1 <= col <= len(lines[line - 1]) + 1


@pytest.mark.parametrize("path", BAD_REF, ids=lambda p: p.stem)
def test_bad_reference_names_identifier(path):
    ident, line = re.search(r"# expect: (\S+) (\d+)", path.read_text()).groups()
    for engine, mode in (CONFIGS[0], CONFIGS[3]):
        code, out, err = cli("run", str(path), *config_flags(engine, mode))
        assert code == 2 and out == ""
        first = err.splitlines()[0]
        assert f":{line}:" in first
        assert re.search(rf"\b{re.escape(ident)}\b", first), first
