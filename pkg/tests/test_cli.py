import io
import json
import subprocess
import sys

import pytest

from conftest import CORPUS, needs_solver
from ipsmp.cli import main

MANIFEST = json.loads((CORPUS / "manifest.json").read_text())
BOOLEAN = sorted({e["file"] for e in MANIFEST if e["mode"] == "boolsynth"})
WITH_MAIN = sorted(p.name for p in CORPUS.glob("*.imp") if p.name not in
                   ("counter.imp", "counter_fault.imp", "ring.imp", "ring_fault.imp"))


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


def twice(*argv):
    first, second = run(*argv), run(*argv)
    assert first == second, argv
    return first


def test_boolsynth_assume_only():
    code, text = run("boolsynth", CORPUS / "assume_only.imp")
    data = json.loads(text)
    assert code == 0 and data["status"] == "Realizable"
    assert data["predicates"] == {"p": []}


def test_boolsynth_assert_only_and_witness():
    code, text = run("boolsynth", CORPUS / "assert_only.imp")
    assert code == 0 and json.loads(text)["predicates"]["p"] == [{"a": False}, {"a": True}]
    code, text = run("boolsynth", CORPUS / "loop_post_bool_fault.imp")
    data = json.loads(text)
    assert code == 1 and data["status"] == "Unrealizable" and data["failure"]


def test_emit_is_byte_stable():
    code, text = twice("emit", CORPUS / "loop_post.imp")
    assert code == 0 and text.startswith("(set-logic HORN)\n") and "(check-sat)" in text


def test_check_dumps():
    code, text = run("check", "--dump-ast", CORPUS / "loop_post.imp")
    assert code == 0 and json.loads(text)["procedures"][0]["name"] == "main"
    code, text = run("check", "--dump-cfg", CORPUS / "closed_safe.imp")
    assert code == 0 and text.startswith("digraph cfg {")
    code, text = run("check", "--dump-summary", CORPUS / "closed_unsafe.imp")
    assert code == 0 and json.loads(text)["theta"]["fail"]


def test_usage_errors(tmp_path):
    assert run("frob")[0] == 3
    assert run("check", tmp_path / "missing.imp")[0] == 3
    bad = tmp_path / "bad.imp"
    bad.write_text("main() {\n  x = ;\n}\n")
    assert run("check", bad)[0] == 3
    assert run("check", CORPUS / "counter.imp")[0] == 3
    assert run("check", "--library", CORPUS / "counter.imp")[0] == 0
    assert run("boolsynth", CORPUS / "loop_post.imp")[0] == 3
    assert run("reduce", "--kind", "ring", CORPUS / "counter.imp")[0] == 3


def test_frontend_error_has_position(tmp_path, capsys):
    bad = tmp_path / "bad.imp"
    bad.write_text("main() {\n  x = ;\n}\n")
    main(["check", str(bad)], io.StringIO())
    assert f"{bad}:2:" in capsys.readouterr().err


def test_reduce_writes_file(tmp_path):
    target = tmp_path / "out.imp"
    code, _ = run("reduce", "--kind", "class", CORPUS / "counter.imp", "-o", target)
    assert code == 0 and "pred Inv(" in target.read_text()
    assert run("check", target)[0] == 0


@pytest.mark.parametrize("name", sorted(p.name for p in CORPUS.glob("*.imp")))
def test_check_and_emit_deterministic(name):
    path = CORPUS / name
    twice("check", "--library", "--dump-ast", path)
    if name in WITH_MAIN:
        twice("emit", path)


@pytest.mark.parametrize("name", BOOLEAN)
def test_boolsynth_deterministic(name):
    twice("boolsynth", "--dump-summary", CORPUS / name)
    for policy in ("lifo", "random"):
        assert json.loads(run("boolsynth", "--policy", policy, CORPUS / name)[1])["status"] == \
            json.loads(run("boolsynth", CORPUS / name)[1])["status"]


@pytest.mark.parametrize("args", [
    ("class", "counter.imp"), ("class", "counter_fault.imp"), ("ring", "ring.imp"), ("ring", "ring_fault.imp"),
    ("loop", "doubling.imp"), ("loop", "doubling_fault.imp")])
def test_reduce_deterministic(args):
    kind, name = args
    code, _ = twice("reduce", "--kind", kind, CORPUS / name)
    assert code == 0


@needs_solver
@pytest.mark.parametrize("name", WITH_MAIN)
def test_solve_deterministic(name):
    expect = {e["file"]: e["expect"] for e in MANIFEST if e["mode"] == "solve" and "kind" not in e}
    code, text = twice("solve", CORPUS / name)
    status = json.loads(text)["status"]
    if name in expect:
        assert status == expect[name]
    assert code == {"Realizable": 0, "Unrealizable": 1, "Unknown": 2}[status]


@needs_solver
def test_solve_text_format():
    code, text = run("solve", "--format", "text", CORPUS / "loop_post.imp")
    assert code == 0 and text.splitlines()[0] == "Realizable"
    assert run("check", "--verify", CORPUS / "closed_unsafe.imp")[0] == 1
    assert run("check", "--verify", CORPUS / "closed_safe.imp")[0] == 0


@needs_solver
def test_unknown_status_on_timeout():
    code, text = run("solve", "--timeout", "0.001", CORPUS / "doubling_fault.imp")
    assert code == 2 and json.loads(text)["status"] == "Unknown"


@needs_solver
def test_corpus_report():
    code, text = twice("corpus", CORPUS, "--jobs", "4")
    assert code == 0
    assert text.splitlines()[-1] == f"{len(MANIFEST)}/{len(MANIFEST)} passed"
    code, text = run("corpus", CORPUS, "--format", "json", "--jobs", "4")
    data = json.loads(text)
    assert data["passed"] == data["total"] == len(MANIFEST)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ipsmp.cli", "boolsynth", str(CORPUS / "closed_unsafe.imp")],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and json.loads(proc.stdout)["status"] == "Unrealizable"
