"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that pytest prints in its
terminal summary.  Running this file directly prints the same lines.
"""
import io
import json
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, CORPUS, HAVE_Z3, boolean_corpus  # noqa: E402
from ipsmp import reductions as R  # noqa: E402
from ipsmp.boolcfg import explicit_run, lower  # noqa: E402
from ipsmp.boolsynth import (bool_synth, compare_with_saturation, enumeration_oracle,  # noqa: E402
                             iteration_bound, partial_rule_violations, soundness_check)
from ipsmp.cli import main as cli_main, run_entry  # noqa: E402
from ipsmp.frontend import load_file, parse_expr  # noqa: E402
from ipsmp.summarize import compute_bool_reach, is_safe  # noqa: E402
from ipsmp.vcgen import SolverConfig, chc_synth  # noqa: E402

CONFIG = SolverConfig(timeout=120)
MANIFEST = json.loads((CORPUS / "manifest.json").read_text())
RANDOM = boolean_corpus(60, seed=0)
TINY = boolean_corpus(40, seed=5, max_vars=1)
BOOLEAN_FILES = sorted({e["file"] for e in MANIFEST if e["mode"] == "boolsynth"})


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok


def boolean_instances():
    return RANDOM + [lower(load_file(CORPUS / f)) for f in BOOLEAN_FILES]


# -- criteria ------------------------------------------------------------------------------


def decision_procedure():
    start = time.perf_counter()
    agree = sum(bool_synth(bp).status == enumeration_oracle(bp) for bp in RANDOM)
    took = time.perf_counter() - start
    ok = agree == len(RANDOM) >= 50 and took < 10
    return record("boolean decision procedure", ok, f"{agree}/{len(RANDOM)} agree with enumeration in {took:.2f}s")


def solution_soundness():
    bad = 0
    instances = boolean_instances()
    for bp in instances:
        v = bool_synth(bp)
        if v.realizable:
            bad += explicit_run(bp, v.pi) != "Safe"
        else:
            bad += v.failure.is_false()
        bad += not soundness_check(bp, v)
    return record("solution soundness", bad == 0, f"{bad} violations over {len(instances)} instances")


def fixpoint_legality():
    instances = boolean_instances()
    rules = sum(bool(partial_rule_violations(bp, bool_synth(bp).summary)) for bp in instances)
    least = sum(not compare_with_saturation(bp, bool_synth(bp)) for bp in TINY)
    ok = rules == 0 and least == len(TINY)
    return record("fixpoint legality", ok,
                  f"{rules} rule violations over {len(instances)} instances; "
                  f"{least}/{len(TINY)} one-variable instances equal the saturated least fixpoint")


def complexity_envelope():
    worst, over = 0.0, 0
    instances = boolean_instances()
    for bp in instances:
        ratio = bool_synth(bp).summary.iterations / iteration_bound(bp)
        worst = max(worst, ratio)
        over += ratio > 1
    return record("complexity envelope", over == 0,
                  f"max iterations/bound ratio {worst:.4f} over {len(instances)} instances")


def degenerate_cases():
    bp = lower(load_file(CORPUS / "assume_only.imp"))
    v = bool_synth(bp)
    false_ok = v.realizable and v.pi["p"].is_false() and explicit_run(bp, v.pi) == "Safe"
    bp = lower(load_file(CORPUS / "assert_only.imp"))
    true_ok = bool_synth(bp).realizable and explicit_run(bp, {"p": bp.universe.true}) == "Safe"
    closed = []
    for name in ("closed_safe.imp", "closed_unsafe.imp"):
        bp = lower(load_file(CORPUS / name))
        closed.append(bool_synth(bp).realizable == is_safe(bp, compute_bool_reach(bp)))
    ok = false_ok and true_ok and all(closed)
    return record("degenerate cases", ok,
                  f"assume-only false={false_ok}, assert-only true={true_ok}, closed equals verification={all(closed)}")


def horn_shape():
    systems = []
    for path in sorted(CORPUS.glob("*.imp")):
        c = load_file(path, require_main=False)
        if c.program.has_procedure("main"):
            systems.append(chc_synth(c))
        for kind in R.KINDS:
            try:
                systems.append(chc_synth(R.reduce(kind, c).checked()))
            except ValueError:
                pass
    shape = json.loads((CORPUS / "doubling.shape.json").read_text())
    systems.append(chc_synth(R.reduce(R.LOOP, load_file(CORPUS / "doubling.imp"), R.parse_shape(shape)).checked()))
    clauses = [cl for s in systems for cl in s.clauses]
    good = sum(cl.positive_occurrences() <= 1 and cl.is_horn() for cl in clauses)
    structural = all(not s.check_horn() for s in systems)
    return record("Horn shape", good == len(clauses) and structural,
                  f"{good}/{len(clauses)} clauses Horn across {len(systems)} systems")


def examples_end_to_end():
    rows, slowest = [], 0.0
    for entry in MANIFEST:
        if entry["mode"] != "solve":
            continue
        start = time.perf_counter()
        row = run_entry(CORPUS, entry, CONFIG)
        slowest = max(slowest, time.perf_counter() - start)
        rows.append(row)
    passed = sum(r["pass"] for r in rows)
    validated = sum(r.get("valid") is True for r in rows)
    ok = passed == len(rows) and slowest < 120
    return record("examples end to end", ok,
                  f"{passed}/{len(rows)} solver entries as expected, {validated} solutions validated, "
                  f"slowest {slowest:.2f}s")


KNOWN = [
    ("counter", R.CLASS, "counter.imp", "m > 0 && p <= m"),
    ("array", R.PROGRAM, "array.imp", {"Inv3": "v == 0", "Inv4": "0 <= v && v <= max"}),
    ("ring", R.RING, "ring.imp", "s == Try || (l == Left && r == Right)"),
    ("loop", R.LOOP, "doubling.imp", "i <= x && y == 2 * i"),
]


def known_solutions():
    results = []
    for label, kind, name, phi in KNOWN:
        c = load_file(CORPUS / name, require_main=False)
        enums = c.program.enums
        cand = {k: parse_expr(v, enums) for k, v in phi.items()} if isinstance(phi, dict) else parse_expr(phi, enums)
        results.append((label, R.check_solution(kind, c, cand, CONFIG)))
    good = sum(ok for _, ok in results)
    return record("known solutions", good == len(KNOWN),
                  f"{good}/{len(KNOWN)} accepted ({', '.join(f'{l}={ok}' for l, ok in results)})")


def _runs(argv):
    out = io.StringIO()
    code = cli_main([str(a) for a in argv], out)
    return code, out.getvalue()


def determinism():
    commands = []
    for path in sorted(CORPUS.glob("*.imp")):
        commands.append(["check", "--library", "--dump-ast", path])
        c = load_file(path, require_main=False)
        if c.program.has_procedure("main"):
            commands.append(["emit", path])
            if HAVE_Z3:
                commands.append(["solve", path])
    for name in BOOLEAN_FILES:
        commands.append(["check", "--dump-cfg", "--dump-summary", CORPUS / name] if name.startswith("closed")
                        else ["check", "--dump-cfg", CORPUS / name])
        commands.append(["boolsynth", "--dump-summary", CORPUS / name])
    for kind, name in [("class", "counter.imp"), ("ring", "ring.imp"), ("loop", "doubling.imp")]:
        commands.append(["reduce", "--kind", kind, CORPUS / name])
    if HAVE_Z3:
        commands.append(["corpus", CORPUS, "--jobs", "4"])
    differ = [" ".join(map(str, cmd[:1])) for cmd in commands if _runs(cmd) != _runs(cmd)]
    return record("determinism", not differ,
                  f"{len(commands) - len(differ)}/{len(commands)} invocations byte-identical across two runs")


CRITERIA = [decision_procedure, solution_soundness, fixpoint_legality, complexity_envelope, degenerate_cases,
            horn_shape, examples_end_to_end, known_solutions, determinism]
NEEDS_SOLVER = {examples_end_to_end, known_solutions}


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(criterion):
    if criterion in NEEDS_SOLVER and not HAVE_Z3:
        record(criterion.__name__.replace("_", " "), False, "no HORN solver on PATH")
        pytest.skip("no HORN solver on PATH")
    assert criterion(), ACCEPTANCE_LINES[-1]


if __name__ == "__main__":
    failures = 0
    for criterion in CRITERIA:
        if criterion in NEEDS_SOLVER and not HAVE_Z3:
            print(f"FAIL {criterion.__name__}: no HORN solver on PATH")
            failures += 1
            continue
        failures += not criterion()
        print(ACCEPTANCE_LINES[-1])
    sys.exit(1 if failures else 0)
