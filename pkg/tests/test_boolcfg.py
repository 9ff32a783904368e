import random
from itertools import product

import pytest

from conftest import checked
from ipsmp import symbool as sb
from ipsmp.boolcfg import (BoundExceeded, NonBooleanVariable, explicit_run, lower, to_dot)
from ipsmp.frontend import validate
from ipsmp.randprog import interpret, random_source_program, slot_formula


def edges_from(bp, loc):
    return [(rel, l2) for l1, rel, l2 in bp.ne if l1 == loc]


def frame(bp, exclude=()):
    return bp.universe.keep([v for v in bp.variables if v not in exclude])


def test_assert_yields_two_edges():
    bp = lower(checked("main(bool b) { assert(b); }"))
    out = edges_from(bp, bp.main)
    assert len(out) == 2
    u = bp.universe
    by_target = {l2: rel for rel, l2 in out}
    assert by_target[bp.fail] == ~u.var("b") & frame(bp)
    ok = [rel for rel, l2 in out if l2 != bp.fail]
    assert ok == [u.var("b") & frame(bp)]


def test_assume_yields_one_guarded_edge():
    bp = lower(checked("main(bool b) { assume(b); }"))
    out = edges_from(bp, bp.main)
    assert [rel for rel, _ in out] == [bp.universe.var("b") & frame(bp)]
    assert all(l2 != bp.fail for _, l2 in out)


def test_skip_is_frame_only():
    bp = lower(checked("main(bool b) { skip; }"))
    assert [rel for rel, _ in edges_from(bp, bp.main)] == [frame(bp)]


def successors(bp, rel, store):
    """Explicit successor set of a relation from a store, by evaluation."""
    vs = bp.variables
    out = set()
    for bits in product((False, True), repeat=len(vs)):
        env = {(v, sb.PLAIN): store[v] for v in vs}
        env.update({(v, sb.PRIMED): b for v, b in zip(vs, bits)})
        if rel.evaluate(env):
            out.add(bits)
    return out


@pytest.mark.parametrize("target", ["a", "b", "c"])
def test_havoc_image_matches_explicit_successors(target):
    bp = lower(checked(f"main(bool a, bool b, bool c) {{ {target} = *; }}"))
    [(rel, _)] = edges_from(bp, bp.main)
    assert rel == frame(bp, exclude=[target])
    vs = bp.variables
    for bits in product((False, True), repeat=len(vs)):
        store = dict(zip(vs, bits))
        expected = {tuple(b if v != target else val for v, b in zip(vs, bits)) for val in (False, True)}
        assert successors(bp, rel, store) == expected


def test_assignment_image():
    bp = lower(checked("main(bool a, bool b) { a = a != b; }"))
    [(rel, _)] = edges_from(bp, bp.main)
    vs = bp.variables
    for bits in product((False, True), repeat=len(vs)):
        store = dict(zip(vs, bits))
        want = tuple((store["a"] != store["b"]) if v == "a" else store[v] for v in vs)
        assert successors(bp, rel, store) == {want}


def test_trivial_runs():
    assert explicit_run(lower(checked("main() { assert(true); }"))) == "Safe"
    assert explicit_run(lower(checked("main() { assert(false); }"))) == "Fails"


def test_integer_variables_rejected():
    with pytest.raises(NonBooleanVariable):
        lower(checked("main(int x) { assert(x > 0); }"))


def test_runaway_recursion_hits_the_bound():
    bp = lower(checked("f(bool x) { bool t; t = f(x); return t; } main(bool a) { a = f(a); }"))
    with pytest.raises(BoundExceeded):
        explicit_run(bp, max_depth=3)


def test_structure_and_double_primes():
    rng = random.Random(7)
    for _ in range(30):
        program = random_source_program(rng, n_preds=2)
        bp = lower(validate(program))
        bp.validate()
        assert not [l2 for l1, _, l2 in bp.ne if l1 == bp.fail]
        for _, rel, _ in bp.ne:
            assert all(c != sb.DOUBLE for _, c in rel.support())
        entries = set(bp.pred_entry.values())
        assert all(l_in in entries for _, l_in, _ in bp.fe + bp.ae)


def test_lowering_preserves_reachability():
    rng = random.Random(2024)
    mismatches = []
    for trial in range(40):
        program = random_source_program(rng, n_preds=rng.randint(0, 2))
        bp = lower(validate(program))
        fns, forms = {}, {}
        for p in program.predicates:
            table = {bits: rng.random() < 0.5 for bits in product((False, True), repeat=len(p.params))}
            fns[p.name] = lambda *v, t=table: t[tuple(v)]
            forms[p.name] = slot_formula(bp.universe, p.name, len(p.params), fns[p.name])
        if interpret(program, fns) != explicit_run(bp, forms):
            mismatches.append(trial)
    assert mismatches == []


def test_dot_output():
    bp = lower(checked("f(bool x) { return !x; } pred p(bool y); main(bool a) { a = f(a); assert(p(a)); }"))
    dot = to_dot(bp)
    assert dot.startswith("digraph cfg {") and dot.rstrip().endswith("}")
    for kind in ("NE0", "CE", "AE", "PE"):
        assert f'label="{kind}' in dot
    assert dot == to_dot(lower(checked("f(bool x) { return !x; } pred p(bool y); main(bool a) { a = f(a); assert(p(a)); }")))
