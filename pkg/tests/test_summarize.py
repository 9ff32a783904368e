import random
from dataclasses import replace

import pytest

from conftest import checked
from ipsmp import symbool as sb
from ipsmp.boolcfg import FAIL, BooleanProgram, ExplicitModel, explicit_run, lower
from ipsmp.frontend import validate
from ipsmp.randprog import random_boolean_program, random_source_program
from ipsmp.summarize import ReachEngine, compute_bool_reach, is_safe, rule_violations
from ipsmp.symbool import Universe


def closed(bp):
    return replace(bp, fe=(), ae=(), pred_entry={}, pred_vars={}, templates={})


def random_closed(seed, procs=0.3):
    return closed(random_boolean_program(random.Random(seed), proc_probability=procs))


def havoc_call_program():
    u = Universe(["g"])
    locs = (FAIL, "main@in", "main@out", "f@in", "f@out")
    return BooleanProgram(universe=u, gv=("g",), lv=(), locs=locs, main="main@in",
                          ne=(("f@in", u.true, "f@out"),), ce=(("main@in", "f@in", "main@out"),),
                          pe=(("main@in", "main@out"), ("f@in", "f@out")))


def test_update_reach_examples():
    bp = lower(checked("main(bool b) { skip; }"))
    eng = ReachEngine(bp)
    u = bp.universe
    loc = next(l for l in bp.locs if l not in (bp.main, bp.fail))
    b1 = u.var("b", sb.PRIMED)
    eng.update_reach(loc, b1)
    assert eng.theta[loc] == b1 and eng.work[loc] == b1
    before = (dict(eng.theta), dict(eng.work), list(eng.queue))
    eng.update_reach(loc, b1 & u.var("b"))
    assert (eng.theta, eng.work, list(eng.queue)) == before


def test_update_reach_accumulates_disjunction():
    rng = random.Random(3)
    bp = lower(checked("main(bool a, bool b) { skip; }"))
    u = bp.universe
    names = sb.copies(bp.variables, sb.PLAIN) + sb.copies(bp.variables, sb.PRIMED)
    for _ in range(20):
        eng = ReachEngine(bp)
        loc = bp.locs[-1]
        values = [u.cube({n: rng.random() < 0.5 for n, _ in rng.sample(names, 2)}) for _ in range(5)]
        for v in values:
            eng.update_reach(loc, v)
        want = u.false
        for v in values:
            want = want | v
        assert eng.theta[loc] == want


def test_trivial_verdicts():
    bp = lower(checked("main() { assert(true); }"))
    assert is_safe(bp, compute_bool_reach(bp))
    bp = lower(checked("main(bool b) { b = *; assert(b); }"))
    assert not is_safe(bp, compute_bool_reach(bp))


def test_skip_edge_image():
    bp = lower(checked("main(bool b) { skip; }"))
    summ = compute_bool_reach(bp)
    [(_, _, l2)] = bp.ne
    # theta(main) is true, and the frame image of true is true
    assert summ.theta[l2].is_true()


def test_havocking_callee_leaves_global_unconstrained():
    bp = havoc_call_program()
    summ = compute_bool_reach(bp)
    out = summ.theta["main@out"]
    assert sb.elim(out, [("g", sb.PRIMED)]) == out
    assert out.is_true()
    assert rule_violations(bp, summ) == []


def test_exit_feeds_summary():
    bp = havoc_call_program()
    summ = compute_bool_reach(bp)
    assert sb.elim(summ.theta["f@out"], sb.copies(bp.lv, 0) + sb.copies(bp.lv, 1)).entails(summ.sigma["f@in"])
    assert summ.sigma["main@in"].is_true()


def test_random_source_programs_match_explicit_run():
    rng = random.Random(11)
    for _ in range(20):
        bp = lower(validate(random_source_program(rng, n_preds=0)))
        summ = compute_bool_reach(bp)
        assert is_safe(bp, summ) == (explicit_run(bp) == "Safe")
        assert rule_violations(bp, summ) == []
        assert all(w.is_false() for w in summ.work.values())


@pytest.mark.parametrize("seed", range(20))
def test_random_cfgs_match_explicit_run(seed):
    bp = random_closed(seed, procs=0.6)
    summ = compute_bool_reach(bp)
    assert is_safe(bp, summ) == (explicit_run(bp) == "Safe")
    assert rule_violations(bp, summ) == []


def brute_force_theta(bp):
    """theta as explicit pairs, for programs without calls.

    main starts from every store and its entry relates any input to any
    current store, so each reachable store pairs with every input.
    """
    model = ExplicitModel(bp)
    n = len(bp.variables)
    states = {(bp.main, s) for s in range(1 << n)}
    stack = list(states)
    while stack:
        loc, s = stack.pop()
        for table, l2 in model.succ.get(loc, ()):
            for s2 in table.get(s, ()):
                if (l2, s2) not in states:
                    states.add((l2, s2))
                    stack.append((l2, s2))
    return {l: {(s0, s) for s0 in range(1 << n) for loc, s in states if loc == l} for l in bp.locs}


def as_pairs(bp, f):
    n = len(bp.variables)
    out = set()
    for bits in sb.iter_models(f, sb.copies(bp.variables, 0) + sb.copies(bp.variables, 1)):
        pack = lambda bs: sum(1 << i for i, b in enumerate(bs) if b)
        out.add((pack(bits[:n]), pack(bits[n:])))
    return out


@pytest.mark.parametrize("seed", range(25))
def test_theta_is_least(seed):
    bp = random_closed(100 + seed, procs=0.0)
    summ = compute_bool_reach(bp)
    want = brute_force_theta(bp)
    for loc in bp.locs:
        assert as_pairs(bp, summ.theta[loc]) == want[loc], loc


@pytest.mark.parametrize("seed", range(15))
def test_policy_confluence(seed):
    bp = random_closed(200 + seed, procs=0.7)
    base = compute_bool_reach(bp)
    for policy, s in [("lifo", 0), ("random", 1), ("random", 99)]:
        other = compute_bool_reach(bp, policy=policy, seed=s)
        assert other.theta == base.theta and other.sigma == base.sigma


@pytest.mark.parametrize("seed", range(10))
def test_theta_grows_monotonically(seed):
    bp = random_closed(300 + seed, procs=0.7)
    snaps = []
    compute_bool_reach(bp, observer=lambda eng: snaps.append(dict(eng.theta)))
    for before, after in zip(snaps, snaps[1:]):
        assert all(before[l].entails(after[l]) for l in bp.locs)


def test_partial_edges_rejected():
    bp = random_boolean_program(random.Random(0))
    with pytest.raises(ValueError):
        compute_bool_reach(bp)
