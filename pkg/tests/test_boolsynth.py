import random

import pytest

from conftest import CORPUS, boolean_corpus, checked, corpus_file
from ipsmp import symbool as sb
from ipsmp.boolcfg import arg_slot, explicit_run, lower
from ipsmp.boolsynth import (SynthEngine, bool_synth, compare_with_saturation, enumeration_oracle,
                             iteration_bound, partial_rule_violations, soundness_check)
from ipsmp.frontend import validate
from ipsmp.randprog import random_source_program
from ipsmp.summarize import compute_bool_reach, is_safe

CORPUS60 = boolean_corpus(60, seed=0)


def slot(name, i=0):
    return (arg_slot(name, i), sb.PLAIN)


@pytest.mark.parametrize("idx", range(len(CORPUS60)))
def test_agrees_with_enumeration(idx):
    bp = CORPUS60[idx]
    verdict = bool_synth(bp)
    assert verdict.status == enumeration_oracle(bp)
    assert soundness_check(bp, verdict)
    assert partial_rule_violations(bp, verdict.summary) == []
    assert verdict.summary.iterations <= iteration_bound(bp)


def test_corpus_has_both_verdicts():
    statuses = {bool_synth(bp).status for bp in CORPUS60}
    assert statuses == {"Realizable", "Unrealizable"}


@pytest.mark.parametrize("seed", range(20))
def test_source_programs_agree_with_enumeration(seed):
    program = random_source_program(random.Random(seed), n_preds=1, helper=seed % 2 == 0, max_stmts=3)
    bp = lower(validate(program))
    verdict = bool_synth(bp)
    assert verdict.status == enumeration_oracle(bp)
    assert soundness_check(bp, verdict)


@pytest.mark.parametrize("idx", range(40))
def test_least_fixpoint_matches_saturation_one_variable(idx):
    bp = boolean_corpus(40, seed=5, max_vars=1)[idx]
    assert compare_with_saturation(bp, bool_synth(bp)) == []


def test_least_fixpoint_matches_saturation_three_variables():
    assert [i for i, bp in enumerate(CORPUS60) if compare_with_saturation(bp, bool_synth(bp))] == []


@pytest.mark.parametrize("idx", range(15))
def test_policy_confluence(idx):
    bp = CORPUS60[idx]
    base = bool_synth(bp)
    for policy, seed in [("lifo", 0), ("random", 4)]:
        other = bool_synth(bp, policy=policy, seed=seed)
        assert other.status == base.status and other.pi == base.pi
        assert other.summary.theta == base.summary.theta


def test_templates_respected():
    rng = random.Random(9)
    for bp in CORPUS60[:30]:
        tmpl = {}
        for name, vs in bp.pred_vars.items():
            tmpl[name] = bp.universe.cube({v: rng.random() < 0.5 for v in vs})
        verdict = bool_synth(bp, tmpl)
        for name in bp.pred_entry:
            assert tmpl[name].entails(verdict.pi[name])
        assert verdict.status == enumeration_oracle(bp, tmpl)


def test_pi_grows_monotonically():
    bp = CORPUS60[3]
    snaps = []
    bool_synth(bp, observer=lambda eng: snaps.append(dict(eng.pi)))
    for a, b in zip(snaps, snaps[1:]):
        assert all(a[l].entails(b[l]) for l in a)


def test_template_seeded_before_first_step():
    bp = lower(checked("PRED_TEMPLATE pred p(bool x) { if (x) { return true; } return synth(); }"
                       " main(bool a) { assume(p(a)); }"))
    eng = SynthEngine(bp)
    assert eng.pi[bp.pred_entry["p"]] == bp.universe.var(arg_slot("p", 0))


def test_vacuous_assume():
    bp = lower(checked("pred p(bool x); main(bool a) { assume(p(a)); assert(false); }"))
    verdict = bool_synth(bp)
    assert verdict.realizable and verdict.pi["p"].is_false()


def test_true_assume_is_skip():
    bp = lower(checked("pred p(bool x); main(bool a) { assume(p(a)); assert(a); }"))
    assert bool_synth(bp).realizable
    assert not bool_synth(bp, {"p": bp.universe.true}).realizable


def test_assert_forces_argument():
    bp = lower(checked("pred p(bool x); main(bool a) { assume(a); assert(p(a)); }"))
    verdict = bool_synth(bp)
    assert verdict.pi["p"] == bp.universe.var(arg_slot("p", 0))


def test_assert_on_all_values_forces_true():
    bp = lower(checked("pred p(bool x); main(bool a) { assert(p(a)); }"))
    assert bool_synth(bp).pi["p"].is_true()


def test_two_call_sites_both_see_growth():
    bp = lower(checked("pred p(bool x); main(bool a, bool b) { assert(p(true)); assume(p(a)); assume(p(b)); "
                       "assert(a && b); }"))
    verdict = bool_synth(bp)
    assert verdict.realizable
    assert verdict.pi["p"] == bp.universe.var(arg_slot("p", 0))


def test_assume_only_false_is_solution():
    bp = lower(corpus_file("assume_only.imp"))
    verdict = bool_synth(bp)
    assert verdict.realizable and verdict.pi["p"].is_false()
    assert explicit_run(bp, verdict.pi) == "Safe"


def test_assert_only_true_is_solution():
    bp = lower(corpus_file("assert_only.imp"))
    verdict = bool_synth(bp)
    assert verdict.realizable
    assert explicit_run(bp, {"p": bp.universe.true}) == "Safe"


@pytest.mark.parametrize("name", ["closed_safe.imp", "closed_unsafe.imp"])
def test_closed_program_is_verification(name):
    bp = lower(corpus_file(name))
    assert bool_synth(bp).realizable == is_safe(bp, compute_bool_reach(bp))
    assert enumeration_oracle(bp) == bool_synth(bp).status


def test_boolean_loop_postcondition():
    bp = lower(corpus_file("loop_post_bool.imp"))
    verdict = bool_synth(bp)
    assert verdict.realizable and soundness_check(bp, verdict)
    broken = lower(corpus_file("loop_post_bool_fault.imp"))
    witness = bool_synth(broken)
    assert not witness.realizable and not witness.failure.is_false()
    assert enumeration_oracle(broken) == "Unrealizable"
