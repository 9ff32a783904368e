import random
import subprocess
from itertools import product

import pytest

from conftest import CORPUS, checked, corpus_file, needs_solver
from ipsmp.boolcfg import lower
from ipsmp.boolsynth import bool_synth
from ipsmp.frontend import ast as A, load_file, parse_expr, substitute, validate
from ipsmp.randprog import interpret, random_source_program
from ipsmp.reductions import reduce
from ipsmp.vcgen import (ChcSystem, SolverConfig, WlpContext, chc_synth, emit_smtlib, horn_clauses,
                         is_correct, parse_model, solve, to_chc, wlp)
from ipsmp.vcgen import logic as L
from ipsmp.vcgen.chc import term
from ipsmp.vcgen.solver import model_expression

CONFIG = SolverConfig(timeout=120)


def ctx_for(text):
    c = checked(text)
    ctx = WlpContext(c)
    ctx.enter(c.program.procedure("main"))
    return c, ctx


def main_body(c):
    return c.program.procedure("main").body


def valid(formula, env):
    """Validity of a formula through a plain SMT query on its negation."""
    decls = "".join(f"(declare-const {n} {s})" for n, s in env.items())
    script = f"(set-logic ALL){decls}(assert (not {term(formula)}))(check-sat)\n"
    out = subprocess.run(["z3", "-in"], input=script, capture_output=True, text=True, timeout=60).stdout
    return out.strip() == "unsat"


def evaluate(f, env):
    if isinstance(f, A.BoolLit):
        return f.value
    if isinstance(f, A.Var):
        return env[f.name]
    if isinstance(f, A.Unary):
        return not evaluate(f.arg, env)
    if isinstance(f, L.Forall):
        names = [n for n, _ in f.params]
        return all(evaluate(f.body, {**env, **dict(zip(names, bits))})
                   for bits in product((False, True), repeat=len(names)))
    if isinstance(f, L.Ite):
        return evaluate(f.then if evaluate(f.cond, env) else f.els, env)
    a, b = evaluate(f.lhs, env), evaluate(f.rhs, env)
    return {"&&": a and b, "||": a or b, "==>": (not a) or b, "==": a == b, "!=": a != b}[f.op]


# -- transformer ------------------------------------------------------------------------


def test_skip_is_identity():
    _, ctx = ctx_for("main(int x) { skip; }")
    q = parse_expr("x > 3")
    assert wlp(A.Skip(), q, ctx) == q


def test_assignment_substitutes():
    _, ctx = ctx_for("main(int x) { skip; }")
    q = parse_expr("x > 3")
    assert wlp(A.Assign("x", parse_expr("x + 1")), q, ctx) == parse_expr("x + 1 > 3")


def test_assert_then_assume():
    c, ctx = ctx_for("main(int x) { assert(x > 0); assume(x < 5); }")
    out = wlp(main_body(c), L.TRUE, ctx)
    phi, psi = parse_expr("x > 0"), parse_expr("x < 5")
    # psi ==> true simplifies away
    assert out == L.conj(phi, L.implies(psi, L.TRUE)) == phi


def test_havoc_quantifies():
    _, ctx = ctx_for("main(int x) { skip; }")
    out = wlp(A.Havoc("x"), parse_expr("x > 3"), ctx)
    assert isinstance(out, L.Forall) and out.params[0][1] == "Int"
    assert "x" not in L.free_vars(out)


def test_call_rule_shape():
    c, ctx = ctx_for("f(int a) { return a + 1; } main(int x) { x = f(x); assert(x > 0); }")
    out = wlp(main_body(c), L.TRUE, ctx)
    apps = {a.name for a in L.applications(out)}
    assert apps == {"f_pre", "f_sum"}


def loop_free(seed):
    rng = random.Random(seed)
    while True:
        program = random_source_program(rng, n_preds=0, helper=False, max_stmts=4)
        if "While" not in repr(program):
            return program


@pytest.mark.parametrize("seed", range(40))
def test_boolean_wlp_matches_interpreter(seed):
    program = loop_free(seed)
    main = program.procedure("main")
    c = validate(program)
    ctx = WlpContext(c)
    ctx.enter(main)
    pre = wlp(main.body, L.TRUE, ctx)
    names = [p.name for p in main.params + main.locals]
    for bits in product((False, True), repeat=len(names)):
        pin = A.and_all(A.Var(n) if b else A.neg(A.Var(n)) for n, b in zip(names, bits))
        pinned = A.Program((A.Procedure("main", main.params, main.locals, A.seq(A.Assume(pin), main.body), ()),))
        assert evaluate(pre, dict(zip(names, bits))) == (interpret(pinned) == "Safe")


@needs_solver
@pytest.mark.parametrize("seed", range(15))
def test_wlp_antitone_in_postcondition(seed):
    rng = random.Random(1000 + seed)
    program = loop_free(seed + 500)
    main = program.procedure("main")
    c = validate(program)
    ctx = WlpContext(c)
    ctx.enter(main)
    names = [p.name for p in main.params + main.locals]
    q = A.Var(rng.choice(names))
    if rng.random() < 0.5:
        q = A.Binary("||", q, A.neg(A.Var(rng.choice(names))))
    stronger = wlp(main.body, L.FALSE, ctx)
    weaker = wlp(main.body, q, ctx)
    assert valid(L.implies(stronger, weaker), {n: "Bool" for n in names})


# -- encodings ----------------------------------------------------------------------------


def test_one_loop_one_predicate():
    c = load_file(CORPUS / "loop_post.imp")
    system = to_chc(c)
    loops = [n for n, k in system.kinds.items() if k == "loop"]
    assert len(loops) == 1
    assert len(system.predicates[loops[0]]) == 3


def test_closed_predicates_give_two_clauses():
    c = checked("pred q(int a) { return a > 0; } main(int x) { assume(q(x)); assert(x > 0); }")
    system = to_chc(c)
    assert len([cl for cl in system.clauses if cl.origin == "pred:q"]) == 2


def corpus_systems():
    out = []
    for path in sorted(CORPUS.glob("*.imp")):
        c = load_file(path, require_main=False)
        if c.program.has_procedure("main"):
            out.append((path.name, chc_synth(c)))
        for kind in ("class", "ring", "loop"):
            try:
                inst = reduce(kind, c)
            except ValueError:
                continue
            out.append((f"{path.name}:{kind}", chc_synth(inst.checked())))
    return out


def test_horn_shape_on_corpus():
    systems = corpus_systems()
    assert len(systems) >= 15
    for name, system in systems:
        assert system.check_horn() == [], name
        assert all(cl.positive_occurrences() <= 1 for cl in system.clauses), name


def test_emission_deterministic():
    for path in sorted(CORPUS.glob("*.imp")):
        c1 = load_file(path, require_main=False)
        c2 = load_file(path, require_main=False)
        if c1.program.has_procedure("main"):
            assert emit_smtlib(chc_synth(c1)) == emit_smtlib(chc_synth(c2))


def test_empty_system():
    assert emit_smtlib(ChcSystem()) == "(set-logic HORN)\n(check-sat)\n"


def test_single_fact():
    system = ChcSystem()
    system.declare("p", ["Int"], "partial")
    system.clauses.extend(horn_clauses(A.Apply("p", (A.Var("x"),)), {"x": "Int"}))
    text = emit_smtlib(system)
    asserts = [line for line in text.splitlines() if line.startswith("(assert")]
    assert asserts == ["(assert (forall ((x Int)) (p x)))"]


def test_false_template_clause_is_kept():
    c = load_file(CORPUS / "loop_post.imp")
    extra = [cl for cl in chc_synth(c).clauses if cl.origin == "template:Post"]
    assert len(extra) == 1 and extra[0].constraint == L.FALSE
    assert len(chc_synth(c).clauses) == len(to_chc(c).clauses) + 1


def test_uncalled_predicate_only_in_template():
    c = checked("pred p(int a); main(int x) { assert(x == x); }")
    system = chc_synth(c)
    mentions = [cl for cl in system.clauses if any(b.name == "p" for b in cl.body) or
                (cl.head is not None and cl.head.name == "p")]
    assert [cl.origin for cl in mentions] == ["template:p"]


def test_model_parser():
    output = """sat
(
  (define-fun Post ((x!0 Int) (x!1 Int)) Bool
    (let ((a!1 (<= x!0 x!1)))
      (ite (>= x!1 1) (and a!1 (not (<= x!0 (+ x!1 (- 1))))) false)))
  (define-fun main_pre () Bool true)
)"""
    defs = parse_model(output)
    assert set(defs) == {"Post", "main_pre"}
    params, body = defs["Post"]
    expr = model_expression(params, body, ["x", "y"])
    assert L.free_vars(expr) <= {"x", "y"}
    for x, y in product(range(-2, 4), repeat=2):
        want = y >= 1 and x <= y and not x <= y - 1
        assert _eval_int(A.subst_expr(expr, {"x": A.IntLit(x), "y": A.IntLit(y)})) == want


def _eval_int(e):
    if isinstance(e, (A.BoolLit, A.IntLit)):
        return e.value
    if isinstance(e, A.Unary):
        v = _eval_int(e.arg)
        return (not v) if e.op == "!" else -v
    a, b = _eval_int(e.lhs), _eval_int(e.rhs)
    return {"&&": a and b, "||": a or b, "==": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
            ">": a > b, ">=": a >= b, "+": a + b, "-": a - b, "*": a * b, "==>": (not a) or b}[e.op]


# -- solver round trips --------------------------------------------------------------------


@needs_solver
def test_safe_straight_line_is_sat():
    assert is_correct(checked("main(int x) { x = 1; assert(x == 1); }"), CONFIG) == "sat"


@needs_solver
def test_loop_postcondition_solution():
    c = load_file(CORPUS / "loop_post.imp")
    res = solve(c, CONFIG)
    assert res.status == "Realizable"
    post = res.predicates["Post"]
    assert L.free_vars(post) <= {"x", "y"}
    assert valid(L.implies(parse_expr("y > 0 && x == y"), post), {"x": "Int", "y": "Int"})
    assert is_correct(validate(substitute(c, res.predicates)), CONFIG) == "sat"


@needs_solver
@pytest.mark.parametrize("name", ["loop_post_fault.imp", "closed_unsafe.imp"])
def test_unrealizable_instances(name):
    assert solve(corpus_file(name), CONFIG).status == "Unrealizable"


@needs_solver
@pytest.mark.parametrize("name", ["loop_post_bool.imp", "loop_post_bool_fault.imp", "assume_only.imp",
                                  "assert_only.imp", "closed_safe.imp", "closed_unsafe.imp"])
def test_boolean_consistency_on_corpus(name):
    c = corpus_file(name)
    assert solve(c, CONFIG).status == bool_synth(lower(c)).status


@needs_solver
@pytest.mark.parametrize("seed", range(12))
def test_boolean_consistency_on_random_programs(seed):
    program = random_source_program(random.Random(seed), n_preds=1, helper=seed % 3 == 0, max_stmts=3)
    c = validate(program)
    res = solve(c, CONFIG)
    assert res.status == bool_synth(lower(c)).status
    if res.status == "Realizable":
        assert is_correct(validate(substitute(c, res.predicates)), CONFIG) == "sat"
