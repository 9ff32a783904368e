import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS, checked
from ipsmp.frontend import (FrontendError, ast as A, load_file, parse, parse_expr, program_text,
                            substitute, to_json, validate)
from ipsmp.randprog import random_source_program

LOOP_POST = CORPUS / "loop_post.imp"


def test_loop_post_has_one_partial_predicate():
    c = load_file(LOOP_POST)
    assert [p.name for p in c.program.procedures] == ["main"]
    assert c.partial == ("Post",)


def test_minimal_program():
    c = checked("main(){ skip; return; }")
    assert c.partial == () and len(c.program.procedures) == 1


def test_array_templates():
    c = load_file(CORPUS / "array.imp")
    assert c.partial == ("Inv3", "Inv4")
    expected = parse_expr("max == 0 && v == 0")
    assert c.template("Inv3") == expected == c.template("Inv4")


def test_multiple_true_branches_become_a_disjunction():
    c = checked("""
        PRED_TEMPLATE pred P(int a) { if (a == 1) { return true; } if (a == 2) { return true; } return synth(); }
        main(int a) { assert(P(a)); }""")
    t = c.template("P")
    for val, want in [(1, True), (2, True), (3, False)]:
        sub = A.subst_expr(t, {"a": A.IntLit(val)})
        assert _eval_int(sub) is want


def _eval_int(e):
    if isinstance(e, A.BoolLit):
        return e.value
    if isinstance(e, A.IntLit):
        return e.value
    if isinstance(e, A.Unary):
        v = _eval_int(e.arg)
        return (not v) if e.op == "!" else -v
    a, b = _eval_int(e.lhs), _eval_int(e.rhs)
    return {"&&": a and b, "||": a or b, "==": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
            ">": a > b, ">=": a >= b, "+": a + b, "-": a - b, "*": a * b, "==>": (not a) or b}[e.op]


NEGATIVE = {
    "pred P(int x, int y); main(int x) { int y, z; z = P(x, y); }": "PredicateCallOutsideVerificationStatement",
    "pred P(int x, int y); main(int x) { int y; assert(P(x, y) && x == y); }":
        "PredicateCallOutsideVerificationStatement",
    "pred P(int x) { x = 1; return true; } main(int x) { assert(P(x)); }": "ImpurePredicateBody",
    "pred P(int x) { while (x > 0) { return true; } return false; } main(int x) { assert(P(x)); }":
        "LoopInPredicate",
    "main(int x) { y = 1; }": "UnknownSymbol",
    "main(int x) { x = g(x); }": "UnknownSymbol",
    "pred P(int x); main(int x) { assert(P(x, x)); }": "ArityMismatch",
    "main(int x) { while@1 (x > 0) { x = x - 1; } while@1 (x < 0) { x = x + 1; } }": "DuplicateLoopId",
    "f(int x) { return x; }": "MissingMain",
}


@pytest.mark.parametrize("text,kind", sorted(NEGATIVE.items()))
def test_validate_rejects(text, kind):
    program = parse(text)
    with pytest.raises(FrontendError) as err:
        validate(program)
    assert err.value.kind == kind


def test_predicate_in_assignment_parses():
    program = parse("pred P(int x, int y); main(int x) { int y, z; z = P(x, y); }")
    assert program.procedures[0].name == "main"


def test_duplicate_declaration_is_a_parse_error():
    with pytest.raises(FrontendError) as err:
        parse("main(int x) { int x; }")
    assert err.value.kind == "DuplicateDeclaration"


def test_syntax_error_carries_position():
    with pytest.raises(FrontendError) as err:
        parse("main() {\n  x = ;\n}")
    assert err.value.kind == "ParseError" and err.value.pos[0] == 2


def test_weak_and_strong_implementations():
    c = load_file(LOOP_POST)
    for text in ["x == y", "y > 0 && x == y"]:
        out = substitute(c, {"Post": parse_expr(text)})
        assert validate(out).partial == ()
        assert out.predicate("Post").body == A.Return((parse_expr(text),))
        assert out.procedures == c.program.procedures
    assert c.partial == ("Post",)  # original untouched


def test_empty_substitution_is_identity():
    c = checked("main(int x) { assert(x == x); }")
    assert substitute(c, {}) == c.program


def test_substitution_errors():
    c = load_file(LOOP_POST)
    with pytest.raises(FrontendError) as err:
        substitute(c, {})
    assert err.value.kind == "MissingImplementation"
    with pytest.raises(FrontendError) as err:
        substitute(c, {"Post": parse_expr("x == z")})
    assert err.value.kind == "IllFormedImplementation"


@pytest.mark.parametrize("path", sorted(p.name for p in CORPUS.glob("*.imp")))
def test_corpus_round_trip(path):
    c = load_file(CORPUS / path, require_main=False)
    again = parse(program_text(c.program))
    assert again == c.program
    assert program_text(again) == program_text(c.program)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2), st.booleans())
def test_random_round_trip(seed, n_preds, helper):
    program = random_source_program(random.Random(seed), n_preds=n_preds, helper=helper)
    validate(program)
    assert parse(program_text(program)) == program


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_substitution_closes_program(seed):
    program = random_source_program(random.Random(seed), n_preds=2)
    impl = {p.name: A.and_all(A.Var(q.name) for q in p.params) for p in program.predicates}
    assert validate(substitute(validate(program), impl)).partial == ()


def test_ast_json_is_stable():
    c = load_file(LOOP_POST)
    assert to_json(c.program) == to_json(parse(LOOP_POST.read_text()))
    assert to_json(c.program)["procedures"][0]["name"] == "main"
