import random

import pytest

from pathforge import desugar, eval_path, parse_path_expr, simplify, to_text

from randutil import random_db, random_expr

RED = "(((owns[isMarriedTo+/livesIn/dealsWith+])/(isLocatedIn+)+)+)+"
# sound normal form: test-position closures drop only at the top of a test,
# so the closure on the branch main isMarriedTo+ survives
OPT = "(owns[isMarriedTo+[livesIn[dealsWith]]]/isLocatedIn+)+"


def norm(text: str) -> str:
    return to_text(simplify(desugar(parse_path_expr(text))))


def test_r1_collapses_nested_closures():
    assert norm("((a+)+)+") == "a+"


def test_worked_reduction():
    assert norm(RED) == OPT


def test_normal_form_is_fixpoint():
    assert norm("a/b") == "a/b"


def test_r2_drops_test_closure_only():
    assert norm("a+[b+]") == "a+[b]"
    assert norm("a[b+]") == "a[b]"
    # the main expression's closure is retained
    assert norm("a+[b]") == "a+[b]"


def test_r4_drops_test_closure_only():
    assert norm("[b+]a+") == "[b]a+"
    assert norm("[b+]a") == "[b]a"
    assert norm("[b]a+") == "[b]a+"


def test_r3_nests_test_chains_head_first():
    assert norm("x[a/b/c]") == "x[a[b[c]]]"


def test_r5_nests_left_test_chains():
    assert norm("[a/b/c]x") == "[a[b[c]]]x"


def test_rules_do_not_enter_union_tests():
    assert norm("x[a/b|c]") == "x[a/b|c]"


def test_closure_inside_test_chain_survives_mid_chain():
    # only the top of a test is existential; inner closures still matter
    assert norm("x[a+/b]") == "x[a+[b]]"


def test_simplify_requires_desugared_input():
    with pytest.raises(ValueError):
        simplify(parse_path_expr("a{1,2}"))


def test_idempotent_on_random_expressions():
    rng = random.Random(23)
    for _ in range(300):
        expr = desugar(random_expr(rng, ["a", "b", "c"], depth=5))
        once = simplify(expr)
        assert simplify(once) == once


def test_preserves_semantics_on_random_dbs():
    rng = random.Random(29)
    for _ in range(300):
        expr = desugar(random_expr(rng, ["a", "b"], depth=4))
        db = random_db(rng, ["a", "b"], max_nodes=8)
        assert eval_path(simplify(expr), db) == eval_path(expr, db)


def test_worked_reduction_preserves_semantics():
    rng = random.Random(31)
    labels = ["owns", "isMarriedTo", "livesIn", "dealsWith", "isLocatedIn"]
    red = parse_path_expr(RED)
    opt = parse_path_expr(OPT)
    for _ in range(100):
        db = random_db(rng, labels, max_nodes=10)
        assert eval_path(red, db) == eval_path(opt, db)
