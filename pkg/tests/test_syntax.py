import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import naive_eval, random_formula
from omegacheck.syntax import (
    Add,
    BoundedExists,
    Eq,
    Exists,
    ForAll,
    NotBounded,
    Succ,
    SyntaxError_,
    Var,
    ZERO,
    eval_bounded,
    free_vars,
    is_closed,
    is_delta0,
    numeral,
    numeral_value,
    parse_formula,
    print_formula,
    substitute,
)


def S(t):
    return Succ(t)


def test_parse_atomic():
    assert parse_formula("0 = 0") == Eq(ZERO, ZERO)


def test_parse_forall():
    assert parse_formula("forall x. x = x") == ForAll("x", Eq(Var("x"), Var("x")))


def test_parse_bounded_exists():
    f = parse_formula("exists x <= S(S(0)). x = S(0)")
    assert f == BoundedExists("x", S(S(ZERO)), Eq(Var("x"), S(ZERO)))
    assert parse_formula(print_formula(f)) == f


def test_parse_reports_position():
    with pytest.raises(SyntaxError_) as info:
        parse_formula("0 = ?")
    assert info.value.position == 4


def test_precedence_and_associativity():
    f = parse_formula("0 = 0 & 0 <= 0 | 0 = 0 -> 0 = 0 -> 0 = 0")
    # -> binds loosest and to the right; | over &.
    assert f == parse_formula("((0 = 0 & 0 <= 0) | 0 = 0) -> (0 = 0 -> 0 = 0)")
    assert parse_formula("S(0) + S(0) * S(S(0)) =S(S(S(0)))") == parse_formula(
        "S(0) + (S(0) * S(S(0))) = S(S(S(0)))"
    )


def test_numerals():
    assert numeral(0) == ZERO
    assert numeral(3) == S(S(S(ZERO)))
    assert numeral_value(numeral(7)) == 7
    assert numeral_value(Add(ZERO, ZERO)) is None


def test_substitute_instance():
    f = Eq(Var("x"), ZERO)
    assert substitute(f, "x", numeral(2)) == Eq(S(S(ZERO)), ZERO)


def test_substitute_shadowing():
    f = ForAll("x", Eq(Var("x"), Var("x")))
    assert substitute(f, "x", numeral(1)) == f


def test_substitute_capture_avoidance():
    f = Exists("y", Eq(Var("y"), Var("x")))
    g = substitute(f, "x", Var("y"))
    assert isinstance(g, Exists)
    assert g.var != "y"
    assert g.body == Eq(Var(g.var), Var("y"))


def test_substitute_renames_on_bound_term_capture():
    f = BoundedExists("x", Var("y"), Eq(Var("x"), Var("x")))
    g = substitute(f, "y", Var("x"))
    assert isinstance(g, BoundedExists)
    assert g.bound == Var("x")
    assert g.var != "x"


def test_eval_examples():
    assert eval_bounded(parse_formula("S(0) + S(0) = S(S(0))")) is True
    # Witness 3 among x <= 4: 3 * 3 = 9.
    nine = "S(S(S(S(S(S(S(S(S(0)))))))))"
    four = "S(S(S(S(0))))"
    f = parse_formula(f"exists x <= {four}. x * x = {nine}")
    assert eval_bounded(f) is True
    assert naive_eval(f) is True
    g = parse_formula(f"forall x <= S(S(0)). x + x <= {four}")
    assert eval_bounded(g) is True
    assert naive_eval(g) is True


def test_eval_rejects_unbounded():
    with pytest.raises(NotBounded):
        eval_bounded(parse_formula("forall x. x = x"))
    with pytest.raises(NotBounded):
        eval_bounded(parse_formula("x = x"))


def test_delta0_recognition_is_syntactic():
    assert is_delta0(parse_formula("forall x <= S(0). exists y <= x. y <= x"))
    assert not is_delta0(parse_formula("forall x <= S(0). exists y. y <= x"))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 4))
def test_print_parse_roundtrip(seed, depth):
    rng = random.Random(seed)
    f = random_formula(rng, depth)
    assert parse_formula(print_formula(f)) == f


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 6))
def test_substitution_removes_variable(seed, value):
    rng = random.Random(seed)
    f = random_formula(rng, 3)
    for var in sorted(free_vars(f)):
        g = substitute(f, var, numeral(value))
        assert var not in free_vars(g)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_eval_agrees_with_naive_interpreter(seed):
    from conftest import random_closed_delta0

    rng = random.Random(seed)
    f = random_closed_delta0(rng, 3)
    assert is_closed(f) and is_delta0(f)
    assert eval_bounded(f) == naive_eval(f)
