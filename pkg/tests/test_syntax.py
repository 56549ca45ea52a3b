import random

import pytest
from hypothesis import given, settings, strategies as st

from presb.errors import EvaluationError, ParseError
from presb.parser import parse, render
from presb.syntax import (
    Atom,
    Exists,
    LinearTerm,
    conj,
    const,
    evaluate,
    free_variables,
    normalize,
    substitute,
    var,
)

from corpus import FREE_POOL, rand_qf, rand_quantified


def test_parse_atoms():
    f = parse("(le 0 x)")
    assert isinstance(f, Atom) and f.kind == "le"
    g = parse("(cong x 0 2)")
    assert isinstance(g, Atom) and g.modulus == 2


def test_parse_exists():
    f = parse("(exists (y) (eq x (* 2 y)))")
    assert isinstance(f, Exists)
    assert free_variables(f) == ["x"]


def test_lt_is_sugar():
    assert parse("(lt x 3)") == parse("(le (+ x 1) 3)")


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse("(le x\n  (foo))")
    assert ei.value.line == 2
    with pytest.raises(ParseError):
        parse("(cong x 0 0)")
    with pytest.raises(ParseError):
        parse("(cong x 0 -3)")
    with pytest.raises(ParseError):
        parse("")


def test_render_trivia():
    assert render(parse("true")) == "true"
    assert render(parse("(le 0 x)")) == "(le 0 x)"
    assert render(parse("(cong x 0 2)")) == "(cong x 0 2)"


def test_evaluate_examples():
    assert evaluate(parse("(cong x 0 2)"), {"x": 4})
    assert not evaluate(parse("(le x 3)"), {"x": 5})
    assert evaluate(parse("(and (le 0 x) (le x 0))"), {"x": 0})
    with pytest.raises(EvaluationError):
        evaluate(parse("(le 0 x)"), {})
    with pytest.raises(EvaluationError):
        evaluate(parse("(exists (y) (le x y))"), {"x": 0})


def test_free_variables_examples():
    assert free_variables(parse("(le x y)")) == ["x", "y"]
    assert free_variables(parse("(exists (y) (le x y))")) == ["x"]
    assert free_variables(parse("true")) == []


def test_substitute_examples():
    f = substitute(parse("(le v 3)"), "v", var("x") + 1)
    assert f == parse("(le (+ x 1) 3)")
    # capture avoidance: the binder y must be renamed away
    g = substitute(parse("(exists (y) (le v y))"), "v", var("y"))
    assert free_variables(g) == ["y"]
    inner = g.body if isinstance(g, Exists) else None
    assert g.names[0] != "y"
    assert substitute(parse("true"), "v", var("x")) == parse("true")


def test_substitute_commutes_with_evaluate():
    rng = random.Random(5)
    for _ in range(60):
        f = rand_qf(rng, ("v", "x", "y"), rng.randint(1, 4))
        if "v" not in free_variables(f):
            continue
        t = LinearTerm.make(rng.randint(-4, 4), {"x": rng.randint(-2, 2), "y": rng.randint(-2, 2)})
        g = substitute(f, "v", t)
        for _ in range(25):
            env = {n: rng.randint(-8, 8) for n in ("x", "y")}
            env_v = dict(env, v=t.evaluate(env))
            assert evaluate(f, env_v) == evaluate(g, env)


def test_substitute_free_variable_law():
    rng = random.Random(7)
    for _ in range(80):
        f = rand_qf(rng, ("v", "x", "y"), rng.randint(1, 4))
        if "v" not in free_variables(f):
            continue
        # fresh variables: no coefficient cancellation, so equality is exact
        t = LinearTerm.make(1, {"u1": 2, "u2": 1})
        got = set(free_variables(substitute(f, "v", t)))
        want = (set(free_variables(f)) - {"v"}) | set(t.variables())
        assert got == want
        # overlapping variables may cancel, leaving at most the expected set
        t2 = LinearTerm.make(1, {"y": 2, "z": 1})
        assert set(free_variables(substitute(f, "v", t2))) <= (set(free_variables(f)) - {"v"}) | set(
            t2.variables()
        )


@st.composite
def formulas(draw):
    seed = draw(st.integers(0, 10**9))
    rng = random.Random(seed)
    f, _ = rand_quantified(rng)
    return f


@settings(max_examples=60, deadline=None)
@given(formulas())
def test_parse_render_roundtrip(f):
    assert parse(render(f)) == f or render(parse(render(f))) == render(f)


@settings(max_examples=40, deadline=None)
@given(formulas())
def test_normalize_preserves_truth_on_box(f):
    from presb.oracle import truth_on_box
    import numpy as np

    names = sorted(free_variables(f))[:3]
    g = normalize(f)
    assert sorted(free_variables(g)) == sorted(free_variables(f)) or set(free_variables(g)) <= set(
        free_variables(f)
    )
    a = truth_on_box(f, names, 6)
    b = truth_on_box(g, names, 6)
    assert np.array_equal(a, b)


def test_normalize_shapes():
    # negated <= flips over the integers
    g = normalize(parse("(not (le x 3))"))
    assert render(g) == "(le (+ (* -1 x) 4) 0)"
    # negated congruence survives as a negated literal
    h = normalize(parse("(not (cong x 1 2))"))
    assert render(h) == "(not (cong (+ x 1) 0 2))"
