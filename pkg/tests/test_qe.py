import random

import numpy as np
import pytest

from presb.errors import EvaluationError
from presb.oracle import evaluate_on_box, truth_on_box
from presb.parser import parse, render
from presb.qe import decide_sentence, eliminate_quantifiers, equivalent, satisfiable
from presb.syntax import free_variables, is_quantifier_free

from corpus import qe_corpus


def test_parity():
    g = eliminate_quantifiers(parse("(exists (y) (eq x (* 2 y)))"))
    assert is_quantifier_free(g)
    assert equivalent(g, parse("(cong x 0 2)"))


def test_every_x_has_half():
    f = parse("(exists (y) (and (le (* 2 y) x) (le x (+ (* 2 y) 1))))")
    g = eliminate_quantifiers(f)
    assert equivalent(g, parse("true"))


def test_empty_interval():
    assert equivalent(eliminate_quantifiers(parse("(exists (x) (and (le 0 x) (le x -1)))")), parse("false"))


def test_decide_examples():
    assert decide_sentence(parse("(forall (x) (or (cong x 0 2) (cong x 1 2)))"))
    assert not decide_sentence(parse("(exists (x) (and (le 1 x) (le x 0)))"))
    assert decide_sentence(parse("(forall (x) (exists (y) (le x y)))"))
    with pytest.raises(EvaluationError):
        decide_sentence(parse("(le 0 x)"))


def test_coupled_quantifiers():
    # alternation with shared atoms, checked against hand-derived truths
    assert decide_sentence(parse("(forall (x) (exists (y) (and (le (* 2 y) x) (le x (+ (* 2 y) 1)))))"))
    assert not decide_sentence(parse("(exists (y) (forall (x) (le x y)))"))
    assert decide_sentence(parse("(forall (x) (exists (y) (and (le x (* 3 y)) (le (* 3 y) (+ x 2)))))"))
    assert decide_sentence(
        parse("(forall (x y) (implies (le x y) (exists (w) (and (le x w) (le w y)))))")
    )
    assert not decide_sentence(parse("(exists (x) (forall (y) (cong y x 2)))"))
    assert decide_sentence(parse("(forall (x) (exists (y) (eq x (- (* 2 y) x))))"))


def test_equivalent_examples():
    assert equivalent(parse("(le 0 x)"), parse("(not (le x -1))"))
    assert not equivalent(parse("(cong x 0 2)"), parse("(cong x 0 4)"))


def test_free_variables_not_added():
    f = parse("(exists (y) (and (le y x) (cong y 0 3)))")
    g = eliminate_quantifiers(f)
    assert set(free_variables(g)) <= {"x"}


def test_qe_oracle_agreement_sample():
    corpus = qe_corpus(n=60, seed=123)
    for f, names in corpus:
        g = eliminate_quantifiers(f)
        assert is_quantifier_free(g)
        got = evaluate_on_box(g, names, 12)
        want = truth_on_box(f, names, 12)
        assert np.array_equal(got, want), render(f)


def test_qe_idempotent_up_to_equivalence():
    corpus = qe_corpus(n=25, seed=321)
    for f, _ in corpus:
        g = eliminate_quantifiers(f)
        h = eliminate_quantifiers(g)
        assert equivalent(g, h)
        assert equivalent(f, g)


def test_decide_agrees_with_evaluate_after_qe():
    corpus = [f for f, names in qe_corpus(n=200, seed=11) if not names]
    from presb.syntax import evaluate

    for f in corpus[:25]:
        assert decide_sentence(f) == evaluate(eliminate_quantifiers(f), {})


def test_satisfiable():
    assert satisfiable(parse("(and (le 0 x) (cong x 1 2))"))
    assert not satisfiable(parse("(and (le 0 x) (le x -1))"))
