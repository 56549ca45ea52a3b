import numpy as np
import pytest

from presb.linear import LinearFunction
from presb.maps import Piece, PiecewiseLinearMap, identity_map
from presb.oracle import (
    Report,
    check_bijection_on_box,
    check_partition,
    count_box,
    enumerate_box,
    evaluate_on_box,
    truth_on_box,
)
from presb.parser import parse
from presb.syntax import TRUE


def test_enumerate_examples():
    assert enumerate_box(parse("(cong x 0 2)"), ["x"], 3) == [(-2,), (0,), (2,)]
    assert enumerate_box(parse("false"), ["x"], 5) == []
    pts = enumerate_box(parse("(and (le 0 x) (le x t) (le t (* 2 x)))"), ["x", "t"], 2)
    assert pts == [(0, 0), (1, 1), (1, 2), (2, 2)]


def test_lex_order():
    pts = enumerate_box(parse("true"), ["x", "y"], 1)
    assert pts == sorted(pts)


def test_quantified_truth():
    grid = truth_on_box(parse("(exists (y) (eq x (* 2 y)))"), ["x"], 5)
    want = np.array([v % 2 == 0 for v in range(-5, 6)])
    assert np.array_equal(grid, want)


def test_check_partition_pass():
    rep = check_partition(parse("true"), [parse("(cong x 0 2)"), parse("(cong x 1 2)")], ["x"], 10)
    assert rep.passed and rep.counterexamples == []


def test_check_partition_overlap():
    rep = check_partition(parse("(le 0 x)"), [parse("(le 0 x)"), parse("(le 5 x)")], ["x"], 10)
    assert not rep.passed
    assert any(c["point"] == [5] for c in rep.counterexamples)


def test_check_partition_leak():
    rep = check_partition(parse("(le 0 x)"), [parse("(le -2 x)")], ["x"], 10)
    assert not rep.passed


def test_report_json():
    rep = Report(True, [], {"points": 3})
    assert '"pass": true' in rep.to_json()


def test_bijection_identity():
    rep = check_bijection_on_box(identity_map(1), TRUE, TRUE, 10)
    assert rep.passed


def test_bijection_doubling_fails():
    dbl = PiecewiseLinearMap(1, 1, (Piece(TRUE, (LinearFunction(((2, 0, 1),), 0),)),))
    rep = check_bijection_on_box(dbl, TRUE, TRUE, 10)
    assert not rep.passed


def test_bijection_halfline_fold():
    f1 = PiecewiseLinearMap(
        1,
        1,
        (
            Piece(parse("(and (le 0 x0) (cong x0 0 2))"), (LinearFunction(((1, 0, 2),), 0),)),
            Piece(parse("(and (le 0 x0) (cong x0 1 2))"), (LinearFunction(((-1, 1, 2),), -1),)),
        ),
    )
    rep = check_bijection_on_box(f1, parse("(le 0 x0)"), TRUE, 20)
    assert rep.passed


def test_count_box():
    assert count_box(parse("true"), ["x"], 8) == 17
    assert count_box(parse("(eq x 5)"), ["x"], 8) == 1
