import random

import numpy as np
import pytest

from presb.cells import (
    BandCoord,
    Cell,
    EqCoord,
    apply_linear,
    cell_contains,
    cell_from_json,
    cell_json,
    cell_to_formula,
    classify_fiber,
    decompose,
    decompose_function,
    project_to_full_cell,
    verify_partition,
)
from presb.errors import DomainError, UnsatisfiableError
from presb.linear import LinearFunction
from presb.oracle import check_partition, enumerate_box, evaluate_on_box, truth_on_box
from presb.parser import parse, render
from presb.qe import equivalent, satisfiable
from presb.syntax import conj, free_variables

from corpus import sets_corpus


def formulas_of(dec):
    return [cell_to_formula(c, dec.variables) for c in dec.cells]


def test_halfline_single_cell():
    d = decompose(parse("(le 3 x)"), ["x"])
    assert len(d.cells) == 1
    (c,) = d.cells
    assert c.type_vector == (1,)
    band = c.coords[0]
    assert band.lower is not None and band.lower.apply(()) == 3
    assert band.upper is None and band.modulus == 1


def test_even_interval_six_points():
    X = parse("(and (le 0 x) (le x 10) (cong x 0 2))")
    d = decompose(X, ["x"])
    assert sorted(c.type_vector for c in d.cells) == [(0,)] * 6
    values = sorted(c.coords[0].value.apply(()) for c in d.cells)
    assert values == [0, 2, 4, 6, 8, 10]
    verify_partition(d, X)


def test_band_attains_full_type():
    X = parse("(and (le 0 x) (le x t) (le t (* 2 x)))")
    d = decompose(X, ["x", "t"])
    assert max(c.type_sum for c in d.cells) == 2
    verify_partition(d, X)
    rep = check_partition(X, formulas_of(d), ["x", "t"], 15)
    assert rep.passed


def test_empty_set_empty_decomposition():
    d = decompose(parse("false"), ["x", "y"])
    assert d.cells == ()


def test_partition_on_corpus_sample():
    for X, names in sets_corpus(25, seed=9):
        d = decompose(X, names)
        verify_partition(d, X)
        rep = check_partition(X, formulas_of(d), names, 12)
        assert rep.passed, render(X)


def test_type_soundness_on_sample():
    # type-1 coordinates have genuinely unbounded fibers; all-zero cells are points
    for X, names in sets_corpus(12, seed=31):
        d = decompose(X, names)
        for cell in d.cells:
            if cell.is_finite():
                pts = enumerate_box(cell_to_formula(cell, names), names, 40)
                assert len(pts) == 1
            last = cell.coords[-1]
            if isinstance(last, BandCoord):
                base = Cell(cell.coords[:-1])
                basef = cell_to_formula(base, names[:-1]) if cell.arity > 1 else parse("true")
                fc = classify_fiber(
                    basef, last.lower, last.upper, last.modulus, last.residue, variables=names[:-1]
                )
                assert not fc.bounded


def test_redecomposing_a_cell_keeps_type_sum():
    for X, names in sets_corpus(10, seed=77):
        d = decompose(X, names)
        for cell in d.cells[:3]:
            f = cell_to_formula(cell, names)
            d2 = decompose(f, names)
            assert max(c.type_sum for c in d2.cells) == cell.type_sum


def test_function_simple_graphs():
    fd = decompose_function(parse("(eq w (+ x 1))"), ["x"], "w")
    assert len(fd.cells) == 1
    assert fd.functions[0].apply((7,)) == 8

    fd = decompose_function(parse("(or (and (le 0 x) (eq w x)) (and (le x -1) (eq w (- 0 x))))"), ["x"], "w")
    for x in range(-30, 31):
        hits = [f.apply((x,)) for c, f in zip(fd.cells, fd.functions) if cell_contains(c, (x,))]
        assert hits == [abs(x)]


def test_function_floor_div():
    fd = decompose_function(parse("(and (le (* 2 w) x) (le x (+ (* 2 w) 1)))"), ["x"], "w")
    residues = sorted((f.coords[0][1], f.coords[0][2]) for f in fd.functions)
    assert residues == [(0, 2), (1, 2)]
    for x in range(-30, 31):
        hits = [f.apply((x,)) for c, f in zip(fd.cells, fd.functions) if cell_contains(c, (x,))]
        assert hits == [x // 2]


def test_function_rejects_relations():
    with pytest.raises(DomainError):
        decompose_function(parse("(le w x)"), ["x"], "w")


def test_classify_fiber_examples():
    ident = LinearFunction(((1, 0, 1),), 0)
    twice = LinearFunction(((2, 0, 1),), 0)
    shift7 = LinearFunction(((1, 0, 1),), 7)
    assert not classify_fiber(parse("(le 0 x)"), ident, twice, 1, variables=["x"]).bounded
    fc = classify_fiber(parse("true"), ident, shift7, 1, variables=["x"])
    assert fc.bounded and fc.bound == 8
    assert not classify_fiber(parse("true"), None, ident, 1, variables=["x"]).bounded
    with pytest.raises(UnsatisfiableError):
        classify_fiber(parse("false"), ident, shift7, 1, variables=["x"])


def test_classify_fiber_with_modulus():
    ident = LinearFunction(((1, 0, 1),), 0)
    shift7 = LinearFunction(((1, 0, 1),), 7)
    fc = classify_fiber(parse("true"), ident, shift7, 2, 0, variables=["x"])
    assert fc.bounded and fc.bound == 4


def test_apply_linear_examples():
    f = LinearFunction(((3, 1, 2),), 4)  # 3*(x-1)/2 + 4
    assert apply_linear(f, (5,)) == 10
    assert apply_linear(LinearFunction(((1, 0, 1),), 0), (-7,)) == -7
    g = LinearFunction(((1, 1, 3),), 0)
    assert apply_linear(g, (7,)) == 2
    with pytest.raises(DomainError):
        apply_linear(g, (8,))


def test_project_examples():
    d = decompose(parse("(and (le 0 x) (eq t (+ x 1)))"), ["x", "t"])
    (cell,) = d.cells
    assert cell.type_vector == (1, 0)
    idx, img = project_to_full_cell(cell)
    assert idx == [1] and img.type_vector == (1,)
    assert equivalent(cell_to_formula(img, ["x"]), parse("(le 0 x)"))

    d2 = decompose(parse("(and (eq x 5) (le 0 t))"), ["x", "t"])
    (cell2,) = d2.cells
    assert cell2.type_vector == (0, 1)
    idx2, img2 = project_to_full_cell(cell2)
    assert idx2 == [2]
    assert equivalent(cell_to_formula(img2, ["t"]), parse("(le 0 t)"))

    d3 = decompose(parse("(and (le 0 x) (le x t))"), ["x", "t"])
    (cell3,) = d3.cells
    idx3, img3 = project_to_full_cell(cell3)
    assert idx3 == [1, 2] and img3 == cell3


def test_project_is_a_bijection_on_a_box():
    X = parse("(and (le 0 x) (eq t (+ x 1)))")
    d = decompose(X, ["x", "t"])
    (cell,) = d.cells
    idx, img = project_to_full_cell(cell)
    src = enumerate_box(cell_to_formula(cell, ["x", "t"]), ["x", "t"], 12)
    imgs = [tuple(p[i - 1] for i in idx) for p in src]
    assert len(set(imgs)) == len(imgs)
    imgf = cell_to_formula(img, ["u"])
    ok = truth_on_box(imgf, ["u"], 12)
    for q in imgs:
        if all(abs(c) <= 12 for c in q):
            assert ok[q[0] + 12]


def test_project_requires_a_band():
    d = decompose(parse("(eq x 5)"), ["x"])
    with pytest.raises(DomainError):
        project_to_full_cell(d.cells[0])


def test_cell_json_roundtrip():
    for X, names in sets_corpus(8, seed=5):
        d = decompose(X, names)
        for cell in d.cells:
            data = cell_json(cell)
            again = cell_from_json(data)
            assert again == cell
            assert data["type"] == list(cell.type_vector)
