import random

from presb.cells import cell_to_formula, decompose
from presb.dimension import dimension, growth_dimension_estimate
from presb.parser import parse, render
from presb.qe import eliminate_quantifiers, simplify
from presb.syntax import Exists, disj, rename_free

from corpus import sets_corpus

RADII = (8, 16, 32)


def test_examples():
    assert dimension(parse("(eq x 5)"), ["x"]) == 0
    assert dimension(parse("true"), ["x", "y"]) == 2
    assert dimension(parse("(eq x y)"), ["x", "y"]) == 1
    assert dimension(parse("false"), ["x"]) is None


def test_growth_examples():
    assert growth_dimension_estimate(parse("true"), ["x"], RADII) == 1
    assert growth_dimension_estimate(parse("(eq x y)"), ["x", "y"], RADII) == 1
    assert growth_dimension_estimate(parse("(eq x 5)"), ["x"], RADII) == 0
    assert growth_dimension_estimate(parse("false"), ["x"], RADII) is None


def test_union_law_on_sample():
    corpus = sets_corpus(30, seed=60)
    rng = random.Random(1)
    pairs = [(corpus[rng.randrange(len(corpus))], corpus[rng.randrange(len(corpus))]) for _ in range(12)]
    for (X, vx), (Y, vy) in pairs:
        names = list(dict.fromkeys(list(vx) + list(vy)))
        u = disj(X, Y)
        du = dimension(u, names)
        dx = dimension(X, names)
        dy = dimension(Y, names)
        vals = [d for d in (dx, dy) if d is not None]
        assert du == (max(vals) if vals else None)


def test_cell_dimension_is_type_sum():
    for X, names in sets_corpus(12, seed=61):
        d = decompose(X, names)
        for cell in d.cells[:4]:
            assert dimension(cell_to_formula(cell, names), names) == cell.type_sum


def test_growth_agreement_on_sample():
    for X, names in sets_corpus(25, seed=62):
        assert dimension(X, names) == growth_dimension_estimate(X, names, RADII), render(X)


def test_image_dimension_does_not_grow():
    # images under piecewise-linear maps, computed as definable sets by projection
    from corpus import FREE_POOL

    cases = [
        ("(and (le 0 x) (le x t))", ["x", "t"], "(and (eq u x) (eq v (+ x t)))"),
        ("true", ["x"], "(eq u (* 2 x))"),
        ("true", ["x", "t"], "(eq u x)"),
    ]
    for text, names, graph_text in cases:
        X = parse(text)
        graph = parse(graph_text)
        out_names = [v for v in ("u", "v") if v in graph_text]
        image = eliminate_quantifiers(Exists(tuple(names), simplify(parse(text) & graph)))
        di = dimension(image, out_names)
        dx = dimension(X, names)
        assert (di or 0) <= (dx or 0)
