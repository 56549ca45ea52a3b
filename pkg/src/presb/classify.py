"""Classification of definable sets up to definable bijection.

Two infinite definable sets admit a definable bijection exactly when their
dimensions agree; `classify` produces an explicit certified bijection onto
Z^dim.  The construction rectilinearises the set, carries each orthant piece
onto a full space by interleaving nonnegatives and negatives coordinatewise,
and then folds the pieces together one at a time with tagged-union merges.
"""

from __future__ import annotations

from itertools import product
from typing import Sequence

from .cells import decompose
from .dimension import dimension
from .errors import EmptyOrFiniteError, NotABijectionError
from .linear import LinearFunction
from .maps import (
    BijectionCertificate,
    Piece,
    PiecewiseLinearMap,
    compose,
    input_names,
    is_bijection_onto,
)
from .qe import satisfiable, simplify
from .recti import orthant_formula, rectilinearize
from .syntax import FALSE, TRUE, Formula, canon_cong, canon_eq, canon_le, conj, const, disj, neg, rename_free, var


def halfline_to_line() -> PiecewiseLinearMap:
    """Bijection H -> Z: 2k -> k and 2k+1 -> -k-1."""
    even = Piece(
        simplify(conj(canon_le(-var("x0")), canon_cong(var("x0"), 2))),
        (LinearFunction(((1, 0, 2),), 0),),
    )
    odd = Piece(
        simplify(conj(canon_le(-var("x0")), canon_cong(var("x0") - 1, 2))),
        (LinearFunction(((-1, 1, 2),), -1),),
    )
    return PiecewiseLinearMap(1, 1, (even, odd))


def extend_point_by_one() -> PiecewiseLinearMap:
    """Bijection H u {-1} -> H: x -> x + 1."""
    return PiecewiseLinearMap(
        1, 1, (Piece(canon_le(-var("x0") - 1), (LinearFunction(((1, 0, 1),), 1),)),)
    )


def interleave_pair() -> PiecewiseLinearMap:
    """Bijection ({0} x H) u ({1} x H) -> H: (0,x) -> 2x, (1,x) -> 2x+1."""
    zero = Piece(
        simplify(conj(canon_eq(var("x0")), canon_le(-var("x1")))),
        (LinearFunction(((0, 0, 1), (2, 0, 1)), 0),),
    )
    one = Piece(
        simplify(conj(canon_eq(var("x0") - 1), canon_le(-var("x1")))),
        (LinearFunction(((0, 0, 1), (2, 0, 1)), 1),),
    )
    return PiecewiseLinearMap(2, 1, (zero, one))


def orthant_to_space(l: int) -> PiecewiseLinearMap:
    """Bijection H^l -> Z^l, the halfline interleaving on every coordinate."""
    pieces = []
    for pattern in product((0, 1), repeat=l):
        dom_parts = []
        comps = []
        for i, p in enumerate(pattern):
            xi = var(f"x{i}")
            dom_parts.append(canon_le(-xi))
            dom_parts.append(canon_cong(xi - p, 2))
            coords = [(0, 0, 1)] * l
            if p == 0:
                coords[i] = (1, 0, 2)
                comps.append(LinearFunction(tuple(coords), 0))
            else:
                coords[i] = (-1, 1, 2)
                comps.append(LinearFunction(tuple(coords), -1))
        pieces.append(Piece(simplify(conj(*dom_parts)), tuple(comps)))
    return PiecewiseLinearMap(l, l, tuple(pieces))


def space_to_orthant(l: int) -> PiecewiseLinearMap:
    """Inverse of orthant_to_space: y >= 0 -> 2y, y < 0 -> -2y - 1."""
    pieces = []
    for pattern in product((0, 1), repeat=l):
        dom_parts = []
        comps = []
        for i, p in enumerate(pattern):
            yi = var(f"x{i}")
            coords = [(0, 0, 1)] * l
            if p == 0:
                dom_parts.append(canon_le(-yi))
                coords[i] = (2, 0, 1)
                comps.append(LinearFunction(tuple(coords), 0))
            else:
                dom_parts.append(canon_le(yi + 1))
                coords[i] = (-2, 0, 1)
                comps.append(LinearFunction(tuple(coords), -1))
        pieces.append(Piece(simplify(conj(*dom_parts)), tuple(comps)))
    return PiecewiseLinearMap(l, l, tuple(pieces))


def space_formula(dim: int) -> Formula:
    return TRUE


def plmap_union(a: PiecewiseLinearMap, b: PiecewiseLinearMap) -> PiecewiseLinearMap:
    if (a.input_arity, a.output_arity) != (b.input_arity, b.output_arity):
        raise NotABijectionError("cannot union maps of different arities")
    return PiecewiseLinearMap(a.input_arity, a.output_arity, a.pieces + b.pieces)


def _lift_front(g: PiecewiseLinearMap, extra: int) -> PiecewiseLinearMap:
    """g acting on the trailing coordinates, identity on `extra` new leading ones."""
    old = input_names(g.input_arity)
    new = input_names(g.input_arity + extra)
    ren = {o: new[i + extra] for i, o in enumerate(old)}
    pieces = []
    for p in g.pieces:
        comps = [LinearFunction.coordinate(g.input_arity + extra, i) for i in range(extra)]
        for c in p.components:
            comps.append(LinearFunction(tuple((0, 0, 1) for _ in range(extra)) + c.coords, c.offset))
        pieces.append(Piece(rename_free(p.domain, ren), tuple(comps)))
    return PiecewiseLinearMap(g.input_arity + extra, g.output_arity + extra, tuple(pieces))


def tagged_union_formula(m: int, l: int) -> Formula:
    """U = (Z^m x {0}) u (Z^l x {0}^{m-l} x {1}) inside Z^{m+1}."""
    names = input_names(m + 1)
    tag = var(names[-1])
    part0 = canon_eq(tag)
    pads = [canon_eq(var(names[i])) for i in range(l, m)]
    part1 = conj(canon_eq(tag - 1), *pads)
    return simplify(disj(part0, part1))


def merge_map(m: int, l: int) -> PiecewiseLinearMap:
    """Bijection from the tagged union (Z^m x {0}) u (iota(Z^l) x {1}) onto Z^m.

    iota pads with zero coordinates; requires 0 <= l <= m and m >= 1.
    """
    assert m >= 1 and 0 <= l <= m
    names = input_names(m + 1)
    tag = var(names[-1])
    if l == m:
        # interleave on the first coordinate
        comps0 = [LinearFunction.coordinate(m + 1, i) for i in range(m)]
        comps0[0] = LinearFunction(tuple((2 if i == 0 else 0, 0, 1) for i in range(m + 1)), 0)
        comps1 = list(comps0)
        comps1[0] = LinearFunction(tuple((2 if i == 0 else 0, 0, 1) for i in range(m + 1)), 1)
        return PiecewiseLinearMap(
            m + 1, m,
            (Piece(canon_eq(tag), tuple(comps0)), Piece(canon_eq(tag - 1), tuple(comps1))),
        )
    if l == 0:
        # absorb the padded point into the axis line of the last coordinate
        last = var(names[m - 1])
        on_axis = conj(*(canon_eq(var(names[i])) for i in range(m - 1)))
        comps_id = tuple(LinearFunction.coordinate(m + 1, i) for i in range(m))
        shift = list(comps_id)
        shift[m - 1] = LinearFunction.coordinate(m + 1, m - 1).shift(1)
        pieces = [
            Piece(simplify(conj(canon_eq(tag), on_axis, canon_le(-last))), tuple(shift)),
            Piece(simplify(conj(canon_eq(tag), on_axis, canon_le(last + 1))), comps_id),
            Piece(simplify(conj(canon_eq(tag), neg(on_axis))), comps_id),
            Piece(
                simplify(conj(canon_eq(tag - 1), *(canon_eq(var(names[i])) for i in range(m)))),
                tuple(LinearFunction.constant(0, m + 1) for _ in range(m)),
            ),
        ]
        return PiecewiseLinearMap(m + 1, m, tuple(pieces))
    inner = merge_map(m - 1, l - 1)
    return _lift_front(inner, 1)


def merge_map_inverse(m: int, l: int) -> PiecewiseLinearMap:
    """Inverse of merge_map: Z^m onto the tagged union inside Z^{m+1}."""
    assert m >= 1 and 0 <= l <= m
    names = input_names(m)
    if l == m:
        half_even = [LinearFunction.coordinate(m, i) for i in range(m)]
        half_even[0] = LinearFunction(tuple((1 if i == 0 else 0, 0, 2 if i == 0 else 1) for i in range(m)), 0)
        half_odd = [LinearFunction.coordinate(m, i) for i in range(m)]
        half_odd[0] = LinearFunction(tuple((1 if i == 0 else 0, 1 if i == 0 else 0, 2 if i == 0 else 1) for i in range(m)), 0)
        even = Piece(canon_cong(var(names[0]), 2), tuple(half_even) + (LinearFunction.constant(0, m),))
        odd = Piece(canon_cong(var(names[0]) - 1, 2), tuple(half_odd) + (LinearFunction.constant(1, m),))
        return PiecewiseLinearMap(m, m + 1, (even, odd))
    if l == 0:
        last = var(names[m - 1])
        on_axis = conj(*(canon_eq(var(names[i])) for i in range(m - 1)))
        ident = [LinearFunction.coordinate(m, i) for i in range(m)]
        unshift = list(ident)
        unshift[m - 1] = LinearFunction.coordinate(m, m - 1).shift(-1)
        tag0 = LinearFunction.constant(0, m)
        pieces = [
            Piece(simplify(conj(on_axis, canon_le(-last + 1))), tuple(unshift) + (tag0,)),
            Piece(simplify(conj(on_axis, canon_le(last + 1))), tuple(ident) + (tag0,)),
            Piece(simplify(conj(neg(on_axis))), tuple(ident) + (tag0,)),
            Piece(
                simplify(conj(*(canon_eq(var(names[i])) for i in range(m)))),
                tuple(LinearFunction.constant(0, m) for _ in range(m)) + (LinearFunction.constant(1, m),),
            ),
        ]
        return PiecewiseLinearMap(m, m + 1, tuple(pieces))
    return _lift_front(merge_map_inverse(m - 1, l - 1), 1)


def _tag_embed(arity: int, pad_to: int, tag: int) -> PiecewiseLinearMap:
    """Z^arity -> Z^{pad_to+1}: pad with zeros, append the tag."""
    comps = [LinearFunction.coordinate(arity, i) for i in range(arity)]
    comps += [LinearFunction.constant(0, arity) for _ in range(pad_to - arity)]
    comps.append(LinearFunction.constant(tag, arity))
    return PiecewiseLinearMap(arity, pad_to + 1, (Piece(TRUE, tuple(comps)),))


def _untag(arity: int, pad_to: int, tag: int) -> PiecewiseLinearMap:
    """Partial inverse of _tag_embed: defined on the tag's padded slice."""
    names = input_names(pad_to + 1)
    dom_parts = [canon_eq(var(names[-1]) - tag)]
    dom_parts += [canon_eq(var(names[i])) for i in range(arity, pad_to)]
    comps = tuple(LinearFunction.coordinate(pad_to + 1, i) for i in range(arity))
    return PiecewiseLinearMap(pad_to + 1, arity, (Piece(simplify(conj(*dom_parts)), comps),))


def classify(X: Formula, variables: Sequence[str], certify: bool = True) -> BijectionCertificate:
    """Certified bijection from an infinite definable set onto Z^dim(X)."""
    variables = tuple(variables)
    d = dimension(X, variables)
    if d is None:
        raise EmptyOrFiniteError("cannot classify the empty set")
    if d == 0:
        raise EmptyOrFiniteError("cannot classify a finite set onto a power of Z")
    pieces = rectilinearize(X, variables, certify=False)
    ren = dict(zip(variables, input_names(len(variables))))

    carried: list[tuple[Formula, PiecewiseLinearMap, PiecewiseLinearMap, int]] = []
    for rp in pieces:
        to_space = compose(orthant_to_space(rp.orthant_dim), rp.map)
        back = compose(rp.inverse, space_to_orthant(rp.orthant_dim))
        carried.append((rename_free(rp.piece, ren), to_space, back, rp.orthant_dim))

    first = max(range(len(carried)), key=lambda i: carried[i][3])
    order = [first] + [i for i in range(len(carried)) if i != first]
    dom0, F, F_inv, l0 = carried[order[0]]
    assert l0 == d, "rectilinearisation must attain the dimension"
    current_domain = dom0
    for idx in order[1:]:
        domq, G, G_inv, lq = carried[idx]
        merger = merge_map(d, lq)
        merger_inv = merge_map_inverse(d, lq)
        left = compose(merger, compose(_tag_embed(d, d, 0), F))
        right = compose(merger, compose(_tag_embed(lq, d, 1), G))
        left_inv = compose(F_inv, compose(_untag(d, d, 0), merger_inv))
        right_inv = compose(G_inv, compose(_untag(lq, d, 1), merger_inv))
        F = plmap_union(left, right).simplified()
        F_inv = plmap_union(left_inv, right_inv).simplified()
        current_domain = simplify(disj(current_domain, domq))
    if not certify:
        return BijectionCertificate(F, current_domain, space_formula(d), TRUE, TRUE, F_inv)
    cert = is_bijection_onto(F, current_domain, space_formula(d), inverse=F_inv)
    if cert is None:
        raise NotABijectionError("classification map failed certification")
    return cert


def set_cardinality(X: Formula, variables: Sequence[str]) -> int | None:
    """Exact cardinality of a finite definable set, None when infinite."""
    dec = decompose(X, variables)
    if any(c.type_sum > 0 for c in dec.cells):
        return None
    return len(dec.cells)


def are_isomorphic(X: Formula, x_vars: Sequence[str], Y: Formula, y_vars: Sequence[str]) -> bool:
    """Definable bijection exists iff dimensions agree (infinite sets) or
    cardinalities agree (finite sets)."""
    dx = dimension(X, x_vars)
    dy = dimension(Y, y_vars)
    if (dx or 0) == 0 and (dy or 0) == 0:
        return set_cardinality(X, x_vars) == set_cardinality(Y, y_vars)
    if (dx or 0) == 0 or (dy or 0) == 0:
        return False
    return dx == dy
