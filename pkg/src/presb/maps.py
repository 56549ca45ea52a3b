"""Piecewise-linear maps between subsets of Z^m and bijection certificates.

A map is a finite list of pieces (disjoint quantifier-free domains over the
canonical input variables x0..x{m-1}) with one LinearFunction per output
coordinate.  Set formulas attached to maps and certificates use the same
canonical namespace for whatever arity they describe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .errors import ArityError, DomainError, NotABijectionError
from .linear import DivTerm, LinearFunction, divterm_to_linear, linear_from_json, linear_json
from .parser import parse, render
from .qe import decide_sentence, eliminate_quantifiers, satisfiable, simplify
from .syntax import (
    CONG,
    EQ,
    FALSE,
    LE,
    TRUE,
    Atom,
    Boolean,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    And,
    Or,
    canon_cong,
    canon_eq,
    canon_le,
    conj,
    disj,
    evaluate,
    free_variables,
    is_quantifier_free,
    neg,
    rename_free,
    var,
)


def input_names(arity: int, prefix: str = "x") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(arity))


def set_formula_vars(f: Formula, arity: int) -> tuple[str, ...]:
    names = input_names(arity)
    extra = set(free_variables(f)) - set(names)
    if extra:
        raise ArityError(f"set formula mentions {sorted(extra)}; expected only {list(names)}")
    return names


def subst_divterms(f: Formula, mapping: dict[str, DivTerm]) -> Formula:
    """Substitute divided terms for free variables, multiplying atoms through.

    Exact on regions where the divided terms are integral, which is the only
    place callers use the result.
    """

    def on_atom(a: Atom) -> Formula:
        t = a.lhs - a.rhs
        dt = DivTerm.of(t.constant)
        for v, c in t.coeffs:
            rep = mapping.get(v)
            if rep is None:
                dt = dt + DivTerm.of(var(v).scale(c))
            else:
                dt = dt + rep.scale(c)
        if a.kind == LE:
            return canon_le(dt.num)
        if a.kind == EQ:
            return canon_eq(dt.num)
        return canon_cong(dt.num, a.modulus * dt.den)

    def walk(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return on_atom(g)
        if isinstance(g, Boolean):
            return g
        if isinstance(g, Not):
            return neg(walk(g.body))
        if isinstance(g, And):
            return conj(*(walk(a) for a in g.args))
        if isinstance(g, Or):
            return disj(*(walk(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        raise ArityError("cannot substitute under quantifiers; eliminate them first")

    return walk(f)


@dataclass(frozen=True)
class Piece:
    domain: Formula
    components: tuple[LinearFunction, ...]

    def comps_key(self) -> tuple[LinearFunction, ...]:
        return self.components


@dataclass(frozen=True)
class PiecewiseLinearMap:
    input_arity: int
    output_arity: int
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        for p in self.pieces:
            if len(p.components) != self.output_arity:
                raise ArityError("piece has wrong number of components")
            for c in p.components:
                if c.arity != self.input_arity:
                    raise ArityError("component has wrong input arity")

    def domain_formula(self) -> Formula:
        return simplify(disj(*(p.domain for p in self.pieces)))

    def apply(self, point: Sequence[int]) -> tuple[int, ...]:
        point = tuple(int(v) for v in point)
        if len(point) != self.input_arity:
            raise ArityError(f"expected {self.input_arity} coordinates")
        names = input_names(self.input_arity)
        env = dict(zip(names, point))
        for p in self.pieces:
            if evaluate(p.domain, env):
                return tuple(c.apply(point) for c in p.components)
        raise DomainError(f"point {point} outside the map's domain")

    def defined_at(self, point: Sequence[int]) -> bool:
        names = input_names(self.input_arity)
        env = dict(zip(names, tuple(int(v) for v in point)))
        return any(evaluate(p.domain, env) for p in self.pieces)

    def graph_formula(self, in_names: Sequence[str], out_names: Sequence[str]) -> Formula:
        """Or over pieces of (domain and out = components), over given names."""
        if len(in_names) != self.input_arity or len(out_names) != self.output_arity:
            raise ArityError("bad name lists for graph formula")
        std = input_names(self.input_arity)
        ren = dict(zip(std, in_names))
        parts = []
        for p in self.pieces:
            eqs = [c.compare_var_formula(std, "__out", "eq") for c in p.components]
            sub = [rename_free(e, {**ren, "__out": o}) for e, o in zip(eqs, out_names)]
            doms = [c.domain_formula(std) for c in p.components]
            body = conj(rename_free(conj(p.domain, *doms), ren), *sub)
            parts.append(body)
        return simplify(disj(*parts))

    def simplified(self, prune: bool = True) -> PiecewiseLinearMap:
        """Merge pieces with identical components; optionally drop empty ones."""
        groups: dict[tuple[LinearFunction, ...], list[Formula]] = {}
        order: list[tuple[LinearFunction, ...]] = []
        for p in self.pieces:
            if p.comps_key() not in groups:
                order.append(p.comps_key())
            groups.setdefault(p.comps_key(), []).append(p.domain)
        pieces = []
        for key in order:
            dom = simplify(disj(*groups[key]))
            if prune and (dom == FALSE or not satisfiable(dom)):
                continue
            pieces.append(Piece(dom, key))
        return PiecewiseLinearMap(self.input_arity, self.output_arity, tuple(pieces))


def identity_map(arity: int, domain: Formula | None = None) -> PiecewiseLinearMap:
    comps = tuple(LinearFunction.coordinate(arity, i) for i in range(arity))
    return PiecewiseLinearMap(arity, arity, (Piece(domain if domain is not None else TRUE, comps),))


def relinearize(domain: Formula, names: Sequence[str], divterms: Sequence[DivTerm]):
    """Split the domain by coordinate residues so each divided term becomes a
    LinearFunction; yields (subdomain, [LinearFunction...]) with unsatisfiable
    subdomains skipped syntactically (callers may prune further)."""
    import math

    names = tuple(names)
    need: dict[str, int] = {v: 1 for v in names}
    for dt in divterms:
        dt = dt.reduced()
        for v, b in dt.num.coeffs:
            need[v] = math.lcm(need[v], dt.den // math.gcd(b, dt.den))
    split_vars = [v for v in names if need[v] > 1]
    choices = [range(need[v]) for v in split_vars]
    reduced = [dt.reduced() for dt in divterms]
    for combo in product(*choices):
        res = dict(zip(split_vars, combo))
        # offsets are determined by the residues; non-integral ones mean the
        # combo is empty wherever the divided terms are exact
        if any(
            (dt.num.constant + sum(b * res.get(v, 0) for v, b in dt.num.coeffs)) % dt.den != 0
            for dt in reduced
        ):
            continue
        conds = [canon_cong(var(v) - res[v], need[v]) for v in split_vars]
        sub = simplify(conj(domain, *conds))
        if sub == FALSE:
            continue
        congs = [(res.get(v, 0), need[v]) for v in names]
        yield sub, [divterm_to_linear(dt, names, congs) for dt in reduced]


def compose(g: PiecewiseLinearMap, h: PiecewiseLinearMap, check_domains: bool = False) -> PiecewiseLinearMap:
    """g after h.  Piece domains are intersections pulled back through h."""
    if h.output_arity != g.input_arity:
        raise ArityError("output arity of the inner map must match the outer input arity")
    if check_domains:
        xs = input_names(h.input_arity)
        ys = input_names(g.input_arity, "y")
        graph = h.graph_formula(xs, ys)
        target = rename_free(g.domain_formula(), dict(zip(input_names(g.input_arity), ys)))
        ok = decide_sentence(Forall(xs + ys, Implies(graph, target))) if xs or ys else True
        if not ok:
            raise DomainError("image of the inner map leaves the outer map's domain")
    xs = input_names(h.input_arity)
    gs = input_names(g.input_arity)
    out: list[Piece] = []
    for ph in h.pieces:
        h_doms = conj(ph.domain, *(c.domain_formula(xs) for c in ph.components))
        reps = {gv: c.to_divterm(xs) for gv, c in zip(gs, ph.components)}
        for pg in g.pieces:
            pulled = subst_divterms(conj(pg.domain, *(c.domain_formula(gs) for c in pg.components)), reps)
            dom = simplify(conj(h_doms, pulled))
            if dom == FALSE:
                continue
            comp_dts = [c.to_divterm(gs).subst_many(reps) for c in pg.components]
            for sub, lfs in relinearize(dom, xs, comp_dts):
                if not satisfiable(sub):
                    continue
                out.append(Piece(sub, tuple(lfs)))
    return PiecewiseLinearMap(h.input_arity, g.output_arity, tuple(out))


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class BijectionCertificate:
    map: PiecewiseLinearMap
    source: Formula
    target: Formula
    injectivity: Formula
    surjectivity: Formula
    inverse_map: PiecewiseLinearMap | None = None

    def check(self) -> bool:
        return decide_sentence(self.injectivity) and decide_sentence(self.surjectivity)


def is_bijection_onto(
    g: PiecewiseLinearMap, X: Formula, Y: Formula, inverse: PiecewiseLinearMap | None = None
) -> BijectionCertificate | None:
    """Certificate that g restricted to X is a bijection onto Y, or None.

    The injectivity sentence is the conjunction, over ordered piece pairs, of
    "equal values force equal points"; the surjectivity sentence asserts the
    image (projected per piece) equals Y.  Both shapes keep every quantifier
    block small so the decisions stay cheap even for many-piece maps.
    """
    xs = set_formula_vars(X, g.input_arity)
    ys_named = set_formula_vars(Y, g.output_arity)
    xs2 = input_names(g.input_arity, "xx")
    ys = input_names(g.output_arity, "yy")
    Y_out = rename_free(Y, dict(zip(ys_named, ys)))
    X2 = rename_free(X, dict(zip(xs, xs2)))
    std = input_names(g.input_arity)

    defined = disj(*(conj(p.domain, *(c.domain_formula(std) for c in p.components)) for p in g.pieces))
    total: Formula = Implies(X, rename_free(defined, dict(zip(std, xs))))
    if xs:
        total = Forall(xs, total)
    if not decide_sentence(total):
        return None

    def piece_parts(p: Piece, names):
        ren = dict(zip(std, names))
        dom = rename_free(conj(p.domain, *(c.domain_formula(std) for c in p.components)), ren)
        values = [c.to_divterm(std).rename(ren) for c in p.components]
        return dom, values

    same = conj(*(canon_eq(var(a) - var(b)) for a, b in zip(xs, xs2))) if xs else TRUE
    inj_parts: list[Formula] = []
    for i, p in enumerate(g.pieces):
        dom_p, vals_p = piece_parts(p, xs)
        for q in g.pieces[i:]:
            dom_q, vals_q = piece_parts(q, xs2)
            equal = conj(*(a.eq_formula(b) for a, b in zip(vals_p, vals_q)))
            body = Implies(conj(X, X2, dom_p, dom_q, equal), same)
            inj_parts.append(Forall(xs + xs2, body) if xs else body)
    injectivity = conj(*inj_parts) if inj_parts else TRUE
    if not decide_sentence(injectivity):
        return None

    images = []
    for p in g.pieces:
        dom_p, vals_p = piece_parts(p, xs)
        eqs = [canon_eq(v.num - var(y).scale(v.den)) for v, y in zip(vals_p, ys)]
        body = conj(X, dom_p, *eqs)
        images.append(eliminate_quantifiers(Exists(xs, body)) if xs else eliminate_quantifiers(body))
    image = simplify(disj(*images))
    surj_body = conj(Implies(Y_out, image), Implies(image, Y_out))
    surjectivity: Formula = Forall(ys, surj_body) if ys else surj_body
    if not decide_sentence(surjectivity):
        return None
    return BijectionCertificate(g, X, Y, injectivity, surjectivity, inverse)


def invert(cert: BijectionCertificate) -> PiecewiseLinearMap:
    """Explicit inverse of a certified bijection.

    Constructions that know their inverse store it on the certificate; the
    fallback solves the swapped graph one coordinate at a time.
    """
    if cert.inverse_map is not None:
        return cert.inverse_map
    from .cells import decompose_function

    g = cert.map
    m, k = g.input_arity, g.output_arity
    xs = input_names(m, "u")
    ys = input_names(k)
    graph = conj(rename_free(cert.source, dict(zip(input_names(m), xs))), g.graph_formula(xs, ys))
    coordinate_maps: list = []
    for i in range(m):
        others = tuple(v for j, v in enumerate(xs) if j != i)
        gi = eliminate_quantifiers(Exists(others, graph) if others else graph)
        dec = decompose_function(gi, ys, xs[i])
        from .cells import cell_to_formula

        coordinate_maps.append([(cell_to_formula(c, ys), f) for c, f in zip(dec.cells, dec.functions)])
    pieces: list[Piece] = []
    for combo in product(*coordinate_maps):
        dom = simplify(conj(*(d for d, _ in combo)))
        if dom == FALSE or not satisfiable(dom):
            continue
        pieces.append(Piece(dom, tuple(f for _, f in combo)))
    if m == 0:
        pieces = [Piece(cert.target, ())] if satisfiable(cert.target) else []
    return PiecewiseLinearMap(k, m, tuple(pieces))


# ---------------------------------------------------------------------------
# Serialization


def map_json(g: PiecewiseLinearMap) -> dict:
    return {
        "m": g.input_arity,
        "k": g.output_arity,
        "pieces": [
            {"domain": render(p.domain), "components": [linear_json(c) for c in p.components]}
            for p in g.pieces
        ],
    }


def map_from_json(data: dict) -> PiecewiseLinearMap:
    pieces = tuple(
        Piece(parse(p["domain"]), tuple(linear_from_json(c) for c in p["components"]))
        for p in data["pieces"]
    )
    return PiecewiseLinearMap(int(data["m"]), int(data["k"]), pieces)


def map_json_str(g: PiecewiseLinearMap) -> str:
    return json.dumps(map_json(g), sort_keys=True)
