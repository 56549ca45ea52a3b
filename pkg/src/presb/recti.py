"""Rectilinearisation: partition a definable set into pieces, each carried by
an explicit linear bijection onto a nonnegative orthant H^l.

The construction follows the cell structure: project away type-0 coordinates,
rectify the base recursively, transport the last coordinate's band along the
base chart (where its bounds become plain integer-linear), straighten
congruences by per-coordinate residue splits, translate by the aligned lower
bound, and finish boxes u <= k0 + sum k_i x_i by the triangular shear
splitting {u < x_p} / {x_p <= u} until the bound is constant.

Charts are bookkeeping for these steps: a domain formula over canonical input
names, forward divided terms onto the orthant, and inverse divided terms back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cells import BandCoord, Cell, EqCoord, cell_to_formula, decompose, recovery_functions
from .errors import NotABijectionError, PresbError
from .linear import DivTerm, LinearFunction
from .maps import (
    BijectionCertificate,
    Piece,
    PiecewiseLinearMap,
    input_names,
    is_bijection_onto,
    relinearize,
    subst_divterms,
)
from .qe import satisfiable, simplify
from .syntax import FALSE, TRUE, Formula, canon_cong, canon_le, conj, const, free_variables, rename_free, var


def orthant_formula(dim: int) -> Formula:
    return conj(*(canon_le(-var(v)) for v in input_names(dim)))


@dataclass(frozen=True)
class Chart:
    """Bijection from its domain (over x0..x{in_arity-1}) onto H^out_dim."""

    in_arity: int
    out_dim: int
    domain: Formula
    fwd: tuple[DivTerm, ...]
    inv: tuple[DivTerm, ...]


def _subst_many(dt: DivTerm, reps: dict[str, DivTerm]) -> DivTerm:
    return dt.subst_many(reps)


def chart_compose(outer: Chart, inner: Chart) -> Chart:
    """outer after inner; inner's orthant is outer's domain space."""
    assert outer.in_arity == inner.out_dim
    reps = {f"x{i}": inner.fwd[i] for i in range(inner.out_dim)}
    domain = simplify(conj(inner.domain, subst_divterms(outer.domain, reps)))
    fwd = tuple(_subst_many(dt, reps) for dt in outer.fwd)
    reps_inv = {f"x{i}": outer.inv[i] for i in range(outer.in_arity)}
    inv = tuple(_subst_many(dt, reps_inv) for dt in inner.inv)
    return Chart(inner.in_arity, outer.out_dim, domain, fwd, inv)


def _identity_chart(arity: int, domain: Formula) -> Chart:
    xs = input_names(arity)
    terms = tuple(DivTerm.of(var(v)) for v in xs)
    return Chart(arity, arity, domain, terms, terms)


def _plain(dt: DivTerm) -> DivTerm:
    dt = dt.reduced()
    if dt.den != 1:
        raise PresbError(f"expected an integer-linear term on the orthant, got {dt}")
    return dt


# ---------------------------------------------------------------------------
# Boxes {(x, u) in H^{l+1} : u <= k0 + sum k_i x_i}


def _box_charts(l: int, ks: tuple[int, ...], k0: int) -> list[Chart]:
    assert all(k >= 0 for k in ks) and k0 >= 0
    xs = input_names(l + 1)
    u = xs[-1]
    bound = const(k0)
    for v, k in zip(xs, ks):
        bound = bound + var(v).scale(k)
    dom = simplify(conj(orthant_formula(l + 1), canon_le(var(u) - bound)))

    if all(k == 0 for k in ks):
        charts = []
        for v in range(k0 + 1):
            slice_dom = simplify(conj(orthant_formula(l + 1), canon_le(var(u) - v), canon_le(const(v) - var(u))))
            fwd = tuple(DivTerm.of(var(x)) for x in xs[:-1])
            inv = tuple(DivTerm.of(var(x)) for x in input_names(l)) + (DivTerm.of(v),)
            charts.append(Chart(l + 1, l, slice_dom, fwd, inv))
        return charts

    p = next(i for i, k in enumerate(ks) if k > 0)
    xp = xs[p]
    charts = []

    # A1 = {u <= x_p - 1}: swap x_p to x_p - 1 - u, a bijection onto H^{l+1}
    a1_dom = simplify(conj(orthant_formula(l + 1), canon_le(var(u) - var(xp) + 1)))
    fwd = [DivTerm.of(var(x)) for x in xs]
    fwd[p] = DivTerm.of(var(xp) - var(u) - 1)
    ys = input_names(l + 1)
    inv = [DivTerm.of(var(y)) for y in ys]
    inv[p] = DivTerm.of(var(ys[p]) + var(ys[-1]) + 1)
    charts.append(Chart(l + 1, l + 1, a1_dom, tuple(fwd), tuple(inv)))

    # A2 = {x_p <= u <= bound}: shear u -> u - x_p and recurse with k_p - 1
    a2_dom = simplify(conj(dom, canon_le(var(xp) - var(u))))
    fwd = [DivTerm.of(var(x)) for x in xs]
    fwd[-1] = DivTerm.of(var(u) - var(xp))
    inv = [DivTerm.of(var(y)) for y in ys]
    inv[-1] = DivTerm.of(var(ys[-1]) + var(ys[p]))
    shear = Chart(l + 1, l + 1, a2_dom, tuple(fwd), tuple(inv))
    ks2 = tuple(k - 1 if i == p else k for i, k in enumerate(ks))
    for sub in _box_charts(l, ks2, k0):
        charts.append(chart_compose(sub, shear))
    return charts


# ---------------------------------------------------------------------------
# Bands over an orthant


def _band_charts(l: int, alpha: DivTerm | None, beta: DivTerm | None, c: int, n: int) -> list[Chart]:
    """Charts for {(x, t) : x in H^l, alpha(x) <= t <= beta(x), t ~ c (mod n)}
    with plain-linear bounds; fibers are assumed nonempty over all of H^l when
    both bounds are present."""
    xs = input_names(l + 1)
    t = xs[-1]
    base_names = xs[:-1]
    orth = orthant_formula(l)

    def band_formula(extra: list[Formula]) -> Formula:
        parts = [orth] + extra
        if alpha is not None:
            parts.append(canon_le(alpha.num - var(t)))
        if beta is not None:
            parts.append(canon_le(var(t) - beta.num))
        if n > 1:
            parts.append(canon_cong(var(t) - const(c), n))
        return simplify(conj(*parts))

    if alpha is None and beta is None:
        up_dom = band_formula([canon_le(const(c) - var(t))])
        up = Chart(
            l + 1, l + 1, up_dom,
            tuple(DivTerm.of(var(v)) for v in base_names) + (DivTerm.of(var(t) - c, n),),
            tuple(DivTerm.of(var(v)) for v in input_names(l)) + (DivTerm.of(var(input_names(l + 1)[-1]).scale(n) + c),),
        )
        down_dom = band_formula([canon_le(var(t) - (c - n))])
        down = Chart(
            l + 1, l + 1, down_dom,
            tuple(DivTerm.of(var(v)) for v in base_names) + (DivTerm.of(const(c - n) - var(t), n),),
            tuple(DivTerm.of(var(v)) for v in input_names(l)) + (DivTerm.of(const(c - n) - var(input_names(l + 1)[-1]).scale(n)),),
        )
        return [up, down]

    charts: list[Chart] = []
    residue_vectors = [[]]
    if n > 1:
        residue_vectors = [[]]
        for _ in range(l):
            residue_vectors = [rs + [r] for rs in residue_vectors for r in range(n)]
    for rs in residue_vectors:
        rs = tuple(rs)
        res_conds = [canon_cong(var(v) - r, n) for v, r in zip(base_names, rs)] if n > 1 else []
        assign = {v: r for v, r in zip(base_names, rs)}

        def value_at_res(dt: DivTerm) -> int:
            return dt.num.evaluate({**{v: 0 for v in base_names}, **assign}) // dt.den

        ys = input_names(l + 1)

        def straighten_fwd() -> list[DivTerm]:
            if n == 1:
                return [DivTerm.of(var(v)) for v in base_names]
            return [DivTerm.of(var(v) - r, n) for v, r in zip(base_names, rs)]

        def straighten_inv() -> list[DivTerm]:
            if n == 1:
                return [DivTerm.of(var(y)) for y in ys[:-1]]
            return [DivTerm.of(var(y).scale(n) + r) for y, r in zip(ys[:-1], rs)]

        inv_reps = {v: dt for v, dt in zip(base_names, straighten_inv())}

        if beta is None:
            rho = value_at_res(alpha) % n
            w = (c - rho) % n
            t0 = alpha + w
            fwd = straighten_fwd() + [DivTerm((var(t) - t0.num), n).reduced()]
            t_inv = _subst_many(DivTerm.of(var(ys[-1]).scale(n)) + t0, inv_reps)
            inv = straighten_inv() + [t_inv]
            charts.append(Chart(l + 1, l + 1, band_formula(res_conds), tuple(fwd), tuple(inv)))
            continue
        if alpha is None:
            rho = value_at_res(beta) % n
            w = (rho - c) % n
            t1 = beta - w
            fwd = straighten_fwd() + [DivTerm((t1.num - var(t)), n).reduced()]
            t_inv = _subst_many(t1 - DivTerm.of(var(ys[-1]).scale(n)), inv_reps)
            inv = straighten_inv() + [t_inv]
            charts.append(Chart(l + 1, l + 1, band_formula(res_conds), tuple(fwd), tuple(inv)))
            continue

        # both bounds: translate to {0 <= u <= G(x')} and recurse on the box
        rho = value_at_res(alpha) % n
        w = (c - rho) % n
        t0 = alpha + w
        rho_b = value_at_res(beta) % n
        w2 = (rho_b - c) % n
        # gap after straightening: G(x') = (beta - t0 - w2)/n at x = n x' + r
        gap = beta - t0 - w2
        gp = _plain(_subst_many(DivTerm(gap.num, n * gap.den), inv_reps))
        k0 = gp.num.constant
        kvec = tuple(gp.num.coeff(v) for v in input_names(l))
        if k0 < 0 or any(k < 0 for k in kvec):
            raise PresbError("band gap is not nonnegative over the orthant; fibers were not refined")
        translate_dom = band_formula(res_conds)
        fwd = straighten_fwd() + [DivTerm(var(t) - t0.num, n).reduced()]
        t_inv = _subst_many(DivTerm.of(var(input_names(l + 1)[-1]).scale(n)) + t0, inv_reps)
        inv = straighten_inv() + [t_inv]
        translate = Chart(l + 1, l + 1, translate_dom, tuple(fwd), tuple(inv))
        for sub in _box_charts(l, kvec, k0):
            charts.append(chart_compose(sub, translate))
    return charts


# ---------------------------------------------------------------------------
# Full cells and whole sets


def _full_cell_charts(cell: Cell) -> list[Chart]:
    """Charts for a cell all of whose coordinates are type 1."""
    k = cell.arity
    if k == 0:
        return [Chart(0, 0, TRUE, (), ())]
    assert all(isinstance(coord, BandCoord) for coord in cell.coords)
    base_charts = _full_cell_charts(Cell(cell.coords[:-1]))
    last: BandCoord = cell.coords[-1]
    xs = input_names(k)
    base_prefix = xs[:-1]
    out: list[Chart] = []
    for bc in base_charts:
        lb = bc.out_dim
        inv_reps = {f"x{i}": bc.inv[i] for i in range(bc.in_arity)}
        alpha = beta = None
        if last.lower is not None:
            alpha = _plain(_subst_many(last.lower.to_divterm(base_prefix), inv_reps))
        if last.upper is not None:
            beta = _plain(_subst_many(last.upper.to_divterm(base_prefix), inv_reps))
        band = _band_charts(lb, alpha, beta, last.residue, last.modulus)
        # lift bc to act on (base, t), leaving t in place
        lift_dom_parts = [bc.domain]
        if last.lower is not None:
            lift_dom_parts.append(last.lower.compare_var_formula(base_prefix, xs[-1], "le"))
        if last.upper is not None:
            lift_dom_parts.append(last.upper.compare_var_formula(base_prefix, xs[-1], "ge"))
        if last.modulus > 1:
            lift_dom_parts.append(canon_cong(var(xs[-1]) - const(last.residue), last.modulus))
        t_out = input_names(lb + 1)[-1]
        lifted = Chart(
            k,
            lb + 1,
            simplify(conj(*lift_dom_parts)),
            bc.fwd + (DivTerm.of(var(xs[-1])),),
            bc.inv + (DivTerm.of(var(t_out)),),
        )
        for sub in band:
            out.append(chart_compose(sub, lifted))
    return out


def _cell_charts(cell: Cell, names: Sequence[str]) -> list[Chart]:
    m = cell.arity
    formula = cell_to_formula(cell, input_names(m))
    if all(isinstance(c, EqCoord) for c in cell.coords):
        point: list[int] = []
        for coord in cell.coords:
            point.append(coord.value.apply(tuple(point)))
        return [Chart(m, 0, formula, (), tuple(DivTerm.of(v) for v in point))]
    kept = [i for i, coord in enumerate(cell.coords) if isinstance(coord, BandCoord)]
    rec = recovery_functions(cell)
    k = len(kept)
    proj_fwd = tuple(DivTerm.of(var(f"x{i}")) for i in kept)
    inv_terms: list[DivTerm] = []
    for i, coord in enumerate(cell.coords):
        if isinstance(coord, BandCoord):
            pos = kept.index(i)
            inv_terms.append(DivTerm.of(var(f"x{pos}")))
        else:
            lf = rec[i]
            inv_terms.append(lf.to_divterm(input_names(lf.arity)))
    # bounds refer only to kept coordinates, so reindexing is well defined
    reindexed = _reindex_cell(cell, kept)
    proj_chart = Chart(m, k, formula, proj_fwd, tuple(inv_terms))
    out = []
    for sub in _full_cell_charts(reindexed):
        out.append(chart_compose(sub, proj_chart))
    return out


def _reindex_cell(cell: Cell, kept: list[int]) -> Cell:
    """The cell on the kept coordinates only; attached functions must not
    mention dropped coordinates (decomposition guarantees this)."""
    pos = {i: p for p, i in enumerate(kept)}
    coords = []
    for i in kept:
        coord = cell.coords[i]
        assert isinstance(coord, BandCoord)
        lower = _reindex_lf(coord.lower, pos, i) if coord.lower is not None else None
        upper = _reindex_lf(coord.upper, pos, i) if coord.upper is not None else None
        coords.append(BandCoord(lower, upper, coord.residue, coord.modulus))
    return Cell(tuple(coords))


def _reindex_lf(lf: LinearFunction, pos: dict[int, int], upto: int) -> LinearFunction:
    new_arity = pos[upto]
    coords = [(0, 0, 1)] * new_arity
    for i, (a, c, n) in enumerate(lf.coords):
        if a == 0:
            continue
        if i not in pos or pos[i] >= new_arity:
            raise PresbError("cell bound mentions a dropped coordinate; resolve it first")
        coords[pos[i]] = (a, c, n)
    return LinearFunction(tuple(coords), lf.offset)


@dataclass(frozen=True)
class RectPiece:
    piece: Formula
    map: PiecewiseLinearMap
    inverse: PiecewiseLinearMap
    orthant_dim: int
    certificate: BijectionCertificate


def chart_to_maps(chart: Chart) -> tuple[PiecewiseLinearMap, PiecewiseLinearMap]:
    xs = input_names(chart.in_arity)
    pieces = []
    for sub, lfs in relinearize(chart.domain, xs, chart.fwd):
        if not satisfiable(sub):
            continue
        pieces.append(Piece(sub, tuple(lfs)))
    fwd = PiecewiseLinearMap(chart.in_arity, chart.out_dim, tuple(pieces))
    ys = input_names(chart.out_dim)
    inv_pieces = []
    for sub, lfs in relinearize(orthant_formula(chart.out_dim), ys, chart.inv):
        if not satisfiable(sub):
            continue
        inv_pieces.append(Piece(sub, tuple(lfs)))
    inv = PiecewiseLinearMap(chart.out_dim, chart.in_arity, tuple(inv_pieces))
    return fwd, inv


def rectilinearize(X: Formula, variables: Sequence[str], certify: bool = True) -> list[RectPiece]:
    """Partition X into pieces with explicit bijections onto orthants H^l."""
    variables = tuple(variables)
    dec = decompose(X, variables)
    out: list[RectPiece] = []
    m = len(variables)
    ren = dict(zip(input_names(m), variables))
    for cell in dec.cells:
        for chart in _cell_charts(cell, variables):
            if chart.domain == FALSE or not satisfiable(chart.domain):
                continue
            fwd, inv = chart_to_maps(chart)
            cert = None
            if certify:
                cert = is_bijection_onto(fwd, chart.domain, orthant_formula(chart.out_dim), inverse=inv)
                if cert is None:
                    raise NotABijectionError(
                        f"constructed chart failed certification on {chart.domain}"
                    )
            piece_user = rename_free(chart.domain, ren)
            out.append(RectPiece(piece_user, fwd, inv, chart.out_dim, cert))
    return out
