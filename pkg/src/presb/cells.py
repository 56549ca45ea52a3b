"""Cells and the effective cell decomposition.

A cell over an ordered variable list is built coordinate by coordinate: each
coordinate is either the graph of a LinearFunction of the earlier coordinates
(type 0) or a congruence-constrained band between optional LinearFunction
bounds whose fibers are not uniformly bounded (type 1).  `decompose` splits
any definable set into finitely many disjoint cells; `decompose_function`
additionally attaches, per cell, the LinearFunction a definable function
restricts to.

The construction is a direct recursion on the last variable: eliminate
quantifiers, case-split the atoms containing it, split its residue by the lcm
of the relevant moduli (so congruence literals become conditions on the base
and bounds become exactly divided terms), case-split which lower/upper bound
is active, and recurse on the refined base while tracking every divided term
that must come out linear on the final cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, PresbError, UnsatisfiableError
from .linear import DivTerm, LinearFunction, divterm_to_linear, linear_from_json, linear_json
from .qe import (
    _rationally_infeasible,
    cooper_exists,
    decide_sentence,
    eliminate_quantifiers,
    equivalent,
    map_atoms,
    satisfiable,
    satisfiable_fast,
    simplify,
)
from .syntax import (
    CONG,
    EQ,
    FALSE,
    LE,
    TRUE,
    And,
    Atom,
    Boolean,
    Exists,
    Forall,
    Formula,
    Implies,
    LinearTerm,
    Not,
    Or,
    canon_cong,
    canon_eq,
    canon_le,
    conj,
    const,
    disj,
    evaluate,
    free_variables,
    neg,
    normalize,
    subformulas,
    var,
)

# ---------------------------------------------------------------------------
# Cell data


@dataclass(frozen=True)
class EqCoord:
    """Coordinate pinned to a LinearFunction of the earlier coordinates."""

    value: LinearFunction


@dataclass(frozen=True)
class BandCoord:
    """lower <= x <= upper (either side optional) with x ~ residue (mod modulus)."""

    lower: LinearFunction | None
    upper: LinearFunction | None
    residue: int
    modulus: int

    def __post_init__(self):
        assert self.modulus >= 1 and 0 <= self.residue < self.modulus


Coord = EqCoord | BandCoord


@dataclass(frozen=True)
class Cell:
    coords: tuple[Coord, ...]

    @property
    def arity(self) -> int:
        return len(self.coords)

    @property
    def type_vector(self) -> tuple[int, ...]:
        return tuple(0 if isinstance(c, EqCoord) else 1 for c in self.coords)

    @property
    def type_sum(self) -> int:
        return sum(self.type_vector)

    @property
    def base(self) -> Cell | None:
        if not self.coords:
            return None
        return Cell(self.coords[:-1])

    def is_finite(self) -> bool:
        return all(isinstance(c, EqCoord) for c in self.coords)

    def coordinate_congruences(self) -> list[tuple[int, int]]:
        """(residue, modulus) per coordinate; (0, 1) for type-0 coordinates."""
        out = []
        for c in self.coords:
            if isinstance(c, BandCoord):
                out.append((c.residue, c.modulus))
            else:
                out.append((0, 1))
        return out


@dataclass(frozen=True)
class CellDecomposition:
    variables: tuple[str, ...]
    cells: tuple[Cell, ...]
    functions: tuple[LinearFunction, ...] | None = None

    @property
    def arity(self) -> int:
        return len(self.variables)


# ---------------------------------------------------------------------------
# Cell -> formula


def cell_to_formula(cell: Cell, names: Sequence[str]) -> Formula:
    """Quantifier-free formula whose solution set is exactly the cell."""
    if cell.arity > len(names):
        raise DomainError("not enough variable names for the cell")
    parts: list[Formula] = []
    for j, coord in enumerate(cell.coords):
        prefix = names[:j]
        v = names[j]
        if isinstance(coord, EqCoord):
            parts.append(coord.value.compare_var_formula(prefix, v, "eq"))
            parts.append(coord.value.domain_formula(prefix))
        else:
            if coord.lower is not None:
                parts.append(coord.lower.compare_var_formula(prefix, v, "le"))
                parts.append(coord.lower.domain_formula(prefix))
            if coord.upper is not None:
                parts.append(coord.upper.compare_var_formula(prefix, v, "ge"))
                parts.append(coord.upper.domain_formula(prefix))
            if coord.modulus > 1:
                parts.append(canon_cong(var(v) - const(coord.residue), coord.modulus))
    return simplify(conj(*parts))


def cell_contains(cell: Cell, point: Sequence[int]) -> bool:
    if len(point) != cell.arity:
        return False
    for j, coord in enumerate(cell.coords):
        prefix = point[:j]
        x = point[j]
        if isinstance(coord, EqCoord):
            if not coord.value.defined_at(prefix) or coord.value.apply(prefix) != x:
                return False
        else:
            if (x - coord.residue) % coord.modulus != 0:
                return False
            if coord.lower is not None and (not coord.lower.defined_at(prefix) or coord.lower.apply(prefix) > x):
                return False
            if coord.upper is not None and (not coord.upper.defined_at(prefix) or coord.upper.apply(prefix) < x):
                return False
    return True


def apply_linear(f: LinearFunction, point: Sequence[int]) -> int:
    """Exact value of a LinearFunction at a point of its domain."""
    return f.apply(point)


# ---------------------------------------------------------------------------
# Decomposition worker


def _split_eq_on(a: Atom, name: str) -> Formula:
    if a.kind != EQ:
        return a
    d = a.lhs - a.rhs
    if d.coeff(name) == 0:
        return a
    return conj(canon_le(d), canon_le(-d))


def _first_atom_on(f: Formula, name: str) -> Atom | None:
    for g in subformulas(f):
        if isinstance(g, Atom) and (g.lhs - g.rhs).coeff(name) != 0:
            return g
    return None


def _assign_atom(f: Formula, a: Atom, value: Formula) -> Formula:
    return map_atoms(f, lambda b: value if b == a else b)


class _BoxProber:
    """Shared numpy truth grids over a small box, cached per atom.

    A nonempty grid intersection witnesses satisfiability; an empty one means
    nothing by itself and callers must fall back to a complete check.
    """

    def __init__(self, names: Sequence[str], radius: int = 8):
        self.names = tuple(names)
        self.radius = radius
        self.cache: dict[Formula, object] = {}

    def grid(self, f: Formula):
        import numpy as np

        if not self.names:
            return None
        hit = self.cache.get(f)
        if hit is None:
            from .oracle import OracleCapacityError, evaluate_on_box

            try:
                hit = evaluate_on_box(f, self.names, self.radius)
            except (OracleCapacityError, OverflowError):
                hit = np.ones((2 * self.radius + 1,) * len(self.names), dtype=bool)
            self.cache[f] = hit
        return hit


def _shannon_on(phi: Formula, name: str, prober: _BoxProber | None = None):
    """Disjoint sign-assignments of the atoms mentioning name.

    Yields (literals, residual) with literals a list of (atom, polarity) and
    residual a formula not mentioning name; the conjunction of each literal
    pattern with its residual partitions the solution set of phi.  Branches
    with provably unsatisfiable literal sets are pruned: a shared box grid
    keeps witnesses cheap, a rational relaxation disproves the rest.
    """
    out = []
    stack = [(simplify(phi), [], TRUE, None)]
    while stack:
        f, lits, lits_conj, grid = stack.pop()
        if f == FALSE:
            continue
        a = _first_atom_on(f, name)
        if a is None:
            out.append((lits, f))
            continue
        for value, pol in ((TRUE, True), (FALSE, False)):
            lit = a if pol else _negated_literal(a)
            extended = simplify(conj(lits_conj, lit))
            if extended == FALSE:
                continue
            sub_grid = grid
            if prober is not None:
                lit_grid = prober.grid(lit)
                if lit_grid is not None:
                    sub_grid = lit_grid if grid is None else (grid & lit_grid)
                    if not sub_grid.any() and _rationally_infeasible(extended):
                        continue
            stack.append((simplify(_assign_atom(f, a, value)), lits + [(a, pol)], extended, sub_grid))
    return out


def _negated_literal(a: Atom) -> Formula:
    if a.kind == LE:
        return canon_le(-(a.lhs - a.rhs) + 1)
    if a.kind == CONG:
        return neg(a)
    d = a.lhs - a.rhs
    return disj(canon_le(d + 1), canon_le(-d + 1))


def _gap_bounded(region: Formula, base_names: Sequence[str], alpha: DivTerm, beta: DivTerm) -> bool:
    """Whether beta - alpha is bounded above over the region."""
    kname = "_gapbound"
    while kname in base_names:
        kname += "_"
    gap_num = beta.num.scale(alpha.den) - alpha.num.scale(beta.den)
    gap_den = alpha.den * beta.den
    body = Implies(region, canon_le(gap_num - var(kname).scale(gap_den)))
    sentence: Formula = Forall(tuple(base_names), body) if base_names else body
    return decide_sentence(Exists((kname,), sentence))


_decompose_memo: dict = {}


def _decompose_qf(phi: Formula, names: tuple[str, ...], fns: tuple[DivTerm, ...]):
    phi = simplify(phi)
    if phi == FALSE:
        return []
    if not names:
        if not evaluate(phi, {}):
            return []
        return [(Cell(()), [LinearFunction.constant(dt.evaluate({})) for dt in fns])]

    phi = _prune_implied(phi)
    key = (phi, names, fns)
    hit = _decompose_memo.get(key)
    if hit is not None:
        return hit
    t = names[-1]
    base_names = names[:-1]
    if not base_names:
        results = _decompose_1var(phi, t, fns)
    else:
        phi = simplify(map_atoms(phi, lambda a: _split_eq_on(a, t)))
        results = []
        prober = _BoxProber(names)
        for lits, rho in _shannon_on(phi, t, prober):
            results.extend(_leaf(lits, rho, base_names, t, fns))
    if len(_decompose_memo) > 4096:
        _decompose_memo.clear()
    _decompose_memo[key] = results
    return results


def _prune_implied(f: Formula) -> Formula:
    """Drop inequality conjuncts already implied over the rationals by the
    remaining ones; keeps the solution set and shrinks case cascades."""
    if not isinstance(f, And) or len(f.args) <= 8:
        return f
    keep = list(f.args)
    for a in list(keep):
        if not (isinstance(a, Atom) and a.kind == LE):
            continue
        rest = [g for g in keep if g is not a]
        negated = canon_le(-(a.lhs - a.rhs) + 1)
        if isinstance(negated, Boolean):
            continue
        if _rationally_infeasible(conj(*[g for g in rest if isinstance(g, Atom)], negated)):
            keep = rest
    if len(keep) == len(f.args):
        return f
    return simplify(conj(*keep))


def _decompose_1var(phi: Formula, name: str, fns: tuple[DivTerm, ...]):
    """One-variable case, done directly: the line splits at the integer
    roots of the atoms, truth is constant on each (interval x residue class),
    and one sample point decides it."""
    import math as _math

    from .syntax import atoms as _atoms

    M = 1
    breaks: set[int] = set()
    for a in _atoms(phi):
        d = a.lhs - a.rhs
        c0 = d.coeff(name)
        if c0 == 0:
            continue
        if a.kind == CONG:
            M = _math.lcm(M, a.modulus)
            continue
        b = (-d.constant) // c0
        breaks.add(b)
        breaks.add(b + 1)
    for dt in fns:
        if dt.num.coeff(name) != 0:
            M = _math.lcm(M, dt.den)
    cuts = sorted(breaks)
    intervals: list[tuple[int | None, int | None]] = []
    if not cuts:
        intervals.append((None, None))
    else:
        intervals.append((None, cuts[0] - 1))
        for i in range(len(cuts) - 1):
            intervals.append((cuts[i], cuts[i + 1] - 1))
        intervals.append((cuts[-1], None))

    def aligned_up(v: int, rho: int) -> int:
        return v + ((rho - v) % M)

    def aligned_down(v: int, rho: int) -> int:
        return v - ((v - rho) % M)

    def fn_values_at(v: int) -> list[LinearFunction]:
        return [LinearFunction.constant(dt.evaluate({name: v}), 1) for dt in fns]

    results = []
    for lo, hi in intervals:
        for rho in range(M):
            if lo is not None:
                x0 = aligned_up(lo, rho)
            elif hi is not None:
                x0 = aligned_down(hi, rho)
            else:
                x0 = rho
            if (lo is not None and hi is not None and x0 > hi):
                continue
            if not evaluate(phi, {name: x0}):
                continue
            if lo is None or hi is None:
                band = BandCoord(
                    None if lo is None else LinearFunction.constant(lo, 0),
                    None if hi is None else LinearFunction.constant(hi, 0),
                    rho,
                    M,
                )
                lfs = []
                for dt in fns:
                    b = dt.num.coeff(name)
                    if b == 0:
                        lfs.append(LinearFunction.constant(dt.evaluate({}), 1))
                    else:
                        offset_num = dt.num.constant + b * rho
                        assert offset_num % dt.den == 0, "function not integral on the cell"
                        lfs.append(LinearFunction(((b * M // dt.den, rho, M),), offset_num // dt.den))
                results.append((Cell((band,)), lfs))
            else:
                v = x0
                while v <= hi:
                    results.append((Cell((EqCoord(LinearFunction.constant(v, 0)),)), fn_values_at(v)))
                    v += M
    return results


def _leaf(lits, rho: Formula, base_names: tuple[str, ...], t: str, fns: tuple[DivTerm, ...]):
    uppers: list[tuple[int, LinearTerm]] = []
    lowers: list[tuple[int, LinearTerm]] = []
    congs: list[tuple[int, LinearTerm, int, bool]] = []
    for atom, pol in lits:
        term = atom.lhs - atom.rhs
        c = term.coeff(t)
        rest = term.drop(t)
        if atom.kind == LE:
            if pol:
                if c > 0:
                    uppers.append((c, -rest))
                else:
                    lowers.append((-c, rest))
            else:
                # not(c*t + rest <= 0)  <=>  c*t + rest >= 1
                if c > 0:
                    lowers.append((c, -rest + 1))
                else:
                    uppers.append((-c, rest - 1))
        elif atom.kind == CONG:
            congs.append((c, rest, atom.modulus, pol))
        else:
            raise AssertionError("equality atoms on the split variable are pre-split")

    uppers = list(dict.fromkeys(uppers))
    lowers = list(dict.fromkeys(lowers))

    M = 1
    for _, _, n, _ in congs:
        M = math.lcm(M, n)
    M_star = M
    for dt in fns:
        if dt.num.coeff(t) != 0:
            M_star = math.lcm(M_star, dt.den)

    tvar = var(t)
    results = []
    base_prober = _BoxProber(base_names)
    for r in range(M_star):
        base_parts: list[Formula] = [rho]
        for c, s, n, pol in congs:
            cond = canon_cong(s + const(c * r), n)
            base_parts.append(cond if pol else neg(cond))
        base1 = simplify(conj(*base_parts))
        if base1 == FALSE:
            continue

        fn_coeffs: list[int] = []
        fn_resids: list[DivTerm] = []
        for dt in fns:
            b = dt.num.coeff(t)
            if b == 0:
                fn_coeffs.append(0)
                fn_resids.append(dt)
            else:
                fn_coeffs.append(b * M_star // dt.den)
                fn_resids.append(DivTerm(dt.num.drop(t) + const(b * r), dt.den))

        for upper_sel in _bound_cases(uppers, upper=True, t=t):
            for lower_sel in _bound_cases(lowers, upper=False, t=t):
                conds = []
                beta = alpha = None
                sel_atoms = []
                if upper_sel is not None:
                    beta, sel_conds, sel_atom = upper_sel
                    conds.extend(sel_conds)
                    sel_atoms.append(sel_atom)
                if lower_sel is not None:
                    alpha, sel_conds, sel_atom = lower_sel
                    conds.extend(sel_conds)
                    sel_atoms.append(sel_atom)
                if alpha is not None and beta is not None:
                    # the fiber on this case is exactly the band between the
                    # selected bounds; refine the base so it is nonempty
                    fiber = conj(*sel_atoms, canon_cong(tvar - const(r), M_star))
                    conds.append(cooper_exists(t, normalize(fiber)))
                region = simplify(conj(base1, *conds))
                if region == FALSE:
                    continue
                g = base_prober.grid(region)
                if g is not None and g.any():
                    pass  # witnessed on the box
                elif _rationally_infeasible(region) or not satisfiable(region):
                    continue
                results.extend(
                    _emit_cases(region, base_names, t, r, M_star, alpha, beta, fn_coeffs, fn_resids, fns)
                )
    return results


def _bound_cases(bounds: list[tuple[int, LinearTerm]], upper: bool, t: str = "_t"):
    """Activity cases: which bound is tightest, with residue of its term fixed.

    Yields None when there are no bounds, else (DivTerm bound, conditions,
    selected atom on t).  Tightest-with-smallest-index wins ties, making the
    cases disjoint.
    """
    if not bounds:
        yield None
        return
    tv = var(t)
    for i, (a, s) in enumerate(bounds):
        sel_atom = canon_le(tv.scale(a) - s) if upper else canon_le(s - tv.scale(a))
        for sigma in range(a):
            conds = [canon_cong(s - const(sigma), a)]
            if upper:
                bound = DivTerm(s - const(sigma), a)  # floor(s/a)
            else:
                pad = a if sigma != 0 else 0
                bound = DivTerm(s - const(sigma) + const(pad), a)  # ceil(s/a)
            for j, (aj, sj) in enumerate(bounds):
                if j == i:
                    continue
                if upper:
                    # beta_j > beta_i (j earlier) or beta_j >= beta_i (j later)
                    k = bound + 1 if j < i else bound
                    conds.append(canon_le(k.num.scale(aj) - sj.scale(k.den)))
                else:
                    # alpha_j < alpha_i (j earlier) or alpha_j <= alpha_i (j later)
                    k = bound - 1 if j < i else bound
                    conds.append(canon_le(sj.scale(k.den) - k.num.scale(aj)))
            yield bound, conds, sel_atom


def _emit_cases(region, base_names, t, r, M_star, alpha, beta, fn_coeffs, fn_resids, fns):
    """Emit cells for one (residue, active bounds) case over its region."""
    results = []
    if alpha is not None and beta is not None and _gap_bounded(region, base_names, alpha, beta):
        return _emit_offsets(region, base_names, t, r, M_star, alpha, beta, fns)

    passed = list(fn_resids)
    ia = ib = None
    if alpha is not None:
        ia = len(passed)
        passed.append(alpha)
    if beta is not None:
        ib = len(passed)
        passed.append(beta)
    for bcell, lfs in _decompose_qf(region, base_names, tuple(passed)):
        alpha_lf = lfs[ia] if ia is not None else None
        beta_lf = lfs[ib] if ib is not None else None
        if alpha is not None and beta is not None:
            cellf = cell_to_formula(bcell, base_names)
            if _gap_bounded(cellf, base_names, alpha, beta):
                results.extend(_emit_offsets(cellf, base_names, t, r, M_star, alpha, beta, fns))
                continue
        band = BandCoord(alpha_lf, beta_lf, r, M_star)
        cell = Cell(bcell.coords + (band,))
        out_lfs = []
        for i in range(len(fns)):
            e = fn_coeffs[i]
            coord = (e, r, M_star) if e != 0 else (0, 0, 1)
            out_lfs.append(LinearFunction(lfs[i].coords + (coord,), lfs[i].offset))
        results.append((cell, out_lfs))
    return results


def _emit_offsets(region, base_names, t, r, M_star, alpha: DivTerm, beta: DivTerm, fns):
    """Bounded fibers: enumerate the band as type-0 cells t = aligned + j*M."""
    results = []
    for rho in range(M_star):
        cond_rho = alpha.congruence_formula(rho, M_star) if M_star > 1 else TRUE
        sub_region = simplify(conj(region, cond_rho))
        if sub_region == FALSE:
            continue
        start = alpha + ((r - rho) % M_star)
        j = 0
        while True:
            value = start + j * M_star
            piece = simplify(conj(sub_region, value.le_formula(beta)))
            if piece == FALSE or not satisfiable(piece):
                break
            passed = tuple(dt.subst(t, value) for dt in fns) + (value,)
            for bcell, lfs in _decompose_qf(piece, base_names, passed):
                cell = Cell(bcell.coords + (EqCoord(lfs[-1]),))
                out_lfs = [LinearFunction(lf.coords + ((0, 0, 1),), lf.offset) for lf in lfs[:-1]]
                results.append((cell, out_lfs))
            j += 1
            if j > 100_000:
                raise PresbError("offset enumeration did not terminate; gap bound was wrong")
    return results


# ---------------------------------------------------------------------------
# Public operations


def decompose(X: Formula, variables: Sequence[str], verify: bool = False) -> CellDecomposition:
    """Partition the solution set of X into disjoint cells."""
    missing = set(free_variables(X)) - set(variables)
    if missing:
        raise DomainError(f"free variables not among the given ones: {sorted(missing)}")
    qf = simplify(normalize(eliminate_quantifiers(X)))
    pairs = _decompose_qf(qf, tuple(variables), ())
    dec = CellDecomposition(tuple(variables), tuple(c for c, _ in pairs), None)
    if verify:
        verify_partition(dec, X)
    return dec


def decompose_function(graph: Formula, variables: Sequence[str], out: str, verify: bool = False) -> CellDecomposition:
    """Cells partitioning the domain of a function given by its graph, with
    the LinearFunction the function restricts to on each cell."""
    if out in variables:
        raise DomainError("output variable must not be an input variable")
    allowed = set(variables) | {out}
    missing = set(free_variables(graph)) - allowed
    if missing:
        raise DomainError(f"free variables not among the given ones: {sorted(missing)}")
    t2 = out + "_other"
    while t2 in allowed:
        t2 += "_"
    from .syntax import substitute

    single = Forall(
        tuple(variables) + (out, t2),
        Implies(conj(graph, substitute(graph, out, var(t2))), canon_eq(var(out) - var(t2))),
    )
    if not decide_sentence(single):
        raise DomainError("graph is not single-valued in the output variable")
    qf = simplify(normalize(eliminate_quantifiers(graph)))
    pairs = _decompose_qf(qf, tuple(variables) + (out,), ())
    cells = []
    functions = []
    for cell, _ in pairs:
        last = cell.coords[-1]
        assert isinstance(last, EqCoord), "single-valued graph must yield type-0 last coordinates"
        cells.append(Cell(cell.coords[:-1]))
        functions.append(last.value)
    return CellDecomposition(tuple(variables), tuple(cells), tuple(functions))


@dataclass(frozen=True)
class FiberClass:
    """Result of classify_fiber: bounded with least bound, or unbounded."""

    bounded: bool
    bound: int | None = None


def classify_fiber(
    D: Formula,
    alpha: LinearFunction | None,
    beta: LinearFunction | None,
    modulus: int,
    residue: int = 0,
    variables: Sequence[str] | None = None,
) -> FiberClass:
    """Decide whether the fiber sizes |{t : alpha(x) <= t <= beta(x), t ~ residue (mod modulus)}|
    admit a uniform bound over D, and return the least bound if so."""
    if variables is None:
        variables = free_variables(D)
    variables = tuple(variables)
    if not satisfiable(D):
        raise UnsatisfiableError("the base region is empty")
    if alpha is None or beta is None:
        return FiberClass(False)
    a_dt = alpha.to_divterm(variables)
    b_dt = beta.to_divterm(variables)
    if not _gap_bounded(D, variables, a_dt, b_dt):
        return FiberClass(False)

    tname = "_t"
    names = []
    gap_num = b_dt.num.scale(a_dt.den) - a_dt.num.scale(b_dt.den)

    def card_gt(k: int) -> bool:
        # exists x in D with k+1 distinct fiber members
        ts = [f"{tname}{i}" for i in range(k + 1)]
        parts = []
        for i, tv in enumerate(ts):
            tvv = var(tv)
            parts.append(canon_le(a_dt.num - tvv.scale(a_dt.den)))
            parts.append(canon_le(tvv.scale(b_dt.den) - b_dt.num))
            parts.append(canon_cong(tvv - const(residue), modulus))
            if i > 0:
                parts.append(canon_le(var(ts[i - 1]) - tvv + 1))
        body = conj(D, *parts)
        return decide_sentence(Exists(tuple(variables) + tuple(ts), body))

    lo, hi = 0, 1
    while card_gt(hi):
        hi *= 2
        if hi > 10**6:
            raise PresbError("fiber bound search exceeded its cap")
    lo = hi // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if card_gt(mid):
            lo = mid + 1
        else:
            hi = mid
    return FiberClass(True, lo)


def project_to_full_cell(cell: Cell) -> tuple[list[int], Cell]:
    """Indices (1-based) of the type-1 coordinates and the image cell of the
    projection onto them; dropping type-0 coordinates is a bijection since
    they are recovered by their defining LinearFunctions."""
    if all(isinstance(c, EqCoord) for c in cell.coords):
        raise DomainError("cell has no type-1 coordinates to project onto")
    names = [f"v{i}" for i in range(cell.arity)]
    kept: list[int] = []
    reps: dict[str, DivTerm] = {}
    new_coords: list[Coord] = []
    kept_congs: list[tuple[int, int]] = []
    kept_names: list[str] = []

    def resolve(dt: DivTerm) -> DivTerm:
        for v in list(dt.num.variables()):
            if v in reps:
                dt = dt.subst(v, reps[v])
        return dt

    for i, coord in enumerate(cell.coords):
        prefix = names[:i]
        if isinstance(coord, EqCoord):
            reps[names[i]] = resolve(coord.value.to_divterm(prefix))
        else:
            lower = upper = None
            if coord.lower is not None:
                dt = resolve(coord.lower.to_divterm(prefix))
                lower = divterm_to_linear(dt, kept_names, kept_congs)
            if coord.upper is not None:
                dt = resolve(coord.upper.to_divterm(prefix))
                upper = divterm_to_linear(dt, kept_names, kept_congs)
            new_coords.append(BandCoord(lower, upper, coord.residue, coord.modulus))
            kept.append(i + 1)
            kept_congs.append((coord.residue, coord.modulus))
            kept_names.append(names[i])
    return kept, Cell(tuple(new_coords))


def recovery_functions(cell: Cell) -> dict[int, LinearFunction]:
    """For each type-0 coordinate (0-based), its value as a LinearFunction of
    the kept (type-1) coordinates that precede it."""
    names = [f"v{i}" for i in range(cell.arity)]
    reps: dict[str, DivTerm] = {}
    kept_congs: list[tuple[int, int]] = []
    kept_names: list[str] = []
    out: dict[int, LinearFunction] = {}

    def resolve(dt: DivTerm) -> DivTerm:
        for v in list(dt.num.variables()):
            if v in reps:
                dt = dt.subst(v, reps[v])
        return dt

    for i, coord in enumerate(cell.coords):
        prefix = names[:i]
        if isinstance(coord, EqCoord):
            dt = resolve(coord.value.to_divterm(prefix))
            reps[names[i]] = dt
            out[i] = divterm_to_linear(dt, kept_names, kept_congs)
        else:
            kept_congs.append((coord.residue, coord.modulus))
            kept_names.append(names[i])
    return out


# ---------------------------------------------------------------------------
# Verification and serialization


def verify_partition(dec: CellDecomposition, X: Formula) -> None:
    """Raise unless the cells are pairwise disjoint and cover exactly X."""
    names = dec.variables
    formulas = [cell_to_formula(c, names) for c in dec.cells]
    union = disj(*formulas) if formulas else FALSE
    if not equivalent(union, X):
        raise PresbError("decomposition does not cover the set")
    for i in range(len(formulas)):
        for j in range(i + 1, len(formulas)):
            if satisfiable(conj(formulas[i], formulas[j])):
                raise PresbError(f"cells {i} and {j} overlap")


def _linear_or_none_json(f: LinearFunction | None):
    return None if f is None else linear_json(f)


def cell_json(cell: Cell) -> dict:
    if cell.arity == 0:
        return {"type": [], "base": None, "last": None}
    base = cell.base
    last = cell.coords[-1]
    if isinstance(last, EqCoord):
        last_json = {"kind": "eq", "alpha": linear_json(last.value), "beta": None, "c": 0, "n": 1}
    else:
        last_json = {
            "kind": "band",
            "alpha": _linear_or_none_json(last.lower),
            "beta": _linear_or_none_json(last.upper),
            "c": last.residue,
            "n": last.modulus,
        }
    return {
        "type": list(cell.type_vector),
        "base": cell_json(base) if base.arity > 0 else None,
        "last": last_json,
    }


def cell_from_json(data: dict) -> Cell:
    if not data["type"]:
        return Cell(())
    base = cell_from_json(data["base"]) if data["base"] is not None else Cell(())
    last = data["last"]
    if last["kind"] == "eq":
        coord: Coord = EqCoord(linear_from_json(last["alpha"]))
    else:
        lower = linear_from_json(last["alpha"]) if last["alpha"] is not None else None
        upper = linear_from_json(last["beta"]) if last["beta"] is not None else None
        coord = BandCoord(lower, upper, int(last["c"]), int(last["n"]))
    return Cell(base.coords + (coord,))


def decomposition_json(dec: CellDecomposition) -> dict:
    return {
        "variables": list(dec.variables),
        "arity": dec.arity,
        "cells": [cell_json(c) for c in dec.cells],
        "functions": None if dec.functions is None else [linear_json(f) for f in dec.functions],
    }
