"""Quantifier elimination and decision procedures for integer linear arithmetic.

The eliminator is Cooper-style: coefficients of the eliminated variable are
unified by their lcm (with a divisibility side constraint), congruences ride
along, and the existential is replaced by a finite disjunction over the
minus-infinity (or plus-infinity) periodic part and boundary terms shifted by
1..delta, delta being the lcm of all moduli involved.  Everything is purely
syntactic; no search over integers happens here.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

from .errors import EvaluationError
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
    iff,
    neg,
    normalize,
)

# ---------------------------------------------------------------------------
# Simplification


def _simplify_and(args: list[Formula]) -> Formula:
    flat: list[Formula] = []
    seen: set[Formula] = set()
    for a in args:
        if isinstance(a, Boolean):
            if not a.value:
                return FALSE
            continue
        if isinstance(a, And):
            items = a.args
        else:
            items = (a,)
        for it in items:
            if it not in seen:
                seen.add(it)
                flat.append(it)
    # complementary literals
    for it in flat:
        if isinstance(it, Not) and it.body in seen:
            return FALSE
    # tightest upper bound per coefficient vector; detect empty intervals and
    # congruence clashes on the same term
    best: dict[tuple, int] = {}
    cong_res: dict[tuple, int] = {}
    for it in flat:
        if isinstance(it, Atom) and it.kind == LE:
            key = it.lhs.coeffs
            c = it.lhs.constant
            if key not in best or c > best[key]:
                best[key] = c
        elif isinstance(it, Atom) and it.kind == CONG:
            ckey = (it.lhs.coeffs, it.modulus)
            seen_c = cong_res.get(ckey)
            if seen_c is not None and seen_c != it.lhs.constant:
                return FALSE
            cong_res[ckey] = it.lhs.constant
    out: list[Formula] = []
    emitted: set[tuple] = set()
    for it in flat:
        if isinstance(it, Atom) and it.kind == LE:
            key = it.lhs.coeffs
            if it.lhs.constant != best[key]:
                continue
            if key in emitted:
                continue
            emitted.add(key)
            opp = tuple((v, -c) for v, c in key)
            if opp in best and best[opp] + best[key] > 0:
                return FALSE
        out.append(it)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def _simplify_or(args: list[Formula]) -> Formula:
    flat: list[Formula] = []
    seen: set[Formula] = set()
    for a in args:
        if isinstance(a, Boolean):
            if a.value:
                return TRUE
            continue
        if isinstance(a, Or):
            items = a.args
        else:
            items = (a,)
        for it in items:
            if it not in seen:
                seen.add(it)
                flat.append(it)
    for it in flat:
        if isinstance(it, Not) and it.body in seen:
            return TRUE
    # weakest upper bound per coefficient vector; detect covering pairs
    best: dict[tuple, int] = {}
    for it in flat:
        if isinstance(it, Atom) and it.kind == LE:
            key = it.lhs.coeffs
            c = it.lhs.constant
            if key not in best or c < best[key]:
                best[key] = c
    out: list[Formula] = []
    emitted: set[tuple] = set()
    for it in flat:
        if isinstance(it, Atom) and it.kind == LE:
            key = it.lhs.coeffs
            if it.lhs.constant != best[key]:
                continue
            if key in emitted:
                continue
            emitted.add(key)
            opp = tuple((v, -c) for v, c in key)
            if opp in best and best[opp] + best[key] <= 1:
                return TRUE
        out.append(it)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def simplify(f: Formula) -> Formula:
    """Cheap equivalence-preserving cleanup: folding, flattening, dedup."""
    if isinstance(f, (Boolean, Atom)):
        return f
    if isinstance(f, Not):
        body = simplify(f.body)
        return neg(body)
    if isinstance(f, And):
        return _simplify_and([simplify(a) for a in f.args])
    if isinstance(f, Or):
        return _simplify_or([simplify(a) for a in f.args])
    if isinstance(f, Implies):
        left = simplify(f.left)
        right = simplify(f.right)
        if isinstance(left, Boolean):
            return right if left.value else TRUE
        if isinstance(right, Boolean):
            return TRUE if right.value else neg(left)
        return Implies(left, right)
    if isinstance(f, (Exists, Forall)):
        body = simplify(f.body)
        names = tuple(n for n in f.names if n in free_variables(body))
        if not names:
            return body
        cls = Exists if isinstance(f, Exists) else Forall
        return cls(names, body)
    return f


def map_atoms(f: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, Boolean):
        return f
    if isinstance(f, Not):
        return neg(map_atoms(f.body, fn))
    if isinstance(f, And):
        return conj(*(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(map_atoms(a, fn) for a in f.args))
    raise EvaluationError("map_atoms expects a quantifier-free formula in negation normal form")


# ---------------------------------------------------------------------------
# Cooper elimination of a single existential variable


def _virtual_subst(phi: Formula, name: str, num: LinearTerm, den: int) -> Formula:
    """phi with name := num/den (den > 0), by multiplying atoms through."""

    def fn(a: Atom) -> Formula:
        t = a.lhs - a.rhs
        c = t.coeff(name)
        if c == 0:
            return a
        rest = t.drop(name)
        image = num.scale(c) + rest.scale(den)
        if a.kind == LE:
            return canon_le(image)
        if a.kind == EQ:
            return canon_eq(image)
        return canon_cong(image, a.modulus * den)

    return map_atoms(phi, fn)


def _eq_fast_path(phi: Formula, name: str) -> Formula | None:
    """If phi has a top-level conjunct a*name + s = 0, eliminate by substitution."""
    conjuncts = phi.args if isinstance(phi, And) else (phi,)
    for i, a in enumerate(conjuncts):
        if not (isinstance(a, Atom) and a.kind == EQ):
            continue
        t = a.lhs - a.rhs
        c = t.coeff(name)
        if c == 0:
            continue
        rest = t.drop(name)
        if c < 0:
            c, rest = -c, -rest
        others = conj(*(g for j, g in enumerate(conjuncts) if j != i))
        image = _virtual_subst(others, name, -rest, c)
        return simplify(conj(image, canon_cong(rest, c)))
    return None


_cooper_memo: dict[tuple[str, Formula], Formula] = {}


def cooper_exists(name: str, phi: Formula) -> Formula:
    """Quantifier-free formula equivalent to (exists name. phi), phi QF in NNF."""
    phi = simplify(phi)
    if name not in free_variables(phi):
        return phi
    key = (name, phi)
    hit = _cooper_memo.get(key)
    if hit is not None:
        return hit
    result = _cooper_exists_raw(name, phi)
    if len(_cooper_memo) > 100_000:
        _cooper_memo.clear()
    _cooper_memo[key] = result
    return result


def _cooper_exists_raw(name: str, phi: Formula) -> Formula:
    # the existential distributes over disjunctions; splitting also exposes
    # equalities on the variable, but an unbounded And-over-Or expansion can
    # explode, so fall back to the direct elimination when cases multiply
    if isinstance(phi, Or):
        return simplify(disj(*(cooper_exists(name, a) for a in phi.args)))
    fast = _eq_fast_path(phi, name)
    if fast is not None:
        return fast
    if isinstance(phi, And):
        ors = [a for a in phi.args if isinstance(a, Or) and name in free_variables(a)]
        cost = 1
        for o in ors:
            cost *= len(o.args)
        if ors and cost <= 64:
            pick = min(ors, key=lambda o: len(o.args))
            rest = conj(*(a for a in phi.args if a is not pick))
            cases = (cooper_exists(name, simplify(conj(rest, d))) for d in pick.args)
            return simplify(disj(*cases))

    relevant: list[Atom] = []
    seen: set[Atom] = set()

    def collect(g: Formula):
        if isinstance(g, Atom):
            if (g.lhs - g.rhs).coeff(name) != 0 and g not in seen:
                seen.add(g)
                relevant.append(g)
        elif isinstance(g, Not):
            collect(g.body)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                collect(a)

    collect(phi)
    lam = 1
    for a in relevant:
        lam = math.lcm(lam, abs((a.lhs - a.rhs).coeff(name)))

    # z-forms: with z = lam*name, describe each atom as a constraint on z.
    # kinds: ("upper", U) z <= U; ("lower", L) z >= L; ("eq", V) z = V;
    #        ("cong", C, n) z ~ C (mod n)
    zform: dict[Atom, tuple] = {}
    delta = lam
    uppers: list[LinearTerm] = []
    lowers: list[LinearTerm] = []
    for a in relevant:
        t = a.lhs - a.rhs
        c = t.coeff(name)
        rest = t.drop(name)
        m = lam // abs(c)
        if a.kind == LE:
            if c > 0:
                bound = -rest.scale(m)
                zform[a] = ("upper", bound)
                uppers.append(bound)
            else:
                bound = rest.scale(m)
                zform[a] = ("lower", bound)
                lowers.append(bound)
        elif a.kind == EQ:
            if c < 0:
                c, rest = -c, -rest
                m = lam // c
            value = -rest.scale(m)
            zform[a] = ("eq", value)
            uppers.append(value)
            lowers.append(value)
        else:
            n2 = a.modulus * m
            cterm = -rest.scale(m) if c > 0 else rest.scale(m)
            zform[a] = ("cong", cterm, n2)
            delta = math.lcm(delta, n2)

    def instantiate(z_value: LinearTerm) -> Formula:
        """phi with the unified variable z set to the given term."""

        def fn(a: Atom) -> Formula:
            info = zform.get(a)
            if info is None:
                return a
            kind = info[0]
            if kind == "upper":
                return canon_le(z_value - info[1])
            if kind == "lower":
                return canon_le(info[1] - z_value)
            if kind == "eq":
                return canon_eq(z_value - info[1])
            assert kind == "cong"
            return canon_cong(z_value - info[1], info[2])

        return simplify(conj(map_atoms(phi, fn), canon_cong(z_value, lam)))

    # mirror: work from whichever side has fewer boundary terms
    use_lower = len(lowers) <= len(uppers)
    terms = lowers if use_lower else uppers
    sign = 1 if use_lower else -1
    infinity = -1 if use_lower else 1

    def at_infinity(a: Atom, residue: int) -> Formula:
        info = zform.get(a)
        if info is None:
            return a
        kind = info[0]
        if kind == "upper":
            return TRUE if infinity < 0 else FALSE
        if kind == "lower":
            return TRUE if infinity > 0 else FALSE
        if kind == "eq":
            return FALSE
        return canon_cong(const(residue) - info[1], info[2])

    parts: list[Formula] = []
    for j in range(1, delta + 1):
        residue = sign * j
        periodic = simplify(
            conj(map_atoms(phi, lambda a: at_infinity(a, residue)), canon_cong(const(residue), lam))
        )
        if periodic == TRUE:
            return TRUE
        if periodic != FALSE:
            parts.append(periodic)

    seen_terms: set[LinearTerm] = set()
    for b in terms:
        if b in seen_terms:
            continue
        seen_terms.add(b)
        for j in range(1, delta + 1):
            # non-strict bound L gives strict boundary L-1; witnesses sit at
            # L-1+j (mirrored to U+1-j on the upper side), j = 1..delta.
            z_value = (b - 1 + j) if use_lower else (b + 1 - j)
            inst = instantiate(z_value)
            if inst == TRUE:
                return TRUE
            if inst != FALSE:
                parts.append(inst)

    return simplify(disj(*parts))


# ---------------------------------------------------------------------------
# Public operations


def eliminate_quantifiers(f: Formula) -> Formula:
    """Equivalent quantifier-free formula over the same free variables."""

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Boolean, Atom)):
            return g
        if isinstance(g, Not):
            return neg(walk(g.body))
        if isinstance(g, And):
            return conj(*(walk(a) for a in g.args))
        if isinstance(g, Or):
            return disj(*(walk(a) for a in g.args))
        assert isinstance(g, (Exists, Forall))
        body = walk(g.body)
        if isinstance(g, Exists):
            for name in reversed(g.names):
                body = cooper_exists(name, normalize(body))
            return body
        for name in reversed(g.names):
            body = neg(cooper_exists(name, normalize(neg(body))))
        return simplify(body)

    return simplify(walk(normalize(f)))


def decide_sentence(f: Formula) -> bool:
    """Truth value of a closed formula over the integers."""
    fv = free_variables(f)
    if fv:
        raise EvaluationError(f"free variables present: {fv}")
    qf = eliminate_quantifiers(f)
    return evaluate(qf, {})


def _rationally_infeasible(g: Formula) -> bool:
    """Whether the inequality part of a conjunction is already infeasible over
    the rationals (hence over the integers)."""
    conjuncts = g.args if isinstance(g, And) else (g,)
    names = free_variables(g)
    if not names:
        return False
    rows: list[list[float]] = []
    rhs: list[float] = []
    for a in conjuncts:
        if not isinstance(a, Atom):
            continue
        t = a.lhs - a.rhs
        if a.kind == LE:
            rows.append([float(t.coeff(v)) for v in names])
            rhs.append(float(-t.constant))
        elif a.kind == EQ:
            rows.append([float(t.coeff(v)) for v in names])
            rhs.append(float(-t.constant))
            rows.append([float(-t.coeff(v)) for v in names])
            rhs.append(float(t.constant))
    if not rows:
        return False
    from scipy.optimize import linprog

    res = linprog(
        c=[0.0] * len(names),
        A_ub=rows,
        b_ub=rhs,
        bounds=[(None, None)] * len(names),
        method="highs",
    )
    return res.status == 2


def satisfiable_fast(f: Formula) -> bool | None:
    """Cheap one-sided satisfiability: True on a found witness, False on a
    rational-relaxation contradiction, None when inconclusive."""
    from .syntax import is_quantifier_free

    g = simplify(normalize(f))
    if isinstance(g, Boolean):
        return g.value
    names = free_variables(g)
    if not is_quantifier_free(g):
        return None
    if isinstance(g, (And, Atom)) and _rationally_infeasible(g):
        return False
    if names and len(names) <= 4:
        from .oracle import OracleCapacityError, evaluate_on_box

        try:
            if evaluate_on_box(g, names, 8).any():
                return True
        except OracleCapacityError:
            return None
    return None


def satisfiable(f: Formula) -> bool:
    """Existential satisfiability: rational relaxation and a numeric witness
    probe first, then short-circuited symbolic elimination (complete)."""
    from .syntax import is_quantifier_free

    g = simplify(normalize(f))
    if isinstance(g, Boolean):
        return g.value
    names = free_variables(g)
    if names and is_quantifier_free(g):
        if isinstance(g, (And, Atom, Not)) and _rationally_infeasible(g):
            return False
        if len(names) <= 4:
            from .oracle import OracleCapacityError, evaluate_on_box

            try:
                for radius in (8, 48):
                    if evaluate_on_box(g, names, radius).any():
                        return True
            except OracleCapacityError:
                pass

    def search(h: Formula) -> bool:
        h = simplify(h)
        if isinstance(h, Boolean):
            return h.value
        if isinstance(h, (Exists, Forall)):
            return search(eliminate_quantifiers(h))
        if isinstance(h, Or):
            return any(search(a) for a in h.args)
        if isinstance(h, (And, Atom)) and _rationally_infeasible(h):
            return False
        live = free_variables(h)
        if not live:
            return evaluate(h, {})
        return search(cooper_exists(live[-1], h))

    return search(g)


def equivalent(f: Formula, g: Formula) -> bool:
    """Whether forall(f <-> g) holds over Z, on the union of free variables."""
    names = sorted(set(free_variables(f)) | set(free_variables(g)))
    body = iff(f, g)
    sentence = Forall(tuple(names), body) if names else body
    return decide_sentence(sentence)


def project(f: Formula, names: Iterable[str]) -> Formula:
    """Quantifier-free form of exists names. f."""
    names = tuple(n for n in names if n in free_variables(f))
    if not names:
        return eliminate_quantifiers(f)
    return eliminate_quantifiers(Exists(names, f))
