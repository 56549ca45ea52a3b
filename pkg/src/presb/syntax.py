"""Formula ASTs over the Presburger language and the basic syntactic calculus.

Terms are integer-affine combinations of variables.  Atoms compare two terms
with <=, = or congruence modulo a positive integer.  Formulas are built from
atoms with not/and/or/implies and exists/forall binding lists of variables.
All values are immutable and hashable; every operation here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import EvaluationError


def _cached_hash(cls):
    """Cache the dataclass-generated hash; trees are immutable and deep."""
    generated = cls.__hash__

    def __hash__(self):
        try:
            return object.__getattribute__(self, "_hash_cache")
        except AttributeError:
            h = generated(self)
            object.__setattr__(self, "_hash_cache", h)
            return h

    cls.__hash__ = __hash__
    return cls


# ---------------------------------------------------------------------------
# Terms


@_cached_hash
@dataclass(frozen=True)
class LinearTerm:
    """constant + sum(coeff * var); zero coefficients are never stored."""

    constant: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        assert all(c != 0 for _, c in self.coeffs)
        assert list(self.coeffs) == sorted(self.coeffs, key=lambda p: p[0])

    @staticmethod
    def make(constant: int = 0, coeffs: Mapping[str, int] | None = None) -> LinearTerm:
        items = tuple(sorted((v, int(c)) for v, c in (coeffs or {}).items() if c != 0))
        return LinearTerm(int(constant), items)

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: LinearTerm | int) -> LinearTerm:
        if isinstance(other, int):
            return LinearTerm(self.constant + other, self.coeffs)
        acc = {v: c for v, c in self.coeffs}
        for v, c in other.coeffs:
            acc[v] = acc.get(v, 0) + c
        return LinearTerm.make(self.constant + other.constant, acc)

    def __sub__(self, other: LinearTerm | int) -> LinearTerm:
        if isinstance(other, int):
            return LinearTerm(self.constant - other, self.coeffs)
        return self + other.scale(-1)

    def __neg__(self) -> LinearTerm:
        return self.scale(-1)

    def scale(self, k: int) -> LinearTerm:
        if k == 0:
            return LinearTerm(0, ())
        return LinearTerm(self.constant * k, tuple((v, c * k) for v, c in self.coeffs))

    def drop(self, var: str) -> LinearTerm:
        """The term with var's summand removed."""
        return LinearTerm(self.constant, tuple((v, c) for v, c in self.coeffs if v != var))

    def subst(self, var: str, replacement: LinearTerm) -> LinearTerm:
        c = self.coeff(var)
        if c == 0:
            return self
        return self.drop(var) + replacement.scale(c)

    def rename(self, mapping: Mapping[str, str]) -> LinearTerm:
        acc: dict[str, int] = {}
        for v, c in self.coeffs:
            w = mapping.get(v, v)
            acc[w] = acc.get(w, 0) + c
        return LinearTerm.make(self.constant, acc)

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        total = self.constant
        for v, c in self.coeffs:
            if v not in assignment:
                raise EvaluationError(f"unbound variable {v!r}")
            total += c * assignment[v]
        return total

    def content_gcd(self) -> int:
        """gcd of the variable coefficients (0 for a constant term)."""
        g = 0
        for _, c in self.coeffs:
            g = math.gcd(g, c)
        return g


def var(name: str) -> LinearTerm:
    return LinearTerm(0, ((name, 1),))


def const(value: int) -> LinearTerm:
    return LinearTerm(int(value), ())


# ---------------------------------------------------------------------------
# Formulas

LE = "le"
EQ = "eq"
CONG = "cong"


class Formula:
    """Base class; nodes are frozen dataclasses below."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return neg(self)


@_cached_hash
@dataclass(frozen=True)
class Boolean(Formula):
    value: bool


TRUE = Boolean(True)
FALSE = Boolean(False)


@_cached_hash
@dataclass(frozen=True)
class Atom(Formula):
    """kind in {le, eq, cong}; cong carries a positive modulus, rhs side kept."""

    kind: str
    lhs: LinearTerm
    rhs: LinearTerm
    modulus: int | None = None

    def __post_init__(self):
        if self.kind == CONG:
            assert self.modulus is not None and self.modulus >= 1
        else:
            assert self.modulus is None


@_cached_hash
@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@_cached_hash
@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@_cached_hash
@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@_cached_hash
@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@_cached_hash
@dataclass(frozen=True)
class Exists(Formula):
    names: tuple[str, ...]
    body: Formula


@_cached_hash
@dataclass(frozen=True)
class Forall(Formula):
    names: tuple[str, ...]
    body: Formula


# Convenience constructors that fold trivialities.


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if p is FALSE or p == FALSE:
            return FALSE
        if isinstance(p, And):
            flat.extend(p.args)
        elif not (p is TRUE or p == TRUE):
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if p is TRUE or p == TRUE:
            return TRUE
        if isinstance(p, Or):
            flat.extend(p.args)
        elif not (p is FALSE or p == FALSE):
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, Boolean):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.body
    return Not(f)


def le(lhs: LinearTerm, rhs: LinearTerm) -> Formula:
    return Atom(LE, lhs, rhs)


def eq(lhs: LinearTerm, rhs: LinearTerm) -> Formula:
    return Atom(EQ, lhs, rhs)


def cong(lhs: LinearTerm, rhs: LinearTerm, modulus: int) -> Formula:
    return Atom(CONG, lhs, rhs, modulus)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(Implies(a, b), Implies(b, a))


# ---------------------------------------------------------------------------
# Structural queries


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from subformulas(a)
    elif isinstance(f, Implies):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Exists, Forall)):
        yield from subformulas(f.body)


def atoms(f: Formula) -> list[Atom]:
    """Distinct atoms in first-occurrence order."""
    seen: dict[Atom, None] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            seen.setdefault(g)
    return list(seen)


@lru_cache(maxsize=1 << 16)
def _free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.lhs.variables()) | frozenset(f.rhs.variables())
    if isinstance(f, Boolean):
        return frozenset()
    if isinstance(f, Not):
        return _free_vars(f.body)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= _free_vars(a)
        return out
    if isinstance(f, Implies):
        return _free_vars(f.left) | _free_vars(f.right)
    assert isinstance(f, (Exists, Forall))
    return _free_vars(f.body) - frozenset(f.names)


def free_variables(f: Formula) -> list[str]:
    """Sorted, duplicate-free free variables of f."""
    return sorted(_free_vars(f))


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in subformulas(f))


def bound_names(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, (Exists, Forall)):
            out.update(g.names)
    return out


# ---------------------------------------------------------------------------
# Evaluation (quantifier-free only)


def evaluate(f: Formula, assignment: Mapping[str, int]) -> bool:
    """Truth of a quantifier-free formula under an integer assignment."""
    if isinstance(f, Boolean):
        return f.value
    if isinstance(f, Atom):
        l = f.lhs.evaluate(assignment)
        r = f.rhs.evaluate(assignment)
        if f.kind == LE:
            return l <= r
        if f.kind == EQ:
            return l == r
        return (l - r) % f.modulus == 0
    if isinstance(f, Not):
        return not evaluate(f.body, assignment)
    if isinstance(f, And):
        return all(evaluate(a, assignment) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, assignment) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.left, assignment)) or evaluate(f.right, assignment)
    raise EvaluationError("cannot evaluate a quantified formula; eliminate quantifiers first")


# ---------------------------------------------------------------------------
# Substitution and renaming


class _FreshNames:
    """Produces identifiers not in the avoid set, by numeric suffixing."""

    def __init__(self, avoid: Iterable[str]):
        self.used = set(avoid)

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        i = 2
        while f"{base}_{i}" in self.used:
            i += 1
        name = f"{base}_{i}"
        self.used.add(name)
        return name


def rename_bound(f: Formula, avoid: Iterable[str]) -> Formula:
    """Alpha-rename so binders are globally distinct and avoid the given names."""
    fresh = _FreshNames(set(avoid) | set(free_variables(f)))

    def walk(g: Formula, env: dict[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.kind, g.lhs.rename(env), g.rhs.rename(env), g.modulus)
        if isinstance(g, Boolean):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body, env))
        if isinstance(g, And):
            return And(tuple(walk(a, env) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a, env) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.left, env), walk(g.right, env))
        assert isinstance(g, (Exists, Forall))
        inner = dict(env)
        new_names = []
        for n in g.names:
            nn = fresh.fresh(n)
            inner[n] = nn
            new_names.append(nn)
        body = walk(g.body, inner)
        cls = Exists if isinstance(g, Exists) else Forall
        return cls(tuple(new_names), body)

    return walk(f, {})


def substitute(f: Formula, name: str, replacement: LinearTerm) -> Formula:
    """Capture-avoiding substitution of a term for a free variable."""
    clash = set(replacement.variables()) | {name}
    if bound_names(f) & clash:
        f = rename_bound(f, clash)

    def walk(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.kind, g.lhs.subst(name, replacement), g.rhs.subst(name, replacement), g.modulus)
        if isinstance(g, Boolean):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        assert isinstance(g, (Exists, Forall))
        if name in g.names:
            return g
        cls = Exists if isinstance(g, Exists) else Forall
        return cls(g.names, walk(g.body))

    return walk(f)


def substitute_point(f: Formula, names: Iterable[str], values: Iterable[int]) -> Formula:
    g = f
    for n, v in zip(names, values):
        g = substitute(g, n, const(int(v)))
    return g


def rename_free(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneous renaming of free variables; binders are kept out of the way."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return f
    if bound_names(f) & (set(mapping) | set(mapping.values())):
        f = rename_bound(f, set(mapping) | set(mapping.values()))
    bound: set[str] = set()

    def walk(g: Formula) -> Formula:
        if isinstance(g, Atom):
            live = {k: v for k, v in mapping.items() if k not in bound}
            return Atom(g.kind, g.lhs.rename(live), g.rhs.rename(live), g.modulus)
        if isinstance(g, Boolean):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        assert isinstance(g, (Exists, Forall))
        bound.update(g.names)
        body = walk(g.body)
        bound.difference_update(g.names)
        return type(g)(g.names, body)

    return walk(f)


# ---------------------------------------------------------------------------
# Canonical atoms and negation normal form


def canon_le(t: LinearTerm) -> Formula:
    """t <= 0 with gcd-reduced coefficients; constants fold to true/false."""
    if t.is_constant():
        return TRUE if t.constant <= 0 else FALSE
    g = t.content_gcd()
    if g > 1:
        # value = g*s + c <= 0  iff  s <= floor(-c/g)  iff  s - floor(-c/g) <= 0
        coeffs = tuple((v, c // g) for v, c in t.coeffs)
        t = LinearTerm(-((-t.constant) // g), coeffs)
    return Atom(LE, t, const(0))


def canon_eq(t: LinearTerm) -> Formula:
    """t = 0, gcd-reduced, leading coefficient positive."""
    if t.is_constant():
        return TRUE if t.constant == 0 else FALSE
    g = t.content_gcd()
    if t.constant % g != 0:
        return FALSE
    if g > 1:
        t = LinearTerm(t.constant // g, tuple((v, c // g) for v, c in t.coeffs))
    if t.coeffs[0][1] < 0:
        t = -t
    return Atom(EQ, t, const(0))


def canon_cong(t: LinearTerm, modulus: int) -> Formula:
    """modulus | t with coefficients and constant reduced into [0, modulus)."""
    assert modulus >= 1
    if modulus == 1:
        return TRUE
    acc = {v: c % modulus for v, c in t.coeffs}
    t = LinearTerm.make(t.constant % modulus, acc)
    if t.is_constant():
        return TRUE if t.constant % modulus == 0 else FALSE
    g = math.gcd(t.content_gcd(), modulus)
    if g > 1:
        if t.constant % g != 0:
            return FALSE
        modulus //= g
        if modulus == 1:
            return TRUE
        t = LinearTerm.make(t.constant // g % modulus, {v: c // g % modulus for v, c in t.coeffs})
        if t.is_constant():
            return TRUE if t.constant % modulus == 0 else FALSE
    return Atom(CONG, t, const(0), modulus)


def _normalize_atom(a: Atom, negated: bool) -> Formula:
    d = a.lhs - a.rhs
    if a.kind == LE:
        return canon_le(-d + 1) if negated else canon_le(d)
    if a.kind == EQ:
        if negated:
            return disj(canon_le(d + 1), canon_le(-d + 1))
        return canon_eq(d)
    body = canon_cong(d, a.modulus)
    return neg(body) if negated else body


def normalize(f: Formula) -> Formula:
    """Negation normal form with atoms in canonical shape.

    Output atoms are t <= 0, t = 0, or t ~ 0 (mod n) with negation occurring
    only on congruences; implies is rewritten away and quantifiers are kept,
    flipped under negation as usual.
    """

    def walk(g: Formula, negated: bool) -> Formula:
        if isinstance(g, Boolean):
            return FALSE if (g.value == negated) else TRUE
        if isinstance(g, Atom):
            return _normalize_atom(g, negated)
        if isinstance(g, Not):
            return walk(g.body, not negated)
        if isinstance(g, And):
            parts = [walk(a, negated) for a in g.args]
            return disj(*parts) if negated else conj(*parts)
        if isinstance(g, Or):
            parts = [walk(a, negated) for a in g.args]
            return conj(*parts) if negated else disj(*parts)
        if isinstance(g, Implies):
            if negated:
                return conj(walk(g.left, False), walk(g.right, True))
            return disj(walk(g.left, True), walk(g.right, False))
        assert isinstance(g, (Exists, Forall))
        body = walk(g.body, negated)
        flip = negated
        want_exists = isinstance(g, Exists) != flip
        names = tuple(n for n in g.names if n in set(free_variables_of_body(body)))
        if not names:
            return body
        return Exists(names, body) if want_exists else Forall(names, body)

    return walk(f, False)


def free_variables_of_body(f: Formula) -> list[str]:
    return free_variables(f)
