"""Linear functions with per-coordinate congruence domains, and divided terms.

A LinearFunction is the cell calculus' function object: on inputs satisfying
x_i ~ c_i (mod n_i) it evaluates sum a_i*(x_i - c_i)/n_i + offset, always an
integer on its domain.  A DivTerm is the looser working representation
(affine term / positive denominator, exact on the region under discussion);
decomposition tracks DivTerms and converts them to LinearFunctions once the
cell congruences that make them expressible are known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError, PresbError
from .syntax import Formula, LinearTerm, canon_cong, canon_eq, canon_le, conj, const, var


@dataclass(frozen=True)
class DivTerm:
    """num/den with den >= 1; exact (den | num) on the region it is used on."""

    num: LinearTerm
    den: int = 1

    def __post_init__(self):
        assert self.den >= 1

    @staticmethod
    def of(t: LinearTerm | int, den: int = 1) -> DivTerm:
        if isinstance(t, int):
            t = const(t)
        return DivTerm(t, den).reduced()

    def reduced(self) -> DivTerm:
        g = math.gcd(self.num.content_gcd(), math.gcd(self.num.constant, self.den))
        if g <= 1:
            return self
        num = LinearTerm(self.num.constant // g, tuple((v, c // g) for v, c in self.num.coeffs))
        return DivTerm(num, self.den // g)

    def __add__(self, other: DivTerm | int) -> DivTerm:
        if isinstance(other, int):
            other = DivTerm(const(other), 1)
        d = math.lcm(self.den, other.den)
        num = self.num.scale(d // self.den) + other.num.scale(d // other.den)
        return DivTerm(num, d).reduced()

    def __sub__(self, other: DivTerm | int) -> DivTerm:
        if isinstance(other, int):
            other = DivTerm(const(other), 1)
        return self + DivTerm(-other.num, other.den)

    def __neg__(self) -> DivTerm:
        return DivTerm(-self.num, self.den)

    def scale(self, k: int) -> DivTerm:
        return DivTerm(self.num.scale(k), self.den).reduced()

    def subst(self, name: str, replacement: DivTerm) -> DivTerm:
        b = self.num.coeff(name)
        if b == 0:
            return self
        rest = self.num.drop(name)
        num = replacement.num.scale(b) + rest.scale(replacement.den)
        return DivTerm(num, self.den * replacement.den).reduced()

    def subst_many(self, mapping: Mapping[str, DivTerm]) -> DivTerm:
        """Simultaneous substitution; replacements may reuse the same names."""
        from .syntax import const as _const

        acc = DivTerm(_const(self.num.constant), self.den)
        for v, b in self.num.coeffs:
            rep = mapping.get(v)
            if rep is None:
                acc = acc + DivTerm(var(v).scale(b), self.den)
            else:
                acc = acc + DivTerm(rep.num.scale(b), rep.den * self.den)
        return acc.reduced()

    def rename(self, mapping: dict[str, str]) -> DivTerm:
        return DivTerm(self.num.rename(mapping), self.den)

    def evaluate(self, assignment) -> int:
        v = self.num.evaluate(assignment)
        if v % self.den != 0:
            raise DomainError(f"value {v} not divisible by {self.den}")
        return v // self.den

    def is_plain(self) -> bool:
        return self.den == 1

    # comparisons as formulas (den > 0 so cross-multiplication is order-safe)

    def le_formula(self, other: DivTerm) -> Formula:
        return canon_le(self.num.scale(other.den) - other.num.scale(self.den))

    def lt_formula(self, other: DivTerm) -> Formula:
        return canon_le(self.num.scale(other.den) - other.num.scale(self.den) + 1)

    def eq_formula(self, other: DivTerm) -> Formula:
        return canon_eq(self.num.scale(other.den) - other.num.scale(self.den))

    def congruence_formula(self, residue: int, modulus: int) -> Formula:
        """self ~ residue (mod modulus), given self is exact on the region."""
        return canon_cong(self.num - const(residue * self.den), self.den * modulus)


@dataclass(frozen=True)
class LinearFunction:
    """coords[i] = (coeff, residue, modulus) for input coordinate i."""

    coords: tuple[tuple[int, int, int], ...]
    offset: int = 0

    def __post_init__(self):
        for a, c, n in self.coords:
            assert n >= 1 and 0 <= c < n

    @property
    def arity(self) -> int:
        return len(self.coords)

    @staticmethod
    def constant(value: int, arity: int = 0) -> LinearFunction:
        return LinearFunction(tuple((0, 0, 1) for _ in range(arity)), value)

    @staticmethod
    def coordinate(arity: int, index: int) -> LinearFunction:
        coords = tuple((1 if i == index else 0, 0, 1) for i in range(arity))
        return LinearFunction(coords, 0)

    def apply(self, point: Sequence[int]) -> int:
        if len(point) != self.arity:
            raise DomainError(f"expected {self.arity} coordinates, got {len(point)}")
        total = self.offset
        for (a, c, n), x in zip(self.coords, point):
            if (x - c) % n != 0:
                raise DomainError(f"coordinate {x} violates ~ {c} (mod {n})")
            total += a * (x - c) // n
        return total

    def defined_at(self, point: Sequence[int]) -> bool:
        return len(point) == self.arity and all((x - c) % n == 0 for (a, c, n), x in zip(self.coords, point))

    def to_divterm(self, names: Sequence[str]) -> DivTerm:
        assert len(names) == self.arity
        dt = DivTerm.of(self.offset)
        for (a, c, n), v in zip(self.coords, names):
            if a != 0:
                dt = dt + DivTerm(var(v).scale(a) - const(a * c), n)
        return dt

    def domain_formula(self, names: Sequence[str]) -> Formula:
        parts = []
        for (a, c, n), v in zip(self.coords, names):
            if n > 1:
                parts.append(canon_cong(var(v) - const(c), n))
        return conj(*parts)

    def value_term(self, names: Sequence[str]) -> tuple[LinearTerm, int]:
        """(numerator, N) with value = numerator/N; N = lcm of the moduli."""
        dt = self.to_divterm(names)
        return dt.num, dt.den

    def compare_var_formula(self, names: Sequence[str], out: str, relation: str) -> Formula:
        """Formula for value <relation> out, relation in {'le','ge','eq'}."""
        num, den = self.value_term(names)
        t = num - var(out).scale(den)
        if relation == "le":
            return canon_le(t)
        if relation == "ge":
            return canon_le(-t)
        return canon_eq(t)

    def graph_formula(self, names: Sequence[str], out: str) -> Formula:
        return conj(self.compare_var_formula(names, out, "eq"), self.domain_formula(names))

    def shift(self, delta: int) -> LinearFunction:
        return LinearFunction(self.coords, self.offset + delta)

    def pad_left(self, extra: int) -> LinearFunction:
        """Same function on extra ignored leading coordinates."""
        return LinearFunction(tuple((0, 0, 1) for _ in range(extra)) + self.coords, self.offset)


def divterm_to_linear(dt: DivTerm, names: Sequence[str], congruences: Sequence[tuple[int, int]]) -> LinearFunction:
    """Express a divided term as a LinearFunction on a region whose coordinate
    i satisfies x_i ~ congruences[i] = (c_i, n_i).

    Requires den | coeff_i * n_i for every coordinate and divisibility of the
    resulting offset; both hold whenever the region was produced while
    tracking dt, otherwise this raises.
    """
    dt = dt.reduced()
    coords: list[tuple[int, int, int]] = []
    offset_num = dt.num.constant
    for v, (c, n) in zip(names, congruences):
        b = dt.num.coeff(v)
        if b == 0:
            coords.append((0, 0, 1))
            continue
        if (b * n) % dt.den != 0:
            raise PresbError(f"divided term {dt} not expressible with modulus {n} on {v}")
        coords.append((b * n // dt.den, c, n))
        offset_num += b * c
    if offset_num % dt.den != 0:
        raise PresbError(f"divided term {dt} has non-integral offset on the region")
    extra = set(dt.num.variables()) - set(names)
    if extra:
        raise PresbError(f"divided term mentions unknown coordinates {sorted(extra)}")
    return LinearFunction(tuple(coords), offset_num // dt.den)


def linear_json(f: LinearFunction) -> dict:
    return {"coeffs": [[a, c, n] for a, c, n in f.coords], "gamma": f.offset}


def linear_from_json(data: dict) -> LinearFunction:
    return LinearFunction(tuple((int(a), int(c), int(n)) for a, c, n in data["coeffs"]), int(data["gamma"]))
