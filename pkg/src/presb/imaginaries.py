"""Elimination of imaginaries: canonical codes for the fibers of a definable
family X over (x, t), built from a fixed cell decomposition of X.

Fibers are one-variable definable sets.  For every subset I of the cells, the
code stores the lexicographically least (under the well-order 0, 1, -1, 2,
-2, ...) endpoint tuple whose shape instances union to the fiber, together
with a flag recording whether any such tuple exists.  Codes agree exactly
when fibers agree; the flag is what makes the backward direction sound, since
the all-zero tuple can also occur as a genuine minimizer.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

from .cells import BandCoord, Cell, EqCoord, decompose
from .errors import PieceLimitError, PresbError, UnsatisfiableError
from .parser import render
from .qe import decide_sentence, eliminate_quantifiers, equivalent, simplify
from .syntax import (
    Forall,
    Formula,
    canon_le,
    conj,
    const,
    disj,
    free_variables,
    iff,
    is_quantifier_free,
    substitute_point,
    var,
)

# ---------------------------------------------------------------------------
# The order 0, 1, -1, 2, -2, ...


def lhd_rank(a: int) -> int:
    return 2 * a - 1 if a > 0 else -2 * a


def lhd_less(a: int, b: int) -> bool:
    """Strictly earlier in the order 0, 1, -1, 2, -2, ...

    Equivalent to: 0 <= a < b, or 0 <= a <= -b with a != b, or 0 < -a < b,
    or 0 < -a < -b; zero precedes everything.
    """
    return lhd_rank(a) < lhd_rank(b)


def lhd_less_tuple(a: Sequence[int], b: Sequence[int]) -> bool:
    """Lexicographic extension of the order to equal-length tuples."""
    assert len(a) == len(b)
    for x, y in zip(a, b):
        if x != y:
            return lhd_less(x, y)
    return False


def lhd_values(bound: int) -> Iterator[int]:
    """0, 1, -1, 2, -2, ... out to the given absolute bound."""
    yield 0
    for k in range(1, bound + 1):
        yield k
        yield -k


def lhd_before_formula(name: str, value: int) -> Formula:
    """One-variable formula for {t : t strictly earlier than value}."""
    r = lhd_rank(value)
    t = var(name)
    parts = []
    if r > 0:
        parts.append(conj(canon_le(-t), canon_le(t - (r // 2))))
    neg_hi = (r - 1) // 2
    if r >= 2 and neg_hi >= 1:
        parts.append(conj(canon_le(t + 1), canon_le(-t - neg_hi)))
    return disj(*parts)


# ---------------------------------------------------------------------------
# One-variable definable sets as unions of arithmetic runs


@dataclass(frozen=True)
class Run:
    """Aligned arithmetic run: values lo, lo+step, ..., hi; None is infinite."""

    lo: int | None
    hi: int | None

    def __post_init__(self):
        if self.lo is not None and self.hi is not None:
            assert self.lo <= self.hi


@dataclass(frozen=True)
class IntSet1D:
    """Union of runs, one run list per residue class modulo `modulus`."""

    modulus: int
    classes: tuple[tuple[int, tuple[Run, ...]], ...]  # sorted by residue

    @staticmethod
    def empty(modulus: int = 1) -> IntSet1D:
        return IntSet1D(modulus, ())

    def is_empty(self) -> bool:
        return not self.classes

    def runs_of(self, residue: int) -> tuple[Run, ...]:
        for r, runs in self.classes:
            if r == residue:
                return runs
        return ()

    def rescale(self, new_modulus: int) -> IntSet1D:
        """Same set, residue classes refined to a multiple of the modulus."""
        assert new_modulus % self.modulus == 0
        k = new_modulus // self.modulus
        if k == 1:
            return self
        out: dict[int, list[Run]] = {}
        for r, runs in self.classes:
            for j in range(k):
                rr = r + j * self.modulus
                for run in runs:
                    lo = run.lo
                    hi = run.hi
                    nlo = None if lo is None else lo + ((rr - lo) % new_modulus)
                    nhi = None if hi is None else hi - ((hi - rr) % new_modulus)
                    if nlo is not None and nhi is not None and nlo > nhi:
                        continue
                    out.setdefault(rr % new_modulus, []).append(Run(nlo, nhi))
        return IntSet1D(new_modulus, _normalize_classes(out, new_modulus))

    def union(self, other: IntSet1D) -> IntSet1D:
        L = math.lcm(self.modulus, other.modulus)
        a, b = self.rescale(L), other.rescale(L)
        out: dict[int, list[Run]] = {}
        for r, runs in a.classes + b.classes:
            out.setdefault(r, []).extend(runs)
        return IntSet1D(L, _normalize_classes(out, L))

    def subset_of(self, other: IntSet1D) -> bool:
        L = math.lcm(self.modulus, other.modulus)
        a, b = self.rescale(L), other.rescale(L)
        for r, runs in a.classes:
            bruns = b.runs_of(r)
            for run in runs:
                if not _run_covered(run, bruns, L):
                    return False
        return True

    def __contains__(self, value: int) -> bool:
        runs = self.runs_of(value % self.modulus)
        for run in runs:
            if (run.lo is None or value >= run.lo) and (run.hi is None or value <= run.hi):
                return True
        return False

    def finite_endpoints(self) -> list[int]:
        out = []
        for _, runs in self.classes:
            for run in runs:
                if run.lo is not None:
                    out.append(run.lo)
                if run.hi is not None:
                    out.append(run.hi)
        return out


def _normalize_classes(raw: dict[int, list[Run]], L: int) -> tuple:
    classes = []
    for r in sorted(raw):
        runs = sorted(
            raw[r],
            key=lambda run: (0 if run.lo is None else 1, run.lo if run.lo is not None else 0),
        )
        merged: list[Run] = []
        for run in runs:
            if merged:
                prev = merged[-1]
                touches = prev.hi is None or run.lo is None or run.lo <= prev.hi + L
                if touches:
                    lo = None if (prev.lo is None or run.lo is None) else min(prev.lo, run.lo)
                    if prev.hi is None or run.hi is None:
                        hi = None
                    else:
                        hi = max(prev.hi, run.hi)
                    merged[-1] = Run(lo, hi)
                    continue
            merged.append(run)
        if merged:
            classes.append((r, tuple(merged)))
    return tuple(classes)


def _run_covered(run: Run, cover: tuple[Run, ...], L: int) -> bool:
    lo, hi = run.lo, run.hi
    if lo is None:
        best = False
        best_hi: int | None = None
        for c in cover:
            if c.lo is None:
                if c.hi is None:
                    return True
                best = True
                best_hi = c.hi if best_hi is None else max(best_hi, c.hi)
        if not best:
            return False
        if hi is not None and best_hi >= hi:
            return True
        lo = best_hi + L
    if hi is None:
        best_lo: int | None = None
        for c in cover:
            if c.hi is None:
                if c.lo is None:
                    return True
                best_lo = c.lo if best_lo is None else min(best_lo, c.lo)
        if best_lo is None:
            return False
        if best_lo <= lo:
            return True
        hi = best_lo - L
        if lo > hi:
            return True
    pos = lo
    while pos <= hi:
        reach: int | None = None
        for c in cover:
            clo_ok = c.lo is None or c.lo <= pos
            chi_ok = c.hi is None or c.hi >= pos
            if clo_ok and chi_ok:
                if c.hi is None or c.hi >= hi:
                    return True
                if reach is None or c.hi > reach:
                    reach = c.hi
        if reach is None:
            return False
        pos = reach + L
    return True


def set_from_formula(f: Formula, name: str) -> IntSet1D:
    """Exact run representation of a one-variable definable set."""
    qf = f if is_quantifier_free(f) else eliminate_quantifiers(f)
    dec = decompose(qf, [name])
    comps: list[tuple[int | None, int | None, int, int]] = []
    L = 1
    for cell in dec.cells:
        coord = cell.coords[0]
        if isinstance(coord, EqCoord):
            v = coord.value.apply(())
            comps.append((v, v, 0, 1))
        else:
            lo = coord.lower.apply(()) if coord.lower is not None else None
            hi = coord.upper.apply(()) if coord.upper is not None else None
            n = coord.modulus
            c = coord.residue
            if lo is not None:
                lo = lo + ((c - lo) % n)
            if hi is not None:
                hi = hi - ((hi - c) % n)
            if lo is not None and hi is not None and lo > hi:
                continue
            comps.append((lo, hi, c, n))
        L = math.lcm(L, comps[-1][3])
    raw: dict[int, list[Run]] = {}
    for lo, hi, c, n in comps:
        for j in range(L // n):
            # the class c + j*n modulo L; clip the run to it
            rr = (c + j * n) % L
            rlo = lo if lo is None else lo + ((rr - lo) % L)
            rhi = hi if hi is None else hi - ((hi - rr) % L)
            if rlo is not None and rhi is not None and rlo > rhi:
                continue
            raw.setdefault(rr, []).append(Run(rlo, rhi))
    return IntSet1D(L, _normalize_classes(raw, L))


def class_set(residue: int, modulus: int) -> IntSet1D:
    return IntSet1D(modulus, ((residue % modulus, (Run(None, None),)),))


def band_set(lo: int | None, hi: int | None, residue: int, modulus: int) -> IntSet1D:
    if lo is not None:
        lo = lo + ((residue - lo) % modulus)
    if hi is not None:
        hi = hi - ((hi - residue) % modulus)
    if lo is not None and hi is not None and lo > hi:
        return IntSet1D.empty(modulus)
    return IntSet1D(modulus, ((residue % modulus, (Run(lo, hi),)),))


# ---------------------------------------------------------------------------
# Symbolic least element under the order


def lhd_min(S: Formula) -> int:
    """The least satisfying integer in the order 0,1,-1,2,-2..., computed from
    the run structure (no unbounded search)."""
    fv = free_variables(S)
    if len(fv) > 1:
        raise PresbError("lhd_min needs a one-variable formula")
    name = fv[0] if fv else "_t"
    runs = set_from_formula(S, name)
    if runs.is_empty():
        raise UnsatisfiableError("the set is empty")
    L = runs.modulus
    best: int | None = None

    def consider(v: int | None):
        nonlocal best
        if v is not None and (best is None or lhd_less(v, best)):
            best = v

    for r, rs in runs.classes:
        for run in rs:
            # least nonnegative member of the run
            if run.lo is not None and run.lo >= 0:
                consider(run.lo)
            else:
                aligned = r % L
                if (run.lo is None or aligned >= run.lo) and (run.hi is None or aligned <= run.hi):
                    consider(aligned)
            # greatest negative member of the run
            end = -1 if run.hi is None else min(-1, run.hi)
            aligned = end - ((end - r) % L)
            if aligned <= -1 and (run.lo is None or aligned >= run.lo) and (run.hi is None or aligned <= run.hi):
                consider(aligned)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Fiber codes


def fibers_equal(X: Formula, variables: Sequence[str], out: str, p: Sequence[int], q: Sequence[int]) -> bool:
    """Whether the fibers of X over the two points coincide (empty included)."""
    qf = X if is_quantifier_free(X) else eliminate_quantifiers(X)
    fp = substitute_point(qf, variables, p)
    fq = substitute_point(qf, variables, q)
    return equivalent(fp, fq)


@dataclass(frozen=True)
class FiberCode:
    """Per subset of the decomposition: a validity flag and the minimal tuple."""

    entries: tuple[tuple[bool, tuple[int, ...]], ...]

    def to_dict(self) -> dict:
        return {
            "subsets": [
                {"index": i, "valid": v, "xi": list(t)} for i, (v, t) in enumerate(self.entries)
            ]
        }


@dataclass(frozen=True)
class Shape:
    has_lower: bool
    has_upper: bool
    residue: int
    modulus: int

    def instance(self, xi1: int, xi2: int) -> IntSet1D:
        lo = xi1 if self.has_lower else None
        hi = xi2 if self.has_upper else None
        return band_set(lo, hi, self.residue, self.modulus)


def _default_cap() -> int:
    return int(os.environ.get("PRESB_MAX_PIECES", "12"))


class FiberCodeFamily:
    """Fixes a cell decomposition of the family once and evaluates codes."""

    def __init__(self, X: Formula, variables: Sequence[str], out: str, max_pieces: int | None = None):
        self.variables = tuple(variables)
        self.out = out
        self.formula = X
        self.qf = X if is_quantifier_free(X) else eliminate_quantifiers(X)
        dec = decompose(self.qf, self.variables + (out,))
        cap = max_pieces if max_pieces is not None else _default_cap()
        if len(dec.cells) > cap:
            raise PieceLimitError(
                f"decomposition has {len(dec.cells)} cells; cap is {cap} (PRESB_MAX_PIECES)"
            )
        self.cells = dec.cells
        self.shapes: list[Shape] = []
        for cell in dec.cells:
            last = cell.coords[-1]
            if isinstance(last, EqCoord):
                self.shapes.append(Shape(True, True, 0, 1))
            else:
                self.shapes.append(
                    Shape(last.lower is not None, last.upper is not None, last.residue, last.modulus)
                )
        self._code_memo: dict = {}

    def fiber(self, point: Sequence[int]) -> IntSet1D:
        f = substitute_point(self.qf, self.variables, point)
        return set_from_formula(f, self.out)

    def code(self, point: Sequence[int]) -> FiberCode:
        fiber = self.fiber(point)
        key = fiber
        hit = self._code_memo.get(key)
        if hit is not None:
            return hit
        entries = []
        k = len(self.shapes)
        for mask in range(1 << k):
            subset = [self.shapes[i] for i in range(k) if mask >> i & 1]
            entries.append(_minimal_cover(subset, fiber))
        code = FiberCode(tuple(entries))
        self._code_memo[key] = code
        return code

    def reconstruct(self, code: FiberCode) -> IntSet1D:
        """Rebuild the fiber from any valid subset entry of the code."""
        k = len(self.shapes)
        for mask in range(1 << k):
            valid, xi = code.entries[mask]
            if not valid:
                continue
            subset = [self.shapes[i] for i in range(k) if mask >> i & 1]
            acc = IntSet1D.empty()
            for j, shape in enumerate(subset):
                acc = acc.union(shape.instance(xi[2 * j], xi[2 * j + 1]))
            return acc
        raise PresbError("code has no valid entry")


def _minimal_cover(shapes: list[Shape], fiber: IntSet1D) -> tuple[bool, tuple[int, ...]]:
    """Least tuple (in the 0,1,-1,2,-2 lexicographic order) whose shape
    instances union exactly to the fiber; (False, zeros) if none exists."""
    if not shapes:
        return (fiber.is_empty(), ())
    window = 2
    endpoints = fiber.finite_endpoints()
    if endpoints:
        window = max(abs(e) for e in endpoints)
    window += fiber.modulus + max(s.modulus for s in shapes) + 2

    budget = [400_000]

    def search(i: int, covered: IntSet1D, prefix: list[int]):
        budget[0] -= 1
        if budget[0] < 0:
            raise PresbError("cover search budget exceeded; family too irregular")
        if i == len(shapes):
            if fiber.subset_of(covered):
                return tuple(prefix)
            return None
        # prune: remaining shapes can only add points of the fiber inside
        # their residue classes
        potential = covered
        for s in shapes[i:]:
            potential = potential.union(_class_within(fiber, s))
        if not fiber.subset_of(potential):
            return None
        shape = shapes[i]
        for xi1, xi2, inst in _shape_options(shape, fiber, window):
            if not inst.subset_of(fiber):
                continue
            res = search(i + 1, covered.union(inst), prefix + [xi1, xi2])
            if res is not None:
                return res
        return None

    result = search(0, IntSet1D.empty(), [])
    if result is None:
        return (False, tuple(0 for _ in range(2 * len(shapes))))
    return (True, result)


def _class_within(fiber: IntSet1D, shape: Shape) -> IntSet1D:
    L = math.lcm(fiber.modulus, shape.modulus)
    scaled = fiber.rescale(L)
    keep = [(r, runs) for r, runs in scaled.classes if r % shape.modulus == shape.residue % shape.modulus]
    return IntSet1D(L, tuple(keep))


def _shape_options(shape: Shape, fiber: IntSet1D, window: int):
    """(xi1, xi2, instance) in lexicographic 0,1,-1,... order of (xi1, xi2)."""
    if not shape.has_lower and not shape.has_upper:
        yield 0, 0, shape.instance(0, 0)
        return
    if shape.has_lower and not shape.has_upper:
        for xi1 in lhd_values(window):
            inst = shape.instance(xi1, 0)
            if inst.subset_of(fiber):
                yield xi1, 0, inst
        return
    if shape.has_upper and not shape.has_lower:
        for xi2 in lhd_values(window):
            inst = shape.instance(0, xi2)
            if inst.subset_of(fiber):
                yield 0, xi2, inst
        return
    for xi1 in lhd_values(window):
        for xi2 in lhd_values(window):
            inst = shape.instance(xi1, xi2)
            if inst.is_empty() or inst.subset_of(fiber):
                yield xi1, xi2, inst


_family_memo: dict = {}


def elim_imaginaries_code(X: Formula, variables: Sequence[str], out: str, point: Sequence[int]) -> FiberCode:
    """Code of the fiber over the point, with the decomposition fixed once per
    family (memoized on the rendered formula and variable order)."""
    key = (render(X), tuple(variables), out)
    fam = _family_memo.get(key)
    if fam is None:
        fam = FiberCodeFamily(X, variables, out)
        if len(_family_memo) > 64:
            _family_memo.clear()
        _family_memo[key] = fam
    return fam.code(point)
