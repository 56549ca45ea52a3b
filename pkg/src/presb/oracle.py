"""Brute-force ground truth on finite boxes.

Formulas are evaluated on integer grids with numpy; quantifiers are expanded
over windows wide enough to contain a witness whenever one exists at all
(boundary-term root zones widened by the lcm of the relevant moduli, which is
where witnesses must sit for linear integer constraints).  These routines are
the independent oracle that the symbolic layers are tested against.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EvaluationError, PresbError
from .syntax import (
    CONG,
    EQ,
    LE,
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
    free_variables,
    is_quantifier_free,
    subformulas,
)

_MAX_ELEMENTS = 16_000_000


class OracleCapacityError(PresbError):
    pass


Axes = list[tuple[str, np.ndarray]]


def _term_bound(t: LinearTerm, ranges: dict[str, tuple[int, int]]) -> int:
    total = abs(t.constant)
    for v, c in t.coeffs:
        lo, hi = ranges[v]
        total += abs(c) * max(abs(lo), abs(hi))
    return total


def _term_array(t: LinearTerm, env: dict[str, np.ndarray]):
    acc = np.int64(t.constant)
    for v, c in t.coeffs:
        acc = acc + np.int64(c) * env[v]
    return acc


def witness_window(body: Formula, name: str, ranges: dict[str, tuple[int, int]]) -> tuple[int, int]:
    """Interval guaranteed to contain a witness for (exists name. body)
    whenever the variable's atoms only mention ranged variables.

    Root zones of atoms linear in the variable, padded by the lcm of moduli of
    congruences mentioning it; a window of that length below the zones covers
    the periodic regime.  Atoms coupling the variable to deeper-bound (not yet
    ranged) variables contribute no zone; truth_on_box compensates with its
    stability check.
    """
    lo, hi = 0, 0
    delta = 1
    have_zone = False
    for g in subformulas(body):
        if not isinstance(g, Atom):
            continue
        t = g.lhs - g.rhs
        a = t.coeff(name)
        if a == 0:
            continue
        rest = t.drop(name)
        if g.kind == CONG:
            delta = math.lcm(delta, g.modulus)
            continue
        if any(v not in ranges for v in rest.variables()):
            continue
        m = _term_bound(rest, ranges)
        zone = -((-m) // abs(a)) + 1  # ceil(m/|a|) + 1
        lo = min(lo, -zone) if have_zone else -zone
        hi = max(hi, zone) if have_zone else zone
        have_zone = True
    if not have_zone:
        lo = hi = 0
    return lo - delta, hi + delta


_WINDOW_SCALE = 1


def _expand_axes(f: Formula, names: Sequence[str], axes: Axes) -> Axes:
    ranges = {v: (int(vals.min()), int(vals.max())) if len(vals) else (0, 0) for v, vals in axes}
    out = list(axes)
    for name in names:
        lo, hi = witness_window(f, name, ranges)
        lo, hi = lo * _WINDOW_SCALE - (_WINDOW_SCALE - 1), hi * _WINDOW_SCALE + (_WINDOW_SCALE - 1)
        vals = np.arange(lo, hi + 1, dtype=np.int64)
        out.append((name, vals))
        ranges[name] = (lo, hi)
    return out


def _grid_env(axes: Axes) -> dict[str, np.ndarray]:
    n = len(axes)
    env = {}
    for i, (v, vals) in enumerate(axes):
        shape = [1] * n
        shape[i] = len(vals)
        env[v] = vals.reshape(shape)
    return env


def _size(axes: Axes) -> int:
    p = 1
    for _, vals in axes:
        p *= max(1, len(vals))
    return p


def _truth(f: Formula, axes: Axes) -> np.ndarray:
    shape = tuple(len(vals) for _, vals in axes)
    if isinstance(f, Boolean):
        return np.full(shape, f.value, dtype=bool)
    if isinstance(f, Atom):
        env = _grid_env(axes)
        ranges = {v: (int(vals.min()), int(vals.max())) if len(vals) else (0, 0) for v, vals in axes}
        for t in (f.lhs, f.rhs):
            if _term_bound(t, ranges) > 2**62:
                raise OracleCapacityError("term values exceed int64 range")
        l = _term_array(f.lhs, env)
        r = _term_array(f.rhs, env)
        if f.kind == LE:
            res = l <= r
        elif f.kind == EQ:
            res = l == r
        else:
            res = (l - r) % f.modulus == 0
        return np.broadcast_to(res, shape).copy() if res.shape != shape else res
    if isinstance(f, Not):
        return ~_truth(f.body, axes)
    if isinstance(f, And):
        acc = np.full(shape, True, dtype=bool)
        for a in f.args:
            acc &= _truth(a, axes)
        return acc
    if isinstance(f, Or):
        acc = np.full(shape, False, dtype=bool)
        for a in f.args:
            acc |= _truth(a, axes)
        return acc
    if isinstance(f, Implies):
        return ~_truth(f.left, axes) | _truth(f.right, axes)
    assert isinstance(f, (Exists, Forall))
    extended = _expand_axes(f.body, f.names, axes)
    if _size(extended) > _MAX_ELEMENTS:
        return _chunked_quantifier(f, axes, extended)
    arr = _truth(f.body, extended)
    reduce_dims = tuple(range(len(axes), len(extended)))
    if isinstance(f, Exists):
        return arr.any(axis=reduce_dims)
    return arr.all(axis=reduce_dims)


def _chunked_quantifier(f: Formula, axes: Axes, extended: Axes) -> np.ndarray:
    if axes:
        # split the largest outer axis and stitch results back together
        i = max(range(len(axes)), key=lambda j: len(axes[j][1]))
        name, vals = axes[i]
        if len(vals) > 1:
            mid = len(vals) // 2
            left = axes[:i] + [(name, vals[:mid])] + axes[i + 1 :]
            right = axes[:i] + [(name, vals[mid:])] + axes[i + 1 :]
            return np.concatenate([_truth(f, left), _truth(f, right)], axis=i)
    # no outer room: split the first quantifier axis and combine logically
    qi = len(axes)
    name, vals = extended[qi]
    if len(vals) <= 1:
        raise OracleCapacityError("expansion grid too large to evaluate")
    mid = len(vals) // 2
    combine = np.logical_or if isinstance(f, Exists) else np.logical_and
    parts = []
    for piece in (vals[:mid], vals[mid:]):
        rest = f.body if len(f.names) == 1 else type(f)(f.names[1:], f.body)
        sub_axes = axes + [(name, piece)]
        arr = _truth(rest, sub_axes)
        red = arr.any(axis=len(axes)) if isinstance(f, Exists) else arr.all(axis=len(axes))
        parts.append(red)
    return combine(parts[0], parts[1])


def truth_on_box(f: Formula, variables: Sequence[str], radius: int, verify_windows: bool = True) -> np.ndarray:
    """Boolean grid of f over [-radius, radius]^m, expanding quantifiers.

    Quantified evaluations are recomputed with doubled witness windows and
    must agree, otherwise the expansion is reported as unstable.
    """
    global _WINDOW_SCALE
    extra = [v for v in free_variables(f) if v not in variables]
    if extra:
        raise EvaluationError(f"free variables outside the box: {extra}")
    vals = np.arange(-radius, radius + 1, dtype=np.int64)
    axes: Axes = [(v, vals) for v in variables]
    if _size(axes) > _MAX_ELEMENTS:
        raise OracleCapacityError("outer box too large")
    result = _truth(f, axes)
    if verify_windows and not is_quantifier_free(f):
        saved = _WINDOW_SCALE
        try:
            _WINDOW_SCALE = saved * 2
            wide = _truth(f, axes)
        finally:
            _WINDOW_SCALE = saved
        if not np.array_equal(result, wide):
            raise OracleCapacityError("quantifier expansion did not stabilize under window doubling")
    return result


def evaluate_on_box(f: Formula, variables: Sequence[str], radius: int) -> np.ndarray:
    if not is_quantifier_free(f):
        raise EvaluationError("evaluate_on_box needs a quantifier-free formula")
    return truth_on_box(f, variables, radius)


def enumerate_box(f: Formula, variables: Sequence[str], radius: int) -> list[tuple[int, ...]]:
    """Points of the box satisfying f, lexicographically ordered."""
    grid = truth_on_box(f, variables, radius)
    idx = np.argwhere(grid)
    return [tuple(int(i) - radius for i in row) for row in idx]


def count_box(f: Formula, variables: Sequence[str], radius: int) -> int:
    return int(truth_on_box(f, variables, radius).sum())


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Report:
    passed: bool
    counterexamples: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "counterexamples": self.counterexamples, "detail": self.detail}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def check_partition(
    X: Formula, pieces: Sequence[Formula], variables: Sequence[str], radius: int, max_examples: int = 5
) -> Report:
    """Every box point of X lies in exactly one piece; pieces stay inside X."""
    grid = truth_on_box(X, variables, radius)
    counts = np.zeros(grid.shape, dtype=np.int64)
    for p in pieces:
        counts += truth_on_box(p, variables, radius).astype(np.int64)
    bad = (grid & (counts != 1)) | (~grid & (counts != 0))
    examples = []
    for row in np.argwhere(bad)[:max_examples]:
        pt = tuple(int(i) - radius for i in row)
        examples.append({"point": list(pt), "in_set": bool(grid[tuple(row)]), "pieces": int(counts[tuple(row)])})
    return Report(passed=not bad.any(), counterexamples=examples, detail={"points": int(grid.sum())})


def _default_vars(f: Formula, arity: int) -> list[str]:
    """Canonical x0..x{arity-1} namespace, provided f fits inside it."""
    names = [f"x{i}" for i in range(arity)]
    fv = set(free_variables(f))
    if fv <= set(names):
        return names
    if len(fv) == arity:
        return sorted(fv)
    raise EvaluationError(f"cannot infer a variable order for {sorted(fv)} at arity {arity}")


def check_bijection_on_box(
    g,
    X: Formula,
    Y: Formula,
    radius: int,
    *,
    x_vars: Sequence[str] | None = None,
    y_vars: Sequence[str] | None = None,
    inverse=None,
    max_examples: int = 5,
) -> Report:
    """Numeric bijection check of a piecewise-linear map on a box.

    Injectivity on X cap box; image inside Y; and target points in a
    conservatively covered region all have preimages.  When `inverse` is given
    the covered region is exactly the Y points whose inverse lands inside the
    box; otherwise the image of a widened source box stands in for it.
    """
    from .qe import eliminate_quantifiers
    from .syntax import evaluate as eval_f

    X_qf = X if is_quantifier_free(X) else eliminate_quantifiers(X)
    Y_qf = Y if is_quantifier_free(Y) else eliminate_quantifiers(Y)
    if x_vars is None:
        x_vars = _default_vars(X_qf, g.input_arity)
    if y_vars is None:
        y_vars = _default_vars(Y_qf, g.output_arity)
    if len(x_vars) != g.input_arity or len(y_vars) != g.output_arity:
        raise EvaluationError("variable lists must match the map's arities")

    def in_X(p):
        return eval_f(X_qf, dict(zip(x_vars, p)))

    def in_Y(q):
        return eval_f(Y_qf, dict(zip(y_vars, q)))

    def points_of(formula, names, r):
        if not names:
            return [()] if eval_f(formula, {}) else []
        return enumerate_box(formula, names, r)

    examples = []
    ok = True
    source = points_of(X_qf, x_vars, radius)
    image: dict[tuple[int, ...], tuple[int, ...]] = {}
    for p in source:
        try:
            q = g.apply(p)
        except PresbError as exc:
            ok = False
            if len(examples) < max_examples:
                examples.append({"point": list(p), "error": str(exc)})
            continue
        if q in image and image[q] != p:
            ok = False
            if len(examples) < max_examples:
                examples.append({"collision": [list(image[q]), list(p)], "value": list(q)})
        image[q] = p
        if not in_Y(q):
            ok = False
            if len(examples) < max_examples:
                examples.append({"point": list(p), "image_outside_target": list(q)})

    targets = points_of(Y_qf, y_vars, radius)
    targets.sort(key=lambda q: (max((abs(c) for c in q), default=0), q))
    covered_norm = radius
    if inverse is not None:
        for q in targets:
            norm = max((abs(c) for c in q), default=0)
            try:
                p = inverse.apply(q)
            except PresbError:
                covered_norm = norm - 1
                break
            if any(abs(c) > radius for c in p):
                covered_norm = norm - 1
                break
            if not in_X(p) or g.apply(p) != q:
                ok = False
                if len(examples) < max_examples:
                    examples.append({"target": list(q), "bad_preimage": list(p)})
    else:
        # widen the source so genuinely covered targets are not misflagged
        widened = radius * (4 if g.input_arity <= 2 else 2)
        wide_image = set()
        if (2 * widened + 1) ** max(1, g.input_arity) <= 1_000_000:
            for p in points_of(X_qf, x_vars, widened):
                try:
                    wide_image.add(g.apply(p))
                except PresbError:
                    pass
        else:
            wide_image = set(image)
        for q in targets:
            if q not in wide_image:
                ok = False
                if len(examples) < max_examples:
                    examples.append({"target_without_preimage": list(q)})
                break
    return Report(
        passed=ok,
        counterexamples=examples,
        detail={"covered_norm": covered_norm, "source_points": len(source)},
    )
