"""Random corpora shared by the tests and the acceptance suite.

Quantified variables are kept uncoupled (no atom mentions two quantified
variables), so the box oracle's witness windows are exact: each window is
computed from the free-variable ranges alone.  Constants and coefficients are
kept small so the growth-based dimension estimator is reliable at the fixed
radii 8, 16, 32.
"""

from __future__ import annotations

import random

from presb.parser import parse
from presb.syntax import (
    CONG,
    EQ,
    LE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    LinearTerm,
    Not,
    Or,
    conj,
    const,
    disj,
    var,
)

FREE_POOL = ("x", "y", "z")
BOUND_POOL = ("q0", "q1", "q2")


def rand_term(rng: random.Random, pool, coeff=3, constant=3, max_vars=2) -> LinearTerm:
    t = const(rng.randint(-constant, constant))
    n = rng.randint(0, min(max_vars, len(pool)))
    for v in rng.sample(list(pool), n):
        c = 0
        while c == 0:
            c = rng.randint(-coeff, coeff)
        t = t + var(v).scale(c)
    return t


def rand_atom(rng: random.Random, pool, coeff=3, constant=3, eq_weight=0.15) -> Formula:
    lhs = rand_term(rng, pool, coeff, constant)
    rhs = rand_term(rng, pool, coeff, constant)
    r = rng.random()
    if r < eq_weight:
        return Atom(EQ, lhs, rhs)
    if r < 0.45:
        return Atom(CONG, lhs, rhs, rng.randint(2, 6))
    return Atom(LE, lhs, rhs)


def rand_qf(rng: random.Random, pool, n_atoms: int, **kw) -> Formula:
    atoms = [rand_atom(rng, pool, **kw) for _ in range(max(1, n_atoms))]
    while len(atoms) > 1:
        b = atoms.pop()
        a = atoms.pop()
        op = rng.random()
        if op < 0.4:
            atoms.append(And((a, b)))
        elif op < 0.8:
            atoms.append(Or((a, b)))
        elif op < 0.9:
            atoms.append(Implies(a, b))
        else:
            atoms.append(And((a, Not(b))))
    return atoms[0]


def _quantified_atom(rng: random.Random, qvar: str, free) -> Formula:
    """Atom on one quantified variable and free variables only."""
    a = 0
    while a == 0:
        a = rng.randint(-2, 2)
    lhs = var(qvar).scale(a) + rand_term(rng, free, coeff=3, constant=5)
    rhs = rand_term(rng, free, coeff=2, constant=5)
    r = rng.random()
    if r < 0.2:
        return Atom(EQ, lhs, rhs)
    if r < 0.55:
        return Atom(CONG, lhs, rhs, rng.randint(2, 6))
    return Atom(LE, lhs, rhs)


def rand_quantified(rng: random.Random) -> tuple[Formula, list[str]]:
    """A formula with <=3 quantifier blocks and <=3 free variables."""
    q = rng.choices((0, 1, 2, 3), weights=(10, 45, 30, 15))[0]
    kmax = 3 if q <= 1 else (2 if q == 2 else 1)
    k = rng.randint(0 if q else 1, kmax)
    free = list(FREE_POOL[:k])
    bound = list(BOUND_POOL[:q])

    body: Formula | None = None
    for i, qv in enumerate(reversed(bound)):
        parts = [_quantified_atom(rng, qv, free) for _ in range(rng.randint(1, 3))]
        inner = parts[0]
        for p in parts[1:]:
            inner = And((inner, p)) if rng.random() < 0.6 else Or((inner, p))
        if body is not None:
            inner = And((inner, body)) if rng.random() < 0.5 else Or((inner, body))
        wrapped = Exists((qv,), inner) if rng.random() < 0.7 else Forall((qv,), inner)
        if rng.random() < 0.4 and free:
            body = And((wrapped, rand_qf(rng, free, rng.randint(1, 2)))) if rng.random() < 0.5 else Or(
                (wrapped, rand_qf(rng, free, 1))
            )
        else:
            body = wrapped
    if body is None:
        body = rand_qf(rng, free, rng.randint(2, 4))
    elif free and rng.random() < 0.5:
        body = And((body, rand_qf(rng, free, rng.randint(1, 2))))
    return body, free


def qe_corpus(n: int = 500, seed: int = 20260810) -> list[tuple[Formula, list[str]]]:
    rng = random.Random(seed)
    return [rand_quantified(rng) for _ in range(n)]


def sets_corpus(n: int = 200, seed: int = 777) -> list[tuple[Formula, list[str]]]:
    """Random definable sets in <=3 variables, quantifier-light."""
    rng = random.Random(seed)
    out = []
    classics = [
        ("(le 3 x)", ["x"]),
        ("(and (le 0 x) (le x 10) (cong x 0 2))", ["x"]),
        ("(and (le 0 x) (le x t) (le t (* 2 x)))", ["x", "t"]),
        ("(eq x y)", ["x", "y"]),
        ("true", ["x", "y"]),
        ("false", ["x"]),
        ("(or (le x -2) (le 2 x))", ["x"]),
        ("(cong (+ x y) 1 3)", ["x", "y"]),
    ]
    for text, names in classics:
        out.append((parse(text), names))
    while len(out) < n:
        m = rng.choices((1, 2, 3), weights=(40, 45, 15))[0]
        names = list(FREE_POOL[:m])
        if rng.random() < 0.15:
            qv = "q0"
            inner = conj(
                _quantified_atom(rng, qv, names),
                rand_qf(rng, names, rng.randint(1, 2)),
            )
            f: Formula = Exists((qv,), inner)
        else:
            f = rand_qf(rng, names, rng.randint(2, 5))
        out.append((f, names))
    return out[:n]


def graphs_corpus() -> list[tuple[str, Formula, list[str], str, object]]:
    """Function graphs with python references: (name, graph, vars, out, ref)."""
    out = []

    def add(name, text, names, ref):
        out.append((name, parse(text), names, "w", ref))

    add("abs", "(or (and (le 0 x) (eq w x)) (and (le x -1) (eq w (- 0 x))))", ["x"], lambda x: abs(x))
    for k in range(2, 6):
        add(
            f"floordiv{k}",
            f"(and (le (* {k} w) x) (le x (+ (* {k} w) {k - 1})))",
            ["x"],
            (lambda kk: lambda x: x // kk)(k),
        )
    add(
        "max",
        "(or (and (le y x) (eq w x)) (and (le (+ x 1) y) (eq w y)))",
        ["x", "y"],
        lambda x, y: max(x, y),
    )
    add(
        "min",
        "(or (and (le x y) (eq w x)) (and (le (+ y 1) x) (eq w y)))",
        ["x", "y"],
        lambda x, y: min(x, y),
    )
    add("id", "(eq w x)", ["x"], lambda x: x)
    add("succ", "(eq w (+ x 1))", ["x"], lambda x: x + 1)
    add("affine", "(eq w (+ (* 3 x) -4))", ["x"], lambda x: 3 * x - 4)
    add("neg", "(eq w (- 0 x))", ["x"], lambda x: -x)
    add(
        "clamp03",
        "(or (and (le x -1) (eq w 0)) (and (le 0 x) (le x 3) (eq w x)) (and (le 4 x) (eq w 3)))",
        ["x"],
        lambda x: min(max(x, 0), 3),
    )
    add(
        "parity_switch",
        "(or (and (cong x 0 2) (eq w x)) (and (cong x 1 2) (eq w (- 0 x))))",
        ["x"],
        lambda x: x if x % 2 == 0 else -x,
    )
    add(
        "halfdist",
        "(or (and (cong x 0 2) (eq (* 2 w) x)) (and (cong x 1 2) (eq (* 2 w) (+ x 1))))",
        ["x"],
        lambda x: (x + (x % 2)) // 2,
    )
    add("sum", "(eq w (+ x y))", ["x", "y"], lambda x, y: x + y)
    add("diff3", "(eq w (- (* 2 x) (* 3 y)))", ["x", "y"], lambda x, y: 2 * x - 3 * y)
    add(
        "abs_diff",
        "(or (and (le y x) (eq w (- x y))) (and (le (+ x 1) y) (eq w (- y x))))",
        ["x", "y"],
        lambda x, y: abs(x - y),
    )
    add(
        "mod2",
        "(or (and (cong x 0 2) (eq w 0)) (and (cong x 1 2) (eq w 1)))",
        ["x"],
        lambda x: x % 2,
    )
    add(
        "mod5",
        "(and (le 0 w) (le w 4) (cong (- x w) 0 5))",
        ["x"],
        lambda x: x % 5,
    )
    # randomized affine-by-residue functions
    rng = random.Random(99)
    while len(out) < 50:
        n = rng.randint(2, 4)
        parts = []
        coefs = []
        for r in range(n):
            a = rng.randint(-3, 3)
            b = rng.randint(-4, 4)
            coefs.append((a, b))
            parts.append(f"(and (cong x {r} {n}) (eq w (+ (* {a} x) {b})))")
        text = "(or " + " ".join(parts) + ")"
        ref = (lambda cs, nn: lambda x: cs[x % nn][0] * x + cs[x % nn][1])(coefs, n)
        add(f"residue_affine_{len(out)}", text, ["x"], ref)
    return out[:50]


def recti_corpus(n: int = 50, seed: int = 4242) -> list[tuple[Formula, list[str]]]:
    rng = random.Random(seed)
    base = [
        ("(le 0 x)", ["x"]),
        ("true", ["x"]),
        ("(and (le 0 x) (le x t))", ["x", "t"]),
        ("(and (le 0 x) (le x t) (le t (* 2 x)))", ["x", "t"]),
        ("(cong x 1 3)", ["x"]),
        ("(and (le -3 x) (le x 3))", ["x"]),
        ("(or (le x -4) (le 2 x))", ["x"]),
        ("(and (cong x 0 2) (le 0 x) (le 0 y))", ["x", "y"]),
        ("true", ["x", "y", "z"]),
        ("(and (le 0 x) (le 0 y) (le 0 z))", ["x", "y", "z"]),
    ]
    out = [(parse(t), v) for t, v in base]
    while len(out) < n:
        m = rng.choices((1, 2), weights=(55, 45))[0]
        names = list(FREE_POOL[:m])
        f = rand_qf(rng, names, rng.randint(1, 3), coeff=2, constant=3)
        out.append((f, names))
    return out[:n]


def classify_corpus(n: int = 30, seed: int = 515) -> list[tuple[Formula, list[str]]]:
    rng = random.Random(seed)
    base = [
        ("(le 0 x)", ["x"]),
        ("true", ["x"]),
        ("true", ["x", "y"]),
        ("(cong x 0 2)", ["x"]),
        ("(or (le x -10) (le 0 x))", ["x"]),
        ("(and (le 0 x) (le x t) (le t (* 2 x)))", ["x", "t"]),
        ("(and (cong x 1 3) (le 5 x))", ["x"]),
        ("(or (and (le 0 x) (le 0 y)) (and (le x -3) (le y -4)))", ["x", "y"]),
        ("(exists (q0) (and (eq x (* 3 q0)) (le 0 q0)))", ["x"]),
        ("true", ["x", "y", "z"]),
    ]
    out = [(parse(t), v) for t, v in base]
    rng_draw = 0
    while len(out) < n:
        rng_draw += 1
        m = rng.choices((1, 2), weights=(60, 40))[0]
        names = list(FREE_POOL[:m])
        f = rand_qf(rng, names, rng.randint(1, 3), coeff=2, constant=3, eq_weight=0.05)
        from presb.dimension import dimension

        if (dimension(f, names) or 0) >= 1:
            out.append((f, names))
    return out[:n]


def imaginaries_corpus() -> list[tuple[Formula, list[str], str]]:
    """Families X over (params..., t), m <= 2, small decompositions."""
    fams = [
        ("(cong t x 2)", ["x"]),
        ("(le x t)", ["x"]),
        ("(and (le x t) (le t (+ x 4)))", ["x"]),
        ("(eq t (* 2 x))", ["x"]),
        ("(or (and (le 0 x) (le 0 t)) (and (le x -1) (le t 0)))", ["x"]),
        ("(and (le 0 t) (cong t x 3))", ["x"]),
        ("(or (and (cong x 0 2) (le x t)) (and (cong x 1 2) (le t x)))", ["x"]),
        ("(and (le (* 2 x) t) (le t (+ (* 2 x) 6)) (cong t 0 2))", ["x"]),
        ("(le (+ x y) t)", ["x", "y"]),
        ("(cong t (+ x y) 2)", ["x", "y"]),
        ("(and (le x t) (le t y))", ["x", "y"]),
        ("(eq t (+ x y))", ["x", "y"]),
        ("(or (and (le 3 x) (eq t x)) (and (le x 2) (cong t 0 2)))", ["x"]),
        ("(and (le -2 t) (le t 2))", ["x"]),
        ("false", ["x"]),
        ("(cong t 1 4)", ["x"]),
        ("(or (eq t x) (eq t (- 0 x)))", ["x"]),
        ("(and (le x t) (cong (+ t x) 0 2))", ["x"]),
        ("(or (and (cong y 0 2) (le (+ x y) t)) (and (cong y 1 2) (le t (+ x y))))", ["x", "y"]),
        ("(and (le (- x 2) t) (le t (+ x 2)) (cong t y 2))", ["x", "y"]),
    ]
    return [(parse(t), v, "t") for t, v in fams]
