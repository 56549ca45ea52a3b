"""S-expression reader and writer for formulas.

Grammar (ASCII):
    formula := "true" | "false" | atom | (not f) | (and f+) | (or f+)
             | (implies f f) | (exists (var+) f) | (forall (var+) f)
    atom    := (le t t) | (lt t t) | (eq t t) | (cong t t N)      N >= 1
    t       := integer | identifier | (+ t t+) | (- t t) | (- t) | (* integer t)

(lt a b) is sugar for (le (+ a 1) b).  Bound variables are renamed at parse
time so that binders never shadow one another or the free variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import (
    CONG,
    EQ,
    LE,
    Atom,
    Boolean,
    Exists,
    Forall,
    Formula,
    Implies,
    LinearTerm,
    Not,
    And,
    Or,
    TRUE,
    FALSE,
    conj,
    const,
    disj,
    rename_bound,
    var,
)

_KEYWORDS = {
    "true", "false", "not", "and", "or", "implies", "exists", "forall",
    "le", "lt", "eq", "cong", "+", "-", "*",
}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT = re.compile(r"-?[0-9]+\Z")


@dataclass
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch in "()":
            tokens.append(_Token(ch, line, col))
            col += 1
            i += 1
        elif ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(_Token(text[i:j], line, col))
            col += j - i
            i = j
    return tokens


class _Reader:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.column + len(last.text))
        self.pos += 1
        return tok

    def read(self):
        """One s-expression: a token string or a list of s-expressions."""
        tok = self.next()
        if tok.text == "(":
            items = []
            while True:
                nxt = self.peek()
                if nxt is None:
                    raise ParseError("missing )", tok.line, tok.column)
                if nxt.text == ")":
                    self.next()
                    return items, tok
                items.append(self.read())
            # unreachable
        if tok.text == ")":
            raise ParseError("unexpected )", tok.line, tok.column)
        return tok


def _err(node, message: str) -> ParseError:
    tok = node[1] if isinstance(node, tuple) else node
    return ParseError(message, tok.line, tok.column)


def _parse_term(node) -> LinearTerm:
    if isinstance(node, _Token):
        if _INT.match(node.text):
            return const(int(node.text))
        if _IDENT.match(node.text) and node.text not in _KEYWORDS:
            return var(node.text)
        raise _err(node, f"expected a term, got {node.text!r}")
    items, tok = node
    if not items or not isinstance(items[0], _Token):
        raise _err(node, "expected a term operator")
    head = items[0].text
    args = items[1:]
    if head == "+":
        if len(args) < 2:
            raise _err(node, "+ needs at least two arguments")
        acc = _parse_term(args[0])
        for a in args[1:]:
            acc = acc + _parse_term(a)
        return acc
    if head == "-":
        if len(args) == 1:
            return -_parse_term(args[0])
        if len(args) == 2:
            return _parse_term(args[0]) - _parse_term(args[1])
        raise _err(node, "- takes one or two arguments")
    if head == "*":
        if len(args) != 2 or not isinstance(args[0], _Token) or not _INT.match(args[0].text):
            raise _err(node, "* takes an integer literal and a term")
        return _parse_term(args[1]).scale(int(args[0].text))
    raise _err(node, f"unknown term operator {head!r}")


def _parse_var_list(node) -> list[str]:
    if isinstance(node, _Token):
        raise _err(node, "expected a (var+) list")
    items, tok = node
    if not items:
        raise ParseError("empty variable list", tok.line, tok.column)
    names = []
    for it in items:
        if not isinstance(it, _Token) or not _IDENT.match(it.text) or it.text in _KEYWORDS:
            raise _err(it if isinstance(it, _Token) else node, "expected a variable name")
        names.append(it.text)
    if len(set(names)) != len(names):
        raise ParseError("repeated variable in binder", tok.line, tok.column)
    return names


def _parse_formula(node) -> Formula:
    if isinstance(node, _Token):
        if node.text == "true":
            return TRUE
        if node.text == "false":
            return FALSE
        raise _err(node, f"expected a formula, got {node.text!r}")
    items, tok = node
    if not items or not isinstance(items[0], _Token):
        raise _err(node, "expected a formula operator")
    head = items[0].text
    args = items[1:]
    if head in (LE, "lt", EQ):
        if len(args) != 2:
            raise _err(node, f"{head} takes two terms")
        lhs, rhs = _parse_term(args[0]), _parse_term(args[1])
        if head == "lt":
            return Atom(LE, lhs + 1, rhs)
        return Atom(head, lhs, rhs)
    if head == CONG:
        if len(args) != 3:
            raise _err(node, "cong takes two terms and a modulus")
        lhs, rhs = _parse_term(args[0]), _parse_term(args[1])
        mod_tok = args[2]
        if not isinstance(mod_tok, _Token) or not _INT.match(mod_tok.text):
            raise _err(node, "modulus must be an integer literal")
        n = int(mod_tok.text)
        if n < 1:
            raise ParseError("modulus must be positive", mod_tok.line, mod_tok.column)
        return Atom(CONG, lhs, rhs, n)
    if head == "not":
        if len(args) != 1:
            raise _err(node, "not takes one formula")
        return Not(_parse_formula(args[0]))
    if head in ("and", "or"):
        if not args:
            raise _err(node, f"{head} needs at least one formula")
        parts = tuple(_parse_formula(a) for a in args)
        return And(parts) if head == "and" else Or(parts)
    if head == "implies":
        if len(args) != 2:
            raise _err(node, "implies takes two formulas")
        return Implies(_parse_formula(args[0]), _parse_formula(args[1]))
    if head in ("exists", "forall"):
        if len(args) != 2:
            raise _err(node, f"{head} takes a variable list and a formula")
        names = _parse_var_list(args[0])
        body = _parse_formula(args[1])
        cls = Exists if head == "exists" else Forall
        return cls(tuple(names), body)
    raise _err(node, f"unknown operator {head!r}")


def parse(text: str) -> Formula:
    """Parse formula text; raises ParseError with position on bad input."""
    reader = _Reader(text)
    if reader.peek() is None:
        raise ParseError("empty input", 1, 1)
    node = reader.read()
    trailing = reader.peek()
    if trailing is not None:
        raise ParseError("trailing input after formula", trailing.line, trailing.column)
    f = _parse_formula(node)
    return rename_bound(f, ())


# ---------------------------------------------------------------------------
# Rendering


def render_term(t: LinearTerm) -> str:
    parts = []
    for v, c in t.coeffs:
        parts.append(v if c == 1 else f"(* {c} {v})")
    if t.constant != 0 or not parts:
        parts.append(str(t.constant))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def render(f: Formula) -> str:
    """Formula text; parse(render(f)) equals f up to bound-variable names."""
    if isinstance(f, Boolean):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        l, r = render_term(f.lhs), render_term(f.rhs)
        if f.kind == CONG:
            return f"(cong {l} {r} {f.modulus})"
        return f"({f.kind} {l} {r})"
    if isinstance(f, Not):
        return f"(not {render(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(render(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(render(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(implies {render(f.left)} {render(f.right)})"
    if isinstance(f, Exists):
        return f"(exists ({' '.join(f.names)}) {render(f.body)})"
    assert isinstance(f, Forall)
    return f"(forall ({' '.join(f.names)}) {render(f.body)})"
