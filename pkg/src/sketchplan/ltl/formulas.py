"""LTL formula ASTs, a text syntax, and evaluation over lasso words.

Surface syntax: atoms ``[a-z0-9_]+``; unary ``!``, ``X``, ``F``, ``G``;
binary ``U``, ``&&``, ``||``, ``->``; parentheses.  Precedence, tightest
first: unary, ``U`` (right associative), ``&&``, ``||``, ``->`` (right
associative).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

__all__ = [
    "Atom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Next",
    "Future",
    "Always",
    "Until",
    "Formula",
    "FormulaSyntaxError",
    "parse_formula",
    "format_formula",
    "eval_lasso",
    "atoms_of",
]

_ATOM_RE = re.compile(r"[a-z0-9_]+")


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Next:
    sub: "Formula"


@dataclass(frozen=True, slots=True)
class Future:
    sub: "Formula"


@dataclass(frozen=True, slots=True)
class Always:
    sub: "Formula"


@dataclass(frozen=True, slots=True)
class Until:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Next, Future, Always, Until]


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<atom>[a-z0-9_]+)|(?P<op>&&|\|\||->|[!XFGU()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            at = len(text) - len(stripped)
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", at)
        if m.group("atom") is not None:
            tokens.append(("atom", m.group("atom"), m.start("atom")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _take(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self._implies()
        tok = self._peek()
        if tok is not None:
            raise FormulaSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return f

    def _implies(self) -> Formula:
        left = self._or()
        tok = self._peek()
        if tok and tok[1] == "->":
            self._take()
            return Implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        f = self._and()
        while True:
            tok = self._peek()
            if tok and tok[1] == "||":
                self._take()
                f = Or(f, self._and())
            else:
                return f

    def _and(self) -> Formula:
        f = self._until()
        while True:
            tok = self._peek()
            if tok and tok[1] == "&&":
                self._take()
                f = And(f, self._until())
            else:
                return f

    def _until(self) -> Formula:
        left = self._unary()
        tok = self._peek()
        if tok and tok[1] == "U":
            self._take()
            return Until(left, self._until())
        return left

    def _unary(self) -> Formula:
        tok = self._take()
        kind, value, offset = tok
        if kind == "atom":
            return Atom(value)
        if value == "!":
            return Not(self._unary())
        if value == "X":
            return Next(self._unary())
        if value == "F":
            return Future(self._unary())
        if value == "G":
            return Always(self._unary())
        if value == "(":
            f = self._implies()
            closing = self._take()
            if closing[1] != ")":
                raise FormulaSyntaxError("expected ')'", closing[2])
            return f
        raise FormulaSyntaxError(f"unexpected token {value!r}", offset)


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


def format_formula(f: Formula) -> str:
    """Fully parenthesized canonical text; parses back to the same AST."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"(! {format_formula(f.sub)})"
    if isinstance(f, Next):
        return f"(X {format_formula(f.sub)})"
    if isinstance(f, Future):
        return f"(F {format_formula(f.sub)})"
    if isinstance(f, Always):
        return f"(G {format_formula(f.sub)})"
    if isinstance(f, And):
        return f"({format_formula(f.left)} && {format_formula(f.right)})"
    if isinstance(f, Or):
        return f"({format_formula(f.left)} || {format_formula(f.right)})"
    if isinstance(f, Implies):
        return f"({format_formula(f.left)} -> {format_formula(f.right)})"
    if isinstance(f, Until):
        return f"({format_formula(f.left)} U {format_formula(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset((f.name,))
    if isinstance(f, (Not, Next, Future, Always)):
        return atoms_of(f.sub)
    return atoms_of(f.left) | atoms_of(f.right)


def eval_lasso(
    f: Formula,
    prefix: Sequence[Iterable[str]],
    cycle: Sequence[Iterable[str]],
) -> bool:
    """Truth of ``f`` at position 0 of the infinite word prefix·cycle^ω.

    Temporal operators are solved by fixpoint iteration over the
    len(prefix)+len(cycle) positions with the wrap back to the cycle
    start; convergence needs at most that many rounds.
    """
    if not cycle:
        raise ValueError("cycle required")
    word = [frozenset(w) for w in prefix] + [frozenset(w) for w in cycle]
    n = len(word)
    wrap = len(prefix)
    nxt = [i + 1 for i in range(n)]
    nxt[n - 1] = wrap

    memo: dict[Formula, list[bool]] = {}

    def vec(g: Formula) -> list[bool]:
        cached = memo.get(g)
        if cached is not None:
            return cached
        if isinstance(g, Atom):
            out = [g.name in word[i] for i in range(n)]
        elif isinstance(g, Not):
            out = [not v for v in vec(g.sub)]
        elif isinstance(g, And):
            lv, rv = vec(g.left), vec(g.right)
            out = [a and b for a, b in zip(lv, rv)]
        elif isinstance(g, Or):
            lv, rv = vec(g.left), vec(g.right)
            out = [a or b for a, b in zip(lv, rv)]
        elif isinstance(g, Implies):
            lv, rv = vec(g.left), vec(g.right)
            out = [(not a) or b for a, b in zip(lv, rv)]
        elif isinstance(g, Next):
            sv = vec(g.sub)
            out = [sv[nxt[i]] for i in range(n)]
        elif isinstance(g, Future):
            sv = vec(g.sub)
            out = list(sv)
            for _ in range(n):
                new = [sv[i] or out[nxt[i]] for i in range(n)]
                if new == out:
                    break
                out = new
        elif isinstance(g, Always):
            sv = vec(g.sub)
            out = list(sv)
            for _ in range(n):
                new = [sv[i] and out[nxt[i]] for i in range(n)]
                if new == out:
                    break
                out = new
        elif isinstance(g, Until):
            lv, rv = vec(g.left), vec(g.right)
            out = list(rv)
            for _ in range(n):
                new = [rv[i] or (lv[i] and out[nxt[i]]) for i in range(n)]
                if new == out:
                    break
                out = new
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = out
        return out

    return vec(f)[0]
