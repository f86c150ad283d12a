"""LTL / LTLf syntax trees, a parser, negation normal form and direct semantics.

Concrete syntax: atoms (identifiers or double-quoted strings such as ``"x>2"``),
``true``, ``false``, ``!``, ``&``, ``|``, ``->``, ``X``, ``N``, ``U``, ``R``, ``F``,
``G`` and parentheses.  The prefix operators bind tightest, then ``U`` and ``R``
(right associative), then ``&``, then ``|``; ``->`` is loosest and right
associative.

Finite-trace semantics is over nonempty words and uses the strong next: ``X f``
fails at the last position.  ``N f`` (weak next, only produced by negation
normal form) holds at the last position.  The keywords X, N, U, R, F, G, true
and false cannot be bare atom names; quote them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Set, Tuple, Union


class Formula:
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return to_str(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Finally(Formula):
    arg: Formula


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula


UNARY = (Not, Next, WeakNext, Finally, Globally)
BINARY = (And, Or, Implies, Until, Release)


def atoms(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Atom):
        return frozenset({f.name})
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, UNARY):
        return atoms(f.arg)
    return atoms(f.left) | atoms(f.right)


def map_atoms(f: Formula, fn) -> Formula:
    """Replace every atom a by fn(a)."""
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, Const):
        return f
    if isinstance(f, UNARY):
        return type(f)(map_atoms(f.arg, fn))
    return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))


# ---------------------------------------------------------------------------
# printing and parsing

_SYMBOL = {And: "&", Or: "|", Implies: "->", Until: "U", Release: "R"}
_PREFIX = {Not: "!", Next: "X", WeakNext: "N", Finally: "F", Globally: "G"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_KEYWORDS = {"X", "U", "F", "G", "N", "R", "true", "false"}


def to_str(f: Formula) -> str:
    if isinstance(f, Atom):
        if _IDENT.match(f.name) and f.name not in _KEYWORDS:
            return f.name
        return '"' + f.name + '"'
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, UNARY):
        return f"{_PREFIX[type(f)]}({to_str(f.arg)})"
    return f"({to_str(f.left)} {_SYMBOL[type(f)]} {to_str(f.right)})"


_TOKEN = re.compile(r'\s*(?:(->)|([!&|()])|"([^"]*)"|([A-Za-z_][A-Za-z0-9_\']*))')


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group(1):
            out.append(("op", "->"))
        elif m.group(2):
            out.append(("op", m.group(2)))
        elif m.group(3) is not None:
            out.append(("atom", m.group(3)))
        else:
            word = m.group(4)
            if word in ("X", "N", "U", "R", "F", "G"):
                out.append(("op", word))
            elif word in ("true", "false"):
                out.append(("const", word))
            else:
                out.append(("atom", word))
    return out


def parse(text: str) -> Formula:
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else ("eof", "")

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if expected is not None and tok != ("op", expected):
            raise ParseError(f"expected {expected!r}, found {tok[1]!r}")
        pos += 1
        return tok

    def implication():
        left = disjunction()
        if peek() == ("op", "->"):
            take()
            return Implies(left, implication())
        return left

    def disjunction():
        left = conjunction()
        while peek() == ("op", "|"):
            take()
            left = Or(left, conjunction())
        return left

    def conjunction():
        left = until()
        while peek() == ("op", "&"):
            take()
            left = And(left, until())
        return left

    def until():
        left = unary()
        if peek() == ("op", "U"):
            take()
            return Until(left, until())
        if peek() == ("op", "R"):
            take()
            return Release(left, until())
        return left

    def unary():
        tok = peek()
        if tok == ("op", "!"):
            take()
            return Not(unary())
        if tok == ("op", "X"):
            take()
            return Next(unary())
        if tok == ("op", "N"):
            take()
            return WeakNext(unary())
        if tok == ("op", "F"):
            take()
            return Finally(unary())
        if tok == ("op", "G"):
            take()
            return Globally(unary())
        if tok == ("op", "("):
            take()
            inner = implication()
            take(")")
            return inner
        if tok[0] == "atom":
            take()
            return Atom(tok[1])
        if tok[0] == "const":
            take()
            return TRUE if tok[1] == "true" else FALSE
        raise ParseError(f"unexpected token {tok[1]!r}")

    result = implication()
    if pos != len(tokens):
        raise ParseError(f"trailing input at token {peek()[1]!r}")
    return result


def as_formula(spec: Union[str, Formula]) -> Formula:
    return parse(spec) if isinstance(spec, str) else spec


# ---------------------------------------------------------------------------
# negation normal form: negations only on atoms; operators And Or Next WeakNext Until Release


def nnf(f: Formula, finite: bool = False) -> Formula:
    return _nnf(f, False, finite)


def _nnf(f: Formula, neg: bool, finite: bool) -> Formula:
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Not):
        return _nnf(f.arg, not neg, finite)
    if isinstance(f, And):
        cls = Or if neg else And
        return cls(_nnf(f.left, neg, finite), _nnf(f.right, neg, finite))
    if isinstance(f, Or):
        cls = And if neg else Or
        return cls(_nnf(f.left, neg, finite), _nnf(f.right, neg, finite))
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), neg, finite)
    if isinstance(f, Next):
        if neg:
            return (WeakNext if finite else Next)(_nnf(f.arg, True, finite))
        return Next(_nnf(f.arg, False, finite))
    if isinstance(f, WeakNext):
        if neg:
            return Next(_nnf(f.arg, True, finite))
        return (WeakNext if finite else Next)(_nnf(f.arg, False, finite))
    if isinstance(f, Until):
        cls = Release if neg else Until
        return cls(_nnf(f.left, neg, finite), _nnf(f.right, neg, finite))
    if isinstance(f, Release):
        cls = Until if neg else Release
        return cls(_nnf(f.left, neg, finite), _nnf(f.right, neg, finite))
    if isinstance(f, Finally):
        return _nnf(Until(TRUE, f.arg), neg, finite)
    if isinstance(f, Globally):
        return _nnf(Release(FALSE, f.arg), neg, finite)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# direct semantics (used as the oracle for the automata translations)

Letter = FrozenSet[str]


def _sat_sets(f: Formula, letters: Sequence[Letter], succ: Sequence[int]) -> Set[int]:
    """Positions satisfying f; succ[i] is the next position or -1 at the end of a finite word."""
    n = len(letters)
    allpos = set(range(n))
    if isinstance(f, Atom):
        return {i for i in range(n) if f.name in letters[i]}
    if isinstance(f, Const):
        return set(allpos) if f.value else set()
    if isinstance(f, Not):
        return allpos - _sat_sets(f.arg, letters, succ)
    if isinstance(f, And):
        return _sat_sets(f.left, letters, succ) & _sat_sets(f.right, letters, succ)
    if isinstance(f, Or):
        return _sat_sets(f.left, letters, succ) | _sat_sets(f.right, letters, succ)
    if isinstance(f, Implies):
        return (allpos - _sat_sets(f.left, letters, succ)) | _sat_sets(f.right, letters, succ)
    if isinstance(f, Next):
        inner = _sat_sets(f.arg, letters, succ)
        return {i for i in range(n) if succ[i] >= 0 and succ[i] in inner}
    if isinstance(f, WeakNext):
        inner = _sat_sets(f.arg, letters, succ)
        return {i for i in range(n) if succ[i] < 0 or succ[i] in inner}
    if isinstance(f, Finally):
        return _sat_sets(Until(TRUE, f.arg), letters, succ)
    if isinstance(f, Globally):
        return _sat_sets(Release(FALSE, f.arg), letters, succ)
    if isinstance(f, Until):
        a = _sat_sets(f.left, letters, succ)
        b = _sat_sets(f.right, letters, succ)
        sat = set(b)
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if i not in sat and i in a and succ[i] >= 0 and succ[i] in sat:
                    sat.add(i)
                    changed = True
        return sat
    if isinstance(f, Release):
        a = _sat_sets(f.left, letters, succ)
        b = _sat_sets(f.right, letters, succ)
        sat = set(b)
        changed = True
        while changed:
            changed = False
            for i in list(sat):
                if i in a:
                    continue
                if succ[i] >= 0 and succ[i] not in sat:
                    sat.discard(i)
                    changed = True
        return sat
    raise TypeError(f"not a formula: {f!r}")


def holds_finite(f: Formula, word: Sequence[Letter]) -> bool:
    """Finite-trace satisfaction at position 0 of a nonempty word."""
    if not word:
        raise ValueError("finite-trace semantics is defined on nonempty words")
    n = len(word)
    succ = [i + 1 if i + 1 < n else -1 for i in range(n)]
    return 0 in _sat_sets(f, list(word), succ)


def holds_lasso(f: Formula, prefix: Sequence[Letter], cycle: Sequence[Letter]) -> bool:
    """Satisfaction of the infinite word prefix . cycle^omega."""
    if not cycle:
        raise ValueError("the cycle of a lasso word must be nonempty")
    letters = list(prefix) + list(cycle)
    n = len(letters)
    succ = [i + 1 if i + 1 < n else len(prefix) for i in range(n)]
    return 0 in _sat_sets(f, letters, succ)
