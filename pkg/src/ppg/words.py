"""Free-group words and their truncated Magnus expansions.

A word is stored as a tuple of ``(generator index, exponent)`` syllables in
freely reduced form, together with the names of the alphabet it lives over.
The Magnus map sends a generator ``g`` to ``1 + X_g`` inside the free
associative algebra over F_p, truncated above a chosen degree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

__all__ = [
    "WordSyntaxError",
    "AlphabetMismatch",
    "Word",
    "TruncatedSeries",
    "parse_word",
    "identity",
    "generator",
    "multiply",
    "invert",
    "conjugate",
    "commutator",
    "power",
    "exponent_sums",
    "magnus_truncated",
    "substitute",
]


class WordSyntaxError(ValueError):
    """Raised when a word string does not parse; carries the offset."""

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at column {position + 1}" if text else message)


class AlphabetMismatch(ValueError):
    pass


def _reduce(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for g, e in syllables:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([g, e])
    return tuple((g, e) for g, e in out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word over a named alphabet.

    Use the module-level helpers (``multiply``, ``invert``...) or the
    operators ``*`` and ``~`` to build new words; the constructor reduces.
    """

    syllables: tuple[tuple[int, int], ...]
    alphabet: tuple[str, ...] = field(compare=True)

    def __post_init__(self):
        object.__setattr__(self, "syllables", _reduce(self.syllables))

    def __mul__(self, other: Word) -> Word:
        return multiply(self, other)

    def __invert__(self) -> Word:
        return invert(self)

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        parts = []
        for g, e in self.syllables:
            name = self.alphabet[g]
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def identity(alphabet: Sequence[str]) -> Word:
    return Word((), tuple(alphabet))


def generator(alphabet: Sequence[str], name_or_index: str | int) -> Word:
    alphabet = tuple(alphabet)
    idx = alphabet.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
    return Word(((idx, 1),), alphabet)


def _check(u: Word, v: Word) -> None:
    if u.alphabet is not v.alphabet and u.alphabet != v.alphabet:
        raise AlphabetMismatch(f"words over different alphabets: {u.alphabet} vs {v.alphabet}")


def multiply(u: Word, v: Word) -> Word:
    _check(u, v)
    return Word(u.syllables + v.syllables, u.alphabet)


def invert(u: Word) -> Word:
    return Word(tuple((g, -e) for g, e in reversed(u.syllables)), u.alphabet)


def power(u: Word, e: int) -> Word:
    if e < 0:
        u, e = invert(u), -e
    if len(u.syllables) == 1:
        (g, k), = u.syllables
        return Word(((g, k * e),), u.alphabet)
    return Word(u.syllables * e, u.alphabet)


def conjugate(u: Word, g: Word) -> Word:
    """Return ``g^-1 u g``."""
    _check(u, g)
    return Word(invert(g).syllables + u.syllables + g.syllables, u.alphabet)


def commutator(u: Word, v: Word) -> Word:
    """Return ``[u, v] = u^-1 v^-1 u v``."""
    _check(u, v)
    return Word(invert(u).syllables + invert(v).syllables + u.syllables + v.syllables,
                u.alphabet)


def exponent_sums(w: Word) -> list[int]:
    sums = [0] * len(w.alphabet)
    for g, e in w.syllables:
        sums[g] += e
    return sums


def substitute(w: Word, images: Sequence[Word]) -> Word:
    """Apply the homomorphism sending generator ``i`` of ``w`` to ``images[i]``."""
    if not images:
        return w
    target = images[0].alphabet
    out: list[tuple[int, int]] = []
    for g, e in w.syllables:
        img = images[g]
        syl = img.syllables if e > 0 else invert(img).syllables
        out.extend(syl * abs(e))
    return Word(tuple(out), target)


# -- parsing -----------------------------------------------------------------

_INT = re.compile(r"[+-]?\d+")
_ONE = re.compile(r"1(?![\w(])")


class _Parser:
    def __init__(self, text: str, alphabet: Sequence[str]):
        self.text = text
        self.alphabet = tuple(alphabet)
        self.index = {name: i for i, name in enumerate(self.alphabet)}
        self.names = sorted(self.alphabet, key=len, reverse=True)
        self.pos = 0

    def error(self, msg: str, pos: int | None = None):
        raise WordSyntaxError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n*.":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Word:
        w = self.word(stop="")
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return w

    def word(self, stop: str) -> Word:
        syl: list[tuple[int, int]] = []
        while True:
            c = self.peek()
            if c == "" or c in stop:
                break
            syl.extend(self.factor().syllables)
        return Word(tuple(syl), self.alphabet)

    def factor(self) -> Word:
        c = self.peek()
        start = self.pos
        if c == "[":
            self.pos += 1
            u = self.word(stop=",]")
            if self.peek() != ",":
                self.error("expected ',' in commutator")
            self.pos += 1
            v = self.word(stop="]")
            if self.peek() != "]":
                self.error("unclosed '['", start)
            self.pos += 1
            w = commutator(u, v)
        elif c == "(":
            self.pos += 1
            w = self.word(stop=")")
            if self.peek() != ")":
                self.error("unclosed '('", start)
            self.pos += 1
        elif c in ")],^":
            self.error(f"unexpected {c!r}")
        else:
            for name in self.names:
                if self.text.startswith(name, self.pos):
                    self.pos += len(name)
                    w = Word(((self.index[name], 1),), self.alphabet)
                    break
            else:
                if _ONE.match(self.text, self.pos):  # the identity, as printed by str()
                    self.pos += 1
                    return Word((), self.alphabet)
                m = re.compile(r"[^\s\[\]\(\),\^*.]+").match(self.text, self.pos)
                token = m.group(0) if m else self.text[self.pos]
                self.error(f"unknown generator {token!r}")
        while self.peek() == "^":
            self.pos += 1
            self.skip()
            m = _INT.match(self.text, self.pos)
            if not m:
                self.error("expected integer exponent")
            e = int(m.group(0))
            if e == 0:
                self.error("zero exponent")
            self.pos = m.end()
            w = power(w, e)
        return w


def parse_word(text: str, alphabet: Sequence[str]) -> Word:
    """Parse ``text`` over ``alphabet``.

    Grammar: ``word := factor+``, ``factor := gen | factor^int | [word,word] | (word)``.
    Whitespace (and ``*``) between factors is ignored.  ``[u,v]`` expands to
    ``u^-1 v^-1 u v``.

    >>> str(parse_word("[x, y]", ["x", "y"]))
    'x^-1 y^-1 x y'
    """
    return _Parser(text, alphabet).parse()


# -- Magnus expansion ----------------------------------------------------------

@dataclass(frozen=True)
class TruncatedSeries:
    """Element of F_p<<X_1..X_n>> modulo terms of degree > ``N``.

    ``coeffs`` maps monomials (tuples of generator indices) to nonzero
    residues mod ``p``.
    """

    p: int
    N: int
    coeffs: dict

    def __getitem__(self, monomial: tuple[int, ...]) -> int:
        return self.coeffs.get(tuple(monomial), 0)

    def degree_part(self, k: int) -> dict:
        return {m: c for m, c in self.coeffs.items() if len(m) == k}

    def __mul__(self, other: TruncatedSeries) -> TruncatedSeries:
        p, N = self.p, self.N
        out: dict = {}
        for m1, c1 in self.coeffs.items():
            room = N - len(m1)
            for m2, c2 in other.coeffs.items():
                if len(m2) <= room:
                    m = m1 + m2
                    out[m] = (out.get(m, 0) + c1 * c2) % p
        return TruncatedSeries(p, N, {m: c for m, c in out.items() if c})

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.p, self.N, self.coeffs) == (other.p, other.N, other.coeffs)

    def __hash__(self):
        return hash((self.p, self.N, frozenset(self.coeffs.items())))


def _binom(e: int, k: int) -> int:
    # generalized binomial coefficient, valid for negative e
    if e >= 0:
        return comb(e, k)
    return (-1) ** k * comb(-e + k - 1, k)


def _syllable_series(g: int, e: int, p: int, N: int) -> TruncatedSeries:
    coeffs = {}
    for k in range(N + 1):
        c = _binom(e, k) % p
        if c:
            coeffs[(g,) * k] = c
    return TruncatedSeries(p, N, coeffs)


def magnus_truncated(w: Word, p: int, N: int) -> TruncatedSeries:
    """Image of ``w`` under ``g -> 1 + X_g`` truncated above degree ``N``.

    Syllables ``g^e`` expand exactly as ``sum_k binom(e, k) X_g^k``, which for
    negative ``e`` is the full geometric-type series.
    """
    if N < 1:
        raise ValueError("cutoff N must be >= 1")
    series = TruncatedSeries(p, N, {(): 1})
    for g, e in w.syllables:
        series = series * _syllable_series(g, e, p, N)
    return series
