from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from ppg.words import (AlphabetMismatch, Word, WordSyntaxError, commutator, exponent_sums, generator,
                       identity, invert, magnus_truncated, multiply, parse_word, power, substitute)

ALPHA = ("a", "b", "c")
syllables = st.lists(st.tuples(st.integers(0, 2), st.integers(-3, 3).filter(bool)), max_size=8)
words = syllables.map(lambda s: Word(tuple(s), ALPHA))


def test_reduction_and_printing():
    w = parse_word("a b b^-1 a^2 [a,b]", ALPHA)
    assert str(w) == "a^2 b^-1 a b"
    assert parse_word("1", ALPHA).is_identity()
    assert len(parse_word("a^3 b^-2", ALPHA)) == 5


def test_commutator_convention():
    a, b = generator(ALPHA, "a"), generator(ALPHA, "b")
    assert str(commutator(a, b)) == "a^-1 b^-1 a b"
    assert parse_word("[a,b]", ALPHA) == commutator(a, b)


@pytest.mark.parametrize("text", ["a^", "[a,b", "d", "a^x", "a ] b"])
def test_syntax_errors(text):
    with pytest.raises(WordSyntaxError):
        parse_word(text, ALPHA)


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        multiply(identity(ALPHA), identity(("a", "b")))


@given(words, words, words)
def test_group_axioms(u, v, w):
    assert multiply(multiply(u, v), w) == multiply(u, multiply(v, w))
    assert multiply(u, invert(u)).is_identity()
    assert multiply(identity(ALPHA), u) == u


@given(words)
def test_parse_roundtrip(w):
    assert parse_word(str(w), ALPHA) == w


@given(words, words)
def test_exponent_sums_additive(u, v):
    assert exponent_sums(u * v) == [x + y for x, y in zip(exponent_sums(u), exponent_sums(v))]


@given(words, st.integers(-3, 3))
def test_power(w, e):
    expected = identity(ALPHA)
    for _ in range(abs(e)):
        expected = expected * (w if e > 0 else ~w)
    assert power(w, e) == expected


@given(words, words)
def test_substitute_is_homomorphism(u, v):
    images = [parse_word("a b", ALPHA), parse_word("c^2", ALPHA), parse_word("[a,c]", ALPHA)]
    assert substitute(u * v, images) == substitute(u, images) * substitute(v, images)


@settings(max_examples=60)
@given(words, words, st.sampled_from([2, 3, 5]))
def test_magnus_is_multiplicative(u, v, p):
    N = 4
    assert magnus_truncated(u * v, p, N) == magnus_truncated(u, p, N) * magnus_truncated(v, p, N)


def test_magnus_commutator_leading_term():
    w = parse_word("[a,b]", ALPHA)
    S = magnus_truncated(w, 5, 2)
    assert S[(0, 1)] == 1 and S[(1, 0)] == 4 and S[(0,)] == 0
