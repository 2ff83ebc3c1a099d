from __future__ import annotations

import itertools

import numpy as np
import pytest

from ppg.cohomology import cup, cup_table
from ppg.massey import (LiftOutcome, MasseyStatus, Mode, construct_f1_lift, cup_chain_check, evaluate_word,
                        find_lift, massey_set3, massey_verdict, parse_chars, strong_vanishing_scan,
                        verify_homomorphism)
from ppg.presentations import Presentation, make_demushkin, make_f1, make_f2
from ppg.subgroups import enumerate_index_p
from ppg.words import parse_word


def test_parse_chars():
    G = make_f1(3, 1, 2)
    assert parse_chars("0,1,0,0;1,0,0,0", G) == [(0, 1, 0, 0), (1, 0, 0, 0)]
    with pytest.raises(ValueError):
        parse_chars("0,1,0", G)
    with pytest.raises(ValueError):
        parse_chars("0,1,0,x", G)


def test_characters_must_kill_relators():
    G, _ = make_demushkin(3, None, 1)  # <x, y | [x, y]>
    bad = Presentation(3, ("a", "b"), (parse_word("a b^3 [a,b]", ("a", "b")),))
    with pytest.raises(ValueError):
        massey_verdict(bad, [(1, 0), (1, 0)])


def test_n2_is_the_cup_product():
    # a 2-fold Massey product vanishes iff the cup product does
    G, _ = make_demushkin(3, 1, 2)
    T = cup_table(G)
    reps = enumerate_index_p(G)
    for a, b in itertools.product(reps[:12], reps[:12]):
        v = massey_verdict(G, [a, b])
        assert (v.status is MasseyStatus.VANISHES) == (not cup(a, b, T).any())
        if v.status is not MasseyStatus.VANISHES:
            assert v.status is MasseyStatus.DEFINED_ONLY  # always defined for n = 2


def test_nonzero_cup_chain_not_defined():
    G, _ = make_demushkin(3, 1, 2)
    chars = parse_chars("1,0,0,0;0,1,0,0;1,0,0,0", G)
    assert not cup_chain_check(chars, cup_table(G))
    assert massey_verdict(G, chars).status is MasseyStatus.NOT_DEFINED


def test_certificate_is_a_homomorphism():
    G, _ = make_demushkin(3, 1, 2)
    chars = parse_chars("1,0,0,0;0,0,1,0;1,0,0,0", G)
    v = massey_verdict(G, chars)
    assert v.status is MasseyStatus.VANISHES
    rep = v.certificate
    assert verify_homomorphism(rep, G)
    for h, a in enumerate(chars):
        for g, name in enumerate(G.generators):
            assert rep.matrix(name)[h, h + 1] == a[g]
    # a superdiagonal entry that disagrees with the characters is rejected
    mats = [[list(row) for row in M] for M in rep.matrices]
    mats[0][0][1] = (mats[0][0][1] + 1) % 3
    bad = type(rep)(rep.p, rep.n, rep.generators, tuple(tuple(map(tuple, M)) for M in mats), rep.mode, rep.chars)
    assert not verify_homomorphism(bad, G)
    # so is a matrix that is not unitriangular
    mats = [[list(row) for row in M] for M in rep.matrices]
    mats[2][3][0] = 1
    bad = type(rep)(rep.p, rep.n, rep.generators, tuple(tuple(map(tuple, M)) for M in mats), rep.mode, rep.chars)
    assert not verify_homomorphism(bad, G)


def test_defined_only_example():
    # Z/3: any lift of x has (M - I)^3 with corner 1, so <a, a, a> is defined but nonzero
    G = Presentation(3, ("x",), (parse_word("x^3", ("x",)),))
    v = massey_verdict(G, [(1,), (1,), (1,)])
    assert v.status is MasseyStatus.DEFINED_ONLY
    assert v.certificate.mode is Mode.MODULO_CENTER and verify_homomorphism(v.certificate, G)


def test_budget_exhaustion_is_unknown():
    # n = 4 branches over the projection of the middle layer
    G = make_f2(3, 1, 2, "x1", "x2")
    tup = [(0, 0, 0, 0)] * 4
    assert find_lift(G, tup, Mode.FULL).nodes >= 2
    assert find_lift(G, tup, Mode.FULL, budget=1).outcome is LiftOutcome.UNKNOWN
    assert massey_verdict(G, tup, budget=1).status is MasseyStatus.UNKNOWN
    with pytest.raises(ValueError):
        find_lift(G, tup, Mode.FULL, budget=0)


def test_massey_set3_contains_zero_iff_vanishes():
    G, _ = make_demushkin(3, 1, 2)
    T = cup_table(G)
    reps = enumerate_index_p(G)
    checked = 0
    for a, b, c in itertools.product(reps[:6], repeat=3):
        if not cup_chain_check([a, b, c], T):
            continue
        offset, dirs = massey_set3(G, [a, b, c])
        # 0 lies in offset + span(dirs)
        contains_zero = np.linalg.matrix_rank(np.vstack([dirs, offset])) == np.linalg.matrix_rank(dirs) \
            if len(dirs) else not offset.any()
        assert contains_zero == (massey_verdict(G, [a, b, c]).status is MasseyStatus.VANISHES)
        checked += 1
    assert checked > 20


@pytest.mark.parametrize("n", [3])
def test_f1_construction(n):
    G = make_f1(3, 1, 2)
    T = cup_table(G)
    reps = enumerate_index_p(G)
    done = 0
    for tup in itertools.product(reps[::7], repeat=n):
        if cup_chain_check(tup, T):
            rep = construct_f1_lift(G, tup)
            assert verify_homomorphism(rep, G)
            done += 1
    assert done > 10


def test_f1_construction_rejects_long_tuples():
    G = make_f1(3, 1, 2)
    with pytest.raises(ValueError):
        construct_f1_lift(G, [(0, 0, 1, 0)] * 4)


def test_scan_determinism_and_weights():
    G, _ = make_demushkin(3, 1, 2)
    a = strong_vanishing_scan(G, 3, sample=40, seed=3)
    b = strong_vanishing_scan(G, 3, sample=40, seed=3)
    assert a.as_json() == b.as_json()
    full = strong_vanishing_scan(make_f2(3, 1, 2, "x1", "x2"), 3)
    # weights count every admissible tuple exactly once
    G2 = make_f2(3, 1, 2, "x1", "x2")
    T = cup_table(G2)
    chars = [tuple([0] * 4)] + [tuple(int(x) for x in v) for v in itertools.product(range(3), repeat=4)][1:]
    brute = sum(1 for a in chars for b in chars if not cup(a, b, T).any() for c in chars if not cup(b, c, T).any())
    assert full.admissible == brute == sum(full.counts.values())


def test_evaluate_word_inverse():
    G, _ = make_demushkin(3, 1, 2)
    rep = massey_verdict(G, parse_chars("1,0,0,0;0,0,1,0;1,0,0,0", G)).certificate
    mats = [np.array(rep.matrix(g)) for g in G.generators]
    w = parse_word("x1 y2^-2 x1^-1 y2^2", G.generators)
    assert np.array_equal(evaluate_word(w * ~w, mats, 3), np.eye(4, dtype=np.int64))
