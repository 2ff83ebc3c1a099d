from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import cover_abelianization
from ppg.massey import find_lift, Mode, evaluate_word
from ppg.presentations import make_chain_amalgam, make_demushkin, make_f1, make_f2, parse_dsl
from ppg.subgroups import (abelianization, characters, enumerate_index_p, euler_characteristic_sub,
                           normalize_character, restrict_orientation, rewrite_index_p, rewrite_tower,
                           to_parent_word)
from ppg.words import exponent_sums, substitute


@pytest.mark.parametrize("G,count", [(make_f1(3, 1, 2), 40), (make_demushkin(2, 2, 2)[0], 15),
                                     (make_chain_amalgam(3, 3), 364), (make_f2(5, 1, 2, "x1", "x2"), 156)])
def test_enumerate_counts(G, count):
    subs = enumerate_index_p(G)
    assert len(subs) == count == len(set(subs))
    assert all(normalize_character(s, G.p) == s for s in subs)


def test_characters_of_non_minimal_group():
    G, _ = parse_dsl("group G { prime 3; generators a b; relator a b^3; }")
    # a = b^-3 so H^1 is spanned by a single character
    assert len(characters(G)) == 1 and len(enumerate_index_p(G)) == 1


@pytest.mark.parametrize("G", [make_f1(3, 1, 2), make_f2(3, 1, 2, "x1", "x2"), make_chain_amalgam(3, 3)])
def test_rewrite_shape_and_oracle(G):
    for phi in enumerate_index_p(G)[:12]:
        U = rewrite_index_p(G, phi)
        assert U.n == G.p * (G.n - 1) + 1
        assert len(U.relators) == G.p * len(G.relators)
        for e in U.expressions:
            assert sum(a * s for a, s in zip(phi, exponent_sums(e))) % G.p == 0
        inv = abelianization(U)
        assert (inv.free_rank, list(inv.torsion)) == cover_abelianization(G, phi)


def test_rewritten_relators_hold_in_finite_quotients():
    # a homomorphism G -> U_4(F_3) must kill every rewritten relator
    G = make_f1(3, 1, 2)
    rep = find_lift(G, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)], Mode.FULL).rep
    mats = [np.array(rep.matrix(g)) for g in G.generators]
    for phi in enumerate_index_p(G)[:8]:
        U = rewrite_index_p(G, phi)
        for r in U.relators:
            R = evaluate_word(to_parent_word(U, r), mats, 3)
            assert np.array_equal(R, np.eye(4, dtype=np.int64))


def test_tower_and_root_expressions():
    G = make_f2(3, 1, 2, "x1", "x2")
    U = rewrite_index_p(G, (0, 0, 1, 0))
    V = rewrite_tower(G, [(0, 0, 1, 0), enumerate_index_p(U)[0]])
    assert V.chain[0] == (0, 0, 1, 0) and V.root is G
    for name, w in zip(V.generators, V.root_expressions):
        assert all(c in G.generators for c in (G.generators[g] for g, _ in w.syllables)), name


def test_euler_characteristic_sub():
    G = make_f2(3, 1, 2, "x1", "x2")
    E, h1, h2 = euler_characteristic_sub(rewrite_index_p(G, (0, 0, 1, 0)))
    assert E == -3 and h1 - h2 == 4


def test_restrict_orientation_multiplicative():
    G, theta = make_demushkin(3, 1, 2)
    U = rewrite_index_p(G, (0, 1, 0, 0))
    th = restrict_orientation(theta, U)
    for name, w in zip(U.generators, U.expressions):
        assert th.values[name] == theta.of_word(w)
    assert th.values["u"] == theta.values["y1"] ** 3


def test_rejects_bad_characters():
    G = make_f1(3, 1, 2)
    with pytest.raises(ValueError):
        rewrite_index_p(G, (0, 0, 0, 0))
    with pytest.raises(ValueError):
        rewrite_index_p(G, (1, 0))
