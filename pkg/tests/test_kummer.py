from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import kummer_torsion_exact

from ppg.kummer import (CycloStatus, KummerStatus, candidate_orientation, cyclotomicity_search,
                        is_kummerian, ktheta_module, twisted_derivative, twisted_derivative_exact)
from ppg.linalg import to_residue
from ppg.presentations import Orientation, make_demushkin, make_f1, make_f2, parse_dsl
from ppg.report import f2_paper_chain
from ppg.subgroups import restrict_orientation, rewrite_index_p
from ppg.words import Word

ALPHA = ("a", "b", "c")
THETA = Orientation(3, {"a": Fraction(4), "b": Fraction(-1, 2), "c": Fraction(1)})
words = st.lists(st.tuples(st.integers(0, 2), st.integers(-3, 3).filter(bool)), max_size=8).map(
    lambda s: Word(tuple(s), ALPHA))


@settings(max_examples=80)
@given(words, words)
def test_cocycle_identity(u, v):
    Du, Dv, Duv = (twisted_derivative_exact(w, THETA) for w in (u, v, u * v))
    t = THETA.of_word(u)
    assert Duv == [a + t * b for a, b in zip(Du, Dv)]


@settings(max_examples=60)
@given(words)
def test_residue_route_matches_exact(w):
    N = 8
    exact = twisted_derivative_exact(w, THETA)
    assert list(twisted_derivative(w, THETA, N).vector) == [to_residue(x, 3, N) for x in exact]


def test_theta_of_derivative():
    # f(D(w)) = theta(w) - 1 with f(v) = sum v_i (theta(g_i) - 1)
    w = Word(((0, 2), (1, -1), (2, 3), (0, -1)), ALPHA)
    D = twisted_derivative_exact(w, THETA)
    assert sum(d * (THETA.values[g] - 1) for d, g in zip(D, ALPHA)) == THETA.of_word(w) - 1


def test_relators_must_be_theta_trivial():
    G, _ = make_demushkin(3, 1, 2)
    with pytest.raises(ValueError):
        ktheta_module(G, Orientation(3, {"x1": Fraction(4)}))


def test_demushkin_infinite_q():
    G, theta = make_demushkin(3, None, 2)
    assert theta.is_trivial()
    assert is_kummerian(G, theta).status is KummerStatus.KUMMERIAN


def test_precision_saturation_is_inconclusive():
    G, _ = parse_dsl(f"group G {{ prime 3; generators a b; relator a^{3 ** 25} [a,b]; }}")
    theta = Orientation.trivial(G)
    low = is_kummerian(G, theta, N=20)
    assert low.status is KummerStatus.INCONCLUSIVE
    high = is_kummerian(G, theta, N=30)
    assert high.status is KummerStatus.NOT_KUMMERIAN and high.witness_valuation == 25


def test_paper_chain_stable_in_precision():
    G = make_f2(3, 1, 2, "x1", "x2")
    theta, _ = candidate_orientation(G)
    phi_u, phi_v = f2_paper_chain(G)
    U = rewrite_index_p(G, phi_u)
    V = rewrite_index_p(U, phi_v)
    tv = restrict_orientation(restrict_orientation(theta, U), V)
    a, b = is_kummerian(V, tv, 20), is_kummerian(V, tv, 40)
    assert a.status is b.status is KummerStatus.NOT_KUMMERIAN
    assert a.torsion == b.torsion and a.free_rank == b.free_rank


def test_candidate_orientations():
    theta, _ = candidate_orientation(make_f2(3, 1, 2, "x1", "x2"))
    assert theta.values["y1"] == Fraction(-1, 2)
    none, why = candidate_orientation(make_f2(3, 1, 2, "y1", "x2"))
    assert none is None and "y1" in why
    assert candidate_orientation(make_f1(3, 1, 2))[0].is_trivial()


def test_parallel_search_matches_sequential():
    G = make_f1(3, 1, 2)
    theta = Orientation.trivial(G)
    a = cyclotomicity_search(G, theta, depth=1, jobs=1, exhaustive=True)
    b = cyclotomicity_search(G, theta, depth=1, jobs=2, exhaustive=True)
    assert a.as_json() == b.as_json()
    assert a.witnesses == 1  # only ker(y1 -> 1); see the cover oracle


def test_depth_zero():
    G, theta = make_demushkin(3, 1, 2)
    res = cyclotomicity_search(G, theta, depth=0)
    assert res.status is CycloStatus.NO_WITNESS_TO_DEPTH and res.examined == [1]


@pytest.mark.parametrize("G,theta", [make_demushkin(3, 1, 2), make_demushkin(5, 1, 2),
                                     (make_f2(3, 1, 2, "x1", "x2"),
                                      candidate_orientation(make_f2(3, 1, 2, "x1", "x2"))[0]),
                                     (make_f2(3, 2, 2, "y2", "x1"),
                                      candidate_orientation(make_f2(3, 2, 2, "y2", "x1"))[0])])
def test_torsion_matches_exact_oracle_on_subgroups(G, theta):
    from ppg.subgroups import enumerate_index_p
    for phi in enumerate_index_p(G):
        U = rewrite_index_p(G, phi)
        tu = restrict_orientation(theta, U)
        v = is_kummerian(U, tu)
        assert list(v.torsion) == kummer_torsion_exact(U, tu), phi
