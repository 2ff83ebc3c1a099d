from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import series_coefficients
from ppg.graded import (QuadraticAlgebra, Unsupported, dual_matches_cohomology, groebner_truncated,
                        hilbert_prefix, hilbert_prefix_linear, initial_forms, koszul_check,
                        lie_presentation_report, mildness_check, named_order, quadratic_dual, target_series)
from ppg.presentations import make_chain_amalgam, make_demushkin, make_f1, make_f2, parse_dsl


def algebra(p, n, mats):
    return QuadraticAlgebra.from_matrices(p, tuple("xyzw"[:n]), [np.array(m) for m in mats])


def commutative(p, n):
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            M = np.zeros((n, n), dtype=np.int64)
            M[i, j], M[j, i] = 1, -1
            mats.append(M)
    return algebra(p, n, mats)


quadratic = st.sampled_from([2, 3]).flatmap(lambda p: st.integers(2, 3).flatmap(
    lambda n: st.lists(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=n, max_size=n),
                       min_size=1, max_size=3).map(lambda mats: algebra(p, n, mats))))


@settings(max_examples=40, deadline=None)
@given(quadratic)
def test_groebner_route_matches_linear_algebra_oracle(A):
    assert hilbert_prefix(A, 5).coefficients == hilbert_prefix_linear(A, 5).coefficients


@settings(max_examples=25, deadline=None)
@given(quadratic)
def test_hilbert_series_independent_of_order(A):
    ref = hilbert_prefix(A, 5).coefficients
    for order in ([0, 1], [1, 0]):
        full = order + list(range(2, A.n))
        assert hilbert_prefix(A, 5, full).coefficients == ref


@settings(max_examples=40, deadline=None)
@given(quadratic)
def test_dual_is_an_involution(A):
    D = quadratic_dual(quadratic_dual(A))
    assert D.r == A.r
    from ppg.linalg import rref
    assert np.array_equal(rref(D.flat(), A.p)[0][:D.r], rref(A.flat(), A.p)[0][:A.r])


@pytest.mark.parametrize("G", [make_f1(3, 1, 2), make_f2(3, 1, 2, "x1", "x2"), make_chain_amalgam(3, 3),
                               make_demushkin(5, 1, 3)[0]])
def test_family_prefixes_against_macaulay_oracle(G):
    A = initial_forms(G)
    assert hilbert_prefix(A, 5).coefficients == hilbert_prefix_linear(A, 5).coefficients


def test_target_series():
    assert list(target_series(4, 1, 8).coefficients) == series_coefficients(4, 1, 8)
    assert list(target_series(6, 2, 6).coefficients) == series_coefficients(6, 2, 6)


def test_free_and_polynomial_algebras():
    free = algebra(3, 2, [])
    assert hilbert_prefix(free, 5).coefficients == (1, 2, 4, 8, 16, 32)
    poly = commutative(3, 3)
    assert hilbert_prefix(poly, 5).coefficients == (1, 3, 6, 10, 15, 21)
    kv = koszul_check(poly, 6)
    assert kv.consistent and kv.dual.coefficients[:5] == (1, 3, 3, 1, 0)  # exterior algebra


def test_numerical_koszul_failure():
    A = algebra(2, 2, [[[0, 1], [0, 1]], [[1, 1], [1, 0]]])
    kv = koszul_check(A, 6)
    assert not kv.consistent and kv.first_failure == 4
    assert kv.as_json()["consistent_to_degree"] == 3


def test_mildness_and_certificates():
    m = mildness_check(make_f2(3, 1, 2, "x1", "x2"), 8)
    assert m.status.value == "PASS" and m.certified
    assert m.as_json()["target"] == series_coefficients(4, 2, 8)
    # three commutators on three generators: gr is a polynomial ring, not 1/(1 - 3t + 3t^2)
    G, _ = parse_dsl("group G { prime 3; generators a b c; relator [a,b]; relator [a,c]; relator [b,c]; }")
    bad = mildness_check(G, 5)
    assert bad.status.value == "FAIL" and bad.first_mismatch == 3
    assert bad.prefix.coefficients[:4] == (1, 3, 6, 10)


def test_named_orders():
    gens = ("x1", "y1", "x2", "y2")
    assert len(set(named_order("decl", gens))) == 4
    assert named_order("rev", gens) != named_order("decl", gens)
    with pytest.raises(ValueError):
        named_order("lex-ish", gens)


def test_groebner_leading_words_quadratic_case():
    A = initial_forms(make_f1(3, 1, 2))
    G = groebner_truncated(A, named_order("decl", ("x1", "y1", "x2", "y2")), 4)
    assert all(len(w) == 2 for w in G.leading_words())


def test_dual_vs_cohomology_and_unsupported():
    for G in [make_f1(3, 1, 2), make_f2(3, 1, 2, "x1", "x2"), make_chain_amalgam(3, 3), make_demushkin(3, 1, 2)[0]]:
        assert dual_matches_cohomology(G)
    with pytest.raises(Unsupported):
        dual_matches_cohomology(make_chain_amalgam(3, 4))


def test_lie_presentations():
    assert lie_presentation_report(make_f1(3, 1, 2))["display"] == "<X1, Y1, X2, Y2 | [X2,Y2] = 0>"
    assert lie_presentation_report(make_f2(3, 1, 2, "x1", "x2"))["display"] == \
        "<X1, Y1, X2, Y2 | [X1,Y1] + [X2,Y2] = 0, [X1,X2] = 0>"
