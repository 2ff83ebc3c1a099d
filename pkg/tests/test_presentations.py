from __future__ import annotations

from fractions import Fraction

import pytest

from ppg.presentations import (DslError, FamilyError, Orientation, make_chain_amalgam, make_demushkin,
                               make_f1, make_f2, parse_dsl, parse_family_spec, to_dsl, validate_minimal)
from ppg.subgroups import rewrite_index_p


def test_family_shapes():
    G, theta = make_demushkin(3, 1, 2)
    assert G.n == 4 and len(G.relators) == 1
    assert theta.values["y1"] == Fraction(-1, 2)
    assert str(make_f1(3, 1, 2).relators[0]) == "x1^-3 y1^-1 x1^3 y1 x2^-1 y2^-1 x2 y2"
    F2 = make_f2(3, 1, 2, "x1", "x2")
    assert [str(r) for r in F2.relators][1] == "x1^-1 x2^-1 x1 x2"
    assert len(make_chain_amalgam(3, 4).relators) == 3


@pytest.mark.parametrize("bad", [
    lambda: make_f1(3, 1, 1),
    lambda: make_f1(2, 1, 2),
    lambda: make_f2(3, 1, 2, "x1", "y1"),
    lambda: make_f2(3, 1, 2, "x1", "x1"),
    lambda: make_f2(3, 1, 2, "x1", "z9"),
    lambda: make_chain_amalgam(3, 2),
    lambda: make_f1(3, None, 2),
])
def test_family_constraints(bad):
    with pytest.raises(FamilyError):
        bad()


@pytest.mark.parametrize("spec", ["family:f1(3,1,2)", "f2(3,1,2,x1,x2)", "family demushkin(5,inf,3)",
                                  "family:chain(3,3)"])
def test_family_spec(spec):
    G, _ = parse_family_spec(spec)
    assert validate_minimal(G)


def test_minimality_diagnostics():
    G, _ = parse_dsl("group G { prime 3; generators a b; relator a^2 [a,b]; }")
    rep = validate_minimal(G)
    assert not rep and "exponent sum 2 in a" in rep.diagnostics[0]


def test_dsl_with_orientation():
    text = """
    # explicit second-family group
    group F2 {
      prime 3;
      generators x1 y1 x2 y2;
      relator x1^3 [x1,y1] [x2,y2];
      relator [x1,x2];
      orientation y1 = -1/2;
    }
    """
    G, theta = parse_dsl(text)
    assert G.relators == make_f2(3, 1, 2, "x1", "x2").relators
    assert theta.values["y1"] == Fraction(-1, 2) and theta.of_word(G.word("y1^2")) == Fraction(1, 4)


def test_dsl_family_line():
    G, theta = parse_dsl("family demushkin(3,1,2)\n")
    assert G.family.kind == "demushkin" and theta is not None


@pytest.mark.parametrize("text,line,col", [
    ("group G {\n  prime 3;\n  generators a b;\n  relator a^3 [a,b;\n}", 4, 15),
    ("group G {\n  prime 3;\n  generators a b;\n  relater a^3;\n}", 4, 3),
    ("group G {\n  prime 3;\n  generators a b\n}", 4, 1),
])
def test_dsl_errors_have_positions(text, line, col):
    with pytest.raises(DslError) as err:
        parse_dsl(text)
    assert err.value.line == line
    if col:
        assert err.value.column == col


def test_dsl_roundtrip_of_rewrite():
    G, theta = make_demushkin(3, 1, 2)
    U = rewrite_index_p(G, (0, 1, 0, 0))
    from ppg.subgroups import restrict_orientation
    th = restrict_orientation(theta, U)
    text = to_dsl(U.presentation, th, "provenance line")
    H, th2 = parse_dsl(text)
    assert H.generators == U.generators and H.relators == U.relators
    assert dict(th2.values) == {g: v for g, v in th.values.items() if v != 1}
    assert text.startswith("# provenance line")


def test_orientation_checks():
    G, _ = make_demushkin(3, 1, 2)
    with pytest.raises(ValueError):
        Orientation(3, {"x1": Fraction(2)})  # not in 1 + 3 Z_3
    assert Orientation.trivial(G).is_trivial()
