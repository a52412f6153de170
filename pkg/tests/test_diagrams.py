import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skeinlab.diagrams import (
    DiagramTerm, Morphism, Trace, apply_slice, boundary_matching, canon_matching,
    canonical_diagram, compose, double_factorial, enumerate_matchings,
    hom_dimension, identity_term, morphism_from_json, morphism_to_json,
    required_toggles, tensor_right,
)
from skeinlab.errors import (
    CompositionMismatch, InvalidMatching, InvalidSlice, NotAnOSMorphism,
)
from skeinlab.scalars import ONE, Scalar


def test_apply_slice():
    assert apply_slice("UU", "X+", 1) == "UU"
    assert apply_slice("UD", "X+", 1) == "DU"
    assert apply_slice("U", "cupL", 1) == "UDU"
    assert apply_slice("U", "cupR", 2) == "UDU"
    assert apply_slice("UDU", "capR", 1) == "U"
    assert apply_slice("D", "togUD", 1) == "U"
    with pytest.raises(InvalidSlice):
        apply_slice("UU", "capR", 1)
    with pytest.raises(InvalidSlice):
        apply_slice("U", "togUD", 1)


def test_compose_identity():
    i = Morphism.identity("U")
    assert compose(i, i).terms == i.terms


def test_compose_stacks_slices():
    tog1 = Morphism.from_term(DiagramTerm("U", (("togDU", 1),)))
    tog2 = Morphism.from_term(DiagramTerm("D", (("togUD", 1),)))
    c = compose(tog2, tog1)  # togUD after togDU : U -> U
    (term, coeff), = c.terms.items()
    assert term.slices == (("togDU", 1), ("togUD", 1))
    assert coeff == ONE


def test_compose_mismatch():
    with pytest.raises(CompositionMismatch):
        compose(Morphism.identity("U"), Morphism.identity("D"))


def test_tensor_right():
    tog = Morphism.from_term(DiagramTerm("D", (("togUD", 1),)))
    up = Morphism.identity("U")
    m = tensor_right(tog, up)
    assert m.domain == "DU" and m.codomain == "UU"
    with pytest.raises(NotAnOSMorphism):
        tensor_right(up, tog)


def test_boundary_matching_identity():
    assert boundary_matching(identity_term("UU")) == canon_matching([(-1, 1), (-2, 2)])


def test_boundary_matching_cross():
    t = DiagramTerm("UU", (("X+", 1),))
    assert boundary_matching(t) == canon_matching([(-1, 2), (-2, 1)])


def test_boundary_matching_cup():
    t = DiagramTerm("", (("cupR", 1),))
    assert boundary_matching(t) == canon_matching([(1, 2)])


def test_enumerate_matchings():
    assert len(enumerate_matchings("U", "U")) == 1
    assert len(enumerate_matchings("UD", "UD")) == 3
    assert enumerate_matchings("U", "UU") == []
    for lam, mu in [("UU", "UU"), ("UDU", "D"), ("UDUD", "UDUD")]:
        got = enumerate_matchings(lam, mu)
        assert len(got) == hom_dimension(lam, mu)
        assert len(set(got)) == len(got)


def test_double_factorial():
    assert [double_factorial(n) for n in (-1, 1, 3, 5, 7)] == [1, 1, 3, 15, 105]


def test_required_toggles():
    m = canon_matching([(-1, 1)])
    assert required_toggles(m, "U", "U") == {((-1, 1)): 0} or required_toggles(m, "U", "U") == {(-1, 1): 0}
    assert required_toggles(canon_matching([(-1, 1)]), "D", "U")[(-1, 1)] == 1
    # cap on (U, U) needs a toggle
    assert required_toggles(canon_matching([(-1, -2)]), "UU", "")[(-2, -1)] == 1
    # cap on (U, D) does not
    assert required_toggles(canon_matching([(-1, -2)]), "UD", "")[(-2, -1)] == 0


def test_canonical_identity_matching():
    m = canon_matching([(-1, 1), (-2, 2)])
    d = canonical_diagram(m, "UD", "UD")
    assert d.slices == ()


def test_canonical_cup_with_toggle():
    m = canon_matching([(1, 2)])
    d = canonical_diagram(m, "", "UU")
    kinds = [k for k, _ in d.slices]
    assert kinds.count("togUD") + kinds.count("togDU") == 1
    assert boundary_matching(d) == m
    assert d.codomain == "UU"


def test_canonical_cap_plain():
    m = canon_matching([(-1, -2)])
    d = canonical_diagram(m, "DU", "")
    assert d.slices == (("capL", 1),)


def test_canonical_invalid():
    with pytest.raises(InvalidMatching):
        canonical_diagram(((-1, 1),), "UU", "UU")


_WORDS = st.text(alphabet="UD", min_size=0, max_size=4)


@settings(max_examples=120, deadline=None)
@given(_WORDS, _WORDS)
def test_canonical_roundtrip_all_matchings(lam, mu):
    for m in enumerate_matchings(lam, mu):
        d = canonical_diagram(m, lam, mu)
        assert d.codomain == mu
        assert boundary_matching(d) == m
        # reducedness: every pair of strands crosses at most once, all
        # crossings positive, at most one critical point per strand
        tr = Trace(d)
        tr.annotate()
        assert not tr.closed
        for c in tr.crossings.values():
            assert c["sign"] == 1
            assert len(set(c["strands"])) == 2
        pair_counts = {}
        for c in tr.crossings.values():
            key = frozenset(c["strands"])
            pair_counts[key] = pair_counts.get(key, 0) + 1
        assert all(v == 1 for v in pair_counts.values())
        for path in tr.open:
            crit = sum(1 for e in path if e[0] in ("min", "max"))
            togs = sum(1 for e in path if e[0] == "tog")
            assert crit <= 1
            assert togs <= 1


def test_json_roundtrip():
    t = DiagramTerm("UDDU", (("X+", 1), ("capL", 1), ("togUD", 1)))
    f = Morphism.from_term(t, Scalar.q_int(2))
    obj = morphism_to_json(f)
    g = morphism_from_json(obj)
    assert g.terms == f.terms
    assert obj["terms"][0]["slices"] == ["X+@1", "capL@1", "togUD@1"]
