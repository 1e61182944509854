from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftcorr import functor as fn
from liftcorr import modality as mo
from liftcorr.errors import BudgetExceeded, DistNotEnumerable, MalformedTerm, NotInGrammarG
from liftcorr.functor import Const, Coprod, Dist, FDist, Id, Inj, Pow, Prod


def test_apply_map_examples():
    f = {"a": "c", "b": "c", "x": "y"}
    assert fn.apply_map(Id(), f, "x") == "y"
    assert fn.apply_map(Pow(Id()), f, frozenset({"a", "b"})) == frozenset({"c"})
    mu = FDist({"a": F(1, 2), "b": F(1, 2)})
    assert fn.apply_map(Dist(Id()), f, mu) == FDist({"c": 1})


def test_fdist_validation():
    with pytest.raises(MalformedTerm):
        FDist({"a": F(1, 2)})
    with pytest.raises(MalformedTerm):
        FDist({"a": F(3, 2), "b": F(-1, 2)})


def test_enumeration_examples():
    X = ["x", "y"]
    assert len(fn.enumerate_terms(Pow(Id()), X)) == 4
    assert len(fn.enumerate_terms(Coprod((Const(("a",)), Id())), X)) == 3
    assert len(fn.enumerate_terms(Dist(Id()), X, dist_grid=2)) == 3
    with pytest.raises(BudgetExceeded):
        fn.enumerate_terms(Pow(Id()), list(range(30)), budget=1000)


SHAPES = [Id(), Const(("a", "b")), Coprod((Id(), Id())), Prod((Id(), Id())), Pow(Id()),
          Prod((Const((0, 1)), Id(), Id())), Coprod((Const(("a",)), Prod((Id(), Const((0, 1)))))),
          Dist(Id()), Pow(Coprod((Id(), Const(("a",)))))]


@pytest.mark.parametrize("G", SHAPES, ids=fn.show)
def test_count_matches_enumeration(G):
    for n in (1, 2, 3):
        X = [f"x{i}" for i in range(n)]
        q = 2 if fn.contains_dist(G) else None
        terms = fn.enumerate_terms(G, X, q)
        assert len(terms) == len(set(terms)) == fn.count_terms(G, n, q)
        for t in terms:
            fn.validate_term(G, t, X)


def test_coupling_examples():
    assert fn.couplings(Id(), "x", "y") == [("x", "y")]
    assert fn.couplings(Coprod((Id(), Id())), Inj(0, "x"), Inj(1, "y")) == []
    got = fn.couplings(Pow(Id()), frozenset({"x"}), frozenset({"y", "z"}))
    assert got == [frozenset({("x", "y"), ("x", "z")})]
    with pytest.raises(DistNotEnumerable):
        fn.couplings(Dist(Id()), FDist({"x": 1}), FDist({"y": 1}))


@pytest.mark.parametrize("G", SHAPES[:7] + [Dist(Id())], ids=fn.show)
def test_couplings_match_definition(G):
    X = ["x", "y"]
    q = 2 if fn.contains_dist(G) else None
    terms = fn.enumerate_terms(G, X, q)
    for t1 in terms:
        for t2 in terms:
            fast = fn.couplings(G, t1, t2, q)
            slow = fn.couplings_by_definition(G, t1, t2, X, q)
            assert sorted(map(repr, fast)) == sorted(map(repr, slow))


def test_decompose_examples():
    assert len(fn.decompose(Coprod((Id(), Const(("a",))))).components) == 2
    assert len(fn.decompose(Const(("a", "b", "c"))).components) == 3
    assert len(fn.decompose(Prod((Id(), Id()))).components) == 1


def test_decomposition_roundtrip():
    G = Coprod((Prod((Const((0, 1)), Id())), Const(("a",))))
    dec = fn.decompose(G)
    for t in fn.enumerate_terms(G, ["x", "y"]):
        i, s = dec.to_component(t)
        assert dec.from_component(i, s) == t


def test_normal_form_examples():
    assert fn.normalize_G(Id()).A == () and len(fn.normalize_G(Id()).B) == 1
    nf = fn.normalize_G(Const(("a", "b")))
    assert set(nf.A) == {"a", "b"} and nf.B == ()
    nf = fn.normalize_G(Prod((Const((0, 1)), Id())))
    assert nf.A == () and len(nf.B) == 2
    with pytest.raises(NotInGrammarG):
        fn.normalize_G(Prod((Id(), Id())))
    with pytest.raises(NotInGrammarG):
        fn.normalize_G(Pow(Id()))


@pytest.mark.parametrize("G", [Id(), Const(("a", "b")), Prod((Const((0, 1)), Id())),
                               Coprod((Const(("ok",)), Id())), Coprod((Id(), Prod((Id(), Const(("u",))))))],
                         ids=fn.show)
def test_normal_form_is_bijective(G):
    nf = fn.normalize_G(G)
    X = ["x", "y"]
    terms = fn.enumerate_terms(G, X)
    normals = fn.enumerate_terms(nf.as_functor(), X)
    assert len(terms) == len(normals)
    assert {nf.to_normal(t) for t in terms} == set(normals)
    assert all(nf.from_normal(nf.to_normal(t)) == t for t in terms)


def test_push_pow_examples():
    iso = fn.push_pow(Pow(Coprod((Id(), Id()))))
    assert iso.functor == Prod((Pow(Id()), Pow(Id())))
    iso = fn.push_pow(Pow(Const(("a",))))
    assert isinstance(iso.functor, Const) and len(iso.functor.atoms) == 2


@pytest.mark.parametrize("G", [Coprod((Id(), Id())), Const(("a",)), Prod((Const((0, 1)), Id())),
                               Coprod((Const(("a", "b")), Id()))], ids=fn.show)
def test_push_pow_is_bijective(G):
    P = Pow(G)
    iso = fn.push_pow(P)
    for n in (1, 2):
        X = [f"x{i}" for i in range(n)]
        left = fn.enumerate_terms(P, X)
        right = fn.enumerate_terms(iso.functor, X)
        assert len(left) == len(right)
        assert {iso.to_pushed(T) for T in left} == set(right)
        assert all(iso.from_pushed(iso.to_pushed(T)) == T for T in left)


def test_push_pow_term_count_on_singleton():
    P = Pow(Prod((Const((0, 1)), Id())))
    assert fn.count_terms(P, 1) == fn.count_terms(fn.push_pow(P).functor, 1) == 4


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SHAPES), st.data())
def test_term_json_roundtrip(G, data):
    q = 2 if fn.contains_dist(G) else None
    t = data.draw(st.sampled_from(fn.enumerate_terms(G, ["x", "y"], q)))
    assert fn.term_from_json(G, fn.term_to_json(G, t)) == t


def test_functor_json_roundtrip():
    G = Prod((Const((0, 1)), fn.annotate(Pow(Id()), mo.MeetAll()), Dist(Coprod((Const(("ok",)), Id())))))
    data = fn.functor_to_json(G, mo.modality_to_json)
    back = fn.functor_from_json(data, mo.modality_from_json)
    assert back == G and back.children[1].annotation == mo.MeetAll()


def test_malformed_terms():
    with pytest.raises(MalformedTerm):
        fn.validate_term(Const(("a",)), "b")
    with pytest.raises(MalformedTerm):
        fn.validate_term(Prod((Id(), Id())), ("x",))
    with pytest.raises(MalformedTerm):
        fn.term_from_json(Const(("a",)), "z")
