from fractions import Fraction as F

import pytest

from liftcorr import functor as fn
from liftcorr import lifting as lf
from liftcorr import modality as mo
from liftcorr.correspondence import (Universe, build_constant, build_coproduct, build_distribution,
                                     build_from_grammar, build_identity, build_powerset,
                                     build_product, compare_liftings, restrict_coproduct,
                                     restrict_product, roundtrip, single_modality, verify)
from liftcorr.errors import (ConditionNotEstablished, DistributivityNotEstablished,
                             IndexOutOfRange, NotAdditive, NotCoproductFree, NotInGrammar,
                             NotWellBehaved)
from liftcorr.functor import Id, Pow, Prod
from liftcorr.pseudometric import Pseudometric
from liftcorr.quantale import (BoolQuantale, ChainQuantale, PowersetQuantale,
                               UnitRationalQuantale, diamond_m3)

B = BoolQuantale()
C2 = ChainQuantale(2, 1)
C4 = ChainQuantale(4, 1)
U = UnitRationalQuantale(1)


def small(Q, sizes=(1, 2)):
    return Universe(Q, sizes=sizes)


def test_identity_builder():
    c = build_identity(mo.IdentityMod(), B)
    assert c.F == Id() and c.gamma == (mo.IdentityMod(),)
    assert verify(c, small(B, (1, 2))).equal
    assert verify(build_identity(mo.Scale(F(1, 2)), C4), small(C4, (2,))).equal
    with pytest.raises(NotWellBehaved):
        build_identity(mo.ConstTop(), B)


def test_constant_builder():
    c = build_constant(("a", "b"), B)
    rep = verify(c, small(B))
    assert rep.equal
    d = Pseudometric.discrete(B, ["x"])
    assert c.coupling(d, "a", "a").value is True and c.coupling(d, "a", "b").value is False
    empty = build_constant((), B)
    assert empty.gamma == () and fn.enumerate_terms(empty.F, ["x"]) == []


def test_coproduct_builder():
    i = build_identity(mo.IdentityMod(), B)
    c = build_coproduct([i, i])
    assert verify(c, small(B)).equal
    single = build_coproduct([i])
    assert sum(isinstance(g, mo.TopAt) for g in single.gamma) == 1
    assert verify(single, small(B)).equal
    r = restrict_coproduct(c, 1)
    assert compare_liftings(r, i, small(B))[0] == "equal"
    assert compare_liftings(r, i, small(B), which="codensity")[0] == "equal"
    with pytest.raises(IndexOutOfRange):
        restrict_coproduct(c, 2)
    k = build_constant(("a",), C2)
    assert verify(restrict_coproduct(build_coproduct([k, build_identity(mo.IdentityMod(), C2)]), 0),
                  small(C2)).equal


def test_product_builder():
    i = build_identity(mo.IdentityMod(), C2)
    delta = build_product([i, i])
    assert verify(delta, small(C2)).equal
    assert verify(build_product([build_identity(mo.IdentityMod(), B)] * 2), small(B)).equal
    assert compare_liftings(restrict_product(delta, 0), i, small(C2))[0] == "equal"
    one = build_product([i])
    assert verify(one, small(C2)).equal
    with pytest.raises(NotCoproductFree):
        restrict_product(build_product([i, build_constant(("a", "b"), C2)]), 0)
    with pytest.raises(IndexOutOfRange):
        restrict_product(delta, 5)


def test_product_needs_distributivity():
    M3 = diamond_m3()
    with pytest.raises(DistributivityNotEstablished):
        build_product([build_identity(mo.IdentityMod(), M3)] * 2)


def test_single_modality_delta_fails():
    i = build_identity(mo.IdentityMod(), C2)
    rep = verify(single_modality(build_product([i, i])), small(C2))
    assert rep.verdict == "counterexample"
    assert rep.counterexample["weak_duality_violated"] is False
    # the payload re-evaluates to a genuine gap
    cx = rep.counterexample
    d = Pseudometric.from_json(C2, cx["metric"])
    G = Prod((Id(), Id()))
    t1, t2 = fn.term_from_json(G, cx["t1"]), fn.term_from_json(G, cx["t2"])
    tau = mo.MeetMod((mo.ProjCompose(0, mo.IdentityMod()), mo.ProjCompose(1, mo.IdentityMod())))
    assert C2.fmt(lf.coupling_lift(G, tau, d, t1, t2).value) == cx["coupling"]
    assert C2.fmt(lf.codensity_lift(G, (tau,), d, t1, t2).value) == cx["codensity"]
    assert cx["coupling"] != cx["codensity"]


def test_verify_is_reproducible():
    i = build_identity(mo.IdentityMod(), C2)
    c = single_modality(build_product([i, i]))
    a = verify(c, small(C2)).to_json()
    b = verify(c, small(C2)).to_json()
    assert a == b
    s1 = verify(c, Universe(C2, sizes=(3,), mode="sampled", samples=20, seed=3)).to_json()
    s2 = verify(c, Universe(C2, sizes=(3,), mode="sampled", samples=20, seed=3)).to_json()
    assert s1 == s2


def test_powerset_builder():
    assert verify(build_powerset(mo.MeetAll(), B), small(B, (1, 2, 3))).equal
    cmax = mo.ComposeId(mo.Scale(F(1, 2)), mo.MeetAll())
    c = build_powerset(cmax, C2)
    assert mo.EmptyTest() in c.gamma
    assert verify(c, small(C2, (1, 2, 3))).equal
    # with the bare modality alone the empty/non-empty pairs separate the liftings
    rep = verify(single_modality(c), small(C2, (1,)))
    assert rep.verdict == "counterexample"
    T = {fn.term_from_json(Pow(Id()), rep.counterexample[k]) for k in ("t1", "t2")}
    assert frozenset() in T
    P = PowersetQuantale(["a", "b"])
    tab = mo.Pushforward(mo.IdentityMod(), mo.MeetAll())
    with pytest.raises(ConditionNotEstablished):
        build_powerset(tab, P)
    assert build_powerset(mo.MeetAll(), P).provenance["rule"].startswith("powerset")


def test_distribution_builder():
    c = build_distribution(mo.IdentityMod(), U)
    assert c.tau == mo.Expect()
    assert verify(c, Universe(U, sizes=(2,), dist_grid=2)).equal
    assert verify(build_distribution(mo.Scale(F(1, 2)), U), Universe(U, sizes=(2,), dist_grid=2)).equal
    with pytest.raises(NotAdditive):
        build_distribution(mo.IdentityMod(), C2)
    with pytest.raises(NotAdditive):
        build_distribution(mo.MonotoneTable({0: 0}), U)


def _grammar(data, Q):
    return build_from_grammar(fn.functor_from_json(data, lambda m: mo.modality_from_json(m, Q)), Q)


def test_grammar_examples():
    stream = _grammar({"prod": [{"const": ["a", "b"]}, {"id": {}, "modality": {"scale": "1/2"}}]}, C4)
    assert verify(stream, small(C4)).equal
    nfa = _grammar({"prod": [{"const": [0, 1]},
                             {"pow": {"id": {}}, "modality": {"composeId": [{"scale": "1/2"}, {"meetAll": {}}]}}]}, C2)
    assert verify(nfa, small(C2)).equal
    lmp = _grammar({"dist": {"coprod": [{"const": ["ok"]}, {"id": {}}]},
                    "modality": {"scaledExpect": "1/2"}}, U)
    assert verify(lmp, Universe(U, sizes=(1, 2), dist_grid=2)).equal
    with pytest.raises(NotInGrammar):
        _grammar({"dist": {"prod": [{"id": {}}, {"id": {}}]}, "modality": {"expect": {}}}, U)


def test_json_keeps_annotations():
    nfa = _grammar({"prod": [{"const": [0, 1]}, {"pow": {"id": {}}, "modality": {"meetAll": {}}}]}, B)
    data = nfa.to_json()
    back = fn.functor_from_json(data["functor"], lambda m: mo.modality_from_json(m, B))
    assert back.children[1].annotation == mo.MeetAll()


def test_roundtrips():
    i = build_identity(mo.IdentityMod(), C2)
    assert roundtrip(build_coproduct([i, build_constant(("a",), C2)]), small(C2))["relation"] == "equal"
    r = roundtrip(build_product([i, i]), small(C2))
    assert r["ok"] and r["relation"] == "equal"
    # a tensor-combined product modality: original sits strictly below the rebuilt one
    tens = mo.TensorMod((mo.ProjCompose(0, mo.IdentityMod()), mo.ProjCompose(1, mo.IdentityMod())))
    base = build_product([i, i])
    from liftcorr.correspondence import Correspondence
    odd = Correspondence(base.F, tens, base.gamma, C2)
    r = roundtrip(odd, small(C2))
    assert r["ok"] and r["relation"] == "leq" and r["witness"] is not None
