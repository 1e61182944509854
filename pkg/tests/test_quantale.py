from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftcorr.errors import ElementNotInCarrier, NotALattice, NotEnumerable
from liftcorr.quantale import (BoolQuantale, ChainQuantale, PowersetQuantale, TableQuantale,
                               UnitRationalQuantale, check_distributivity, check_laws, diamond_m3,
                               quantale_from_json)

B = BoolQuantale()
C2 = ChainQuantale(2, 1)
C4 = ChainQuantale(4, 1)
P = PowersetQuantale(["c1", "c2"])


def test_tensor_examples():
    assert B.tensor(True, False) is False
    assert C4.tensor(F(1, 2), F(3, 4)) == 1
    assert P.tensor(frozenset({"c1"}), frozenset({"c1", "c2"})) == frozenset({"c1"})


def test_hom_examples():
    assert C4.hom(F(1, 4), F(3, 4)) == F(1, 2)
    assert B.hom(True, False) is False
    assert P.hom(frozenset({"c1"}), frozenset()) == frozenset({"c2"})


def test_powerset_hom_matches_adjunction():
    # the residual is the largest x with x (x) y <= z
    for y, z in product(P.carrier, P.carrier):
        best = [x for x in P.carrier if P.leq(P.tensor(x, y), z)]
        assert P.hom(y, z) == max(best, key=len)


def test_euclid_examples():
    assert C4.euclid(F(1, 4), F(3, 4)) == F(1, 2)
    assert B.euclid(True, True) is True
    assert P.euclid(frozenset({"c1"}), frozenset({"c1", "c2"})) == frozenset({"c1"})


def test_agg_examples():
    assert C2.agg("join", []) == 1
    assert C2.agg("meet", []) == 0
    assert C2.agg("meet", [F(1, 2), 1]) == 1


def test_element_checks():
    with pytest.raises(ElementNotInCarrier):
        C4.tensor(F(1, 3), 0)
    with pytest.raises(ElementNotInCarrier):
        B.tensor(1, True)
    with pytest.raises(ElementNotInCarrier):
        P.parse("c1")


@pytest.mark.parametrize("Q", [B, C2, C4, ChainQuantale(3, 2), P, PowersetQuantale(["a", "b", "c"])],
                         ids=str)
def test_builtins_satisfy_laws(Q):
    rep = check_laws(Q)
    assert rep.passed, rep.failures()
    for kind in ("binary", "join-infinite", "meet-infinite", "complete"):
        assert check_distributivity(Q, kind).holds


def test_unit_rational_laws_are_partial():
    U = UnitRationalQuantale(1)
    rep = check_laws(U)
    assert rep.partial and rep.passed
    with pytest.raises(NotEnumerable):
        check_distributivity(U, "binary")
    with pytest.raises(NotEnumerable):
        U.carrier


def test_m3_is_not_distributive():
    Q = diamond_m3()
    r = check_distributivity(Q, "binary")
    assert not r.holds
    x, y, z = r.witness
    assert Q.meet2(Q.join2(x, z), Q.join2(y, z)) != Q.join2(Q.meet2(x, y), z)
    assert check_distributivity(Q, "binary").witness == r.witness
    laws = check_laws(Q)
    assert not laws.get("distributes-over-joins").passed


def test_broken_table_fails_affineness():
    # two-element chain whose tensor is bottom everywhere except the unit row
    carrier = ["lo", "hi"]
    leq = [[1, 1], [0, 1]]
    tensor = [["lo", "lo"], ["lo", "lo"]]
    Q = TableQuantale(carrier, leq, tensor, broken=True)
    rep = check_laws(Q)
    bad = rep.get("affine-unit")
    assert not bad.passed and bad.witness == ("hi",)
    assert check_laws(Q).get("affine-unit").witness == bad.witness


def test_table_rejects_non_lattice():
    with pytest.raises(NotALattice):
        TableQuantale(["a", "b"], [[1, 0], [0, 1]], [["a", "a"], ["a", "b"]])


def test_json_roundtrip():
    for Q in (B, C4, P, UnitRationalQuantale(2), diamond_m3()):
        assert quantale_from_json(Q.to_json()) == Q


def test_chain_round_up_goes_toward_bottom():
    assert C4.round_up(F(1, 3)) == F(1, 2)
    assert C4.round_up(F(1, 4)) == F(1, 4)
    assert C4.round_up(F(5, 4)) == 1
    assert C4.round_up(F(-1, 4)) == 0


vals = st.fractions(min_value=0, max_value=1)


@given(vals, vals, vals)
def test_unit_rational_residuation(x, y, z):
    U = UnitRationalQuantale(1)
    # x (x) y <= z  iff  x <= [y, z]
    assert U.leq(U.tensor(x, y), z) == U.leq(x, U.hom(y, z))


@given(vals, vals, vals)
def test_unit_rational_tensor_laws(x, y, z):
    U = UnitRationalQuantale(1)
    t = U.tensor
    assert t(t(x, y), z) == t(x, t(y, z))
    assert t(x, y) == t(y, x)
    assert t(x, U.top) == x
    assert t(x, U.join2(y, z)) == U.join2(t(x, y), t(x, z))


@given(st.sampled_from(P.carrier), st.sampled_from(P.carrier), st.sampled_from(P.carrier))
def test_euclid_triangle(x, y, z):
    for Q in (P,):
        assert Q.leq(Q.tensor(Q.euclid(x, y), Q.euclid(y, z)), Q.euclid(x, z))
