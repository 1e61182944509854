from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftcorr.errors import BudgetExceeded, InvalidPseudometric, NotAMorphismOnY, NotEnumerable
from liftcorr.pseudometric import (Pseudometric, enumerate_pseudometrics, extend_morphism,
                                   is_morphism, nonexpansive_maps)
from liftcorr.quantale import BoolQuantale, ChainQuantale, PowersetQuantale, UnitRationalQuantale

C2 = ChainQuantale(2, 1)
C4 = ChainQuantale(4, 1)


def test_validation_errors():
    with pytest.raises(InvalidPseudometric):
        Pseudometric(C2, ["x", "y"], {("x", "x"): F(1, 2), ("x", "y"): 0})
    with pytest.raises(InvalidPseudometric):
        Pseudometric(C2, ["x", "y"], {("x", "y"): 0, ("y", "x"): F(1, 2)})
    with pytest.raises(InvalidPseudometric):
        # 0 + 0 < 1 breaks transitivity
        Pseudometric(C2, ["x", "y", "z"], {("x", "y"): 0, ("y", "z"): 0, ("x", "z"): 1})
    with pytest.raises(InvalidPseudometric):
        Pseudometric(C2, ["x", "y"], {})


def test_json_roundtrip():
    d = Pseudometric(C4, ["x", "y", "z"], {("x", "y"): F(1, 4), ("y", "z"): F(1, 2), ("x", "z"): F(3, 4)})
    assert Pseudometric.from_json(C4, d.to_json()) == d


def test_close_repairs_transitivity():
    d = Pseudometric.close(C2, ["x", "y", "z"], {("x", "y"): 0, ("y", "z"): 0, ("x", "z"): 1})
    assert d("x", "z") == 0


def test_nonexpansive_examples():
    Q = C2
    assert len(nonexpansive_maps(Pseudometric(Q, ["x"]))) == 3
    top = Pseudometric.indiscrete(Q, ["x", "y", "z"])
    maps = nonexpansive_maps(top)
    assert len(maps) == 3 and all(len(set(f.values())) == 1 for f in maps)
    bottom = Pseudometric.discrete(Q, ["x", "y", "z"])
    assert len(nonexpansive_maps(bottom)) == 27


def test_budget_and_enumerability():
    with pytest.raises(BudgetExceeded):
        enumerate_pseudometrics(ChainQuantale(10, 1), [f"x{i}" for i in range(6)], budget=1000)
    with pytest.raises(NotEnumerable):
        enumerate_pseudometrics(UnitRationalQuantale(1), ["x"])


def test_extension_examples():
    d = Pseudometric(C4, ["x", "y", "z"], {("x", "y"): F(1, 4), ("y", "z"): F(1, 2), ("x", "z"): F(3, 4)})
    f = extend_morphism({"x": C4.top}, d)
    assert all(f[u] == d("x", u) for u in d.carrier)
    assert set(extend_morphism({}, d).values()) == {C4.bottom}
    f = extend_morphism({"y": 0, "z": 0}, d)
    assert all(f[u] == C4.join(d(u, t) for t in ("y", "z")) for u in d.carrier)
    with pytest.raises(NotAMorphismOnY):
        extend_morphism({"x": 0, "y": 1}, d)
    with pytest.raises(NotAMorphismOnY):
        extend_morphism({"w": 0}, d)


QS = [BoolQuantale(), C2, ChainQuantale(3, 1), PowersetQuantale(["a", "b"])]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(QS), st.data())
def test_extension_is_least(Q, data):
    X = ("x", "y", "z")
    ds = enumerate_pseudometrics(Q, X)
    d = data.draw(st.sampled_from(ds))
    maps = nonexpansive_maps(d)
    g_full = data.draw(st.sampled_from(maps))
    Y = data.draw(st.sets(st.sampled_from(X)))
    g = {u: g_full[u] for u in Y}
    f = extend_morphism(g, d)
    assert is_morphism(f, d)
    assert all(f[u] == g[u] for u in Y)
    for h in maps:
        if all(h[u] == g[u] for u in Y):
            assert all(Q.leq(f[u], h[u]) for u in X)


def test_leq_is_pointwise():
    ds = enumerate_pseudometrics(C2, ["x", "y"])
    for a, b in product(ds, ds):
        assert a.leq(b) == C2.leq(a("x", "y"), b("x", "y"))
