import random
from fractions import Fraction as F

import pytest

from liftcorr import behavioural as bh
from liftcorr.errors import MalformedTerm, NoConvergenceBound, ShapeMismatch
from liftcorr.pseudometric import Pseudometric
from liftcorr.quantale import BoolQuantale, UnitRationalQuantale

U = UnitRationalQuantale(1)
B = BoolQuantale()


def loops():
    return bh.dfa("a", {"p": 1, "q": 0}, {"p": {"a": "p"}, "q": {"a": "q"}})


def four_state():
    # p and s agree on outputs and after one letter, first differ after "aa"
    return bh.dfa("a", {"p": 0, "q": 0, "r": 1, "s": 0},
                  {"p": {"a": "q"}, "q": {"a": "r"}, "r": {"a": "r"}, "s": {"a": "s"}})


def test_phi_step_examples():
    c = loops()
    lift = bh.dfa_lifting(c, F(1, 2), U)
    top = Pseudometric.indiscrete(U, c.carrier)
    assert bh.phi_step(c, lift, top)("p", "q") == 1
    c = bh.dfa("ab", {"x": 0, "y": 0, "u": 0, "v": 1},
               {"x": {"a": "u", "b": "u"}, "y": {"a": "v", "b": "u"},
                "u": {"a": "u", "b": "u"}, "v": {"a": "v", "b": "v"}})
    d = Pseudometric(U, c.carrier, {(a, b): F(1, 2) if "v" in (a, b) else 0
                                    for a in c.carrier for b in c.carrier if a != b})
    assert bh.phi_step(c, bh.dfa_lifting(c, F(1, 2), U), d)("x", "y") == F(1, 4)
    same = bh.dfa("a", {"x": 0, "y": 0}, {"x": {"a": "x"}, "y": {"a": "x"}})
    assert bh.phi_step(same, bh.dfa_lifting(same, F(1, 2), U),
                       Pseudometric.indiscrete(U, same.carrier))("x", "y") == U.top


def test_fixpoint_examples():
    c = loops()
    rep = bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U)
    assert rep.stable and rep.metric("p", "q") == 1
    c = bh.dfa("a", {"x": 0, "y": 0, "z": 1, "w": 0},
               {"x": {"a": "z"}, "y": {"a": "w"}, "z": {"a": "z"}, "w": {"a": "w"}})
    assert bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U).metric("x", "y") == F(1, 2)
    c = four_state()
    assert bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U).metric("p", "s") == F(1, 4)


def test_fixpoint_without_bound():
    c = four_state()
    with pytest.raises(NoConvergenceBound):
        bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U, max_steps=1)
    rep = bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U, max_steps=1, discount=F(1, 2))
    assert not rep.stable and rep.bound == F(1, 2)


def test_sdw_oracle_examples():
    c = four_state()
    d = bh.sdw_oracle(c, F(1, 2))
    assert d("p", "s") == F(1, 4)
    assert d("p", "r") == 1
    same = bh.dfa("a", {"x": 0, "y": 0}, {"x": {"a": "y"}, "y": {"a": "x"}})
    assert bh.sdw_oracle(same, F(1, 2))("x", "y") == 0
    with pytest.raises(ShapeMismatch):
        bh.shortest_distinguishing(bh.Coalgebra(bh.fn.Id(), ("x",), {"x": "x"}))


@pytest.mark.parametrize("seed", range(20))
def test_fixpoint_matches_oracles(seed):
    rng = random.Random(seed)
    c = bh.random_dfa(rng, rng.randint(2, 5), rng.randint(1, 2))
    got = bh.fixpoint(c, bh.dfa_lifting(c, F(1, 2), U), U).metric
    assert got == bh.sdw_oracle(c, F(1, 2))
    kern = bh.fixpoint(c, bh.dfa_lifting(c, None, B), B).metric
    assert kern == bh.language_kernel(c, B)


def test_coalgebra_validation_and_json():
    with pytest.raises(MalformedTerm):
        bh.dfa("a", {"x": 0}, {"x": {"a": "nowhere"}})
    c = four_state()
    assert bh.Coalgebra.from_json(c.to_json()).structure == c.structure


def test_cts_lift_examples():
    m = bh.CTSModel(("x", "y"), ("a",), ("c1", "c2"), {"x": {("c1", "a"): ["x"]}})
    Q = m.quantale
    full = Pseudometric(Q, m.states, {("x", "y"): Q.top})
    t = m.term("x")
    assert bh.cts_lift(m, full, t, t) == Q.top
    empty = m.term("y")
    assert bh.cts_lift(m, full, empty, empty) == Q.top
    assert bh.cts_codensity(m, full, t, t) == Q.top


def test_cts_counterexample():
    r = bh.cts_counterexample()
    assert r["couplings"] == 0 and r["coupling_side"] == []
    assert "c2" in r["lift"] and r["witness_condition"] == "c2"
    assert r["lift"] == r["codensity"] == ["c2"]
    assert r["verdict"] == "inequality-only"
    v = bh.cts_counterexample(variant=True)
    assert v["couplings"] > 0 and v["verdict"] != "inequality-only"


def test_cts_sweep_equal():
    m = bh.CTSModel(("x", "y"), ("a",), ("c1", "c2"), {})
    r = bh.cts_sweep(m)
    assert r["equal"] and r["checked"] == 1024


def test_cts_model_json_and_metric():
    m = bh.random_cts(bh.seeded(1), 3, ("c1", "c2"), ("a",))
    assert bh.CTSModel.from_json(m.to_json()).T == m.T
    rep = bh.cts_metric(m)
    assert rep.stable
    assert all(rep.metric(x, x) == m.quantale.top for x in m.states)
