import random
from fractions import Fraction as F

import pytest

from liftcorr import functor as fn
from liftcorr import modality as mo
from liftcorr.errors import NotEnumerable, ShapeMismatch
from liftcorr.functor import Const, Coprod, Dist, FDist, Id, Inj, Pow
from liftcorr.quantale import (BoolQuantale, ChainQuantale, PowersetQuantale,
                               UnitRationalQuantale)

B = BoolQuantale()
C2 = ChainQuantale(2, 1)
C4 = ChainQuantale(4, 1)
U = UnitRationalQuantale(1)


def test_apply_examples():
    assert mo.apply_modality(mo.MeetAll(), Pow(Id()), frozenset({0, F(1, 2)}), C2) == F(1, 2)
    assert mo.apply_modality(mo.MeetAll(), Pow(Id()), frozenset(), C2) == C2.top
    assert mo.apply_modality(mo.Scale(F(1, 2)), Id(), F(1, 2), C4) == F(1, 4)
    assert mo.apply_modality(mo.Scale(F(1, 2)), Id(), F(1, 2), C2) == F(1, 2)
    mu = FDist({0: F(1, 2), 1: F(1, 2)})
    assert mo.apply_modality(mo.Expect(), Dist(Id()), mu, U) == F(1, 2)
    assert mo.apply_modality(mo.TopAt(1), Coprod((Id(), Id())), Inj(0, 1), C2) == C2.bottom
    with pytest.raises(ShapeMismatch):
        mo.apply_modality(mo.MeetAll(), Id(), 0, C2)


def test_wb_accepts():
    for Q in (B, C2, C4):
        assert mo.check_well_behaved(mo.IdentityMod(), Id(), Q).passed
    for Q in (B, C2):
        assert mo.check_well_behaved(mo.MeetAll(), Pow(Id()), Q).passed
    assert mo.check_well_behaved(mo.Scale(F(1, 2)), Id(), C4).passed
    assert mo.check_well_behaved(mo.Expect(), Dist(Id()), C2).passed
    assert mo.check_well_behaved(mo.ConstTop(), Const(("a",)), C2).passed


def test_wb_rejects():
    r = mo.check_well_behaved(mo.ConstTop(), Id(), B)
    assert r.monotone.passed and r.tensor.passed and not r.top_reflect.passed
    assert not mo.check_well_behaved(mo.Scale(0), Id(), C2).passed
    flip = mo.MonotoneTable({0: 1, 1: 0})
    r = mo.check_well_behaved(flip, Id(), B)
    assert not r.monotone.passed and r.monotone.witness is not None
    with pytest.raises(NotEnumerable):
        mo.check_well_behaved(mo.MonotoneTable({0: 0}), Id(), U)
    assert mo.check_well_behaved(mo.Expect(), Dist(Id()), U).monotone.method == "certified"


def test_combine_examples():
    sc = mo.Scale(F(1, 2))
    t = mo.combine("tensor", [mo.IdentityMod(), sc])
    assert mo.apply_modality(t, Id(), F(1, 2), C4) == F(3, 4)
    # the order is reversed, so the meet is the larger number
    m = mo.combine("meet", [mo.IdentityMod(), sc])
    assert mo.apply_modality(m, Id(), F(1, 2), C4) == F(1, 2)
    c = mo.combine("compose_id", [sc, mo.MeetAll()])
    assert mo.apply_modality(c, Pow(Id()), frozenset({1, F(1, 2)}), C4) == F(1, 2)
    with pytest.raises(ShapeMismatch):
        mo.combine("meet", [])


def _random_wb(rng, F, depth=2):
    base = {
        "Id": [mo.IdentityMod(), mo.Scale(F_(1, 2)), mo.Scale(F_(3, 4)), mo.Scale(1)],
        "Dist": [mo.Expect(), mo.ScaledExpect(F_(1, 2))],
    }[F]
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(base)
    kind = rng.choice(["tensor", "meet", "compose_id"])
    if kind == "compose_id":
        return mo.combine(kind, [_random_wb(rng, "Id", depth - 1), _random_wb(rng, F, depth - 1)])
    return mo.combine(kind, [_random_wb(rng, F, depth - 1) for _ in range(rng.randint(1, 3))])


F_ = F


@pytest.mark.parametrize("shape", ["Id", "Dist"])
def test_closure_under_combinators(shape):
    rng = random.Random(7)
    functor = Id() if shape == "Id" else Dist(Id())
    for _ in range(50 if shape == "Id" else 15):
        m = _random_wb(rng, shape)
        assert mo.check_well_behaved(m, functor, C4).passed, mo.show(m)


def _monotone_brute(m, F, Q, X):
    preds = [dict(zip(X, vals)) for vals in __import__("itertools").product(Q.carrier, repeat=len(X))]
    terms = fn.enumerate_terms(F, X)
    for p in preds:
        for q in preds:
            if all(Q.leq(p[x], q[x]) for x in X):
                for t in terms:
                    a = mo.apply_modality(m, F, fn.apply_map(F, p, t), Q)
                    b = mo.apply_modality(m, F, fn.apply_map(F, q, t), Q)
                    if not Q.leq(a, b):
                        return False
    return True


@pytest.mark.parametrize("m", [mo.MeetAll(), mo.Pushforward(mo.Scale(F(1, 2)), mo.MeetAll()),
                               mo.EmptyTest(),
                               mo.Pushforward(mo.MonotoneTable({0: 1, F(1, 2): 0, 1: 0}), mo.MeetAll())],
                         ids=mo.show)
def test_monotonicity_universal_instance_matches_brute(m):
    Q = C2
    assert mo.check_well_behaved(m, Pow(Id()), Q).monotone.passed == _monotone_brute(m, Pow(Id()), Q, ["x", "y"])


def test_cotuple_and_topat_identities():
    G = Coprod((Id(), Id()))
    a, b = mo.Scale(F(1, 2)), mo.IdentityMod()
    cot = mo.Cotuple((a, b))
    ext = mo.MeetMod((mo.BarExtend(0, a), mo.BarExtend(1, b)))
    for t in fn.enumerate_terms(G, list(C4.carrier)):
        assert mo.apply_modality(cot, G, t, C4) == mo.apply_modality(ext, G, t, C4)
        # TopAt(i) is Cotuple(top at i, bottom elsewhere)
        for i in (0, 1):
            expect = C4.top if t.index == i else C4.bottom
            assert mo.apply_modality(mo.TopAt(i), G, t, C4) == expect
    assert mo.check_well_behaved(cot, G, C4).passed


def test_powerset_quantale_modality():
    P = PowersetQuantale(["a", "b"])
    assert mo.check_well_behaved(mo.MeetAll(), Pow(Id()), P).passed


SAMPLES = [mo.IdentityMod(), mo.ConstTop(), mo.Scale(F(1, 3)), mo.MeetAll(), mo.Expect(),
           mo.ScaledExpect(F(1, 2)), mo.TopAt(1), mo.EmptyTest(), mo.CondIndicator("a"),
           mo.MeetMod((mo.ProjCompose(0, mo.IdentityMod()), mo.ProjCompose(1, mo.Scale(F(1, 2))))),
           mo.Cotuple((mo.IdentityMod(), mo.ConstTop())),
           mo.Pushforward(mo.BarExtend(0, mo.IdentityMod()), mo.MeetAll()),
           mo.ComposeId(mo.Scale(F(1, 2)), mo.Expect()),
           mo.TensorMod((mo.IdentityMod(), mo.IdentityMod())),
           mo.MonotoneTable({0: 0, F(1, 2): 1, 1: 1})]


@pytest.mark.parametrize("m", SAMPLES, ids=mo.show)
def test_json_roundtrip(m):
    assert mo.modality_from_json(mo.modality_to_json(m, C2), C2) == m
