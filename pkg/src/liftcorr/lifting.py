"""Coupling-based and codensity liftings of pseudometrics along functors.

Orientation reminder: the coupling-based lifting is a quantale *join* over
couplings (numerically an infimum on ``[0, M]``), the codensity lifting a
quantale *meet* over modalities and non-expansive maps (a supremum).
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import functor as fn
from . import modality as mo
from .errors import (BudgetExceeded, DistNotEnumerable, EmptySide, NoWitnessRule, NotEnumerable,
                     UnsupportedModalityForDist)
from .functor import Coprod, Dist, FDist, Id, Inj, Pow, Prod
from .pseudometric import Pseudometric, extend_morphism, nonexpansive_maps
from .transport import kantorovich_dual, kantorovich_primal


@dataclass
class LiftResult:
    value: object
    witness: object = None
    method: str = ""


def grid_for(*terms):
    """Least ``q`` such that every distribution weight in ``terms`` is a multiple of ``1/q``."""
    q = 1
    stack = list(terms)
    while stack:
        t = stack.pop()
        if isinstance(t, FDist):
            for s, w in t.items:
                q = lcm(q, w.denominator)
                stack.append(s)
        elif isinstance(t, Inj):
            stack.append(t.term)
        elif isinstance(t, (tuple, frozenset)):
            stack.extend(t)
    return q


def pushed_value(F, d, c):
    """``tau``'s argument for a coupling ``c``: the functor image of ``d`` on pairs."""
    return fn.apply_map(F, lambda p: d(p[0], p[1]), c)


# ---------------------------------------------------------------------------
# coupling-based


def coupling_lift(F, tau, d, t1, t2, dist_grid=None, budget=fn.DEFAULT_BUDGET):
    """Join over couplings of ``tau o Fd``; bottom when there are none.

    Functors containing distributions need ``dist_grid`` (``"auto"`` picks
    the common denominator of the two terms), except a bare ``Dist(G)``
    which goes through the exact transport LP.
    """
    Q = d.Q
    if fn.contains_dist(F) and dist_grid is None:
        if isinstance(F, Dist):
            return composite_lift(F, tau, d, t1, t2)
        raise DistNotEnumerable(f"{fn.show(F)} needs dist_grid for coupling enumeration")
    if dist_grid == "auto":
        dist_grid = grid_for(t1, t2)
    best, wit = Q.bottom, None
    for c in fn.couplings(F, t1, t2, dist_grid, budget):
        v = mo.apply_modality(tau, F, pushed_value(F, d, c), Q)
        if wit is None or Q.lt(best, v):
            best, wit = v, c
            if v == Q.top:
                break
    return LiftResult(best, wit, "couplings")


def coupling_value(F, tau, d, c):
    return mo.apply_modality(tau, F, pushed_value(F, d, c), d.Q)


# ---------------------------------------------------------------------------
# codensity

_MAPS_CACHE = {}


def _maps(d, budget):
    key = (d, budget)
    hit = _MAPS_CACHE.get(key)
    if hit is None:
        if len(_MAPS_CACHE) > 64:
            _MAPS_CACHE.clear()
        hit = nonexpansive_maps(d, budget)
        _MAPS_CACHE[key] = hit
    return hit


def _expand(F, g, terms):
    """Instantiate label-mass families at the masses of ``terms``.

    Members of a family whose mass matches neither term give top on both
    sides, so only these instances can lower the meet.
    """
    if isinstance(g, mo.LabelMassTest) and g.p is None:
        ps = {mo.label_mass(F, t, g.label) for t in terms}
        return [mo.LabelMassTest(g.label, p) for p in sorted(ps)]
    if isinstance(g, mo.ProjCompose) and isinstance(F, Prod):
        sub = [t[g.index] for t in terms]
        return [mo.ProjCompose(g.index, m) for m in _expand(F.children[g.index], g.m, sub)]
    if isinstance(g, mo.BarExtend) and isinstance(F, Coprod):
        sub = [t.term for t in terms if t.index == g.index]
        if not sub:
            return [g]
        return [mo.BarExtend(g.index, m) for m in _expand(F.children[g.index], g.m, sub)]
    return [g]


def _expand_gamma(F, Gamma, t1, t2):
    out = []
    for g in Gamma:
        out.extend(_expand(F, g, (t1, t2)))
    return out


def codensity_lift(F, Gamma, d, t1, t2, strategy="brute", budget=200_000):
    """Meet over ``tau`` in ``Gamma`` and morphisms ``f: d -> d_e`` of
    ``d_e(tau(Ff t1), tau(Ff t2))``; top when ``Gamma`` is empty.

    ``brute`` enumerates every morphism (finite quantales only).
    ``witness`` evaluates only the optimal maps that the constructions
    provide (least extensions of partial maps, LP duals); it raises
    :class:`NoWitnessRule` for members it has no rule for, unless another
    member already pins the result to bottom.
    """
    Q = d.Q
    Gamma = _expand_gamma(F, Gamma, t1, t2)
    if strategy == "brute":
        if not Q.enumerable:
            raise NotEnumerable("brute-force codensity needs an enumerable quantale")
        best, wit = Q.top, None
        for f in _maps(d, budget):
            for g in Gamma:
                a = mo.apply_modality(g, F, fn.apply_map(F, f, t1), Q)
                b = mo.apply_modality(g, F, fn.apply_map(F, f, t2), Q)
                v = Q.euclid_raw(a, b)
                if wit is None or Q.lt(v, best):
                    best, wit = v, (g, f)
                    if v == Q.bottom:
                        return LiftResult(best, wit, "brute")
        return LiftResult(best, wit, "brute")
    if strategy != "witness":
        raise ValueError(f"unknown strategy {strategy!r}")
    best, wit, missing = Q.top, None, None
    for g in Gamma:
        try:
            v, f = _witness(F, g, d, t1, t2)
        except NoWitnessRule as exc:
            missing = exc
            continue
        if wit is None or Q.lt(v, best):
            best, wit = v, (g, f)
    if missing is not None and best != Q.bottom:
        raise missing
    return LiftResult(best, wit, "witness")


def codensity_value(F, g, d, f, t1, t2):
    Q = d.Q
    return Q.euclid_raw(mo.apply_modality(g, F, fn.apply_map(F, f, t1), Q),
                        mo.apply_modality(g, F, fn.apply_map(F, f, t2), Q))


def _const_map(d, v):
    return {x: v for x in d.carrier}


def _f_independent(g):
    return isinstance(g, (mo.TopAt, mo.CondIndicator, mo.ConstTop, mo.LabelMassTest, mo.EmptyTest))


def _id_factor(m):
    """``c`` when ``m`` acts on Id as ``v -> c*v`` exactly (no grid rounding)."""
    if isinstance(m, mo.IdentityMod):
        return Fraction(1)
    if isinstance(m, mo.Scale):
        return m.c
    if isinstance(m, mo.ComposeId):
        a, b = _id_factor(m.outer), _id_factor(m.inner)
        return None if a is None or b is None else a * b
    return None


def _witness(F, g, d, t1, t2):
    """``(value, f)`` with ``f`` an optimal map for the single member ``g``."""
    Q = d.Q
    if _f_independent(g):
        f = _const_map(d, Q.top)
        return codensity_value(F, g, d, f, t1, t2), f
    if isinstance(g, mo.ProjCompose) and isinstance(F, Prod):
        return _witness(F.children[g.index], g.m, d, t1[g.index], t2[g.index])
    if isinstance(g, mo.PreInject):
        return _witness(g.coproduct, g.m, d, Inj(g.index, t1), Inj(g.index, t2))
    if isinstance(g, mo.BarExtend) and isinstance(F, Coprod):
        i = g.index
        if t1.index == i and t2.index == i:
            return _witness(F.children[i], g.m, d, t1.term, t2.term)
        if t1.index != i and t2.index != i:
            return Q.top, _const_map(d, Q.top)
        # one side is top; a monotone member is smallest at f = bottom
        f = _const_map(d, Q.bottom)
        return codensity_value(F, g, d, f, t1, t2), f
    if isinstance(g, mo.Cotuple) and isinstance(F, Coprod) and t1.index == t2.index:
        i = t1.index
        return _witness(F.children[i], g.parts[i], d, t1.term, t2.term)
    if isinstance(g, mo.Transport) and isinstance(F, Pow):
        iso = mo._pushed(F)
        return _witness(iso.functor, g.m, d, iso.to_pushed(t1), iso.to_pushed(t2))
    if isinstance(F, Id):
        return _witness_id(g, d, t1, t2)
    if isinstance(F, Pow):
        return _witness_pow(F, g, d, t1, t2)
    if isinstance(F, Dist):
        return _witness_dist(F, g, d, t1, t2)
    raise NoWitnessRule(f"no optimal-function rule for {mo.show(g)} on {fn.show(F)}")


def _witness_id(g, d, x, y):
    Q = d.Q
    if Q.enumerable:
        # any pair of values respecting d(x, y) extends to a full morphism
        best, wit = Q.top, None
        for a in Q.carrier:
            for b in Q.carrier:
                if Q.leq(d(x, y), Q.euclid_raw(a, b)):
                    v = Q.euclid_raw(g.eval(Id(), a, Q), g.eval(Id(), b, Q))
                    if wit is None or Q.lt(v, best):
                        best, wit = v, (a, b)
        f = extend_morphism({x: wit[0], y: wit[1]} if x != y else {x: wit[0]}, d)
        return codensity_value(Id(), g, d, f, x, y), f
    if _id_factor(g) is None:
        raise NoWitnessRule(f"no optimal-function rule for {mo.show(g)} over {Q.describe()}")
    f = extend_morphism({x: Q.top}, d)
    return codensity_value(Id(), g, d, f, x, y), f


def _witness_pow(F, g, d, T1, T2):
    Q = d.Q
    if not isinstance(F.child, Id):
        raise NoWitnessRule("powerset witnesses need P(Id); use the product form")
    if not T1 and not T2:
        f = _const_map(d, Q.top)
        return Q.top, f
    if not T1 or not T2:
        f = _const_map(d, Q.bottom)
        return codensity_value(F, g, d, f, T1, T2), f
    best, wit = None, None
    for side in (T2, T1):
        f = extend_morphism({u: Q.top for u in side}, d)
        v = codensity_value(F, g, d, f, T1, T2)
        if wit is None or Q.lt(v, best):
            best, wit = v, f
    return best, wit


def _expect_factor(m):
    if isinstance(m, mo.Expect):
        return Fraction(1)
    if isinstance(m, mo.ScaledExpect):
        return m.c
    if isinstance(m, mo.ComposeId):
        a = _id_factor(m.outer)
        b = _expect_factor(m.inner)
        return None if a is None or b is None else a * b
    return None


def additive_factor(tau):
    """``c`` such that ``tau`` is ``c`` times expectation; else refuse."""
    c = _expect_factor(tau)
    if c is None:
        raise UnsupportedModalityForDist(
            f"{mo.show(tau)} is not a scaled expectation")
    return c


def _split_dist(F, inner, mu, Q):
    """Label masses, constant contribution of leafless labels, leaf sub-measure."""
    nf = mo._normal(F.child)
    if len(nf.B) > 1:
        raise NoWitnessRule("distribution witness needs at most one carrier-valued label")
    const = Fraction(0)
    masses = {}
    sub = {}
    for s, w in mu.items:
        n = nf.to_normal(s)
        if n.index == 0:
            masses[("A", n.term)] = masses.get(("A", n.term), 0) + w
            const += w * inner.eval(F.child, s, Q)
        else:
            b, x = n.term
            masses[("B", b)] = masses.get(("B", b), 0) + w
            sub[x] = sub.get(x, 0) + w
    return masses, const, sub


def _leaf_is_identity(F, inner, Q):
    nf = mo._normal(F.child)
    if not nf.B:
        return True
    b = nf.B[0]
    for v in (Q.top, Q.bottom, (Q.top + Q.bottom) / 2):
        if inner.eval(F.child, nf.from_normal(Inj(1, (b, v))), Q) != v:
            return False
    return True


def _witness_dist(F, g, d, mu1, mu2):
    Q = d.Q
    if Q.kind != "unit-rational":
        raise NoWitnessRule("LP witnesses are exact only over the rational interval")
    # both branches only accept scaled expectations as the outer modality
    if isinstance(g, mo.Pushforward):
        inner = g.inner
        additive_factor(g.outer)
    else:
        inner = None
        additive_factor(g)
        if not isinstance(F.child, Id):
            raise NoWitnessRule("expectation on D(G) needs a pushforward modality")
    if inner is None:
        k1, s1 = Fraction(0), dict(mu1.items)
        k2, s2 = Fraction(0), dict(mu2.items)
    else:
        if not _leaf_is_identity(F, inner, Q):
            raise NoWitnessRule("leaf modality is not the identity")
        _, k1, s1 = _split_dist(F, inner, mu1, Q)
        _, k2, s2 = _split_dist(F, inner, mu2, Q)
    if sum(s1.values(), Fraction(0)) != sum(s2.values(), Fraction(0)):
        raise NoWitnessRule("leaf masses differ; only label tests decide this pair")
    K = k1 - k2
    if s1 or s2:
        _, f = kantorovich_dual(s1, s2, d, Q.M)
        if K < 0:
            f = {x: Q.M - v for x, v in f.items()}
        f = extend_morphism(f, d)
    else:
        f = _const_map(d, Q.top)
    return codensity_value(F, g, d, f, mu1, mu2), f


# ---------------------------------------------------------------------------
# distributions and composites


def dist_lift(tau, mu1, mu2, d):
    """``tau`` applied to the transport optimum, ``tau`` a scaled expectation."""
    Q = d.Q
    c = additive_factor(tau)
    W, coupling = kantorovich_primal(mu1, mu2, lambda x, y: d(x, y))
    wit = FDist(coupling.items()) if coupling else None
    return LiftResult(Q.round_up(c * W), wit, "transport")


def inner_lift(G, tau_G, d, u1, u2):
    """Lifted distance on ``G(X)`` for grammar-G terms; ``None`` when no coupling exists."""
    cs = fn.couplings(G, u1, u2)
    if not cs:
        return None
    Q = d.Q
    return Q.join(coupling_value(G, tau_G, d, c) for c in cs)


def composite_lift(F, tau, d, t1, t2, budget=fn.DEFAULT_BUDGET):
    """Outer lifting of the inner-lifted distance on ``G(X)`` for ``P(G)`` / ``D(G)``.

    ``tau`` is either a bare outer modality (then ``G`` must be ``Id``) or a
    :class:`Pushforward` carrying the inner and outer modalities.
    """
    Q = d.Q
    if isinstance(tau, mo.Pushforward):
        inner, outer = tau.inner, tau.outer
    else:
        inner, outer = mo.IdentityMod(), tau
    G = F.child
    if isinstance(F, Dist):
        c = additive_factor(outer)
        if Q.kind not in mo.NUMERIC_KINDS:
            raise UnsupportedModalityForDist("distributions need a numeric quantale")

        def cost(u1, u2):
            return inner_lift(G, inner, d, u1, u2)

        W, coupling = kantorovich_primal(t1, t2, cost)
        if W is None:
            return LiftResult(Q.bottom, None, "transport-infeasible")
        return LiftResult(Q.round_up(c * W), FDist(coupling.items()), "transport")
    if isinstance(F, Pow):
        T1 = sorted(t1, key=fn.canon_key)
        T2 = sorted(t2, key=fn.canon_key)
        vals = {}
        for u1 in T1:
            for u2 in T2:
                v = inner_lift(G, inner, d, u1, u2)
                if v is not None:
                    vals[(u1, u2)] = v
        return _pow_join(vals, T1, T2, outer, Q, budget)
    raise fn.NotInGrammar(f"composite lifting expects P(G) or D(G), got {fn.show(F)}")


def _pow_join(vals, T1, T2, outer, Q, budget):
    if not T1 and not T2:
        return LiftResult(mo.apply_modality(outer, Pow(Id()), frozenset(), Q), frozenset(), "powerset")
    pairs = sorted(vals, key=fn.canon_key)
    if 2 ** len(pairs) > budget:
        raise BudgetExceeded("powerset couplings", 2 ** len(pairs), budget)
    s1, s2 = set(T1), set(T2)
    best, wit = Q.bottom, None
    for mask in range(1, 1 << len(pairs)):
        chosen = [pairs[j] for j in range(len(pairs)) if mask >> j & 1]
        if {p[0] for p in chosen} != s1 or {p[1] for p in chosen} != s2:
            continue
        v = mo.apply_modality(outer, Pow(Id()), frozenset(vals[p] for p in chosen), Q)
        if wit is None or Q.lt(best, v):
            best, wit = v, frozenset(chosen)
    return LiftResult(best, wit, "powerset")


# ---------------------------------------------------------------------------
# powerset helpers


def _maximal(Q, values):
    vals = set(values)
    return {v for v in vals if not any(Q.lt(v, w) for w in vals)}


def powerset_optimal_coupling(T1, T2, d):
    """Union of the maximal-distance pairs seen from both sides."""
    if not T1 or not T2:
        raise EmptySide("both sets must be non-empty")
    Q = d.Q
    out = set()
    for t1 in T1:
        top = _maximal(Q, (d(t1, t2) for t2 in T2))
        out.update((t1, t2) for t2 in T2 if d(t1, t2) in top)
    for t2 in T2:
        top = _maximal(Q, (d(t1, t2) for t1 in T1))
        out.update((t1, t2) for t1 in T1 if d(t1, t2) in top)
    return frozenset(out)


def powerset_condition_check(tau, d, T1, T2):
    """Does ``tau`` absorb the meet for this instance (the powerset duality hypothesis)?"""
    Q = d.Q
    if not Q.enumerable:
        raise NotEnumerable("the condition quantifies over maximal sets in a finite quantale")
    M1 = [_maximal(Q, (d(t1, t2) for t2 in T2)) for t1 in T1]
    M2 = [_maximal(Q, (d(t1, t2) for t1 in T1)) for t2 in T2]
    P = Pow(Id())
    lhs = Q.meet2(mo.apply_modality(tau, P, frozenset(Q.join(m) for m in M1), Q),
                  mo.apply_modality(tau, P, frozenset(Q.join(m) for m in M2), Q))
    union = frozenset(v for m in M1 + M2 for v in m)
    return lhs == mo.apply_modality(tau, P, union, Q)


# ---------------------------------------------------------------------------
# whole lifted matrices


def lifted_pseudometric(F, lift, terms, d):
    """The lifted distance on ``terms`` as a (validated) :class:`Pseudometric`.

    ``lift(t1, t2)`` returns a quantale value.
    """
    terms = list(terms)
    ent = {}
    for i, a in enumerate(terms):
        for b in terms[i:]:
            ent[(a, b)] = lift(a, b)
    return Pseudometric(d.Q, terms, ent)
