"""Correspondence triples ``(F, tau, Gamma)``: builders and an exhaustive verifier.

A correspondence claims that the coupling-based lifting along ``tau``
equals the codensity lifting along ``Gamma``.  Builders assemble such
triples from smaller ones (coproducts, products, powersets,
distributions, the two functor grammars) and record each step in a
provenance tree; :func:`verify` checks the claim on a finite universe.
"""

import random
from dataclasses import dataclass, field
from itertools import product

from . import functor as fn
from . import lifting as lf
from . import modality as mo
from .errors import (BudgetExceeded, ConditionNotEstablished,
                     DistributivityNotEstablished, IndexOutOfRange,
                     NotAdditive, NotCoproductFree, NotEnumerable,
                     NotInGrammar, NotWellBehaved, NoWitnessRule)
from .functor import Const, Coprod, Dist, Id, Pow, Prod
from .pseudometric import Pseudometric, enumerate_pseudometrics
from .quantale import ChainQuantale, check_distributivity


@dataclass
class Correspondence:
    F: object
    tau: object
    gamma: tuple
    Q: object
    provenance: dict = field(default_factory=dict)

    def coupling(self, d, t1, t2, dist_grid=None):
        return lf.coupling_lift(self.F, self.tau, d, t1, t2, dist_grid)

    def codensity(self, d, t1, t2, strategy="brute"):
        return lf.codensity_lift(self.F, self.gamma, d, t1, t2, strategy)

    def to_json(self):
        dump = lambda m: mo.modality_to_json(m, self.Q)  # noqa: E731
        return {"functor": fn.functor_to_json(self.F, dump),
                "functor_text": fn.show(self.F),
                "quantale": self.Q.to_json(),
                "tau": mo.modality_to_json(self.tau, self.Q),
                "tau_text": mo.show(self.tau),
                "gamma": [mo.show(g) for g in self.gamma],
                "provenance": self.provenance}


def _node(rule, detail=None, children=()):
    out = {"rule": rule}
    if detail:
        out["detail"] = detail
    if children:
        out["children"] = list(children)
    return out


def _require_wb(tau, F, Q):
    try:
        rep = mo.check_well_behaved(tau, F, Q)
    except BudgetExceeded:
        if mo.certify(tau, F, Q):
            return "certified"
        raise NotWellBehaved(f"{mo.show(tau)} on {fn.show(F)}: universe too large and no certificate")
    except NotEnumerable as exc:
        raise NotWellBehaved(str(exc)) from None
    if not rep.passed:
        bad = [k for k in ("monotone", "tensor", "top_reflect") if not getattr(rep, k).passed]
        raise NotWellBehaved(f"{mo.show(tau)} on {fn.show(F)} fails {', '.join(bad)}")
    return rep.monotone.method


# ---------------------------------------------------------------------------
# base cases


def build_identity(tau, Q):
    how = _require_wb(tau, Id(), Q)
    return Correspondence(Id(), tau, (tau,), Q,
                          _node("identity duality", f"{mo.show(tau)} well-behaved ({how})"))


def build_constant(A, Q):
    A = tuple(A)
    return Correspondence(Const(A), mo.ConstTop(), tuple(mo.CondIndicator(a) for a in A), Q,
                          _node("constant functor", f"{len(A)} atom(s), indicator family"))


# ---------------------------------------------------------------------------
# coproducts


def build_coproduct(corrs):
    corrs = list(corrs)
    if not corrs:
        raise ValueError("coproduct of no correspondences")
    Q = corrs[0].Q
    if any(c.Q != Q for c in corrs):
        raise ValueError("components live over different quantales")
    F = Coprod(tuple(c.F for c in corrs))
    tau = mo.Cotuple(tuple(c.tau for c in corrs))
    gamma = [mo.BarExtend(i, g) for i, c in enumerate(corrs) for g in c.gamma]
    gamma += [mo.TopAt(i) for i in range(len(corrs))]
    return Correspondence(F, tau, tuple(gamma), Q,
                          _node("coproduct", "cotuple; extended members plus summand tests",
                                [c.provenance for c in corrs]))


def restrict_coproduct(corr, i):
    F = corr.F
    if not isinstance(F, Coprod):
        raise TypeError("restrict_coproduct needs a coproduct correspondence")
    if not 0 <= i < len(F.children):
        raise IndexOutOfRange(f"summand {i} of {len(F.children)}")
    if isinstance(corr.tau, mo.Cotuple):
        tau = corr.tau.parts[i]
    else:
        tau = mo.PreInject(i, corr.tau, F)
    gamma = tuple(mo.PreInject(i, g, F) for g in corr.gamma)
    return Correspondence(F.children[i], tau, gamma, corr.Q,
                          _node("coproduct restriction", f"summand {i}", [corr.provenance]))


# ---------------------------------------------------------------------------
# products


def _distributivity(Q, kinds):
    """First law in ``kinds`` that holds, or None."""
    if Q.kind == "unit-rational":
        # a complete chain: every distributive law holds
        return kinds[0] + " (total order)"
    for k in kinds:
        if check_distributivity(Q, k).holds:
            return k
    return None


def build_product(corrs, mode="finite"):
    corrs = list(corrs)
    if not corrs:
        raise ValueError("product of no correspondences")
    Q = corrs[0].Q
    finite = all(fn.has_finite_couplings(c.F) for c in corrs)
    if mode == "finite":
        law = _distributivity(Q, ["binary", "join-infinite"] if finite else ["join-infinite"])
    elif mode == "infinite":
        law = _distributivity(Q, ["meet-infinite", "complete"] if finite else ["complete"])
    else:
        raise ValueError(f"unknown product mode {mode!r}")
    if law is None:
        raise DistributivityNotEstablished(f"{Q.describe()} lacks the distributivity a {mode} product needs")
    F = Prod(tuple(c.F for c in corrs))
    tau = mo.MeetMod(tuple(mo.ProjCompose(i, c.tau) for i, c in enumerate(corrs)))
    gamma = tuple(mo.ProjCompose(i, g) for i, c in enumerate(corrs) for g in c.gamma)
    return Correspondence(F, tau, gamma, Q,
                          _node("product", f"{mode}; {law} distributivity; meet of projections",
                                [c.provenance for c in corrs]))


def top_fill(F, Q):
    """The unique element of ``F{top}`` viewed in ``F(V)``; refuses coproduct-like F."""
    if fn.count_terms(F, 1, dist_grid=1) != 1:
        raise NotCoproductFree(f"{fn.show(F)} sends a singleton to a non-singleton")
    return fn.enumerate_terms(F, [Q.top], dist_grid=1)[0]


def restrict_product(corr, i):
    F = corr.F
    if not isinstance(F, Prod):
        raise TypeError("restrict_product needs a product correspondence")
    if not 0 <= i < len(F.children):
        raise IndexOutOfRange(f"factor {i} of {len(F.children)}")
    fill = top_fill(F, corr.Q)
    tau = mo.RestrictProd(i, corr.tau, fill, F)
    gamma = tuple(mo.RestrictProd(i, g, fill, F) for g in corr.gamma)
    return Correspondence(F.children[i], tau, gamma, corr.Q,
                          _node("product restriction", f"factor {i}, others at top", [corr.provenance]))


# ---------------------------------------------------------------------------
# powerset and distributions


def strict_on_bottom(tau, Q):
    """Does ``tau`` send the singleton ``{bottom}`` to bottom?"""
    return mo.apply_modality(tau, Pow(Id()), frozenset([Q.bottom]), Q) == Q.bottom


def build_powerset(tau, Q, universe=None):
    """Correspondence for ``P`` along ``tau``.

    Accepted when ``Q`` is totally ordered, when ``tau`` is the meet
    modality over a completely distributive ``Q``, or when the
    meet-absorption condition is checked on every pair of non-empty sets
    over the carriers of ``universe`` (a list of sizes).

    Empty against non-empty sets have no coupling, so the coupling side is
    bottom there; ``tau`` alone reaches bottom only if it sends ``{bottom}``
    to bottom.  Otherwise an emptiness test joins ``Gamma`` (using
    ``P = 1 + non-empty P``) and the result is a correspondence rather than
    a duality.
    """
    F = Pow(Id())
    how = _require_wb(tau, F, Q)
    if Q.is_total:
        rule = "totally ordered quantale"
    elif isinstance(tau, mo.MeetAll) and check_distributivity(Q, "complete").holds:
        rule = "meet modality, completely distributive"
    elif universe is not None:
        for n in universe:
            X = tuple(f"x{k}" for k in range(n))
            sets = [s for s in fn.enumerate_terms(F, X) if s]
            for d in enumerate_pseudometrics(Q, X):
                for T1, T2 in product(sets, sets):
                    if not lf.powerset_condition_check(tau, d, T1, T2):
                        raise ConditionNotEstablished(
                            f"absorption fails for {d!r}, {sorted(T1)}, {sorted(T2)}")
        rule = f"absorption condition checked on carriers of size {list(universe)}"
    else:
        raise ConditionNotEstablished(f"no powerset duality rule applies over {Q.describe()}")
    if strict_on_bottom(tau, Q):
        return Correspondence(F, tau, (tau,), Q, _node("powerset duality", f"{rule}; {how}"))
    return Correspondence(F, tau, (tau, mo.EmptyTest()), Q,
                          _node("powerset correspondence",
                                f"{rule}; {how}; emptiness test added since tau{{bottom}} is not bottom"))


def _expect_for(tau):
    if isinstance(tau, mo.IdentityMod):
        return mo.Expect()
    if isinstance(tau, mo.Scale) and tau.c > 0:
        return mo.ScaledExpect(tau.c)
    if isinstance(tau, (mo.Expect, mo.ScaledExpect)):
        return tau
    return None


def build_distribution(tau, Q):
    """Duality ``(D, tau o E, {tau o E})`` for additive ``tau``."""
    if Q.kind != "unit-rational":
        raise NotAdditive("grid rounding breaks additivity; use the rational interval")
    m = _expect_for(tau)
    if m is None:
        raise NotAdditive(f"{mo.show(tau)} is not certified additive")
    return Correspondence(Dist(Id()), m, (m,), Q,
                          _node("distribution duality", f"{mo.show(m)}; exact transport LP"))


# ---------------------------------------------------------------------------
# grammars


def build_from_grammar(F, Q):
    """Assemble a correspondence for an annotated grammar functor."""
    corr = _assemble(F, Q)
    # keep the caller's annotations for reporting; they do not affect equality
    corr.F = F
    return corr


def _assemble(F, Q):
    if isinstance(F, Const):
        return build_constant(F.atoms, Q)
    if isinstance(F, Id):
        return build_identity(F.annotation or mo.IdentityMod(), Q)
    if isinstance(F, Coprod):
        return build_coproduct([_assemble(c, Q) for c in F.children])
    if isinstance(F, Prod):
        return build_product([_assemble(c, Q) for c in F.children])
    if isinstance(F, Pow):
        if isinstance(F.child, Id):
            tau = F.annotation or F.child.annotation or mo.MeetAll()
            return build_powerset(tau, Q)
        iso = fn.push_pow(F)
        inner = _assemble(iso.functor, Q)
        return Correspondence(F, mo.Transport(inner.tau), tuple(mo.Transport(g) for g in inner.gamma), Q,
                              _node("powerset of linear functor", "P(A + B x Id) as a product",
                                    [inner.provenance]))
    if isinstance(F, Dist):
        return _build_dist_grammar(F, Q)
    raise NotInGrammar(f"{fn.show(F)} is outside the grammar")


def _build_dist_grammar(F, Q):
    outer = F.annotation or mo.Expect()
    if isinstance(F.child, Id):
        leaf = F.child.annotation
        if leaf is not None and not isinstance(leaf, mo.IdentityMod):
            raise NotInGrammar("leaf modalities under a distribution must be the identity")
        return build_distribution(_outer_as_scale(outer), Q)
    if Q.kind != "unit-rational":
        raise NotAdditive("distribution functors need the rational interval")
    nf = fn.normalize_G(F.child)
    if len(nf.B) > 1:
        raise NotInGrammar(f"{fn.show(F.child)} has {len(nf.B)} carrier labels; at most one is supported")
    if any(a is not None and not isinstance(a, mo.IdentityMod) for a in nf.leaf_annotation.values()):
        raise NotInGrammar("leaf modalities under a distribution must be the identity")
    if _expect_for(_outer_as_scale(outer)) is None:
        raise NotAdditive(f"{mo.show(outer)} is not a scaled expectation")
    inner = _assemble(_strip(F.child), Q)
    tau = mo.Pushforward(inner.tau, _expect_for(_outer_as_scale(outer)))
    labels = [("A", a) for a in nf.A] + [("B", b) for b in nf.B]
    gamma = (tau,) + (tuple(mo.LabelMassTest(lab) for lab in labels) if len(labels) > 1 else ())
    return Correspondence(F, tau, gamma, Q,
                          _node("distribution of linear functor",
                                "transport with label-preserving couplings; label-mass tests",
                                [inner.provenance]))


def _outer_as_scale(m):
    if isinstance(m, mo.Expect):
        return mo.IdentityMod()
    if isinstance(m, mo.ScaledExpect):
        return mo.Scale(m.c)
    return m


def _strip(G):
    """``G`` without annotations (the inner modality of a linear functor is canonical)."""
    if isinstance(G, (Prod, Coprod)):
        return type(G)(tuple(_strip(c) for c in G.children))
    if isinstance(G, Const):
        return Const(G.atoms)
    return Id()


# ---------------------------------------------------------------------------
# verification


@dataclass
class Universe:
    """Finite test universe: carriers, pseudometrics and term pairs."""

    Q: object
    sizes: tuple = (1, 2, 3)
    dist_grid: int = None
    max_set_size: int = 3
    metric_grid: int = 2
    mode: str = "exhaustive"
    samples: int = 200
    seed: int = 0
    budget: int = 200_000

    def carriers(self):
        return [tuple(f"x{k}" for k in range(n)) for n in self.sizes]

    def metrics(self, X):
        Q = self.Q
        grid = Q if Q.enumerable else ChainQuantale(self.metric_grid, Q.M)
        try:
            ds = enumerate_pseudometrics(grid, X, self.budget)
        except BudgetExceeded:
            if self.mode != "sampled":
                raise
            ds = self._random_metrics(grid, X)
        else:
            if self.mode == "sampled" and len(ds) > self.samples:
                ds = random.Random(self.seed).sample(ds, self.samples)
        if grid is not Q:
            ds = [Pseudometric(Q, X, dict(d.items())) for d in ds]
        return ds

    def _random_metrics(self, Q, X):
        # random symmetric matrices tightened to transitivity
        rng = random.Random(self.seed)
        V = list(Q.carrier)
        out = []
        for _ in range(self.samples):
            ent = {(x, y): rng.choice(V) for i, x in enumerate(X) for y in X[i + 1:]}
            out.append(Pseudometric.close(Q, X, ent))
        return out

    def describe(self):
        return {"quantale": self.Q.describe(), "sizes": list(self.sizes), "mode": self.mode,
                "dist_grid": self.dist_grid, "max_set_size": self.max_set_size,
                "metric_grid": None if self.Q.enumerable else self.metric_grid,
                "seed": self.seed}


@dataclass
class VerifyReport:
    universe: dict
    verdict: str
    metrics: int = 0
    pairs: int = 0
    instances: int = 0
    strict: int = 0
    weak_duality_violations: int = 0
    weak_duality_checked: bool = True
    counterexample: dict = None
    notes: list = field(default_factory=list)

    @property
    def equal(self):
        return self.verdict == "equal"

    def to_json(self):
        return {"universe": self.universe, "verdict": self.verdict, "metrics": self.metrics,
                "pairs": self.pairs, "instances": self.instances, "strict": self.strict,
                "weak_duality_violations": self.weak_duality_violations,
                "weak_duality_checked": self.weak_duality_checked,
                "counterexample": self.counterexample, "notes": self.notes}


def _term_json(F, t):
    return fn.term_to_json(F, t)


def _instance_json(F, Q, d, t1, t2, up, down):
    return {"metric": d.to_json(), "t1": _term_json(F, t1), "t2": _term_json(F, t2),
            "coupling": Q.fmt(up), "codensity": Q.fmt(down)}


class _CodensityTable:
    """Brute-force codensity for every pair of ``terms`` under one metric.

    Images ``tau(Ff t)`` are computed once per (member, map); identical
    image vectors are merged before pairs are compared.
    """

    def __init__(self, F, gamma, d, terms, budget):
        Q = d.Q
        t = Q.index_tables()
        self.k = t.size
        self.euclid = t.euclid
        self.leq = t.leq
        self.top = t.top
        self.carrier = t.carrier
        vecs = set()
        for f in lf._maps(d, budget):
            images = [fn.apply_map(F, f, s) for s in terms]
            for g in gamma:
                vecs.add(tuple(t.index[mo.apply_modality(g, F, v, Q)] for v in images))
        self.vecs = list(vecs)

    def value(self, i, j):
        k, eu, leq = self.k, self.euclid, self.leq
        best = self.top
        for v in self.vecs:
            e = eu[v[i] * k + v[j]]
            if e != best and leq[e * k + best]:
                best = e
        return self.carrier[best]


def _mentions(m, cls):
    if isinstance(m, cls):
        return True
    for v in vars(m).values():
        if isinstance(v, mo.Modality) and _mentions(v, cls):
            return True
        if isinstance(v, tuple) and any(isinstance(p, mo.Modality) and _mentions(p, cls) for p in v):
            return True
    return False


def _usable_brute(Q, gamma):
    return Q.enumerable and not any(_mentions(g, mo.LabelMassTest) for g in gamma)


def verify(corr, universe, strategy=None, weak=True):
    """Compare the two liftings on every instance of ``universe``.

    The verdict is ``equal`` or ``counterexample``; the payload is the first
    unequal instance in a fixed visiting order, so it is reproducible.  As
    a sanity layer the weak inequality against ``Gamma = {tau}`` is checked
    too, and any violation is counted and flagged in the payload.
    """
    F, Q = corr.F, corr.Q
    if strategy is None:
        strategy = "brute" if _usable_brute(Q, corr.gamma) else "witness"
    rep = VerifyReport(universe.describe(), "equal")
    rep.universe["strategy"] = strategy
    q = universe.dist_grid if fn.contains_dist(F) else None
    rng = random.Random(universe.seed)
    first_strict = first_break = None
    for X in universe.carriers():
        terms = fn.enumerate_terms(F, X, q, universe.max_set_size, universe.budget)
        idx = list(range(len(terms)))
        pairs = [(i, j) for i in idx for j in idx if i <= j]
        if universe.mode == "sampled" and len(pairs) > universe.samples:
            pairs = sorted(rng.sample(pairs, universe.samples))
        for d in universe.metrics(X):
            rep.metrics += 1
            table = tau_table = None
            if strategy == "brute":
                table = _CodensityTable(F, corr.gamma, d, terms, universe.budget)
                if weak:
                    tau_table = _CodensityTable(F, (corr.tau,), d, terms, universe.budget)
            for i, j in pairs:
                t1, t2 = terms[i], terms[j]
                rep.instances += 1
                up = lf.coupling_lift(F, corr.tau, d, t1, t2, q, universe.budget).value
                if table is not None:
                    down = table.value(i, j)
                else:
                    down = lf.codensity_lift(F, corr.gamma, d, t1, t2, strategy).value
                if up != down:
                    rep.strict += 1
                    if not Q.leq(up, down):
                        rep.weak_duality_violations += 1
                        first_break = first_break or _instance_json(F, Q, d, t1, t2, up, down)
                    first_strict = first_strict or _instance_json(F, Q, d, t1, t2, up, down)
                if weak:
                    try:
                        if tau_table is not None:
                            single = tau_table.value(i, j)
                        else:
                            single = lf.codensity_lift(F, (corr.tau,), d, t1, t2, strategy).value
                    except NoWitnessRule:
                        rep.weak_duality_checked = False
                    else:
                        if not Q.leq(up, single):
                            rep.weak_duality_violations += 1
                            first_break = first_break or _instance_json(F, Q, d, t1, t2, up, single)
        rep.pairs += len(pairs)
    if weak and not rep.weak_duality_checked:
        rep.notes.append("single-modality codensity had no witness rule on some instances")
    if first_break is not None:
        rep.verdict = "counterexample"
        rep.counterexample = dict(first_break, weak_duality_violated=True)
    elif first_strict is not None:
        rep.verdict = "counterexample"
        rep.counterexample = dict(first_strict, weak_duality_violated=False)
    return rep


def compare_liftings(c1, c2, universe, which="coupling"):
    """Pointwise relation between two correspondences' liftings on a universe.

    Returns ``(relation, witness)`` with relation one of ``equal``, ``leq``
    (first below second everywhere), ``geq`` or ``incomparable``.
    """
    if c1.F != c2.F or c1.Q != c2.Q:
        raise ValueError("correspondences over different functors or quantales")
    F, Q = c1.F, c1.Q
    q = universe.dist_grid if fn.contains_dist(F) else None
    below = above = True
    witness = None
    for X in universe.carriers():
        terms = fn.enumerate_terms(F, X, q, universe.max_set_size, universe.budget)
        for d in universe.metrics(X):
            for i, t1 in enumerate(terms):
                for t2 in terms[i:]:
                    if which == "coupling":
                        a = c1.coupling(d, t1, t2, q).value
                        b = c2.coupling(d, t1, t2, q).value
                    else:
                        a = c1.codensity(d, t1, t2).value
                        b = c2.codensity(d, t1, t2).value
                    if a != b:
                        if witness is None:
                            witness = _instance_json(F, Q, d, t1, t2, a, b)
                        below = below and Q.leq(a, b)
                        above = above and Q.leq(b, a)
    if below and above:
        return "equal", None
    if below:
        return "leq", witness
    if above:
        return "geq", witness
    return "incomparable", witness


def single_modality(corr):
    """The same functor and ``tau`` with ``Gamma = {tau}`` (a duality claim)."""
    return Correspondence(corr.F, corr.tau, (corr.tau,), corr.Q,
                          _node("single-modality variant", "Gamma replaced by {tau}", [corr.provenance]))



def coproduct_roundtrip(corr):
    """Restrict to every summand and rebuild."""
    return build_coproduct([restrict_coproduct(corr, i) for i in range(len(corr.F.children))])


def product_roundtrip(corr):
    """Restrict to every factor and rebuild; the rebuilt liftings sit above the original."""
    return build_product([restrict_product(corr, i) for i in range(len(corr.F.children))])


def roundtrip(corr, universe):
    """Rebuild ``corr`` from its components and compare coupling liftings.

    Returns a dict with the kind, the relation of original to rebuilt and
    an instance where they differ (if any).
    """
    if isinstance(corr.F, Coprod):
        kind, rebuilt = "coproduct", coproduct_roundtrip(corr)
    elif isinstance(corr.F, Prod):
        kind, rebuilt = "product", product_roundtrip(corr)
    else:
        raise TypeError("roundtrip needs a product or coproduct correspondence")
    rel, wit = compare_liftings(corr, rebuilt, universe)
    expected = ("equal",) if kind == "coproduct" else ("equal", "leq")
    return {"kind": kind, "relation": rel, "ok": rel in expected, "witness": wit,
            "rebuilt": rebuilt.to_json()}
