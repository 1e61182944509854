"""Coalgebras, behavioural metrics as fixpoints, and two case studies.

The DFA case compares the fixpoint metric with a shortest-distinguishing
word search; the conditional transition system (CTS) case shows a
codensity lifting that no coupling-based lifting reproduces.
"""

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import functor as fn
from . import lifting as lf
from . import modality as mo
from .errors import MalformedTerm, NoConvergenceBound, ShapeMismatch
from .functor import Const, Id, Pow, Prod
from .pseudometric import Pseudometric, enumerate_pseudometrics
from .quantale import PowersetQuantale, UnitRationalQuantale, fmt_fraction


@dataclass
class Coalgebra:
    """A map from a finite carrier to ``F``-terms over it."""

    F: object
    carrier: tuple
    structure: dict

    def __post_init__(self):
        self.carrier = tuple(self.carrier)
        missing = [x for x in self.carrier if x not in self.structure]
        if missing:
            raise MalformedTerm(f"no structure for states {missing}")
        for x in self.carrier:
            fn.validate_term(self.F, self.structure[x], self.carrier)

    def __call__(self, x):
        return self.structure[x]

    def to_json(self, dump_modality=None):
        return {"functor": fn.functor_to_json(self.F, dump_modality),
                "states": list(self.carrier),
                "structure": {x: fn.term_to_json(self.F, self.structure[x]) for x in self.carrier}}

    @classmethod
    def from_json(cls, data, parse_modality=None):
        F = fn.functor_from_json(data["functor"], parse_modality)
        states = [str(s) for s in data["states"]]
        structure = {x: fn.term_from_json(F, data["structure"][x]) for x in states}
        return cls(F, states, structure)


# ---------------------------------------------------------------------------
# liftings as plain callables ``lift(d, t1, t2) -> value``


def coupling_lifting(F, tau, dist_grid=None):
    return lambda d, t1, t2: lf.coupling_lift(F, tau, d, t1, t2, dist_grid).value


def codensity_lifting(F, gamma, strategy="brute"):
    return lambda d, t1, t2: lf.codensity_lift(F, gamma, d, t1, t2, strategy).value


def phi_step(c, lift, d):
    """``Phi(d)(x, y) = lift(d)(c(x), c(y))``."""
    C = c.carrier
    ent = {}
    for i, x in enumerate(C):
        for y in C[i:]:
            ent[(x, y)] = lift(d, c(x), c(y))
    return Pseudometric(d.Q, C, ent)


@dataclass
class FixpointReport:
    metric: Pseudometric
    steps: int
    stable: bool
    bound: Fraction = None
    history: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {"metric": self.metric.to_json(), "steps": self.steps, "stable": self.stable,
                "bound": None if self.bound is None else fmt_fraction(self.bound)}


def default_steps(c, Q):
    n = len(c.carrier)
    if Q.enumerable:
        # a strictly decreasing chain of pseudometrics has at most this length
        return n * n * len(Q.carrier) + 1
    return n * n + 2


def fixpoint(c, lift, Q, max_steps=None, discount=None, keep_history=False):
    """Kleene iteration of ``Phi`` from the all-top pseudometric.

    Stops as soon as an iterate repeats.  Without stabilisation within
    ``max_steps`` the report carries the residual bound ``discount**K * M``
    when a uniform discount is declared; otherwise the iteration gives up.
    """
    K = default_steps(c, Q) if max_steps is None else max_steps
    d = Pseudometric.indiscrete(Q, c.carrier)
    hist = [d] if keep_history else []
    for step in range(1, K + 1):
        nxt = phi_step(c, lift, d)
        if keep_history:
            hist.append(nxt)
        if nxt == d:
            return FixpointReport(d, step, True, None, hist)
        d = nxt
    if discount is None:
        raise NoConvergenceBound(f"no stabilisation after {K} steps and no discount declared")
    return FixpointReport(d, K, False, Fraction(discount) ** K * Q.M, hist)


# ---------------------------------------------------------------------------
# deterministic automata


def dfa(alphabet, outputs, delta):
    """DFA coalgebra; ``outputs[x]`` in {0, 1}, ``delta[x][a]`` a state."""
    alphabet = tuple(alphabet)
    F = fn.dfa_functor(alphabet)
    structure = {x: (outputs[x],) + tuple(delta[x][a] for a in alphabet) for x in outputs}
    return Coalgebra(F, tuple(outputs), structure)


def _dfa_parts(c):
    F = c.F
    if not (isinstance(F, Prod) and F.children and isinstance(F.children[0], Const)
            and all(isinstance(k, Id) for k in F.children[1:])):
        raise ShapeMismatch(f"{fn.show(F)} is not an automaton functor Const x Id^A")
    return len(F.children) - 1


def random_dfa(rng, n_states, n_letters):
    states = [f"s{i}" for i in range(n_states)]
    alphabet = [chr(ord("a") + k) for k in range(n_letters)]
    outputs = {s: rng.randint(0, 1) for s in states}
    delta = {s: {a: rng.choice(states) for a in alphabet} for s in states}
    return dfa(alphabet, outputs, delta)


def dfa_lifting(c, discount, Q):
    """Coupling lifting for a DFA: ``bottom`` on different outputs, else
    the meet over letters of the discounted successor distance."""
    k = _dfa_parts(c)
    if discount is None:
        inner = mo.IdentityMod()
    else:
        inner = mo.Scale(Fraction(discount))
    tau = mo.MeetMod((mo.ProjCompose(0, mo.ConstTop()),)
                     + tuple(mo.ProjCompose(i, inner) for i in range(1, k + 1)))
    return coupling_lifting(c.F, tau)


def shortest_distinguishing(c):
    """Length of a shortest word separating each pair of states (None: equivalent).

    Backward breadth-first search on the pair automaton.
    """
    k = _dfa_parts(c)
    C = c.carrier
    pred = {}
    for x, y in product(C, C):
        for i in range(1, k + 1):
            pred.setdefault((c(x)[i], c(y)[i]), []).append((x, y))
    dist = {}
    queue = deque()
    for x, y in product(C, C):
        if c(x)[0] != c(y)[0]:
            dist[(x, y)] = 0
            queue.append((x, y))
    while queue:
        p = queue.popleft()
        for q in pred.get(p, ()):
            if q not in dist:
                dist[q] = dist[p] + 1
                queue.append(q)
    return {(x, y): dist.get((x, y)) for x, y in product(C, C)}


def sdw_oracle(c, discount, M=1):
    """``discount**n`` for a shortest distinguishing word of length ``n``; 0 if none."""
    Q = UnitRationalQuantale(M)
    lengths = shortest_distinguishing(c)
    discount = Fraction(discount)
    ent = {p: Fraction(0) if n is None else Q.round_up(M * discount ** n)
           for p, n in lengths.items()}
    return Pseudometric(Q, c.carrier, ent)


def language_classes(c):
    """Moore partition refinement: blocks of language-equivalent states."""
    k = _dfa_parts(c)
    C = c.carrier
    block = {x: c(x)[0] for x in C}
    while True:
        sig = {x: (block[x],) + tuple(block[c(x)[i]] for i in range(1, k + 1)) for x in C}
        ids = {s: n for n, s in enumerate(sorted(set(sig.values()), key=repr))}
        new = {x: ids[sig[x]] for x in C}
        if len(set(new.values())) == len(set(block.values())):
            break
        block = new
    groups = {}
    for x in C:
        groups.setdefault(block[x], []).append(x)
    return sorted(groups.values())


def language_kernel(c, Q):
    """Two-valued pseudometric: top on language-equivalent pairs, bottom elsewhere."""
    cls = {x: n for n, g in enumerate(language_classes(c)) for x in g}
    C = c.carrier
    return Pseudometric(Q, C, {(x, y): Q.top if cls[x] == cls[y] else Q.bottom
                               for x in C for y in C})


# ---------------------------------------------------------------------------
# conditional transition systems


@dataclass
class CTSModel:
    """States, actions, conditions and ``T[x][(l, a)]``, a set of states.

    Missing ``(l, a)`` entries are empty.  Conditions are unordered.
    """

    states: tuple
    actions: tuple
    conditions: tuple
    T: dict

    def __post_init__(self):
        self.states = tuple(self.states)
        self.actions = tuple(self.actions)
        self.conditions = tuple(self.conditions)
        T = {}
        for x in self.states:
            row = self.T.get(x, {})
            bad = [k for k in row if k not in set(self.keys)]
            if bad:
                raise MalformedTerm(f"unknown (condition, action) pairs {bad} at {x!r}")
            T[x] = {k: frozenset(row.get(k, ())) for k in self.keys}
            for k, s in T[x].items():
                if not s <= set(self.states):
                    raise MalformedTerm(f"successors of {x!r} under {k} leave the state set")
        self.T = T

    @property
    def keys(self):
        return tuple((l, a) for l in self.conditions for a in self.actions)

    @property
    def quantale(self):
        return PowersetQuantale(self.conditions)

    @property
    def functor(self):
        return Prod(tuple(Pow(Id()) for _ in self.keys))

    def term(self, x):
        return tuple(self.T[x][k] for k in self.keys)

    def gamma(self):
        return tuple(mo.CTSLabel(a, self.keys) for a in self.actions)

    def coalgebra(self):
        return Coalgebra(self.functor, self.states, {x: self.term(x) for x in self.states})

    def to_json(self):
        return {"states": list(self.states), "actions": list(self.actions),
                "conditions": list(self.conditions),
                "transitions": [{"state": x, "condition": l, "action": a, "targets": sorted(self.T[x][(l, a)])}
                                for x in self.states for (l, a) in self.keys if self.T[x][(l, a)]]}

    @classmethod
    def from_json(cls, data):
        T = {}
        for e in data.get("transitions", []):
            T.setdefault(e["state"], {})[(e["condition"], e["action"])] = e["targets"]
        return cls(data["states"], data["actions"], data["conditions"], T)


def _as_term(m, t):
    if isinstance(t, dict):
        return tuple(frozenset(t.get(k, ())) for k in m.keys)
    return tuple(t)


def cts_lift(m, d, T1, T2):
    """Conditions ``l`` such that, for every action, the two successor sets
    under ``(l, a)`` match each other within ``l`` in both directions.

    ``T1``/``T2`` are dicts keyed by ``(l, a)`` or tuples in ``m.keys`` order.
    """
    T1, T2 = _as_term(m, T1), _as_term(m, T2)
    out = set()
    for l in m.conditions:
        ok = True
        for (k, a), S1, S2 in zip(m.keys, T1, T2):
            if k != l:
                continue
            fwd = all(any(l in d(x, y) for y in S2) for x in S1)
            bwd = all(any(l in d(x, y) for x in S1) for y in S2)
            if not (fwd and bwd):
                ok = False
                break
        if ok:
            out.add(l)
    return frozenset(out)


def cts_codensity(m, d, T1, T2, budget=200_000):
    """Codensity lifting along the per-action modalities, by brute force."""
    T1, T2 = _as_term(m, T1), _as_term(m, T2)
    return lf.codensity_lift(m.functor, m.gamma(), d, T1, T2, "brute", budget).value


def cts_terms(m):
    """Every element of ``P(X)^(L x A)`` over the model's states."""
    return fn.enumerate_terms(m.functor, m.states)


def cts_sweep(m):
    """Compare the two CTS liftings on every pseudometric and term pair."""
    Q = m.quantale
    terms = cts_terms(m)
    checked = 0
    for d in enumerate_pseudometrics(Q, m.states):
        for t1, t2 in product(terms, terms):
            a, b = cts_lift(m, d, t1, t2), cts_codensity(m, d, t1, t2)
            checked += 1
            if a != b:
                return {"equal": False, "checked": checked, "metric": d.to_json(),
                        "t1": _fmt_cts(m, t1), "t2": _fmt_cts(m, t2),
                        "lift": sorted(a), "codensity": sorted(b)}
    return {"equal": True, "checked": checked}


def _fmt_cts(m, t):
    return {f"{l},{a}": sorted(s) for (l, a), s in zip(m.keys, t)}


def cts_counterexample(conditions=("c1", "c2"), action="a", states=("x", "y"), variant=False):
    """The impossibility instance: ``d`` constant top, ``T1`` empty under
    ``(c1, a)`` and full under ``(c2, a)``, ``T2`` full under both.

    With ``variant`` the first condition also gets the full set, which
    restores couplings.  The report compares the coupling side (bottom
    whenever no coupling exists, whatever the modality) with the target
    lifting and its codensity presentation.
    """
    c1, c2 = conditions[:2]
    X = frozenset(states)
    m = CTSModel(states, (action,), conditions, {})
    Q = m.quantale
    d = Pseudometric(Q, states, {(x, y): Q.top for x in states for y in states})
    T1 = {(c1, action): X if variant else frozenset(), (c2, action): X}
    T2 = {(c1, action): X, (c2, action): X}
    t1, t2 = _as_term(m, T1), _as_term(m, T2)
    cps = fn.couplings(m.functor, t1, t2)
    lifted = cts_lift(m, d, t1, t2)
    dense = cts_codensity(m, d, t1, t2)
    # any modality at all: the join over an empty set of couplings is bottom
    probe = mo.MeetMod(tuple(mo.ProjCompose(i, mo.MeetAll()) for i in range(len(m.keys))))
    coupling_side = lf.coupling_lift(m.functor, probe, d, t1, t2).value
    strict = Q.lt(coupling_side, lifted)
    if not cps and strict:
        verdict = "inequality-only"
    elif coupling_side == lifted:
        verdict = "equal"
    else:
        verdict = "counterexample"
    return {"verdict": verdict, "conditions": list(conditions), "metric": d.to_json(),
            "t1": _fmt_cts(m, t1), "t2": _fmt_cts(m, t2),
            "couplings": len(cps), "coupling_side": sorted(coupling_side),
            "lift": sorted(lifted), "codensity": sorted(dense),
            "witness_condition": c2 if c2 in lifted else None}


def random_cts(rng, n_states, conditions, actions, p=0.5):
    states = [f"x{i}" for i in range(n_states)]
    T = {x: {(l, a): [y for y in states if rng.random() < p] for l in conditions for a in actions}
         for x in states}
    return CTSModel(states, actions, conditions, T)


def cts_metric(m, max_steps=None):
    """Greatest fixpoint of the CTS lifting on the model's own coalgebra."""
    c = m.coalgebra()
    return fixpoint(c, lambda d, t1, t2: cts_lift(m, d, t1, t2), m.quantale, max_steps)


def seeded(seed):
    return random.Random(seed)
