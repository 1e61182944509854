"""Polynomial Set-functors: expressions, concrete elements, couplings, isos.

A functor is a tree of :class:`Const`, :class:`Id`, :class:`Prod`,
:class:`Coprod`, :class:`Pow` and :class:`Dist` nodes.  Elements of F(X)
are plain hashable Python values whose shape follows the tree:

=========  ==================================================
node       term
=========  ==================================================
Const      one of the atoms
Id         a point of X
Prod       a tuple, one entry per child
Coprod     ``Inj(index, subterm)``
Pow        a frozenset of subterms
Dist       an :class:`FDist` (positive rational weights, total 1)
=========  ==================================================
"""

from collections import namedtuple
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb

from .errors import (BudgetExceeded, DistNotEnumerable, DistRequiresGrid,
                     MalformedTerm, NotInGrammar, NotInGrammarG)
from .quantale import as_fraction, fmt_fraction

DEFAULT_BUDGET = 500_000

Inj = namedtuple("Inj", "index term")


def canon_key(t):
    """Total sort key over terms, stable across interpreter runs."""
    if isinstance(t, bool):
        return (0, int(t))
    if isinstance(t, (int, Fraction)):
        return (1, Fraction(t))
    if isinstance(t, str):
        return (2, t)
    if isinstance(t, Inj):
        return (3, t.index, canon_key(t.term))
    if isinstance(t, tuple):
        return (4, tuple(canon_key(e) for e in t))
    if isinstance(t, frozenset):
        return (5, tuple(sorted(canon_key(e) for e in t)))
    if isinstance(t, FDist):
        return (6, tuple((canon_key(s), w) for s, w in t.items))
    return (9, repr(t))


class FDist:
    """A finitely supported probability distribution with exact weights."""

    __slots__ = ("items", "_hash")

    def __init__(self, weights, check=True):
        if isinstance(weights, Mapping):
            weights = weights.items()
        acc = {}
        for term, w in weights:
            w = as_fraction(w)
            if w < 0:
                raise MalformedTerm(f"negative weight {w}")
            if w:
                acc[term] = acc.get(term, Fraction(0)) + w
        if check and sum(acc.values(), Fraction(0)) != 1:
            raise MalformedTerm("distribution weights must sum to exactly 1")
        self.items = tuple(sorted(acc.items(), key=lambda kv: canon_key(kv[0])))
        self._hash = hash(self.items)

    @property
    def support(self):
        return tuple(t for t, _ in self.items)

    def weight(self, term):
        for t, w in self.items:
            if t == term:
                return w
        return Fraction(0)

    def __eq__(self, other):
        return isinstance(other, FDist) and self.items == other.items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "FDist(" + ", ".join(f"{t!r}: {w}" for t, w in self.items) + ")"


# ---------------------------------------------------------------------------
# functor expressions


@dataclass(frozen=True)
class FunctorExpr:
    def __str__(self):
        return show(self)


@dataclass(frozen=True)
class Const(FunctorExpr):
    atoms: tuple
    annotation: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atoms in constant functor")


@dataclass(frozen=True)
class Id(FunctorExpr):
    annotation: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prod(FunctorExpr):
    children: tuple
    annotation: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("product needs at least one factor")


@dataclass(frozen=True)
class Coprod(FunctorExpr):
    children: tuple
    annotation: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("coproduct needs at least one summand")


@dataclass(frozen=True)
class Pow(FunctorExpr):
    child: FunctorExpr
    annotation: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Dist(FunctorExpr):
    child: FunctorExpr
    annotation: object = field(default=None, compare=False, repr=False)


def annotate(F, modality):
    """Copy of ``F`` carrying ``modality`` as its annotation."""
    kw = {k: getattr(F, k) for k in F.__dataclass_fields__ if k != "annotation"}
    return type(F)(annotation=modality, **kw)


def show(F):
    if isinstance(F, Const):
        return "{" + ",".join(map(str, F.atoms)) + "}"
    if isinstance(F, Id):
        return "Id"
    if isinstance(F, Prod):
        return "(" + " x ".join(show(c) for c in F.children) + ")"
    if isinstance(F, Coprod):
        return "(" + " + ".join(show(c) for c in F.children) + ")"
    if isinstance(F, Pow):
        return f"P{show(F.child)}" if isinstance(F.child, Id) else f"P({show(F.child)})"
    if isinstance(F, Dist):
        return f"D{show(F.child)}" if isinstance(F.child, Id) else f"D({show(F.child)})"
    raise TypeError(F)


def contains_dist(F):
    if isinstance(F, Dist):
        return True
    if isinstance(F, (Prod, Coprod)):
        return any(contains_dist(c) for c in F.children)
    if isinstance(F, Pow):
        return contains_dist(F.child)
    return False


def contains_pow(F):
    if isinstance(F, Pow):
        return True
    if isinstance(F, (Prod, Coprod)):
        return any(contains_pow(c) for c in F.children)
    if isinstance(F, Dist):
        return contains_pow(F.child)
    return False


def dfa_functor(alphabet, outputs=(0, 1)):
    """``Const{0,1} x Id^A`` with one Id factor per letter."""
    return Prod((Const(tuple(outputs)),) + tuple(Id() for _ in alphabet))


# ---------------------------------------------------------------------------
# terms


def validate_term(F, t, X=None):
    """Raise :class:`MalformedTerm` unless ``t`` is an element of ``F(X)``."""
    if isinstance(F, Const):
        if t not in F.atoms:
            raise MalformedTerm(f"{t!r} is not an atom of {show(F)}")
    elif isinstance(F, Id):
        if X is not None and t not in X:
            raise MalformedTerm(f"{t!r} is not in the carrier")
    elif isinstance(F, Prod):
        if not isinstance(t, tuple) or isinstance(t, Inj) or len(t) != len(F.children):
            raise MalformedTerm(f"{t!r} is not a {len(F.children)}-tuple")
        for c, s in zip(F.children, t):
            validate_term(c, s, X)
    elif isinstance(F, Coprod):
        if not isinstance(t, Inj) or not 0 <= t.index < len(F.children):
            raise MalformedTerm(f"{t!r} is not an injection into {show(F)}")
        validate_term(F.children[t.index], t.term, X)
    elif isinstance(F, Pow):
        if not isinstance(t, frozenset):
            raise MalformedTerm(f"{t!r} is not a frozenset")
        for s in t:
            validate_term(F.child, s, X)
    elif isinstance(F, Dist):
        if not isinstance(t, FDist):
            raise MalformedTerm(f"{t!r} is not a distribution")
        for s in t.support:
            validate_term(F.child, s, X)
    else:
        raise MalformedTerm(f"unknown functor node {F!r}")
    return t


def apply_map(F, f, t):
    """The functor action ``F(f)`` on the term ``t``."""
    if isinstance(f, Mapping):
        f = f.__getitem__
    return _apply(F, f, t)


def _apply(F, f, t):
    if isinstance(F, Const):
        return t
    if isinstance(F, Id):
        return f(t)
    if isinstance(F, Prod):
        return tuple(_apply(c, f, s) for c, s in zip(F.children, t))
    if isinstance(F, Coprod):
        return Inj(t.index, _apply(F.children[t.index], f, t.term))
    if isinstance(F, Pow):
        return frozenset(_apply(F.child, f, s) for s in t)
    if isinstance(F, Dist):
        return FDist([(_apply(F.child, f, s), w) for s, w in t.items])
    raise MalformedTerm(f"unknown functor node {F!r}")


def leaves(F, t):
    """Carrier points occurring in ``t``."""
    out = set()
    _apply(F, lambda x: out.add(x) or x, t)
    return out


def count_terms(F, n, dist_grid=None, max_set_size=None):
    if isinstance(F, Const):
        return len(F.atoms)
    if isinstance(F, Id):
        return n
    if isinstance(F, Prod):
        out = 1
        for c in F.children:
            out *= count_terms(c, n, dist_grid, max_set_size)
        return out
    if isinstance(F, Coprod):
        return sum(count_terms(c, n, dist_grid, max_set_size) for c in F.children)
    if isinstance(F, Pow):
        k = count_terms(F.child, n, dist_grid, max_set_size)
        top = k if max_set_size is None else min(k, max_set_size)
        return sum(comb(k, r) for r in range(top + 1))
    if isinstance(F, Dist):
        if dist_grid is None:
            raise DistRequiresGrid("enumerating a distribution functor needs dist_grid")
        k = count_terms(F.child, n, dist_grid, max_set_size)
        return comb(dist_grid + k - 1, k - 1) if k else 0
    raise TypeError(F)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_terms(F, X, dist_grid=None, max_set_size=None, budget=DEFAULT_BUDGET):
    """Every element of ``F(X)``; distributions restricted to weights in ``1/q``."""
    X = tuple(X)
    size = count_terms(F, len(X), dist_grid, max_set_size)
    if size > budget:
        raise BudgetExceeded(f"enumeration of {show(F)}", size, budget)
    return _enum(F, X, dist_grid, max_set_size)


def _enum(F, X, q, cap):
    if isinstance(F, Const):
        return list(F.atoms)
    if isinstance(F, Id):
        return list(X)
    if isinstance(F, Prod):
        return [tuple(p) for p in product(*(_enum(c, X, q, cap) for c in F.children))]
    if isinstance(F, Coprod):
        return [Inj(i, s) for i, c in enumerate(F.children) for s in _enum(c, X, q, cap)]
    if isinstance(F, Pow):
        inner = _enum(F.child, X, q, cap)
        top = len(inner) if cap is None else min(len(inner), cap)
        return [frozenset(s) for r in range(top + 1) for s in combinations(inner, r)]
    if isinstance(F, Dist):
        inner = _enum(F.child, X, q, cap)
        if not inner:
            return []
        return [FDist([(s, Fraction(k, q)) for s, k in zip(inner, ks) if k])
                for ks in _compositions(q, len(inner))]
    raise TypeError(F)


def project(F, t, i):
    return _apply(F, lambda p: p[i], t)


def couplings(F, t1, t2, dist_grid=None, budget=DEFAULT_BUDGET):
    """The couplings of ``t1`` and ``t2``: elements of ``F(X x X)`` projecting onto them.

    Distribution nodes need ``dist_grid``: only couplings whose weights are
    multiples of ``1/q`` are produced.  When both marginals live on that
    grid the transportation polytope has all its vertices on it, so the
    optimum of any linear objective is still attained.
    """
    return list(_coup(F, t1, t2, dist_grid, budget))


def _coup(F, t1, t2, q, budget):
    if isinstance(F, Const):
        return [t1] if t1 == t2 else []
    if isinstance(F, Id):
        return [(t1, t2)]
    if isinstance(F, Prod):
        parts = [_coup(c, a, b, q, budget) for c, a, b in zip(F.children, t1, t2)]
        size = 1
        for p in parts:
            size *= len(p)
        if size > budget:
            raise BudgetExceeded(f"couplings of {show(F)}", size, budget)
        return [tuple(p) for p in product(*parts)]
    if isinstance(F, Coprod):
        if t1.index != t2.index:
            return []
        return [Inj(t1.index, s) for s in _coup(F.children[t1.index], t1.term, t2.term, q, budget)]
    if isinstance(F, Pow):
        return _pow_couplings(F, t1, t2, q, budget)
    if isinstance(F, Dist):
        return _dist_couplings(F, t1, t2, q, budget)
    raise TypeError(F)


def _pow_couplings(F, T1, T2, q, budget):
    if not T1 and not T2:
        return [frozenset()]
    if not T1 or not T2:
        return []
    T1 = sorted(T1, key=canon_key)
    T2 = sorted(T2, key=canon_key)
    i1 = {u: i for i, u in enumerate(T1)}
    i2 = {u: i for i, u in enumerate(T2)}
    cands = []
    for u1 in T1:
        for u2 in T2:
            for s in _coup(F.child, u1, u2, q, budget):
                cands.append((s, i1[u1], i2[u2]))
    if 2 ** len(cands) > budget:
        raise BudgetExceeded(f"couplings of {show(F)}", 2 ** len(cands), budget)
    full1 = (1 << len(T1)) - 1
    full2 = (1 << len(T2)) - 1
    out = []
    for mask in range(1, 1 << len(cands)):
        c1 = c2 = 0
        chosen = []
        for j, (s, a, b) in enumerate(cands):
            if mask >> j & 1:
                c1 |= 1 << a
                c2 |= 1 << b
                chosen.append(s)
        if c1 == full1 and c2 == full2:
            out.append(frozenset(chosen))
    return out


def _dist_couplings(F, mu1, mu2, q, budget):
    if q is None:
        raise DistNotEnumerable("distribution couplings form a polytope; pass dist_grid")
    units1, units2 = {}, {}
    for mu, units in ((mu1, units1), (mu2, units2)):
        for s, w in mu.items:
            k = w * q
            if k.denominator != 1:
                raise DistRequiresGrid(f"weight {w} is not a multiple of 1/{q}")
            units[s] = int(k)
    cands = []
    for u1 in mu1.support:
        for u2 in mu2.support:
            for s in _coup(F.child, u1, u2, q, budget):
                cands.append((s, u1, u2))
    out = []
    rem1, rem2 = dict(units1), dict(units2)
    chosen = []

    def rec(j):
        if len(out) > budget:
            raise BudgetExceeded(f"grid couplings of {show(F)}", len(out), budget)
        if j == len(cands):
            if all(v == 0 for v in rem1.values()) and all(v == 0 for v in rem2.values()):
                out.append(FDist([(s, Fraction(k, q)) for s, k in chosen if k]))
            return
        s, u1, u2 = cands[j]
        # a support point whose last candidate this is must be saturated here
        for k in range(min(rem1[u1], rem2[u2]), -1, -1):
            rem1[u1] -= k
            rem2[u2] -= k
            chosen.append((s, k))
            if _feasible_tail(cands, j + 1, rem1, rem2):
                rec(j + 1)
            chosen.pop()
            rem1[u1] += k
            rem2[u2] += k

    rec(0)
    return out


def _feasible_tail(cands, j, rem1, rem2):
    left1 = {u for _, u, _ in cands[j:]}
    left2 = {u for _, _, u in cands[j:]}
    return (all(v == 0 or u in left1 for u, v in rem1.items())
            and all(v == 0 or u in left2 for u, v in rem2.items()))


def couplings_by_definition(F, t1, t2, X, dist_grid=None, budget=DEFAULT_BUDGET):
    """Oracle: filter all of ``F(X x X)`` by the two projections."""
    XX = [(x, y) for x in X for y in X]
    return [t for t in enumerate_terms(F, XX, dist_grid, budget=budget)
            if project(F, t, 0) == t1 and project(F, t, 1) == t2]


def has_finite_couplings(F):
    return not contains_dist(F)


# ---------------------------------------------------------------------------
# structural isomorphisms


@dataclass
class Decomposition:
    """``F`` split as a coproduct indexed by ``F{*}``."""

    functor: FunctorExpr
    components: list  # of (index, FunctorExpr)
    _to: dict = field(repr=False)
    _from: dict = field(repr=False)

    def index_of(self, t):
        return _apply(self.functor, lambda _: "*", t)

    def to_component(self, t):
        i = self.index_of(t)
        return i, self._to[i](t)

    def from_component(self, i, s):
        return self._from[i](s)


def decompose(F, budget=DEFAULT_BUDGET):
    parts = _dec(F)
    comps = [(i, c) for i, (c, _, _) in parts.items()]
    comps.sort(key=lambda ic: canon_key(ic[0]))
    if len(comps) > budget:
        raise BudgetExceeded("decomposition", len(comps), budget)
    return Decomposition(F, comps,
                         {i: to for i, (_, to, _) in parts.items()},
                         {i: fr for i, (_, _, fr) in parts.items()})


def _ident(t):
    return t


def _dec(F):
    if isinstance(F, Const):
        return {a: (Const((a,)), _ident, _ident) for a in F.atoms}
    if isinstance(F, Id):
        return {"*": (F, _ident, _ident)}
    if isinstance(F, Coprod):
        out = {}
        for j, child in enumerate(F.children):
            for i, (comp, to, fr) in _dec(child).items():
                out[Inj(j, i)] = (comp,
                                  (lambda t, to=to: to(t.term)),
                                  (lambda s, fr=fr, j=j: Inj(j, fr(s))))
        return out
    if isinstance(F, Prod):
        subs = [_dec(c) for c in F.children]
        out = {}
        for combo in product(*(list(s.items()) for s in subs)):
            index = tuple(i for i, _ in combo)
            comp = Prod(tuple(c for _, (c, _, _) in combo))
            tos = [to for _, (_, to, _) in combo]
            frs = [fr for _, (_, _, fr) in combo]
            out[index] = (comp,
                          (lambda t, tos=tos: tuple(to(s) for to, s in zip(tos, t))),
                          (lambda s, frs=frs: tuple(fr(x) for fr, x in zip(frs, s))))
        return out
    if isinstance(F, (Pow, Dist)):
        ones = _enum(F, ("*",), 1, None) if isinstance(F, Dist) else _enum(F, ("*",), None, None)
        if len(ones) == 1:
            return {ones[0]: (F, _ident, _ident)}
        raise NotInGrammar(f"{show(F)} splits into components outside the functor grammar")
    raise TypeError(F)


@dataclass
class NormalForm:
    """``G ~= A + B x Id``; normal terms are ``Inj(0, a)`` or ``Inj(1, (b, x))``."""

    functor: FunctorExpr
    A: tuple
    B: tuple
    leaf_annotation: dict
    _to: object = field(repr=False)
    _fromA: object = field(repr=False)
    _fromB: object = field(repr=False)

    def to_normal(self, t):
        r = self._to(t)
        return Inj(0, r[1]) if r[0] == "A" else Inj(1, (r[1], r[2]))

    def from_normal(self, n):
        if n.index == 0:
            return self._fromA(n.term)
        b, x = n.term
        return self._fromB(b, x)

    def label(self, t):
        """The A- or B-label of ``t`` (ignoring its carrier point)."""
        r = self._to(t)
        return ("A", r[1]) if r[0] == "A" else ("B", r[1])

    def as_functor(self):
        return Coprod((Const(self.A), Prod((Const(self.B), Id()))))


def normalize_G(G):
    A, B, ann, to, fa, fb = _nf(G)
    return NormalForm(G, tuple(A), tuple(B), ann, to, fa, fb)


def _nf(G):
    if isinstance(G, Const):
        return list(G.atoms), [], {}, (lambda t: ("A", t)), _ident, None
    if isinstance(G, Id):
        return [], [()], {(): G.annotation}, (lambda x: ("B", (), x)), None, (lambda b, x: x)
    if isinstance(G, Coprod):
        subs = [_nf(c) for c in G.children]
        A = [(j, a) for j, s in enumerate(subs) for a in s[0]]
        B = [(j, b) for j, s in enumerate(subs) for b in s[1]]
        ann = {(j, b): v for j, s in enumerate(subs) for b, v in s[2].items()}

        def to(t):
            r = subs[t.index][3](t.term)
            return (r[0], (t.index, r[1])) + r[2:]

        def fa(label):
            j, a = label
            return Inj(j, subs[j][4](a))

        def fb(label, x):
            j, b = label
            return Inj(j, subs[j][5](b, x))

        return A, B, ann, to, fa, fb
    if isinstance(G, Prod):
        subs = [_nf(c) for c in G.children]
        linear = [j for j, s in enumerate(subs) if s[1]]
        if len(linear) > 1:
            raise NotInGrammarG(f"{show(G)} is not linear in its argument")
        A = [tuple(p) for p in product(*(s[0] for s in subs))]
        B, ann = [], {}
        k = linear[0] if linear else None
        if k is not None:
            for p in product(*((s[1] if j == k else s[0]) for j, s in enumerate(subs))):
                B.append(tuple(p))
                ann[tuple(p)] = subs[k][2][p[k]]

        def to(t):
            rs = [s[3](x) for s, x in zip(subs, t)]
            label = tuple(r[1] for r in rs)
            if k is not None and rs[k][0] == "B":
                return ("B", label, rs[k][2])
            return ("A", label)

        def fa(label):
            return tuple(s[4](l) for s, l in zip(subs, label))

        def fb(label, x):
            return tuple(s[5](l, x) if j == k else s[4](l)
                         for j, (s, l) in enumerate(zip(subs, label)))

        return A, B, ann, to, fa, fb
    raise NotInGrammarG(f"{show(G)} is outside G ::= A | Id | A x G | coproducts")


EMPTY_SET_ATOM = "{}"
FULL_SET_ATOM = "{*}"


@dataclass
class PushedPow:
    """``P(G) ~= prod_a P(1) x prod_b P(Id)`` with ``P(1)`` read as two atoms."""

    source: FunctorExpr
    functor: FunctorExpr
    normal: NormalForm
    _wrapped: bool = field(repr=False)

    def to_pushed(self, T):
        nf = self.normal
        ns = [nf.to_normal(t) for t in T]
        present = {n.term for n in ns if n.index == 0}
        parts = [FULL_SET_ATOM if a in present else EMPTY_SET_ATOM for a in nf.A]
        for b in nf.B:
            parts.append(frozenset(n.term[1] for n in ns if n.index == 1 and n.term[0] == b))
        if not self._wrapped:
            return parts[0] if parts else EMPTY_SET_ATOM
        return tuple(parts)

    def from_pushed(self, u):
        nf = self.normal
        parts = list(u) if self._wrapped else ([u] if (nf.A or nf.B) else [])
        out = set()
        for a, flag in zip(nf.A, parts):
            if flag == FULL_SET_ATOM:
                out.add(nf.from_normal(Inj(0, a)))
        for b, xs in zip(nf.B, parts[len(nf.A):]):
            for x in xs:
                out.add(nf.from_normal(Inj(1, (b, x))))
        return frozenset(out)


def push_pow(F):
    if not isinstance(F, Pow):
        raise NotInGrammarG("push_pow expects a powerset node")
    nf = normalize_G(F.child)
    comps = [Const((EMPTY_SET_ATOM, FULL_SET_ATOM)) for _ in nf.A]
    for b in nf.B:
        ann = nf.leaf_annotation.get(b)
        comps.append(Pow(Id(), annotation=ann if ann is not None else F.annotation))
    if not comps:
        return PushedPow(F, Const((EMPTY_SET_ATOM,)), nf, False)
    if len(comps) == 1:
        return PushedPow(F, comps[0], nf, False)
    return PushedPow(F, Prod(tuple(comps)), nf, True)


# ---------------------------------------------------------------------------
# JSON


_KEYS = ("const", "id", "prod", "coprod", "pow", "dist")


def functor_from_json(data, parse_modality=None):
    if not isinstance(data, dict):
        raise ValueError(f"functor node must be an object, got {data!r}")
    keys = [k for k in _KEYS if k in data]
    if len(keys) != 1:
        raise ValueError(f"functor node needs exactly one of {_KEYS}: {data!r}")
    key = keys[0]
    ann = None
    if "modality" in data:
        if parse_modality is None:
            raise ValueError("modality annotation given but no modality parser")
        ann = parse_modality(data["modality"])
    body = data[key]
    if key == "const":
        return Const(tuple(body), annotation=ann)
    if key == "id":
        return Id(annotation=ann)
    if key == "prod":
        return Prod(tuple(functor_from_json(c, parse_modality) for c in body), annotation=ann)
    if key == "coprod":
        return Coprod(tuple(functor_from_json(c, parse_modality) for c in body), annotation=ann)
    if key == "pow":
        return Pow(functor_from_json(body, parse_modality), annotation=ann)
    return Dist(functor_from_json(body, parse_modality), annotation=ann)


def functor_to_json(F, dump_modality=None):
    if isinstance(F, Const):
        out = {"const": list(F.atoms)}
    elif isinstance(F, Id):
        out = {"id": {}}
    elif isinstance(F, Prod):
        out = {"prod": [functor_to_json(c, dump_modality) for c in F.children]}
    elif isinstance(F, Coprod):
        out = {"coprod": [functor_to_json(c, dump_modality) for c in F.children]}
    elif isinstance(F, Pow):
        out = {"pow": functor_to_json(F.child, dump_modality)}
    else:
        out = {"dist": functor_to_json(F.child, dump_modality)}
    if F.annotation is not None and dump_modality is not None:
        out["modality"] = dump_modality(F.annotation)
    return out


def term_to_json(F, t, fmt_leaf=lambda x: x):
    if isinstance(F, Const):
        return t
    if isinstance(F, Id):
        return fmt_leaf(t)
    if isinstance(F, Prod):
        return [term_to_json(c, s, fmt_leaf) for c, s in zip(F.children, t)]
    if isinstance(F, Coprod):
        return {"in": t.index, "term": term_to_json(F.children[t.index], t.term, fmt_leaf)}
    if isinstance(F, Pow):
        return [term_to_json(F.child, s, fmt_leaf) for s in sorted(t, key=canon_key)]
    return [[term_to_json(F.child, s, fmt_leaf), fmt_fraction(w)] for s, w in t.items]


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(e) for e in v)
    return v


def term_from_json(F, v, parse_leaf=lambda x: x):
    try:
        if isinstance(F, Const):
            v = _freeze(v)
            if v not in F.atoms:
                raise MalformedTerm(f"{v!r} is not an atom of {show(F)}")
            return v
        if isinstance(F, Id):
            return parse_leaf(v)
        if isinstance(F, Prod):
            if not isinstance(v, list) or len(v) != len(F.children):
                raise MalformedTerm(f"expected a list of {len(F.children)} entries: {v!r}")
            return tuple(term_from_json(c, s, parse_leaf) for c, s in zip(F.children, v))
        if isinstance(F, Coprod):
            i = int(v["in"])
            if not 0 <= i < len(F.children):
                raise MalformedTerm(f"injection index {i} out of range")
            return Inj(i, term_from_json(F.children[i], v["term"], parse_leaf))
        if isinstance(F, Pow):
            return frozenset(term_from_json(F.child, s, parse_leaf) for s in v)
        return FDist([(term_from_json(F.child, s, parse_leaf), as_fraction(w)) for s, w in v])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedTerm):
            raise
        raise MalformedTerm(f"cannot read term {v!r} for {show(F)}: {exc}") from None
