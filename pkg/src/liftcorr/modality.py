"""Symbolic modalities ``F(V) -> V``, their interpreter and the well-behavedness checker.

A modality is an immutable tree of nodes.  ``apply_modality(m, F, v, Q)``
evaluates it on a term ``v`` of ``F(V)``; nodes check that ``F`` has the
shape they expect and raise :class:`ShapeMismatch` otherwise.

On a finite grid ``Chain(n, M)`` any numeric scaling or averaging is
rounded *up* to the next grid point, i.e. toward bottom.  Rounding up keeps
the modality monotone and sub-additive; rounding down would let small
positive values collapse to top.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import functor as fn
from .errors import BudgetExceeded, NotEnumerable, ShapeMismatch
from .functor import Coprod, Const, Dist, FDist, Id, Inj, Pow, Prod
from .quantale import as_fraction, fmt_fraction

NUMERIC_KINDS = ("chain", "unit-rational")


class Modality:
    """Base class; subclasses are frozen dataclasses, hence hashable."""

    def __str__(self):
        return show(self)


def _numeric(Q, what):
    if Q.kind not in NUMERIC_KINDS:
        raise ShapeMismatch(f"{what} needs a numeric quantale, got {Q.describe()}")


def _expect_shape(F, cls, what):
    if not isinstance(F, cls):
        raise ShapeMismatch(f"{what} expects a {cls.__name__} functor, got {fn.show(F)}")


@dataclass(frozen=True)
class IdentityMod(Modality):
    def eval(self, F, v, Q):
        _expect_shape(F, Id, "identity modality")
        return v


@dataclass(frozen=True)
class ConstTop(Modality):
    def eval(self, F, v, Q):
        return Q.top


@dataclass(frozen=True)
class Scale(Modality):
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        if not 0 <= self.c <= 1:
            raise ValueError(f"scale factor {self.c} outside [0, 1]")

    def eval(self, F, v, Q):
        _expect_shape(F, Id, "scale")
        _numeric(Q, "scale")
        return Q.round_up(self.c * v)


@dataclass(frozen=True)
class MonotoneTable(Modality):
    """An explicit map ``V -> V`` (monotone or not; the checker decides)."""

    table: tuple

    def __post_init__(self):
        t = self.table
        if isinstance(t, dict):
            t = tuple(t.items())
        object.__setattr__(self, "table", tuple(t))

    def eval(self, F, v, Q):
        _expect_shape(F, Id, "table modality")
        for k, out in self.table:
            if k == v:
                return out
        raise ShapeMismatch(f"table modality undefined at {Q.fmt(v)!r}")


@dataclass(frozen=True)
class MeetAll(Modality):
    def eval(self, F, v, Q):
        _expect_shape(F, Pow, "meet modality")
        return Q.meet(v)


def _expectation(v, Q):
    _numeric(Q, "expectation")
    return sum((w * x for x, w in v.items), Fraction(0))


@dataclass(frozen=True)
class Expect(Modality):
    def eval(self, F, v, Q):
        _expect_shape(F, Dist, "expectation")
        return Q.round_up(_expectation(v, Q))


@dataclass(frozen=True)
class ScaledExpect(Modality):
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        if not 0 <= self.c <= 1:
            raise ValueError(f"scale factor {self.c} outside [0, 1]")

    def eval(self, F, v, Q):
        _expect_shape(F, Dist, "scaled expectation")
        return Q.round_up(self.c * _expectation(v, Q))


@dataclass(frozen=True)
class ComposeId(Modality):
    """``outer o inner`` with ``outer`` a modality for the identity functor."""

    outer: Modality
    inner: Modality

    def eval(self, F, v, Q):
        return self.outer.eval(Id(), self.inner.eval(F, v, Q), Q)


@dataclass(frozen=True)
class TensorMod(Modality):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def eval(self, F, v, Q):
        out = Q.top
        for m in self.parts:
            out = Q.tensor_raw(out, m.eval(F, v, Q))
        return out


@dataclass(frozen=True)
class MeetMod(Modality):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def eval(self, F, v, Q):
        return Q.meet([m.eval(F, v, Q) for m in self.parts])


@dataclass(frozen=True)
class Cotuple(Modality):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def eval(self, F, v, Q):
        _expect_shape(F, Coprod, "cotuple")
        if len(F.children) != len(self.parts):
            raise ShapeMismatch("cotuple arity differs from the coproduct")
        return self.parts[v.index].eval(F.children[v.index], v.term, Q)


@dataclass(frozen=True)
class BarExtend(Modality):
    """``m`` on summand ``index``, top on every other summand."""

    index: int
    m: Modality

    def eval(self, F, v, Q):
        _expect_shape(F, Coprod, "summand extension")
        if v.index != self.index:
            return Q.top
        return self.m.eval(F.children[self.index], v.term, Q)


@dataclass(frozen=True)
class TopAt(Modality):
    """Top on summand ``index``, bottom elsewhere."""

    index: int

    def eval(self, F, v, Q):
        _expect_shape(F, Coprod, "summand test")
        return Q.top if v.index == self.index else Q.bottom


@dataclass(frozen=True)
class ProjCompose(Modality):
    index: int
    m: Modality

    def eval(self, F, v, Q):
        _expect_shape(F, Prod, "projection")
        if not 0 <= self.index < len(F.children):
            raise ShapeMismatch(f"projection index {self.index} out of range")
        return self.m.eval(F.children[self.index], v[self.index], Q)


@dataclass(frozen=True)
class RestrictProd(Modality):
    """Modality on factor ``index`` obtained by filling the others with ``fill``.

    ``fill`` holds, for every other factor, the image of the one-point
    set's unique element (top everywhere).
    """

    index: int
    m: Modality
    fill: tuple
    product: Prod

    def eval(self, F, v, Q):
        t = list(self.fill)
        t[self.index] = v
        return self.m.eval(self.product, tuple(t), Q)


@dataclass(frozen=True)
class PreInject(Modality):
    """``m o inj_index``: a coproduct modality read on one summand."""

    index: int
    m: Modality
    coproduct: Coprod

    def eval(self, F, v, Q):
        return self.m.eval(self.coproduct, Inj(self.index, v), Q)


@dataclass(frozen=True)
class CondIndicator(Modality):
    atom: object

    def eval(self, F, v, Q):
        _expect_shape(F, Const, "atom indicator")
        return Q.top if v == self.atom else Q.bottom


@dataclass(frozen=True)
class CTSLabel(Modality):
    """Conditions ``l`` lying in every value reached under ``(l, action)``.

    ``keys`` lists the ``(condition, action)`` pairs in the order of the
    product factors.
    """

    action: object
    keys: tuple

    def eval(self, F, v, Q):
        _expect_shape(F, Prod, "CTS modality")
        out = set()
        for (l, a), vals in zip(self.keys, v):
            if a == self.action and all(l in s for s in vals):
                out.add(l)
        return frozenset(out)


@dataclass(frozen=True)
class Pushforward(Modality):
    """On ``P(G)`` or ``D(G)``: map ``inner`` over the elements, then ``outer``."""

    inner: Modality
    outer: Modality

    def eval(self, F, v, Q):
        if isinstance(F, Pow):
            w = frozenset(self.inner.eval(F.child, s, Q) for s in v)
            return self.outer.eval(Pow(Id()), w, Q)
        if isinstance(F, Dist):
            w = FDist([(self.inner.eval(F.child, s, Q), p) for s, p in v.items])
            return self.outer.eval(Dist(Id()), w, Q)
        raise ShapeMismatch(f"pushforward expects P(G) or D(G), got {fn.show(F)}")


@lru_cache(maxsize=256)
def _pushed(F):
    return fn.push_pow(F)


@lru_cache(maxsize=256)
def _normal(G):
    return fn.normalize_G(G)


@dataclass(frozen=True)
class Transport(Modality):
    """Evaluate ``m`` on the product form of ``P(G)``."""

    m: Modality

    def eval(self, F, v, Q):
        _expect_shape(F, Pow, "transport")
        iso = _pushed(F)
        return self.m.eval(iso.functor, iso.to_pushed(v), Q)


def label_mass(F, v, label):
    nf = _normal(F.child)
    return sum((p for s, p in v.items if nf.label(s) == label), Fraction(0))


@dataclass(frozen=True)
class LabelMassTest(Modality):
    """On ``D(G)``: top iff the mass carried by ``label`` equals ``p``.

    The lifting code only ever needs the members whose ``p`` is the label
    mass of one of the two compared distributions; ``p=None`` stands for
    that whole family.
    """

    label: tuple
    p: Fraction = None

    def eval(self, F, v, Q):
        _expect_shape(F, Dist, "label mass test")
        if self.p is None:
            raise ShapeMismatch("label mass family must be instantiated before evaluation")
        return Q.top if label_mass(F, v, self.label) == self.p else Q.bottom


@dataclass(frozen=True)
class EmptyTest(Modality):
    """On ``P(G)``: top on the empty set, bottom otherwise."""

    def eval(self, F, v, Q):
        _expect_shape(F, Pow, "emptiness test")
        return Q.top if not v else Q.bottom


def apply_modality(m, F, v, Q):
    try:
        return m.eval(F, v, Q)
    except (AttributeError, TypeError, IndexError) as exc:
        raise ShapeMismatch(f"{show(m)} cannot read a term of {fn.show(F)}: {exc}") from None


def combine(kind, parts):
    parts = list(parts)
    if kind == "compose_id":
        if len(parts) != 2:
            raise ShapeMismatch("compose_id takes (outer, inner)")
        return ComposeId(parts[0], parts[1])
    if not parts:
        raise ShapeMismatch(f"{kind} of no modalities")
    if kind == "tensor":
        return TensorMod(tuple(parts))
    if kind == "meet":
        return MeetMod(tuple(parts))
    raise ValueError(f"unknown combinator {kind!r}")


def show(m):
    if isinstance(m, IdentityMod):
        return "id"
    if isinstance(m, ConstTop):
        return "top"
    if isinstance(m, Scale):
        return f"{m.c}*"
    if isinstance(m, MonotoneTable):
        return "table"
    if isinstance(m, MeetAll):
        return "meet"
    if isinstance(m, Expect):
        return "E"
    if isinstance(m, ScaledExpect):
        return f"{m.c}*E"
    if isinstance(m, ComposeId):
        return f"{show(m.outer)}.{show(m.inner)}"
    if isinstance(m, TensorMod):
        return "(" + " (x) ".join(show(p) for p in m.parts) + ")"
    if isinstance(m, MeetMod):
        return "(" + " /\\ ".join(show(p) for p in m.parts) + ")"
    if isinstance(m, Cotuple):
        return "[" + ", ".join(show(p) for p in m.parts) + "]"
    if isinstance(m, BarExtend):
        return f"bar{m.index}({show(m.m)})"
    if isinstance(m, TopAt):
        return f"top@{m.index}"
    if isinstance(m, ProjCompose):
        return f"{show(m.m)}.pi{m.index}"
    if isinstance(m, RestrictProd):
        return f"{show(m.m)}|{m.index}"
    if isinstance(m, PreInject):
        return f"{show(m.m)}.k{m.index}"
    if isinstance(m, CondIndicator):
        return f"[={m.atom}]"
    if isinstance(m, CTSLabel):
        return f"cts[{m.action}]"
    if isinstance(m, Pushforward):
        return f"{show(m.outer)}.F({show(m.inner)})"
    if isinstance(m, Transport):
        return f"iso({show(m.m)})"
    if isinstance(m, EmptyTest):
        return "empty?"
    if isinstance(m, LabelMassTest):
        return f"mass[{m.label}]" + ("" if m.p is None else f"={m.p}")
    return repr(m)


# ---------------------------------------------------------------------------
# well-behavedness


@dataclass
class CheckResult:
    passed: bool
    witness: object = None
    method: str = "exhaustive"

    def to_json(self):
        return {"passed": self.passed, "method": self.method,
                "witness": None if self.witness is None else repr(self.witness)}


@dataclass
class WBReport:
    modality: Modality
    functor: object
    monotone: CheckResult
    tensor: CheckResult
    top_reflect: CheckResult

    @property
    def passed(self):
        return self.monotone.passed and self.tensor.passed and self.top_reflect.passed

    def to_json(self):
        return {"modality": show(self.modality), "functor": fn.show(self.functor),
                "passed": self.passed, "monotone": self.monotone.to_json(),
                "tensor": self.tensor.to_json(), "top_reflect": self.top_reflect.to_json()}


def certify(m, F, Q):
    """Structural well-behavedness certificate for the closed family.

    Used where exhaustive checking is impossible (``[0, M]``).  Returns
    False when no rule applies; that is a refusal, not a disproof.
    """
    if isinstance(m, IdentityMod):
        return isinstance(F, Id)
    if isinstance(m, Scale):
        return isinstance(F, Id) and m.c > 0 and Q.kind in NUMERIC_KINDS
    if isinstance(m, ConstTop):
        return isinstance(F, Const)
    if isinstance(m, CondIndicator):
        return isinstance(F, Const) and F.atoms == (m.atom,)
    if isinstance(m, MeetAll):
        return isinstance(F, Pow) and isinstance(F.child, Id)
    if isinstance(m, (Expect, ScaledExpect)):
        ok = isinstance(F, Dist) and isinstance(F.child, Id) and Q.kind in NUMERIC_KINDS
        return ok and (isinstance(m, Expect) or m.c > 0)
    if isinstance(m, ComposeId):
        return certify(m.outer, Id(), Q) and certify(m.inner, F, Q)
    if isinstance(m, TensorMod):
        return all(certify(p, F, Q) for p in m.parts)
    if isinstance(m, MeetMod):
        if all(certify(p, F, Q) for p in m.parts):
            return True
        # meet of projections covering every factor
        if isinstance(F, Prod) and all(isinstance(p, ProjCompose) for p in m.parts):
            covered = {p.index for p in m.parts}
            return (covered == set(range(len(F.children)))
                    and all(certify(p.m, F.children[p.index], Q) for p in m.parts))
        return False
    if isinstance(m, Cotuple):
        return (isinstance(F, Coprod) and len(F.children) == len(m.parts)
                and all(certify(p, c, Q) for p, c in zip(m.parts, F.children)))
    if isinstance(m, Pushforward):
        if isinstance(F, Pow):
            return isinstance(m.outer, MeetAll) and certify(m.inner, F.child, Q)
        if isinstance(F, Dist):
            return (isinstance(m.outer, (Expect, ScaledExpect))
                    and certify(m.outer, Dist(Id()), Q) and certify(m.inner, F.child, Q))
        return False
    if isinstance(m, Transport):
        return isinstance(F, Pow) and certify(m.m, _pushed(F).functor, Q)
    return False


def check_well_behaved(m, F, Q, dist_grid=2, budget=200_000):
    """The three well-behavedness conditions, checked on universal instances.

    Monotonicity is tested on ``Y = {(a, b) | a <= b}`` with the two
    projections, the tensor condition on ``V x V`` with the projections;
    any pair of predicates on any set factors through these, so the finite
    checks are exhaustive.  Condition three compares ``tau^-1(top)`` with
    the image of ``F{top}``.  Distributions are enumerated on the
    ``1/dist_grid`` grid.
    """
    if not Q.enumerable:
        if certify(m, F, Q):
            ok = CheckResult(True, None, "certified")
            return WBReport(m, F, ok, ok, ok)
        raise NotEnumerable(f"no certificate for {show(m)} over {Q.describe()}")
    V = list(Q.carrier)
    q = dist_grid if fn.contains_dist(F) else None

    Y = [(a, b) for a in V for b in V if Q.leq(a, b)]
    mono = None
    for t in fn.enumerate_terms(F, Y, q, budget=budget):
        lo = apply_modality(m, F, fn.project(F, t, 0), Q)
        hi = apply_modality(m, F, fn.project(F, t, 1), Q)
        if not Q.leq(lo, hi):
            mono = (t, lo, hi)
            break

    VV = [(a, b) for a in V for b in V]
    ten = None
    for t in fn.enumerate_terms(F, VV, q, budget=budget):
        lhs = apply_modality(m, F, fn.apply_map(F, lambda p: Q.tensor_raw(*p), t), Q)
        rhs = Q.tensor_raw(apply_modality(m, F, fn.project(F, t, 0), Q),
                           apply_modality(m, F, fn.project(F, t, 1), Q))
        if not Q.leq(rhs, lhs):
            ten = (t, lhs, rhs)
            break

    tops = set(fn.enumerate_terms(F, [Q.top], q, budget=budget))
    top = None
    for t in fn.enumerate_terms(F, V, q, budget=budget):
        if (apply_modality(m, F, t, Q) == Q.top) != (t in tops):
            top = t
            break
    return WBReport(m, F, CheckResult(mono is None, mono), CheckResult(ten is None, ten),
                    CheckResult(top is None, top))


def is_well_behaved(m, F, Q, dist_grid=2, budget=200_000):
    try:
        return check_well_behaved(m, F, Q, dist_grid, budget).passed
    except (NotEnumerable, BudgetExceeded):
        return False


# ---------------------------------------------------------------------------
# JSON


def modality_from_json(data, Q=None):
    """Parse the constructor-tree JSON form.  ``Q`` parses table entries."""
    if not isinstance(data, dict) or len(data) != 1:
        raise ValueError(f"modality node must be a one-key object: {data!r}")
    (key, body), = data.items()
    parse = Q.parse if Q is not None else (lambda v: v)
    sub = lambda x: modality_from_json(x, Q)  # noqa: E731
    if key == "identity":
        return IdentityMod()
    if key == "top":
        return ConstTop()
    if key == "scale":
        return Scale(as_fraction(body))
    if key == "table":
        return MonotoneTable(tuple((parse(k), parse(v)) for k, v in body.items()))
    if key == "meetAll":
        return MeetAll()
    if key == "expect":
        return Expect()
    if key == "scaledExpect":
        return ScaledExpect(as_fraction(body))
    if key == "composeId":
        return ComposeId(sub(body[0]), sub(body[1]))
    if key == "tensor":
        return TensorMod(tuple(sub(p) for p in body))
    if key == "meet":
        return MeetMod(tuple(sub(p) for p in body))
    if key == "cotuple":
        return Cotuple(tuple(sub(p) for p in body))
    if key == "bar":
        return BarExtend(int(body["index"]), sub(body["m"]))
    if key == "topAt":
        return TopAt(int(body))
    if key == "proj":
        return ProjCompose(int(body["index"]), sub(body["m"]))
    if key == "indicator":
        return CondIndicator(body)
    if key == "pushforward":
        return Pushforward(sub(body["inner"]), sub(body["outer"]))
    if key == "transport":
        return Transport(sub(body))
    if key == "emptyTest":
        return EmptyTest()
    if key == "labelMass":
        return LabelMassTest(fn._freeze(body))
    raise ValueError(f"unknown modality constructor {key!r}")


def modality_to_json(m, Q=None):
    fmt = Q.fmt if Q is not None else (lambda v: v)
    sub = lambda x: modality_to_json(x, Q)  # noqa: E731
    if isinstance(m, IdentityMod):
        return {"identity": {}}
    if isinstance(m, ConstTop):
        return {"top": {}}
    if isinstance(m, Scale):
        return {"scale": fmt_fraction(m.c)}
    if isinstance(m, MonotoneTable):
        return {"table": {str(fmt(k)): fmt(v) for k, v in m.table}}
    if isinstance(m, MeetAll):
        return {"meetAll": {}}
    if isinstance(m, Expect):
        return {"expect": {}}
    if isinstance(m, ScaledExpect):
        return {"scaledExpect": fmt_fraction(m.c)}
    if isinstance(m, ComposeId):
        return {"composeId": [sub(m.outer), sub(m.inner)]}
    if isinstance(m, TensorMod):
        return {"tensor": [sub(p) for p in m.parts]}
    if isinstance(m, MeetMod):
        return {"meet": [sub(p) for p in m.parts]}
    if isinstance(m, Cotuple):
        return {"cotuple": [sub(p) for p in m.parts]}
    if isinstance(m, BarExtend):
        return {"bar": {"index": m.index, "m": sub(m.m)}}
    if isinstance(m, TopAt):
        return {"topAt": m.index}
    if isinstance(m, ProjCompose):
        return {"proj": {"index": m.index, "m": sub(m.m)}}
    if isinstance(m, CondIndicator):
        return {"indicator": m.atom}
    if isinstance(m, Pushforward):
        return {"pushforward": {"inner": sub(m.inner), "outer": sub(m.outer)}}
    if isinstance(m, Transport):
        return {"transport": sub(m.m)}
    if isinstance(m, EmptyTest):
        return {"emptyTest": {}}
    if isinstance(m, LabelMassTest):
        return {"labelMass": m.label}
    # remaining nodes carry functors or fills; they are reported by name only
    return {"opaque": show(m)}
