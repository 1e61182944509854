"""Commutative, affine quantales used as truth-value objects.

Five kinds are built in: the Boolean quantale, finite grids of ``[0, M]``
with truncated addition (``ChainQuantale``), powersets of a finite
condition set with intersection, the full rational interval ``[0, M]``
(non-enumerable, used by the exact transport pipeline) and user supplied
tables (mainly for negative tests of the law checkers).

Every comparison goes through :meth:`Quantale.leq`.  For the numeric kinds
the order is *reversed*: ``0`` is top and ``M`` is bottom, so a quantale
join is a numeric minimum.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil

from .errors import ElementNotInCarrier, NotALattice, NotEnumerable, BudgetExceeded

DEFAULT_SUBSET_BUDGET = 2_000_000


def as_fraction(value):
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction; refuse floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def fmt_fraction(value):
    return str(Fraction(value))


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


class Quantale:
    """Abstract base.  Subclasses fill in the order, lattice and tensor."""

    kind = None
    enumerable = True

    # -- order and lattice -------------------------------------------------
    def leq(self, x, y):
        raise NotImplementedError

    def join2(self, x, y):
        raise NotImplementedError

    def meet2(self, x, y):
        raise NotImplementedError

    def tensor_raw(self, x, y):
        raise NotImplementedError

    @property
    def is_total(self):
        return all(self.leq(x, y) or self.leq(y, x)
                   for x, y in combinations(self.carrier, 2))

    def contains(self, x):
        try:
            return x in self._members
        except TypeError:
            return False

    def check(self, x):
        if not self.contains(x):
            raise ElementNotInCarrier(f"{x!r} is not an element of {self.describe()}")
        return x

    def lt(self, x, y):
        return self.leq(x, y) and x != y

    def join(self, xs):
        acc = self.bottom
        for x in xs:
            acc = self.join2(acc, x)
        return acc

    def meet(self, xs):
        acc = self.top
        for x in xs:
            acc = self.meet2(acc, x)
        return acc

    def agg(self, kind, xs):
        """Join or meet of a finite multiset; empty join is bottom, empty meet top."""
        xs = [self.check(x) for x in xs]
        if kind == "join":
            return self.join(xs)
        if kind == "meet":
            return self.meet(xs)
        raise ValueError(f"unknown aggregate {kind!r}")

    # -- quantale structure -----------------------------------------------
    def tensor(self, x, y):
        return self.tensor_raw(self.check(x), self.check(y))

    def hom_raw(self, y, z):
        return self.join(x for x in self.carrier if self.leq(self.tensor_raw(x, y), z))

    def hom(self, y, z):
        """Residuation: the greatest ``x`` with ``x (x) y <= z``."""
        return self.hom_raw(self.check(y), self.check(z))

    def euclid_raw(self, x, y):
        return self.meet2(self.hom_raw(x, y), self.hom_raw(y, x))

    def euclid(self, x, y):
        return self.euclid_raw(self.check(x), self.check(y))

    # -- grids / serialisation --------------------------------------------
    def round_up(self, x):
        """Map a numeric value into the carrier, rounding toward bottom."""
        raise NotImplementedError(f"{self.kind} quantale has no numeric grid")

    def index_tables(self):
        """Integer encodings consumed by the compiled kernels."""
        if not self.enumerable:
            raise NotEnumerable(f"{self.describe()} is not enumerable")
        return self._tables

    def _build_tables(self):
        carrier = list(self.carrier)
        index = {x: i for i, x in enumerate(carrier)}
        k = len(carrier)
        leq = [1 if self.leq(a, b) else 0 for a in carrier for b in carrier]
        tensor = [index[self.tensor_raw(a, b)] for a in carrier for b in carrier]
        euclid = [index[self.euclid_raw(a, b)] for a in carrier for b in carrier]
        return _Tables(carrier=tuple(carrier), index=index, size=k, leq=leq,
                       tensor=tensor, euclid=euclid, top=index[self.top],
                       bottom=index[self.bottom])

    def fmt(self, x):
        return x

    def parse(self, v):
        return self.check(v)

    def describe(self):
        return self.kind

    def to_json(self):
        raise NotImplementedError

    def _key(self):
        return repr(self.to_json())

    def __eq__(self, other):
        return isinstance(other, Quantale) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"<Quantale {self.describe()}>"


@dataclass(frozen=True)
class _Tables:
    carrier: tuple
    index: dict = field(repr=False)
    size: int
    leq: list = field(repr=False)
    tensor: list = field(repr=False)
    euclid: list = field(repr=False)
    top: int
    bottom: int


class BoolQuantale(Quantale):
    kind = "bool"

    def __init__(self):
        self.carrier = (False, True)
        self._members = frozenset(self.carrier)
        self.top, self.bottom = True, False
        self._tables = self._build_tables()

    def contains(self, x):
        return isinstance(x, bool)

    def leq(self, x, y):
        return (not x) or y

    def join2(self, x, y):
        return x or y

    def meet2(self, x, y):
        return x and y

    def tensor_raw(self, x, y):
        return x and y

    def hom_raw(self, y, z):
        return (not y) or z

    def euclid_raw(self, x, y):
        return x == y

    @property
    def is_total(self):
        return True

    def fmt(self, x):
        return bool(x)

    def parse(self, v):
        if not isinstance(v, bool):
            raise ElementNotInCarrier(f"{v!r} is not a boolean")
        return v

    def to_json(self):
        return {"kind": "bool"}


class _IntervalOps:
    """Shared arithmetic of ``[0, M]`` with reversed order and truncated sum."""

    def leq(self, x, y):
        return x >= y

    def join2(self, x, y):
        return x if x <= y else y

    def meet2(self, x, y):
        return x if x >= y else y

    def join(self, xs):
        return min(xs, default=self.bottom)

    def meet(self, xs):
        return max(xs, default=self.top)

    def tensor_raw(self, x, y):
        s = x + y
        return s if s < self.M else self.M

    def hom_raw(self, y, z):
        return z - y if z > y else Fraction(0)

    def euclid_raw(self, x, y):
        return x - y if x >= y else y - x

    @property
    def is_total(self):
        return True

    def fmt(self, x):
        return fmt_fraction(x)

    def parse(self, v):
        try:
            x = as_fraction(v)
        except (TypeError, ValueError) as exc:
            raise ElementNotInCarrier(f"{v!r}: {exc}") from None
        return self.check(x)


class ChainQuantale(_IntervalOps, Quantale):
    """The grid ``{0, M/n, ..., M}`` ordered by ``>=`` with truncated addition."""

    kind = "chain"

    def __init__(self, n, M=1):
        if int(n) != n or n < 1:
            raise ValueError("chain size n must be a positive integer")
        self.n = int(n)
        self.M = as_fraction(M)
        if self.M <= 0:
            raise ValueError("M must be positive")
        self.step = self.M / self.n
        self.carrier = tuple(self.step * k for k in range(self.n + 1))
        self._members = frozenset(self.carrier)
        self.top, self.bottom = Fraction(0), self.M
        self._tables = self._build_tables()

    def contains(self, x):
        if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
            return False
        return x in self._members

    def round_up(self, x):
        x = as_fraction(x)
        if x <= 0:
            return Fraction(0)
        k = min(ceil(x / self.step), self.n)
        return self.step * k

    def describe(self):
        return f"chain(n={self.n}, M={self.M})"

    def to_json(self):
        return {"kind": "chain", "n": self.n, "M": fmt_fraction(self.M)}


class UnitRationalQuantale(_IntervalOps, Quantale):
    """All rationals in ``[0, M]``; not enumerable."""

    kind = "unit-rational"
    enumerable = False

    def __init__(self, M=1):
        self.M = as_fraction(M)
        if self.M <= 0:
            raise ValueError("M must be positive")
        self.top, self.bottom = Fraction(0), self.M

    @property
    def carrier(self):
        raise NotEnumerable("unit-rational quantale has an infinite carrier")

    def sample(self, denominator=12):
        return tuple(self.M * Fraction(k, denominator) for k in range(denominator + 1))

    def contains(self, x):
        if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
            return False
        return 0 <= x <= self.M

    def round_up(self, x):
        x = as_fraction(x)
        return min(max(x, Fraction(0)), self.M)

    def hom_raw(self, y, z):
        return z - y if z > y else Fraction(0)

    def describe(self):
        return f"unit-rational(M={self.M})"

    def to_json(self):
        return {"kind": "unit-rational", "M": fmt_fraction(self.M)}


class PowersetQuantale(Quantale):
    """Subsets of a finite condition set, ordered by inclusion, tensor = meet."""

    kind = "powerset"

    def __init__(self, conditions):
        conds = tuple(sorted(set(conditions), key=str))
        if len(conds) != len(list(conditions)):
            raise ValueError("duplicate conditions")
        self.conditions = conds
        self.full = frozenset(conds)
        self.carrier = tuple(frozenset(s) for s in subsets(conds))
        self._members = frozenset(self.carrier)
        self.top, self.bottom = self.full, frozenset()
        self._tables = self._build_tables()

    def leq(self, x, y):
        return x <= y

    def join2(self, x, y):
        return x | y

    def meet2(self, x, y):
        return x & y

    def tensor_raw(self, x, y):
        return x & y

    def hom_raw(self, y, z):
        return (self.full - y) | z

    def euclid_raw(self, x, y):
        return (x & y) | (self.full - (x | y))

    @property
    def is_total(self):
        return len(self.conditions) <= 1

    def fmt(self, x):
        return sorted(x, key=str)

    def parse(self, v):
        if not isinstance(v, (list, tuple, set, frozenset)):
            raise ElementNotInCarrier(f"{v!r} is not a condition set")
        return self.check(frozenset(v))

    def describe(self):
        return f"powerset({', '.join(map(str, self.conditions))})"

    def to_json(self):
        return {"kind": "powerset", "conditions": list(self.conditions)}


class TableQuantale(Quantale):
    """A finite quantale given by an order matrix and a tensor table.

    ``broken=True`` skips the lattice validation so that deliberately
    malformed tables can be handed to the law checkers.
    """

    kind = "table"

    def __init__(self, carrier, leq, tensor, broken=False):
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("duplicate carrier labels")
        k = len(self.carrier)
        self._idx = {x: i for i, x in enumerate(self.carrier)}
        self._members = frozenset(self.carrier)
        self._leq = [[bool(leq[i][j]) for j in range(k)] for i in range(k)]
        self._tensor = [[tensor[i][j] for j in range(k)] for i in range(k)]
        for row in self._tensor:
            for v in row:
                if v not in self._members:
                    raise ElementNotInCarrier(f"tensor table value {v!r} not in carrier")
        self.broken = broken
        self._join = [[self._bound(i, j, upper=True) for j in range(k)] for i in range(k)]
        self._meet = [[self._bound(i, j, upper=False) for j in range(k)] for i in range(k)]
        self.top = self._extreme(upper=True)
        self.bottom = self._extreme(upper=False)
        lattice_ok = (self.top is not None and self.bottom is not None
                      and all(v is not None for row in self._join for v in row)
                      and all(v is not None for row in self._meet for v in row))
        if not lattice_ok and not broken:
            raise NotALattice("order table is not a complete lattice")
        self._tables = self._build_tables() if lattice_ok else None

    def _bound(self, i, j, upper):
        k = len(self.carrier)
        if upper:
            cands = [c for c in range(k) if self._leq[i][c] and self._leq[j][c]]
            best = [c for c in cands if all(self._leq[c][o] for o in cands)]
        else:
            cands = [c for c in range(k) if self._leq[c][i] and self._leq[c][j]]
            best = [c for c in cands if all(self._leq[o][c] for o in cands)]
        return self.carrier[best[0]] if len(best) == 1 else None

    def _extreme(self, upper):
        k = len(self.carrier)
        for c in range(k):
            if all((self._leq[o][c] if upper else self._leq[c][o]) for o in range(k)):
                return self.carrier[c]
        return None

    def leq(self, x, y):
        return self._leq[self._idx[x]][self._idx[y]]

    def join2(self, x, y):
        v = self._join[self._idx[x]][self._idx[y]]
        if v is None:
            raise NotALattice(f"no join of {x!r} and {y!r}")
        return v

    def meet2(self, x, y):
        v = self._meet[self._idx[x]][self._idx[y]]
        if v is None:
            raise NotALattice(f"no meet of {x!r} and {y!r}")
        return v

    def tensor_raw(self, x, y):
        return self._tensor[self._idx[x]][self._idx[y]]

    def index_tables(self):
        if self._tables is None:
            raise NotALattice("broken table has no kernel encoding")
        return self._tables

    def describe(self):
        return f"table({len(self.carrier)} elements)"

    def to_json(self):
        k = len(self.carrier)
        out = {"kind": "table", "carrier": list(self.carrier),
               "leq": [[1 if self._leq[i][j] else 0 for j in range(k)] for i in range(k)],
               "tensor": [list(row) for row in self._tensor]}
        if self.broken:
            out["broken"] = True
        return out


def quantale_from_json(desc):
    kind = desc.get("kind")
    if kind == "bool":
        return BoolQuantale()
    if kind == "chain":
        return ChainQuantale(int(desc["n"]), as_fraction(desc.get("M", "1")))
    if kind == "powerset":
        return PowersetQuantale(desc["conditions"])
    if kind == "unit-rational":
        return UnitRationalQuantale(as_fraction(desc.get("M", "1")))
    if kind == "table":
        carrier = list(desc["carrier"])
        return TableQuantale(carrier, desc["leq"], desc["tensor"],
                             broken=bool(desc.get("broken", False)))
    raise ValueError(f"unknown quantale kind {kind!r}")


def diamond_m3():
    """The five-element non-distributive lattice M3, with tensor = meet."""
    carrier = ["0", "a", "b", "c", "1"]
    up = {"0": set(carrier), "a": {"a", "1"}, "b": {"b", "1"}, "c": {"c", "1"}, "1": {"1"}}
    leq = [[1 if y in up[x] else 0 for y in carrier] for x in carrier]

    def meet(x, y):
        if x == y:
            return x
        if x == "1":
            return y
        if y == "1":
            return x
        return "0"

    tensor = [[meet(x, y) for y in carrier] for x in carrier]
    return TableQuantale(carrier, leq, tensor)


# ---------------------------------------------------------------------------
# law checking


@dataclass
class LawResult:
    law: str
    passed: bool
    witness: object = None

    def to_json(self, Q):
        w = None
        if self.witness is not None:
            w = [Q.fmt(x) if Q.contains(x) else repr(x) for x in self.witness]
        return {"law": self.law, "passed": self.passed, "witness": w}


@dataclass
class LawReport:
    quantale: Quantale
    results: list
    partial: bool = False

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def get(self, law):
        for r in self.results:
            if r.law == law:
                return r
        raise KeyError(law)

    def failures(self):
        return [r for r in self.results if not r.passed]

    def to_json(self):
        return {"quantale": self.quantale.to_json(), "partial": self.partial,
                "passed": self.passed,
                "results": [r.to_json(self.quantale) for r in self.results]}


def _first(gen):
    for w in gen:
        return w
    return None


def check_laws(Q, sample=None):
    """Check the quantale axioms exhaustively (or on a sample for ``[0, M]``)."""
    partial = False
    if Q.enumerable:
        C = list(Q.carrier)
    else:
        C = list(sample) if sample is not None else list(Q.sample())
        partial = True

    results = []
    w = _first((x,) for x in C if not Q.leq(x, x))
    w = w or _first((x, y) for x, y in product(C, C)
                    if x != y and Q.leq(x, y) and Q.leq(y, x))
    w = w or _first((x, y, z) for x, y, z in product(C, C, C)
                    if Q.leq(x, y) and Q.leq(y, z) and not Q.leq(x, z))
    results.append(LawResult("partial-order", w is None, w))

    def lub_ok(x, y):
        try:
            j = Q.join2(x, y)
            m = Q.meet2(x, y)
        except NotALattice:
            return False
        if j is None or m is None:
            return False
        return (Q.leq(x, j) and Q.leq(y, j) and Q.leq(m, x) and Q.leq(m, y)
                and all(Q.leq(j, u) for u in C if Q.leq(x, u) and Q.leq(y, u))
                and all(Q.leq(u, m) for u in C if Q.leq(u, x) and Q.leq(u, y)))

    bounded = Q.top is not None and Q.bottom is not None and all(
        Q.leq(Q.bottom, x) and Q.leq(x, Q.top) for x in C)
    w = None if bounded else ("no top/bottom",)
    w = w or _first((x, y) for x, y in combinations(C, 2) if not lub_ok(x, y))
    lattice = w is None
    results.append(LawResult("complete-lattice", lattice, w))

    t = Q.tensor_raw
    w = _first((x, y, z) for x, y, z in product(C, C, C)
               if t(t(x, y), z) != t(x, t(y, z)))
    results.append(LawResult("tensor-associative", w is None, w))
    w = _first((x, y) for x, y in product(C, C) if t(x, y) != t(y, x))
    results.append(LawResult("tensor-commutative", w is None, w))
    if Q.top is None:
        results.append(LawResult("affine-unit", False, ("no top",)))
    else:
        w = _first((x,) for x in C if t(x, Q.top) != x or t(Q.top, x) != x)
        results.append(LawResult("affine-unit", w is None, w))

    if lattice:
        w = _first((x,) for x in C if t(x, Q.bottom) != Q.bottom)
        w = w or _first((x, y, z) for x, y, z in product(C, C, C)
                        if t(x, Q.join2(y, z)) != Q.join2(t(x, y), t(x, z)))
        results.append(LawResult("distributes-over-joins", w is None, w))
    else:
        results.append(LawResult("distributes-over-joins", False, ("not a lattice",)))
    return LawReport(Q, results, partial)


@dataclass
class DistributivityResult:
    kind: str
    holds: bool
    witness: object = None

    def __bool__(self):
        return self.holds


def check_distributivity(Q, kind, budget=DEFAULT_SUBSET_BUDGET):
    """Brute-force one of the four distributivity laws over a finite carrier.

    ``complete`` quantifies over every family of subsets; over a finite
    carrier a family reduces to a finite set of subsets, and by induction
    on the family it suffices to check pairs of nonempty subsets.
    """
    if not Q.enumerable:
        raise NotEnumerable(f"{Q.describe()} is not enumerable")
    C = list(Q.carrier)
    if kind == "binary":
        for x, y, z in product(C, C, C):
            if Q.meet2(Q.join2(x, z), Q.join2(y, z)) != Q.join2(Q.meet2(x, y), z):
                return DistributivityResult(kind, False, (x, y, z))
        return DistributivityResult(kind, True)

    subs = [frozenset(s) for s in subsets(C)]
    if kind in ("join-infinite", "meet-infinite"):
        if len(C) * len(subs) > budget:
            raise BudgetExceeded(f"{kind} distributivity", len(C) * len(subs), budget)
        for x in C:
            for S in subs:
                if kind == "join-infinite":
                    ok = Q.meet2(x, Q.join(S)) == Q.join(Q.meet2(x, s) for s in S)
                else:
                    ok = Q.join2(x, Q.meet(S)) == Q.meet(Q.join2(x, s) for s in S)
                if not ok:
                    return DistributivityResult(kind, False, (x, tuple(S)))
        return DistributivityResult(kind, True)
    if kind == "complete":
        nonempty = [S for S in subs if S]
        if len(nonempty) ** 2 > budget:
            raise BudgetExceeded("complete distributivity", len(nonempty) ** 2, budget)
        joins = {S: Q.join(S) for S in nonempty}
        for A, B in product(nonempty, nonempty):
            lhs = Q.meet2(joins[A], joins[B])
            rhs = Q.join(Q.meet2(a, b) for a in A for b in B)
            if lhs != rhs:
                return DistributivityResult(kind, False, (tuple(A), tuple(B)))
        return DistributivityResult(kind, True)
    raise ValueError(f"unknown distributivity kind {kind!r}")
