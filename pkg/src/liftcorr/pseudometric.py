"""Quantale-valued pseudometrics on finite carriers and their morphisms into d_e."""

from itertools import product

from . import kernels
from .errors import (BudgetExceeded, InvalidPseudometric, NotAMorphismOnY,
                     NotEnumerable)

DEFAULT_BUDGET = 200_000


class Pseudometric:
    """A reflexive, symmetric, transitive map ``X x X -> V``.

    ``entries`` maps pairs ``(x, y)`` to values; missing off-diagonal pairs
    fall back to their mirror image, the diagonal defaults to top.
    """

    __slots__ = ("Q", "carrier", "_m", "_key")

    def __init__(self, Q, carrier, entries=None, validate=True):
        self.Q = Q
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise InvalidPseudometric("duplicate carrier points")
        entries = dict(entries or {})
        m = {}
        for x in self.carrier:
            for y in self.carrier:
                if (x, y) in entries:
                    v = entries[(x, y)]
                elif (y, x) in entries:
                    v = entries[(y, x)]
                elif x == y:
                    v = Q.top
                else:
                    raise InvalidPseudometric(f"missing distance for {x!r}, {y!r}")
                m[(x, y)] = v
        self._m = m
        self._key = tuple(m[(x, y)] for x in self.carrier for y in self.carrier)
        if validate:
            self.validate()

    def validate(self):
        Q, C, m = self.Q, self.carrier, self._m
        for (x, y), v in m.items():
            if not Q.contains(v):
                raise InvalidPseudometric(f"d({x!r}, {y!r}) = {v!r} not in carrier")
        for x in C:
            if m[(x, x)] != Q.top:
                raise InvalidPseudometric(f"not reflexive at {x!r}")
        for x, y in product(C, C):
            if m[(x, y)] != m[(y, x)]:
                raise InvalidPseudometric(f"not symmetric at {x!r}, {y!r}")
        for x, y, z in product(C, C, C):
            if not Q.leq(Q.tensor_raw(m[(x, z)], m[(z, y)]), m[(x, y)]):
                raise InvalidPseudometric(f"not transitive at {x!r}, {z!r}, {y!r}")
        return self

    def __call__(self, x, y):
        return self._m[(x, y)]

    def items(self):
        return self._m.items()

    def __eq__(self, other):
        return (isinstance(other, Pseudometric) and self.Q == other.Q
                and self.carrier == other.carrier and self._key == other._key)

    def __hash__(self):
        return hash((self.carrier, self._key))

    def __repr__(self):
        body = ", ".join(f"{x},{y}={self.Q.fmt(self._m[(x, y)])}"
                         for i, x in enumerate(self.carrier)
                         for y in self.carrier[i + 1:])
        return f"Pseudometric({body})"

    def leq(self, other):
        """Pointwise order in the quantale."""
        return all(self.Q.leq(v, other._m[p]) for p, v in self._m.items())

    def restrict(self, Y):
        Y = tuple(Y)
        return Pseudometric(self.Q, Y, {(x, y): self._m[(x, y)] for x in Y for y in Y},
                            validate=False)

    def with_carrier(self, carrier, fill):
        """Extend to a larger carrier where the new points sit at ``fill``."""
        ent = {}
        for x in carrier:
            for y in carrier:
                if (x, y) in self._m:
                    ent[(x, y)] = self._m[(x, y)]
                elif x == y:
                    ent[(x, y)] = self.Q.top
                else:
                    ent[(x, y)] = fill
        return Pseudometric(self.Q, carrier, ent)

    def table(self):
        t = self.Q.index_tables()
        return tuple(t.index[v] for v in self._key)

    def to_json(self):
        C = self.carrier
        return {"carrier": list(C),
                "matrix": {f"{x},{y}": self.Q.fmt(self._m[(x, y)])
                           for i, x in enumerate(C) for y in C[i + 1:]}}

    @classmethod
    def from_json(cls, Q, data):
        carrier = [str(x) for x in data["carrier"]]
        ent = {}
        for key, v in data.get("matrix", {}).items():
            x, y = key.split(",")
            ent[(x.strip(), y.strip())] = Q.parse(v)
        return cls(Q, carrier, ent)

    @classmethod
    def from_table(cls, Q, carrier, flat):
        t = Q.index_tables()
        n = len(carrier)
        ent = {(carrier[i], carrier[j]): t.carrier[flat[i * n + j]]
               for i in range(n) for j in range(n)}
        return cls(Q, carrier, ent, validate=False)

    @classmethod
    def discrete(cls, Q, carrier):
        return cls(Q, carrier, {(x, y): Q.top if x == y else Q.bottom
                                for x in carrier for y in carrier})

    @classmethod
    def indiscrete(cls, Q, carrier):
        return cls(Q, carrier, {(x, y): Q.top for x in carrier for y in carrier})

    @classmethod
    def close(cls, Q, carrier, entries):
        """Symmetrise and tighten raw distances until transitive.

        Each round replaces ``d(x, y)`` by the join of itself with every
        one-step composite ``d(x, z) (x) d(z, y)``; stops when stable.
        """
        carrier = tuple(carrier)
        m = {}
        for x in carrier:
            for y in carrier:
                if x == y:
                    m[(x, y)] = Q.top
                else:
                    a = entries.get((x, y), entries.get((y, x)))
                    b = entries.get((y, x), a)
                    m[(x, y)] = Q.join2(a, b)
        changed = True
        while changed:
            changed = False
            for x, y in product(carrier, carrier):
                v = m[(x, y)]
                for z in carrier:
                    v = Q.join2(v, Q.tensor_raw(m[(x, z)], m[(z, y)]))
                if v != m[(x, y)]:
                    m[(x, y)] = v
                    changed = True
        return cls(Q, carrier, m)


def enumerate_pseudometrics(Q, X, budget=DEFAULT_BUDGET):
    """Every pseudometric on the finite set ``X`` valued in ``Q``."""
    if not Q.enumerable:
        raise NotEnumerable(f"{Q.describe()} is not enumerable")
    X = tuple(X)
    n = len(X)
    t = Q.index_tables()
    size = t.size ** (n * (n - 1) // 2)
    if size > budget:
        raise BudgetExceeded("pseudometric enumeration", size, budget)
    tables = kernels.enumerate_pseudometric_tables(n, t.size, t.top, t.leq, t.tensor)
    return [Pseudometric.from_table(Q, X, flat) for flat in tables]


def is_morphism(f, d):
    """``d <= d_e o (f x f)`` pointwise."""
    Q = d.Q
    return all(Q.leq(d(x, y), Q.euclid_raw(f[x], f[y]))
               for x in d.carrier for y in d.carrier)


def nonexpansive_maps(d, budget=DEFAULT_BUDGET):
    """All morphisms ``d -> d_e`` as dicts from carrier points to values."""
    Q = d.Q
    if not Q.enumerable:
        raise NotEnumerable(f"{Q.describe()} is not enumerable")
    t = Q.index_tables()
    n = len(d.carrier)
    size = t.size ** n
    if size > budget:
        raise BudgetExceeded("morphism enumeration", size, budget)
    rows = kernels.enumerate_morphism_tables(n, d.table(), t.size, t.leq, t.euclid)
    C = d.carrier
    return [{C[i]: t.carrier[r[i]] for i in range(n)} for r in rows]


def extend_morphism(g, d):
    """Least morphism ``f: d -> d_e`` agreeing with the partial morphism ``g``.

    ``f(x)`` is the join over ``u`` in the domain of ``g`` of
    ``g(u) (x) d(x, u)``.
    """
    Q = d.Q
    Y = [u for u in d.carrier if u in g]
    if len(Y) != len(g):
        raise NotAMorphismOnY("partial map mentions points outside the carrier")
    for u in Y:
        for v in Y:
            if not Q.leq(d(u, v), Q.euclid_raw(g[u], g[v])):
                raise NotAMorphismOnY(f"g is not a morphism on {u!r}, {v!r}")
    return {x: Q.join(Q.tensor_raw(g[u], d(x, u)) for u in Y) for x in d.carrier}
