"""Exact optimal transport on finite supports.

``kantorovich_primal`` solves the transportation problem by successive
shortest paths (Bellman-Ford on the residual graph, so reverse arcs with
negative cost are fine).  ``kantorovich_dual`` solves the dual
``max sum f(x) (mu1(x) - mu2(x))`` over ``0 <= f <= M`` with
``f(x) - f(y) <= d(x, y)`` by a dense tableau simplex with Bland's rule.
The two share no code, so agreement between them is a real check.
Everything is :class:`fractions.Fraction`.
"""

from collections.abc import Mapping
from fractions import Fraction

from .functor import FDist

INF = None


def _weights(mu):
    if isinstance(mu, FDist):
        return dict(mu.items)
    if isinstance(mu, Mapping):
        return {k: Fraction(v) for k, v in mu.items() if v}
    return {k: Fraction(v) for k, v in mu if v}


def _cost_fn(cost):
    if callable(cost):
        return cost
    if isinstance(cost, Mapping):
        return lambda x, y: cost.get((x, y))
    raise TypeError("cost must be callable or a mapping of pairs")


def kantorovich_primal(mu1, mu2, cost, forbidden=()):
    """Minimum transport cost and an optimal coupling.

    ``cost(x, y)`` returns a non-negative rational, or ``None`` for a pair
    that may not carry mass; ``forbidden`` lists further such pairs.
    Returns ``(None, None)`` when no coupling avoids the forbidden pairs.
    """
    a = _weights(mu1)
    b = _weights(mu2)
    if sum(a.values()) != sum(b.values()):
        return None, None
    c = _cost_fn(cost)
    forbidden = set(forbidden)
    src = sorted(a, key=repr)
    dst = sorted(b, key=repr)
    n1, n2 = len(src), len(dst)
    S, T = n1 + n2, n1 + n2 + 1
    N = n1 + n2 + 2
    # arc list: [to, cap(None = unbounded), cost, rev_index]
    graph = [[] for _ in range(N)]

    def add(u, v, cap, w):
        graph[u].append([v, cap, w, len(graph[v])])
        graph[v].append([u, Fraction(0), -w, len(graph[u]) - 1])

    for i, x in enumerate(src):
        add(S, i, a[x], Fraction(0))
    for j, y in enumerate(dst):
        add(n1 + j, T, b[y], Fraction(0))
    arcs = {}
    for i, x in enumerate(src):
        for j, y in enumerate(dst):
            if (x, y) in forbidden:
                continue
            w = c(x, y)
            if w is None:
                continue
            arcs[(i, j)] = len(graph[i])
            add(i, n1 + j, INF, Fraction(w))

    total = sum(a.values(), Fraction(0))
    flow = Fraction(0)
    value = Fraction(0)
    while flow < total:
        dist = [None] * N
        prev = [None] * N
        dist[S] = Fraction(0)
        for _ in range(N - 1):
            changed = False
            for u in range(N):
                if dist[u] is None:
                    continue
                for k, (v, cap, w, _) in enumerate(graph[u]):
                    if cap is not None and cap <= 0:
                        continue
                    nd = dist[u] + w
                    if dist[v] is None or nd < dist[v]:
                        dist[v] = nd
                        prev[v] = (u, k)
                        changed = True
            if not changed:
                break
        if dist[T] is None:
            return None, None
        push = total - flow
        v = T
        while v != S:
            u, k = prev[v]
            cap = graph[u][k][1]
            if cap is not None and cap < push:
                push = cap
            v = u
        v = T
        while v != S:
            u, k = prev[v]
            arc = graph[u][k]
            if arc[1] is not None:
                arc[1] -= push
            back = graph[arc[0]][arc[3]]
            if back[1] is not None:
                back[1] += push
            v = u
        flow += push
        value += push * dist[T]

    coupling = {}
    for (i, j), k in arcs.items():
        # flow on a forward arc equals the residual capacity of its reverse arc
        arc = graph[i][k]
        sent = graph[arc[0]][arc[3]][1]
        if sent:
            coupling[(src[i], dst[j])] = sent
    return value, coupling


def coupling_cost(coupling, cost):
    c = _cost_fn(cost)
    return sum((w * Fraction(c(x, y)) for (x, y), w in coupling.items()), Fraction(0))


def _simplex_max(c, A, b):
    """Maximise ``c.x`` s.t. ``A x <= b``, ``x >= 0`` with ``b >= 0``.

    Dense tableau, Bland's anti-cycling rule.  Returns ``(value, x)``; the
    problem must be bounded (it always is here, thanks to the box).
    """
    m, n = len(A), len(c)
    # tableau rows: [coefficients (n) | slacks (m) | rhs]
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]] + [Fraction(0)] * m + [Fraction(b[i])]
        row[n + i] = Fraction(1)
        rows.append(row)
    obj = [-Fraction(v) for v in c] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]
    width = n + m
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if (best is None or ratio < best
                        or (ratio == best and basis[i] < basis[leave])):
                    best, leave = ratio, i
        if leave is None:
            raise ArithmeticError("unbounded dual program")
        piv = rows[leave][enter]
        prow = [v / piv for v in rows[leave]]
        rows[leave] = prow
        for i, row in enumerate(rows):
            if i != leave and row[enter]:
                f = row[enter]
                rows[i] = [v - f * p for v, p in zip(row, prow)]
        if obj[enter]:
            f = obj[enter]
            obj = [v - f * p for v, p in zip(obj, prow)]
        basis[leave] = enter
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rows[i][-1]
    return obj[-1], x


def kantorovich_dual(mu1, mu2, d, M=1, points=None):
    """Best non-expansive ``f: points -> [0, M]`` for ``sum f (mu1 - mu2)``.

    ``d`` is a callable or mapping giving finite rational distances.
    ``points`` defaults to the union of the two supports.  Returns the
    optimum and the maximiser as a dict.
    """
    a = _weights(mu1)
    b = _weights(mu2)
    dist = _cost_fn(d)
    if points is None:
        points = sorted(set(a) | set(b), key=repr)
    points = list(points)
    M = Fraction(M)
    n = len(points)
    c = [a.get(x, Fraction(0)) - b.get(x, Fraction(0)) for x in points]
    A, rhs = [], []
    for i in range(n):
        row = [0] * n
        row[i] = 1
        A.append(row)
        rhs.append(M)
    for i in range(n):
        for j in range(n):
            if i != j:
                row = [0] * n
                row[i], row[j] = 1, -1
                A.append(row)
                rhs.append(Fraction(dist(points[i], points[j])))
    value, x = _simplex_max(c, A, rhs)
    return value, dict(zip(points, x))


def dual_objective(f, mu1, mu2):
    a = _weights(mu1)
    b = _weights(mu2)
    return sum((f[x] * (a.get(x, 0) - b.get(x, 0)) for x in set(a) | set(b)), Fraction(0))
