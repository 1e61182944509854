from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from liftcorr.transport import coupling_cost, dual_objective, kantorovich_dual, kantorovich_primal

POINTS = ["a", "b", "c", "d"]


def line(x, y):
    return F(abs(POINTS.index(x) - POINTS.index(y)), 4)


def test_hand_examples():
    v, c = kantorovich_primal({"a": 1}, {"b": 1}, line)
    assert v == F(1, 4) and c == {("a", "b"): 1}
    v, c = kantorovich_primal({"a": F(1, 2), "b": F(1, 2)}, {"b": F(1, 2), "c": F(1, 2)}, line)
    assert v == F(1, 4)
    assert kantorovich_dual({"a": 1}, {"d": 1}, line)[0] == F(3, 4)
    # M caps the dual
    assert kantorovich_dual({"a": 1}, {"d": 1}, lambda x, y: 5, M=1)[0] == 1


def test_forbidden_and_mass_mismatch():
    assert kantorovich_primal({"a": 1}, {"b": 1}, line, forbidden=[("a", "b")]) == (None, None)
    assert kantorovich_primal({"a": 1}, {"b": F(1, 2)}, line) == (None, None)


dists = st.lists(st.integers(0, 4), min_size=4, max_size=4).filter(lambda w: sum(w) > 0)


def _normalise(w):
    s = sum(w)
    return {p: F(x, s) for p, x in zip(POINTS, w) if x}


def _metric(data):
    # shortest-path closure of random edge weights is a pseudometric
    n = len(POINTS)
    D = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            D[i][j] = D[j][i] = F(data.draw(st.integers(0, 4)), 4)
    for k, i, j in product(range(n), repeat=3):
        D[i][j] = min(D[i][j], D[i][k] + D[k][j])
    return lambda x, y: D[POINTS.index(x)][POINTS.index(y)]


@settings(max_examples=80, deadline=None)
@given(dists, dists, st.data())
def test_primal_equals_dual(w1, w2, data):
    mu1, mu2 = _normalise(w1), _normalise(w2)
    d = _metric(data)
    v, c = kantorovich_primal(mu1, mu2, d)
    # the coupling is a coupling and realises the value
    for x in POINTS:
        assert sum(w for (p, _), w in c.items() if p == x) == mu1.get(x, 0)
        assert sum(w for (_, q), w in c.items() if q == x) == mu2.get(x, 0)
    assert coupling_cost(c, d) == v
    dv, f = kantorovich_dual(mu1, mu2, d, M=1, points=POINTS)
    assert dv == v
    assert dual_objective(f, mu1, mu2) == dv
    assert all(0 <= f[x] <= 1 for x in POINTS)
    assert all(f[x] - f[y] <= d(x, y) for x in POINTS for y in POINTS)


@settings(max_examples=40, deadline=None)
@given(dists, dists, st.data())
def test_primal_against_scipy(w1, w2, data):
    mu1, mu2 = _normalise(w1), _normalise(w2)
    d = _metric(data)
    n = len(POINTS)
    cost = np.array([float(d(x, y)) for x in POINTS for y in POINTS])
    A, b = [], []
    for i in range(n):
        A.append([1.0 if k // n == i else 0.0 for k in range(n * n)])
        b.append(float(mu1.get(POINTS[i], 0)))
    for j in range(n):
        A.append([1.0 if k % n == j else 0.0 for k in range(n * n)])
        b.append(float(mu2.get(POINTS[j], 0)))
    ref = linprog(cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ref.success
    assert float(kantorovich_primal(mu1, mu2, d)[0]) == pytest.approx(ref.fun, abs=1e-9)
