import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from houli.interval import Interval, gram_enclosure, isum, matmul_enclosure


def ulp(x):
    return math.ulp(x)


def test_add_width():
    s = Interval.exact(1.0) + Interval.exact(2.0)
    assert s.contains(3.0)
    assert float(s.hi - s.lo) <= 2 * ulp(3.0)


def test_division_encloses_third():
    q = Interval.exact(1.0) / Interval.exact(3.0)
    assert Fraction(float(q.lo)) < Fraction(1, 3) < Fraction(float(q.hi))


def test_division_by_zero_interval_rejected():
    with pytest.raises(ZeroDivisionError):
        Interval.exact(1.0) / Interval(-1.0, 1.0)


def test_basel_partial_sum_enclosure():
    n = 10**6
    k = np.arange(1, n + 1, dtype=float)
    terms = Interval.exact(1.0) / Interval.exact(k * k)
    total = isum(terms)
    mpmath.mp.dps = 40
    truth = mpmath.pi**2 / 6 - mpmath.psi(1, n + 1)
    assert mpmath.mpf(float(total.lo)) <= truth <= mpmath.mpf(float(total.hi))
    assert float(total.hi - total.lo) < 1e-12


def test_certain_comparisons():
    a = Interval(1.0, 2.0)
    assert a < 3.0 and a > 0.5
    assert not (a < 1.5) and not (a > 1.5)


def _rational_interval(p, q):
    return Interval.from_fraction(Fraction(p, q))


def test_enclosure_soundness_bulk():
    # 1e5 random rational operand pairs through every operation
    rng = np.random.default_rng(7)
    n = 100_000
    P = rng.integers(-10**6, 10**6, size=(2, n))
    Q = rng.integers(1, 10**6, size=(2, n))
    X = [Fraction(int(p), int(q)) for p, q in zip(P[0], Q[0])]
    Y = [Fraction(int(p), int(q)) for p, q in zip(P[1], Q[1])]
    Y = [y if y != 0 else Fraction(1, 7) for y in Y]
    xi = Interval([float(Interval.from_fraction(x).lo) for x in X], [float(Interval.from_fraction(x).hi) for x in X])
    yi = Interval([float(Interval.from_fraction(y).lo) for y in Y], [float(Interval.from_fraction(y).hi) for y in Y])
    ops = {
        "add": (xi + yi, lambda a, b: a + b),
        "sub": (xi - yi, lambda a, b: a - b),
        "mul": (xi * yi, lambda a, b: a * b),
        "div": (xi / yi, lambda a, b: a / b),
        "abs": (abs(xi - yi), lambda a, b: abs(a - b)),
    }
    for name, (res, exact) in ops.items():
        lo, hi = res.lo.tolist(), res.hi.tolist()
        for i in range(n):
            e = exact(X[i], Y[i])
            assert Fraction(lo[i]) <= e <= Fraction(hi[i]), (name, i)


@given(
    st.fractions(min_value=-1000, max_value=1000, max_denominator=10**9),
    st.fractions(min_value=-1000, max_value=1000, max_denominator=10**9),
)
def test_enclosure_property(x, y):
    a, b = Interval.from_fraction(x), Interval.from_fraction(y)
    for res, e in ((a + b, x + y), (a - b, x - y), (a * b, x * y), (a.sqr(), x * x)):
        assert res.contains(e)
    if y != 0:
        assert (a / b).contains(x / y)


def test_matmul_enclosure_contains_exact_product():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 5))
    B = rng.standard_normal((5, 4))
    C = matmul_enclosure(A, B)
    for i in range(6):
        for j in range(4):
            exact = sum(Fraction(A[i, k]) * Fraction(B[k, j]) for k in range(5))
            assert Fraction(float(C.lo[i, j])) <= exact <= Fraction(float(C.hi[i, j]))


@given(st.integers(0, 2**31))
def test_gram_product_is_psd(seed):
    # W W' is positive semidefinite for any real W
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((5, 5))
    D = np.abs(rng.standard_normal(5))
    W = V * np.sqrt(D)
    x = rng.standard_normal(5)
    y = W.T @ x
    assert float(y @ y) >= 0
    G = gram_enclosure(W)
    assert np.all(G.lo <= G.hi)
    assert np.all(G.contains(W @ W.T))
