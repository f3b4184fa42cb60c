"""Outward-rounded interval arithmetic over binary64.

Every operation is carried out in round-to-nearest and each endpoint is then
stepped one float outward with ``np.nextafter``.  Round-to-nearest is within
half an ulp of the exact result, so the stepped endpoints enclose it.  This
avoids switching the hardware rounding mode and is safe under threads.

``Interval`` wraps numpy arrays of lower and upper endpoints, so the same code
handles scalars and whole matrices.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

__all__ = [
    "ROUNDING_METHOD",
    "Interval",
    "IntervalScalar",
    "down",
    "up",
    "isum",
    "matmul_enclosure",
    "gram_enclosure",
]

ROUNDING_METHOD = "round-to-nearest with one-ulp outward nextafter step per operation"

_U = 2.0**-53  # unit roundoff
_ETA = 2.0**-1074  # smallest subnormal


def down(x):
    return np.nextafter(x, -np.inf)


def up(x):
    return np.nextafter(x, np.inf)


def _as_interval(x) -> "Interval":
    if isinstance(x, Interval):
        return x
    if isinstance(x, Fraction):
        return Interval.from_fraction(x)
    if isinstance(x, int) and abs(x) > 2**53:
        return Interval.from_fraction(Fraction(x))
    return Interval.exact(x)


class Interval:
    """Closed interval ``[lo, hi]`` (elementwise for array endpoints)."""

    __slots__ = ("lo", "hi")
    __array_priority__ = 100  # let ``float * Interval`` reach __rmul__

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("interval endpoint is NaN")
        if np.any(lo > hi):
            raise ValueError("interval with lo > hi")
        self.lo = lo
        self.hi = hi

    # -- construction -------------------------------------------------------
    @classmethod
    def exact(cls, x) -> "Interval":
        """Degenerate interval for values that are already binary64 numbers."""
        return cls(x, x)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Interval":
        """Tight enclosure of a rational that may not be representable."""
        f = float(q)
        if Fraction(f) == q:
            return cls(f, f)
        return cls(float(down(f)), float(up(f)))

    @classmethod
    def hull(cls, *xs: "Interval") -> "Interval":
        lo = np.minimum.reduce([x.lo for x in xs])
        hi = np.maximum.reduce([x.hi for x in xs])
        return cls(lo, hi)

    # -- views ----------------------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self) -> np.ndarray:
        return up(self.hi - self.lo)

    def mag(self) -> np.ndarray:
        """Upper bound on ``|x|`` over the interval (exact, no rounding)."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        """Lower bound on ``|x|`` over the interval (exact, no rounding)."""
        m = np.minimum(np.abs(self.lo), np.abs(self.hi))
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0, m)

    def contains(self, x) -> np.ndarray:
        if isinstance(x, Fraction):
            return bool(Fraction(float(self.lo)) <= x <= Fraction(float(self.hi)))
        return (self.lo <= x) & (x <= self.hi)

    def __getitem__(self, idx) -> "Interval":
        return Interval(self.lo[idx], self.hi[idx])

    def __len__(self):
        return len(self.lo)

    def __repr__(self):
        if self.lo.ndim == 0:
            return f"Interval([{float(self.lo)!r}, {float(self.hi)!r}])"
        return f"Interval(shape={self.shape})"

    # -- arithmetic -------------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other) -> "Interval":
        o = _as_interval(other)
        return Interval(down(self.lo + o.lo), up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        o = _as_interval(other)
        return Interval(down(self.lo - o.hi), up(self.hi - o.lo))

    def __rsub__(self, other) -> "Interval":
        return _as_interval(other) - self

    def __mul__(self, other) -> "Interval":
        o = _as_interval(other)
        p = np.stack(
            np.broadcast_arrays(self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        )
        return Interval(down(p.min(axis=0)), up(p.max(axis=0)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = _as_interval(other)
        if np.any((o.lo <= 0) & (o.hi >= 0)):
            raise ZeroDivisionError("interval division by an interval containing zero")
        p = np.stack(
            np.broadcast_arrays(self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        )
        return Interval(down(p.min(axis=0)), up(p.max(axis=0)))

    def __rtruediv__(self, other) -> "Interval":
        return _as_interval(other) / self

    def sqr(self) -> "Interval":
        lo = self.mig()
        hi = self.mag()
        return Interval(down(lo * lo), up(hi * hi))

    def __abs__(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    def sum(self) -> "Interval":
        return isum(self)

    # -- certain comparisons ---------------------------------------------------
    # These hold for every pair of points drawn from the two intervals.
    def __lt__(self, other):
        return self.hi < _as_interval(other).lo

    def __le__(self, other):
        return self.hi <= _as_interval(other).lo

    def __gt__(self, other):
        return self.lo > _as_interval(other).hi

    def __ge__(self, other):
        return self.lo >= _as_interval(other).hi

    def __eq__(self, other):
        o = _as_interval(other)
        return np.array_equal(self.lo, o.lo) and np.array_equal(self.hi, o.hi)

    __hash__ = None


IntervalScalar = Interval


def isum(x: Interval) -> Interval:
    """Enclosure of the sum of all elements.

    ``math.fsum`` returns the correctly rounded exact sum, so one outward
    step per endpoint suffices.
    """
    lo = math.fsum(np.ravel(x.lo).tolist())
    hi = math.fsum(np.ravel(x.hi).tolist())
    return Interval(float(down(lo)), float(up(hi)))


def matmul_enclosure(A: np.ndarray, B: np.ndarray) -> Interval:
    """Enclosure of the exact product of two float matrices.

    Uses the a-priori bound ``|fl(AB) - AB| <= gamma_p |A||B|`` valid for any
    summation order (BLAS included), with an extra term for underflow.  The
    bound itself is evaluated with generous slack and rounded upward.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    p = A.shape[-1]
    C = A @ B
    absprod = np.abs(A) @ np.abs(B)
    if p * _U >= 0.01:
        raise ValueError("inner dimension too large for the a-priori bound")
    # gamma_p/(1-gamma_p) accounts for absprod itself being rounded low;
    # (2p + 4)u dominates it and the rounding of this line.
    err = up((2 * p + 4) * _U * absprod + (p + 2) * _ETA)
    if not np.all(np.isfinite(err)):
        raise FloatingPointError("overflow in product error bound")
    return Interval(down(C - err), up(C + err))


def gram_enclosure(W: np.ndarray) -> Interval:
    """Enclosure of ``W W'`` (exactly positive semidefinite for real ``W``)."""
    return matmul_enclosure(W, W.T)
