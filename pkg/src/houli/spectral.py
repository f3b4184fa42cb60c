"""Odd/even truncated Fourier series on the 2*pi-periodic circle.

Fields are stored by their coefficients; grid samples only exist while a
nonlinear product is being formed.  ``OddField`` holds ``s_1..s_M`` for
``sum s_k sin(kx)`` and ``EvenField`` holds ``d_0..d_M`` for
``sum d_k cos(kx)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OddField",
    "EvenField",
    "Grid",
    "sine_transform",
    "cosine_transform",
    "inverse_sine_transform",
    "inverse_cosine_transform",
    "differentiate",
    "biot_savart",
    "psi_x_at_zero",
    "deriv_at_zero",
    "multiply_dealiased",
    "mul_sin",
    "mul_cos",
    "SymmetryError",
]


class SymmetryError(ValueError):
    """Grid samples do not have the parity required by the transform."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OddField:
    """``f(x) = sum_{k=1}^{M} coeffs[k-1] * sin(kx)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 1:
            raise ValueError("coefficient vector must be one-dimensional")
        object.__setattr__(self, "coeffs", c)

    @property
    def M(self) -> int:
        return self.coeffs.size

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.M + 1, dtype=float)

    @classmethod
    def zeros(cls, M: int) -> "OddField":
        return cls(np.zeros(M))

    @classmethod
    def mode(cls, k: int, M: int, amplitude: float = 1.0) -> "OddField":
        c = np.zeros(M)
        c[k - 1] = amplitude
        return cls(c)

    def resized(self, M: int) -> "OddField":
        """Truncate or zero-pad to ``M`` modes."""
        c = np.zeros(M)
        n = min(M, self.M)
        c[:n] = self.coeffs[:n]
        return OddField(c)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sin(np.multiply.outer(x, self.k)) @ self.coeffs

    def __add__(self, other):
        if isinstance(other, OddField):
            m = max(self.M, other.M)
            return OddField(self.resized(m).coeffs + other.resized(m).coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OddField):
            return self + (-other)
        return NotImplemented

    def __neg__(self):
        return OddField(-self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return OddField(self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"OddField(M={self.M})"


@dataclass(frozen=True, eq=False)
class EvenField:
    """``g(x) = sum_{k=0}^{M} coeffs[k] * cos(kx)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coefficient vector must be one-dimensional and non-empty")
        object.__setattr__(self, "coeffs", c)

    @property
    def M(self) -> int:
        return self.coeffs.size - 1

    @property
    def k(self) -> np.ndarray:
        return np.arange(0, self.M + 1, dtype=float)

    @classmethod
    def zeros(cls, M: int) -> "EvenField":
        return cls(np.zeros(M + 1))

    @classmethod
    def mode(cls, k: int, M: int, amplitude: float = 1.0) -> "EvenField":
        c = np.zeros(M + 1)
        c[k] = amplitude
        return cls(c)

    def resized(self, M: int) -> "EvenField":
        c = np.zeros(M + 1)
        n = min(M, self.M) + 1
        c[:n] = self.coeffs[:n]
        return EvenField(c)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.cos(np.multiply.outer(x, self.k)) @ self.coeffs

    def __add__(self, other):
        if isinstance(other, EvenField):
            m = max(self.M, other.M)
            return EvenField(self.resized(m).coeffs + other.resized(m).coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, EvenField):
            return self + (-other)
        return NotImplemented

    def __neg__(self):
        return EvenField(-self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return EvenField(self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"EvenField(M={self.M})"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid.

    ``nodes`` are ``2*pi*j/n`` (transform grid); ``offset_nodes`` are
    ``2*pi*(j+1/2)/n`` and never touch ``x = 0`` or ``x = 2*pi``.
    """

    n_points: int

    def __post_init__(self):
        if self.n_points < 4 or self.n_points % 2:
            raise ValueError("n_points must be an even integer >= 4")

    @classmethod
    def for_truncation(cls, M: int, factor: int = 4) -> "Grid":
        return cls(factor * M)

    @property
    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def offset_nodes(self) -> np.ndarray:
        return 2 * np.pi * (np.arange(self.n_points) + 0.5) / self.n_points

    @property
    def max_mode(self) -> int:
        return self.n_points // 2

    def check(self, M: int) -> None:
        if self.n_points < 2 * M + 2:
            raise ValueError(
                f"grid of {self.n_points} points too small for truncation M={M} "
                f"(need >= {2 * M + 2})"
            )


# -- transforms -------------------------------------------------------------

def _check_parity(samples: np.ndarray, sign: int, tol: float) -> None:
    reflected = np.roll(samples[::-1], 1)  # value at x_{n-j}
    defect = np.max(np.abs(samples - sign * reflected))
    scale = max(1.0, np.max(np.abs(samples)))
    if defect > tol * scale:
        kind = "odd" if sign < 0 else "even"
        raise SymmetryError(f"samples are not {kind} about x=0 (defect {defect:.3e})")


def sine_transform(samples, M: int | None = None, tol: float = 1e-10) -> OddField:
    """Sine coefficients of odd samples taken on ``Grid.nodes``."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    _check_parity(samples, -1, tol)
    X = np.fft.rfft(samples)
    s = -2.0 * X.imag[1:] / n
    mmax = n // 2 - 1
    M = mmax if M is None else M
    out = np.zeros(M)
    m = min(M, mmax)
    out[:m] = s[:m]
    return OddField(out)


def cosine_transform(samples, M: int | None = None, tol: float = 1e-10) -> EvenField:
    """Cosine coefficients of even samples taken on ``Grid.nodes``."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    _check_parity(samples, +1, tol)
    X = np.fft.rfft(samples).real / n
    d = 2.0 * X
    d[0] = X[0]
    d[-1] = X[-1]  # Nyquist cosine is not doubled
    mmax = n // 2
    M = mmax if M is None else M
    out = np.zeros(M + 1)
    m = min(M, mmax) + 1
    out[:m] = d[:m]
    return EvenField(out)


def inverse_sine_transform(f: OddField, grid: Grid) -> np.ndarray:
    n = grid.n_points
    if f.M > n // 2 - 1:
        raise ValueError(f"grid of {n} points cannot carry {f.M} sine modes")
    X = np.zeros(n // 2 + 1, dtype=complex)
    X[1 : f.M + 1] = -0.5j * n * f.coeffs
    return np.fft.irfft(X, n)


def inverse_cosine_transform(g: EvenField, grid: Grid) -> np.ndarray:
    n = grid.n_points
    if g.M > n // 2:
        raise ValueError(f"grid of {n} points cannot carry {g.M} cosine modes")
    X = np.zeros(n // 2 + 1, dtype=complex)
    X[: g.M + 1] = 0.5 * n * g.coeffs
    X[0] = n * g.coeffs[0]
    if g.M == n // 2:
        X[-1] = n * g.coeffs[-1]
    return np.fft.irfft(X, n)


def to_grid(f: OddField | EvenField, grid: Grid) -> np.ndarray:
    if isinstance(f, OddField):
        return inverse_sine_transform(f, grid)
    return inverse_cosine_transform(f, grid)


# -- calculus ---------------------------------------------------------------

def differentiate(f: OddField | EvenField) -> OddField | EvenField:
    """Exact derivative; odd -> even and even -> odd, same truncation."""
    if isinstance(f, OddField):
        d = np.zeros(f.M + 1)
        d[1:] = f.k * f.coeffs
        return EvenField(d)
    if isinstance(f, EvenField):
        return OddField(-f.k[1:] * f.coeffs[1:])
    raise TypeError(f"cannot differentiate {type(f).__name__}")


def biot_savart(omega: OddField) -> OddField:
    """Solve ``-psi_xx = omega`` in the odd class: ``psi_k = omega_k / k^2``."""
    return OddField(omega.coeffs / omega.k**2)


def psi_x_at_zero(omega: OddField) -> float:
    """``psi_x(0)`` for ``psi = biot_savart(omega)``, i.e. ``sum omega_k / k``."""
    return float(np.sum(omega.coeffs / omega.k))


def deriv_at_zero(f: OddField, order: int) -> float:
    """Odd-order derivative of an odd field at the origin."""
    if order < 1 or order % 2 == 0:
        raise ValueError("even-order derivatives of odd fields vanish at 0; use order 1 or 3")
    sign = -1.0 if (order // 2) % 2 else 1.0
    return float(sign * np.sum(f.k**order * f.coeffs))


def mul_sin(f: OddField | EvenField) -> OddField | EvenField:
    """Exact product with ``sin x``; the truncation grows by one mode."""
    if isinstance(f, OddField):
        # sin x sin kx = (cos(k-1)x - cos(k+1)x) / 2
        out = np.zeros(f.M + 2)
        out[: f.M] += 0.5 * f.coeffs
        out[2 : f.M + 2] -= 0.5 * f.coeffs
        return EvenField(out)
    # sin x cos kx = (sin(k+1)x - sin(k-1)x) / 2; the k = 0 term is d_0 sin x
    d = f.coeffs
    out = np.zeros(f.M + 1)
    out += 0.5 * d
    out[0] += 0.5 * d[0]
    out[: f.M - 1] -= 0.5 * d[2:]
    return OddField(out)


def mul_cos(f: OddField | EvenField) -> OddField | EvenField:
    """Exact product with ``cos x``; the truncation grows by one mode."""
    if isinstance(f, OddField):
        # cos x sin kx = (sin(k+1)x + sin(k-1)x) / 2
        out = np.zeros(f.M + 1)
        out[1:] += 0.5 * f.coeffs
        out[: f.M - 1] += 0.5 * f.coeffs[1:]
        return OddField(out)
    # cos x cos kx = (cos(k+1)x + cos(k-1)x) / 2; the k = 0 term is d_0 cos x
    d = f.coeffs
    out = np.zeros(f.M + 2)
    out[1:] += 0.5 * d
    out[1] += 0.5 * d[0]
    out[: f.M] += 0.5 * d[1:]
    return EvenField(out)


def multiply_dealiased(f, g, grid: Grid, M: int | None = None):
    """Pointwise product of two fields, returned in coefficient space.

    Modes above ``n_points // 3`` are discarded (2/3 rule), then the result is
    truncated to ``M`` (default: the larger operand truncation).
    """
    M = max(f.M, g.M) if M is None else M
    grid.check(max(f.M, g.M))
    prod = to_grid(f, grid) * to_grid(g, grid)
    cutoff = min(M, grid.n_points // 3)
    odd = isinstance(f, OddField) != isinstance(g, OddField)
    if odd:
        res = sine_transform(prod, M, tol=np.inf).coeffs.copy()
        res[cutoff:] = 0.0
        return OddField(res)
    res = cosine_transform(prod, M, tol=np.inf).coeffs.copy()
    res[cutoff + 1 :] = 0.0
    return EvenField(res)
