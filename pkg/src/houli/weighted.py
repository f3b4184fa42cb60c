"""Singular-weight machinery for the linear damping analysis.

The weight ``rho = 1 / (2*pi*(1 - cos x))`` is singular at the origin, so every
rho-pairing is evaluated in the orthonormal bases

    o^k = sin(kx) - sin((k-1)x),   k >= 1   (odd fields)
    e^k = cos(kx) - cos((k+1)x),   k >= 0   (even fields vanishing at 0)

where the pairing is an ordinary dot product of coordinates.  Bounded weights
``(1 + cos x)^k`` are handled by quadrature on the offset grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    EvenField,
    Grid,
    OddField,
    biot_savart,
    deriv_at_zero,
    differentiate,
    mul_cos,
    mul_sin,
    psi_x_at_zero,
)

__all__ = [
    "AdmissibilityError",
    "WeightedCoeffs",
    "EnergyReport",
    "odd_coords",
    "even_coords",
    "b_from_c",
    "to_weighted_basis",
    "from_odd_coords",
    "from_even_coords",
    "pair_rho",
    "weighted_norm",
    "rho_k_norm",
    "sin_dx",
    "energies",
    "linearized_apply",
    "dE1_direct",
    "F_quadratic",
]

PAPER_DELTA = 0.84


class AdmissibilityError(ValueError):
    """Field is outside the class on which the rho-norm is finite."""


def odd_coords(f: OddField) -> np.ndarray:
    """Coordinates ``a_k = sum_{j >= k} f_j`` of an odd field in ``{o^k}``."""
    return np.cumsum(f.coeffs[::-1])[::-1].copy()


def even_coords(g: EvenField) -> np.ndarray:
    """Coordinates ``c_0..c_M`` of an even field in ``{e^k}``.

    ``c_k`` is the partial sum ``d_0 + ... + d_k``.  The last entry equals
    ``g(0)``; it must vanish for ``g`` to lie in L^2(rho).
    """
    return np.cumsum(g.coeffs)


def from_odd_coords(a) -> OddField:
    a = np.asarray(a, dtype=float)
    s = a.copy()
    s[:-1] -= a[1:]
    return OddField(s)


def from_even_coords(c) -> EvenField:
    """Even field ``sum_{k>=0} c_k e^k``; needs one extra cosine mode."""
    c = np.asarray(c, dtype=float)
    d = np.zeros(c.size + 1)
    d[: c.size] += c
    d[1:] -= c
    return EvenField(d)


def b_from_c(c) -> np.ndarray:
    """Coordinates of ``u`` in ``{o^k}`` from those of ``u_x`` in ``{e^k}``.

    ``c`` holds ``c_1, c_2, ...`` (``c_0 = 0`` implied).  Uses the closed-form
    inversion ``b_i = sum_{k>=i} c_k/(k(k+1)) - c_{i-1}/i`` which already
    folds in ``u_x(0) = 0``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    k = np.arange(1, n + 1, dtype=float)
    tail = np.cumsum((c / (k * (k + 1)))[::-1])[::-1]
    b = np.zeros(n + 1)
    b[:n] = tail
    b[1:] -= c / np.arange(2, n + 2, dtype=float)
    return b


@dataclass(frozen=True)
class WeightedCoeffs:
    """Coordinates of ``(omega, u_x, u)`` in the weighted bases.

    ``a[k-1] = a_k``, ``c[k-1] = c_k`` and ``b[k-1] = b_k``; ``c_0 = 0`` is
    not stored.
    """

    a: np.ndarray
    c: np.ndarray
    b: np.ndarray


def to_weighted_basis(omega: OddField, u: OddField, tol: float = 1e-10) -> WeightedCoeffs:
    ux0 = deriv_at_zero(u, 1)
    if abs(ux0) > tol * max(1.0, np.max(np.abs(u.k * u.coeffs), initial=0.0)):
        raise AdmissibilityError(f"u_x(0) = {ux0:.3e} != 0; u is not a perturbation")
    c_full = even_coords(differentiate(u))
    # c_full[0] is the mean of u_x, which is identically zero for odd u.
    c = c_full[1 : u.M]
    return WeightedCoeffs(a=odd_coords(omega), c=c, b=b_from_c(c)[: u.M])


def _admissible_even(g: EvenField, tol: float) -> np.ndarray:
    c = even_coords(g)
    scale = max(1.0, float(np.max(np.abs(g.coeffs), initial=0.0)))
    if abs(c[-1]) > tol * scale:
        raise AdmissibilityError(
            f"even field has g(0) = {c[-1]:.3e}; its rho-norm is infinite"
        )
    return c[:-1]


def pair_rho(f, g, tol: float = 1e-9) -> float:
    """Weighted pairing ``(f, g rho) = int_{-pi}^{pi} f g rho``."""
    if isinstance(f, OddField) and isinstance(g, OddField):
        m = max(f.M, g.M)
        return float(odd_coords(f.resized(m)) @ odd_coords(g.resized(m)))
    if isinstance(f, EvenField) and isinstance(g, EvenField):
        m = max(f.M, g.M)
        return float(_admissible_even(f.resized(m), tol) @ _admissible_even(g.resized(m), tol))
    raise TypeError("rho-pairing of fields with different parity vanishes; refusing")


def rho_k_norm(f, k: int, n_points: int | None = None) -> float:
    """``(f^2, (1+cos x)^k)^{1/2}`` by offset-grid quadrature.

    The integrand is a trigonometric polynomial, so the rule is exact once the
    grid resolves its top frequency.  ``k = 0`` means the singular weight
    (following the convention rho_0 = rho) and is computed in coordinates.
    """
    if k == 0:
        return weighted_norm(f)
    n = n_points or 2 * (2 * f.M + k + 2)
    x = Grid(n + n % 2).offset_nodes
    vals = f(x)
    return float(np.sqrt(np.sum(vals**2 * (1 + np.cos(x)) ** k) * 2 * np.pi / x.size))


def weighted_norm(f, weight: str | int = "rho", tol: float = 1e-9) -> float:
    if weight == "rho" or weight == 0:
        return float(np.sqrt(max(pair_rho(f, f, tol), 0.0)))
    return rho_k_norm(f, int(weight))


def sin_dx(f):
    """``D_x f = sin(x) f_x`` computed exactly in coefficients."""
    return mul_sin(differentiate(f))


# -- linearized operators ---------------------------------------------------

def linearized_apply(u: OddField, omega: OddField) -> dict[str, OddField]:
    """Leading linear operators about ``(sin x, sin x)``.

    Returns ``L1, L1p, L2, L2p`` (``p`` marks the O(a-1) companions) with
    ``psi = biot_savart(omega)``, all computed exactly in coefficients.
    """
    m = max(u.M, omega.M)
    u, omega = u.resized(m), omega.resized(m)
    psi = biot_savart(omega)
    psix0 = psi_x_at_zero(omega)
    ux, psix, wx = differentiate(u), differentiate(psi), differentiate(omega)
    sin1 = OddField.mode(1, m)
    two = 2.0
    common_u = -two * mul_sin(ux) - two * mul_cos(psi)
    common_w = -two * mul_sin(wx) - two * mul_cos(psi)
    L1 = common_u + two * mul_cos(u) + two * mul_sin(psix)
    L1p = common_u + two * u + two * psix0 * sin1
    L2 = common_w + two * mul_cos(u) + two * mul_sin(ux)
    L2p = common_w + two * omega + two * psix0 * sin1
    return {"L1": L1, "L1p": L1p, "L2": L2, "L2p": L2p}


def dE1_direct(u: OddField, omega: OddField) -> float:
    """``((L1)_x, u_x rho) + (L2, omega rho)`` by exact weighted pairings."""
    ops = linearized_apply(u, omega)
    return pair_rho(differentiate(ops["L1"]), differentiate(u)) + pair_rho(ops["L2"], omega)


def F_quadratic(a, c, delta: float = PAPER_DELTA, *, flip_sign: bool = False) -> float:
    """Literal evaluation of the damping quadratic form ``F(a, c)``.

    ``a`` and ``c`` hold ``a_1, a_2, ...`` and ``c_1, c_2, ...`` (finitely
    supported).  Terms with ``1/(k-1)`` are dropped at ``k = 1``.
    ``flip_sign`` negates the ``a_{k+2} c_k`` family; it exists only so the
    identity suite can demonstrate that it catches a coefficient error.
    """
    n = max(len(a), len(c)) + 2
    A = np.zeros(n + 1)  # A[k] = a_k, index 0 unused
    C = np.zeros(n + 1)
    A[1 : len(a) + 1] = a
    C[1 : len(c) + 1] = c
    k = np.arange(1, n + 1, dtype=float)
    ak, ck = A[1:], C[1:]
    inv_km1_sq = np.zeros(n)
    inv_km1_sq[1:] = 1.0 / (k[1:] - 1.0) ** 2
    total = np.sum(ak**2 * (delta + 1.0 / k**2 - inv_km1_sq))
    total += np.sum(ck**2 * (delta + 1.0 / (k * (k + 1.0))))
    # 2 a_k a_{k+1} / (k+1)^2
    total += np.sum(2.0 * ak[:-1] * ak[1:] / k[1:] ** 2)
    # 2 a_k sum_{j > k+1} a_j (1/j^2 - 1/(j-1)^2)
    w = np.zeros(n)
    w[1:] = ak[1:] * (1.0 / k[1:] ** 2 - 1.0 / (k[1:] - 1.0) ** 2)
    suffix = np.cumsum(w[::-1])[::-1]  # suffix[i] = sum_{j-1 >= i} w_j
    total += np.sum(2.0 * ak[:-2] * suffix[2:])
    # 2 a_k c_k (1 + 2k - k^2) / (2 k^2 (k+1))
    total += np.sum(2.0 * ak * ck * (1 + 2 * k - k**2) / (2 * k**2 * (k + 1)))
    # 2 a_{k+1} c_k (k^2 - k - 1) / (2 k^2 (k+1)^2)
    kk = k[:-1]
    total += np.sum(2.0 * ak[1:] * ck[:-1] * (kk**2 - kk - 1) / (2 * kk**2 * (kk + 1) ** 2))
    # -2 a_{k+2} c_k (k+2) / (2 (k+1)^2)
    sign = 1.0 if flip_sign else -1.0
    kk = k[:-2]
    total += sign * np.sum(2.0 * ak[2:] * ck[:-2] * (kk + 2) / (2 * (kk + 1) ** 2))
    # sum_{j > k} 2 a_k c_j / (j (j+1))
    v = ck / (k * (k + 1))
    vsuffix = np.cumsum(v[::-1])[::-1]
    total += np.sum(2.0 * ak[:-1] * vsuffix[1:])
    return float(total)


# -- energies ---------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    E: float
    K: float
    J: float | None
    E_k: tuple[float, ...]
    I: float
    E_V: float
    mu1: float
    defects: dict = field(default_factory=dict)


def _norm_sq_even(g: EvenField, defects: dict, name: str) -> float:
    c = even_coords(g)
    defects[name] = float(abs(c[-1]))
    return float(c[:-1] @ c[:-1])


def energies(
    u: OddField,
    omega: OddField,
    u_t: OddField | None = None,
    omega_t: OddField | None = None,
    k0: int = 4,
    mu1: float = 0.1,
    n_interval: int = 2001,
) -> EnergyReport:
    """Energies of a perturbation ``(u, omega)``.

    ``E^2 = (||u_x||^2 + ||omega||^2)/2`` and ``K^2`` use rho; ``J`` needs the
    time derivatives ``(u_t, omega_t)``; ``E_k`` (k >= 1) use the bounded
    weights ``(1+cos x)^k`` with ``E_0 = E``; ``I^2 = sum mu1^k E_k^2``;
    ``E_V`` is the sup of third derivatives on [-pi/2, pi/2] plus
    ``|omega_x(0)|``.  ``defects`` records the value at 0 of every even field
    whose rho-norm was taken; these should be at rounding level.
    """
    defects: dict = {}
    ux = differentiate(u)
    E2 = 0.5 * (_norm_sq_even(ux, defects, "u_x") + pair_rho(omega, omega))
    K2 = _norm_sq_even(sin_dx(ux), defects, "D_x u_x") + pair_rho(sin_dx(omega), sin_dx(omega))
    J = None
    if u_t is not None and omega_t is not None:
        J2 = 0.5 * (_norm_sq_even(differentiate(u_t), defects, "u_tx") + pair_rho(omega_t, omega_t))
        J = float(np.sqrt(max(J2, 0.0)))
    E = float(np.sqrt(max(E2, 0.0)))
    Ek = [E]
    du, dw = differentiate(ux), omega
    for k in range(1, k0 + 1):
        dw = differentiate(dw)  # omega^{(k)}
        Ek.append(float(np.hypot(rho_k_norm(du, k), rho_k_norm(dw, k))))
        du = differentiate(du)  # u^{(k+2)} for the next k
    I = float(np.sqrt(sum(mu1**k * e**2 for k, e in enumerate(Ek))))
    x = np.linspace(-np.pi / 2, np.pi / 2, n_interval)
    w3 = differentiate(differentiate(differentiate(omega)))
    u3 = differentiate(differentiate(differentiate(u)))
    E_V = float(np.max(np.abs(w3(x))) + np.max(np.abs(u3(x))) + abs(deriv_at_zero(omega, 1)))
    return EnergyReport(
        E=E,
        K=float(np.sqrt(max(K2, 0.0))),
        J=J,
        E_k=tuple(Ek),
        I=I,
        E_V=E_V,
        mu1=mu1,
        defects=defects,
    )
