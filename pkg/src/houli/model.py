"""Right-hand sides and time stepping for the 1D model and its rescaled form.

Physical equations (odd, 2*pi-periodic fields, ``-psi_xx = omega``)::

    u_t     = -2a psi u_x     + 2 u psi_x + nu u_xx
    omega_t = -2a psi omega_x + (u^2)_x   + nu omega_xx

Rescaled variables ``~f(x, tau) = C_u(tau) f(x, t(tau))`` add ``c_u ~f`` to
both equations and multiply the viscous term by ``C_u``, with
``d(log C_u)/dtau = c_u`` and ``dt/dtau = C_u``.

Two rescaled systems are provided.  ``SmoothSystem`` evolves the full field
and picks ``c_u`` so that ``d/dtau u_x(0) = 0`` holds exactly for the
truncated equations.  ``HolderSystem`` evolves a smooth perturbation around a
fixed ``C^alpha`` background that is sampled pointwise, with the scaling rule
``c_u = (2a beta - 2) psi_x(0)``, ``beta = (1 + alpha)/2``, that keeps the
``|x|^beta`` behaviour of ``u`` at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import OddField, biot_savart, deriv_at_zero, psi_x_at_zero

__all__ = [
    "ModelParams",
    "ModelState",
    "RescalingState",
    "DegenerateNormalization",
    "RescaledBlowup",
    "Discretization",
    "SmoothSystem",
    "HolderSystem",
    "HolderProfile",
    "rhs_physical",
    "normalization_cu",
    "rhs_rescaled",
    "step",
    "advance",
    "lawson_rk4",
    "cfl_number",
    "holder_profile",
    "error_terms",
    "PhysicalSystem",
]

DEFAULT_DTAU = 5e-4
CFL_LIMIT = 0.5


class DegenerateNormalization(ValueError):
    """``u_x(0)`` is too small to fix the scaling rate."""


class RescaledBlowup(FloatingPointError):
    """Non-finite coefficients appeared during stepping."""


@dataclass(frozen=True)
class ModelParams:
    a: float = 1.0
    nu: float = 0.0
    alpha: float = 1.0
    C_u0: float = 1.0

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if not self.C_u0 > 0:
            raise ValueError("C_u0 must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    @property
    def beta(self) -> float:
        return 0.5 * (1.0 + self.alpha)


@dataclass(frozen=True)
class ModelState:
    u: OddField
    omega: OddField

    def __post_init__(self):
        if self.u.M != self.omega.M:
            raise ValueError("u and omega must share the truncation")

    @property
    def M(self) -> int:
        return self.u.M

    @property
    def psi(self) -> OddField:
        return biot_savart(self.omega)

    @classmethod
    def steady(cls, M: int = 256) -> "ModelState":
        """``(sin x, sin x)``, the steady state at ``a = 1``."""
        return cls(OddField.mode(1, M), OddField.mode(1, M))

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.u.coeffs, self.omega.coeffs])

    @classmethod
    def from_array(cls, y: np.ndarray, M: int) -> "ModelState":
        return cls(OddField(y[:M]), OddField(y[M : 2 * M]))


@dataclass(frozen=True)
class RescalingState:
    state: ModelState
    c_u: float
    C_u: float
    t_phys: float = 0.0
    tau: float = 0.0


# -- array-level transforms -------------------------------------------------

class Discretization:
    """Transforms for truncation ``M`` on a grid of ``factor * M`` points.

    With ``factor >= 3`` quadratic products are formed without aliasing
    before truncation back to ``M`` modes.
    """

    def __init__(self, M: int, factor: int = 4):
        if factor < 3:
            raise ValueError("factor must be at least 3 for exact quadratic products")
        self.M = M
        self.n = factor * M
        self.k = np.arange(1, M + 1, dtype=float)
        self.k2 = self.k**2
        self.x = 2 * np.pi * np.arange(self.n) / self.n
        self._buf = np.zeros(self.n // 2 + 1, dtype=complex)

    def odd_to_grid(self, s: np.ndarray) -> np.ndarray:
        X = self._buf
        X[:] = 0
        X[1 : self.M + 1] = (-0.5j * self.n) * s
        return np.fft.irfft(X, self.n)

    def even_to_grid(self, d: np.ndarray, d0: float = 0.0) -> np.ndarray:
        """``d0 + sum_k d_k cos(kx)`` with ``d`` holding ``d_1..d_M``."""
        X = self._buf
        X[:] = 0
        X[0] = self.n * d0
        X[1 : self.M + 1] = (0.5 * self.n) * d
        return np.fft.irfft(X, self.n)

    def grid_to_odd(self, f: np.ndarray) -> np.ndarray:
        return (-2.0 / self.n) * np.fft.rfft(f)[1 : self.M + 1].imag


@lru_cache(maxsize=16)
def _disc(M: int, factor: int = 4) -> Discretization:
    return Discretization(M, factor)


def _transport_stretch(disc: Discretization, a: float, u: np.ndarray, w: np.ndarray):
    """Truncated ``-2a psi u_x + 2u psi_x`` and ``-2a psi w_x + 2u u_x``."""
    k = disc.k
    psi = w / disc.k2
    g_psi = disc.odd_to_grid(psi)
    g_u = disc.odd_to_grid(u)
    g_psix = disc.even_to_grid(k * psi)
    g_ux = disc.even_to_grid(k * u)
    g_wx = disc.even_to_grid(k * w)
    Nu = disc.grid_to_odd(-2.0 * a * g_psi * g_ux + 2.0 * g_u * g_psix)
    Nw = disc.grid_to_odd(-2.0 * a * g_psi * g_wx + 2.0 * g_u * g_ux)
    return Nu, Nw


def rhs_physical(state: ModelState, params: ModelParams) -> tuple[OddField, OddField]:
    """``(du/dt, domega/dt)`` of the physical equations."""
    disc = _disc(state.M)
    u, w = state.u.coeffs, state.omega.coeffs
    Nu, Nw = _transport_stretch(disc, params.a, u, w)
    return OddField(Nu - params.nu * disc.k2 * u), OddField(Nw - params.nu * disc.k2 * w)


def cfl_number(a: float, psi_max: float, M: int, dtau: float) -> float:
    return 2.0 * abs(a) * psi_max * M * dtau


# -- rescaled systems -------------------------------------------------------

class SmoothSystem:
    """Full-field rescaled equations; state vector ``(u, omega, log C_u, t)``."""

    def __init__(self, params: ModelParams, M: int):
        self.params = params
        self.M = M
        self.disc = _disc(M)

    def split(self, y):
        M = self.M
        return y[:M], y[M : 2 * M], y[2 * M], y[2 * M + 1]

    def pack(self, state: ModelState, C_u: float, t_phys: float = 0.0) -> np.ndarray:
        return np.concatenate([state.u.coeffs, state.omega.coeffs, [np.log(C_u), t_phys]])

    def state_of(self, y) -> ModelState:
        u, w, _, _ = self.split(y)
        return ModelState(OddField(u.copy()), OddField(w.copy()))

    def _parts(self, u, w, C):
        p = self.params
        Nu, Nw = _transport_stretch(self.disc, p.a, u, w)
        visc = p.nu * C * self.disc.k2
        return Nu - visc * u, Nw - visc * w

    def c_u(self, u, w, C, Ru=None) -> float:
        """Scaling rate making ``d/dtau sum_k k u_k`` vanish."""
        ux0 = float(self.disc.k @ u)
        if abs(ux0) < 1e-8:
            raise DegenerateNormalization(f"u_x(0) = {ux0:.3e}")
        if Ru is None:
            Ru, _ = self._parts(u, w, C)
        return -float(self.disc.k @ Ru) / ux0

    def rhs(self, y):
        u, w, logC, _ = self.split(y)
        C = float(np.exp(logC))
        Ru, Rw = self._parts(u, w, C)
        c = self.c_u(u, w, C, Ru)
        return np.concatenate([Ru + c * u, Rw + c * w, [c, C]]), c

    def linear_rates(self, y) -> np.ndarray:
        C = float(np.exp(y[2 * self.M]))
        r = self.params.nu * C * self.disc.k2
        return np.concatenate([r, r, [0.0, 0.0]])

    def psi_max(self, y) -> float:
        _, w, _, _ = self.split(y)
        return float(np.max(np.abs(self.disc.odd_to_grid(w / self.disc.k2))))

    def full_fields(self, y) -> ModelState:
        return self.state_of(y)


def lawson_rk4(y: np.ndarray, h: float, rates: np.ndarray, f) -> np.ndarray:
    """One integrating-factor RK4 step for ``y' = f(y)``.

    ``f`` contains the stiff part ``-rates * y``; it is removed exactly by the
    factors ``exp(-rates * s)``, so a pure decay ``f(y) = -rates * y`` is
    integrated without error.
    """
    E2 = np.exp(-0.5 * h * rates)
    E = E2 * E2

    def N(v):
        return f(v) + rates * v

    k1 = N(y)
    k2 = N(E2 * (y + 0.5 * h * k1))
    k3 = N(E2 * y + 0.5 * h * k2)
    k4 = N(E * y + h * E2 * k3)
    return E * y + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def advance(system, y: np.ndarray, dtau: float) -> tuple[np.ndarray, float]:
    """CFL-limited step; returns the new vector and the step actually used."""
    a = system.params.a
    while cfl_number(a, system.psi_max(y), system.M, dtau) > CFL_LIMIT:
        dtau *= 0.5
    y_new = lawson_rk4(y, dtau, system.linear_rates(y), lambda v: system.rhs(v)[0])
    if not np.all(np.isfinite(y_new)):
        raise RescaledBlowup("non-finite coefficients")
    return y_new, dtau


def normalization_cu(state: ModelState, params: ModelParams, C_u: float = 1.0, exact: bool = True) -> float:
    """Scaling rate of the full-field rescaled equations.

    ``exact=True`` solves ``d/dtau u_x(0) = 0`` for the truncated equations.
    ``exact=False`` uses the continuous formula
    ``2(a-1) psi_x(0) - nu C_u u_xxx(0)/u_x(0)`` (requires ``u_x(0) = 1``
    to reduce to the inviscid rule ``2(a-1) psi_x(0)``).
    """
    system = SmoothSystem(params, state.M)
    u, w = state.u.coeffs, state.omega.coeffs
    if exact:
        return system.c_u(u, w, C_u)
    ux0 = deriv_at_zero(state.u, 1)
    if abs(ux0) < 1e-8:
        raise DegenerateNormalization(f"u_x(0) = {ux0:.3e}")
    return 2.0 * (params.a - 1.0) * psi_x_at_zero(state.omega) - params.nu * C_u * deriv_at_zero(state.u, 3) / ux0


def rhs_rescaled(rs: RescalingState, params: ModelParams) -> tuple[OddField, OddField, dict]:
    """``(du/dtau, domega/dtau, scalars)`` with ``scalars`` holding ``c_u``,
    ``dlogC/dtau`` and ``dt/dtau``."""
    system = SmoothSystem(params, rs.state.M)
    y = system.pack(rs.state, rs.C_u, rs.t_phys)
    dy, c = system.rhs(y)
    M = rs.state.M
    return OddField(dy[:M]), OddField(dy[M : 2 * M]), {"c_u": c, "dlogC": c, "dt": rs.C_u}


def step(rs: RescalingState, dtau: float, params: ModelParams) -> RescalingState:
    """One integrating-factor RK4 step of the full-field rescaled equations."""
    if not dtau > 0:
        raise ValueError("dtau must be positive")
    system = SmoothSystem(params, rs.state.M)
    y = system.pack(rs.state, rs.C_u, rs.t_phys)
    y_new, used = advance(system, y, dtau)
    _, c = system.rhs(y_new)
    u, w, logC, t = system.split(y_new)
    return RescalingState(
        state=ModelState(OddField(u.copy()), OddField(w.copy())),
        c_u=c,
        C_u=float(np.exp(logC)),
        t_phys=float(t),
        tau=rs.tau + used,
    )


# -- Hölder data ----------------------------------------------------------------

def _signed_power(x: np.ndarray, p: float) -> np.ndarray:
    s = np.sin(x)
    return np.sign(s) * np.abs(s) ** p


def _signed_power_dx(x: np.ndarray, p: float) -> np.ndarray:
    """Derivative of ``sgn(sin x)|sin x|^p``; set to 0 where ``sin x = 0``."""
    s = np.sin(x)
    out = np.zeros_like(x)
    nz = s != 0
    out[nz] = p * np.abs(s[nz]) ** (p - 1.0) * np.cos(x[nz])
    return out


def _sampled_coeffs(fn, M: int, oversample: int = 16) -> OddField:
    """Sine coefficients of ``fn`` from samples on ``oversample * 2M`` points."""
    n = 2 * M * oversample
    x = 2 * np.pi * np.arange(n) / n
    f = fn(x)
    f[0] = 0.0
    f[n // 2] = 0.0
    s = (-2.0 / n) * np.fft.rfft(f)[1 : M + 1].imag
    return OddField(s)


@dataclass(frozen=True)
class HolderProfile:
    """Approximate ``C^alpha`` steady state at ``a = 1``."""

    alpha: float
    M: int
    u: OddField
    omega: OddField
    psi: OddField
    c_u: float
    psi_x0: float

    @property
    def beta(self) -> float:
        return 0.5 * (1.0 + self.alpha)

    def pointwise(self, x: np.ndarray) -> dict:
        """Closed-form samples of the profile and its first derivatives.

        ``psi`` and ``psi_x`` come from the series, which converge fast.
        """
        al, be = self.alpha, self.beta
        k = self.psi.k
        sx = np.sin(np.outer(x, k)) if x.size * k.size < 5e7 else None
        if sx is not None:
            psi = sx @ self.psi.coeffs
            psi_x = np.cos(np.outer(x, k)) @ (k * self.psi.coeffs)
        else:
            n = x.size
            disc = Discretization(self.M, max(3, n // self.M))
            if disc.n != n or not np.allclose(disc.x, x):
                raise ValueError("large pointwise requests must use the transform grid")
            psi = disc.odd_to_grid(self.psi.coeffs)
            psi_x = disc.even_to_grid(k * self.psi.coeffs)
        return {
            "u": _signed_power(x, be),
            "u_x": _signed_power_dx(x, be),
            "omega": _signed_power(x, al),
            "omega_x": _signed_power_dx(x, al),
            "psi": psi,
            "psi_x": psi_x,
        }


def holder_profile(alpha: float, M: int = 4096) -> HolderProfile:
    """``omega = sgn|sin x|^alpha``, ``u = sgn|sin x|^((1+alpha)/2)``,
    ``psi`` by Biot-Savart and ``c_u = (alpha - 1) psi_x(0)``.

    Coefficients decay only algebraically; they are computed from samples on
    a 32x oversampled grid.
    """
    if not 7.0 / 8.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (7/8, 1]")
    if alpha == 1.0:
        s = OddField.mode(1, M)
        return HolderProfile(1.0, M, s, s, s, 0.0, 1.0)
    beta = 0.5 * (1.0 + alpha)
    omega = _sampled_coeffs(lambda x: _signed_power(x, alpha), M)
    u = _sampled_coeffs(lambda x: _signed_power(x, beta), M)
    psi = biot_savart(omega)
    p0 = psi_x_at_zero(omega)
    return HolderProfile(alpha, M, u, omega, psi, (alpha - 1.0) * p0, p0)


class HolderSystem:
    """Perturbation ``(u, omega)`` around a fixed ``C^alpha`` background.

    Products with the background are formed pointwise on the transform grid
    and projected back to ``M`` modes.  The total scaling rate is
    ``(2a beta - 2)(psi_bar_x(0) + psi_x(0))``.

    Admissible perturbations vanish at the origin faster than ``|x|^beta``,
    so ``u_x(0) = 0`` must persist.  The truncated projection of the singular
    background products leaks into ``sum_k k du_k``; that component is
    removed along ``sin x`` in every evaluation.  Without this the amplitude
    direction ``(sin x, sin x)`` of the truncated system is unstable.
    """

    def __init__(
        self,
        params: ModelParams,
        M: int,
        profile: HolderProfile | None = None,
        constrain: bool = True,
    ):
        if params.nu != 0:
            raise ValueError("Hölder runs are inviscid")
        self.params = params
        self.M = M
        self.disc = _disc(M)
        self.profile = profile or holder_profile(params.alpha)
        bg = self.profile.pointwise(self.disc.x)
        self.bg = bg
        self.psi_bar_x0 = self.profile.psi_x0
        self.rate = 2.0 * params.a * params.beta - 2.0
        self.constrain = constrain

    def split(self, y):
        M = self.M
        return y[:M], y[M : 2 * M], y[2 * M], y[2 * M + 1]

    def pack(self, state: ModelState, C_u: float = 1.0, t_phys: float = 0.0) -> np.ndarray:
        return np.concatenate([state.u.coeffs, state.omega.coeffs, [np.log(C_u), t_phys]])

    def state_of(self, y) -> ModelState:
        u, w, _, _ = self.split(y)
        return ModelState(OddField(u.copy()), OddField(w.copy()))

    def c_total(self, w) -> float:
        return self.rate * (self.psi_bar_x0 + float(w @ (1.0 / self.disc.k)))

    def rhs(self, y):
        d, bg, a = self.disc, self.bg, self.params.a
        u, w, logC, _ = self.split(y)
        C = float(np.exp(logC))
        k = d.k
        psi = w / d.k2
        P = bg["psi"] + d.odd_to_grid(psi)
        Px = bg["psi_x"] + d.even_to_grid(k * psi)
        U = bg["u"] + d.odd_to_grid(u)
        Ux = bg["u_x"] + d.even_to_grid(k * u)
        W = bg["omega"] + d.odd_to_grid(w)
        Wx = bg["omega_x"] + d.even_to_grid(k * w)
        c = self.c_total(w)
        ru = -2.0 * a * P * Ux + 2.0 * U * Px + c * U
        rw = -2.0 * a * P * Wx + 2.0 * U * Ux + c * W
        for g in (ru, rw):  # odd fields vanish at 0 and pi
            g[0] = 0.0
            g[d.n // 2] = 0.0
        du = d.grid_to_odd(ru)
        if self.constrain:
            du[0] -= k @ du
        return np.concatenate([du, d.grid_to_odd(rw), [c, C]]), c

    def linear_rates(self, y) -> np.ndarray:
        return np.zeros(2 * self.M + 2)

    def psi_max(self, y) -> float:
        _, w, _, _ = self.split(y)
        return float(np.max(np.abs(self.bg["psi"] + self.disc.odd_to_grid(w / self.disc.k2))))

    def full_fields(self, y) -> ModelState:
        """Background (at the profile truncation, cut to ``M``) plus perturbation."""
        u, w, _, _ = self.split(y)
        return ModelState(
            OddField(self.profile.u.resized(self.M).coeffs + u),
            OddField(self.profile.omega.resized(self.M).coeffs + w),
        )


def error_terms(a: float | None = None, alpha: float | None = None, M: int = 256):
    """Residuals ``(F1, F2)`` of the approximate steady state.

    With ``a``: the smooth profile ``(sin, sin)`` under weak advection,
    ``F1 = F2 = 2(a-1) sin x (1 - cos x)``, computed through the rescaled
    right-hand side.  With ``alpha``: the ``C^alpha`` profile at ``a = 1``,
    computed pointwise and returned as coefficients at truncation ``M``.
    """
    if (a is None) == (alpha is None):
        raise ValueError("give exactly one of a or alpha")
    if a is not None:
        params = ModelParams(a=a)
        system = SmoothSystem(params, M)
        dy, _ = system.rhs(system.pack(ModelState.steady(M), 1.0))
        return OddField(dy[:M]), OddField(dy[M : 2 * M])
    prof = holder_profile(alpha, M)

    def residuals(x):
        p = prof.pointwise(x)
        f1 = (prof.c_u + 2.0 * p["psi_x"]) * p["u"] - 2.0 * p["psi"] * p["u_x"]
        f2 = prof.c_u * p["omega"] + 2.0 * p["u"] * p["u_x"] - 2.0 * p["psi"] * p["omega_x"]
        return f1, f2

    n = 2 * M * 16
    x = 2 * np.pi * np.arange(n) / n
    f1, f2 = residuals(x)
    F = []
    for f in (f1, f2):
        f[0] = 0.0
        f[n // 2] = 0.0
        F.append(OddField((-2.0 / n) * np.fft.rfft(f)[1 : M + 1].imag))
    return F[0], F[1]


# -- physical evolution --------------------------------------------------------

class PhysicalSystem:
    """Physical equations on ``(u, omega, t)`` for the integrating-factor stepper."""

    def __init__(self, params: ModelParams, M: int):
        self.params = params
        self.M = M
        self.disc = _disc(M)

    def pack(self, state: ModelState, t: float = 0.0) -> np.ndarray:
        return np.concatenate([state.u.coeffs, state.omega.coeffs, [t]])

    def state_of(self, y) -> ModelState:
        M = self.M
        return ModelState(OddField(y[:M].copy()), OddField(y[M : 2 * M].copy()))

    def rhs(self, y):
        M = self.M
        u, w = y[:M], y[M : 2 * M]
        Nu, Nw = _transport_stretch(self.disc, self.params.a, u, w)
        visc = self.params.nu * self.disc.k2
        return np.concatenate([Nu - visc * u, Nw - visc * w, [1.0]]), None

    def linear_rates(self, y) -> np.ndarray:
        r = self.params.nu * self.disc.k2
        return np.concatenate([r, r, [0.0]])

    def psi_max(self, y) -> float:
        w = y[self.M : 2 * self.M]
        return float(np.max(np.abs(self.disc.odd_to_grid(w / self.disc.k2))))
