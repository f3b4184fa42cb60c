"""Aggregated identity checks behind the ``identities`` command.

Every row measures a defect that is zero in exact arithmetic; rows whose
defect comes from truncating an infinite sequence are tagged ``tail``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    EvenField,
    Grid,
    OddField,
    biot_savart,
    differentiate,
    inverse_sine_transform,
    psi_x_at_zero,
    sine_transform,
)
from .weighted import (
    F_quadratic,
    b_from_c,
    dE1_direct,
    even_coords,
    from_odd_coords,
    pair_rho,
    rho_k_norm,
    sin_dx,
    to_weighted_basis,
)

__all__ = ["IdentityRow", "random_perturbation", "random_odd", "damping_defects", "run_identities", "format_table"]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class IdentityRow:
    name: str
    kind: str  # "exact" or "tail"
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tol)


def random_odd(rng: np.random.Generator, M: int, decay: float = 2.0) -> OddField:
    k = np.arange(1, M + 1, dtype=float)
    return OddField(rng.standard_normal(M) / k**decay)


def random_perturbation(rng: np.random.Generator, M: int, decay: float = 2.0) -> tuple[OddField, OddField]:
    """Random ``(u, omega)`` with ``u_x(0) = 0``."""
    u = rng.standard_normal(M) / np.arange(1, M + 1, dtype=float) ** (decay + 1)
    u[0] -= np.arange(1, M + 1) @ u  # enforce sum k u_k = 0
    return OddField(u), random_odd(rng, M, decay)


def damping_defects(u: OddField, omega: OddField, delta: float = 0.84, flip_sign: bool = False) -> dict:
    """Relative defects of ``dE1 = -F(a, -c, 1)`` and the ``delta`` form.

    The cross block of the quadratic form pairs ``a`` with ``-c`` under the
    basis conventions used here; spectra of both sign choices coincide.
    """
    wc = to_weighted_basis(omega, u)
    a, c = wc.a, wc.c
    norms = float(a @ a + c @ c)
    d = dE1_direct(u, omega)
    one = d + F_quadratic(a, -c, 1.0, flip_sign=flip_sign)
    gen = d + (1.0 - delta) * norms + F_quadratic(a, -c, delta, flip_sign=flip_sign)
    return {"dE1": d, "norms": norms, "delta_one": abs(one) / norms, "delta": abs(gen) / norms}


def _gl(f, lo: float, hi: float, n: int = 96) -> float:
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return float(0.5 * (hi - lo) * (w @ f(t)))


def run_identities(
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    M: int = 32,
    trials: int = 50,
    inject_sign_error: bool = False,
) -> list[IdentityRow]:
    rng = np.random.default_rng(seed)
    rows = []

    def row(name, kind, defect):
        rows.append(IdentityRow(name, kind, float(defect), tol))

    # integration-by-parts damping: (sin x f_x, f rho) = (f, f rho)/2
    worst = 0.0
    for _ in range(trials):
        f = random_odd(rng, M)
        worst = max(worst, abs(pair_rho(sin_dx(f), f) - 0.5 * pair_rho(f, f)) / pair_rho(f, f))
    row("damping_identity_odd", "exact", worst)
    worst = 0.0
    for _ in range(trials):
        u, _ = random_perturbation(rng, M)
        g = differentiate(u)
        worst = max(worst, abs(2 * pair_rho(sin_dx(g), g) - pair_rho(g, g)) / pair_rho(g, g))
    row("damping_identity_even", "exact", worst)

    # orthonormality of o^k and e^k against rho
    K = 32
    o = [OddField.mode(k, K + 1) - (OddField.mode(k - 1, K + 1) if k > 1 else OddField.zeros(K + 1)) for k in range(1, K + 1)]
    G = np.array([[pair_rho(p, q) for q in o] for p in o])
    row("orthonormal_o", "exact", np.max(np.abs(G - np.eye(K))))
    e = [EvenField.mode(k, K + 2) - EvenField.mode(k + 1, K + 2) for k in range(0, K + 1)]
    G = np.array([[pair_rho(p, q) for q in e] for p in e])
    row("orthonormal_e", "exact", np.max(np.abs(G - np.eye(K + 1))))

    # u = sum b_k o^k with b from the u_x coordinates
    worst = 0.0
    for _ in range(trials):
        u, w = random_perturbation(rng, M)
        wc = to_weighted_basis(w, u)
        rec = from_odd_coords(b_from_c(wc.c))
        worst = max(worst, np.max(np.abs(rec.resized(M + 1).coeffs - u.resized(M + 1).coeffs)))
    row("bc_reconstruction", "exact", worst)

    # zero mode: (u_x, e^0 rho) = mean of u_x
    e0 = EvenField(np.array([1.0, -1.0]))
    worst = 0.0
    for _ in range(trials):
        u, _ = random_perturbation(rng, M)
        worst = max(worst, abs(pair_rho(differentiate(u), e0)))
    row("zero_mode", "exact", worst)

    # Biot-Savart: spectral solve against the integral form on the offset grid
    worst_bs, worst_m = 0.0, 0.0
    x = Grid(64).offset_nodes
    x = x[x < 2 * np.pi]
    for _ in range(5):
        w = random_odd(rng, 8)
        psi = biot_savart(w)
        px0 = psi_x_at_zero(w)
        moment = -_gl(lambda y: y * w(y), 0.0, 2 * np.pi) / (2 * np.pi)
        worst_m = max(worst_m, abs(px0 - moment))
        integral = np.array([_gl(lambda y, xi=xi: (y - xi) * w(y), 0.0, xi) for xi in x])
        worst_bs = max(worst_bs, np.max(np.abs(psi(x) - integral - x * px0)))
    row("biot_savart_integral", "exact", worst_bs)
    row("psi_x0_moment", "exact", worst_m)

    # psi recovers -omega
    w = random_odd(rng, M)
    row("biot_savart_inverse", "exact", np.max(np.abs(differentiate(differentiate(biot_savart(w))).coeffs + w.coeffs)))

    # transform round trip
    grid = Grid.for_truncation(M)
    f = random_odd(rng, M)
    samples = inverse_sine_transform(f, grid)
    row("transform_round_trip", "exact", np.max(np.abs(sine_transform(samples, M).coeffs - f.coeffs)))

    # dE1 against the quadratic form, at delta = 1 and delta = 0.84
    w1, w84 = 0.0, 0.0
    for _ in range(trials):
        u, w = random_perturbation(rng, M)
        d = damping_defects(u, w, flip_sign=inject_sign_error)
        w1, w84 = max(w1, d["delta_one"]), max(w84, d["delta"])
    row("dE1_oracle", "exact", w1)
    row("damping_oracle_084", "exact", w84)

    # quadrature and admissibility at rounding level
    row("rho1_quadrature", "exact", abs(rho_k_norm(OddField.mode(1, 4), 1) - math.sqrt(math.pi)))
    u, _ = random_perturbation(rng, 256, decay=1.0)
    row("admissible_defect", "exact", abs(even_coords(differentiate(u))[-1]))

    # tail rows: truncated series against their limits
    n = 4096
    k = np.arange(1, n + 1, dtype=float)
    row("tail_psi_x0_series", "tail", abs(psi_x_at_zero(OddField(1.0 / k**3)) - math.pi**4 / 90))
    basel = math.fsum((1.0 / k**2).tolist())
    row("tail_basel_sum", "tail", abs(basel - math.pi**2 / 6 + 1.0 / (n + 0.5)))
    return rows


def format_table(rows: list[IdentityRow]) -> str:
    width = max(len(r.name) for r in rows)
    out = [f"{'identity':<{width}}  kind   defect                   tol       result"]
    for r in rows:
        out.append(f"{r.name:<{width}}  {r.kind:<5}  {r.defect:.17g}".ljust(width + 34) + f"  {r.tol:.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(out)
