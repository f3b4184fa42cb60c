"""Drive the rescaled flow to a steady state and validate the blowup law.

A converged steady state ``(u_inf, omega_inf, c_inf)`` of the rescaled
equations gives the self-similar solution ``profile / (1 + c_inf t)`` of the
physical equations, which blows up at ``T = -1/c_inf`` when ``c_inf < 0``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .model import (
    DEFAULT_DTAU,
    error_terms,
    HolderSystem,
    ModelParams,
    ModelState,
    PhysicalSystem,
    RescaledBlowup,
    SmoothSystem,
    advance,
    holder_profile,
    lawson_rk4,
)
from .spectral import OddField

__all__ = [
    "RescaleSettings",
    "ProfileResult",
    "Residual",
    "BlowupSolution",
    "BlowupCheck",
    "SweepRow",
    "perturbation_energies",
    "make_system",
    "run_to_steady",
    "steady_residual",
    "reconstruct_blowup",
    "physical_blowup_check",
    "rescaled_vs_physical",
    "history_fit",
    "sweep",
    "sweep_csv",
    "write_profile",
    "read_profile",
    "OUTSIDE_FORMULATION_A",
    "holder_residual_norms",
]

OUTSIDE_FORMULATION_A = 0.6


@dataclass(frozen=True)
class RescaleSettings:
    M: int = 256
    dtau: float = DEFAULT_DTAU
    tol_J: float = 1e-10
    tol_dc: float = 1e-12
    max_tau: float = 400.0
    record_every: float = 1.0
    safeguard_E: float = 1e3
    holder_M: int = 4096  # truncation used to sample the C^alpha background


# -- energies of a perturbation, in weighted coordinates ---------------------

def _rho_sq_odd(s: np.ndarray) -> float:
    a = np.cumsum(s[::-1])[::-1]
    return float(a @ a)


def _rho_sq_dx(s: np.ndarray, k: np.ndarray) -> tuple[float, float]:
    """``||f_x||_rho^2`` of an odd ``f`` and the defect ``f_x(0)``."""
    c = np.cumsum(k * s)
    return float(c[:-1] @ c[:-1]), float(c[-1])


def _sin_times_even(d: np.ndarray) -> np.ndarray:
    """Sine coefficients of ``sin(x) * sum_{k>=1} d_k cos(kx)``."""
    M = d.size
    out = np.zeros(M + 1)
    out[1:] += 0.5 * d  # sin((k+1)x)/2
    out[: M - 1] -= 0.5 * d[1:]  # -sin((k-1)x)/2 for k >= 2
    return out


def perturbation_energies(u, w, fu=None, fw=None) -> dict:
    """``E, K`` of a perturbation and ``J`` of its time derivative.

    Inputs are sine-coefficient arrays.  ``defect`` collects the values at 0
    of even fields whose rho-norm was taken (zero for admissible input).
    """
    k = np.arange(1, u.size + 1, dtype=float)
    ux2, d0 = _rho_sq_dx(u, k)
    E = math.sqrt(max(0.5 * (ux2 + _rho_sq_odd(w)), 0.0))
    # D_x u_x = sin x u_xx (odd) and D_x w = sin x w_x (odd)
    Dux = _sin_times_even(-k * k * u)
    Dw = _sin_times_even(k * w)
    K = math.sqrt(max(_rho_sq_odd(Dux) + _rho_sq_odd(Dw), 0.0))
    out = {"E": E, "K": K, "J": float("nan"), "defect": abs(d0)}
    if fu is not None:
        fux2, d1 = _rho_sq_dx(fu, k)
        out["J"] = math.sqrt(max(0.5 * (fux2 + _rho_sq_odd(fw)), 0.0))
        out["defect"] = max(out["defect"], abs(d1))
    return out


# -- systems -------------------------------------------------------------------

def make_system(params: ModelParams, M: int, holder_M: int = 4096):
    if params.alpha < 1.0:
        return HolderSystem(params, M, holder_profile(params.alpha, holder_M))
    return SmoothSystem(params, M)


def _reference(system) -> np.ndarray:
    """Coefficients of the approximate steady state, as ``(u, w)`` arrays."""
    M = system.M
    if isinstance(system, HolderSystem):
        return np.zeros(2 * M)
    ref = np.zeros(2 * M)
    ref[0] = 1.0
    ref[M] = 1.0
    return ref


def _dc_dtau(system, y, f) -> float:
    """Derivative of ``c_u`` along the flow by a central difference."""
    norm = float(np.max(np.abs(f[:-2]))) if f.size > 2 else 0.0
    if norm == 0.0:
        return 0.0
    h = min(1.0, 1e-3 / norm)
    cp = system.rhs(y + h * f)[1]
    cm = system.rhs(y - h * f)[1]
    return (cp - cm) / (2.0 * h)


@dataclass
class ProfileResult:
    params: ModelParams
    settings: RescaleSettings
    profile: ModelState  # full fields
    perturbation: ModelState
    c_u_inf: float
    C_u: float
    t_phys: float
    tau: float
    history: list = field(default_factory=list)  # (tau, E, K, J, c_u, dc, C_u, t)
    verdict: str = "max-steps"
    note: str = ""

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    @property
    def blowup(self) -> bool:
        return self.converged and self.c_u_inf < 0

    @property
    def T(self) -> float:
        return -1.0 / self.c_u_inf if self.c_u_inf < 0 else math.inf

    @property
    def psi(self) -> OddField:
        return self.profile.psi

    def history_array(self) -> np.ndarray:
        return np.array(self.history, dtype=float).reshape(-1, 8)


HISTORY_COLUMNS = ("tau", "E", "K", "J", "c_u", "dc_dtau", "C_u", "t_phys")


def run_to_steady(
    params: ModelParams,
    initial: ModelState | None = None,
    settings: RescaleSettings = RescaleSettings(),
    tol: float | None = None,
    max_tau: float | None = None,
) -> ProfileResult:
    """Step the rescaled flow until ``J < tol_J`` and ``|dc_u/dtau| < tol_dc``.

    ``initial`` is the full field for smooth runs and the perturbation of the
    ``C^alpha`` background for Hölder runs; by default the approximate steady
    state itself.
    """
    if tol is not None:
        settings = replace(settings, tol_J=tol)
    if max_tau is not None:
        settings = replace(settings, max_tau=max_tau)
    M = settings.M
    system = make_system(params, M, settings.holder_M)
    ref = _reference(system)
    if initial is None:
        init = ModelState(OddField(ref[:M].copy()), OddField(ref[M:].copy()))
    else:
        init = ModelState(initial.u.resized(M), initial.omega.resized(M))
    y = system.pack(init, params.C_u0, 0.0)
    tau = 0.0
    history = []
    verdict, note = "max-steps", ""
    next_record = 0.0
    while True:
        if tau >= next_record - 1e-12:
            f, c = system.rhs(y)
            p = y[: 2 * M] - ref
            en = perturbation_energies(p[:M], p[M:], f[:M], f[M : 2 * M])
            dc = _dc_dtau(system, y, f)
            history.append((tau, en["E"], en["K"], en["J"], c, dc, math.exp(y[2 * M]), y[2 * M + 1]))
            next_record += settings.record_every
            if not (np.isfinite(en["E"]) and en["E"] < settings.safeguard_E):
                verdict, note = "diverged", f"energy safeguard tripped at tau={tau:.3f}"
                break
            if en["J"] < settings.tol_J and abs(dc) < settings.tol_dc:
                verdict = "converged"
                break
            if tau >= settings.max_tau:
                break
        try:
            y, used = advance(system, y, min(settings.dtau, next_record - tau + 1e-15))
        except RescaledBlowup:
            verdict, note = "diverged", f"non-finite coefficients at tau={tau:.3f}"
            break
        tau += used
    finite = bool(np.all(np.isfinite(y)))
    c = system.rhs(y)[1] if finite else float("nan")
    full = system.full_fields(y) if finite else init
    pert = system.state_of(y) if finite else init
    if verdict == "converged":
        if c < 0:
            note = f"self-similar blowup, T = {-1.0 / c:.17g}"
        elif abs(c) <= 1e-12:
            note = "no blowup: c_u_inf = 0 (degenerate scaling)"
        else:
            note = "c_u_inf > 0: no finite-time blowup from this profile"
    return ProfileResult(
        params=params,
        settings=settings,
        profile=full,
        perturbation=pert,
        c_u_inf=float(c) + 0.0,
        C_u=float(math.exp(y[2 * M])),
        t_phys=float(y[2 * M + 1]),
        tau=tau,
        history=history,
        verdict=verdict,
        note=note,
    )


def history_fit(result: ProfileResult, column: str = "J") -> dict:
    """Least-squares fit of ``log J`` against ``tau`` over the final decade.

    The final decade is the trailing stretch of the history where ``J`` stays
    below ten times its last recorded value.
    """
    h = result.history_array()
    j = HISTORY_COLUMNS.index(column)
    tau, v = h[:, 0], h[:, j]
    ok = np.isfinite(v) & (v > 0)
    tau, v = tau[ok], v[ok]
    if v.size < 3:
        return {"slope": float("nan"), "r2": float("nan"), "points": int(v.size)}
    last = v[-1]
    above = np.nonzero(v > 10.0 * last)[0]
    start = above[-1] + 1 if above.size else 0
    t, lv = tau[start:], np.log(v[start:])
    if t.size < 3:
        return {"slope": float("nan"), "r2": float("nan"), "points": int(t.size)}
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    return {"slope": float(coef[0]), "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0, "points": int(t.size)}


# -- residual ------------------------------------------------------------------

@dataclass(frozen=True)
class Residual:
    sup: float  # max over grid of both components
    l2: float  # (int_0^{2pi} (f_u^2 + f_w^2) dx)^{1/2}

    @property
    def value(self) -> float:
        return max(self.sup, self.l2)


def steady_residual(profile: ModelState, params: ModelParams, C_u: float = 1.0, holder_M: int = 4096) -> Residual:
    """Size of the rescaled right-hand side at ``profile``.

    For Hölder parameters ``profile`` is the perturbation of the background.
    """
    system = make_system(params, profile.M, holder_M)
    y = system.pack(profile, C_u, 0.0)
    f, _ = system.rhs(y)
    M = profile.M
    fu, fw = f[:M], f[M : 2 * M]
    d = system.disc
    sup = max(float(np.max(np.abs(d.odd_to_grid(fu)))), float(np.max(np.abs(d.odd_to_grid(fw)))))
    l2 = math.sqrt(math.pi * float(fu @ fu + fw @ fw))
    return Residual(sup, l2)


def holder_residual_norms(alpha: float, M: int = 4096) -> dict:
    """``||F_{1,alpha,x}||_rho`` and ``||F_{2,alpha}||_rho`` at truncation ``M``.

    ``F_{1,alpha,x}`` vanishes at the origin, so its rho-norm is finite; the
    value at 0 of the truncated series is returned as ``defect``.
    """
    F1, F2 = error_terms(alpha=alpha, M=M)
    k = np.arange(1, M + 1, dtype=float)
    n1, defect = _rho_sq_dx(F1.coeffs, k)
    return {"F1x": math.sqrt(n1), "F2": math.sqrt(_rho_sq_odd(F2.coeffs)), "defect": abs(defect)}


# -- self-similar solution -------------------------------------------------------

class BlowupSolution:
    """``(u, omega, psi)(x, t) = profile / (1 + c_inf t)`` for ``t < T``."""

    def __init__(self, profile: ModelState, c_u_inf: float):
        if not c_u_inf < 0:
            raise ValueError("a blowup solution needs c_u_inf < 0")
        self.profile = profile
        self.c = c_u_inf
        self.T = -1.0 / c_u_inf

    def factor(self, t: float) -> float:
        if t >= self.T:
            raise ValueError(f"t = {t} is not before the blowup time {self.T}")
        return 1.0 / (1.0 + self.c * t)

    def state(self, t: float) -> ModelState:
        s = self.factor(t)
        return ModelState(self.profile.u * s, self.profile.omega * s)

    def time_derivative(self, t: float) -> ModelState:
        s = -self.c * self.factor(t) ** 2
        return ModelState(self.profile.u * s, self.profile.omega * s)

    def __call__(self, x, t: float) -> dict:
        s = self.factor(t)
        return {
            "u": s * self.profile.u(x),
            "omega": s * self.profile.omega(x),
            "psi": s * self.profile.psi(x),
        }


def reconstruct_blowup(result: ProfileResult) -> BlowupSolution:
    if not result.converged:
        raise ValueError(f"result is not converged ({result.verdict})")
    return BlowupSolution(result.profile, result.c_u_inf)


# -- physical evolution ------------------------------------------------------------

@dataclass
class BlowupCheck:
    T: float
    T_fit: float
    rel_error: float
    t_end: float
    reached_horizon: bool
    times: np.ndarray
    sup_omega: np.ndarray
    sup_u: np.ndarray
    fit_r2: float
    note: str = ""


def _physical_run(system: PhysicalSystem, y: np.ndarray, t_end: float, dt_max: float, every: int = 1):
    """Evolve to ``t_end``; returns samples ``(t, sup|omega|, sup|u|)`` and final ``y``."""
    M = system.M
    d = system.disc
    a = abs(system.params.a)
    t = float(y[-1])
    ts, so, su = [], [], []

    def sample():
        ts.append(t)
        so.append(float(np.max(np.abs(d.odd_to_grid(y[M : 2 * M])))))
        su.append(float(np.max(np.abs(d.odd_to_grid(y[:M])))))

    sample()
    n = 0
    while t < t_end - 1e-14:
        psi_max = system.psi_max(y)
        dt = min(dt_max, 0.5 / (2.0 * max(a, 1e-300) * max(psi_max, 1e-300) * M), t_end - t)
        if dt < 1e-14 * max(1.0, t):
            break
        y = lawson_rk4(y, dt, system.linear_rates(y), lambda v: system.rhs(v)[0])
        if not np.all(np.isfinite(y)):
            break
        t = float(y[-1])
        n += 1
        if n % every == 0 or t >= t_end - 1e-14:
            sample()
    return np.array(ts), np.array(so), np.array(su), y


def physical_blowup_check(
    result: ProfileResult,
    params: ModelParams | None = None,
    horizon: float = 0.9,
    dt_max: float = 1e-2,
    fit_fraction: float = 0.3,
    t_horizon: float | None = None,
) -> BlowupCheck:
    """Evolve the physical equations from the profile and fit the blowup time.

    ``1/sup|omega|`` is fitted by a straight line over the last
    ``fit_fraction`` of the trajectory; its zero is ``T_fit``.  Without
    blowup (``c_u_inf >= 0``) the run covers ``t_horizon`` and reports the
    sup-norm growth only.
    """
    params = params or result.params
    prof = result.profile
    system = PhysicalSystem(replace(params, C_u0=1.0), prof.M)
    y = system.pack(prof, 0.0)
    if result.c_u_inf < 0:
        T = result.T
        t_end = horizon * T
    else:
        T = math.inf
        t_end = t_horizon if t_horizon is not None else 10.0
    ts, so, su, _ = _physical_run(system, y, t_end, dt_max)
    reached = ts[-1] >= t_end - 1e-9
    if not math.isfinite(T):
        return BlowupCheck(T, math.inf, float("nan"), ts[-1], reached, ts, so, su, float("nan"),
                           note=f"sup|omega| grew by a factor {so.max() / so[0]:.6g}")
    sel = ts >= ts[-1] - fit_fraction * ts[-1]
    A = np.vstack([ts[sel], np.ones(sel.sum())]).T
    inv = 1.0 / so[sel]
    coef, *_ = np.linalg.lstsq(A, inv, rcond=None)
    pred = A @ coef
    r2 = 1.0 - float(np.sum((inv - pred) ** 2)) / float(np.sum((inv - inv.mean()) ** 2))
    T_fit = -coef[1] / coef[0]
    note = "" if reached else "time step underflow before the horizon"
    return BlowupCheck(T, float(T_fit), abs(T_fit - T) / T, float(ts[-1]), reached, ts, so, su, r2, note)


def rescaled_vs_physical(params: ModelParams, initial: ModelState, taus, dtau: float = 1e-3) -> list[dict]:
    """Compare the rescaled run with the physical run at checkpoint times.

    At each ``tau`` the rescaled field divided by ``C_u(tau)`` must equal the
    physical field at ``t(tau)``; the physical run starts from
    ``initial / C_u0``.
    """
    M = initial.M
    rs = SmoothSystem(params, M)
    ph = PhysicalSystem(params, M)
    y = rs.pack(initial, params.C_u0, 0.0)
    z = ph.pack(ModelState(initial.u * (1.0 / params.C_u0), initial.omega * (1.0 / params.C_u0)), 0.0)
    out = []
    tau = 0.0
    for target in sorted(taus):
        while tau < target - 1e-14:
            h = min(dtau, target - tau)
            y, used = advance(rs, y, h)
            tau += used
        C = math.exp(y[2 * M])
        t_target = float(y[2 * M + 1])
        _, _, _, z = _physical_run(ph, z, t_target, dtau * C, every=10**9)
        scaled = y[: 2 * M] / C
        phys = z[: 2 * M]
        err = float(np.max(np.abs(scaled - phys)) / max(np.max(np.abs(phys)), 1e-300))
        out.append({"tau": tau, "t": t_target, "C_u": C, "rel_error": err})
    return out


# -- sweeps -------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    c_u_inf: float
    T: float
    E_final: float
    verdict: str
    note: str = ""


def _sweep_one(args) -> SweepRow:
    axis, value, base, settings = args
    params = replace(base, **{{"a": "a", "nu": "nu", "alpha": "alpha"}[axis]: value})
    note = ""
    if axis == "a" and value < OUTSIDE_FORMULATION_A:
        note = "outside formulation (a below 0.6: focusing blowup is not captured)"
    try:
        r = run_to_steady(params, settings=settings)
    except Exception as exc:  # recorded per row; a sweep never aborts
        return SweepRow(axis, value, float("nan"), float("nan"), float("nan"), "error", f"{type(exc).__name__}: {exc}")
    E = r.history[-1][1] if r.history else float("nan")
    return SweepRow(axis, value, r.c_u_inf, r.T, E, r.verdict, "; ".join(x for x in (note, r.note) if x))


def sweep(axis: str, values, base: ModelParams = ModelParams(), settings: RescaleSettings = RescaleSettings(), jobs: int = 1) -> list[SweepRow]:
    """Independent ``run_to_steady`` per value, rows kept in input order."""
    if axis not in ("a", "nu", "alpha"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    tasks = [(axis, float(v), base, settings) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


SWEEP_HEADER = ("axis", "value", "c_u_inf", "T", "E_final", "verdict", "note")


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in SWEEP_HEADER])
    return buf.getvalue()


def sweep_hash(axis: str, values, base: ModelParams, settings: RescaleSettings) -> str:
    key = repr((axis, [float(v) for v in values], asdict(base), asdict(settings)))
    return hashlib.sha256(key.encode()).hexdigest()[:12]


# -- profile dump ---------------------------------------------------------------------

def write_profile(result: ProfileResult, path) -> None:
    p = result.params
    lines = [
        f"# a = {p.a:.17g}",
        f"# nu = {p.nu:.17g}",
        f"# alpha = {p.alpha:.17g}",
        f"# M = {result.profile.M}",
        f"# c_u_inf = {result.c_u_inf:.17g}",
        f"# verdict = {result.verdict}",
        "# field u",
    ]
    lines += [f"{v:.17g}" for v in result.profile.u.coeffs]
    lines.append("# field omega")
    lines += [f"{v:.17g}" for v in result.profile.omega.coeffs]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_profile(path) -> tuple[dict, ModelState]:
    header, fields, cur = {}, {"u": [], "omega": []}, None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# field "):
                cur = line.split()[-1]
            elif line.startswith("#"):
                k, v = line[1:].split("=", 1)
                header[k.strip()] = v.strip()
            else:
                fields[cur].append(float(line))
    return header, ModelState(OddField(fields["u"]), OddField(fields["omega"]))
