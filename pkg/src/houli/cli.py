"""Command-line entry point: simulate | rescale | certify | identities | sweep.

Exit codes: 0 success or honest negative verdict, 1 internal error,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import traceback
from dataclasses import fields
from pathlib import Path

import numpy as np

from .certify import full_certificate, write_certificate
from .config import CONFIGS, ConfigError, build_config, parse_config_text
from .identities import format_table, run_identities
from .model import ModelParams, ModelState, PhysicalSystem, lawson_rk4
from .pipeline import (
    HISTORY_COLUMNS,
    RescaleSettings,
    read_profile,
    run_to_steady,
    sweep,
    sweep_csv,
    sweep_hash,
    write_profile,
)
from .svg import line_plot

__all__ = ["main", "build_parser"]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="houli", description="Spectral rescaling and certification toolkit for the 1D Hou-Li model.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in CONFIGS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value file")
        s.add_argument("--jobs", type=int, default=1, help="parallel sweep rows")
    return p


def _split_overrides(extra: list[str]) -> dict[str, str]:
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {tok}")
            val = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = val
    return out


# -- commands ----------------------------------------------------------------------

def cmd_simulate(cfg, jobs: int = 1) -> int:
    params = ModelParams(a=cfg.a, nu=cfg.nu)
    if cfg.initial == "steady":
        state = ModelState.steady(cfg.M)
    else:
        _, state = read_profile(cfg.initial)
        state = ModelState(state.u.resized(cfg.M), state.omega.resized(cfg.M))
    system = PhysicalSystem(params, cfg.M)
    d = system.disc
    y = system.pack(state, 0.0)
    rows = []

    def sample():
        u, w = y[: cfg.M], y[cfg.M : 2 * cfg.M]
        so = float(np.max(np.abs(d.odd_to_grid(w))))
        su = float(np.max(np.abs(d.odd_to_grid(u))))
        # energy proxies: L2 norms of u and omega over a period
        rows.append((y[-1], so, su, math.sqrt(math.pi * float(u @ u)), math.sqrt(math.pi * float(w @ w)), 1.0 / so if so > 0 else math.inf))

    sample()
    n = 0
    note = "reached t_end"
    while y[-1] < cfg.t_end - 1e-14:
        psi_max = system.psi_max(y)
        dt = min(cfg.dt_max, cfg.t_end - y[-1])
        if abs(cfg.a) > 0 and psi_max > 0:
            dt = min(dt, 0.5 / (2 * abs(cfg.a) * psi_max * cfg.M))
        if dt < 1e-14:
            note = "time step underflow"
            break
        y_new = lawson_rk4(y, dt, system.linear_rates(y), lambda v: system.rhs(v)[0])
        if not np.all(np.isfinite(y_new)):
            note = "non-finite state"
            break
        y = y_new
        n += 1
        if n % cfg.sample_every == 0 or y[-1] >= cfg.t_end - 1e-14:
            sample()
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, ("t", "sup_omega", "sup_u", "l2_u", "l2_omega", "inv_sup_omega"), rows)
    if cfg.svg:
        t = [r[0] for r in rows]
        Path(cfg.svg).write_text(line_plot([(t, [r[1] for r in rows], "sup |omega|")], "sup-norm of omega", "t", "sup |omega|"))
    print(f"simulate: {len(rows)} samples to t = {y[-1]:.17g} ({note}); wrote {out}")
    return 0


def cmd_rescale(cfg, jobs: int = 1) -> int:
    params = ModelParams(a=cfg.a, nu=cfg.nu, alpha=cfg.alpha, C_u0=cfg.C_u0)
    settings = RescaleSettings(
        M=cfg.M, dtau=cfg.dtau, tol_J=cfg.tol_J, tol_dc=cfg.tol_dc, max_tau=cfg.max_tau,
        record_every=cfg.record_every, holder_M=cfg.holder_M,
    )
    r = run_to_steady(params, settings=settings)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"a{cfg.a:g}-nu{cfg.nu:g}-alpha{cfg.alpha:g}-M{cfg.M}"
    write_profile(r, out / f"profile-{stem}.txt")
    _write_csv(out / f"history-{stem}.csv", HISTORY_COLUMNS, r.history)
    print(f"verdict = {r.verdict}")
    print(f"c_u_inf = {r.c_u_inf:.17g}")
    print(f"T = {r.T:.17g}")
    print(f"tau = {r.tau:.17g}")
    if params.a == 1.0 and params.alpha == 1.0 and r.converged and abs(r.c_u_inf) <= 1e-12:
        print("note = no blowup at a=1 (c_u_inf = 0, degenerate scaling)")
    elif r.note:
        print(f"note = {r.note}")
    return 0


def cmd_certify(cfg, jobs: int = 1) -> int:
    sigma = None if math.isnan(cfg.sigma) else cfg.sigma
    margin = None if math.isnan(cfg.margin) else cfg.margin
    cert = full_certificate(cfg.N, cfg.delta, sigma=sigma, margin=margin, tamper=cfg.tamper)
    path = write_certificate(cert, cfg.out_dir)
    print(f"N = {cert.N}, delta = {cert.delta:g}, sigma = {cert.sigma:.17g}, margin = {cert.margin:.17g}")
    print(f"approximate lambda_min = {cert.eigen.approx_lambda_min:.17g}")
    if cert.eigen.certified:
        print(f"rigorous lambda_min > {cert.eigen.lambda_min_lower:.17g} (required > 2/N = {2 / cert.N:.17g})")
    else:
        print(f"eigenvalue check: not certified ({cert.eigen.reason})")
    t = cert.tail
    print(f"tail: head bound {t.head_bound:.6g} vs -2/N, tail bound {t.tail_bound:.6g} vs delta - 3/N: "
          f"{'verified' if t.certified else 'failed (' + t.reason + ')'}")
    print(f"verdict = {cert.verdict}")
    print(f"wrote {path}")
    return 0


def cmd_identities(cfg, jobs: int = 1) -> int:
    rows = run_identities(tol=cfg.tol, seed=cfg.seed, M=cfg.M, trials=cfg.trials, inject_sign_error=cfg.inject_sign_error)
    print(format_table(rows))
    failed = [r.name for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return 0


def cmd_sweep(cfg, jobs: int = 1) -> int:
    if cfg.axis not in ("a", "nu", "alpha"):
        raise ConfigError(f"axis: expected a, nu or alpha, got {cfg.axis!r}")
    values = cfg.value_list()
    base = ModelParams(a=cfg.a, nu=cfg.nu, alpha=cfg.alpha, C_u0=cfg.C_u0)
    settings = RescaleSettings(M=cfg.M, dtau=cfg.dtau, tol_J=cfg.tol_J, tol_dc=cfg.tol_dc, max_tau=cfg.max_tau, holder_M=cfg.holder_M)
    rows = sweep(cfg.axis, values, base, settings, jobs=jobs)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = f"sweep-{cfg.axis}-{sweep_hash(cfg.axis, values, base, settings)}"
    (out / f"{name}.csv").write_text(sweep_csv(rows), newline="")
    if cfg.svg:
        xs = [r.value for r in rows]
        ys = [r.c_u_inf for r in rows]
        (out / f"{name}.svg").write_text(line_plot([(xs, ys, "c_u_inf")], f"c_u_inf against {cfg.axis}", cfg.axis, "c_u_inf"))
    for r in rows:
        print(f"{cfg.axis} = {r.value:.17g}: {r.verdict}, c_u_inf = {r.c_u_inf:.17g}" + (f" [{r.note}]" if r.note else ""))
    print(f"wrote {out / (name + '.csv')}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "rescale": cmd_rescale,
    "certify": cmd_certify,
    "identities": cmd_identities,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        file_values = parse_config_text(Path(args.config).read_text()) if args.config else {}
        cfg = build_config(args.command, file_values, _split_overrides(extra))
        return COMMANDS[args.command](cfg, jobs=args.jobs)
    except ConfigError as exc:
        print(f"houli {args.command}: config error: {exc}", file=sys.stderr)
        valid = ", ".join(f.name for f in fields(CONFIGS[args.command]))
        print(f"valid keys: {valid}", file=sys.stderr)
        return 2
    except OSError as exc:
        if args.config and getattr(exc, "filename", None) == args.config:
            print(f"houli {args.command}: config error: {exc}", file=sys.stderr)
            return 2
        traceback.print_exc()
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
