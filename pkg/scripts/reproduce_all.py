"""Regenerate every result reported by the acceptance suite into one directory.

    python3 scripts/reproduce_all.py --out results
"""

import argparse
import time
from pathlib import Path

import numpy as np

from houli.certify import full_certificate, write_certificate
from houli.cli import main as cli_main
from houli.model import ModelParams
from houli.pipeline import (
    RescaleSettings,
    holder_residual_norms,
    physical_blowup_check,
    run_to_steady,
    steady_residual,
    write_profile,
)
from houli.svg import line_plot


def log(msg: str) -> None:
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--M", type=int, default=128)
    ap.add_argument("--dtau", type=float, default=2e-3)
    ap.add_argument("--certify-N", type=int, nargs="+", default=[200, 700, 1000])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for N in args.certify_N:
        cert = full_certificate(N)
        write_certificate(cert, out)
        log(f"certificate N={N}: {cert.verdict} (approx lambda_min {cert.eigen.approx_lambda_min:.7g})")

    cli_main(["identities"])

    settings = RescaleSettings(M=args.M, dtau=args.dtau, max_tau=600)
    r = run_to_steady(ModelParams(a=0.95), settings=settings)
    write_profile(r, out / "profile-a0.95.txt")
    log(f"a=0.95: {r.verdict}, c_u_inf={r.c_u_inf:.17g}, residual={steady_residual(r.profile, r.params).value:.3g}")
    h = r.history_array()
    (out / "J-history-a0.95.svg").write_text(
        line_plot([(h[:, 0].tolist(), np.log10(h[:, 3]).tolist(), "log10 J")], "J along the rescaled flow", "tau", "log10 J")
    )

    rep = physical_blowup_check(r)
    log(f"physical check: T={rep.T:.10g}, T_fit={rep.T_fit:.10g}, rel error={rep.rel_error:.3g}")
    (out / "inverse-sup-omega.svg").write_text(
        line_plot([(rep.times.tolist(), (1 / rep.sup_omega).tolist(), "1/sup|omega|")], "physical evolution", "t", "1/sup|omega|")
    )

    v = run_to_steady(ModelParams(a=0.95, nu=1e-3, C_u0=0.0025), settings=settings)
    log(f"viscous: {v.verdict}, c_u_inf={v.c_u_inf:.17g}, max C_u={v.history_array()[:, 6].max():.6g}")

    for al in (0.99, 0.97, 0.95):
        n = holder_residual_norms(al)
        log(f"alpha={al}: ||F1x||/|a-1|={n['F1x'] / (1 - al):.6g}, ||F2||/|a-1|={n['F2'] / (1 - al):.6g}")

    cli_main(["sweep", "--axis", "a", "--values", "0.99,0.97,0.95,0.9", "--M", "64", "--dtau", "4e-3",
              "--max_tau", "800", "--out_dir", str(out)])


if __name__ == "__main__":
    main()
