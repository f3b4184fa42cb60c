"""Parameter sweep over a, nu or alpha through the CLI, in parallel.

    python3 scripts/run_sweep.py --axis nu --values 0,1e-4,1e-3 --jobs 3
"""

import argparse
import sys

from houli.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--axis", default="a", choices=("a", "nu", "alpha"))
    ap.add_argument("--values", default="0.99,0.97,0.95,0.9")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results")
    ap.add_argument("--M", default="64")
    args = ap.parse_args()
    argv = ["sweep", "--jobs", str(args.jobs), "--axis", args.axis, "--values", args.values,
            "--M", args.M, "--dtau", "4e-3", "--max_tau", "800", "--out_dir", args.out]
    if args.axis == "alpha":
        argv += ["--a", "1", "--max_tau", "200"]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
