#!/usr/bin/env python3
"""Regenerate the standard result-figure CSV families into an output directory.

Each block is one figure-style experiment on the baseline link:

  est_vs_re_sth_<s>.csv      adaptive throughput vs redundancy rate, one file
                             per outage ceiling (gated plateau family)
  est_vs_sth_<scheme>.csv    optimal throughput vs outage ceiling
  est_vs_n_<scheme>.csv      optimal throughput vs aperture count (n_a=n_b=n_e)
  est_vs_sigma_<scheme>.csv  optimal throughput vs misalignment spread
  est_grid_fixed.csv         2-D fixed-scheme throughput over (r_e, r_b)

Usage: python scripts/figure_sweeps.py [--outdir results] [--mc] [--trials N]
"""

from __future__ import annotations

import argparse
import pathlib

from fso_secrecy import cli


def run(argv: list[str]) -> None:
    code = cli.main(argv)
    if code != 0:
        raise SystemExit(f"sweep failed with exit code {code}: {argv}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--mc", action="store_true", help="add Monte-Carlo columns")
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    mc = ["--mc", "--trials", str(args.trials), "--seed", str(args.seed)] if args.mc else []

    for s_th in ("1.0", "0.6", "0.4", "0.2"):
        run(
            ["sweep", "--axis", "r_e", "--min", "0.05", "--max", "6", "--steps", "120",
             "--scheme", "adaptive", "--cb", "6", "--sth", s_th,
             "--out", str(outdir / f"est_vs_re_sth_{s_th}.csv"), *mc]
        )

    for scheme in ("adaptive", "fixed"):
        run(
            ["sweep", "--axis", "s_th", "--min", "0.05", "--max", "1", "--steps", "20",
             "--scheme", scheme, "--cb", "4",
             "--out", str(outdir / f"est_vs_sth_{scheme}.csv"), *mc]
        )
        run(
            ["sweep", "--axis", "n", "--min", "1", "--max", "6", "--steps", "6",
             "--scheme", scheme, "--cb", "4", "--sth", "0.4",
             "--out", str(outdir / f"est_vs_n_{scheme}.csv"), *mc]
        )
        run(
            ["sweep", "--axis", "sigma_s", "--min", "1", "--max", "3", "--steps", "9",
             "--scheme", scheme, "--cb", "4", "--sth", "0.2",
             "--out", str(outdir / f"est_vs_sigma_{scheme}.csv"), *mc]
        )

    run(
        ["sweep", "--axis", "r_e_x_r_b", "--min", "0.1", "--max", "6", "--steps", "40",
         "--scheme", "fixed", "--sth", "1.0",
         "--out", str(outdir / "est_grid_fixed.csv")]
    )
    print(f"wrote sweeps to {outdir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
