"""Tabulate lambda3 / eps^2 against eps for several means, plus the interior-shift threshold.

Writes two CSV files: ``lambda3.csv`` (mean, eps, lambda3, ratio, predicted)
and ``threshold.csv`` (mean, c, lambda3 at fixed eps, sign).
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kubo_rigidity.kubo_ando import parse_mean_spec
from kubo_rigidity.rigidity import lambda3_closed_form, lambda3_numeric


@dataclass
class CurveConfig:
    means: list[str] = field(default_factory=lambda: ["geometric:0.5", "harmonic:0.5", "log:1", "duallog:0.5"])
    eps: list[float] = field(default_factory=lambda: list(np.geomspace(0.2, 0.005, 12)))
    threshold_eps: float = 0.02
    c_values: list[float] = field(default_factory=lambda: list(np.linspace(0.0, 1.5, 16)))
    outdir: Path = Path("results")


def curves(cfg: CurveConfig) -> list[dict]:
    rows = []
    for spec in cfg.means:
        f = parse_mean_spec(spec)
        for e in cfg.eps:
            lam = lambda3_closed_form(f, e)
            rows.append({
                "mean": f.spec,
                "eps": e,
                "lambda3": lam,
                "lambda3_numeric": lambda3_numeric(f, e),
                "ratio": lam / e**2,
                "predicted": -4 / 3 * f.kappa,
            })
    return rows


def threshold(cfg: CurveConfig) -> list[dict]:
    rows = []
    for spec in cfg.means:
        f = parse_mean_spec(spec)
        for c in cfg.c_values:
            lam = lambda3_closed_form(f, cfg.threshold_eps, c)
            rows.append({"mean": f.spec, "c": c, "c_star": 4 / 3 * f.kappa, "lambda3": lam, "violated": lam < 0})
    return rows


def write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", type=Path, default=CurveConfig.outdir)
    p.add_argument("--mean", action="append", dest="means")
    args = p.parse_args()
    cfg = CurveConfig(outdir=args.outdir)
    if args.means:
        cfg.means = args.means
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    rows = curves(cfg)
    write_csv(cfg.outdir / "lambda3.csv", rows)
    write_csv(cfg.outdir / "threshold.csv", threshold(cfg))
    for spec in cfg.means:
        last = [r for r in rows if r["mean"] == parse_mean_spec(spec).spec][-1]
        print(f"{last['mean']:>14}  lambda3/eps^2 at eps={last['eps']:.4f}: {last['ratio']:+.6f}  (predicted {last['predicted']:+.6f})")


if __name__ == "__main__":
    main()
