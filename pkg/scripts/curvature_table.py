"""Print numeric curvature, f'(1) and the tabulated reference value for each family."""

from __future__ import annotations

from kubo_rigidity.kubo_ando import Family, curvature_numeric, make_mean, table_kappa

ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def main() -> None:
    print(f"{'family':>10} {'alpha':>5} {'kappa':>10} {'numeric':>10} {'table':>10} {'f1':>8}")
    for fam in Family:
        for a in ALPHAS:
            f = make_mean(fam, a)
            table = table_kappa(f)
            shown = "n/a" if table is None else f"{table:.6f}"
            flag = "" if table is None or abs(table - f.kappa) < 1e-6 else "  <- differs"
            print(f"{fam.value:>10} {a:5.2f} {f.kappa:10.6f} {curvature_numeric(f):10.6f} {shown:>10} {f.d1:8.4f}{flag}")


if __name__ == "__main__":
    main()
