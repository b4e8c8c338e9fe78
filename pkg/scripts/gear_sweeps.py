"""One-factor back-drive efficiency sweeps around the standard gear set."""

import argparse

from spadesign.data import export_table
from spadesign.mechanisms import backdrive_efficiency, gear_ratio_exact, one_factor_sweep, standard_gear_set

SWEEPS = {
    "mu_g": [0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15],
    "zs": [10, 11, 12, 13, 14],
    "zp1": [37, 38, 39, 40, 41],
    "zp2": [30, 31, 32, 33],
    "zr2": [79, 80, 81, 82, 83],
    "eps_a": [1.2, 1.4, 1.6, 1.8],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu-g", type=float, default=0.1)
    ap.add_argument("--out")
    args = ap.parse_args()

    base = standard_gear_set(mu_g=args.mu_g)
    print(f"# ratio {gear_ratio_exact(base)}, efficiency {backdrive_efficiency(base):.5f}")
    rows = []
    for field, values in SWEEPS.items():
        for v, eta in one_factor_sweep(base, field, values):
            rows.append([field, v, eta])
    text = export_table(["factor", "value", "backdrive_efficiency"], rows, args.out)
    if not args.out:
        print(text, end="")


if __name__ == "__main__":
    main()
