"""Drop-stage displacement against the clutch force fraction zeta."""

import argparse

import numpy as np

from spadesign.clutch import oscillation_threshold, reference_drop_setup, zeta_sweep
from spadesign.data import export_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=26)
    ap.add_argument("--mu-kpa", type=float, default=17.0)
    ap.add_argument("--jm", type=float, default=39.6)
    ap.add_argument("--out")
    args = ap.parse_args()

    base = reference_drop_setup(mu_kpa=args.mu_kpa, jm=args.jm)
    rows = [[z, r.displacement * 1e3, r.oscillates] for z, r in zeta_sweep(base, np.linspace(0, 1, args.n))]
    text = export_table(["zeta", "displacement_mm", "oscillates"], rows, args.out)
    if not args.out:
        print(text, end="")
    print(f"# oscillation threshold zeta = {oscillation_threshold(base):.4f}")


if __name__ == "__main__":
    main()
