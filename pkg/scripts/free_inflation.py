"""Compare the loaded solver with the closed-form free-inflation curve.

For each stretch the closed-form pressure (fixed aperture radius) is applied
to a membrane with a 1 mm contact disc and zero force.  The apex stretch and
the areal-mean stretch sqrt(A / pi r_f^2) of the solved profile are printed
next to the nominal stretch; also prints the current-radius curve turning points.
"""

import argparse
import math

import numpy as np
from scipy.integrate import trapezoid

from spadesign.data import export_table
from spadesign.material import GentMaterial
from spadesign.membrane import MembraneDesign, free_inflation_pressure, shoot, spheroid_radius


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--stretches", default="1.1,1.2,1.3,1.4")
    ap.add_argument("--thickness-mm", type=float, default=2.0)
    ap.add_argument("--outer-mm", type=float, default=70.0)
    ap.add_argument("--out")
    args = ap.parse_args()

    m = GentMaterial.from_kpa(31.7, 39.6)
    t0, rf = args.thickness_mm * 1e-3, args.outer_mm * 1e-3
    d = MembraneDesign(t0, 1e-3, m, outer_radius=rf)
    rows = []
    for lam in (float(v) for v in args.stretches.split(",")):
        p = free_inflation_pressure(lam, t0, rf, m)
        s = shoot(d, p, 0.0)
        area = trapezoid(2 * np.pi * s.R * s.lambda1, s.r) + math.pi * d.contact_radius**2
        rows.append([lam, p, s.lambda1[0], math.sqrt(area / (math.pi * rf * rf)), s.height])
    text = export_table(["stretch", "pressure_pa", "apex_stretch", "areal_mean_stretch", "height_m"], rows, args.out)
    if not args.out:
        print(text, end="")

    lam = np.linspace(1.0, m.lockup_stretch("equibiaxial", 0.999) * 0.9999, 3000)
    P = np.array([free_inflation_pressure(v, t0, spheroid_radius(v, rf), m) for v in lam])
    turns = np.nonzero(np.diff(np.sign(np.diff(P))))[0] + 1
    print("# current-radius curve turning points (stretch, kPa):",
          ", ".join(f"({lam[i]:.3f}, {P[i] / 1e3:.3f})" for i in turns))


if __name__ == "__main__":
    main()
